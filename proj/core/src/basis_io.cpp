#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "rtrom/errors.hpp"
#include "rtrom/rom.hpp"

namespace rtrom {

namespace {

constexpr char kMagic[6] = {'R', 'O', 'M', 'B', '1', '\0'};

std::uint64_t swap_bytes(std::uint64_t v) {
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r = (r << 8) | ((v >> (8 * i)) & 0xffu);
  return r;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_parameter(const Parameter& mu) {
  std::string s;
  for (std::size_t i = 0; i < mu.size(); ++i) s += (i ? "," : "") + format_double(mu[i]);
  return s;
}

Parameter parse_parameter(const std::string& s) {
  Parameter mu;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) mu.push_back(std::stod(item));
  return mu;
}

void write_payload(std::ostream& out, const double* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      auto bits = swap_bytes(std::bit_cast<std::uint64_t>(data[i]));
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
}

void read_payload(std::istream& in, double* data, std::size_t count, const std::string& what) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
    throw FormatError("basis file: truncated payload '" + what + "'");
  if constexpr (std::endian::native != std::endian::little) {
    for (std::size_t i = 0; i < count; ++i)
      data[i] = std::bit_cast<double>(swap_bytes(std::bit_cast<std::uint64_t>(data[i])));
  }
}

template <typename Derived>
void write_matrix(std::ostream& out, const Eigen::MatrixBase<Derived>& m) {
  const Matrix dense = m;  // contiguous column-major copy
  write_payload(out, dense.data(), static_cast<std::size_t>(dense.size()));
}

Matrix read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  Matrix m(rows, cols);
  read_payload(in, m.data(), static_cast<std::size_t>(m.size()), what);
  return m;
}

}  // namespace

void save_basis(const ReducedBasis& basis, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open basis file for writing: " + path);
  out.write(kMagic, sizeof kMagic);
  out << "hash=" << basis.discretization_hash() << "\n"
      << "directions=" << basis.num_directions() << "\n"
      << "dofs=" << basis.num_dofs() << "\n"
      << "pieces=" << basis.num_pieces() << "\n"
      << "r=" << basis.size() << "\n"
      << "window=" << basis.window << "\n"
      << "eps_rom=" << format_double(basis.eps_rom) << "\n"
      << "eps_qr=" << format_double(basis.eps_qr) << "\n"
      << "prenormalize=" << (basis.prenormalize ? 1 : 0) << "\n"
      << "samples=" << basis.samples.size() << "\n";
  for (std::size_t i = 0; i < basis.samples.size(); ++i)
    out << "sample" << i << "=" << format_parameter(basis.samples[i]) << "\n";
  out << "end\n";
  write_matrix(out, basis.U());
  write_matrix(out, basis.S1());
  write_matrix(out, basis.Sw());
  for (int s = 0; s <= basis.num_pieces(); ++s) write_matrix(out, basis.affine(s));
  if (!out) throw FormatError("failed writing basis file: " + path);
}

ReducedBasis load_basis(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open basis file: " + path);
  char magic[sizeof kMagic] = {};
  in.read(magic, sizeof magic);
  if (in.gcount() != sizeof magic || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw FormatError("basis file: bad magic in " + path);

  std::map<std::string, std::string> kv;
  std::string line;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("basis file: malformed manifest line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!ended) throw FormatError("basis file: manifest not terminated");
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError("basis file: missing manifest key '" + key + "'");
    return it->second;
  };

  ReducedBasis b;
  try {
    b = ReducedBasis(std::stoi(get("directions")), std::stoi(get("dofs")), std::stoi(get("pieces")),
                     std::stoull(get("hash")));
    b.window = std::stoi(get("window"));
    b.eps_rom = std::stod(get("eps_rom"));
    b.eps_qr = std::stod(get("eps_qr"));
    b.prenormalize = get("prenormalize") == "1";
    const int ns = std::stoi(get("samples"));
    for (int i = 0; i < ns; ++i) b.samples.push_back(parse_parameter(get("sample" + std::to_string(i))));
  } catch (const std::logic_error& e) {
    throw FormatError(std::string("basis file: bad manifest value: ") + e.what());
  }
  const int r = std::stoi(get("r"));
  if (r < 0) throw FormatError("basis file: negative basis size");
  const Eigen::Index nfull = static_cast<Eigen::Index>(b.num_directions()) * b.num_dofs();
  b.U_ = read_matrix(in, nfull, r, "U");
  b.S1_ = read_matrix(in, b.num_dofs(), r, "S1");
  b.Sw_ = read_matrix(in, b.num_dofs(), r, "Sw");
  for (int s = 0; s <= b.num_pieces(); ++s)
    b.affine_[static_cast<std::size_t>(s)] = read_matrix(in, r, r, "A" + std::to_string(s));
  b.r_ = r;
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("basis file: trailing bytes after payload");
  return b;
}

ReducedBasis load_basis(const std::string& path, const DiscreteOperators& ops) {
  ReducedBasis b = load_basis(path);
  b.validate(ops);
  return b;
}

}  // namespace rtrom
