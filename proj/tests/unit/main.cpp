#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest/doctest.h>

#include <spdlog/spdlog.h>

int main(int argc, char** argv) {
  // Expected warnings (extrapolation, truncated histories) would drown the test output.
  spdlog::set_level(spdlog::level::err);
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
