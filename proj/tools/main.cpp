#include <CLI11.hpp>

#include <exitwalk/version.hpp>

int main(int argc, char** argv) {
  CLI::App app{"exitwalk: exact two-sided exit quantities for lattice walks"};
  app.set_version_flag("--version", exitwalk::kVersion);
  app.require_subcommand(0);
  CLI11_PARSE(app, argc, argv);
  return 0;
}
