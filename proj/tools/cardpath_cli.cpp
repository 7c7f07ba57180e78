#include <iostream>

#include <CLI11.hpp>

#include "cardpath/experiment.hpp"

int main(int argc, char** argv) {
  namespace ex = cardpath::experiment;
  CLI::App app{"Path-sum experiment runner"};
  ex::CommandLine cli;
  std::uint64_t seed = 0;
  app.add_option("--config", cli.config, "experiment config (key = value lines)")->required();
  app.add_option("--out", cli.out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "overrides the config seed");
  app.add_flag("--quiet", cli.quiet, "suppress the summary line");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ex::Status::validation_error);
  }
  if (*seed_opt) cli.seed = seed;
  return static_cast<int>(ex::execute(cli, std::cout, std::cerr));
}
