#include "khom/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"khom: K-homology verification workbench for elliptic operators on the circle"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "khom-out";
  std::optional<std::uint64_t> seed;
  bool parallel = false;

  const std::vector<std::string> suites = {"symbol", "assemble", "funcalc",  "normalize",
                                           "verify", "index",    "propagate", "molly",
                                           "garding", "lemma1035", "all"};
  for (const auto& name : suites) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "seed override");
    sub->add_flag("--parallel-ladder", parallel, "assemble ladder levels concurrently");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    khom::RunConfig cfg = khom::RunConfig::load(config_path, out_dir, seed, parallel);
    return khom::run_subcommand(sub, cfg);
  } catch (const khom::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const khom::precondition_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
