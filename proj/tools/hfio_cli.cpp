// hfio_cli <experiment> --config cfg.json --out dir
// exit status: 0 all verdicts pass, 2 some verdict fails, 1 error.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hfio/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fourier integral operator norm experiments"};
  app.require_subcommand(1, 1);

  std::string config, out = "out";
  const char* kinds[] = {"norm", "decouple", "wolff", "wave", "nlw", "sharpness", "curvature", "atom", "run"};
  for (const char* k : kinds) {
    auto* sub = app.add_subcommand(k, std::string(k) == "run" ? "run every experiment in the config" : std::string("run ") + k + " experiments");
    sub->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string kind = app.get_subcommands().front()->get_name();
  try {
    const auto rs = hfio::run_experiment(config, out, kind == "run" ? "" : kind);
    for (const auto& e : rs.summary["experiments"]) {
      std::cout << (e["pass"].get<bool>() ? "PASS " : "FAIL ") << e["name"].get<std::string>();
      for (const auto& [v, ok] : e["verdicts"].items())
        if (!ok.get<bool>()) std::cout << " [" << v << "]";
      std::cout << "\n";
    }
    std::cout << "summary: " << (std::filesystem::path(out) / "summary.json").string() << "\n";
    return rs.pass ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
