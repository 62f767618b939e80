// Experiment harness: run configured sweeps, convert results for plotting,
// and materialize datasets.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "tgp/experiment.hpp"
#include "tgp/parallel.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;

int exit_code_for(const tgp::Error& e) {
  switch (e.code()) {
    case tgp::ErrorCode::ConfigInvalid:
    case tgp::ErrorCode::SchemaMismatch: return kExitConfig;
    default: return kExitCompute;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tempered Gaussian-process experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  auto* run = app.add_subcommand("run", "Run an experiment config (regress-sweep, classify-sweep, probe, gen-data)");
  run->add_option("--config", config_path, "Experiment JSON config")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out_dir, "Override the output directory");

  std::string input_csv, figure, output_csv;
  auto* plot = app.add_subcommand("plot-data", "Convert results.csv into long-format x,y,series rows");
  plot->add_option("--input", input_csv, "results.csv from a run")->required();
  plot->add_option("--figure", figure, "fig1, fig2a, fig2b or fig3b")->required();
  plot->add_option("--output", output_csv, "Write here instead of stdout");

  std::string gen_config;
  auto* gen = app.add_subcommand("gen-data", "Write train.csv/test.csv for a data descriptor");
  gen->add_option("--config", gen_config, "gen-data JSON config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run || *gen) {
      auto cfg = tgp::load_experiment_config(*run ? config_path : gen_config);
      if (*gen && cfg.experiment != tgp::ExperimentKind::GenData)
        throw tgp::Error(tgp::ErrorCode::ConfigInvalid, "'experiment': gen-data command needs experiment 'gen-data'");
      if (seed) cfg.seed = *seed;
      if (out_dir) cfg.output_dir = *out_dir;
      const auto art = tgp::run_experiment(cfg, tgp::threads_from_env());
      std::cout << "wrote " << art.output_dir.string() << '\n';
    } else if (*plot) {
      const auto fig = tgp::parse_figure(figure);
      if (output_csv.empty()) {
        tgp::emit_plot_data(input_csv, fig, std::cout);
      } else {
        std::ofstream out(output_csv);
        tgp::emit_plot_data(input_csv, fig, out);
      }
    }
  } catch (const tgp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == tgp::ErrorCode::InvalidArgument && *plot ? kExitConfig : exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCompute;
  }
  return 0;
}
