// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0
//
// noisygrpo: advantages | train | diagnose | noise

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "noisygrpo/commands.hpp"

int main(int argc, char** argv) {
  using namespace noisygrpo;

  CLI::App app{"Noise-injected GRPO laboratory"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("--seed", seed, "Random seed (overrides config seeds)");
  app.add_flag("--quiet", quiet, "Suppress progress output");

  // advantages
  auto* adv = app.add_subcommand("advantages", "Compute advantages for rollout-group JSONL");
  std::string adv_input = "-";
  double alpha = 0.1, gamma = 0.01;
  std::string mode = "full";
  adv->add_option("input", adv_input, "Input JSONL path ('-' for stdin)");
  adv->add_option("--alpha", alpha, "Observation variance")->capture_default_str();
  adv->add_option("--gamma", gamma, "Prior-variance scale")->capture_default_str();
  adv->add_option("--mode", mode, "vanilla | naive | full")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Run one training experiment");
  TrainOptions topt;
  std::string out_dir;
  bool no_group_log = false;
  train->add_option("--config", topt.config_path, "key = value config file")->required();
  train->add_option("--output", out_dir, "Output directory")->required();
  train->add_flag("--no-group-log", no_group_log, "Skip writing groups.jsonl");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "Residual normality diagnostics over advantage logs");
  DiagnoseOptions dopt;
  std::string which = "both";
  std::string diag_out;
  diag->add_option("logs", dopt.log_paths, "Advantage JSONL logs (groups.jsonl or advantages output)")
      ->required();
  diag->add_option("--which", which, "obs_minus_prior | post_minus_obs | both")->capture_default_str();
  diag->add_option("--output-dir", diag_out, "Directory for report.json and CSV exports");
  diag->add_option("--bins", dopt.histogram_bins, "Histogram bins")->capture_default_str();

  // noise
  auto* noise = app.add_subcommand("noise", "Forward-noise a tensor file");
  NoiseOptions nopt;
  noise->add_option("input", nopt.input_path, "Input tensor file")->required();
  noise->add_option("output", nopt.output_path, "Output tensor file")->required();
  noise->add_option("--level", nopt.level, "Noise level in [0, 1]")->required();
  noise->add_option("--steps", nopt.diffusion_steps, "Diffusion steps T")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*adv) {
      AdvantageParams params{alpha, gamma, parse_advantage_mode(mode)};
      if (adv_input == "-") return cmd_advantages(std::cin, std::cout, std::cerr, params);
      std::ifstream in(adv_input);
      if (!in) {
        std::cerr << "error: cannot open '" << adv_input << "'\n";
        return kExitInputError;
      }
      return cmd_advantages(in, std::cout, std::cerr, params);
    }
    if (*train) {
      topt.output_dir = out_dir;
      topt.seed = seed;
      topt.quiet = quiet;
      topt.write_group_log = !no_group_log;
      return cmd_train(topt, std::cerr, std::cerr);
    }
    if (*diag) {
      if (which == "both") {
        dopt.kinds = {ResidualKind::ObsMinusPrior, ResidualKind::PostMinusObs};
      } else {
        dopt.kinds = {parse_residual_kind(which)};
      }
      dopt.seed = seed.value_or(0);
      if (!diag_out.empty()) dopt.output_dir = diag_out;
      return cmd_diagnose(dopt, std::cout, std::cerr);
    }
    if (*noise) {
      nopt.seed = seed.value_or(0);
      return cmd_noise(nopt, std::cerr);
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
