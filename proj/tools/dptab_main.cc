//
// Copyright 2026 The dptab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// dptab command-line entry point.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dptab/error.h"
#include "dptab/pipeline.h"

namespace {

struct Flags {
  std::string config;
  std::string checkpoint;
  std::string out;
  std::size_t n = 0;
  std::uint64_t seed_override = 0;
  bool os_entropy = false;
};

void AddCommon(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Run configuration (JSON)");
  cmd->add_option("--checkpoint", f.checkpoint, "Checkpoint path");
  cmd->add_option("--out", f.out, "Output path");
  cmd->add_option("--n", f.n, "Number of rows")->check(CLI::PositiveNumber);
  cmd->add_option("--seed-override", f.seed_override,
                  "Replace the configured seed");
  cmd->add_flag("--os-entropy", f.os_entropy,
                "Draw privacy noise from the operating system");
}

dptab::Overrides ToOverrides(const CLI::App* cmd, const Flags& f) {
  dptab::Overrides o;
  if (cmd->count("--seed-override") > 0) o.seed = f.seed_override;
  if (cmd->count("--n") > 0) o.n = f.n;
  o.os_entropy = f.os_entropy;
  o.out = f.out;
  o.checkpoint = f.checkpoint;
  return o;
}

dptab::RunConfig RequireConfig(const Flags& f) {
  if (f.config.empty()) dptab::Fail(dptab::ErrorCode::kConfig, "--config is required");
  return dptab::LoadRunConfig(f.config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private tabular data synthesis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dptab::kVersion);

  Flags f;
  CLI::App* fit = app.add_subcommand("fit", "Train a generator and write a checkpoint");
  CLI::App* sample = app.add_subcommand("sample", "Sample rows from a checkpoint");
  CLI::App* evaluate = app.add_subcommand("evaluate", "Compare real and synthetic tables");
  CLI::App* attack = app.add_subcommand("attack", "Nearest-record membership inference");
  CLI::App* encode = app.add_subcommand("encode", "Dump the encoded table as CSV");
  for (CLI::App* cmd : {fit, sample, evaluate, attack, encode}) AddCommon(cmd, f);

  CLI::App* accountant =
      app.add_subcommand("accountant", "Compute epsilon or calibrate sigma");
  std::uint64_t steps = 0;
  std::size_t batch = 0;
  double sigma = 0.0, target_epsilon = 0.0, delta = dptab::kDefaultDelta;
  accountant->add_option("--config", f.config, "Take T, B and privacy settings from a config");
  accountant->add_option("--steps", steps, "Number of generator updates T");
  accountant->add_option("--batch", batch, "Batch size B")->check(CLI::PositiveNumber);
  accountant->add_option("--sigma", sigma, "Noise multiplier");
  accountant->add_option("--target-epsilon", target_epsilon, "Calibrate sigma for this epsilon");
  accountant->add_option("--delta", delta, "Target delta");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    std::string report;
    if (fit->parsed()) {
      report = dptab::RunFit(RequireConfig(f), ToOverrides(fit, f));
    } else if (sample->parsed()) {
      std::optional<dptab::RunConfig> config;
      if (!f.config.empty()) config = dptab::LoadRunConfig(f.config);
      report = dptab::RunSample(config, ToOverrides(sample, f));
    } else if (evaluate->parsed()) {
      report = dptab::RunEvaluate(RequireConfig(f), ToOverrides(evaluate, f));
    } else if (attack->parsed()) {
      report = dptab::RunAttack(RequireConfig(f), ToOverrides(attack, f));
    } else if (encode->parsed()) {
      report = dptab::RunEncode(RequireConfig(f), ToOverrides(encode, f));
    } else {
      dptab::AccountantRequest req;
      if (!f.config.empty()) {
        const dptab::RunConfig c = dptab::LoadRunConfig(f.config);
        req.updates = c.hyper.steps;
        req.batch = c.hyper.batch;
        req.sigma = c.privacy.sigma;
        req.target_epsilon = c.privacy.target_epsilon;
        req.delta = c.privacy.delta;
        req.lambda_grid = c.privacy.lambda_grid;
      }
      if (accountant->count("--steps") > 0) req.updates = steps;
      if (accountant->count("--batch") > 0) req.batch = batch;
      if (accountant->count("--delta") > 0) req.delta = delta;
      if (accountant->count("--sigma") > 0) {
        req.sigma = sigma;
        req.target_epsilon.reset();
      }
      if (accountant->count("--target-epsilon") > 0) {
        req.target_epsilon = target_epsilon;
        if (accountant->count("--sigma") == 0) req.sigma.reset();
      }
      if (req.batch == 0) req.batch = 1;
      report = dptab::RunAccountant(req);
    }
    std::cout << report;
    return 0;
  } catch (const dptab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dptab::ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
