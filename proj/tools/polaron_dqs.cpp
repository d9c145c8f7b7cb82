// Copyright 2026 The polaron-dqs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "polaron_dqs/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"polaron-dqs: digital quantum simulation workbench for lattice polarons"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int max_qubits = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides run.out)");
    sub->add_option("--seed", seed, "seed (overrides run.seed)");
    sub->add_option("--max-qubits", max_qubits, "circuit-path qubit guard (overrides run.max_qubits)")
        ->check(CLI::PositiveNumber);
  };
  CLI::App* wstate = app.add_subcommand("wstate", "verify the W-state preparation circuit");
  CLI::App* ground = app.add_subcommand("ground-state", "Lanczos ground state per K sector and QPE");
  CLI::App* quench = app.add_subcommand("quench", "interaction quench: Trotter circuit vs exact reference");
  CLI::App* qpe = app.add_subcommand("qpe", "phase estimation histogram of the Trotter step");
  for (auto* s : {wstate, ground, quench, qpe}) add_common(s);

  CLI11_PARSE(app, argc, argv);

  try {
    pdqs::ExperimentConfig cfg = pdqs::load_config(config_path);
    for (auto* s : {wstate, ground, quench, qpe}) {
      if (!s->parsed()) continue;
      if (s->count("--out")) cfg.out = out_dir;
      if (s->count("--seed")) cfg.seed = seed;
      if (s->count("--max-qubits")) cfg.max_qubits = max_qubits;
    }
    cfg.validate();
    pdqs::CommandResult r;
    if (wstate->parsed())
      r = pdqs::cmd_wstate(cfg);
    else if (ground->parsed())
      r = pdqs::cmd_ground_state(cfg);
    else if (quench->parsed())
      r = pdqs::cmd_quench(cfg);
    else
      r = pdqs::cmd_qpe(cfg);
    std::cout << r.report.dump(2) << "\n";
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
