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


#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "polaron_dqs.hpp"

using namespace pdqs;
namespace fs = std::filesystem;

#ifndef PDQS_SOURCE_DIR
#define PDQS_SOURCE_DIR "."
#endif

static fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pdqs_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

static std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

static ExperimentConfig small_quench(const std::string& out) {
  ExperimentConfig c;
  c.n_sites = 3;
  c.n_q = 2;
  c.M = 3;
  c.M_max = 3;
  c.converge_truncation = false;
  c.t_max = 1.0;
  c.dt_out = 0.5;
  c.n_s = {4, 8};
  c.g_P = 0.4;
  c.g_B = 0.2;
  c.out = out;
  return c;
}

TEST(Config, SamplesParse) {
  for (const char* name : {"default.json", "quench_small.json", "ground_state_qpe.json", "sweep.json", "wstate.json"}) {
    const auto c = load_config(fs::path(PDQS_SOURCE_DIR) / "samples" / name);
    EXPECT_NO_THROW(c.validate()) << name;
  }
  const auto d = load_config(fs::path(PDQS_SOURCE_DIR) / "samples" / "default.json");
  EXPECT_EQ(d.n_sites, 5);
  EXPECT_NEAR(effective_lambda_P(d.params()), 0.5, 1e-14);
  EXPECT_NEAR(d.g_B / d.g_P, 1.0, 1e-14);
}

TEST(Config, RoundTripAndConversion) {
  const json j = json::parse(R"({"model": {"t_e": 1.0, "omega_b": 2.0, "n_sites": 4, "lambda_P": 1.0, "zeta": 0.5},
                                 "dynamics": {"n_s": [2, 4], "symmetric": true,
                                              "term_order": ["hopping", "peierls", "breathing", "boson_x2", "boson_p2"]},
                                 "run": {"seed": 9}})");
  const auto c = config_from_json(j);
  EXPECT_NEAR(c.g_P, 0.5, 1e-15);
  EXPECT_NEAR(c.g_B, 0.25, 1e-15);
  EXPECT_EQ(c.term_order.front(), TrotterTerm::hopping);
  EXPECT_EQ(config_from_json(config_to_json(c)), c);
  EXPECT_EQ(config_from_json(json::parse(config_to_json(c).dump())), c);
  EXPECT_EQ(config_from_json(json::object()), ExperimentConfig{});
}

TEST(Config, Errors) {
  EXPECT_THROW(config_from_json(json::parse(R"({"model": {"g_P": 0.1, "lambda_P": 1.0}})")), std::invalid_argument);
  EXPECT_THROW(config_from_json(json::parse(R"({"model": {"gP": 0.1}})")), std::invalid_argument);
  EXPECT_THROW(config_from_json(json::parse(R"({"extra": {}})")), std::invalid_argument);
  EXPECT_THROW(config_from_json(json::parse(R"({"dynamics": {"term_order": ["hopping"]}})")), std::invalid_argument);
  EXPECT_THROW(config_from_json(json::parse(R"({"encoding": {"n_q": 0}})")), std::invalid_argument);
  EXPECT_THROW(config_from_json(json::parse(R"({"model": {"lambda_P": -1}})")), std::invalid_argument);
  EXPECT_ANY_THROW(config_from_json(json::parse(R"({"model": {"n_sites": "three"}})")));
  const fs::path d = scratch("badcfg");
  std::ofstream(d / "bad.json") << "{ not json";
  EXPECT_THROW(load_config(d / "bad.json"), std::invalid_argument);
  EXPECT_THROW(load_config(d / "missing.json"), std::runtime_error);
}

TEST(WStateCommand, Examples) {
  const auto r1 = cmd_wstate(1, 1e-10);
  EXPECT_EQ(r1.exit_code, 0);
  EXPECT_NEAR(r1.report["fidelity"].get<double>(), 1.0, 1e-12);
  const auto r4 = cmd_wstate(4, 1e-10);
  EXPECT_EQ(r4.exit_code, 0);
  EXPECT_GE(r4.report["fidelity"].get<double>(), 1 - 1e-10);
  std::vector<long> g;
  for (int N = 2; N <= 10; ++N) g.push_back(cmd_wstate(N, 1e-10).report["gates"].get<long>());
  for (std::size_t i = 2; i < g.size(); ++i) EXPECT_EQ(g[i] - g[i - 1], g[1] - g[0]);
  ExperimentConfig c;
  c.n_sites = 4;
  c.out = scratch("wstate").string();
  EXPECT_EQ(cmd_wstate(c).exit_code, 0);
  EXPECT_TRUE(fs::exists(fs::path(c.out) / "wstate.json"));
}

TEST(Phase, ConversionsRoundTrip) {
  for (double e : {-2.0, -0.3, 0.0, 1.7}) {
    const double dt = 0.5;
    EXPECT_NEAR(phase_to_energy(energy_to_phase(e, dt), dt), e, 1e-12);
  }
  EXPECT_NEAR(phase_distance(0.99, 0.01), 0.02, 1e-15);
  EXPECT_NEAR(phase_distance(0.25, 0.5), 0.25, 1e-15);
}

TEST(GroundStateCommand, FreeModel) {
  ExperimentConfig c;
  c.n_sites = 2;
  c.n_q = 2;  // one boson qubit misplaces the grid vacuum energy by more than a bin
  c.M = 2;
  c.converge_truncation = false;
  c.n_phase_qubits = 5;
  c.out = scratch("gs_free").string();
  const auto r = cmd_ground_state(c);
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NEAR(r.report["lanczos"]["E0"].get<double>(), -2.0, 1e-9);
  EXPECT_EQ(r.report["lanczos"]["K_ground"].get<double>(), 0.0);
  EXPECT_TRUE(r.report["qpe"]["within_one_bin"].get<bool>());
}

TEST(GroundStateCommand, InteractingMatchesDenseAndTruncationConverges) {
  ExperimentConfig c;
  c.n_sites = 3;
  c.n_q = 1;
  c.M = 4;
  c.M_max = 16;
  c.g_P = 0.3;
  c.g_B = 0.2;
  c.n_phase_qubits = 3;
  c.out = scratch("gs_int").string();
  const auto r = cmd_ground_state(c);
  ASSERT_EQ(r.exit_code, 0);
  const int M = r.report["lanczos"]["M"].get<int>();
  const auto b = enumerate_basis(3, M);
  const double ref = oracle::lowest_eigenvalue(oracle::dense(build_hamiltonian(c.params(), b)));
  EXPECT_NEAR(r.report["lanczos"]["E0"].get<double>(), ref, 1e-8);
  EXPECT_TRUE(fs::exists(fs::path(c.out) / "ground_state.json"));
  c.M_max = c.M;
  c.g_P = 2.0;
  c.M = 1;
  c.M_max = 2;
  EXPECT_EQ(cmd_ground_state(c).exit_code, 2);
}

TEST(GroundStateCommand, SweepIsMonotone) {
  ExperimentConfig c;
  c.n_sites = 4;
  c.n_q = 1;
  c.M = 4;
  c.converge_truncation = false;
  c.max_qubits = 4;  // skip QPE
  c.sweep_lambda = {0.0, 0.5, 1.0, 1.5, 2.0};
  c.out = scratch("sweep").string();
  const auto r = cmd_ground_state(c);
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_TRUE(r.report["sweep"]["E0_monotone_decreasing"].get<bool>());
  EXPECT_TRUE(r.report["qpe"].contains("skipped"));
  const auto csv = slurp(fs::path(c.out) / "sweep.csv");
  EXPECT_EQ(csv.rfind("# {", 0), 0u);
  EXPECT_NE(csv.find("lambda_P,E_K0,E_K1,E_K2,E_K3,E0,K_ground"), std::string::npos);
}

TEST(Crossing, LinearInterpolation) {
  SectorEnergies a, b;
  a.energy = {-1.0, -0.5};
  b.energy = {-1.0, -1.5};
  EXPECT_NEAR(*locate_crossing({0.0, 1.0}, {a, b}), 0.5, 1e-15);
  EXPECT_FALSE(locate_crossing({0.0, 1.0}, {a, a}).has_value());
}

TEST(QpeCommand, WritesDistribution) {
  ExperimentConfig c;
  c.n_sites = 2;
  c.n_q = 1;
  c.n_phase_qubits = 4;
  c.shots = 100;
  c.out = scratch("qpe").string();
  const auto r = cmd_qpe(c);
  ASSERT_EQ(r.exit_code, 0);
  const auto csv = slurp(fs::path(c.out) / "qpe.csv");
  EXPECT_NE(csv.find("bin,phase,energy,probability,counts"), std::string::npos);
  c.max_qubits = 5;
  EXPECT_EQ(cmd_qpe(c).exit_code, 2);
}

TEST(QuenchCommand, FreeModelKeepsSurvivalProbability) {
  ExperimentConfig c;
  c.n_sites = 3;
  c.n_q = 4;  // grid vacuum is an encoded eigenstate to 1e-11 from n_q = 4
  c.M = 2;
  c.converge_truncation = false;
  c.t_max = 2.0;
  c.dt_out = 0.5;
  c.n_s = {64};
  c.symmetric = true;
  const auto q = run_quench(c);
  for (const auto& r : q.reference.rows) EXPECT_NEAR(r.L, 1.0, 1e-10);
  for (const auto& r : q.encoded) EXPECT_NEAR(r.L, 1.0, 1e-10);
  for (const auto& r : q.circuit.at(64)) EXPECT_NEAR(r.L, 1.0, 1e-6);
}

TEST(QuenchCommand, OutputsAreConsistentAndDeterministic) {
  auto c = small_quench(scratch("quench_a").string());
  const auto r = cmd_quench(c);
  ASSERT_EQ(r.exit_code, 0);
  const fs::path out(c.out);
  for (const char* f : {"quench.csv", "quench_reference.csv", "quench_encoded.csv", "quench_circuit_ns4.csv",
                        "quench_circuit_ns8.csv", "quench_summary.json"})
    EXPECT_TRUE(fs::exists(out / f)) << f;

  const auto csv = slurp(out / "quench.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  ASSERT_EQ(line.rfind("# ", 0), 0u);
  const json header = json::parse(line.substr(2));
  EXPECT_EQ(header["command"], "quench");
  EXPECT_NEAR(header["derived"]["lambda_P"].get<double>(), effective_lambda_P(c.params()), 1e-15);
  EXPECT_EQ(config_from_json(header["config"]), c);
  std::getline(in, line);
  EXPECT_EQ(line, "time,L,re_G,im_G,total_bosons,chi_-1,chi_0,chi_1,source,n_s");
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    ASSERT_EQ(f.size(), 10u);
    const double L = std::stod(f[1]), re = std::stod(f[2]), im = std::stod(f[3]);
    EXPECT_NEAR(L, re * re + im * im, 1e-15);
    EXPECT_LE(L, 1.0 + 1e-12);
    ++rows;
  }
  EXPECT_EQ(rows, 3 * 4);

  // rerun into the same directory: every file is byte-identical
  std::map<std::string, std::string> first;
  for (const auto& e : fs::directory_iterator(out)) first[e.path().filename().string()] = slurp(e.path());
  ASSERT_EQ(cmd_quench(c).exit_code, 0);
  for (const auto& [name, text] : first) EXPECT_EQ(slurp(out / name), text) << name;
}

TEST(QuenchCommand, ThreadCountDoesNotChangeResults) {
  auto a = small_quench("unused");
  auto b = a;
  b.threads = 3;
  const auto qa = run_quench(a), qb = run_quench(b);
  for (int ns : {4, 8})
    for (std::size_t k = 0; k < qa.circuit.at(ns).size(); ++k) {
      EXPECT_EQ(qa.circuit.at(ns)[k].re_G, qb.circuit.at(ns)[k].re_G);
      EXPECT_EQ(qa.circuit.at(ns)[k].im_G, qb.circuit.at(ns)[k].im_G);
    }
}

TEST(QuenchCommand, TrotterErrorDecreasesWithSteps) {
  auto c = small_quench("unused");
  c.n_s = {4, 8, 16};
  c.t_max = 1.0;
  c.dt_out = 1.0;
  const auto q = run_quench(c);
  const auto& dev = q.summary["deviation"];
  ASSERT_EQ(dev.size(), 3u);
  for (std::size_t a = 1; a < dev.size(); ++a)
    EXPECT_GE(dev[a]["ratio_max_dev_L_encoded"].get<double>(), 1.5);
}

TEST(QuenchCommand, QubitGuardAndTruncationAbort) {
  auto c = small_quench(scratch("quench_guard").string());
  c.max_qubits = 5;
  const auto r = cmd_quench(c);
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_TRUE(r.report.contains("circuit"));
  EXPECT_FALSE(fs::exists(fs::path(c.out) / "quench_circuit_ns4.csv"));
  EXPECT_TRUE(fs::exists(fs::path(c.out) / "quench_reference.csv"));

  auto d = small_quench(scratch("quench_trunc").string());
  d.g_P = 1.5;
  d.g_B = 1.0;
  d.M = 1;
  d.M_max = 2;
  d.converge_truncation = true;
  const auto t = cmd_quench(d);
  EXPECT_EQ(t.exit_code, 2);
  EXPECT_NE(t.report["error"].get<std::string>().find("M_max"), std::string::npos);
}

TEST(ParallelFor, CoversEveryIndexOnce) {
  for (int threads : {0, 1, 4}) {
    std::vector<int> hits(37, 0);
    parallel_for(hits.size(), threads, [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) EXPECT_EQ(h, 1);
  }
}
