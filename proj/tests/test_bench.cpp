/*
 * Copyright 2026 The scusim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "bench.hpp"
#include "error.hpp"
#include "support.hpp"

using namespace scusim;

namespace {

const Reps kQuick{2, 16, 8};

std::string data(const char* name) { return std::string(SCUSIM_DATA_DIR) + "/" + name; }

ValidatedConfig calibrated(unsigned n = 8) {
  return test::config(n).with_power(load_calibration_file(data("calibration.toml")));
}

}  // namespace

TEST_CASE("compute rate") {
  auto cfg = test::config(8);
  for (unsigned n : {1u, 4u, 8u}) {
    auto r = compute_rate(cfg, n);
    CHECK(r.at(Component::Core, UnitState::Active) == doctest::Approx(n));
    CHECK(r.at(Component::Core, UnitState::Gated) == doctest::Approx(8 - n));
    CHECK(r.at(Component::ClockTree, UnitState::Active) == doctest::Approx(n));
  }
}

TEST_CASE("scu barrier costs six cycles at every size") {
  auto cfg = test::config(8);
  std::vector<double> c;
  for (unsigned n : {2u, 4u, 8u}) c.push_back(measure_primitive_cost(cfg, parse_variant("scu-barrier"), n).cycles);
  CHECK(c[0] == 6.0);
  CHECK(c[1] == c[0]);
  CHECK(c[2] == c[0]);
}

TEST_CASE("critical section ideal is n times the body") {
  auto cfg = test::config(8);
  for (unsigned n : {2u, 4u}) {
    auto cost = measure_primitive_cost(cfg, parse_variant("scu-crit10"), n, kQuick);
    CHECK(cost.ideal_cycles == doctest::Approx(10.0 * n));
    CHECK(cost.cycles == doctest::Approx(cost.raw_cycles - cost.ideal_cycles));
    auto ideal = compute_rate(cfg, 1).scaled(10.0 * n);
    CHECK(cost.ideal_energy_nj == doctest::Approx(ideal.energy_pj(cfg.power()) * 1e-3));
    CHECK(cost.energy_nj == doctest::Approx(cost.raw_energy_nj - cost.ideal_energy_nj));
  }
  auto b = measure_primitive_cost(cfg, parse_variant("sw-barrier"), 2, kQuick);
  CHECK(b.ideal_cycles == 0.0);
  CHECK(b.ideal_energy_nj == 0.0);
}

TEST_CASE("one-core primitives finish") {
  auto cfg = test::config(8);
  for (auto v : {"sw-barrier", "tas-barrier", "scu-barrier", "sw-crit5", "tas-crit5", "scu-crit5"}) {
    auto cost = measure_primitive_cost(cfg, parse_variant(v), 1, kQuick);
    CHECK_MESSAGE(cost.raw_cycles > 0.0, v);
  }
}

TEST_CASE("scu barrier overhead at sfr 1000") {
  auto cfg = test::config(8);
  auto p = sweep_point(cfg, parse_variant("scu-barrier"), 8, 1000, kQuick);
  CHECK(p.rel_cycle_overhead == doctest::Approx(0.006).epsilon(0.1));
  CHECK(p.ideal_cycles == doctest::Approx(1000.0));
}

TEST_CASE("overhead falls monotonically with sfr") {
  auto cfg = test::config(8);
  for (auto v : {"scu-barrier", "tas-barrier", "sw-crit5"}) {
    double prev_c = 1e300, prev_e = 1e300;
    for (std::uint32_t s : {10u, 100u, 1000u, 10000u}) {
      auto p = sweep_point(cfg, parse_variant(v), 8, s, kQuick);
      CHECK(p.rel_cycle_overhead < prev_c);
      CHECK(p.rel_energy_overhead < prev_e);
      prev_c = p.rel_cycle_overhead;
      prev_e = p.rel_energy_overhead;
    }
    CHECK(prev_c < 0.05);
  }
}

TEST_CASE("sw barrier doubles small parallel sections") {
  auto cfg = test::config(8);
  auto v = parse_variant("sw-barrier");
  double cost = measure_primitive_cost(cfg, v, 8, kQuick).cycles;
  auto s = static_cast<std::uint32_t>(cost / 2);
  CHECK(sweep_point(cfg, v, 8, s, kQuick).rel_cycle_overhead > 1.0);
}

TEST_CASE("min sfr brackets the crossing") {
  auto cfg = test::config(8);
  MinSfrOptions o;
  o.reps = kQuick;
  auto r = min_sfr(cfg, parse_variant("scu-barrier"), 8, 0.10, Metric::Cycles, o);
  CHECK(r.overhead_at <= 0.10);
  CHECK(r.overhead_below > 0.10);
  CHECK(r.below + 1 == r.min_sfr);
  CHECK(r.above == r.min_sfr);
  auto j = to_json(r);
  CHECK(j["min_sfr"] == r.min_sfr);
}

TEST_CASE("vacuous threshold") {
  auto cfg = test::config(8);
  MinSfrOptions o;
  o.reps = kQuick;
  auto r = min_sfr(cfg, parse_variant("scu-barrier"), 8, 1000.0, Metric::Energy, o);
  CHECK(r.min_sfr == 1);
  CHECK(r.below == 0);
  auto one = min_sfr(cfg, parse_variant("scu-barrier"), 8, 1.0, Metric::Cycles, o);
  CHECK(one.overhead_at <= 1.0);
  if (one.min_sfr > 1) CHECK(one.overhead_below > 1.0);
}

TEST_CASE("min sfr is monotone in the threshold") {
  auto cfg = test::config(8);
  MinSfrOptions o;
  o.reps = kQuick;
  std::uint32_t prev = UINT32_MAX;
  for (double t : {0.02, 0.05, 0.1, 0.3, 1.0}) {
    auto r = min_sfr(cfg, parse_variant("tas-barrier"), 4, t, Metric::Energy, o);
    CHECK(r.min_sfr <= prev);
    prev = r.min_sfr;
  }
}

TEST_CASE("unreachable threshold") {
  auto cfg = test::config(8);
  MinSfrOptions o;
  o.reps = kQuick;
  o.grid = {1, 10, 100};
  try {
    min_sfr(cfg, parse_variant("sw-barrier"), 8, 0.01, Metric::Cycles, o);
    FAIL("reached");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotReached);
  }
  CHECK_THROWS_AS(min_sfr(cfg, parse_variant("sw-barrier"), 8, 0.0, Metric::Cycles, o), Error);
}

TEST_CASE("sweep spec validation") {
  auto cfg = test::config(4);
  SweepSpec s;
  CHECK_THROWS_AS(s.check(cfg), Error);  // 8 cores on a 4-core cluster
  s.core_counts = {2, 4};
  CHECK_NOTHROW(s.check(cfg));
  s.sfr_cycles = {};
  CHECK_THROWS_AS(s.check(cfg), Error);
  s.sfr_cycles = {10, 5};
  CHECK_THROWS_AS(s.check(cfg), Error);
  s.sfr_cycles = {0, 5};
  CHECK_THROWS_AS(s.check(cfg), Error);
  s.sfr_cycles = {5};
  s.imbalance_beta = -1;
  CHECK_THROWS_AS(s.check(cfg), Error);
}

TEST_CASE("sweeps are deterministic") {
  auto cfg = test::config(4);
  SweepSpec s;
  s.primitive = parse_variant("tas-barrier");
  s.core_counts = {2, 4};
  s.sfr_cycles = {50, 200};
  s.reps = kQuick;
  s.imbalance_beta = 0.5;
  s.seed = 42;
  auto a = sweep_csv(sweep_overhead(cfg, s));
  auto b = sweep_csv(sweep_overhead(cfg, s));
  CHECK(a == b);
  CHECK(std::count(a.begin(), a.end(), '\n') == 5);
  s.seed = 43;
  CHECK(sweep_csv(sweep_overhead(cfg, s)) != a);
}

TEST_CASE("imbalance draws") {
  auto d = imbalance_draws(100, 1.5, 7, 20, 8);
  REQUIRE(d.size() == 20);
  std::uint32_t hi = 0;
  for (const auto& row : d)
    for (auto x : row) {
      CHECK(x <= 150);
      hi = std::max(hi, x);
    }
  CHECK(hi > 100);
  CHECK(d == imbalance_draws(100, 1.5, 7, 20, 8));
  CHECK(d != imbalance_draws(100, 1.5, 8, 20, 8));
  for (const auto& row : imbalance_draws(100, 0.0, 7, 5, 8))
    for (auto x : row) CHECK(x == 0);
}

TEST_CASE("imbalanced kernel reports are deterministic") {
  auto cfg = test::config(8);
  ImbalanceSpec s;
  s.family = Family::TAS;
  s.iterations = 8;
  s.sfr = 200;
  s.seed = 5;
  CHECK(to_json(run_imbalanced_kernel(cfg, s)).dump() == to_json(run_imbalanced_kernel(cfg, s)).dump());
  s.iterations = 0;
  CHECK_THROWS_AS(run_imbalanced_kernel(cfg, s), Error);
}

TEST_CASE("reference table") {
  auto ref = load_reference(data("table1_reference.json"));
  CHECK(ref.size() == 27);
  const auto* c = find_reference(ref, parse_variant("tas-barrier"), 8);
  REQUIRE(c != nullptr);
  CHECK(c->cycles == 176);
  CHECK(c->energy_nj == doctest::Approx(4.3));
  CHECK(find_reference(ref, parse_variant("tas-barrier"), 16) == nullptr);
  auto anchors = load_anchors(data("table1_reference.json"));
  REQUIRE(anchors.size() == 3);
  CHECK(anchors[0].threshold == doctest::Approx(0.1));
  CHECK_THROWS_AS(parse_reference("{}"), Error);
  CHECK_THROWS_AS(parse_reference("[1,2"), Error);
  CHECK(parse_anchors(R"({"cells": []})").empty());
  CHECK_THROWS_AS(parse_anchors(R"({"cells": [], "min_sfr_anchors": [{"variant": "scu-barrier", "n_cores": 8, "threshold": 0.1, "min_sfr": 42, "metric": "cycles"}]})"),
                  Error);
}

TEST_CASE("table csv with reference deltas") {
  auto cfg = test::config(8);
  auto rows = table1(cfg, kQuick, {2});
  CHECK(rows.size() == 9);
  auto ref = load_reference(data("table1_reference.json"));
  auto csv = table1_csv(rows, &ref);
  std::istringstream is(csv);
  std::string header;
  std::getline(is, header);
  CHECK(header.find("ref_cycles") != std::string::npos);
  CHECK(header.find("delta_energy_rel") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
  CHECK_THROWS_AS(table1(cfg, kQuick, {9}), Error);
}

TEST_CASE("anchor rows") {
  auto cfg = test::config(8);
  auto ref = load_reference(data("table1_reference.json"));
  auto anchors = load_anchors(data("table1_reference.json"));
  auto rows = anchor_cells(cfg, ref, anchors);
  REQUIRE(rows.size() == anchors.size());
  const auto* sw = find_reference(ref, parse_variant("sw-barrier"), 8);
  CHECK(rows[2].target_nj == doctest::Approx(sw->energy_nj / (0.1 * 1771)));
  CHECK(rows[2].counts.at(Component::Core, UnitState::Active) == doctest::Approx(8.0));
}

TEST_CASE("barrier ordering at eight cores") {
  auto cfg = calibrated();
  auto scu = measure_primitive_cost(cfg, parse_variant("scu-barrier"), 8);
  auto tas = measure_primitive_cost(cfg, parse_variant("tas-barrier"), 8);
  auto sw = measure_primitive_cost(cfg, parse_variant("sw-barrier"), 8);
  CHECK(scu.cycles < tas.cycles);
  CHECK(tas.cycles <= 1.05 * sw.cycles);
  CHECK(scu.energy_nj < tas.energy_nj);
  CHECK(tas.energy_nj <= sw.energy_nj);
}
