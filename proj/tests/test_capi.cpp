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

#include <cstdlib>
#include <cstring>
#include <string>

#include <json.hpp>

#include <scusim/scusim.h>

namespace {

std::string take(char* s) {
  std::string r = s ? s : "";
  scusim_string_free(s);
  return r;
}

struct Config {
  scusim_config* p = nullptr;
  Config() { REQUIRE(scusim_config_new(&p) == SCUSIM_OK); }
  ~Config() { scusim_config_free(p); }
};

const std::string kRef = std::string(SCUSIM_DATA_DIR) + "/table1_reference.json";

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(scusim_version()) > 0);
  CHECK(std::string(scusim_status_name(SCUSIM_ERR_CONFIG)) == "ConfigError");
  CHECK(std::string(scusim_status_name(SCUSIM_OK)) == "ok");
}

TEST_CASE("config errors carry a message") {
  Config c;
  CHECK(scusim_config_set(c.p, "n_cores", "17") == SCUSIM_OK);
  CHECK(scusim_config_validate(c.p) == SCUSIM_ERR_CONFIG);
  CHECK(std::string(scusim_last_error()).find("n_cores") != std::string::npos);
  scusim_cluster* cl = nullptr;
  CHECK(scusim_cluster_new(c.p, &cl) == SCUSIM_ERR_CONFIG);
  CHECK(cl == nullptr);
  CHECK(scusim_config_set(c.p, "nonsense", "1") != SCUSIM_OK);
  CHECK(scusim_config_new(nullptr) == SCUSIM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("config json round trip") {
  scusim_config* a = nullptr;
  REQUIRE(scusim_config_from_json(R"({"n_cores": 4})", &a) == SCUSIM_OK);
  char* text = nullptr;
  REQUIRE(scusim_config_to_json(a, &text) == SCUSIM_OK);
  auto j = nlohmann::json::parse(take(text));
  CHECK(j["n_cores"] == 4);
  char* table = nullptr;
  REQUIRE(scusim_config_register_table(a, &table) == SCUSIM_OK);
  CHECK(take(table).find("0x") != std::string::npos);
  scusim_config_free(a);
  scusim_config* bad = nullptr;
  CHECK(scusim_config_from_json("{", &bad) == SCUSIM_ERR_PARSE);
  CHECK(scusim_config_load("/nonexistent.json", &bad) == SCUSIM_ERR_IO);
}

TEST_CASE("cluster from assembly") {
  Config c;
  scusim_config_set(c.p, "n_cores", "2");
  scusim_cluster* cl = nullptr;
  REQUIRE(scusim_cluster_new(c.p, &cl) == SCUSIM_OK);
  unsigned n = 0;
  scusim_cluster_n_cores(cl, &n);
  CHECK(n == 2);
  const uint32_t base = 0x10000000u;
  REQUIRE(scusim_cluster_set_register(cl, 0, 5, base) == SCUSIM_OK);
  REQUIRE(scusim_cluster_load_program(cl, 0,
                                      "li r1, 0x7\n"
                                      ".sync_begin test\n"
                                      "sw r1, 0x4(r5)\n"
                                      ".sync_end\n"
                                      "lw r2, 0x0(r5)\n"
                                      "sw r2, 0x8(r5)\n"
                                      "halt\n") == SCUSIM_OK);
  REQUIRE(scusim_cluster_write_word(cl, base, 0x99) == SCUSIM_OK);
  scusim_run_status rs{};
  REQUIRE(scusim_cluster_run(cl, 1000, &rs) == SCUSIM_OK);
  CHECK(rs == SCUSIM_RUN_HALTED);
  uint32_t w = 0;
  scusim_cluster_read_word(cl, base + 4, &w);
  CHECK(w == 7);
  scusim_cluster_read_word(cl, base + 8, &w);
  CHECK(w == 0x99);
  uint64_t cyc = 0;
  scusim_cluster_cycle(cl, &cyc);
  CHECK(cyc == 5);
  char* rep = nullptr;
  REQUIRE(scusim_cluster_report_json(cl, 0, &rep) == SCUSIM_OK);
  auto j = nlohmann::json::parse(take(rep));
  CHECK(j["total_cycles"] == 5);
  char* periods = nullptr;
  REQUIRE(scusim_cluster_periods_csv(cl, &periods) == SCUSIM_OK);
  auto csv = take(periods);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);

  CHECK(scusim_cluster_load_program(cl, 1, "bogus r1\n") == SCUSIM_ERR_PARSE);
  CHECK(scusim_cluster_read_word(cl, 0x4, &w) == SCUSIM_ERR_ADDRESS_FAULT);
  CHECK(scusim_cluster_set_register(cl, 9, 1, 0) == SCUSIM_ERR_INVALID_ARGUMENT);
  scusim_cluster_free(cl);
}

TEST_CASE("faults surface as status codes") {
  Config c;
  scusim_config_set(c.p, "n_cores", "1");
  scusim_cluster* cl = nullptr;
  REQUIRE(scusim_cluster_new(c.p, &cl) == SCUSIM_OK);
  scusim_cluster_load_program(cl, 0, "lw r1, 0x2(r0)\nhalt\n");
  scusim_run_status rs{};
  CHECK(scusim_cluster_run(cl, 100, &rs) == SCUSIM_ERR_ADDRESS_FAULT);
  scusim_cluster_free(cl);
}

TEST_CASE("events through the c api") {
  Config c;
  scusim_config_set(c.p, "n_cores", "1");
  scusim_cluster* cl = nullptr;
  REQUIRE(scusim_cluster_new(c.p, &cl) == SCUSIM_OK);
  scusim_cluster_set_register(cl, 0, 4, 0x10200000u);
  char* table = nullptr;
  scusim_config_register_table(c.p, &table);
  scusim_string_free(table);
  REQUIRE(scusim_cluster_raise_event(cl, 30, 0, 20) == SCUSIM_OK);
  CHECK(scusim_cluster_raise_event(cl, 30, 0, 40) == SCUSIM_ERR_INVALID_ARGUMENT);
  scusim_cluster_free(cl);
}

TEST_CASE("primitive cost") {
  Config c;
  scusim_cost cost{};
  REQUIRE(scusim_primitive_cost(c.p, "scu-barrier", 4, &cost) == SCUSIM_OK);
  CHECK(cost.cycles == 6.0);
  CHECK(cost.energy_nj > 0.0);
  CHECK(scusim_primitive_cost(c.p, "scu-lock", 4, &cost) == SCUSIM_ERR_INVALID_ARGUMENT);
  CHECK(scusim_primitive_cost(c.p, "scu-barrier", 0, &cost) == SCUSIM_ERR_UNSUPPORTED_TEAM);
}

TEST_CASE("experiments") {
  Config c;
  char* out = nullptr;
  unsigned cores[] = {2};
  REQUIRE(scusim_table1_csv(c.p, cores, 1, kRef.c_str(), &out) == SCUSIM_OK);
  auto t = take(out);
  CHECK(std::count(t.begin(), t.end(), '\n') == 10);

  uint32_t sfr[] = {100, 1000};
  REQUIRE(scusim_sweep_csv(c.p, "scu-barrier", cores, 1, sfr, 2, 0.0, 1, &out) == SCUSIM_OK);
  t = take(out);
  CHECK(std::count(t.begin(), t.end(), '\n') == 3);

  scusim_min_sfr m{};
  REQUIRE(scusim_min_sfr_solve(c.p, "scu-barrier", 8, 0.1, "cycles", &m) == SCUSIM_OK);
  CHECK(m.min_sfr == m.above);
  CHECK(m.overhead_at <= 0.1);
  CHECK(scusim_min_sfr_solve(c.p, "scu-barrier", 8, 0.1, "joules", &m) != SCUSIM_OK);

  char* rep = nullptr;
  char* per = nullptr;
  REQUIRE(scusim_imbalance_run(c.p, "scu", 8, 200, 1.0, 3, 8, &rep, &per) == SCUSIM_OK);
  std::string r1 = take(rep);
  take(per);
  REQUIRE(scusim_imbalance_run(c.p, "sw", 8, 200, 1.0, 3, 8, &rep, nullptr) == SCUSIM_OK);
  std::string r2 = take(rep);
  const char* docs[] = {r1.c_str(), r2.c_str()};
  REQUIRE(scusim_reports_csv(docs, 2, &out) == SCUSIM_OK);
  t = take(out);
  CHECK(std::count(t.begin(), t.end(), '\n') == 3);
  CHECK(scusim_imbalance_run(c.p, "xyz", 8, 200, 1.0, 3, 8, &rep, nullptr) != SCUSIM_OK);
}

TEST_CASE("calibration through the c api") {
  Config c;
  char* text = nullptr;
  char* res = nullptr;
  scusim_calibration s{};
  REQUIRE(scusim_calibrate(c.p, kRef.c_str(), &text, &res, &s) == SCUSIM_OK);
  auto cal = take(text);
  auto csv = take(res);
  CHECK(cal.find("[core]") != std::string::npos);
  CHECK(s.rms_rel >= 0.0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') >= 28);
  CHECK(scusim_calibrate(c.p, "/nonexistent.json", &text, &res, &s) == SCUSIM_ERR_IO);
}
