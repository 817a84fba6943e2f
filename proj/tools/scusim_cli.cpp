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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scusim/scusim.h"

#ifndef SCUSIM_DATA_DIR
#define SCUSIM_DATA_DIR "data"
#endif

namespace fs = std::filesystem;

namespace {

struct Failure {
  scusim_status status;
  std::string message;
};

void check(scusim_status s) {
  if (s != SCUSIM_OK) throw Failure{s, scusim_last_error()};
}

// Owns a string handed out by the library.
struct CStr {
  char* p = nullptr;
  ~CStr() { scusim_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct Common {
  std::string config;
  std::string calibration;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "cluster config file (JSON); default $SCUSIM_CONFIG");
  app->add_option("--calibration", c.calibration, "power calibration file");
  app->add_option("--set", c.overrides, "config override key=value (repeatable)");
  app->add_option("--seed", c.seed, "seed for imbalance draws");
  app->add_option("--out-dir", c.out_dir, "directory for output files");
}

class Config {
 public:
  explicit Config(const Common& c) {
    std::string path = c.config;
    if (path.empty())
      if (const char* env = std::getenv("SCUSIM_CONFIG")) path = env;
    if (path.empty()) check(scusim_config_new(&cfg_));
    else check(scusim_config_load(path.c_str(), &cfg_));
    if (!c.calibration.empty()) check(scusim_config_load_calibration(cfg_, c.calibration.c_str()));
    for (const auto& o : c.overrides) {
      auto eq = o.find('=');
      if (eq == std::string::npos)
        throw Failure{SCUSIM_ERR_INVALID_ARGUMENT, "override '" + o + "' is not key=value"};
      check(scusim_config_set(cfg_, o.substr(0, eq).c_str(), o.substr(eq + 1).c_str()));
    }
    check(scusim_config_validate(cfg_));
  }
  ~Config() { scusim_config_free(cfg_); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;
  const scusim_config* get() const { return cfg_; }

 private:
  scusim_config* cfg_ = nullptr;
};

fs::path out_file(const Common& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return fs::path(c.out_dir) / name;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Failure{SCUSIM_ERR_IO, "cannot write " + p.string()};
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Failure{SCUSIM_ERR_IO, "cannot open " + path};
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::map<std::string, std::string>> parse_csv(const std::string& text) {
  std::vector<std::map<std::string, std::string>> rows;
  std::istringstream is(text);
  std::string line;
  std::vector<std::string> head;
  auto split = [](const std::string& l) {
    std::vector<std::string> f;
    std::string cur;
    std::istringstream ls(l);
    while (std::getline(ls, cur, ',')) f.push_back(cur);
    if (!l.empty() && l.back() == ',') f.emplace_back();
    return f;
  };
  if (std::getline(is, line)) head = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = split(line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < head.size() && i < f.size(); ++i) row[head[i]] = f[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string fixed(const std::string& v, int prec) {
  if (v.empty()) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << std::stod(v);
  return os.str();
}

std::string pct(const std::string& v) {
  if (v.empty()) return "";
  std::ostringstream os;
  os << std::showpos << std::fixed << std::setprecision(0) << std::stod(v) * 100 << "%";
  return os.str();
}

void print_table(const std::vector<std::map<std::string, std::string>>& rows,
                 const std::vector<unsigned>& cores, bool energy) {
  const char* value = energy ? "energy_nj" : "cycles";
  const char* ref = energy ? "ref_energy_nj" : "ref_cycles";
  const char* delta = energy ? "delta_energy_rel" : "delta_cycles_rel";
  std::cout << (energy ? "energy [nJ]" : "cycles") << "\n";
  std::cout << std::left << std::setw(22) << "primitive";
  for (auto n : cores) std::cout << std::right << std::setw(26) << (std::to_string(n) + " cores");
  std::cout << "\n";
  for (std::size_t i = 0; i < rows.size(); i += cores.size()) {
    const auto& first = rows[i];
    std::string name = first.at("variant");
    std::cout << std::left << std::setw(22) << name;
    for (std::size_t k = 0; k < cores.size() && i + k < rows.size(); ++k) {
      const auto& r = rows[i + k];
      std::string cell = fixed(r.at(value), energy ? 3 : 1);
      auto it = r.find(ref);
      if (it != r.end() && !it->second.empty())
        cell += " (" + it->second + ", " + pct(r.at(delta)) + ")";
      std::cout << std::right << std::setw(26) << cell;
    }
    std::cout << "\n";
  }
}

std::vector<unsigned> parse_uints(const std::string& s) {
  std::vector<unsigned> v;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      unsigned long x = std::stoul(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      v.push_back(static_cast<unsigned>(x));
    } catch (const std::exception&) {
      throw Failure{SCUSIM_ERR_INVALID_ARGUMENT, "'" + tok + "' is not a non-negative integer"};
    }
  }
  return v;
}

std::string default_reference() { return std::string(SCUSIM_DATA_DIR) + "/table1_reference.json"; }

int cmd_table1(const Common& c, const std::string& cores_s, std::string reference) {
  Config cfg(c);
  auto cores = parse_uints(cores_s);
  if (reference.empty()) reference = default_reference();
  CStr csv;
  const char* ref = reference == "none" ? nullptr : reference.c_str();
  check(scusim_table1_csv(cfg.get(), cores.data(), cores.size(), ref, &csv.p));
  write_file(out_file(c, "table1.csv"), csv.str());
  auto rows = parse_csv(csv.str());
  print_table(rows, cores, false);
  std::cout << "\n";
  print_table(rows, cores, true);
  return 0;
}

int cmd_run(const Common& c, const std::string& family, unsigned cores, unsigned sfr, double beta,
            unsigned iterations) {
  Config cfg(c);
  CStr report, periods;
  check(scusim_imbalance_run(cfg.get(), family.c_str(), cores, sfr, beta, c.seed, iterations,
                             &report.p, &periods.p));
  write_file(out_file(c, "report.json"), report.str() + "\n");
  write_file(out_file(c, "periods.csv"), periods.str());
  auto j = nlohmann::json::parse(report.str());
  std::cout << j["label"].get<std::string>() << ": " << j["total_cycles"] << " cycles, "
            << j["total_energy_nj"] << " nJ, " << j["avg_power_mw"] << " mW\n";
  return 0;
}

int cmd_sweep(const Common& c, const std::string& spec_path, std::string variant,
              std::string cores_s, std::string sfr_s, double beta) {
  Config cfg(c);
  std::vector<unsigned> cores = parse_uints(cores_s);
  std::vector<std::uint32_t> sfr;
  for (auto x : parse_uints(sfr_s)) sfr.push_back(x);
  std::uint64_t seed = c.seed;
  if (!spec_path.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(spec_path));
      if (j.contains("primitive")) variant = j["primitive"].get<std::string>();
      if (j.contains("core_counts")) cores = j["core_counts"].get<std::vector<unsigned>>();
      if (j.contains("sfr_cycles")) sfr = j["sfr_cycles"].get<std::vector<std::uint32_t>>();
      if (j.contains("imbalance_beta")) beta = j["imbalance_beta"].get<double>();
      if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw Failure{SCUSIM_ERR_PARSE, spec_path + ": " + e.what()};
    }
  }
  if (variant.empty()) throw Failure{SCUSIM_ERR_INVALID_ARGUMENT, "sweep needs --variant or --spec"};
  CStr csv;
  check(scusim_sweep_csv(cfg.get(), variant.c_str(), cores.data(), cores.size(), sfr.data(),
                         sfr.size(), beta, seed, &csv.p));
  write_file(out_file(c, "sweep.csv"), csv.str());
  std::cout << csv.str();
  return 0;
}

int cmd_minsfr(const Common& c, const std::string& variant, unsigned cores, double threshold,
               const std::string& metric) {
  Config cfg(c);
  scusim_min_sfr r{};
  check(scusim_min_sfr_solve(cfg.get(), variant.c_str(), cores, threshold, metric.c_str(), &r));
  nlohmann::json j{{"variant", variant},
                   {"n_cores", cores},
                   {"threshold", threshold},
                   {"metric", metric},
                   {"min_sfr", r.min_sfr},
                   {"bracket", {r.below, r.above}},
                   {"overhead_below", r.overhead_below},
                   {"overhead_at", r.overhead_at},
                   {"evaluations", r.evaluations}};
  write_file(out_file(c, "minsfr.json"), j.dump(2) + "\n");
  std::cout << r.min_sfr << " (bracket " << r.below << ".." << r.above << ")\n";
  return 0;
}

int cmd_calibrate(const Common& c, std::string reference) {
  Config cfg(c);
  if (reference.empty()) reference = default_reference();
  CStr text, residuals;
  scusim_calibration s{};
  check(scusim_calibrate(cfg.get(), reference.c_str(), &text.p, &residuals.p, &s));
  write_file(out_file(c, "calibration.toml"), text.str());
  write_file(out_file(c, "calibration_residuals.csv"), residuals.str());
  std::cout << residuals.str();
  std::cout << "rms relative residual " << s.rms_rel << ", max " << s.max_abs_rel << "\n";
  if (s.ill_conditioned)
    std::cout << "warning: IllConditioned, residuals exceed the fit threshold\n";
  return 0;
}

int cmd_report(const Common& c, const std::vector<std::string>& inputs) {
  std::vector<std::string> docs;
  for (const auto& p : inputs) docs.push_back(read_file(p));
  std::vector<const char*> ptrs;
  for (const auto& d : docs) ptrs.push_back(d.c_str());
  CStr csv;
  check(scusim_reports_csv(ptrs.data(), ptrs.size(), &csv.p));
  write_file(out_file(c, "report.csv"), csv.str());
  std::cout << csv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scusim: cycle-level simulator of a shared-L1 cluster with a synchronization unit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", scusim_version());

  Common c;
  std::string family = "scu", variant, reference, metric = "energy", cores_s = "2,4,8",
              sfr_s = "10,20,50,100,200,500,1000,2000,5000", spec;
  unsigned cores = 8, sfr = 1000, iterations = 64;
  double beta = 0.0, threshold = 0.10;
  std::vector<std::string> inputs;

  auto* run = app.add_subcommand("run", "barrier kernel with optional per-core imbalance");
  add_common(run, c);
  run->add_option("--family", family, "sw, tas or scu")->capture_default_str();
  run->add_option("--cores", cores, "team size")->capture_default_str();
  run->add_option("--sfr", sfr, "compute cycles between barriers")->capture_default_str();
  run->add_option("--beta", beta, "imbalance: extra work uniform on [0, beta*sfr]");
  run->add_option("--iterations", iterations, "measured iterations")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "overhead versus SFR size");
  add_common(sweep, c);
  sweep->add_option("--spec", spec, "sweep spec file (JSON)");
  sweep->add_option("--variant", variant, "primitive, e.g. scu-barrier or tas-crit5");
  sweep->add_option("--cores", cores_s, "comma-separated core counts")->capture_default_str();
  sweep->add_option("--sfr", sfr_s, "comma-separated SFR sizes")->capture_default_str();
  sweep->add_option("--beta", beta, "imbalance factor");

  auto* table1 = app.add_subcommand("table1", "primitive cost table in cycles and energy");
  add_common(table1, c);
  table1->add_option("--cores", cores_s, "comma-separated core counts")->capture_default_str();
  table1->add_option("--reference", reference, "reference cells (JSON), 'none' to skip");

  auto* minsfr = app.add_subcommand("minsfr", "smallest SFR within an overhead threshold");
  add_common(minsfr, c);
  minsfr->add_option("--variant", variant, "primitive")->required();
  minsfr->add_option("--cores", cores, "team size")->capture_default_str();
  minsfr->add_option("--threshold", threshold, "relative overhead")->capture_default_str();
  minsfr->add_option("--metric", metric, "cycles or energy")->capture_default_str();

  auto* calibrate = app.add_subcommand("calibrate", "fit power parameters to reference energies");
  add_common(calibrate, c);
  calibrate->add_option("--reference", reference, "reference cells (JSON)");

  auto* report = app.add_subcommand("report", "merge run reports into one CSV");
  add_common(report, c);
  report->add_option("inputs", inputs, "report.json files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(c, family, cores, sfr, beta, iterations);
    if (*sweep) return cmd_sweep(c, spec, variant, cores_s, sfr_s, beta);
    if (*table1) return cmd_table1(c, cores_s, reference);
    if (*minsfr) return cmd_minsfr(c, variant, cores, threshold, metric);
    if (*calibrate) return cmd_calibrate(c, reference);
    if (*report) return cmd_report(c, inputs);
  } catch (const Failure& f) {
    nlohmann::json e{{"error", scusim_status_name(f.status)}, {"message", f.message}};
    std::cerr << e.dump() << "\n";
    return 3;
  } catch (const std::exception& ex) {
    nlohmann::json e{{"error", "InternalError"}, {"message", ex.what()}};
    std::cerr << e.dump() << "\n";
    return 3;
  }
  return 0;
}
