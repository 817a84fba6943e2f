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

#include "scusim/scusim.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "bench.hpp"
#include "cluster.hpp"
#include "error.hpp"
#include "power.hpp"
#include "profiler.hpp"
#include "report.hpp"
#include "topology.hpp"

struct scusim_config {
  scusim::ClusterConfig cfg;
};

struct scusim_cluster {
  std::unique_ptr<scusim::Cluster> cl;
};

namespace {

thread_local std::string g_last_error;

scusim_status code_of(scusim::ErrorCode c) {
  using scusim::ErrorCode;
  switch (c) {
    case ErrorCode::Config: return SCUSIM_ERR_CONFIG;
    case ErrorCode::InvalidArgument: return SCUSIM_ERR_INVALID_ARGUMENT;
    case ErrorCode::AddressFault: return SCUSIM_ERR_ADDRESS_FAULT;
    case ErrorCode::DecodeFault: return SCUSIM_ERR_DECODE_FAULT;
    case ErrorCode::IllegalInstr: return SCUSIM_ERR_ILLEGAL_INSTR;
    case ErrorCode::UnlockNotOwner: return SCUSIM_ERR_UNLOCK_NOT_OWNER;
    case ErrorCode::UnsupportedTeam: return SCUSIM_ERR_UNSUPPORTED_TEAM;
    case ErrorCode::NotReached: return SCUSIM_ERR_NOT_REACHED;
    case ErrorCode::MalformedTrace: return SCUSIM_ERR_MALFORMED_TRACE;
    case ErrorCode::Deadlock: return SCUSIM_ERR_DEADLOCK;
    case ErrorCode::Parse: return SCUSIM_ERR_PARSE;
    case ErrorCode::Io: return SCUSIM_ERR_IO;
  }
  return SCUSIM_ERR_INTERNAL;
}

scusim_status fail(scusim_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <class F>
scusim_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SCUSIM_OK;
  } catch (const scusim::Error& e) {
    return fail(code_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SCUSIM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SCUSIM_ERR_INTERNAL, e.what());
  }
}

void need(const void* p, const char* what) {
  if (!p) throw scusim::Error(scusim::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

scusim::ValidatedConfig validated(const scusim_config* c) {
  need(c, "config");
  return scusim::validate(c->cfg);
}

}  // namespace

extern "C" {

const char* scusim_version(void) { return "1.0.0"; }

const char* scusim_status_name(scusim_status s) {
  switch (s) {
    case SCUSIM_OK: return "ok";
    case SCUSIM_ERR_CONFIG: return "ConfigError";
    case SCUSIM_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case SCUSIM_ERR_ADDRESS_FAULT: return "AddressFault";
    case SCUSIM_ERR_DECODE_FAULT: return "DecodeFault";
    case SCUSIM_ERR_ILLEGAL_INSTR: return "IllegalInstr";
    case SCUSIM_ERR_UNLOCK_NOT_OWNER: return "UnlockNotOwner";
    case SCUSIM_ERR_UNSUPPORTED_TEAM: return "UnsupportedTeam";
    case SCUSIM_ERR_NOT_REACHED: return "NotReached";
    case SCUSIM_ERR_MALFORMED_TRACE: return "MalformedTrace";
    case SCUSIM_ERR_DEADLOCK: return "Deadlock";
    case SCUSIM_ERR_PARSE: return "ParseError";
    case SCUSIM_ERR_IO: return "IoError";
    case SCUSIM_ERR_INTERNAL: return "InternalError";
  }
  return "unknown";
}

const char* scusim_last_error(void) { return g_last_error.c_str(); }

void scusim_string_free(char* s) { std::free(s); }

scusim_status scusim_config_new(scusim_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new scusim_config{};
  });
}

scusim_status scusim_config_from_json(const char* json, scusim_config** out) {
  return guard([&] {
    need(json, "json");
    need(out, "out");
    *out = new scusim_config{scusim::config_from_json(json)};
  });
}

scusim_status scusim_config_load(const char* path, scusim_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new scusim_config{scusim::load_config_file(path)};
  });
}

void scusim_config_free(scusim_config* cfg) { delete cfg; }

scusim_status scusim_config_set(scusim_config* cfg, const char* key, const char* value) {
  return guard([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    scusim::apply_override(cfg->cfg, key, value);
  });
}

scusim_status scusim_config_load_calibration(scusim_config* cfg, const char* path) {
  return guard([&] {
    need(cfg, "config");
    need(path, "path");
    cfg->cfg.power = scusim::load_calibration_file(path);
  });
}

scusim_status scusim_config_validate(const scusim_config* cfg) {
  return guard([&] { validated(cfg); });
}

scusim_status scusim_config_to_json(const scusim_config* cfg, char** out) {
  return guard([&] {
    need(cfg, "config");
    need(out, "out");
    *out = dup(scusim::config_to_json(cfg->cfg));
  });
}

scusim_status scusim_config_register_table(const scusim_config* cfg, char** out) {
  return guard([&] {
    need(out, "out");
    *out = dup(validated(cfg).address_map().register_table());
  });
}

scusim_status scusim_cluster_new(const scusim_config* cfg, scusim_cluster** out) {
  return guard([&] {
    need(out, "out");
    *out = new scusim_cluster{std::make_unique<scusim::Cluster>(validated(cfg))};
  });
}

void scusim_cluster_free(scusim_cluster* cl) { delete cl; }

scusim_status scusim_cluster_n_cores(const scusim_cluster* cl, unsigned* out) {
  return guard([&] {
    need(cl, "cluster");
    need(out, "out");
    *out = cl->cl->n_cores();
  });
}

scusim_status scusim_cluster_load_program(scusim_cluster* cl, unsigned core, const char* text) {
  return guard([&] {
    need(cl, "cluster");
    need(text, "assembly");
    cl->cl->load_program(core, scusim::assemble(text));
  });
}

scusim_status scusim_cluster_set_register(scusim_cluster* cl, unsigned core, unsigned reg,
                                          uint32_t value) {
  return guard([&] {
    need(cl, "cluster");
    cl->cl->set_register(core, reg, value);
  });
}

scusim_status scusim_cluster_read_word(const scusim_cluster* cl, uint32_t address,
                                       uint32_t* out) {
  return guard([&] {
    need(cl, "cluster");
    need(out, "out");
    *out = cl->cl->tcdm().peek(address);
  });
}

scusim_status scusim_cluster_write_word(scusim_cluster* cl, uint32_t address, uint32_t value) {
  return guard([&] {
    need(cl, "cluster");
    cl->cl->tcdm().poke(address, value);
  });
}

scusim_status scusim_cluster_raise_event(scusim_cluster* cl, uint64_t cycle, unsigned core,
                                         unsigned line) {
  return guard([&] {
    need(cl, "cluster");
    cl->cl->schedule_event_line(cycle, core, line);
  });
}

scusim_status scusim_cluster_step(scusim_cluster* cl) {
  return guard([&] {
    need(cl, "cluster");
    cl->cl->step();
  });
}

scusim_status scusim_cluster_run(scusim_cluster* cl, uint64_t max_cycles, scusim_run_status* out) {
  return guard([&] {
    need(cl, "cluster");
    auto s = cl->cl->run(max_cycles);
    if (out)
      *out = s == scusim::RunStatus::Halted     ? SCUSIM_RUN_HALTED
             : s == scusim::RunStatus::Deadlock ? SCUSIM_RUN_DEADLOCK
                                                : SCUSIM_RUN_CYCLE_LIMIT;
  });
}

scusim_status scusim_cluster_cycle(const scusim_cluster* cl, uint64_t* out) {
  return guard([&] {
    need(cl, "cluster");
    need(out, "out");
    *out = cl->cl->cycle();
  });
}

scusim_status scusim_cluster_report_json(const scusim_cluster* cl, int use_window, char** out) {
  return guard([&] {
    need(cl, "cluster");
    need(out, "out");
    *out = dup(scusim::to_json(scusim::make_report(*cl->cl, use_window != 0)).dump(2));
  });
}

scusim_status scusim_cluster_periods_csv(const scusim_cluster* cl, char** out) {
  return guard([&] {
    need(cl, "cluster");
    need(out, "out");
    std::ostringstream os;
    scusim::write_periods_csv(os, scusim::extract_periods(cl->cl->markers(),
                                                          cl->cl->clock_timeline(),
                                                          cl->cl->n_cores()));
    *out = dup(os.str());
  });
}

scusim_status scusim_primitive_cost(const scusim_config* cfg, const char* variant,
                                    unsigned n_cores, scusim_cost* out) {
  return guard([&] {
    need(variant, "variant");
    need(out, "out");
    auto c = scusim::measure_primitive_cost(validated(cfg), scusim::parse_variant(variant),
                                            n_cores);
    *out = {c.cycles, c.energy_nj, c.raw_cycles, c.raw_energy_nj, c.ideal_cycles,
            c.ideal_energy_nj};
  });
}

scusim_status scusim_table1_csv(const scusim_config* cfg, const unsigned* cores, size_t n_cores,
                                const char* reference_path, char** out) {
  return guard([&] {
    need(out, "out");
    std::vector<unsigned> counts{2, 4, 8};
    if (n_cores) {
      need(cores, "cores");
      counts.assign(cores, cores + n_cores);
    }
    auto rows = scusim::table1(validated(cfg), {}, counts);
    if (reference_path) {
      auto ref = scusim::load_reference(reference_path);
      *out = dup(scusim::table1_csv(rows, &ref));
    } else {
      *out = dup(scusim::table1_csv(rows));
    }
  });
}

scusim_status scusim_sweep_csv(const scusim_config* cfg, const char* variant,
                               const unsigned* cores, size_t n_cores, const uint32_t* sfr,
                               size_t n_sfr, double beta, uint64_t seed, char** out) {
  return guard([&] {
    need(variant, "variant");
    need(out, "out");
    scusim::SweepSpec spec;
    spec.primitive = scusim::parse_variant(variant);
    if (n_cores) {
      need(cores, "cores");
      spec.core_counts.assign(cores, cores + n_cores);
    }
    if (n_sfr) {
      need(sfr, "sfr");
      spec.sfr_cycles.assign(sfr, sfr + n_sfr);
    }
    spec.imbalance_beta = beta;
    spec.seed = seed;
    *out = dup(scusim::sweep_csv(scusim::sweep_overhead(validated(cfg), spec)));
  });
}

scusim_status scusim_min_sfr_solve(const scusim_config* cfg, const char* variant,
                                   unsigned n_cores, double threshold, const char* metric,
                                   scusim_min_sfr* out) {
  return guard([&] {
    need(variant, "variant");
    need(metric, "metric");
    need(out, "out");
    auto r = scusim::min_sfr(validated(cfg), scusim::parse_variant(variant), n_cores, threshold,
                             scusim::parse_metric(metric));
    *out = {r.min_sfr, r.below, r.above, r.overhead_below, r.overhead_at, r.evaluations};
  });
}

scusim_status scusim_calibrate(const scusim_config* cfg, const char* reference_path,
                               char** calibration_text, char** residuals_csv,
                               scusim_calibration* summary) {
  return guard([&] {
    need(reference_path, "reference path");
    need(calibration_text, "calibration_text");
    auto vc = validated(cfg);
    auto ref = scusim::load_reference(reference_path);
    auto cells = scusim::calibration_cells(vc, ref);
    auto extra = scusim::anchor_cells(vc, ref, scusim::load_anchors(reference_path));
    cells.insert(cells.end(), extra.begin(), extra.end());
    scusim::CalibrationOptions opt;
    opt.gated_residual_fraction = vc.power().gated_residual_fraction;
    auto r = scusim::calibrate(cells, opt);
    std::ostringstream note;
    note << "fitted to " << cells.size() << " reference rows, rms relative residual "
         << r.rms_rel;
    *calibration_text = dup(scusim::format_calibration(r.params, note.str()));
    if (residuals_csv) {
      std::ostringstream os;
      os.precision(10);
      os << "cell,target_nj,fitted_nj,residual_rel\n";
      for (std::size_t i = 0; i < cells.size(); ++i)
        os << cells[i].name << ',' << cells[i].target_nj << ',' << r.fitted_nj[i] << ','
           << r.residual_rel[i] << '\n';
      *residuals_csv = dup(os.str());
    }
    if (summary) *summary = {r.rms_rel, r.max_abs_rel, r.ill_conditioned ? 1 : 0};
  });
}

scusim_status scusim_imbalance_run(const scusim_config* cfg, const char* family,
                                   unsigned n_cores, uint32_t sfr, double beta, uint64_t seed,
                                   unsigned iterations, char** report_json, char** periods_csv) {
  return guard([&] {
    need(family, "family");
    need(report_json, "report_json");
    scusim::ImbalanceSpec spec;
    spec.family = scusim::parse_variant(std::string(family) + "-barrier").family;
    spec.n_cores = n_cores;
    spec.sfr = sfr;
    spec.beta = beta;
    spec.seed = seed;
    spec.iterations = iterations;
    std::vector<std::vector<scusim::SyncPeriod>> periods;
    auto rep = scusim::run_imbalanced_kernel(validated(cfg), spec, &periods);
    *report_json = dup(scusim::to_json(rep).dump(2));
    if (periods_csv) {
      std::ostringstream os;
      scusim::write_periods_csv(os, periods);
      *periods_csv = dup(os.str());
    }
  });
}

scusim_status scusim_reports_csv(const char* const* report_json, size_t n, char** out) {
  return guard([&] {
    need(out, "out");
    if (n) need(report_json, "report_json");
    std::string s = scusim::csv_header() + "\n";
    for (size_t i = 0; i < n; ++i) {
      need(report_json[i], "report document");
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(report_json[i]);
      } catch (const nlohmann::json::exception& e) {
        throw scusim::Error(scusim::ErrorCode::Parse, e.what());
      }
      s += scusim::csv_row(scusim::report_from_json(j)) + "\n";
    }
    *out = dup(s);
  });
}

}  // extern "C"
