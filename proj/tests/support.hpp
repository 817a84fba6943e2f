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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cluster.hpp"
#include "isa.hpp"
#include "runtime.hpp"
#include "topology.hpp"

namespace scusim::test {

inline ValidatedConfig config(unsigned n_cores = 8) {
  ClusterConfig c;
  c.n_cores = n_cores;
  return validate(c);
}

inline std::uint32_t off(const ValidatedConfig& cfg, RegKind k, unsigned inst = 0) {
  return cfg.address_map().offset_of(k, inst);
}

inline std::uint32_t alias(const ValidatedConfig& cfg, RegKind k, unsigned inst = 0) {
  return cfg.address_map().scu_alias_base + off(cfg, k, inst);
}

inline std::uint32_t word(const ValidatedConfig& cfg, unsigned i) {
  return cfg.address_map().tcdm_base + 4 * i;
}

inline Program with_halt(std::vector<Instr> code) {
  code.push_back(Instr::halt());
  return Program(std::move(code));
}

// r4 holds the SCU alias base on every core.
inline void preload_alias(Cluster& cl) {
  for (unsigned k = 0; k < cl.n_cores(); ++k)
    cl.set_register(k, rt::kScuBase, cl.config().address_map().scu_alias_base);
}

inline std::vector<unsigned> iota(unsigned n) { return first_cores(n); }

}  // namespace scusim::test
