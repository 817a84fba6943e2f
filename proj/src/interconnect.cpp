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

#include "interconnect.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

#include "error.hpp"

namespace scusim {

const char* to_string(MemKind k) {
  switch (k) {
    case MemKind::Read: return "read";
    case MemKind::Write: return "write";
    case MemKind::TasRead: return "tas";
  }
  return "?";
}

Tcdm::Tcdm(const ValidatedConfig& cfg)
    : base_(cfg.address_map().tcdm_base),
      n_cores_(cfg.n_cores()),
      tas_latency_(cfg.tas_latency()),
      words_(cfg.address_map().tcdm_size / 4, 0),
      banks_(cfg.n_banks()),
      activity_(cfg.n_banks(), 0) {}

std::size_t Tcdm::index(std::uint32_t address) const {
  if (address % 4 != 0 || address < base_ || (address - base_) / 4 >= words_.size()) {
    std::ostringstream os;
    os << "TCDM access outside range or misaligned at 0x" << std::hex << address;
    throw Error(ErrorCode::AddressFault, os.str());
  }
  return (address - base_) / 4;
}

unsigned Tcdm::bank_of(std::uint32_t address) const {
  return static_cast<unsigned>(index(address) % banks_.size());
}

std::vector<MemGrant> Tcdm::arbitrate(std::uint64_t cycle,
                                      std::span<const MemRequest> requests) {
  std::fill(activity_.begin(), activity_.end(), 0);
  std::vector<const MemRequest*> by_core(n_cores_, nullptr);
  std::vector<std::uint8_t> wanted(banks_.size(), 0);
  for (const auto& r : requests) {
    if (r.core_id >= n_cores_)
      throw Error(ErrorCode::InvalidArgument, "request from unknown core");
    if (by_core[r.core_id])
      throw Error(ErrorCode::InvalidArgument, "more than one request from one core");
    wanted[bank_of(r.address)] = 1;
    by_core[r.core_id] = &r;
  }

  std::vector<MemGrant> grants;
  for (unsigned b = 0; b < banks_.size(); ++b) {
    auto& bs = banks_[b];
    if (bs.tas_busy_until) {
      if (*bs.tas_busy_until >= cycle) {
        activity_[b] = 1;
        if (bs.pending_tas_writeback) {
          words_[*bs.pending_tas_writeback] = 0xFFFFFFFFu;
          bs.pending_tas_writeback.reset();
        }
        continue;
      }
      bs.tas_busy_until.reset();
    }
    if (!wanted[b]) continue;
    const MemRequest* win = nullptr;
    for (unsigned k = 0; k < n_cores_; ++k) {
      unsigned c = (bs.rr_pointer + k) % n_cores_;
      if (by_core[c] && bank_of(by_core[c]->address) == b) {
        win = by_core[c];
        break;
      }
    }
    bs.rr_pointer = (win->core_id + 1) % n_cores_;
    activity_[b] = 1;
    auto idx = index(win->address);
    MemGrant g{win->core_id, b, win->kind, 0};
    switch (win->kind) {
      case MemKind::Read:
        g.rdata = words_[idx];
        break;
      case MemKind::Write:
        words_[idx] = win->wdata;
        break;
      case MemKind::TasRead:
        g.rdata = words_[idx];
        if (tas_latency_ > 1) {
          bs.tas_busy_until = cycle + 1;
          bs.pending_tas_writeback = static_cast<std::uint32_t>(idx);
        } else {
          words_[idx] = 0xFFFFFFFFu;
        }
        break;
    }
    grants.push_back(g);
  }
  return grants;
}

std::uint32_t Tcdm::peek(std::uint32_t address) const {
  auto idx = index(address);
  for (const auto& bs : banks_)
    if (bs.pending_tas_writeback == idx) return 0xFFFFFFFFu;
  return words_[idx];
}

void Tcdm::poke(std::uint32_t address, std::uint32_t value) { words_[index(address)] = value; }

void Tcdm::dump_hex(std::ostream& os) const {
  std::ios_base::fmtflags f(os.flags());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (i % 4 == 0) os << std::hex << std::setw(8) << std::setfill('0') << base_ + i * 4 << ":";
    os << ' ' << std::setw(8) << std::setfill('0') << words_[i];
    if (i % 4 == 3) os << '\n';
  }
  os.flags(f);
}

}  // namespace scusim
