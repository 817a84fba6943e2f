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

#include "core.hpp"

#include "error.hpp"

namespace scusim {

const char* to_string(StallCause s) {
  switch (s) {
    case StallCause::None: return "none";
    case StallCause::MemPending: return "mem_pending";
    case StallCause::ElwBlocked: return "elw_blocked";
    case StallCause::InterruptEntry: return "interrupt_entry";
    case StallCause::BranchBubble: return "branch_bubble";
    case StallCause::LoadUse: return "load_use";
  }
  return "?";
}

const char* to_string(CycleKind k) {
  switch (k) {
    case CycleKind::Gated: return "gated";
    case CycleKind::Executing: return "exec";
    case CycleKind::Stalled: return "stall";
  }
  return "?";
}

const char* to_string(CoreMode m) {
  switch (m) {
    case CoreMode::Ready: return "ready";
    case CoreMode::Compute: return "compute";
    case CoreMode::MemWait: return "mem_wait";
    case CoreMode::MemRespond: return "mem_respond";
    case CoreMode::PortWait: return "port_wait";
    case CoreMode::PortRespond: return "port_respond";
    case CoreMode::ElwEntry: return "elw_entry";
    case CoreMode::Sleeping: return "sleeping";
    case CoreMode::ElwWake: return "elw_wake";
    case CoreMode::IrqEntry: return "irq_entry";
    case CoreMode::Bubble: return "bubble";
    case CoreMode::Halted: return "halted";
  }
  return "?";
}

std::uint32_t execute_simple(CoreState& s, const Instr& in) {
  const std::uint32_t a = s.reg(in.rs1);
  const std::uint32_t b = s.reg(in.rs2);
  const auto imm = static_cast<std::uint32_t>(in.imm);
  std::uint32_t next = s.pc + 1;
  switch (in.op) {
    case Op::Nop:
    case Op::Compute:
      break;
    case Op::Li: s.set_reg(in.rd, imm); break;
    case Op::Addi: s.set_reg(in.rd, a + imm); break;
    case Op::Xori: s.set_reg(in.rd, a ^ imm); break;
    case Op::Andi: s.set_reg(in.rd, a & imm); break;
    case Op::Add: s.set_reg(in.rd, a + b); break;
    case Op::Sub: s.set_reg(in.rd, a - b); break;
    case Op::And: s.set_reg(in.rd, a & b); break;
    case Op::Or: s.set_reg(in.rd, a | b); break;
    case Op::Xor: s.set_reg(in.rd, a ^ b); break;
    case Op::Beq:
      if (a == b) next = static_cast<std::uint32_t>(in.target);
      break;
    case Op::Bne:
      if (a != b) next = static_cast<std::uint32_t>(in.target);
      break;
    case Op::Blt:
      if (static_cast<std::int32_t>(a) < static_cast<std::int32_t>(b))
        next = static_cast<std::uint32_t>(in.target);
      break;
    case Op::Bge:
      if (static_cast<std::int32_t>(a) >= static_cast<std::int32_t>(b))
        next = static_cast<std::uint32_t>(in.target);
      break;
    case Op::Jump: next = static_cast<std::uint32_t>(in.target); break;
    default:
      throw Error(ErrorCode::IllegalInstr,
                  std::string("not a simple instruction: ") + to_string(in.op));
  }
  return next;
}

}  // namespace scusim
