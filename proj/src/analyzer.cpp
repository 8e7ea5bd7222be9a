#include "tpp/analyzer.hpp"

#include <sstream>

#include "tpp/memmap.hpp"

namespace tpp {

namespace {

bool covered(const std::vector<MemoryPolicy>& policies, uint64_t appid, AccessOp op, uint16_t a) {
  for (const auto& pol : policies)
    if (pol.appid == appid && pol.op == op && pol.start <= a && a <= pol.end) return true;
  return false;
}

}  // namespace

AnalysisReport analyze(const TppProgram& p, const std::vector<MemoryPolicy>& policies,
                       uint64_t appid, bool deny_writes) {
  AnalysisReport r;

  struct Access {
    AccessOp op;
    uint16_t a;
  };

  for (int i = 0; i < int(p.instructions.size()); ++i) {
    const auto& in = p.instructions[i];
    std::vector<Access> accesses;
    switch (in.op) {
      case Opcode::Load:
      case Opcode::Push:
      case Opcode::Cexec:
        accesses.push_back({AccessOp::Read, in.addr});
        break;
      case Opcode::Store:
      case Opcode::Pop:
        accesses.push_back({AccessOp::Write, in.addr});
        break;
      case Opcode::Cstore:
        accesses.push_back({AccessOp::Read, in.addr});
        accesses.push_back({AccessOp::Write, in.addr});
        break;
    }

    if (is_write(in.op)) {
      r.has_writes = true;
      if (deny_writes)
        r.violations.push_back({i, std::string(opcode_name(in.op)) + " with writes disabled"});
    }

    for (const auto& acc : accesses) {
      r.touched_ranges.push_back({acc.op, acc.a, acc.a});
      if (classify_address(acc.a).ns == Namespace::Nonexistent) {
        r.violations.push_back({i, "access to nonexistent address"});
        continue;
      }
      if (!covered(policies, appid, acc.op, acc.a)) {
        std::ostringstream os;
        os << (acc.op == AccessOp::Read ? "read" : "write") << " of "
           << mnemonic_for(acc.a).value_or("?") << " not covered by any policy";
        r.violations.push_back({i, os.str()});
      }
    }
  }

  // Conditionals gate everything after them; operands of later instructions
  // must not live at an earlier pipeline stage than the condition's operand.
  for (int i = 0; i < int(p.instructions.size()); ++i) {
    if (!is_conditional(p.instructions[i].op)) continue;
    int cond_stage = stage_of(p.instructions[i].addr);
    for (int j = i + 1; j < int(p.instructions.size()); ++j)
      if (stage_of(p.instructions[j].addr) < cond_stage) r.hazard_order_ok = false;
  }
  return r;
}

std::string report_text(const AnalysisReport& r) {
  std::ostringstream os;
  os << "touched:";
  for (const auto& t : r.touched_ranges) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " %s:0x%04x", t.op == AccessOp::Read ? "r" : "w", t.start);
    os << buf;
  }
  os << "\nhas_writes: " << (r.has_writes ? "yes" : "no")
     << "\nhazard_order_ok: " << (r.hazard_order_ok ? "yes" : "no") << "\nviolations: "
     << r.violations.size() << "\n";
  for (const auto& v : r.violations) os << "  insn " << v.insn_index << ": " << v.reason << "\n";
  return os.str();
}

}  // namespace tpp
