#include "tpp/exec.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "tpp/memmap.hpp"

namespace tpp {

const char* skip_reason_name(SkipReason r) {
  switch (r) {
    case SkipReason::None: return "executed";
    case SkipReason::NonexistentMemory: return "nonexistent-memory";
    case SkipReason::CondFailed: return "cond-failed";
    case SkipReason::WriteDisabled: return "write-disabled";
  }
  return "?";
}

namespace {

bool slot_ok(const TppProgram& p, std::size_t byte_addr, std::size_t bytes = 2) {
  return byte_addr + bytes <= p.memory.size();
}

// Executes one instruction.  Returns true if it was a conditional that failed
// (or could not be evaluated), which suppresses later instructions.
bool exec_one(ExecContext& ctx, TppProgram& p, const Instruction& in, ExecRecord& rec) {
  auto fail = [&](SkipReason r) {
    rec.skip = r;
    p.header.flags |= (r == SkipReason::WriteDisabled) ? kFlagWriteSkipped : kFlagExecError;
    return is_conditional(in.op) && r != SkipReason::WriteDisabled;
  };

  switch (in.op) {
    case Opcode::Load: {
      std::size_t slot = p.hop_slot_addr(in.hop_offset());
      auto v = read_word(ctx, in.addr);
      if (!v || !slot_ok(p, slot)) return fail(SkipReason::NonexistentMemory);
      rec.value_read = *v;
      rec.value_written = *v;
      p.set_mem_word(slot, *v);
      return false;
    }

    case Opcode::Store: {
      if (!ctx.write_enabled) return fail(SkipReason::WriteDisabled);
      std::size_t slot = p.hop_slot_addr(in.hop_offset());
      if (!slot_ok(p, slot)) return fail(SkipReason::NonexistentMemory);
      Word v = p.mem_word(slot);
      if (!write_word(ctx, in.addr, v)) return fail(SkipReason::NonexistentMemory);
      rec.value_read = v;
      rec.value_written = v;
      return false;
    }

    case Opcode::Push: {
      // The slot is claimed even when the read fails; slot assignment is
      // static, exactly as the LOAD produced by rewrite_push_pop would be.
      std::size_t slot = p.header.sp;
      if (!slot_ok(p, slot)) return fail(SkipReason::NonexistentMemory);
      p.header.sp += 2;
      auto v = read_word(ctx, in.addr);
      if (!v) return fail(SkipReason::NonexistentMemory);
      rec.value_read = *v;
      rec.value_written = *v;
      p.set_mem_word(slot, *v);
      return false;
    }

    case Opcode::Pop: {
      if (p.header.sp < 2 || !slot_ok(p, p.header.sp - 2))
        return fail(SkipReason::NonexistentMemory);
      if (!ctx.write_enabled) {
        p.header.sp -= 2;  // the word is still consumed
        return fail(SkipReason::WriteDisabled);
      }
      p.header.sp -= 2;
      Word v = p.mem_word(p.header.sp);
      rec.value_read = v;
      if (!write_word(ctx, in.addr, v)) return fail(SkipReason::NonexistentMemory);
      rec.value_written = v;
      return false;
    }

    case Opcode::Cstore: {
      if (!ctx.write_enabled) return fail(SkipReason::WriteDisabled);
      std::size_t pre_slot = p.hop_slot_addr(in.pre_offset());
      std::size_t post_slot = p.hop_slot_addr(in.post_offset());
      if (!slot_ok(p, pre_slot) || !slot_ok(p, post_slot))
        return fail(SkipReason::NonexistentMemory);
      auto x = read_word(ctx, in.addr);
      if (!x) return fail(SkipReason::NonexistentMemory);
      Word expected = p.mem_word(pre_slot);
      rec.value_read = *x;
      rec.cond_checked = true;
      rec.cond_ok = (*x == expected);
      Word final_value = *x;
      if (rec.cond_ok) {
        Word post = p.mem_word(post_slot);
        if (!write_word(ctx, in.addr, post)) return fail(SkipReason::NonexistentMemory);
        rec.value_written = post;
        final_value = post;
      }
      if (ctx.observer) ctx.observer->on_cstore(ctx.sw.switch_id, in.addr, expected, *x, rec.cond_ok);
      // The packet learns the value the location had (or now has).
      p.set_mem_word(pre_slot, final_value);
      return !rec.cond_ok;
    }

    case Opcode::Cexec: {
      std::size_t block = p.hop_slot_addr(in.hop_offset());
      if (!slot_ok(p, block, 8)) return fail(SkipReason::NonexistentMemory);
      auto x = read_word(ctx, in.addr);
      if (!x) return fail(SkipReason::NonexistentMemory);
      uint32_t mask = (uint32_t(p.mem_word(block)) << 16) | p.mem_word(block + 2);
      uint32_t value = (uint32_t(p.mem_word(block + 4)) << 16) | p.mem_word(block + 6);
      rec.value_read = *x;
      rec.cond_checked = true;
      rec.cond_ok = ((uint32_t(*x) & mask) == value);
      return !rec.cond_ok;
    }
  }
  return false;
}

}  // namespace

ExecutionTrace execute_tpp(ExecContext& ctx, TppProgram& p) {
  ExecutionTrace trace;
  trace.switch_id = ctx.sw.switch_id;
  trace.hop_index = p.header.hop_index;

  bool suppressed = false;
  for (int i = 0; i < int(p.instructions.size()); ++i) {
    const Instruction& in = p.instructions[i];
    ExecRecord rec;
    rec.insn_index = i;
    rec.op = in.op;
    rec.addr = in.addr;
    rec.stage = stage_of(in.addr);
    if (suppressed)
      rec.skip = SkipReason::CondFailed;
    else if (exec_one(ctx, p, in, rec))
      suppressed = true;
    trace.records.push_back(rec);
  }
  return trace;
}

ExecutionTrace execute_tpp_ordered(ExecContext& ctx, TppProgram& p, std::span<const int> order) {
  const std::vector<Instruction> original = p.instructions;
  TppProgram serialized = rewrite_push_pop(p);

  ExecutionTrace trace;
  trace.switch_id = ctx.sw.switch_id;
  trace.hop_index = p.header.hop_index;
  trace.records.resize(original.size());

  uint16_t sp_before = p.header.sp;
  std::vector<bool> cond_failed(original.size(), false);

  for (int j : order) {
    const Instruction& in = serialized.instructions[j];
    ExecRecord& rec = trace.records[j];
    rec.insn_index = j;
    rec.op = original[j].op;
    rec.addr = in.addr;
    rec.stage = stage_of(in.addr);

    bool suppressed = false;
    for (int i = 0; i < j; ++i) suppressed = suppressed || cond_failed[i];
    if (suppressed) {
      rec.skip = SkipReason::CondFailed;
      continue;
    }
    // Effects land in p's memory via the serialized instruction.
    if (exec_one(ctx, p, in, rec)) cond_failed[j] = true;
  }

  // Replay the stack-pointer motion in program order, mirroring the
  // sequential interpreter: a slot is claimed or consumed whenever it is in
  // range, even when the switch-memory access itself failed.
  uint16_t sp = sp_before;
  for (std::size_t j = 0; j < original.size(); ++j) {
    if (trace.records[j].skip == SkipReason::CondFailed) continue;
    if (original[j].op == Opcode::Push && slot_ok(p, sp)) sp += 2;
    if (original[j].op == Opcode::Pop && sp >= 2 && slot_ok(p, sp - 2)) sp -= 2;
  }
  p.header.sp = sp;
  std::sort(trace.records.begin(), trace.records.end(),
            [](const ExecRecord& a, const ExecRecord& b) { return a.insn_index < b.insn_index; });
  return trace;
}

TppProgram rewrite_push_pop(const TppProgram& p) {
  TppProgram out = p;
  const int base_words = int(p.header.hop_index) * p.header.hop_size_words;
  if (p.header.sp % 2 != 0)
    throw TppError(Errc::MemoryOverflow, "stack pointer not word aligned");
  int next = int(p.header.sp) / 2 - base_words;
  if (next < 0) throw TppError(Errc::MemoryOverflow, "stack pointer behind this hop's region");

  for (auto& in : out.instructions) {
    if (in.op == Opcode::Push) {
      int slot = next++;
      if (slot >= int(p.header.hop_size_words) || slot > 0x7f)
        throw TppError(Errc::MemoryOverflow, "PUSH slot past the hop region");
      in = make_load(in.addr, uint8_t(slot));
    } else if (in.op == Opcode::Pop) {
      int slot = --next;
      if (slot < 0) throw TppError(Errc::MemoryOverflow, "POP from an empty hop region");
      in = make_store(in.addr, uint8_t(slot));
    }
  }
  return out;
}

std::string ExecutionTrace::to_log_lines() const {
  std::ostringstream os;
  for (const auto& r : records) {
    char head[96];
    std::snprintf(head, sizeof head, "sw=%u hop=%u insn=%d stage=%d %-6s 0x%04x", switch_id,
                  hop_index, r.insn_index, r.stage, opcode_name(r.op), r.addr);
    os << head;
    if (auto m = mnemonic_for(r.addr)) os << " [" << *m << "]";
    if (r.value_read) {
      char buf[24];
      std::snprintf(buf, sizeof buf, " read=0x%04x", *r.value_read);
      os << buf;
    }
    if (r.value_written) {
      char buf[24];
      std::snprintf(buf, sizeof buf, " write=0x%04x", *r.value_written);
      os << buf;
    }
    if (r.cond_checked) os << " cond=" << (r.cond_ok ? "pass" : "fail");
    os << " disp=" << skip_reason_name(r.skip) << "\n";
  }
  return os.str();
}

}  // namespace tpp
