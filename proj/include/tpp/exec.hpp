#ifndef TPP_EXEC_HPP
#define TPP_EXEC_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tpp/isa.hpp"
#include "tpp/switch_state.hpp"

namespace tpp {

// Why an instruction produced no effect.
enum class SkipReason : uint8_t {
  None,               // executed
  NonexistentMemory,  // bad switch address or packet slot out of range
  CondFailed,         // a preceding conditional failed
  WriteDisabled,      // switch refuses TPP writes
};

const char* skip_reason_name(SkipReason r);

struct ExecRecord {
  int insn_index = 0;
  Opcode op = Opcode::Load;
  uint16_t addr = 0;
  int stage = -1;
  std::optional<Word> value_read;
  std::optional<Word> value_written;  // to packet memory or switch memory
  SkipReason skip = SkipReason::None;
  bool cond_checked = false;  // CSTORE/CEXEC that evaluated its condition
  bool cond_ok = false;
};

struct ExecutionTrace {
  uint16_t switch_id = 0;
  uint8_t hop_index = 0;
  std::vector<ExecRecord> records;

  // One line per instruction: hop, stage, opcode, address, values, disposition.
  std::string to_log_lines() const;
};

// Runs the program once at this switch, sequentially, mutating packet memory,
// sp and the header flags.  hop_index is NOT incremented here; the caller
// bumps it on egress.
ExecutionTrace execute_tpp(ExecContext& ctx, TppProgram& p);

// Runs the program with its instructions issued in the given order (a
// permutation of 0..n-1), the way a pipelined ASIC would: PUSH/POP are first
// serialized into LOAD/STORE slots, and a failed conditional suppresses
// exactly the instructions after it in program order.  For hazard-free
// programs (no two instructions sharing a packet word or switch word), final
// packet memory and switch state match execute_tpp for any order in which
// each conditional issues before every later-program-order instruction.
ExecutionTrace execute_tpp_ordered(ExecContext& ctx, TppProgram& p, std::span<const int> order);

// Serializes PUSH/POP into equivalent LOAD/STORE on hop-relative slots, using
// a slot counter seeded from the current sp.  Throws MemoryOverflow when the
// slots would spill past the hop's region.
TppProgram rewrite_push_pop(const TppProgram& p);

}  // namespace tpp

#endif
