#ifndef TPP_APPS_HISTORY_HPP
#define TPP_APPS_HISTORY_HPP

#include <cstdint>
#include <vector>

#include "tpp/isa.hpp"

namespace tpp {

// One hop of a packet's forwarding history.
struct HopRecord {
  uint16_t switch_id = 0;
  uint16_t matched_entry_id = 0;
  uint16_t input_port = 0;
};

// PUSH [Switch:SwitchID]; PUSH [PacketMetadata:MatchedEntryID];
// PUSH [PacketMetadata:InputPort].  Memory prefilled with 0xffff.
TppProgram history_program(uint8_t max_hops);

std::vector<HopRecord> build_history(const TppProgram& completed);

// What a path is allowed to look like.  Empty switches = only the generic
// checks (no loops, contiguous hops) apply.
struct PathExpectation {
  std::vector<uint16_t> switches;  // exact switch sequence, in order
  bool allow_prefix = false;       // accept histories that stop early
};

// True when the history visits no switch twice and matches the expectation.
bool netwatch_check(const std::vector<HopRecord>& history, const PathExpectation& expected);

}  // namespace tpp

#endif
