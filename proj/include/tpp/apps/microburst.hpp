#ifndef TPP_APPS_MICROBURST_HPP
#define TPP_APPS_MICROBURST_HPP

#include <cstdint>
#include <vector>

#include "tpp/isa.hpp"

namespace tpp {

// Per-hop sample carried back by the queue-monitor program.
struct QueueReport {
  uint16_t switch_id = 0;
  Word occupancy = 0;  // output-queue bytes, saturating
  uint8_t hop = 0;
};

// PUSH [Switch:SwitchID]; PUSH [Queue:QueueOccupancy] at every hop.  Packet
// memory is prefilled with 0xffff so unexecuted hops are recognizable.
TppProgram microburst_program(uint8_t max_hops);

std::vector<QueueReport> microburst_ingest(const TppProgram& completed);

// Bursts = maximal runs of samples at or above `threshold` bytes within one
// switch's sample sequence.
struct BurstSummary {
  std::size_t samples = 0;
  std::size_t bursts = 0;
  Word peak = 0;
};
BurstSummary summarize_bursts(const std::vector<QueueReport>& samples, uint16_t switch_id,
                              Word threshold);

}  // namespace tpp

#endif
