#include "tpp/apps/microburst.hpp"

#include "tpp/memmap.hpp"

namespace tpp {

TppProgram microburst_program(uint8_t max_hops) {
  TppProgram p;
  p.instructions.push_back(make_push(addr::kSwitchId));
  p.instructions.push_back(make_push(addr::kCurrentQueueBase + addr::kQueueOccupancy));
  p.header.hop_size_words = 2;
  p.header.insn_count = uint8_t(p.instructions.size());
  p.header.mem_len = uint16_t(max_hops) * 4;
  p.memory.assign(p.header.mem_len, 0xff);
  return p;
}

std::vector<QueueReport> microburst_ingest(const TppProgram& p) {
  std::vector<QueueReport> out;
  const std::size_t hops = p.memory.size() / 4;
  for (std::size_t h = 0; h < hops; ++h) {
    Word sw = p.mem_word(h * 4);
    Word occ = p.mem_word(h * 4 + 2);
    if (sw == 0xffff) continue;  // hop never executed
    out.push_back({sw, occ, uint8_t(h)});
  }
  return out;
}

BurstSummary summarize_bursts(const std::vector<QueueReport>& samples, uint16_t switch_id,
                              Word threshold) {
  BurstSummary s;
  bool in_burst = false;
  for (const auto& r : samples) {
    if (r.switch_id != switch_id) continue;
    ++s.samples;
    if (r.occupancy > s.peak) s.peak = r.occupancy;
    if (r.occupancy >= threshold) {
      if (!in_burst) ++s.bursts;
      in_burst = true;
    } else {
      in_burst = false;
    }
  }
  return s;
}

}  // namespace tpp
