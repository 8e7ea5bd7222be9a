#ifndef TPP_SWITCH_STATE_HPP
#define TPP_SWITCH_STATE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "tpp/isa.hpp"
#include "tpp/memmap.hpp"

namespace tpp {

struct StageState {
  uint16_t version = 0;
  uint16_t refcount = 0;
  uint64_t lookup_packets = 0;
  uint64_t lookup_bytes = 0;
  uint64_t match_packets = 0;
  uint64_t match_bytes = 0;
  std::array<Word, 8> regs{};
};

struct FlowEntryState {
  uint16_t id = 0;
  uint64_t insert_clock = 0;
  uint64_t match_packets = 0;
  uint64_t match_bytes = 0;
  uint16_t version = 0;
};

struct LinkState {
  uint16_t id = 0;
  uint64_t capacity_bps = 0;
  uint64_t tx_bytes = 0;
  uint64_t rx_bytes = 0;
  uint64_t tx_packets = 0;
  uint64_t rx_packets = 0;
  uint64_t drop_bytes = 0;
  uint64_t drop_packets = 0;
  Word rx_utilization = 0;
  Word tx_utilization = 0;
  Word app_specific0 = 0;
  Word app_specific1 = 0;
  Word status = 1;
  // Bytes carried since the last utilization update.
  uint64_t window_tx_bytes = 0;
  uint64_t window_rx_bytes = 0;
};

struct QueueState {
  uint64_t occupancy_bytes = 0;
  uint64_t tx_bytes = 0;
  uint64_t tx_packets = 0;
  uint64_t drop_bytes = 0;
  uint64_t drop_packets = 0;
};

// One switch's addressable memory.  Owned by the simulator event loop;
// single-threaded mutation.
struct SwitchState {
  uint16_t switch_id = 0;
  uint16_t version_number = 0;
  uint64_t clock_ns = 0;
  std::vector<StageState> stages = std::vector<StageState>(kPipelineStages);
  std::vector<LinkState> links;
  std::vector<std::vector<QueueState>> queues;  // [link][queue]
  std::vector<std::vector<FlowEntryState>> entries =
      std::vector<std::vector<FlowEntryState>>(kPipelineStages);

  void add_link(uint16_t id, uint64_t capacity_bps, int num_queues = 1) {
    LinkState l;
    l.id = id;
    l.capacity_bps = capacity_bps;
    links.push_back(l);
    queues.emplace_back(std::size_t(num_queues));
  }

  uint64_t port_occupancy_bytes(std::size_t port) const {
    uint64_t total = 0;
    for (const auto& q : queues[port]) total += q.occupancy_bytes;
    return total;
  }
};

// Per-packet scratch filled by the forwarding logic before the TPP runs.
struct PacketMetadata {
  Word input_port = 0;
  Word output_port_bitmap = 0;
  Word enqueued_queue_id = 0;
  bool queue_known = false;  // [Queue:] dereferences only once egress is decided
  Word matched_entry_id = 0;
  bool matched = false;
  std::array<int, kPipelineStages> matched_entry_index = {-1, -1, -1, -1, -1};

  std::optional<int> output_port() const {
    if (output_port_bitmap == 0) return std::nullopt;
    for (int i = 0; i < 16; ++i)
      if (output_port_bitmap & (1u << i)) return i;
    return std::nullopt;
  }
};

class ExecObserver {
 public:
  virtual ~ExecObserver() = default;
  virtual void on_tpp_write(uint16_t /*switch_id*/, uint16_t /*addr*/, Word /*old_value*/,
                            Word /*new_value*/) {}
  virtual void on_cstore(uint16_t /*switch_id*/, uint16_t /*addr*/, Word /*expected*/,
                         Word /*observed*/, bool /*success*/) {}
};

struct ExecContext {
  SwitchState& sw;
  PacketMetadata& meta;
  bool write_enabled = true;
  ExecObserver* observer = nullptr;
  const TppHeader* header = nullptr;  // for [PacketMetadata:HopIndex]
};

// Unified memory-mapped IO.  Reads return nullopt for nonexistent locations;
// writes return false for nonexistent or read-only locations.
std::optional<Word> read_word(ExecContext& ctx, uint16_t addr);
bool write_word(ExecContext& ctx, uint16_t addr, Word value);

// Saturating 16-bit view of a byte count.
inline Word saturate_word(uint64_t v) { return v > 0xffff ? Word(0xffff) : Word(v); }

// Recomputes the utilization words from the bytes carried over the elapsed
// window and resets the window counters.  Raw byte counters are untouched.
void update_link_utilization(LinkState& link, uint64_t window_ns);

}  // namespace tpp

#endif
