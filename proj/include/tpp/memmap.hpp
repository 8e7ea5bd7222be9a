#ifndef TPP_MEMMAP_HPP
#define TPP_MEMMAP_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tpp/isa.hpp"

namespace tpp {

// The standardized unified address space.  Every statistic a TPP can touch
// lives at a fixed 16-bit word address known at compile time.
//
//   [Switch:]          0x0000          per-ASIC globals
//   [Stage$i:]         0x1000+i*0x100  per match-action stage (i in 0..4)
//   [FlowEntry$i:]     0x2000+i*0x100  stats of the entry the packet matched at stage i
//   [Link$i:]          0x8000+i*0x40   per-port stats block (i in 0..31)
//   [Link:]            0xa000          the packet's output-port block
//   [Queue:]           0xb000          the packet's enqueued-queue block
//   [Queue$i$j:]       0xc000+(i*8+j)*0x10  queue j on link i
//   [PacketMetadata:]  0xe000          per-packet scratch
enum class Namespace : uint8_t {
  Switch,
  Stage,
  FlowEntry,
  Link,         // explicit index
  CurrentLink,  // packet's output port
  CurrentQueue,
  Queue,        // explicit (link, queue)
  PacketMetadata,
  Nonexistent,
};

constexpr int kIngressStages = 4;
constexpr int kEgressStage = 4;  // stages 0..3 ingress, 4 egress
constexpr int kPipelineStages = 5;
constexpr int kMaxLinks = 32;
constexpr int kMaxQueuesPerLink = 8;

struct Address {
  uint16_t raw = 0;
  Namespace ns = Namespace::Nonexistent;
  int index = -1;   // stage / link index, -1 when not applicable
  int index2 = -1;  // queue index within link
  uint16_t offset = 0;

  bool operator==(const Address&) const = default;
};

// Mnemonic ("Namespace:Name", e.g. "Queue:QueueOccupancy" or "[Link$2:TX-Bytes]",
// brackets optional) -> standardized address.  Throws UnknownMnemonic.
Address resolve_address(const std::string& mnemonic);

// Raw address -> namespace decomposition; Nonexistent namespace when the raw
// value is outside the defined map.
Address classify_address(uint16_t raw);

// Inverse of resolve_address for defined addresses.
std::optional<std::string> mnemonic_for(uint16_t raw);

// Pipeline stage at which a location's value is available (for hazard checks).
int stage_of(uint16_t raw);

// True for the handful of locations a TPP may STORE to.
bool is_writable(uint16_t raw);

// Every defined (mnemonic, address) pair, sorted by raw address.
std::vector<std::pair<std::string, uint16_t>> all_mnemonics();

// Human-readable memory map (markdown), committed as docs/memory_map.md.
std::string memory_map_markdown();

// Well-known addresses used throughout the stack.
namespace addr {
constexpr uint16_t kSwitchId = 0x0000;
constexpr uint16_t kSwitchVersion = 0x0001;
constexpr uint16_t kSwitchClockLo = 0x0002;
constexpr uint16_t kSwitchClockHi = 0x0003;

constexpr uint16_t kStageBase = 0x1000;
constexpr uint16_t kStageStride = 0x0100;
constexpr uint16_t kStageRegBase = 0x10;  // Reg0..Reg7 at +0x10..+0x17

constexpr uint16_t kFlowEntryBase = 0x2000;
constexpr uint16_t kFlowEntryStride = 0x0100;

constexpr uint16_t kLinkBase = 0x8000;
constexpr uint16_t kLinkStride = 0x0040;
constexpr uint16_t kCurrentLinkBase = 0xa000;
// Offsets within a link block.
constexpr uint16_t kLinkId = 0;
constexpr uint16_t kLinkTxBytesLo = 1, kLinkTxBytesHi = 2;
constexpr uint16_t kLinkRxBytesLo = 3, kLinkRxBytesHi = 4;
constexpr uint16_t kLinkTxPacketsLo = 5, kLinkTxPacketsHi = 6;
constexpr uint16_t kLinkRxPacketsLo = 7, kLinkRxPacketsHi = 8;
constexpr uint16_t kLinkDropBytesLo = 9, kLinkDropBytesHi = 10;
constexpr uint16_t kLinkDropPacketsLo = 11, kLinkDropPacketsHi = 12;
constexpr uint16_t kLinkQueueSize = 13;
constexpr uint16_t kLinkRxUtilization = 14;
constexpr uint16_t kLinkTxUtilization = 15;
constexpr uint16_t kLinkAppSpecific0 = 16;
constexpr uint16_t kLinkAppSpecific1 = 17;
constexpr uint16_t kLinkStatus = 18;
constexpr uint16_t kLinkWords = 19;

constexpr uint16_t kCurrentQueueBase = 0xb000;
constexpr uint16_t kQueueBase = 0xc000;
constexpr uint16_t kQueueStride = 0x0010;
// Offsets within a queue block.
constexpr uint16_t kQueueOccupancy = 0;
constexpr uint16_t kQueueTxBytesLo = 1, kQueueTxBytesHi = 2;
constexpr uint16_t kQueueTxPacketsLo = 3, kQueueTxPacketsHi = 4;
constexpr uint16_t kQueueDropBytesLo = 5, kQueueDropBytesHi = 6;
constexpr uint16_t kQueueDropPacketsLo = 7, kQueueDropPacketsHi = 8;
constexpr uint16_t kQueueWords = 9;

constexpr uint16_t kMetaBase = 0xe000;
constexpr uint16_t kMetaInputPort = 0xe000;
constexpr uint16_t kMetaOutputPortBitmap = 0xe001;
constexpr uint16_t kMetaOutputPort = 0xe002;
constexpr uint16_t kMetaMatchedEntryId = 0xe003;
constexpr uint16_t kMetaEnqueuedQueueId = 0xe004;
constexpr uint16_t kMetaHopIndex = 0xe005;
}  // namespace addr

}  // namespace tpp

#endif
