#include "tpp/memmap.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace tpp {

namespace {

struct Field {
  uint16_t offset;
  const char* name;
};

// Canonical field names per block kind; lo/hi pairs expose 32-bit counters.
const std::vector<Field>& switch_fields() {
  static const std::vector<Field> f = {
      {0, "SwitchID"}, {1, "VersionNumber"}, {2, "Clock"},
      {3, "ClockHi"},  {4, "ClockFrequency"}, {5, "ClockFrequencyHi"},
  };
  return f;
}

const std::vector<Field>& stage_fields() {
  static const std::vector<Field> f = {
      {0, "VersionNumber"}, {1, "RefCount"},
      {2, "LookupPackets"}, {3, "LookupPacketsHi"},
      {4, "LookupBytes"},   {5, "LookupBytesHi"},
      {6, "MatchPackets"},  {7, "MatchPacketsHi"},
      {8, "MatchBytes"},    {9, "MatchBytesHi"},
      {0x10, "Reg0"}, {0x11, "Reg1"}, {0x12, "Reg2"}, {0x13, "Reg3"},
      {0x14, "Reg4"}, {0x15, "Reg5"}, {0x16, "Reg6"}, {0x17, "Reg7"},
  };
  return f;
}

const std::vector<Field>& flowentry_fields() {
  static const std::vector<Field> f = {
      {0, "InsertClock"},  {1, "InsertClockHi"},
      {2, "MatchPackets"}, {3, "MatchPacketsHi"},
      {4, "MatchBytes"},   {5, "MatchBytesHi"},
      {6, "Version"},
  };
  return f;
}

const std::vector<Field>& link_fields() {
  static const std::vector<Field> f = {
      {addr::kLinkId, "ID"},
      {addr::kLinkTxBytesLo, "TX-Bytes"}, {addr::kLinkTxBytesHi, "TX-BytesHi"},
      {addr::kLinkRxBytesLo, "RX-Bytes"}, {addr::kLinkRxBytesHi, "RX-BytesHi"},
      {addr::kLinkTxPacketsLo, "TX-Packets"}, {addr::kLinkTxPacketsHi, "TX-PacketsHi"},
      {addr::kLinkRxPacketsLo, "RX-Packets"}, {addr::kLinkRxPacketsHi, "RX-PacketsHi"},
      {addr::kLinkDropBytesLo, "Drop-Bytes"}, {addr::kLinkDropBytesHi, "Drop-BytesHi"},
      {addr::kLinkDropPacketsLo, "Drop-Packets"}, {addr::kLinkDropPacketsHi, "Drop-PacketsHi"},
      {addr::kLinkQueueSize, "QueueSize"},
      {addr::kLinkRxUtilization, "RX-Utilization"},
      {addr::kLinkTxUtilization, "TX-Utilization"},
      {addr::kLinkAppSpecific0, "AppSpecific_0"},
      {addr::kLinkAppSpecific1, "AppSpecific_1"},
      {addr::kLinkStatus, "Status"},
  };
  return f;
}

const std::vector<Field>& queue_fields() {
  static const std::vector<Field> f = {
      {addr::kQueueOccupancy, "QueueOccupancy"},
      {addr::kQueueTxBytesLo, "TX-Bytes"}, {addr::kQueueTxBytesHi, "TX-BytesHi"},
      {addr::kQueueTxPacketsLo, "TX-Packets"}, {addr::kQueueTxPacketsHi, "TX-PacketsHi"},
      {addr::kQueueDropBytesLo, "Drop-Bytes"}, {addr::kQueueDropBytesHi, "Drop-BytesHi"},
      {addr::kQueueDropPacketsLo, "Drop-Packets"}, {addr::kQueueDropPacketsHi, "Drop-PacketsHi"},
  };
  return f;
}

const std::vector<Field>& meta_fields() {
  static const std::vector<Field> f = {
      {0, "InputPort"},       {1, "OutputPortBitmap"}, {2, "OutputPort"},
      {3, "MatchedEntryID"},  {4, "EnqueuedQueueID"},  {5, "HopIndex"},
  };
  return f;
}

bool iequals(const std::string& a, const std::string& b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

std::optional<uint16_t> field_offset(const std::vector<Field>& fields, const std::string& name) {
  for (const auto& f : fields)
    if (iequals(name, f.name)) return f.offset;
  return std::nullopt;
}

const char* field_name(const std::vector<Field>& fields, uint16_t offset) {
  for (const auto& f : fields)
    if (f.offset == offset) return f.name;
  return nullptr;
}

bool parse_index(const std::string& s, std::size_t pos, int& out) {
  if (pos >= s.size()) return false;
  int v = 0;
  auto [p, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return false;
  out = v;
  return true;
}

}  // namespace

Address resolve_address(const std::string& mnemonic) {
  std::string s = mnemonic;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (!s.empty() && s.front() == '[') s.erase(s.begin());
  if (!s.empty() && s.back() == ']') s.pop_back();
  auto colon = s.find(':');
  if (colon == std::string::npos) throw TppError(Errc::UnknownMnemonic, mnemonic);
  std::string ns = s.substr(0, colon);
  std::string name = s.substr(colon + 1);

  Address a;
  auto resolve_field = [&](const std::vector<Field>& fields, uint16_t base) {
    auto off = field_offset(fields, name);
    if (!off) throw TppError(Errc::UnknownMnemonic, mnemonic);
    a.offset = *off;
    a.raw = uint16_t(base + *off);
  };

  if (iequals(ns, "Switch")) {
    a.ns = Namespace::Switch;
    if (iequals(name, "ID")) name = "SwitchID";  // paper uses both spellings
    resolve_field(switch_fields(), 0x0000);
  } else if (ns.size() > 5 && iequals(ns.substr(0, 5), "Stage")) {
    int i;
    if (!parse_index(ns, 5, i) || i < 0 || i >= kPipelineStages)
      throw TppError(Errc::UnknownMnemonic, mnemonic);
    a.ns = Namespace::Stage;
    a.index = i;
    resolve_field(stage_fields(), uint16_t(addr::kStageBase + i * addr::kStageStride));
  } else if (ns.size() > 9 && iequals(ns.substr(0, 9), "FlowEntry")) {
    int i;
    if (!parse_index(ns, 9, i) || i < 0 || i >= kPipelineStages)
      throw TppError(Errc::UnknownMnemonic, mnemonic);
    a.ns = Namespace::FlowEntry;
    a.index = i;
    resolve_field(flowentry_fields(), uint16_t(addr::kFlowEntryBase + i * addr::kFlowEntryStride));
  } else if (iequals(ns, "Link")) {
    a.ns = Namespace::CurrentLink;
    resolve_field(link_fields(), addr::kCurrentLinkBase);
  } else if (ns.size() > 5 && iequals(ns.substr(0, 4), "Link") && ns[4] == '$') {
    int i;
    if (!parse_index(ns, 5, i) || i < 0 || i >= kMaxLinks)
      throw TppError(Errc::UnknownMnemonic, mnemonic);
    a.ns = Namespace::Link;
    a.index = i;
    resolve_field(link_fields(), uint16_t(addr::kLinkBase + i * addr::kLinkStride));
  } else if (iequals(ns, "Queue")) {
    a.ns = Namespace::CurrentQueue;
    resolve_field(queue_fields(), addr::kCurrentQueueBase);
  } else if (ns.size() > 6 && iequals(ns.substr(0, 5), "Queue") && ns[5] == '$') {
    auto second = ns.find('$', 6);
    if (second == std::string::npos) throw TppError(Errc::UnknownMnemonic, mnemonic);
    int i, j;
    if (!parse_index(ns.substr(0, second), 6, i) || !parse_index(ns, second + 1, j) ||
        i < 0 || i >= kMaxLinks || j < 0 || j >= kMaxQueuesPerLink)
      throw TppError(Errc::UnknownMnemonic, mnemonic);
    a.ns = Namespace::Queue;
    a.index = i;
    a.index2 = j;
    resolve_field(queue_fields(),
                  uint16_t(addr::kQueueBase + (i * kMaxQueuesPerLink + j) * addr::kQueueStride));
  } else if (iequals(ns, "PacketMetadata")) {
    a.ns = Namespace::PacketMetadata;
    resolve_field(meta_fields(), addr::kMetaBase);
  } else {
    throw TppError(Errc::UnknownMnemonic, mnemonic);
  }
  return a;
}

Address classify_address(uint16_t raw) {
  Address a;
  a.raw = raw;
  auto in_block = [&](uint16_t base, uint16_t span) { return raw >= base && raw < base + span; };

  if (raw < 0x1000) {
    if (field_name(switch_fields(), raw)) {
      a.ns = Namespace::Switch;
      a.offset = raw;
    }
    return a;
  }
  if (in_block(addr::kStageBase, kPipelineStages * addr::kStageStride)) {
    uint16_t rel = raw - addr::kStageBase;
    a.index = rel / addr::kStageStride;
    a.offset = rel % addr::kStageStride;
    if (field_name(stage_fields(), a.offset)) a.ns = Namespace::Stage;
    return a;
  }
  if (in_block(addr::kFlowEntryBase, kPipelineStages * addr::kFlowEntryStride)) {
    uint16_t rel = raw - addr::kFlowEntryBase;
    a.index = rel / addr::kFlowEntryStride;
    a.offset = rel % addr::kFlowEntryStride;
    if (field_name(flowentry_fields(), a.offset)) a.ns = Namespace::FlowEntry;
    return a;
  }
  if (in_block(addr::kLinkBase, kMaxLinks * addr::kLinkStride)) {
    uint16_t rel = raw - addr::kLinkBase;
    a.index = rel / addr::kLinkStride;
    a.offset = rel % addr::kLinkStride;
    if (field_name(link_fields(), a.offset)) a.ns = Namespace::Link;
    return a;
  }
  if (in_block(addr::kCurrentLinkBase, addr::kLinkWords)) {
    a.offset = raw - addr::kCurrentLinkBase;
    if (field_name(link_fields(), a.offset)) a.ns = Namespace::CurrentLink;
    return a;
  }
  if (in_block(addr::kCurrentQueueBase, addr::kQueueWords)) {
    a.offset = raw - addr::kCurrentQueueBase;
    if (field_name(queue_fields(), a.offset)) a.ns = Namespace::CurrentQueue;
    return a;
  }
  if (in_block(addr::kQueueBase, kMaxLinks * kMaxQueuesPerLink * addr::kQueueStride)) {
    uint16_t rel = raw - addr::kQueueBase;
    int block = rel / addr::kQueueStride;
    a.index = block / kMaxQueuesPerLink;
    a.index2 = block % kMaxQueuesPerLink;
    a.offset = rel % addr::kQueueStride;
    if (field_name(queue_fields(), a.offset)) a.ns = Namespace::Queue;
    return a;
  }
  if (in_block(addr::kMetaBase, uint16_t(meta_fields().size()))) {
    a.offset = raw - addr::kMetaBase;
    a.ns = Namespace::PacketMetadata;
    return a;
  }
  return a;
}

std::optional<std::string> mnemonic_for(uint16_t raw) {
  Address a = classify_address(raw);
  switch (a.ns) {
    case Namespace::Switch:
      return "Switch:" + std::string(field_name(switch_fields(), a.offset));
    case Namespace::Stage:
      return "Stage" + std::to_string(a.index) + ":" + field_name(stage_fields(), a.offset);
    case Namespace::FlowEntry:
      return "FlowEntry" + std::to_string(a.index) + ":" + field_name(flowentry_fields(), a.offset);
    case Namespace::Link:
      return "Link$" + std::to_string(a.index) + ":" + field_name(link_fields(), a.offset);
    case Namespace::CurrentLink:
      return "Link:" + std::string(field_name(link_fields(), a.offset));
    case Namespace::CurrentQueue:
      return "Queue:" + std::string(field_name(queue_fields(), a.offset));
    case Namespace::Queue:
      return "Queue$" + std::to_string(a.index) + "$" + std::to_string(a.index2) + ":" +
             field_name(queue_fields(), a.offset);
    case Namespace::PacketMetadata:
      return "PacketMetadata:" + std::string(field_name(meta_fields(), a.offset));
    case Namespace::Nonexistent:
      return std::nullopt;
  }
  return std::nullopt;
}

int stage_of(uint16_t raw) {
  Address a = classify_address(raw);
  switch (a.ns) {
    case Namespace::Switch: return 0;
    case Namespace::Stage: return a.index;
    case Namespace::FlowEntry: return a.index;
    case Namespace::Link:
    case Namespace::CurrentLink:
    case Namespace::CurrentQueue:
    case Namespace::Queue: return kEgressStage;
    case Namespace::PacketMetadata:
      switch (raw) {
        case addr::kMetaInputPort: return 0;
        case addr::kMetaHopIndex: return 0;
        case addr::kMetaMatchedEntryId: return 1;
        case addr::kMetaOutputPortBitmap: return kIngressStages - 1;
        case addr::kMetaOutputPort: return kIngressStages - 1;
        case addr::kMetaEnqueuedQueueId: return kEgressStage;
      }
      return 0;
    case Namespace::Nonexistent: return -1;
  }
  return -1;
}

bool is_writable(uint16_t raw) {
  Address a = classify_address(raw);
  switch (a.ns) {
    case Namespace::Stage:
      return a.offset >= addr::kStageRegBase && a.offset < addr::kStageRegBase + 8;
    case Namespace::Link:
    case Namespace::CurrentLink:
      return a.offset == addr::kLinkAppSpecific0 || a.offset == addr::kLinkAppSpecific1;
    case Namespace::PacketMetadata:
      return raw == addr::kMetaOutputPortBitmap;
    default:
      return false;
  }
}

std::vector<std::pair<std::string, uint16_t>> all_mnemonics() {
  std::vector<std::pair<std::string, uint16_t>> out;
  auto add_block = [&](const std::string& ns, const std::vector<Field>& fields, uint16_t base) {
    for (const auto& f : fields) out.emplace_back(ns + ":" + f.name, uint16_t(base + f.offset));
  };
  add_block("Switch", switch_fields(), 0x0000);
  for (int i = 0; i < kPipelineStages; ++i)
    add_block("Stage" + std::to_string(i), stage_fields(),
              uint16_t(addr::kStageBase + i * addr::kStageStride));
  for (int i = 0; i < kPipelineStages; ++i)
    add_block("FlowEntry" + std::to_string(i), flowentry_fields(),
              uint16_t(addr::kFlowEntryBase + i * addr::kFlowEntryStride));
  for (int i = 0; i < kMaxLinks; ++i)
    add_block("Link$" + std::to_string(i), link_fields(),
              uint16_t(addr::kLinkBase + i * addr::kLinkStride));
  add_block("Link", link_fields(), addr::kCurrentLinkBase);
  add_block("Queue", queue_fields(), addr::kCurrentQueueBase);
  for (int i = 0; i < kMaxLinks; ++i)
    for (int j = 0; j < kMaxQueuesPerLink; ++j)
      add_block("Queue$" + std::to_string(i) + "$" + std::to_string(j), queue_fields(),
                uint16_t(addr::kQueueBase + (i * kMaxQueuesPerLink + j) * addr::kQueueStride));
  add_block("PacketMetadata", meta_fields(), addr::kMetaBase);
  std::sort(out.begin(), out.end(),
            [](const auto& x, const auto& y) { return x.second < y.second; });
  return out;
}

std::string memory_map_markdown() {
  std::ostringstream os;
  os << "# TPP unified memory map\n\n";
  os << "All locations are 16-bit words addressed by a 16-bit virtual address.\n";
  os << "Wider counters are exposed as consecutive low/high word pairs\n";
  os << "(`Foo` is the low word, `FooHi` the high word).\n\n";

  auto dump = [&](const char* title, const char* base_note, const std::vector<Field>& fields,
                  auto writable_at) {
    os << "## " << title << "\n\n" << base_note << "\n\n";
    os << "| Offset | Name | Access |\n|---|---|---|\n";
    for (const auto& f : fields) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "+0x%02x", f.offset);
      os << "| `" << buf << "` | `" << f.name << "` | " << (writable_at(f.offset) ? "rw" : "ro")
         << " |\n";
    }
    os << "\n";
  };

  dump("[Switch:] — per-ASIC globals", "Base address `0x0000`. Pipeline stage 0.",
       switch_fields(), [](uint16_t) { return false; });
  dump("[Stage$i:] — per match-action stage (i = 0..4)",
       "Base address `0x1000 + i*0x100`. Stages 0-3 are ingress, stage 4 egress. "
       "Pipeline stage i.",
       stage_fields(), [](uint16_t o) { return o >= addr::kStageRegBase && o < addr::kStageRegBase + 8; });
  dump("[FlowEntry$i:] — the entry the packet matched at stage i (i = 0..4)",
       "Base address `0x2000 + i*0x100`. Nonexistent when the packet matched no entry at "
       "stage i. Pipeline stage i.",
       flowentry_fields(), [](uint16_t) { return false; });
  dump("[Link$i:] — per-port statistics (i = 0..31)",
       "Base address `0x8000 + i*0x40`. `[Link:]` (no index, base `0xa000`) is the same "
       "block for the packet's output port. Pipeline stage 4 (egress). `QueueSize` is the "
       "byte occupancy of the port, saturating at 65535. Utilization words scale link load "
       "to 0..65535 over the last update window.",
       link_fields(),
       [](uint16_t o) { return o == addr::kLinkAppSpecific0 || o == addr::kLinkAppSpecific1; });
  dump("[Queue$i$j:] — queue j on link i (i = 0..31, j = 0..7)",
       "Base address `0xc000 + (i*8+j)*0x10`. `[Queue:]` (no index, base `0xb000`) is the "
       "block for the queue the packet was enqueued to; `[Queue:QueueOccupancy]` is "
       "`0xb000`. Occupancy saturates at 65535 bytes. Pipeline stage 4 (egress).",
       queue_fields(), [](uint16_t) { return false; });
  dump("[PacketMetadata:] — per-packet scratch",
       "Base address `0xe000`. `InputPort`/`HopIndex` stage 0, `MatchedEntryID` stage 1, "
       "`OutputPortBitmap`/`OutputPort` stage 3, `EnqueuedQueueID` stage 4. `HopIndex` "
       "mirrors the TPP header's hop index. Writing `OutputPortBitmap` supersedes the "
       "forwarding decision.",
       meta_fields(), [](uint16_t o) { return addr::kMetaBase + o == addr::kMetaOutputPortBitmap; });

  os << "`Switch:ID` is accepted as an alias for `Switch:SwitchID`.\n";
  return os.str();
}

}  // namespace tpp
