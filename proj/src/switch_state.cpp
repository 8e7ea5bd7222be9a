#include "tpp/switch_state.hpp"

#include <cmath>

namespace tpp {

namespace {

constexpr uint64_t kClockHz = 1'000'000'000;  // clock counts nanoseconds

Word lo(uint64_t v) { return Word(v & 0xffff); }
Word hi(uint64_t v) { return Word((v >> 16) & 0xffff); }

std::optional<Word> read_link(const LinkState& l, const std::vector<QueueState>& queues,
                              uint16_t offset) {
  switch (offset) {
    case addr::kLinkId: return l.id;
    case addr::kLinkTxBytesLo: return lo(l.tx_bytes);
    case addr::kLinkTxBytesHi: return hi(l.tx_bytes);
    case addr::kLinkRxBytesLo: return lo(l.rx_bytes);
    case addr::kLinkRxBytesHi: return hi(l.rx_bytes);
    case addr::kLinkTxPacketsLo: return lo(l.tx_packets);
    case addr::kLinkTxPacketsHi: return hi(l.tx_packets);
    case addr::kLinkRxPacketsLo: return lo(l.rx_packets);
    case addr::kLinkRxPacketsHi: return hi(l.rx_packets);
    case addr::kLinkDropBytesLo: return lo(l.drop_bytes);
    case addr::kLinkDropBytesHi: return hi(l.drop_bytes);
    case addr::kLinkDropPacketsLo: return lo(l.drop_packets);
    case addr::kLinkDropPacketsHi: return hi(l.drop_packets);
    case addr::kLinkQueueSize: {
      uint64_t total = 0;
      for (const auto& q : queues) total += q.occupancy_bytes;
      return saturate_word(total);
    }
    case addr::kLinkRxUtilization: return l.rx_utilization;
    case addr::kLinkTxUtilization: return l.tx_utilization;
    case addr::kLinkAppSpecific0: return l.app_specific0;
    case addr::kLinkAppSpecific1: return l.app_specific1;
    case addr::kLinkStatus: return l.status;
  }
  return std::nullopt;
}

std::optional<Word> read_queue(const QueueState& q, uint16_t offset) {
  switch (offset) {
    case addr::kQueueOccupancy: return saturate_word(q.occupancy_bytes);
    case addr::kQueueTxBytesLo: return lo(q.tx_bytes);
    case addr::kQueueTxBytesHi: return hi(q.tx_bytes);
    case addr::kQueueTxPacketsLo: return lo(q.tx_packets);
    case addr::kQueueTxPacketsHi: return hi(q.tx_packets);
    case addr::kQueueDropBytesLo: return lo(q.drop_bytes);
    case addr::kQueueDropBytesHi: return hi(q.drop_bytes);
    case addr::kQueueDropPacketsLo: return lo(q.drop_packets);
    case addr::kQueueDropPacketsHi: return hi(q.drop_packets);
  }
  return std::nullopt;
}

}  // namespace

std::optional<Word> read_word(ExecContext& ctx, uint16_t raw) {
  const Address a = classify_address(raw);
  SwitchState& sw = ctx.sw;

  switch (a.ns) {
    case Namespace::Switch:
      switch (a.offset) {
        case 0: return sw.switch_id;
        case 1: return sw.version_number;
        case 2: return lo(sw.clock_ns);
        case 3: return hi(sw.clock_ns);
        case 4: return lo(kClockHz);
        case 5: return hi(kClockHz);
      }
      return std::nullopt;

    case Namespace::Stage: {
      const StageState& st = sw.stages[a.index];
      if (a.offset >= addr::kStageRegBase && a.offset < addr::kStageRegBase + 8)
        return st.regs[a.offset - addr::kStageRegBase];
      switch (a.offset) {
        case 0: return st.version;
        case 1: return st.refcount;
        case 2: return lo(st.lookup_packets);
        case 3: return hi(st.lookup_packets);
        case 4: return lo(st.lookup_bytes);
        case 5: return hi(st.lookup_bytes);
        case 6: return lo(st.match_packets);
        case 7: return hi(st.match_packets);
        case 8: return lo(st.match_bytes);
        case 9: return hi(st.match_bytes);
      }
      return std::nullopt;
    }

    case Namespace::FlowEntry: {
      int idx = ctx.meta.matched_entry_index[a.index];
      if (idx < 0 || idx >= int(sw.entries[a.index].size())) return std::nullopt;
      const FlowEntryState& e = sw.entries[a.index][idx];
      switch (a.offset) {
        case 0: return lo(e.insert_clock);
        case 1: return hi(e.insert_clock);
        case 2: return lo(e.match_packets);
        case 3: return hi(e.match_packets);
        case 4: return lo(e.match_bytes);
        case 5: return hi(e.match_bytes);
        case 6: return e.version;
      }
      return std::nullopt;
    }

    case Namespace::Link:
      if (a.index >= int(sw.links.size())) return std::nullopt;
      return read_link(sw.links[a.index], sw.queues[a.index], a.offset);

    case Namespace::CurrentLink: {
      auto port = ctx.meta.output_port();
      if (!port || *port >= int(sw.links.size())) return std::nullopt;
      return read_link(sw.links[*port], sw.queues[*port], a.offset);
    }

    case Namespace::CurrentQueue: {
      auto port = ctx.meta.output_port();
      if (!ctx.meta.queue_known || !port || *port >= int(sw.links.size())) return std::nullopt;
      const auto& qs = sw.queues[*port];
      if (ctx.meta.enqueued_queue_id >= qs.size()) return std::nullopt;
      return read_queue(qs[ctx.meta.enqueued_queue_id], a.offset);
    }

    case Namespace::Queue:
      if (a.index >= int(sw.queues.size()) || a.index2 >= int(sw.queues[a.index].size()))
        return std::nullopt;
      return read_queue(sw.queues[a.index][a.index2], a.offset);

    case Namespace::PacketMetadata:
      switch (raw) {
        case addr::kMetaInputPort: return ctx.meta.input_port;
        case addr::kMetaOutputPortBitmap: return ctx.meta.output_port_bitmap;
        case addr::kMetaOutputPort: {
          auto port = ctx.meta.output_port();
          return port ? std::optional<Word>(Word(*port)) : std::nullopt;
        }
        case addr::kMetaMatchedEntryId:
          return ctx.meta.matched ? std::optional<Word>(ctx.meta.matched_entry_id) : std::nullopt;
        case addr::kMetaEnqueuedQueueId:
          return ctx.meta.queue_known ? std::optional<Word>(ctx.meta.enqueued_queue_id)
                                      : std::nullopt;
        case addr::kMetaHopIndex:
          return ctx.header ? std::optional<Word>(ctx.header->hop_index) : std::nullopt;
      }
      return std::nullopt;

    case Namespace::Nonexistent:
      return std::nullopt;
  }
  return std::nullopt;
}

bool write_word(ExecContext& ctx, uint16_t raw, Word value) {
  if (!is_writable(raw)) return false;
  const Address a = classify_address(raw);
  SwitchState& sw = ctx.sw;

  auto commit = [&](Word& slot) {
    Word old = slot;
    slot = value;
    if (ctx.observer) ctx.observer->on_tpp_write(sw.switch_id, raw, old, value);
    return true;
  };

  switch (a.ns) {
    case Namespace::Stage:
      return commit(sw.stages[a.index].regs[a.offset - addr::kStageRegBase]);

    case Namespace::Link: {
      if (a.index >= int(sw.links.size())) return false;
      LinkState& l = sw.links[a.index];
      return commit(a.offset == addr::kLinkAppSpecific0 ? l.app_specific0 : l.app_specific1);
    }

    case Namespace::CurrentLink: {
      auto port = ctx.meta.output_port();
      if (!port || *port >= int(sw.links.size())) return false;
      LinkState& l = sw.links[*port];
      return commit(a.offset == addr::kLinkAppSpecific0 ? l.app_specific0 : l.app_specific1);
    }

    case Namespace::PacketMetadata:
      return commit(ctx.meta.output_port_bitmap);

    default:
      return false;
  }
}

void update_link_utilization(LinkState& link, uint64_t window_ns) {
  if (link.capacity_bps == 0 || window_ns == 0) {
    link.window_tx_bytes = link.window_rx_bytes = 0;
    return;
  }
  auto scale = [&](uint64_t bytes) {
    double frac = double(bytes) * 8.0 * 1e9 / (double(link.capacity_bps) * double(window_ns));
    double v = std::round(65535.0 * frac);
    return v >= 65535.0 ? Word(65535) : Word(v);
  };
  link.tx_utilization = scale(link.window_tx_bytes);
  link.rx_utilization = scale(link.window_rx_bytes);
  link.window_tx_bytes = link.window_rx_bytes = 0;
}

}  // namespace tpp
