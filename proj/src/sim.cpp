#include "tpp/sim.hpp"

#include <cassert>
#include <fstream>

namespace tpp {

Network::Network(Topology topo, uint64_t seed) : topo_(std::move(topo)), rng_(seed) {
  const int n = int(topo_.nodes.size());
  switch_state_.resize(n);
  out_.resize(n);
  receiver_.resize(n);
  entry_for_dst_.resize(n);
  shadow.clock = [this] { return now_ns_; };

  for (int u = 0; u < n; ++u) {
    out_[u].resize(topo_.ports[u].size());
    if (!topo_.nodes[u].is_switch) continue;
    auto st = std::make_unique<SwitchState>();
    st->switch_id = uint16_t(u);
    for (int p = 0; p < int(topo_.ports[u].size()); ++p)
      st->add_link(uint16_t(p), topo_.links[topo_.ports[u][p].link].rate_bps);
    switch_state_[u] = std::move(st);
  }
}

void Network::at(uint64_t t, std::function<void()> fn) {
  assert(t >= now_ns_);
  events_.push({t, next_seq_++, std::move(fn)});
}

void Network::run_until(uint64_t t) {
  while (!events_.empty() && events_.top().t <= t) {
    Event ev = events_.top();
    events_.pop();
    now_ns_ = ev.t;
    ev.fn();
  }
  now_ns_ = t;
}

void Network::run() {
  while (!events_.empty()) {
    Event ev = events_.top();
    events_.pop();
    now_ns_ = ev.t;
    ev.fn();
  }
}

void Network::enable_utilization_updates(uint64_t window_ns) {
  after(window_ns, [this, window_ns] {
    for (int u = 0; u < int(topo_.nodes.size()); ++u) {
      if (!switch_state_[u]) continue;
      SwitchState& sw = *switch_state_[u];
      for (int p = 0; p < int(sw.links.size()); ++p) {
        update_link_utilization(sw.links[p], window_ns);
        utilization_log.push_back({now_ns_, sw.switch_id, p, sw.links[p].tx_utilization,
                                   sw.links[p].rx_utilization, out_[u][p].bytes});
      }
    }
    enable_utilization_updates(window_ns);
  });
}

void Network::send(int from_node, PacketPtr pkt) {
  pkt->sent_ns = now_ns_;
  auto it = topo_.routes[from_node].find(pkt->dst);
  if (it == topo_.routes[from_node].end() || it->second.empty()) {
    ++drops;
    return;
  }
  int port = it->second[pkt->vlan % it->second.size()];
  enqueue(from_node, port, std::move(pkt));
}

void Network::count_drop(int node, int port, const PacketPtr& pkt) {
  ++drops;
  if (switch_state_[node]) {
    LinkState& l = switch_state_[node]->links[port];
    l.drop_bytes += pkt->size_bytes;
    l.drop_packets += 1;
    QueueState& q = switch_state_[node]->queues[port][0];
    q.drop_bytes += pkt->size_bytes;
    q.drop_packets += 1;
  }
}

void Network::enqueue(int node, int port, PacketPtr pkt) {
  OutQueue& oq = out_[node][port];
  uint64_t limit = topo_.links[topo_.ports[node][port].link].queue_bytes;
  if (oq.bytes + pkt->size_bytes > limit) {
    count_drop(node, port, pkt);
    return;
  }
  oq.bytes += pkt->size_bytes;
  oq.q.push_back(std::move(pkt));
  if (switch_state_[node])
    switch_state_[node]->queues[port][0].occupancy_bytes = oq.bytes;
  if (!oq.busy) start_tx(node, port);
}

void Network::start_tx(int node, int port) {
  OutQueue& oq = out_[node][port];
  if (oq.q.empty()) {
    oq.busy = false;
    return;
  }
  oq.busy = true;
  PacketPtr pkt = oq.q.front();
  const LinkSpec& spec = topo_.links[topo_.ports[node][port].link];
  uint64_t ser_ns = (uint64_t(pkt->size_bytes) * 8ull * 1'000'000'000ull + spec.rate_bps - 1) /
                    spec.rate_bps;
  after(ser_ns, [this, node, port] {
    OutQueue& oq2 = out_[node][port];
    PacketPtr p = oq2.q.front();
    oq2.q.pop_front();
    oq2.bytes -= p->size_bytes;
    if (switch_state_[node]) {
      SwitchState& sw = *switch_state_[node];
      sw.queues[port][0].occupancy_bytes = oq2.bytes;
      sw.queues[port][0].tx_bytes += p->size_bytes;
      sw.queues[port][0].tx_packets += 1;
      LinkState& l = sw.links[port];
      l.tx_bytes += p->size_bytes;
      l.tx_packets += 1;
      l.window_tx_bytes += p->size_bytes;
    }
    const Port& out_port = topo_.ports[node][port];
    const LinkSpec& sp = topo_.links[out_port.link];
    if (sp.loss > 0.0 && std::uniform_real_distribution<>(0.0, 1.0)(rng_) < sp.loss) {
      ++drops;
    } else {
      after(sp.delay_ns,
            [this, to = out_port.peer_node, tp = out_port.peer_port, p] { arrive(to, tp, p); });
    }
    start_tx(node, port);
  });
}

void Network::arrive(int node, int in_port, PacketPtr pkt) {
  if (switch_state_[node]) {
    LinkState& l = switch_state_[node]->links[in_port];
    l.rx_bytes += pkt->size_bytes;
    l.rx_packets += 1;
    l.window_rx_bytes += pkt->size_bytes;
  }

  if (!topo_.nodes[node].is_switch || pkt->dst == node) {
    // Hosts and switch control agents terminate the packet.  A TPP addressed
    // to a switch still executes there before delivery.
    if (topo_.nodes[node].is_switch) forward_and_execute(node, in_port, pkt);
    if (pkt->dst == node)
      deliveries.push_back({now_ns_, pkt->uid, pkt->src, node, pkt->flow_id, pkt->size_bytes});
    if (receiver_[node]) {
      receiver_[node](std::move(pkt));
    } else if (topo_.nodes[node].is_switch && pkt->dst == node && pkt->tpp) {
      // Control agent: bounce the executed program back to the requester.
      auto echo = make_packet();
      echo->src = node;
      echo->dst = pkt->src;
      echo->flow_id = pkt->flow_id;
      echo->tag = pkt->tag;
      echo->tpp = pkt->tpp;
      echo->size_bytes = pkt->size_bytes;
      send(node, std::move(echo));
    }
    return;
  }
  forward_and_execute(node, in_port, pkt);
}

void Network::forward_and_execute(int node, int in_port, PacketPtr pkt) {
  SwitchState& sw = *switch_state_[node];
  sw.clock_ns = now_ns_;

  // Forwarding decision first; the TPP observes (and may override) it.
  PacketMetadata meta;
  meta.input_port = Word(in_port);
  int out_port = -1;
  auto rit = topo_.routes[node].find(pkt->dst);
  bool local = (pkt->dst == node);
  if (!local) {
    if (rit != topo_.routes[node].end() && !rit->second.empty()) {
      const auto& choices = rit->second;
      out_port = choices[pkt->vlan % choices.size()];
      meta.output_port_bitmap = Word(1u << out_port);
      meta.enqueued_queue_id = 0;
      meta.queue_known = true;
    }
    // Stage-0 entry per destination, so [FlowEntry0:] and MatchedEntryID
    // resolve for routed packets.
    auto [eit, fresh] = entry_for_dst_[node].try_emplace(pkt->dst, int(sw.entries[0].size()));
    if (fresh) {
      FlowEntryState e;
      e.id = uint16_t(pkt->dst);
      e.insert_clock = now_ns_;
      sw.entries[0].push_back(e);
    }
    meta.matched = true;
    meta.matched_entry_id = uint16_t(pkt->dst);
    meta.matched_entry_index[0] = eit->second;
    FlowEntryState& fe = sw.entries[0][eit->second];
    fe.match_packets += 1;
    fe.match_bytes += pkt->size_bytes;
  }
  for (auto& st : sw.stages) {
    st.lookup_packets += 1;
    st.lookup_bytes += pkt->size_bytes;
    if (meta.matched) {
      st.match_packets += 1;
      st.match_bytes += pkt->size_bytes;
    }
  }

  if (pkt->tpp && topo_.nodes[node].tpp_enabled) {
    ExecContext ctx{sw, meta, topo_.nodes[node].tpp_writes, &shadow, &pkt->tpp->header};
    ExecutionTrace tr = execute_tpp(ctx, *pkt->tpp);
    if (pkt->collect_traces) pkt->traces.push_back(tr);
    if (record_tpp_log) tpp_log.push_back(std::move(tr));
    pkt->tpp->header.hop_index += 1;
  }
  if (local) return;

  // A TPP write to the output bitmap supersedes the forwarding decision.
  auto chosen = meta.output_port();
  if (!chosen || *chosen >= int(topo_.ports[node].size())) {
    ++drops;
    return;
  }
  out_port = *chosen;

  if (pkt->tpp && sample_tpp_queues)
    shadow.queue_samples.push_back({now_ns_, pkt->uid, sw.switch_id, out_port,
                                    out_[node][out_port].bytes, uint8_t(pkt->tpp->header.hop_index - 1)});
  enqueue(node, out_port, std::move(pkt));
}

namespace {
std::ofstream open_csv(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw TppError(Errc::ConfigError, "cannot write " + path);
  return f;
}
}  // namespace

void Network::write_deliveries_csv(const std::string& path) const {
  auto f = open_csv(path);
  f << "time_ns,uid,src,dst,flow,bytes\n";
  for (const auto& d : deliveries)
    f << d.t << ',' << d.uid << ',' << topo_.nodes[d.src].name << ',' << topo_.nodes[d.dst].name
      << ',' << d.flow_id << ',' << d.bytes << '\n';
}

void Network::write_utilization_csv(const std::string& path) const {
  auto f = open_csv(path);
  f << "time_ns,switch,port,tx_util,rx_util,queue_bytes\n";
  for (const auto& u : utilization_log)
    f << u.t << ',' << topo_.nodes[u.sw].name << ',' << u.port << ',' << u.tx_util << ','
      << u.rx_util << ',' << u.queue_bytes << '\n';
}

void Network::write_tpp_records_csv(const std::string& path) const {
  auto f = open_csv(path);
  f << "switch,hop,insn,stage,opcode,addr,read,write,disposition\n";
  for (const auto& tr : tpp_log)
    for (const auto& r : tr.records) {
      f << topo_.nodes[tr.switch_id].name << ',' << int(tr.hop_index) << ',' << r.insn_index
        << ',' << r.stage << ',' << opcode_name(r.op) << ',' << r.addr << ',';
      if (r.value_read) f << *r.value_read;
      f << ',';
      if (r.value_written) f << *r.value_written;
      f << ',' << skip_reason_name(r.skip) << '\n';
    }
}

}  // namespace tpp
