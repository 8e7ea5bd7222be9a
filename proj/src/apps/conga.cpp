#include "tpp/apps/conga.hpp"

#include <algorithm>

#include "tpp/memmap.hpp"

namespace tpp {

namespace {

constexpr int kProbeOut = 8001;
constexpr int kProbeBack = 8002;

struct CongaNetState {
  std::map<std::pair<int, uint32_t>, CongaFlow*> flows;
  std::vector<bool> wired;
};

CongaNetState& conga_state(Network& net) {
  auto& slot = net.app_state["conga"];
  if (!slot) {
    auto st = std::make_shared<CongaNetState>();
    st->wired.resize(net.topo().nodes.size(), false);
    slot = st;
  }
  return *std::static_pointer_cast<CongaNetState>(slot);
}

void wire_host(Network& net, int node) {
  auto& st = conga_state(net);
  if (st.wired[node]) return;
  st.wired[node] = true;
  net.set_receiver(node, [&net, node](PacketPtr pkt) {
    auto& s = conga_state(net);
    if (pkt->tag == kProbeOut) {
      auto back = net.make_packet();
      back->src = node;
      back->dst = pkt->src;
      back->flow_id = pkt->flow_id;
      back->vlan = pkt->vlan;
      back->tag = kProbeBack;
      back->tpp = pkt->tpp;
      back->size_bytes = pkt->size_bytes;
      net.send(node, std::move(back));
      return;
    }
    if (pkt->tag == kProbeBack && pkt->tpp) {
      auto it = s.flows.find({node, pkt->flow_id});
      if (it != s.flows.end()) it->second->probe_returned(pkt->vlan, *pkt->tpp);
    }
  });
}

}  // namespace

TppProgram conga_probe_program(uint8_t max_hops) {
  TppProgram p;
  p.instructions.push_back(make_push(addr::kCurrentLinkBase + addr::kLinkId));
  p.instructions.push_back(make_push(addr::kCurrentLinkBase + addr::kLinkTxUtilization));
  p.instructions.push_back(make_push(addr::kCurrentLinkBase + addr::kLinkTxBytesLo));
  p.header.hop_size_words = 3;
  p.header.insn_count = uint8_t(p.instructions.size());
  p.header.mem_len = uint16_t(max_hops) * 6;
  p.memory.assign(p.header.mem_len, 0xff);
  return p;
}

std::vector<CongaHopSample> conga_parse_probe(const TppProgram& p) {
  std::vector<CongaHopSample> out;
  for (std::size_t h = 0; (h + 1) * 6 <= p.memory.size(); ++h) {
    std::size_t base = h * 6;
    // An unexecuted hop leaves the whole region at the fill pattern.
    if (p.mem_word(base) == 0xffff && p.mem_word(base + 2) == 0xffff &&
        p.mem_word(base + 4) == 0xffff)
      continue;
    out.push_back({p.mem_word(base), p.mem_word(base + 2), p.mem_word(base + 4)});
  }
  return out;
}

double conga_metric(std::span<const CongaHopSample> forward_hops, bool metric_max) {
  double m = 0;
  for (const auto& s : forward_hops)
    m = metric_max ? std::max(m, double(s.tx_util)) : m + double(s.tx_util);
  return m;
}

int conga_select(std::span<const double> path_metrics) {
  int best = 0;
  for (int i = 1; i < int(path_metrics.size()); ++i)
    if (path_metrics[i] < path_metrics[best]) best = i;
  return best;
}

CongaFlow::CongaFlow(Network& net, int src, int dst, uint32_t flow_id, int num_paths,
                     CongaParams params)
    : net_(net), src_(src), dst_(dst), flow_id_(flow_id), num_paths_(num_paths),
      params_(params), metrics_(num_paths, 0.0) {
  conga_state(net_).flows[{src_, flow_id_}] = this;
  wire_host(net_, src_);
  wire_host(net_, dst_);
}

void CongaFlow::start(uint64_t at_ns) {
  net_.at(at_ns, [this] {
    running_ = true;
    if (adaptive) {
      send_probes();
      net_.after(data_delay_ns, [this] { send_data(); });
    } else {
      send_data();
    }
  });
}

void CongaFlow::send_probes() {
  if (!running_) return;
  for (int k = 0; k < num_paths_; ++k) {
    auto pkt = net_.make_packet();
    pkt->src = src_;
    pkt->dst = dst_;
    pkt->flow_id = flow_id_;
    pkt->vlan = uint16_t(k);
    pkt->tag = kProbeOut;
    pkt->tpp = conga_probe_program(8);
    pkt->size_bytes = 42 + uint32_t(pkt->tpp->wire_size());
    probe_bytes_sent += 2ull * pkt->size_bytes;  // out and back
    net_.send(src_, std::move(pkt));
  }
  net_.after(params_.probe_period_ns, [this] { send_probes(); });
}

void CongaFlow::probe_returned(uint16_t path, const TppProgram& tpp) {
  auto samples = conga_parse_probe(tpp);
  std::size_t fwd = samples.size() / 2;
  if (fwd == 0 || path >= metrics_.size()) return;
  // Drop the final forward hop (egress to the destination host).
  std::span<const CongaHopSample> hops(samples.data(), fwd > 1 ? fwd - 1 : fwd);
  metrics_[path] = conga_metric(hops, params_.metric_max);
}

void CongaFlow::send_data() {
  if (!running_) return;

  uint64_t gap_ns = uint64_t(double(data_bytes) * 8.0 * 1e9 / rate_bps);
  if (adaptive && (last_data_ns_ == 0 || net_.now() - last_data_ns_ > params_.flowlet_gap_ns)) {
    int best = conga_select(metrics_);
    if (best != vlan_ && metrics_[best] < params_.switch_threshold * metrics_[vlan_])
      vlan_ = uint16_t(best);
  }
  if (!adaptive) vlan_ = fixed_vlan;

  auto pkt = net_.make_packet();
  pkt->src = src_;
  pkt->dst = dst_;
  pkt->flow_id = flow_id_;
  pkt->vlan = vlan_;
  pkt->size_bytes = data_bytes;
  data_bytes_sent += data_bytes;
  net_.send(src_, std::move(pkt));
  last_data_ns_ = net_.now();

  uint64_t next = std::max<uint64_t>(gap_ns, 1000);
  sent_since_pause_ += data_bytes;
  if (pause_every_ns > 0 && sent_since_pause_ >= uint64_t(rate_bps / 8.0 * pause_every_ns * 1e-9)) {
    next += pause_ns;
    sent_since_pause_ = 0;
  }
  net_.after(next, [this] { send_data(); });
}

}  // namespace tpp
