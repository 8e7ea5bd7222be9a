#include "tpp/apps/rcp.hpp"

#include <algorithm>
#include <cmath>

#include "tpp/memmap.hpp"

namespace tpp {

double rcp_compute_rate(double rate_bps, double y_bps, double q_bits, double capacity_bps,
                        double d_s, const RcpParams& params) {
  double feedback = (params.a * (y_bps - capacity_bps) + params.b * q_bits / d_s) / capacity_bps;
  double next = rate_bps * (1.0 - (params.period_s / d_s) * feedback);
  double floor = 0.01 * capacity_bps;
  return std::clamp(next, floor, capacity_bps);
}

double alpha_fair_aggregate(std::span<const double> rates, double alpha) {
  if (rates.empty()) return 0.0;
  if (std::isinf(alpha)) return *std::min_element(rates.begin(), rates.end());
  double sum = 0.0;
  for (double r : rates) sum += std::pow(r, -alpha);
  return std::pow(sum, -1.0 / alpha);
}

namespace {

constexpr int kProbeOut = 7001;
constexpr int kProbeBack = 7002;
constexpr int kUpdate = 7003;
constexpr std::size_t kCollectWords = 5;

struct RcpNetState {
  std::map<std::pair<int, uint32_t>, RcpFlow*> flows;
  std::vector<bool> wired;
};

RcpNetState& rcp_state(Network& net) {
  auto& slot = net.app_state["rcp"];
  if (!slot) {
    auto st = std::make_shared<RcpNetState>();
    st->wired.resize(net.topo().nodes.size(), false);
    slot = st;
  }
  return *std::static_pointer_cast<RcpNetState>(slot);
}

void wire_host(Network& net, int node);

}  // namespace

TppProgram rcp_collect_program(uint8_t max_hops) {
  TppProgram p;
  p.instructions.push_back(make_push(addr::kSwitchId));
  p.instructions.push_back(make_push(addr::kCurrentLinkBase + addr::kLinkQueueSize));
  p.instructions.push_back(make_push(addr::kCurrentLinkBase + addr::kLinkTxUtilization));
  p.instructions.push_back(make_push(addr::kCurrentLinkBase + addr::kLinkAppSpecific0));
  p.instructions.push_back(make_push(addr::kCurrentLinkBase + addr::kLinkAppSpecific1));
  p.header.hop_size_words = kCollectWords;
  p.header.insn_count = uint8_t(p.instructions.size());
  p.header.mem_len = uint16_t(max_hops * kCollectWords * 2);
  p.memory.assign(p.header.mem_len, 0xff);
  return p;
}

std::vector<RcpHopSample> rcp_parse_collect(const TppProgram& p) {
  std::vector<RcpHopSample> out;
  const std::size_t hop_bytes = kCollectWords * 2;
  for (std::size_t h = 0; (h + 1) * hop_bytes <= p.memory.size(); ++h) {
    std::size_t base = h * hop_bytes;
    if (p.mem_word(base) == 0xffff) continue;
    RcpHopSample s;
    s.switch_id = p.mem_word(base);
    s.queue_bytes = p.mem_word(base + 2);
    s.tx_util = p.mem_word(base + 4);
    s.version = p.mem_word(base + 6);
    s.rate_wire = p.mem_word(base + 8);
    out.push_back(s);
  }
  return out;
}

TppProgram rcp_update_program(std::span<const RcpHopUpdate> updates) {
  TppProgram p;
  p.instructions.push_back(make_cstore(addr::kCurrentLinkBase + addr::kLinkAppSpecific0, 0, 1));
  p.instructions.push_back(make_store(addr::kCurrentLinkBase + addr::kLinkAppSpecific1, 2));
  p.header.hop_size_words = 3;
  p.header.insn_count = uint8_t(p.instructions.size());
  p.memory.assign(updates.size() * 6, 0);
  p.header.mem_len = uint16_t(p.memory.size());
  for (std::size_t h = 0; h < updates.size(); ++h) {
    p.set_mem_word(h * 6 + 0, updates[h].expected_version);
    p.set_mem_word(h * 6 + 2, updates[h].new_version);
    p.set_mem_word(h * 6 + 4, updates[h].new_rate_wire);
  }
  return p;
}

void rcp_init_links(Network& net) {
  for (int u = 0; u < int(net.topo().nodes.size()); ++u) {
    if (!net.is_switch(u)) continue;
    for (auto& l : net.state(u).links) {
      l.app_specific0 = 0;
      l.app_specific1 = 0xffff;  // fair share starts at full capacity
    }
  }
}

namespace {

void wire_host(Network& net, int node) {
  auto& st = rcp_state(net);
  if (st.wired[node]) return;
  st.wired[node] = true;
  net.set_receiver(node, [&net, node](PacketPtr pkt) {
    auto& s = rcp_state(net);
    if (pkt->tag == kProbeOut) {
      auto back = net.make_packet();
      back->src = node;
      back->dst = pkt->src;
      back->flow_id = pkt->flow_id;
      back->tag = kProbeBack;
      back->tpp = pkt->tpp;
      back->size_bytes = pkt->size_bytes;
      back->sent_ns = pkt->sent_ns;
      net.send(node, std::move(back));
      return;
    }
    if (pkt->tag == kProbeBack && pkt->tpp) {
      auto it = s.flows.find({node, pkt->flow_id});
      if (it != s.flows.end()) it->second->probe_returned(*pkt->tpp);
    }
    // Data and update packets terminate here.
  });
}

}  // namespace

RcpFlow::RcpFlow(Network& net, int src, int dst, uint32_t flow_id, RcpParams params,
                 std::function<double(uint16_t)> capacity_of_hop)
    : net_(net),
      src_(src),
      dst_(dst),
      flow_id_(flow_id),
      params_(std::move(params)),
      capacity_of_(std::move(capacity_of_hop)) {
  rcp_state(net_).flows[{src_, flow_id_}] = this;
  wire_host(net_, src_);
  wire_host(net_, dst_);
}

void RcpFlow::start(uint64_t at_ns) {
  net_.at(at_ns, [this] {
    running_ = true;
    rate_bps_ = initial_rate_bps;
    history_.emplace_back(net_.now(), rate_bps_);
    send_probe();
    send_data();
  });
}

void RcpFlow::send_probe() {
  if (!running_) return;
  auto pkt = net_.make_packet();
  pkt->src = src_;
  pkt->dst = dst_;
  pkt->flow_id = flow_id_;
  pkt->tag = kProbeOut;
  pkt->tpp = rcp_collect_program(8);
  pkt->size_bytes = kHeaderBytes + 42 + uint32_t(pkt->tpp->wire_size());
  probe_sent_ns_ = net_.now();
  net_.send(src_, std::move(pkt));
  net_.after(uint64_t(params_.period_s * 1e9), [this] { send_probe(); });
}

void RcpFlow::probe_returned(const TppProgram& tpp) {
  uint64_t rtt_ns = net_.now() - probe_sent_ns_;
  on_probe_return(tpp, rtt_ns);
}

void RcpFlow::on_probe_return(const TppProgram& tpp, uint64_t rtt_ns) {
  auto samples = rcp_parse_collect(tpp);
  // The probe kept collecting on the way back; the forward path is the
  // first half of the regions.
  std::size_t fwd = samples.size() / 2;
  if (fwd == 0) return;
  path_hops_ = uint8_t(fwd);

  double d = std::max(double(rtt_ns) * 1e-9, params_.period_s);
  std::vector<RcpHopUpdate> updates;
  std::vector<double> link_rates;
  for (std::size_t i = 0; i < fwd; ++i) {
    const RcpHopSample& s = samples[i];
    double cap = capacity_of_(s.switch_id);
    if (cap <= 0) {
      updates.push_back({s.version, s.version, s.rate_wire});  // leave untouched
      continue;
    }
    double y = double(s.tx_util) / 65535.0 * cap;
    double old_rate = double(s.rate_wire) / 65535.0 * cap;
    double next = rcp_compute_rate(old_rate, y, double(s.queue_bytes) * 8.0, cap, d, params_);
    Word wire = Word(std::lround(next / cap * 65535.0));
    updates.push_back({s.version, Word(s.version + 1), wire});
    link_rates.push_back(next);
  }
  if (!link_rates.empty()) {
    rate_bps_ = alpha_fair_aggregate(link_rates, params_.alpha);
    history_.emplace_back(net_.now(), rate_bps_);
  }

  auto pkt = net_.make_packet();
  pkt->src = src_;
  pkt->dst = dst_;
  pkt->flow_id = flow_id_;
  pkt->tag = kUpdate;
  pkt->tpp = rcp_update_program(updates);
  pkt->size_bytes = kHeaderBytes + 42 + uint32_t(pkt->tpp->wire_size());
  net_.send(src_, std::move(pkt));
}

void RcpFlow::send_data() {
  if (!running_) return;
  if (rate_bps_ <= 0) {
    // No feedback yet; poll again shortly.
    net_.after(uint64_t(params_.period_s * 1e9 / 4), [this] { send_data(); });
    return;
  }
  auto pkt = net_.make_packet();
  pkt->src = src_;
  pkt->dst = dst_;
  pkt->flow_id = flow_id_;
  pkt->size_bytes = data_bytes;
  net_.send(src_, std::move(pkt));
  uint64_t gap_ns = uint64_t(double(data_bytes) * 8.0 * 1e9 / rate_bps_);
  net_.after(std::max<uint64_t>(gap_ns, 1000), [this] { send_data(); });
}

}  // namespace tpp
