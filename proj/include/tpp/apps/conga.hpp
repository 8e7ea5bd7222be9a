#ifndef TPP_APPS_CONGA_HPP
#define TPP_APPS_CONGA_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "tpp/sim.hpp"

namespace tpp {

struct CongaParams {
  uint64_t probe_period_ns = 5'000'000;
  uint64_t flowlet_gap_ns = 1'200'000;  // new flowlet after 2x RTT of silence
  bool metric_max = true;               // max over hops; false = sum
  // A flowlet moves only when another path is at least this much better,
  // so two paths balanced by the sender's own load don't flip-flop.
  double switch_threshold = 0.9;
};

// PUSH [Link:ID]; PUSH [Link:TX-Utilization]; PUSH [Link:TX-Bytes] per hop.
TppProgram conga_probe_program(uint8_t max_hops);

struct CongaHopSample {
  Word link_id = 0;
  Word tx_util = 0;
  Word tx_bytes = 0;
};
std::vector<CongaHopSample> conga_parse_probe(const TppProgram& completed);

// Path congestion from the forward switch-to-switch hops (the final hop is
// the egress to the host and is common to all paths).
double conga_metric(std::span<const CongaHopSample> forward_hops, bool metric_max);

// Least congested path; ties go to the lowest index.
int conga_select(std::span<const double> path_metrics);

// A sender that spreads flowlets over `num_paths` equal-cost paths picked by
// probing, or sticks to `fixed_vlan` when not adaptive.
class CongaFlow {
 public:
  CongaFlow(Network& net, int src, int dst, uint32_t flow_id, int num_paths, CongaParams params);

  void start(uint64_t at_ns);
  void stop() { running_ = false; }

  bool adaptive = true;
  uint16_t fixed_vlan = 0;
  double rate_bps = 100e6;
  uint32_t data_bytes = 1000;
  // Optional periodic pause, long enough to open a flowlet boundary.
  uint64_t pause_every_ns = 0;
  uint64_t pause_ns = 0;
  // Adaptive senders wait for the first probes before committing to a path.
  uint64_t data_delay_ns = 10'000'000;

  uint64_t probe_bytes_sent = 0;
  uint64_t data_bytes_sent = 0;
  uint16_t current_vlan() const { return vlan_; }
  const std::vector<double>& path_metrics() const { return metrics_; }

  void probe_returned(uint16_t path, const TppProgram& tpp);  // receive hook

 private:
  void send_probes();
  void send_data();

  Network& net_;
  int src_, dst_;
  uint32_t flow_id_;
  int num_paths_;
  CongaParams params_;
  std::vector<double> metrics_;
  uint16_t vlan_ = 0;
  uint64_t last_data_ns_ = 0;
  bool running_ = false;
  uint64_t sent_since_pause_ = 0;
};

}  // namespace tpp

#endif
