#ifndef TPP_APPS_RCP_HPP
#define TPP_APPS_RCP_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "tpp/sim.hpp"

namespace tpp {

struct RcpParams {
  double a = 0.5;
  double b = 0.25;
  double period_s = 0.010;  // control interval T
  // Fairness knob for combining per-link rates: 1 = proportional fair,
  // infinity = max-min (the flow takes the most loaded link's rate).
  double alpha = std::numeric_limits<double>::infinity();
};

// One control-interval step of the rate equation:
//   R(t+T) = R(t) * (1 - (T/d) * (a*(y - C) + b*q/d) / C)
// with y, C in bit/s, q in bits, d in seconds.  Clamped to [floor, C].
double rcp_compute_rate(double rate_bps, double y_bps, double q_bits, double capacity_bps,
                        double d_s, const RcpParams& params);

// R = (sum_i R_i^-alpha)^(-1/alpha); alpha = infinity degenerates to min.
double alpha_fair_aggregate(std::span<const double> rates, double alpha);

// Per-hop state brought back by a collection probe.
struct RcpHopSample {
  uint16_t switch_id = 0;
  Word queue_bytes = 0;
  Word tx_util = 0;   // 0..65535 of link capacity
  Word version = 0;   // [Link:AppSpecific_0]
  Word rate_wire = 0; // [Link:AppSpecific_1], 0..65535 of link capacity
};

// Five PUSHes per hop: SwitchID, QueueSize, TX-Utilization, AppSpecific_0,
// AppSpecific_1.  Memory prefilled with 0xffff.
TppProgram rcp_collect_program(uint8_t max_hops);
std::vector<RcpHopSample> rcp_parse_collect(const TppProgram& completed);

// Per-hop versioned update:
//   CSTORE [Link:AppSpecific_0], [Packet:Hop[0]], [Packet:Hop[1]]
//   STORE  [Link:AppSpecific_1], [Packet:Hop[2]]
// Hop k's region holds {expected version, new version, new rate}.  The STORE
// is suppressed wherever another flow won the version race first.
struct RcpHopUpdate {
  Word expected_version = 0;
  Word new_version = 0;
  Word new_rate_wire = 0;
};
TppProgram rcp_update_program(std::span<const RcpHopUpdate> updates);

// A host-paced flow running the three-phase protocol: probe the path,
// recompute each link's fair share, race the update in, and pace its own
// sending rate at the alpha-fair aggregate of the link rates.
class RcpFlow {
 public:
  RcpFlow(Network& net, int src, int dst, uint32_t flow_id, RcpParams params,
          std::function<double(uint16_t switch_id)> capacity_of_hop);

  void start(uint64_t at_ns);
  void probe_returned(const TppProgram& tpp);  // called by the host receive hook
  double rate_bps() const { return rate_bps_; }
  const std::vector<std::pair<uint64_t, double>>& rate_history() const { return history_; }

  uint32_t data_bytes = 1000;
  // Pacing rate before the first feedback arrives.
  double initial_rate_bps = 1e6;

 private:
  void send_probe();
  void on_probe_return(const TppProgram& tpp, uint64_t rtt_ns);
  void send_data();

  Network& net_;
  int src_, dst_;
  uint32_t flow_id_;
  RcpParams params_;
  std::function<double(uint16_t)> capacity_of_;
  double rate_bps_ = 0;
  uint8_t path_hops_ = 0;
  uint64_t probe_sent_ns_ = 0;
  bool running_ = false;
  std::vector<std::pair<uint64_t, double>> history_;
};

// Installs per-link initial state (version 0, full rate) and wires probe
// bouncing at `dst` for a set of flows.
void rcp_init_links(Network& net);

}  // namespace tpp

#endif
