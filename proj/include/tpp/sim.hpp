#ifndef TPP_SIM_HPP
#define TPP_SIM_HPP

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "tpp/exec.hpp"
#include "tpp/switch_state.hpp"
#include "tpp/topology.hpp"

namespace tpp {

struct Packet {
  uint64_t uid = 0;
  int src = -1;
  int dst = -1;
  uint32_t flow_id = 0;
  uint16_t vlan = 0;  // multipath selection key
  uint32_t size_bytes = 0;
  std::optional<TppProgram> tpp;
  int tag = 0;  // application scratch
  uint64_t sent_ns = 0;
  bool collect_traces = false;
  std::vector<ExecutionTrace> traces;
};
using PacketPtr = std::shared_ptr<Packet>;

// Ground-truth effects recorded outside the packet, for checking what TPPs
// report against what actually happened.
class ShadowLog : public ExecObserver {
 public:
  struct QueueSample {
    uint64_t t;
    uint64_t uid;
    uint16_t sw;
    int port;
    uint64_t occupancy_bytes;  // output queue, excluding this packet
    uint8_t hop;
  };
  struct WriteRec {
    uint64_t t;
    uint16_t sw;
    uint16_t addr;
    Word old_value;
    Word new_value;
  };
  struct CstoreRec {
    uint64_t t;
    uint16_t sw;
    uint16_t addr;
    Word expected;
    Word observed;
    bool success;
  };

  std::vector<QueueSample> queue_samples;
  std::vector<WriteRec> tpp_writes;
  std::vector<CstoreRec> cstores;
  std::function<uint64_t()> clock;

  void on_tpp_write(uint16_t sw, uint16_t addr, Word old_value, Word new_value) override {
    tpp_writes.push_back({clock ? clock() : 0, sw, addr, old_value, new_value});
  }
  void on_cstore(uint16_t sw, uint16_t addr, Word expected, Word observed,
                 bool success) override {
    cstores.push_back({clock ? clock() : 0, sw, addr, expected, observed, success});
  }
};

struct DeliveryRec {
  uint64_t t;
  uint64_t uid;
  int src;
  int dst;
  uint32_t flow_id;
  uint32_t bytes;
};

struct UtilizationRec {
  uint64_t t;
  uint16_t sw;
  int port;
  Word tx_util;
  Word rx_util;
  uint64_t queue_bytes;
};

// Deterministic store-and-forward network: drop-tail FIFO per output port,
// events ordered by (time, insertion sequence).
class Network {
 public:
  explicit Network(Topology topo, uint64_t seed = 1);

  uint64_t now() const { return now_ns_; }
  void at(uint64_t t, std::function<void()> fn);
  void after(uint64_t dt, std::function<void()> fn) { at(now_ns_ + dt, std::move(fn)); }
  void run_until(uint64_t t);
  void run();

  const Topology& topo() const { return topo_; }
  int node(const std::string& name) const { return topo_.node_index(name); }
  SwitchState& state(int node) { return *switch_state_[node]; }
  bool is_switch(int node) const { return topo_.nodes[node].is_switch; }

  PacketPtr make_packet() {
    auto p = std::make_shared<Packet>();
    p->uid = next_uid_++;
    return p;
  }
  void send(int from_node, PacketPtr pkt);
  void set_receiver(int node, std::function<void(PacketPtr)> fn) {
    receiver_[node] = std::move(fn);
  }

  // Window (default 1 ms) over which the per-port utilization words are
  // recomputed on every switch.
  void enable_utilization_updates(uint64_t window_ns = 1'000'000);

  ShadowLog shadow;
  std::vector<DeliveryRec> deliveries;
  std::vector<UtilizationRec> utilization_log;
  std::vector<ExecutionTrace> tpp_log;
  bool record_tpp_log = false;
  bool sample_tpp_queues = true;

  uint64_t drops = 0;
  std::mt19937_64& rng() { return rng_; }
  // Opaque per-network state slots for the endhost/executor and app layers.
  std::map<std::string, std::shared_ptr<void>> app_state;

  void write_deliveries_csv(const std::string& path) const;
  void write_utilization_csv(const std::string& path) const;
  void write_tpp_records_csv(const std::string& path) const;

 private:
  struct OutQueue {
    std::deque<PacketPtr> q;
    uint64_t bytes = 0;
    bool busy = false;
  };

  void enqueue(int node, int port, PacketPtr pkt);
  void start_tx(int node, int port);
  void arrive(int node, int port, PacketPtr pkt);
  void forward_and_execute(int node, int in_port, PacketPtr pkt);
  void count_drop(int node, int port, const PacketPtr& pkt);

  Topology topo_;
  std::vector<std::unique_ptr<SwitchState>> switch_state_;
  std::vector<std::vector<OutQueue>> out_;  // [node][port]
  std::vector<std::function<void(PacketPtr)>> receiver_;
  std::vector<std::map<int, int>> entry_for_dst_;  // per switch: dst node -> stage-0 entry

  struct Event {
    uint64_t t;
    uint64_t seq;
    std::function<void()> fn;
    bool operator>(const Event& o) const { return t != o.t ? t > o.t : seq > o.seq; }
  };
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  uint64_t now_ns_ = 0;
  uint64_t next_seq_ = 0;
  uint64_t next_uid_ = 1;
  std::mt19937_64 rng_;
};

}  // namespace tpp

#endif
