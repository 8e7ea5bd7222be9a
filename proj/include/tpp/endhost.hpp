#ifndef TPP_ENDHOST_HPP
#define TPP_ENDHOST_HPP

#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "tpp/analyzer.hpp"
#include "tpp/sim.hpp"

namespace tpp {

// Which outgoing packets a rule instruments.  Unset fields match anything.
struct FilterRule {
  int priority = 0;
  std::optional<int> src;
  std::optional<int> dst;
  std::optional<uint32_t> flow_id;

  bool matches(const Packet& p) const {
    return (!src || *src == p.src) && (!dst || *dst == p.dst) &&
           (!flow_id || *flow_id == p.flow_id);
  }
};

struct TppRule {
  uint64_t id = 0;
  uint64_t appid = 0;
  FilterRule filter;
  TppProgram tpp;
  uint32_t sample_every = 1;  // attach to 1 in N matching packets, on average
  std::string comment;
};

// Per-host control agent: holds the installed rules and admits them against
// the memory access policies before they can touch any traffic.
class ControlAgent {
 public:
  std::vector<MemoryPolicy> policies;
  bool deny_writes = false;

  // Validates and installs.  Throws PolicyViolation when the static analysis
  // rejects the program.
  uint64_t add_tpp(TppRule rule);
  bool remove(uint64_t id);
  std::vector<TppRule> list() const;

  // Highest-priority matching rule (ties: lowest id).
  std::optional<TppRule> match(const Packet& p) const;

 private:
  mutable std::shared_mutex mu_;
  std::vector<TppRule> rules_;
  uint64_t next_id_ = 1;
};

// Dataplane shim: instruments outgoing packets per the agent's rules and
// strips/dispatches TPPs on incoming ones.
class Shim {
 public:
  explicit Shim(ControlAgent& agent, uint64_t seed = 1) : agent_(&agent), rng_(seed) {}

  // Attaches the highest-priority matching TPP (transparent encapsulation),
  // honoring the rule's sampling rate.  Packets that would exceed the MTU go
  // out uninstrumented and are counted instead.
  void on_transmit(Packet& pkt);

  std::size_t mtu_bytes = 1500;
  uint64_t mtu_skips = 0;         // transmissions sent without their TPP
  uint64_t unknown_sessions = 0;  // received records with no collector

  // Collector keyed by TPP session id; receives the completed program.
  using Collector = std::function<void(const TppProgram&, const Packet&)>;
  void set_collector(uint16_t session_id, Collector fn) { collectors_[session_id] = std::move(fn); }

  // Detaches and dispatches a received TPP.  Standalone TPPs not claimed by a
  // collector are echoed back to the sender through `net` with src and dst
  // swapped.  Returns true when the packet was consumed by the shim.
  bool on_receive(Network& net, int self, const PacketPtr& pkt);

 private:
  ControlAgent* agent_;
  std::mt19937_64 rng_;
  std::map<uint16_t, Collector> collectors_;
};

struct ExecutorOptions {
  uint64_t timeout_ns = 20'000'000;
  int max_attempts = 5;
};

// Sends a standalone TPP to `target`'s control address and calls `done` with
// the executed program, retransmitting on loss; nullopt after max_attempts.
void execute_reliable(Network& net, int self, int target, TppProgram tpp,
                      const ExecutorOptions& opts,
                      std::function<void(std::optional<TppProgram>)> done);

// Gates `payload` (at most 4 instructions) behind a per-hop CEXEC on
// [Switch:ID], so only the switch whose id equals `switch_id` executes it.
// PUSH/POP are serialized first; payload slots start at word 4 of each hop
// region and keep the 0xffff fill wherever the gate fails.
TppProgram make_targeted(const TppProgram& payload, Word switch_id, uint8_t max_hops = 16);

// execute_reliable with a make_targeted wrapper: the program travels to
// `dest`'s control address but only `switch_id` runs the payload.
void execute_targeted(Network& net, int self, int dest, Word switch_id, TppProgram payload,
                      const ExecutorOptions& opts,
                      std::function<void(std::optional<TppProgram>)> done);

// execute_reliable against many targets; `done` receives the responses that
// arrived (same order as `targets`, nullopt per failed target).
void scatter_gather(Network& net, int self, const std::vector<int>& targets, TppProgram tpp,
                    const ExecutorOptions& opts,
                    std::function<void(std::vector<std::optional<TppProgram>>)> done);

// Splits a program whose packet memory exceeds `mtu` on the wire into
// several packets, each carrying a window of consecutive hops.  The initial
// hop index is offset so out-of-window hops address past the end of packet
// memory and skip gracefully.  PUSH/POP are serialized first.  Throws
// Unsplittable when even a single hop region does not fit.
std::vector<TppProgram> split_large(const TppProgram& p, std::size_t mtu);

// Ethernet+IPv4+UDP framing bytes around a standalone TPP.
constexpr uint32_t kStandaloneOverheadBytes = 42;

}  // namespace tpp

#endif
