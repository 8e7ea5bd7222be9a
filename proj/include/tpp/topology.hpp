#ifndef TPP_TOPOLOGY_HPP
#define TPP_TOPOLOGY_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tpp/errors.hpp"

namespace tpp {

struct NodeSpec {
  std::string name;
  bool is_switch = false;
  bool tpp_enabled = true;   // switches only: execute TPPs at all
  bool tpp_writes = true;    // switches only: allow STORE/CSTORE effects
};

struct LinkSpec {
  std::string a;
  std::string b;
  uint64_t rate_bps = 1'000'000'000;
  uint64_t delay_ns = 10'000;
  uint64_t queue_bytes = 150'000;
  double loss = 0.0;  // per-direction random drop probability
};

// Explicit next-hop override: at `node`, packets for `dst` may leave through
// any of `ports` (indices into the node's port list).
struct RouteOverride {
  std::string node;
  std::string dst;
  std::vector<int> ports;
};

struct Port {
  int peer_node;
  int peer_port;
  int link;  // index into Topology::links
};

class Topology {
 public:
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  std::vector<RouteOverride> overrides;

  // Filled by build().
  std::vector<std::vector<Port>> ports;                 // per node
  std::vector<std::map<int, std::vector<int>>> routes;  // per node: dst -> out ports

  static Topology from_json_text(const std::string& text);
  static Topology from_json_file(const std::string& path);

  // Resolves names, wires ports, computes equal-cost shortest-path routes
  // (deterministic: ports sorted by index) and applies overrides.  Throws
  // DanglingLink for unknown endpoints and RoutingLoop when an override
  // would send a packet away from its destination.
  void build();

  int node_index(const std::string& name) const;  // throws ConfigError
  int port_between(int node, int peer) const;     // -1 when not adjacent
};

}  // namespace tpp

#endif
