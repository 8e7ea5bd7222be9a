#include "tpp/topology.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace tpp {

namespace {

uint64_t rate_of(const nlohmann::json& j) {
  if (j.contains("rate_bps")) return j["rate_bps"].get<uint64_t>();
  if (j.contains("rate_mbps")) return j["rate_mbps"].get<uint64_t>() * 1'000'000ull;
  if (j.contains("rate_gbps")) return j["rate_gbps"].get<uint64_t>() * 1'000'000'000ull;
  return 1'000'000'000ull;
}

uint64_t delay_of(const nlohmann::json& j) {
  if (j.contains("delay_ns")) return j["delay_ns"].get<uint64_t>();
  if (j.contains("delay_us")) return j["delay_us"].get<uint64_t>() * 1'000ull;
  if (j.contains("delay_ms")) return j["delay_ms"].get<uint64_t>() * 1'000'000ull;
  return 10'000ull;
}

}  // namespace

Topology Topology::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw TppError(Errc::ConfigError, std::string("topology JSON: ") + e.what());
  }

  Topology t;
  for (const auto& n : j.at("nodes")) {
    NodeSpec spec;
    spec.name = n.at("name").get<std::string>();
    spec.is_switch = n.value("type", "host") == std::string("switch");
    spec.tpp_enabled = n.value("tpp", true);
    spec.tpp_writes = n.value("tpp_writes", true);
    t.nodes.push_back(spec);
  }
  for (const auto& l : j.at("links")) {
    LinkSpec spec;
    spec.a = l.at("a").get<std::string>();
    spec.b = l.at("b").get<std::string>();
    spec.rate_bps = rate_of(l);
    spec.delay_ns = delay_of(l);
    if (l.contains("queue_kb")) spec.queue_bytes = l["queue_kb"].get<uint64_t>() * 1000ull;
    if (l.contains("queue_bytes")) spec.queue_bytes = l["queue_bytes"].get<uint64_t>();
    spec.loss = l.value("loss", 0.0);
    t.links.push_back(spec);
  }
  for (const auto& r : j.value("routes", nlohmann::json::array())) {
    RouteOverride o;
    o.node = r.at("node").get<std::string>();
    o.dst = r.at("dst").get<std::string>();
    o.ports = r.at("ports").get<std::vector<int>>();
    t.overrides.push_back(o);
  }
  t.build();
  return t;
}

Topology Topology::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TppError(Errc::ConfigError, "cannot open topology file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return from_json_text(os.str());
}

int Topology::node_index(const std::string& name) const {
  for (int i = 0; i < int(nodes.size()); ++i)
    if (nodes[i].name == name) return i;
  throw TppError(Errc::ConfigError, "unknown node: " + name);
}

int Topology::port_between(int node, int peer) const {
  for (int p = 0; p < int(ports[node].size()); ++p)
    if (ports[node][p].peer_node == peer) return p;
  return -1;
}

void Topology::build() {
  const int n = int(nodes.size());
  ports.assign(n, {});
  routes.assign(n, {});

  for (int li = 0; li < int(links.size()); ++li) {
    const auto& l = links[li];
    int a, b;
    try {
      a = node_index(l.a);
      b = node_index(l.b);
    } catch (const TppError&) {
      throw TppError(Errc::DanglingLink, "link endpoint not in node list: " + l.a + "-" + l.b);
    }
    int pa = int(ports[a].size());
    int pb = int(ports[b].size());
    ports[a].push_back({b, pb, li});
    ports[b].push_back({a, pa, li});
  }

  // Per-destination BFS distances; every port on a shortest path is a valid
  // next hop (equal-cost multipath), listed in port order for determinism.
  constexpr int kInf = std::numeric_limits<int>::max();
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, kInf));
  for (int dst = 0; dst < n; ++dst) {
    auto& d = dist[dst];
    d[dst] = 0;
    std::queue<int> q;
    q.push(dst);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (const auto& p : ports[u]) {
        // Hosts never forward traffic for others.
        if (u != dst && !nodes[u].is_switch) continue;
        if (d[p.peer_node] == kInf) {
          d[p.peer_node] = d[u] + 1;
          q.push(p.peer_node);
        }
      }
    }
    for (int u = 0; u < n; ++u) {
      if (u == dst || d[u] == kInf) continue;
      std::vector<int> next;
      for (int pi = 0; pi < int(ports[u].size()); ++pi) {
        int v = ports[u][pi].peer_node;
        if ((v == dst || nodes[v].is_switch) && d[v] == d[u] - 1) next.push_back(pi);
      }
      if (!next.empty()) routes[u][dst] = next;
    }
  }

  for (const auto& o : overrides) {
    int u = node_index(o.node);
    int dst = node_index(o.dst);
    for (int pi : o.ports) {
      if (pi < 0 || pi >= int(ports[u].size()))
        throw TppError(Errc::DanglingLink, "route override uses a port " + o.node +
                                               " does not have");
      // Progress check keeps the next-hop graph acyclic.
      int v = ports[u][pi].peer_node;
      if (dist[dst][v] == std::numeric_limits<int>::max() || dist[dst][v] >= dist[dst][u])
        throw TppError(Errc::RoutingLoop,
                       "override at " + o.node + " for " + o.dst + " does not make progress");
    }
    routes[u][dst] = o.ports;
  }
}

}  // namespace tpp
