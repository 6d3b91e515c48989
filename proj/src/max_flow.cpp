#include <algorithm>
#include <deque>
#include <limits>

#include "acrlnc/controller.hpp"
#include "acrlnc/errors.hpp"
#include "acrlnc/simulator.hpp"

namespace acrlnc {

double max_flow(std::size_t nodes, const std::vector<FlowEdge>& edges, std::size_t source, std::size_t sink) {
  if (source >= nodes || sink >= nodes) throw InvalidInput("max_flow: terminal out of range");
  if (source == sink) return 0.0;
  std::vector<std::vector<double>> cap(nodes, std::vector<double>(nodes, 0.0));
  for (const FlowEdge& e : edges) {
    if (e.from >= nodes || e.to >= nodes) throw InvalidInput("max_flow: edge endpoint out of range");
    cap[e.from][e.to] += e.capacity;
  }

  constexpr double kEps = 1e-12;
  double flow = 0.0;
  while (true) {
    std::vector<std::size_t> prev(nodes, nodes);
    prev[source] = source;
    std::deque<std::size_t> queue{source};
    while (!queue.empty() && prev[sink] == nodes) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v = 0; v < nodes; ++v) {
        if (prev[v] == nodes && cap[u][v] > kEps) {
          prev[v] = u;
          queue.push_back(v);
        }
      }
    }
    if (prev[sink] == nodes) break;
    double push = std::numeric_limits<double>::infinity();
    for (std::size_t v = sink; v != source; v = prev[v]) push = std::min(push, cap[prev[v]][v]);
    for (std::size_t v = sink; v != source; v = prev[v]) {
      cap[prev[v]][v] -= push;
      cap[v][prev[v]] += push;
    }
    flow += push;
  }
  return flow;
}

double min_cut(const Scenario& sc, std::size_t service) {
  Controller ctl(build_topology(sc), sc.protocol.params.rtt, sc.protocol.associated_rate);
  const Topology topo = ctl.topology();
  std::vector<ServiceId> ids;
  for (const ServiceSpec& s : sc.services) {
    ids.push_back(ctl.init_service(*topo.find_node(s.src), *topo.find_node(s.dst), s.priority));
  }
  const auto info = ctl.service(ids.at(service));
  std::vector<FlowEdge> edges;
  for (const auto& hop : info->layout.hops) {
    for (std::size_t l : hop) edges.push_back(FlowEdge{topo.link(l).from, topo.link(l).to, topo.link(l).rate()});
  }
  return max_flow(topo.node_count(), edges, info->src, info->dst);
}

}  // namespace acrlnc
