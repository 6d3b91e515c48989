#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <cmath>
#include <string>
#include <vector>

#include "acrlnc/controller.hpp"
#include "acrlnc/errors.hpp"
#include "acrlnc/rng.hpp"
#include "acrlnc/scenario.hpp"

namespace acrlnc::testing {

// Two sources and two sinks around one VN whose middle offers a relay route
// and a ReEnc route of equal length.
//
//   S0 ==3== R1 ==3== M ==3== R2 ==3== D0
//   S1 ==2==/   \==2== R3 ==2==/ \==2== D1
inline Topology lifecycle_topology() {
  Topology t;
  const auto s0 = t.add_node("S0", NodeRole::Enc);
  const auto s1 = t.add_node("S1", NodeRole::Enc);
  const auto r1 = t.add_node("R1", NodeRole::ReEnc);
  const auto m = t.add_node("M", NodeRole::Relay);
  const auto r3 = t.add_node("R3", NodeRole::ReEnc);
  const auto r2 = t.add_node("R2", NodeRole::ReEnc);
  const auto d0 = t.add_node("D0", NodeRole::Dec);
  const auto d1 = t.add_node("D1", NodeRole::Dec);
  auto links = [&](std::size_t a, std::size_t b, int n, double eps) {
    for (int i = 0; i < n; ++i) t.add_link(a, b, eps + 0.05 * i);
  };
  links(s0, r1, 3, 0.05);
  links(s1, r1, 2, 0.1);
  links(r1, m, 3, 0.1);
  links(m, r2, 3, 0.05);
  links(r1, r3, 2, 0.2);
  links(r3, r2, 2, 0.1);
  links(r2, d0, 3, 0.05);
  links(r2, d1, 2, 0.15);
  t.add_vn(VirtualNetwork{"VN", {r1, m, r3, r2}});
  return t;
}

// Empty string when every table invariant holds, else the first violation.
inline std::string check_tables(const Controller& c) {
  for (const auto& [node, table] : c.fairness_tables()) {
    double sum = 0.0;
    for (const auto& [id, w] : table) sum += w;
    if (!table.empty() && std::fabs(sum - 1.0) > 1e-9) {
      return "FT weights at node " + std::to_string(node) + " sum to " + std::to_string(sum);
    }
  }
  const Topology topo = c.topology();
  for (ServiceId id : c.services()) {
    const auto svc = c.service(id);
    if (!svc || svc->suspended) continue;
    for (std::size_t pos = 0; pos < svc->layout.sigma.size(); ++pos) {
      const auto& s = svc->layout.sigma[pos];
      if (!s.empty() && !is_bijection(s)) return "LPRT at position " + std::to_string(pos) + " is not a bijection";
    }
    for (const auto& g : svc->gprt.paths) {
      if (g.links.size() + 1 != svc->layout.nodes.size()) return "GPRT path length mismatch";
      for (std::size_t h = 0; h < g.links.size(); ++h) {
        if (g.links[h] >= topo.link_count()) return "GPRT link does not exist";
        const auto& l = topo.link(g.links[h]);
        if (l.from != svc->layout.nodes[h] || l.to != svc->layout.nodes[h + 1]) return "GPRT link off route";
        if (!topo.node(l.from).up || !topo.node(l.to).up) return "GPRT link on a down node";
      }
    }
  }
  return {};
}

// Applies `events` random lifecycle events, checking invariants after each.
inline std::string random_lifecycle(std::uint64_t seed, int events) {
  Rng rng(seed);
  Controller c(lifecycle_topology(), 10);
  const Topology topo = c.topology();
  const std::vector<std::size_t> sources{0, 1}, sinks{6, 7};
  for (int e = 0; e < events; ++e) {
    const auto live = c.services();
    switch (rng.below(5)) {
      case 0:
      case 1:
        try {
          c.init_service(sources[rng.below(2)], sinks[rng.below(2)], 1.0 + static_cast<double>(rng.below(3)));
        } catch (const NoPathError&) {
        }
        break;
      case 2:
        if (!live.empty()) c.terminate_service(live[rng.below(live.size())]);
        break;
      case 3:
        c.on_link_change(rng.below(topo.link_count()), 0.05 + 0.95 * rng.uniform());
        break;
      default: {
        const std::size_t node = 2 + rng.below(4);  // inner nodes only
        c.on_topology_change(node, rng.bernoulli(0.5));
        break;
      }
    }
    if (auto why = check_tables(c); !why.empty()) return "event " + std::to_string(e) + ": " + why;
  }
  return {};
}

// S -> R1 -> ... -> D with eps[h][p] the erasure of path p on hop h. All
// inner nodes are ReEnc and form one VN.
inline Scenario line_scenario(const std::vector<std::vector<double>>& eps, std::size_t packets, std::uint32_t slots,
                              std::uint32_t rtt = 10) {
  Scenario sc;
  const std::size_t hops = eps.size();
  std::vector<std::string> names{"S"};
  for (std::size_t h = 1; h < hops; ++h) names.push_back("R" + std::to_string(h));
  names.push_back("D");
  sc.nodes.push_back({"S", NodeRole::Enc});
  VnSpec vn{"VN", {}};
  for (std::size_t h = 1; h < hops; ++h) {
    sc.nodes.push_back({names[h], NodeRole::ReEnc});
    vn.nodes.push_back(names[h]);
  }
  sc.nodes.push_back({"D", NodeRole::Dec});
  if (!vn.nodes.empty()) sc.vns.push_back(vn);
  for (std::size_t h = 0; h < hops; ++h) {
    for (double e : eps[h]) sc.links.push_back({names[h], names[h + 1], e, 1});
  }
  sc.services.push_back({"S", "D", packets, 16, 1.0});
  sc.protocol.params.rtt = rtt;
  sc.protocol.params.max_window = 4 * rtt;
  sc.slots = slots;
  validate(sc);
  return sc;
}

inline std::vector<std::vector<double>> uniform_eps(std::size_t hops, std::size_t paths, double eps) {
  return std::vector<std::vector<double>>(hops, std::vector<double>(paths, eps));
}

}  // namespace acrlnc::testing
