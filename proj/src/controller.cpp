#include "acrlnc/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "acrlnc/errors.hpp"

namespace acrlnc {

namespace {

// Largest-remainder split of n items by weight, at least one each while
// items last.
std::vector<std::size_t> split_by_weight(std::size_t n, const std::vector<double>& weights) {
  const std::size_t k = weights.size();
  std::vector<std::size_t> share(k, 0);
  if (k == 0) return share;
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> frac(k);
  std::size_t given = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double q = static_cast<double>(n) * weights[i] / total;
    share[i] = static_cast<std::size_t>(std::floor(q));
    frac[i] = q - std::floor(q);
    given += share[i];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t i = 0; given < n; i = (i + 1) % k, ++given) ++share[order[i]];

  for (std::size_t i = 0; i < k; ++i) {
    if (share[i] > 0) continue;
    const auto donor = std::max_element(share.begin(), share.end());
    if (*donor <= 1) break;
    --*donor;
    share[i] = 1;
  }
  return share;
}

}  // namespace

Controller::Controller(Topology topo, std::uint32_t rtt, RateAggregate aggregate)
    : topo_(std::move(topo)), rtt_(rtt), aggregate_(aggregate) {
  rates_.reserve(topo_.link_count());
  for (std::size_t l = 0; l < topo_.link_count(); ++l) rates_.push_back(topo_.link(l).rate());
}

std::vector<std::pair<std::size_t, std::size_t>> Controller::vn_segments(const RouteLayout& layout) const {
  std::vector<std::pair<std::size_t, std::size_t>> segs;
  const std::size_t n = layout.nodes.size();
  std::size_t pos = 1;
  while (pos + 1 < n) {
    const auto vn = topo_.vn_of(layout.nodes[pos]);
    if (!vn) {
      ++pos;
      continue;
    }
    std::size_t end = pos;
    while (end + 2 < n && topo_.vn_of(layout.nodes[end + 1]) == vn) ++end;
    segs.emplace_back(pos, end);
    pos = end + 1;
  }
  return segs;
}

std::vector<std::size_t> Controller::net_nodes(const ServiceInfo& svc) const {
  std::vector<std::size_t> out{svc.src};
  for (const auto& [a, b] : vn_segments(svc.layout)) {
    (void)b;
    const std::size_t host = topo_.vns()[*topo_.vn_of(svc.layout.nodes[a])].nodes.front();
    if (std::find(out.begin(), out.end(), host) == out.end()) out.push_back(host);
  }
  return out;
}

void Controller::allocate_links() {
  // Services sharing a hop split its links in proportion to priority.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<ServiceId>> users;
  for (auto& [id, svc] : services_) {
    if (svc.suspended) continue;
    for (std::size_t h = 0; h + 1 < svc.layout.nodes.size(); ++h) {
      users[{svc.layout.nodes[h], svc.layout.nodes[h + 1]}].push_back(id);
    }
  }
  std::map<ServiceId, std::vector<std::vector<std::size_t>>> granted;
  for (const auto& [hop, ids] : users) {
    const auto links = topo_.links_between(hop.first, hop.second);
    std::vector<double> w;
    for (ServiceId id : ids) w.push_back(services_.at(id).priority);
    const auto share = split_by_weight(links.size(), w);
    std::size_t next = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      std::vector<std::size_t> mine(links.begin() + static_cast<std::ptrdiff_t>(next),
                                    links.begin() + static_cast<std::ptrdiff_t>(next + share[i]));
      next += share[i];
      granted[ids[i]].push_back(std::move(mine));
    }
  }

  for (auto& [id, svc] : services_) {
    if (svc.suspended) continue;
    auto& hops = granted[id];
    std::size_t p = hops.empty() ? 0 : SIZE_MAX;
    for (const auto& h : hops) p = std::min(p, h.size());
    if (p == 0) {
      svc.suspended = true;
      svc.error = "no link capacity left on the route";
      continue;
    }
    for (auto& h : hops) {
      std::stable_sort(h.begin(), h.end(), [&](std::size_t a, std::size_t b) { return rates_[a] > rates_[b]; });
      h.resize(p);
      std::sort(h.begin(), h.end());
    }
    if (hops != svc.layout.hops) {
      svc.layout.hops = std::move(hops);
      svc.layout.sigma.assign(svc.layout.nodes.size(), {});
      for (std::size_t pos = 1; pos + 1 < svc.layout.nodes.size(); ++pos) svc.layout.sigma[pos] = identity_permutation(p);
      svc.vn_gprt.clear();
    }
  }
}

void Controller::identify_and_balance(ServiceInfo& svc, bool keep_lprt) {
  RouteLayout& layout = svc.layout;
  const std::size_t hops = layout.hops.size();
  const auto segs = vn_segments(layout);

  if (!keep_lprt) {
    for (std::size_t pos = 1; pos + 1 < layout.nodes.size(); ++pos) layout.sigma[pos] = identity_permutation(layout.paths());
  }
  svc.vn_gprt.clear();
  for (const auto& [a, b] : segs) svc.vn_gprt[*topo_.vn_of(layout.nodes[a])].paths = compose_paths(layout, rates_, a, b);
  for (const auto& [a, b] : segs) balance_vn(layout, rates_, a, b, aggregate_);
  for (const auto& [a, b] : segs) svc.vn_gprt[*topo_.vn_of(layout.nodes[a])].paths = compose_paths(layout, rates_, a, b);
  svc.gprt.paths = compose_paths(layout, rates_, 0, hops);
}

void Controller::rebuild() {
  for (auto& [id, svc] : services_) {
    bool needs_route = svc.suspended || svc.layout.nodes.empty();
    for (std::size_t n : svc.layout.nodes) needs_route = needs_route || !topo_.node(n).up;
    if (!needs_route) continue;

    svc.layout = RouteLayout{};
    svc.vn_gprt.clear();
    svc.gprt = Gprt{};
    const auto route = topo_.shortest_route(svc.src, svc.dst);
    if (!route || route->size() < 2) {
      svc.suspended = true;
      svc.error = "destination unreachable";
      continue;
    }
    svc.suspended = false;
    svc.error.clear();
    svc.layout.nodes = *route;
    for (std::size_t n : *route) svc.layout.roles.push_back(topo_.node(n).role);
    for (const auto& [a, b] : vn_segments(svc.layout)) {
      if (svc.layout.roles[a] == NodeRole::Relay || svc.layout.roles[b] == NodeRole::Relay) {
        svc.suspended = true;
        svc.error = "route enters or leaves a virtual network through a relay node";
      }
    }
  }

  allocate_links();

  ft_.clear();
  rt_.clear();
  for (auto& [id, svc] : services_) {
    if (svc.suspended) {
      svc.vn_gprt.clear();
      svc.gprt = Gprt{};
      continue;
    }
    rt_[{svc.src, svc.dst}] = svc.layout.nodes;
    for (std::size_t node : net_nodes(svc)) ft_[node][id] = svc.priority;
  }
  for (auto& [node, table] : ft_) {
    double total = 0.0;
    for (const auto& [id, w] : table) total += w;
    for (auto& [id, w] : table) w /= total;
  }
  for (auto& [id, svc] : services_) {
    if (!svc.suspended) identify_and_balance(svc, true);
  }
}

ServiceId Controller::init_service(std::size_t src, std::size_t dst, double priority) {
  std::lock_guard lock(mu_);
  if (src >= topo_.node_count() || dst >= topo_.node_count()) throw InvalidInput("init_service: unknown node");
  if (!(priority > 0.0)) throw InvalidInput("init_service: priority must be positive");
  const auto route = topo_.shortest_route(src, dst);
  if (!route || route->size() < 2) {
    throw NoPathError("no route from '" + topo_.node(src).name + "' to '" + topo_.node(dst).name + "'");
  }

  ServiceInfo svc;
  svc.id = next_id_++;
  svc.src = src;
  svc.dst = dst;
  svc.priority = priority;
  svc.layout.nodes = *route;
  for (std::size_t n : *route) svc.layout.roles.push_back(topo_.node(n).role);
  for (const auto& [a, b] : vn_segments(svc.layout)) {
    if (svc.layout.roles[a] == NodeRole::Relay || svc.layout.roles[b] == NodeRole::Relay) {
      throw ConfigError("route of '" + topo_.node(src).name + "' -> '" + topo_.node(dst).name +
                        "' enters or leaves a virtual network through relay '" +
                        topo_.node(svc.layout.nodes[svc.layout.roles[a] == NodeRole::Relay ? a : b]).name + "'");
    }
  }
  const ServiceId id = svc.id;
  services_.emplace(id, std::move(svc));
  rebuild();
  if (services_.at(id).suspended) {
    const std::string why = services_.at(id).error;
    services_.erase(id);
    rebuild();
    throw NoPathError("service rejected: " + why);
  }
  return id;
}

bool Controller::terminate_service(ServiceId id) {
  std::lock_guard lock(mu_);
  if (services_.erase(id) == 0) return false;
  rebuild();
  return true;
}

std::vector<ServiceId> Controller::on_link_change(std::size_t link, double new_rate) {
  std::lock_guard lock(mu_);
  if (link >= rates_.size()) throw InvalidInput("on_link_change: unknown link");
  rates_[link] = std::clamp(new_rate, 0.0, 1.0);
  std::vector<ServiceId> affected;
  for (auto& [id, svc] : services_) {
    if (svc.suspended) continue;
    bool uses = false;
    for (const auto& h : svc.layout.hops) uses = uses || std::find(h.begin(), h.end(), link) != h.end();
    if (!uses) continue;
    identify_and_balance(svc, true);
    affected.push_back(id);
  }
  return affected;
}

std::vector<ServiceId> Controller::on_topology_change(std::size_t node, bool up) {
  std::lock_guard lock(mu_);
  if (node >= topo_.node_count()) throw InvalidInput("on_topology_change: unknown node");
  std::map<ServiceId, std::pair<bool, std::vector<std::vector<std::size_t>>>> before;
  for (const auto& [id, svc] : services_) before[id] = {svc.suspended, svc.layout.hops};
  topo_.set_node_up(node, up);
  rebuild();
  std::vector<ServiceId> affected;
  for (const auto& [id, svc] : services_) {
    if (before[id] != std::make_pair(svc.suspended, svc.layout.hops)) affected.push_back(id);
  }
  return affected;
}

Reply Controller::handle(const Request& req) {
  return std::visit(
      [this](const auto& m) -> Reply {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, msg::GetRt>) {
          std::lock_guard lock(mu_);
          msg::RtReply r;
          if (auto it = rt_.find({m.src, m.dst}); it != rt_.end()) r.route = it->second;
          return r;
        } else if constexpr (std::is_same_v<T, msg::GetFt>) {
          std::lock_guard lock(mu_);
          msg::FtReply r;
          if (auto it = ft_.find(m.net_node); it != ft_.end()) r.weights = it->second;
          return r;
        } else if constexpr (std::is_same_v<T, msg::GetGprt>) {
          std::lock_guard lock(mu_);
          msg::GprtReply r;
          auto it = services_.find(m.service);
          if (it == services_.end() || it->second.suspended) return r;
          if (!m.vn) {
            r.found = true;
            r.gprt = it->second.gprt;
          } else if (auto v = it->second.vn_gprt.find(*m.vn); v != it->second.vn_gprt.end()) {
            r.found = true;
            r.gprt = v->second;
          }
          return r;
        } else if constexpr (std::is_same_v<T, msg::PutLprt>) {
          std::lock_guard lock(mu_);
          auto it = services_.find(m.service);
          if (it == services_.end()) return msg::Ack{false, "unknown service"};
          ServiceInfo& svc = it->second;
          const auto& nodes = svc.layout.nodes;
          const auto at = std::find(nodes.begin(), nodes.end(), m.node);
          if (at == nodes.end() || at == nodes.begin() || at + 1 == nodes.end()) {
            return msg::Ack{false, "node is not an inner node of the service route"};
          }
          if (m.sigma.size() != svc.layout.paths() || !is_bijection(m.sigma)) {
            return msg::Ack{false, "matching is not a bijection over the service's link slots"};
          }
          svc.layout.sigma[static_cast<std::size_t>(at - nodes.begin())] = m.sigma;
          for (const auto& [a, b] : vn_segments(svc.layout)) {
            svc.vn_gprt[*topo_.vn_of(nodes[a])].paths = compose_paths(svc.layout, rates_, a, b);
          }
          svc.gprt.paths = compose_paths(svc.layout, rates_, 0, svc.layout.hops.size());
          return msg::Ack{};
        } else if constexpr (std::is_same_v<T, msg::GetRtt>) {
          return msg::RttReply{rtt_};
        } else if constexpr (std::is_same_v<T, msg::GetLinkRates>) {
          std::lock_guard lock(mu_);
          return msg::LinkRatesReply{rates_};
        } else if constexpr (std::is_same_v<T, msg::EventLinkChange>) {
          return msg::RecomputeReply{on_link_change(m.link, m.rate)};
        } else {
          return msg::RecomputeReply{on_topology_change(m.node, m.up)};
        }
      },
      req);
}

std::vector<ServiceId> Controller::services() const {
  std::lock_guard lock(mu_);
  std::vector<ServiceId> out;
  for (const auto& [id, svc] : services_) out.push_back(id);
  return out;
}

std::optional<ServiceInfo> Controller::service(ServiceId id) const {
  std::lock_guard lock(mu_);
  auto it = services_.find(id);
  if (it == services_.end()) return std::nullopt;
  return it->second;
}

std::map<std::size_t, std::map<ServiceId, double>> Controller::fairness_tables() const {
  std::lock_guard lock(mu_);
  return ft_;
}

std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> Controller::routing_table() const {
  std::lock_guard lock(mu_);
  return rt_;
}

std::vector<double> Controller::link_rates() const {
  std::lock_guard lock(mu_);
  return rates_;
}

Topology Controller::topology() const {
  std::lock_guard lock(mu_);
  return topo_;
}

}  // namespace acrlnc
