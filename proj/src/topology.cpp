#include "acrlnc/topology.hpp"

#include <algorithm>
#include <deque>

#include "acrlnc/errors.hpp"

namespace acrlnc {

const char* to_string(NodeRole r) {
  switch (r) {
    case NodeRole::Enc: return "enc";
    case NodeRole::ReEnc: return "reenc";
    case NodeRole::Relay: return "relay";
    case NodeRole::Dec: return "dec";
  }
  return "?";
}

std::optional<NodeRole> parse_role(std::string_view s) {
  if (s == "enc") return NodeRole::Enc;
  if (s == "reenc") return NodeRole::ReEnc;
  if (s == "relay") return NodeRole::Relay;
  if (s == "dec") return NodeRole::Dec;
  return std::nullopt;
}

std::size_t Topology::add_node(std::string name, NodeRole role) {
  if (find_node(name)) throw ConfigError("duplicate node '" + name + "'");
  nodes_.push_back(NodeInfo{std::move(name), role, true});
  vn_of_.emplace_back();
  return nodes_.size() - 1;
}

std::size_t Topology::add_link(std::size_t from, std::size_t to, double erasure) {
  if (from >= nodes_.size() || to >= nodes_.size()) throw ConfigError("link endpoint out of range");
  if (from == to) throw ConfigError("self-loop on node '" + nodes_[from].name + "'");
  if (!(erasure >= 0.0 && erasure < 1.0)) {
    throw ConfigError("link " + nodes_[from].name + "->" + nodes_[to].name + ": erasure must lie in [0, 1)");
  }
  links_.push_back(LinkInfo{from, to, erasure});
  return links_.size() - 1;
}

std::size_t Topology::add_vn(VirtualNetwork vn) {
  if (vn.nodes.empty()) throw ConfigError("virtual network '" + vn.name + "' has no nodes");
  for (std::size_t n : vn.nodes) {
    if (n >= nodes_.size()) throw ConfigError("virtual network '" + vn.name + "': node out of range");
    if (vn_of_[n]) throw ConfigError("node '" + nodes_[n].name + "' belongs to two virtual networks");
    const NodeRole r = nodes_[n].role;
    if (r == NodeRole::Enc || r == NodeRole::Dec) {
      throw ConfigError("virtual network '" + vn.name + "' contains end node '" + nodes_[n].name + "'");
    }
  }
  if (nodes_[vn.nodes.front()].role == NodeRole::Relay || nodes_[vn.nodes.back()].role == NodeRole::Relay) {
    throw ConfigError("virtual network '" + vn.name + "' must start and end with a reenc node");
  }
  for (std::size_t n : vn.nodes) vn_of_[n] = vns_.size();
  vns_.push_back(std::move(vn));
  return vns_.size() - 1;
}

std::optional<std::size_t> Topology::find_node(std::string_view name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) return i;
  }
  return std::nullopt;
}

void Topology::set_erasure(std::size_t link, double erasure) {
  if (!(erasure >= 0.0 && erasure < 1.0)) throw InvalidInput("set_erasure: erasure must lie in [0, 1)");
  links_.at(link).erasure = erasure;
}

std::vector<std::size_t> Topology::links_between(std::size_t a, std::size_t b) const {
  std::vector<std::size_t> out;
  if (!nodes_.at(a).up || !nodes_.at(b).up) return out;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (links_[i].from == a && links_[i].to == b) out.push_back(i);
  }
  return out;
}

std::optional<std::size_t> Topology::vn_of(std::size_t node) const { return vn_of_.at(node); }

std::optional<std::vector<std::size_t>> Topology::shortest_route(std::size_t src, std::size_t dst) const {
  if (src >= nodes_.size() || dst >= nodes_.size()) return std::nullopt;
  if (!nodes_[src].up || !nodes_[dst].up) return std::nullopt;

  std::vector<std::vector<std::size_t>> adj(nodes_.size());
  for (const LinkInfo& l : links_) {
    if (nodes_[l.from].up && nodes_[l.to].up) adj[l.from].push_back(l.to);
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> prev(nodes_.size(), kNone);
  std::vector<bool> seen(nodes_.size(), false);
  std::deque<std::size_t> queue{src};
  seen[src] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    if (u == dst) break;
    for (std::size_t v : adj[u]) {
      if (seen[v]) continue;
      seen[v] = true;
      prev[v] = u;
      queue.push_back(v);
    }
  }
  if (!seen[dst]) return std::nullopt;

  std::vector<std::size_t> route;
  for (std::size_t v = dst; v != kNone; v = prev[v]) route.push_back(v);
  std::reverse(route.begin(), route.end());
  return route;
}

}  // namespace acrlnc
