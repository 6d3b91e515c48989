#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace acrlnc {

enum class NodeRole { Enc, ReEnc, Relay, Dec };

const char* to_string(NodeRole r);
std::optional<NodeRole> parse_role(std::string_view s);

struct NodeInfo {
  std::string name;
  NodeRole role = NodeRole::Relay;
  bool up = true;
};

struct LinkInfo {
  std::size_t from = 0;
  std::size_t to = 0;
  double erasure = 0.0;

  double rate() const { return 1.0 - erasure; }
};

// A controller-managed sub-network. nodes.front() hosts the VN Net.
struct VirtualNetwork {
  std::string name;
  std::vector<std::size_t> nodes;
};

// Nodes with roles, directed links with erasure probabilities (parallel
// links allowed), and the VN partition.
class Topology {
 public:
  std::size_t add_node(std::string name, NodeRole role);
  std::size_t add_link(std::size_t from, std::size_t to, double erasure);
  std::size_t add_vn(VirtualNetwork vn);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t link_count() const { return links_.size(); }
  const NodeInfo& node(std::size_t i) const { return nodes_.at(i); }
  const LinkInfo& link(std::size_t i) const { return links_.at(i); }
  const std::vector<VirtualNetwork>& vns() const { return vns_; }
  std::optional<std::size_t> find_node(std::string_view name) const;

  void set_node_up(std::size_t i, bool up) { nodes_.at(i).up = up; }
  void set_erasure(std::size_t link, double erasure);

  // Link ids from a to b, ascending; only links whose endpoints are up.
  std::vector<std::size_t> links_between(std::size_t a, std::size_t b) const;

  // VN containing the node, if any.
  std::optional<std::size_t> vn_of(std::size_t node) const;

  // Fewest-hop node sequence over up nodes; among equal lengths the
  // neighbour with the lower id is explored first.
  std::optional<std::vector<std::size_t>> shortest_route(std::size_t src, std::size_t dst) const;

 private:
  std::vector<NodeInfo> nodes_;
  std::vector<LinkInfo> links_;
  std::vector<VirtualNetwork> vns_;
  std::vector<std::optional<std::size_t>> vn_of_;
};

}  // namespace acrlnc
