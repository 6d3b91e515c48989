#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "acrlnc/coding.hpp"
#include "acrlnc/path_opt.hpp"
#include "acrlnc/protocol.hpp"
#include "acrlnc/topology.hpp"

namespace acrlnc {

struct NodeSpec {
  std::string id;
  NodeRole role = NodeRole::Relay;
};

struct LinkSpec {
  std::string from;
  std::string to;
  double erasure = 0.0;
  std::size_t count = 1;
};

struct VnSpec {
  std::string name;
  std::vector<std::string> nodes;
};

struct ServiceSpec {
  std::string src;
  std::string dst;
  std::size_t packets = 0;
  std::size_t payload_bytes = 16;
  double priority = 1.0;
};

struct ProtocolConfig {
  ProtocolParams params;
  MixingMode mixing = MixingMode::Selective;
  std::map<std::string, MixingMode> mixing_overrides;  // per node id
  FeedbackMode feedback = FeedbackMode::Cumulative;
  RateAggregate associated_rate = RateAggregate::Sum;
  bool per_reenc_budget = false;
  std::optional<std::uint32_t> local_feedback_delay;  // default: the global feedback delay
  bool change_detection = true;
};

// A link event changes the erasure of the index-th parallel link from->to,
// or of all of them without an index. A node event takes a node down or
// brings it back.
struct EventSpec {
  std::uint32_t slot = 0;
  enum class Kind { LinkErasure, NodeLeave, NodeJoin } kind = Kind::LinkErasure;
  std::string from;
  std::string to;
  std::optional<std::size_t> index;
  double erasure = 0.0;
  std::string node;
};

struct Scenario {
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  std::vector<VnSpec> vns;
  std::vector<ServiceSpec> services;
  ProtocolConfig protocol;
  std::vector<std::uint64_t> seeds{1};
  std::uint32_t slots = 1000;
  std::vector<EventSpec> events;
  std::string output_dir;
};

// Syntax error with a 1-based position in the source text.
class ScenarioParseError : public std::runtime_error {
 public:
  ScenarioParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Parses and validates. Throws ScenarioParseError on malformed JSON and
// ConfigError naming the violated constraint otherwise.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

// Checks cross references and ranges; called by parse_scenario.
void validate(const Scenario& sc);

// Expands link counts into individual links; link ids follow declaration
// order.
Topology build_topology(const Scenario& sc);

std::string to_string(MixingMode m);
std::optional<MixingMode> parse_mixing(std::string_view s);

}  // namespace acrlnc
