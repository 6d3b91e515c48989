#include "acrlnc/scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <json.hpp>

#include "acrlnc/errors.hpp"

namespace acrlnc {

using nlohmann::json;

ScenarioParseError::ScenarioParseError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error(what), line_(line), column_(column) {}

std::string to_string(MixingMode m) {
  switch (m) {
    case MixingMode::Selective: return "selective";
    case MixingMode::Traditional: return "traditional";
    case MixingMode::None: return "none";
  }
  return "?";
}

std::optional<MixingMode> parse_mixing(std::string_view s) {
  if (s == "selective") return MixingMode::Selective;
  if (s == "traditional") return MixingMode::Traditional;
  if (s == "none") return MixingMode::None;
  return std::nullopt;
}

namespace {

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!ok.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

const json& required(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return obj.at(key);
}

template <typename T>
T get_as(const json& v, const std::string& where) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": wrong value type");
  }
}

std::size_t get_count(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(where + ": expected a nonnegative integer");
  return v.get<std::size_t>();
}

MixingMode get_mixing(const json& v, const std::string& where) {
  const auto m = parse_mixing(get_as<std::string>(v, where));
  if (!m) throw ConfigError(where + ": mixing must be selective, traditional or none");
  return *m;
}

void parse_protocol(const json& j, ProtocolConfig& pc) {
  const std::string w = "protocol";
  only_keys(j, w,
            {"rtt", "max_window", "threshold", "mixing", "mixing_overrides", "feedback", "rate_window", "fec_rounding",
             "associated_rate", "per_reenc_budget", "local_feedback_delay", "change_detection"});
  if (j.contains("rtt")) pc.params.rtt = static_cast<std::uint32_t>(get_count(j["rtt"], w + ".rtt"));
  pc.params.max_window = j.contains("max_window") ? get_count(j["max_window"], w + ".max_window")
                                                  : 4 * static_cast<std::size_t>(pc.params.rtt);
  if (j.contains("threshold")) pc.params.threshold = get_as<double>(j["threshold"], w + ".threshold");
  if (j.contains("rate_window")) pc.params.rate_window = get_count(j["rate_window"], w + ".rate_window");
  if (j.contains("mixing")) pc.mixing = get_mixing(j["mixing"], w + ".mixing");
  if (j.contains("mixing_overrides")) {
    const json& o = j["mixing_overrides"];
    if (!o.is_object()) throw ConfigError(w + ".mixing_overrides: expected an object");
    for (const auto& [node, mode] : o.items()) pc.mixing_overrides[node] = get_mixing(mode, w + ".mixing_overrides." + node);
  }
  if (j.contains("feedback")) {
    const auto s = get_as<std::string>(j["feedback"], w + ".feedback");
    if (s == "cumulative") {
      pc.feedback = FeedbackMode::Cumulative;
    } else if (s == "per_packet") {
      pc.feedback = FeedbackMode::PerPacket;
    } else {
      throw ConfigError(w + ".feedback: must be cumulative or per_packet");
    }
  }
  if (j.contains("fec_rounding")) {
    const auto s = get_as<std::string>(j["fec_rounding"], w + ".fec_rounding");
    if (s == "half_up") {
      pc.params.fec_rounding = FecRounding::HalfUp;
    } else if (s == "ceil") {
      pc.params.fec_rounding = FecRounding::Ceil;
    } else {
      throw ConfigError(w + ".fec_rounding: must be half_up or ceil");
    }
  }
  if (j.contains("associated_rate")) {
    const auto s = get_as<std::string>(j["associated_rate"], w + ".associated_rate");
    if (s == "sum") {
      pc.associated_rate = RateAggregate::Sum;
    } else if (s == "min") {
      pc.associated_rate = RateAggregate::Min;
    } else {
      throw ConfigError(w + ".associated_rate: must be sum or min");
    }
  }
  if (j.contains("per_reenc_budget")) pc.per_reenc_budget = get_as<bool>(j["per_reenc_budget"], w + ".per_reenc_budget");
  if (j.contains("change_detection")) pc.change_detection = get_as<bool>(j["change_detection"], w + ".change_detection");
  if (j.contains("local_feedback_delay")) {
    pc.local_feedback_delay = static_cast<std::uint32_t>(get_count(j["local_feedback_delay"], w + ".local_feedback_delay"));
  }
}

Scenario from_json(const json& root) {
  Scenario sc;
  only_keys(root, "scenario", {"topology", "services", "protocol", "seeds", "slots", "events", "output"});

  const json& topo = required(root, "scenario", "topology");
  only_keys(topo, "topology", {"nodes", "links", "vns"});
  const json& nodes = required(topo, "topology", "nodes");
  if (!nodes.is_array()) throw ConfigError("topology.nodes: expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string w = "topology.nodes[" + std::to_string(i) + "]";
    only_keys(nodes[i], w, {"id", "role"});
    NodeSpec n;
    n.id = get_as<std::string>(required(nodes[i], w, "id"), w + ".id");
    const auto role = parse_role(get_as<std::string>(required(nodes[i], w, "role"), w + ".role"));
    if (!role) throw ConfigError(w + ".role: must be enc, reenc, relay or dec");
    n.role = *role;
    sc.nodes.push_back(std::move(n));
  }
  const json& links = required(topo, "topology", "links");
  if (!links.is_array()) throw ConfigError("topology.links: expected an array");
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string w = "topology.links[" + std::to_string(i) + "]";
    only_keys(links[i], w, {"from", "to", "erasure", "count"});
    LinkSpec l;
    l.from = get_as<std::string>(required(links[i], w, "from"), w + ".from");
    l.to = get_as<std::string>(required(links[i], w, "to"), w + ".to");
    if (links[i].contains("erasure")) l.erasure = get_as<double>(links[i]["erasure"], w + ".erasure");
    if (links[i].contains("count")) l.count = get_count(links[i]["count"], w + ".count");
    sc.links.push_back(std::move(l));
  }
  if (topo.contains("vns")) {
    const json& vns = topo["vns"];
    if (!vns.is_array()) throw ConfigError("topology.vns: expected an array");
    for (std::size_t i = 0; i < vns.size(); ++i) {
      const std::string w = "topology.vns[" + std::to_string(i) + "]";
      only_keys(vns[i], w, {"name", "nodes"});
      VnSpec v;
      v.name = vns[i].contains("name") ? get_as<std::string>(vns[i]["name"], w + ".name") : "vn" + std::to_string(i);
      v.nodes = get_as<std::vector<std::string>>(required(vns[i], w, "nodes"), w + ".nodes");
      sc.vns.push_back(std::move(v));
    }
  }

  const json& services = required(root, "scenario", "services");
  if (!services.is_array()) throw ConfigError("services: expected an array");
  for (std::size_t i = 0; i < services.size(); ++i) {
    const std::string w = "services[" + std::to_string(i) + "]";
    only_keys(services[i], w, {"src", "dst", "packets", "payload_bytes", "priority"});
    ServiceSpec s;
    s.src = get_as<std::string>(required(services[i], w, "src"), w + ".src");
    s.dst = get_as<std::string>(required(services[i], w, "dst"), w + ".dst");
    s.packets = get_count(required(services[i], w, "packets"), w + ".packets");
    if (services[i].contains("payload_bytes")) s.payload_bytes = get_count(services[i]["payload_bytes"], w + ".payload_bytes");
    if (services[i].contains("priority")) s.priority = get_as<double>(services[i]["priority"], w + ".priority");
    sc.services.push_back(std::move(s));
  }

  if (root.contains("protocol")) {
    parse_protocol(root["protocol"], sc.protocol);
  } else {
    sc.protocol.params.max_window = 4 * static_cast<std::size_t>(sc.protocol.params.rtt);
  }
  if (root.contains("seeds")) {
    const json& s = root["seeds"];
    if (!s.is_array()) throw ConfigError("seeds: expected an array of integers");
    sc.seeds.clear();
    for (const json& v : s) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError("seeds: expected nonnegative integers");
      }
      sc.seeds.push_back(v.get<std::uint64_t>());
    }
  }
  if (root.contains("slots")) sc.slots = static_cast<std::uint32_t>(get_count(root["slots"], "slots"));

  if (root.contains("events")) {
    const json& ev = root["events"];
    if (!ev.is_array()) throw ConfigError("events: expected an array");
    for (std::size_t i = 0; i < ev.size(); ++i) {
      const std::string w = "events[" + std::to_string(i) + "]";
      only_keys(ev[i], w, {"slot", "from", "to", "index", "erasure", "node_leave", "node_join"});
      EventSpec e;
      e.slot = static_cast<std::uint32_t>(get_count(required(ev[i], w, "slot"), w + ".slot"));
      if (ev[i].contains("node_leave")) {
        e.kind = EventSpec::Kind::NodeLeave;
        e.node = get_as<std::string>(ev[i]["node_leave"], w + ".node_leave");
      } else if (ev[i].contains("node_join")) {
        e.kind = EventSpec::Kind::NodeJoin;
        e.node = get_as<std::string>(ev[i]["node_join"], w + ".node_join");
      } else {
        e.kind = EventSpec::Kind::LinkErasure;
        e.from = get_as<std::string>(required(ev[i], w, "from"), w + ".from");
        e.to = get_as<std::string>(required(ev[i], w, "to"), w + ".to");
        e.erasure = get_as<double>(required(ev[i], w, "erasure"), w + ".erasure");
        if (ev[i].contains("index")) e.index = get_count(ev[i]["index"], w + ".index");
      }
      sc.events.push_back(std::move(e));
    }
  }

  if (root.contains("output")) {
    only_keys(root["output"], "output", {"dir"});
    if (root["output"].contains("dir")) sc.output_dir = get_as<std::string>(root["output"]["dir"], "output.dir");
  }
  validate(sc);
  return sc;
}

}  // namespace

void validate(const Scenario& sc) {
  const ProtocolParams& p = sc.protocol.params;
  if (p.rtt < 2) throw ConfigError("protocol.rtt: must be at least 2");
  if (p.max_window == 0) throw ConfigError("protocol.max_window: must be positive");
  if (p.rate_window == 0) throw ConfigError("protocol.rate_window: must be positive");
  if (sc.services.empty()) throw ConfigError("services: at least one service is required");
  if (sc.seeds.empty()) throw ConfigError("seeds: at least one seed is required");
  if (sc.slots == 0) throw ConfigError("slots: must be positive");

  std::map<std::string, NodeRole> roles;
  for (const NodeSpec& n : sc.nodes) {
    if (!roles.emplace(n.id, n.role).second) throw ConfigError("topology.nodes: duplicate id '" + n.id + "'");
  }
  auto known = [&](const std::string& id, const std::string& where) {
    if (!roles.contains(id)) throw ConfigError(where + ": unknown node '" + id + "'");
  };
  for (const LinkSpec& l : sc.links) {
    known(l.from, "topology.links");
    known(l.to, "topology.links");
    if (l.from == l.to) throw ConfigError("topology.links: self-loop on '" + l.from + "'");
    if (!(l.erasure >= 0.0 && l.erasure < 1.0)) {
      throw ConfigError("topology.links " + l.from + "->" + l.to + ": erasure must lie in [0, 1)");
    }
    if (l.count == 0) throw ConfigError("topology.links " + l.from + "->" + l.to + ": count must be positive");
  }
  for (const ServiceSpec& s : sc.services) {
    known(s.src, "services");
    known(s.dst, "services");
    if (roles[s.src] != NodeRole::Enc) throw ConfigError("services: source '" + s.src + "' must have role enc");
    if (roles[s.dst] != NodeRole::Dec) throw ConfigError("services: destination '" + s.dst + "' must have role dec");
    if (s.packets == 0) throw ConfigError("services: packets must be positive");
    if (s.payload_bytes == 0) throw ConfigError("services: payload_bytes must be positive");
    if (!(s.priority > 0.0)) throw ConfigError("services: priority must be positive");
  }
  for (const auto& [node, mode] : sc.protocol.mixing_overrides) {
    (void)mode;
    known(node, "protocol.mixing_overrides");
  }
  for (const EventSpec& e : sc.events) {
    if (e.kind == EventSpec::Kind::LinkErasure) {
      known(e.from, "events");
      known(e.to, "events");
      if (!(e.erasure >= 0.0 && e.erasure < 1.0)) throw ConfigError("events: erasure must lie in [0, 1)");
    } else {
      known(e.node, "events");
    }
  }
  (void)build_topology(sc);  // VN structure checks
}

Topology build_topology(const Scenario& sc) {
  Topology t;
  for (const NodeSpec& n : sc.nodes) t.add_node(n.id, n.role);
  for (const LinkSpec& l : sc.links) {
    const std::size_t a = *t.find_node(l.from);
    const std::size_t b = *t.find_node(l.to);
    for (std::size_t k = 0; k < l.count; ++k) t.add_link(a, b, l.erasure);
  }
  for (const VnSpec& v : sc.vns) {
    VirtualNetwork vn{v.name, {}};
    for (const std::string& id : v.nodes) {
      const auto n = t.find_node(id);
      if (!n) throw ConfigError("topology.vns '" + v.name + "': unknown node '" + id + "'");
      vn.nodes.push_back(*n);
    }
    t.add_vn(std::move(vn));
  }
  return t;
}

Scenario parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte == 0 ? 0 : e.byte - 1;
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (const auto pos = what.find("parse error"); pos != std::string::npos) what = what.substr(pos);
    throw ScenarioParseError(line, col, what);
  }
  return from_json(root);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace acrlnc
