#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "acrlnc/path_opt.hpp"
#include "acrlnc/topology.hpp"

namespace acrlnc {

using ServiceId = std::uint32_t;

// Flags a link whose recent delivery rate departs from its long-run mean.
// The recent window holds 3*RTT observations; a change fires when the window
// is full and |recent mean - baseline mean| > max(1.5 sigma, 0.01), where
// the baseline accumulates every observation since the last change.
class ChangeDetector {
 public:
  explicit ChangeDetector(std::size_t window);

  // Returns true when this observation completes a detected change.
  bool observe(bool delivered);

  double recent_rate() const;
  double baseline_rate() const;
  double baseline_sigma() const;
  std::size_t window() const { return window_; }

  static constexpr double kSigmaFactor = 1.5;
  static constexpr double kFloor = 0.01;

 private:
  std::size_t window_;
  std::deque<bool> recent_;
  std::size_t recent_hits_ = 0;
  std::uint64_t n_ = 0;
  std::uint64_t hits_ = 0;
};

struct Gprt {
  std::vector<GlobalPath> paths;
};

struct ServiceInfo {
  ServiceId id = 0;
  std::size_t src = 0;
  std::size_t dst = 0;
  double priority = 1.0;
  bool suspended = false;
  std::string error;
  RouteLayout layout;
  std::map<std::size_t, Gprt> vn_gprt;  // keyed by VN index
  Gprt gprt;                            // end to end, read by the Source Net
};

// Agent messages. Replies are snapshots.
namespace msg {
struct GetRt { std::size_t src; std::size_t dst; };
struct GetFt { std::size_t net_node; };
struct GetGprt { ServiceId service; std::optional<std::size_t> vn; };
struct PutLprt { ServiceId service; std::size_t node; Permutation sigma; };
struct GetRtt {};
struct GetLinkRates {};
struct EventLinkChange { std::size_t link; double rate; };
struct EventTopoChange { std::size_t node; bool up; };

struct RtReply { std::optional<std::vector<std::size_t>> route; };
struct FtReply { std::map<ServiceId, double> weights; };
struct GprtReply { bool found = false; Gprt gprt; };
struct Ack { bool ok = true; std::string error; };
struct RttReply { std::uint32_t rtt; };
struct LinkRatesReply { std::vector<double> rates; };
struct RecomputeReply { std::vector<ServiceId> affected; };
}  // namespace msg

using Request = std::variant<msg::GetRt, msg::GetFt, msg::GetGprt, msg::PutLprt, msg::GetRtt, msg::GetLinkRates,
                             msg::EventLinkChange, msg::EventTopoChange>;
using Reply = std::variant<msg::RtReply, msg::FtReply, msg::GprtReply, msg::Ack, msg::RttReply,
                           msg::LinkRatesReply, msg::RecomputeReply>;

// In-process SDN controller holding RT, FT, GPRT and LPRT tables. All
// mutating entry points serialize on one mutex.
class Controller {
 public:
  Controller(Topology topo, std::uint32_t rtt, RateAggregate aggregate = RateAggregate::Sum);

  // Throws NoPathError when dst is unreachable and InvalidInput on a
  // nonpositive priority or unknown node.
  ServiceId init_service(std::size_t src, std::size_t dst, double priority = 1.0);
  // Returns false for an unknown service.
  bool terminate_service(ServiceId id);
  std::vector<ServiceId> on_link_change(std::size_t link, double new_rate);
  std::vector<ServiceId> on_topology_change(std::size_t node, bool up);

  Reply handle(const Request& req);

  // Snapshot accessors.
  std::vector<ServiceId> services() const;
  std::optional<ServiceInfo> service(ServiceId id) const;
  std::map<std::size_t, std::map<ServiceId, double>> fairness_tables() const;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> routing_table() const;
  std::vector<double> link_rates() const;
  Topology topology() const;
  std::uint32_t rtt() const { return rtt_; }

 private:
  void rebuild();
  void allocate_links();
  void identify_and_balance(ServiceInfo& svc, bool keep_lprt);
  std::vector<std::size_t> net_nodes(const ServiceInfo& svc) const;
  std::vector<std::pair<std::size_t, std::size_t>> vn_segments(const RouteLayout& layout) const;

  mutable std::mutex mu_;
  Topology topo_;
  std::uint32_t rtt_;
  RateAggregate aggregate_;
  std::vector<double> rates_;
  std::map<ServiceId, ServiceInfo> services_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> rt_;
  std::map<std::size_t, std::map<ServiceId, double>> ft_;
  ServiceId next_id_ = 1;
};

}  // namespace acrlnc
