#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "acrlnc/scenario.hpp"

namespace acrlnc {

struct ServiceMetrics {
  std::size_t service = 0;  // index into Scenario::services
  std::string src;
  std::string dst;
  std::size_t packets = 0;
  std::size_t delivered = 0;
  bool complete = false;
  bool suspended = false;
  std::uint32_t slots = 0;   // slots counted for throughput
  double min_cut = 0.0;
  double throughput = 0.0;   // delivered / ((slots - one-way latency) * min_cut)
  double mean_delay = 0.0;
  std::uint32_t max_delay = 0;
  std::size_t decode_errors = 0;
  std::size_t order_errors = 0;
  std::size_t new_sent = 0;
  std::size_t rep_sent = 0;
  std::size_t fec_sent = 0;
  std::size_t fbfec_sent = 0;
  std::vector<std::uint32_t> delivery_slots;  // per delivered index, in order
};

struct LinkMetrics {
  std::size_t link = 0;
  std::string from;
  std::string to;
  double erasure = 0.0;  // configured at slot 0
  std::uint64_t sent = 0;
  std::uint64_t erased = 0;
};

struct MetricsReport {
  std::uint64_t seed = 0;
  MixingMode mixing = MixingMode::Selective;
  std::uint32_t slots_run = 0;
  bool complete = false;
  std::vector<ServiceMetrics> services;
  std::vector<LinkMetrics> links;
  std::size_t link_changes = 0;  // change-detector events sent to the controller
};

struct RunOptions {
  std::optional<MixingMode> mixing;  // overrides the scenario's default mode
};

// Simulates every service of the scenario until all packets are delivered
// or the slot budget runs out. A pure function of (scenario, seed, options).
MetricsReport run(const Scenario& sc, std::uint64_t seed, const RunOptions& opts = {});

// Max-flow value of a service's allocated links under their configured
// rates.
double min_cut(const Scenario& sc, std::size_t service);

struct FlowEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  double capacity = 0.0;
};

// Edmonds-Karp maximum flow.
double max_flow(std::size_t nodes, const std::vector<FlowEdge>& edges, std::size_t source, std::size_t sink);

// One-way latency in slots: ceil(RTT / 2).
inline std::uint32_t one_way_latency(std::uint32_t rtt) { return (rtt + 1) / 2; }

// Output formatting; the CSV schemas are stable.
std::string metrics_csv_header();
std::string metrics_csv_rows(const MetricsReport& r);
std::string links_csv_header();
std::string links_csv_rows(const MetricsReport& r);
// Aggregate over seeds (mean/stddev of throughput, mean/max delay) as JSON.
std::string summary_json(const std::vector<MetricsReport>& reports);

}  // namespace acrlnc
