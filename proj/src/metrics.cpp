#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include <json.hpp>

#include "acrlnc/simulator.hpp"

namespace acrlnc {

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string metrics_csv_header() {
  return "seed,mixing,service,src,dst,packets,delivered,complete,slots,min_cut,throughput,mean_delay,max_delay,"
         "decode_errors,order_errors,new_sent,rep_sent,fec_sent,fbfec_sent\n";
}

std::string metrics_csv_rows(const MetricsReport& r) {
  std::string out;
  for (const ServiceMetrics& m : r.services) {
    out += std::to_string(r.seed) + ',' + to_string(r.mixing) + ',' + std::to_string(m.service) + ',' + m.src + ',' +
           m.dst + ',' + std::to_string(m.packets) + ',' + std::to_string(m.delivered) + ',' +
           (m.complete ? "1" : "0") + ',' + std::to_string(m.slots) + ',' + fixed(m.min_cut) + ',' +
           fixed(m.throughput) + ',' + fixed(m.mean_delay) + ',' + std::to_string(m.max_delay) + ',' +
           std::to_string(m.decode_errors) + ',' + std::to_string(m.order_errors) + ',' + std::to_string(m.new_sent) +
           ',' + std::to_string(m.rep_sent) + ',' + std::to_string(m.fec_sent) + ',' + std::to_string(m.fbfec_sent) +
           '\n';
  }
  return out;
}

std::string links_csv_header() { return "seed,link,from,to,erasure,sent,erased,realized_erasure\n"; }

std::string links_csv_rows(const MetricsReport& r) {
  std::string out;
  for (const LinkMetrics& l : r.links) {
    const double realized = l.sent > 0 ? static_cast<double>(l.erased) / static_cast<double>(l.sent) : 0.0;
    out += std::to_string(r.seed) + ',' + std::to_string(l.link) + ',' + l.from + ',' + l.to + ',' + fixed(l.erasure) +
           ',' + std::to_string(l.sent) + ',' + std::to_string(l.erased) + ',' + fixed(realized) + '\n';
  }
  return out;
}

std::string summary_json(const std::vector<MetricsReport>& reports) {
  nlohmann::ordered_json root;
  root["runs"] = reports.size();
  nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
  for (const MetricsReport& r : reports) seeds.push_back(r.seed);
  root["seeds"] = seeds;

  std::map<std::pair<std::string, std::size_t>, std::vector<const ServiceMetrics*>> groups;
  for (const MetricsReport& r : reports) {
    for (const ServiceMetrics& m : r.services) groups[{to_string(r.mixing), m.service}].push_back(&m);
  }

  nlohmann::ordered_json services = nlohmann::ordered_json::array();
  for (const auto& [key, ms] : groups) {
    double sum = 0.0;
    double sum_sq = 0.0;
    double delay = 0.0;
    std::uint32_t max_delay = 0;
    std::size_t complete = 0;
    std::size_t errors = 0;
    for (const ServiceMetrics* m : ms) {
      sum += m->throughput;
      sum_sq += m->throughput * m->throughput;
      delay += m->mean_delay;
      max_delay = std::max(max_delay, m->max_delay);
      complete += m->complete ? 1 : 0;
      errors += m->decode_errors + m->order_errors;
    }
    const double n = static_cast<double>(ms.size());
    const double mean = sum / n;
    const double var = ms.size() > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
    nlohmann::ordered_json s;
    s["mixing"] = key.first;
    s["service"] = key.second;
    s["src"] = ms.front()->src;
    s["dst"] = ms.front()->dst;
    s["throughput_mean"] = std::stod(fixed(mean));
    s["throughput_std"] = std::stod(fixed(std::sqrt(var)));
    s["mean_delay"] = std::stod(fixed(delay / n));
    s["max_delay"] = max_delay;
    s["complete_runs"] = complete;
    s["errors"] = errors;
    services.push_back(s);
  }
  root["services"] = services;
  return root.dump(2) + "\n";
}

}  // namespace acrlnc
