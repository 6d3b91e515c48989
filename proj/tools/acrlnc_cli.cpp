#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "acrlnc/errors.hpp"
#include "acrlnc/oracles.hpp"
#include "acrlnc/scenario.hpp"
#include "acrlnc/simulator.hpp"

namespace fs = std::filesystem;
using namespace acrlnc;

namespace {

constexpr int kExitBadInput = 2;

struct RunArgs {
  std::string scenario;
  std::size_t seeds = 0;
  std::string out;
  std::string mixing;
  bool compare = false;
  std::string format = "summary";
  unsigned threads = 0;
};

std::vector<MetricsReport> run_all(const Scenario& sc, const std::vector<std::uint64_t>& seeds,
                                   std::optional<MixingMode> mixing, unsigned threads) {
  std::vector<MetricsReport> out(seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        out[i] = run(sc, seeds[i], RunOptions{mixing});
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(seeds.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.seed < b.seed; });
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f << content;
}

void write_reports(const fs::path& dir, const std::vector<MetricsReport>& reports, const std::string& tag) {
  std::string all = metrics_csv_header();
  std::string links = links_csv_header();
  for (const MetricsReport& r : reports) {
    const std::string stem = tag + "seed" + std::to_string(r.seed);
    write_file(dir / ("metrics_" + stem + ".csv"), metrics_csv_header() + metrics_csv_rows(r));
    write_file(dir / ("links_" + stem + ".csv"), links_csv_header() + links_csv_rows(r));
    all += metrics_csv_rows(r);
    links += links_csv_rows(r);
  }
  write_file(dir / ("metrics" + (tag.empty() ? "" : "_" + tag.substr(0, tag.size() - 1)) + ".csv"), all);
  write_file(dir / ("links" + (tag.empty() ? "" : "_" + tag.substr(0, tag.size() - 1)) + ".csv"), links);
}

std::string paired_table(const std::vector<MetricsReport>& sel, const std::vector<MetricsReport>& trad) {
  std::string out =
      "seed,service,selective_mean_delay,traditional_mean_delay,selective_max_delay,traditional_max_delay,"
      "selective_throughput,traditional_throughput\n";
  char buf[256];
  for (std::size_t i = 0; i < sel.size(); ++i) {
    for (std::size_t s = 0; s < sel[i].services.size(); ++s) {
      const auto& a = sel[i].services[s];
      const auto& b = trad[i].services[s];
      std::snprintf(buf, sizeof buf, "%llu,%zu,%.6f,%.6f,%u,%u,%.6f,%.6f\n",
                    static_cast<unsigned long long>(sel[i].seed), s, a.mean_delay, b.mean_delay, a.max_delay,
                    b.max_delay, a.throughput, b.throughput);
      out += buf;
    }
  }
  return out;
}

int cmd_run(const RunArgs& args) {
  Scenario sc;
  try {
    sc = load_scenario(args.scenario);
  } catch (const ScenarioParseError& e) {
    std::cerr << args.scenario << ":" << e.line() << ":" << e.column() << ": " << e.what() << "\n";
    return kExitBadInput;
  } catch (const ConfigError& e) {
    std::cerr << args.scenario << ": invalid scenario: " << e.what() << "\n";
    return kExitBadInput;
  }

  std::vector<std::uint64_t> seeds = sc.seeds;
  if (args.seeds > 0) {
    const std::uint64_t base = sc.seeds.front();
    seeds.clear();
    for (std::size_t k = 0; k < args.seeds; ++k) seeds.push_back(base + k);
  }
  std::optional<MixingMode> mixing;
  if (!args.mixing.empty()) mixing = parse_mixing(args.mixing);
  const unsigned threads = args.threads > 0 ? args.threads : std::max(1U, std::thread::hardware_concurrency());

  const fs::path out = args.out.empty() ? fs::path(sc.output_dir.empty() ? "out" : sc.output_dir) : fs::path(args.out);
  fs::create_directories(out);

  try {
    if (args.compare) {
      const auto sel = run_all(sc, seeds, MixingMode::Selective, threads);
      const auto trad = run_all(sc, seeds, MixingMode::Traditional, threads);
      write_reports(out, sel, "selective_");
      write_reports(out, trad, "traditional_");
      std::vector<MetricsReport> both = sel;
      both.insert(both.end(), trad.begin(), trad.end());
      const std::string summary = summary_json(both);
      const std::string table = paired_table(sel, trad);
      write_file(out / "summary.json", summary);
      write_file(out / "compare.csv", table);
      if (args.format == "csv") {
        std::cout << table;
      } else {
        std::cout << summary << table;
      }
      return 0;
    }

    const auto reports = run_all(sc, seeds, mixing, threads);
    write_reports(out, reports, "");
    const std::string summary = summary_json(reports);
    write_file(out / "summary.json", summary);
    if (args.format == "csv") {
      std::cout << metrics_csv_header();
      for (const auto& r : reports) std::cout << metrics_csv_rows(r);
    } else {
      std::cout << summary;
    }
  } catch (const ConfigError& e) {
    std::cerr << args.scenario << ": invalid scenario: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const NoPathError& e) {
    std::cerr << args.scenario << ": invalid topology: " << e.what() << "\n";
    return kExitBadInput;
  }
  return 0;
}

int cmd_oracle(const std::string& suite, std::size_t instances, std::uint64_t seed) {
  OracleResult r;
  if (suite == "matching") {
    r = oracle_matching(instances, seed);
  } else if (suite == "bitfill") {
    r = oracle_bitfill(instances, seed);
  } else {
    r = oracle_decode(instances, seed);
  }
  std::cout << suite << ": " << r.passed << " pass, " << r.failed << " fail\n";
  if (r.failed > 0) std::cout << "first failure: " << r.first_failure << "\n";
  return r.failed == 0 ? 0 : 1;
}

int cmd_mincut(const std::string& path) {
  Scenario sc;
  try {
    sc = load_scenario(path);
  } catch (const ScenarioParseError& e) {
    std::cerr << path << ":" << e.line() << ":" << e.column() << ": " << e.what() << "\n";
    return kExitBadInput;
  } catch (const ConfigError& e) {
    std::cerr << path << ": invalid scenario: " << e.what() << "\n";
    return kExitBadInput;
  }
  for (std::size_t i = 0; i < sc.services.size(); ++i) {
    std::cout << "service " << i << " (" << sc.services[i].src << " -> " << sc.services[i].dst
              << "): " << min_cut(sc, i) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AC-RLNC network coding simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario for each seed");
  run_cmd->add_option("scenario", run_args.scenario, "Scenario file (JSON)")->required();
  run_cmd->add_option("--seeds", run_args.seeds, "Run N seeds starting at the scenario's first seed");
  run_cmd->add_option("--out", run_args.out, "Output directory");
  run_cmd->add_option("--mixing", run_args.mixing, "Default re-encoder mixing")
      ->check(CLI::IsMember({"selective", "traditional", "none"}));
  run_cmd->add_flag("--compare-mixing", run_args.compare, "Run selective and traditional mixing on the same seeds");
  run_cmd->add_option("--format", run_args.format, "Standard output format")->check(CLI::IsMember({"csv", "summary"}));
  run_cmd->add_option("--threads", run_args.threads, "Worker threads (default: hardware concurrency)");

  std::string suite;
  std::size_t instances = 1000;
  std::uint64_t oracle_seed = 1;
  auto* oracle_cmd = app.add_subcommand("oracle", "Compare optimizers with exhaustive oracles");
  oracle_cmd->add_option("suite", suite, "matching | bitfill | decode")
      ->required()
      ->check(CLI::IsMember({"matching", "bitfill", "decode"}));
  oracle_cmd->add_option("--instances", instances, "Random instances to check");
  oracle_cmd->add_option("--seed", oracle_seed, "Generator seed");

  std::string mincut_path;
  auto* mincut_cmd = app.add_subcommand("mincut", "Print each service's min-cut rate");
  mincut_cmd->add_option("scenario", mincut_path, "Scenario file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitBadInput;
  }

  try {
    if (*run_cmd) return cmd_run(run_args);
    if (*oracle_cmd) {
      if (oracle_cmd->count("--instances") == 0 && suite == "decode") instances = 200;
      return cmd_oracle(suite, instances, oracle_seed);
    }
    if (*mincut_cmd) return cmd_mincut(mincut_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
