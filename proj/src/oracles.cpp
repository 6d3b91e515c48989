#include "acrlnc/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "acrlnc/coding.hpp"
#include "acrlnc/path_opt.hpp"
#include "acrlnc/rng.hpp"

namespace acrlnc {

namespace {

void record(OracleResult& r, bool ok, const std::string& what) {
  if (ok) {
    ++r.passed;
    return;
  }
  if (r.failed++ == 0) r.first_failure = what;
}

double rate_draw(Rng& rng) { return 0.05 + 0.95 * rng.uniform(); }

}  // namespace

OracleResult oracle_matching(std::size_t instances, std::uint64_t seed) {
  OracleResult res;
  Rng rng(seed);
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t p = 1 + rng.below(6);
    std::vector<double> in(p);
    std::vector<double> out(p);
    for (auto& x : in) x = rate_draw(rng);
    for (auto& x : out) x = rate_draw(rng);

    Permutation perm = identity_permutation(p);
    double best = -1.0;
    do {
      best = std::max(best, matching_objective(in, out, perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double got = matching_objective(in, out, natural_match(in, out));
    record(res, std::fabs(got - best) <= 1e-9, "instance " + std::to_string(i) + ": natural " + std::to_string(got) +
                                                   " vs best " + std::to_string(best));
  }
  return res;
}

OracleResult oracle_bitfill(std::size_t instances, std::uint64_t seed) {
  OracleResult res;
  Rng rng(seed);
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t p = 1 + rng.below(10);
    std::vector<double> rates(p);
    for (auto& x : rates) x = rate_draw(rng);
    const double total = std::accumulate(rates.begin(), rates.end(), 0.0);
    const double delta = (rng.uniform() * 1.2 - 0.1) * total;

    double best = -1.0;
    for (std::uint32_t mask = 0; mask < (1U << p); ++mask) {
      double t1 = 0.0;
      double t2 = 0.0;
      for (std::size_t j = 0; j < p; ++j) ((mask >> j) & 1U ? t2 : t1) += rates[j];
      const bool feasible = delta <= 0.0 ? true : t2 + 1e-9 >= delta;
      if (feasible) best = std::max(best, t1);
    }
    const PathSplit split = bit_fill_source(rates, delta);
    double t1 = 0.0;
    double t2 = 0.0;
    for (std::size_t j : split.type1) t1 += rates[j];
    for (std::size_t j : split.type2) t2 += rates[j];
    bool ok;
    if (best < 0.0) {
      ok = split.type2.size() == p;  // infeasible demand saturates
    } else {
      ok = (delta <= 0.0 || t2 + 1e-9 >= delta) && std::fabs(t1 - best) <= 1e-9;
    }
    record(res, ok, "instance " + std::to_string(i) + ": objective " + std::to_string(t1) + " vs " + std::to_string(best));
  }
  return res;
}

OracleResult oracle_decode(std::size_t instances, std::uint64_t seed) {
  OracleResult res;
  Rng rng(seed);
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t w = 1 + rng.below(32);
    const std::size_t len = 1 + rng.below(64);
    Encoder enc(PacketHeader{}, w, rng.next());
    std::vector<Bytes> originals;
    for (PacketIndex k = 1; k <= w; ++k) {
      Bytes b(len);
      for (auto& x : b) x = rng.byte();
      originals.push_back(b);
      enc.push(InfoPacket{k, b});
    }
    Decoder dec(FeedbackMode::Cumulative, len);
    auto pkts = enc.encode_batch(w, 0);
    std::vector<InfoPacket> got;
    for (const auto& p : pkts) {
      auto r = dec.ingest(p);
      got.insert(got.end(), r.delivered.begin(), r.delivered.end());
    }
    // Random coefficients can be dependent; top up with repetitions.
    for (int extra = 0; got.size() < w && extra < 16; ++extra) {
      for (const auto& p : enc.encode_batch(0, 1)) {
        auto r = dec.ingest(p);
        got.insert(got.end(), r.delivered.begin(), r.delivered.end());
      }
    }
    bool ok = got.size() == w;
    for (std::size_t k = 0; ok && k < w; ++k) ok = got[k].index == k + 1 && got[k].payload == originals[k];
    record(res, ok, "instance " + std::to_string(i) + ": window " + std::to_string(w));
  }
  return res;
}

}  // namespace acrlnc
