#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "acrlnc/topology.hpp"

namespace acrlnc {

enum class RateAggregate { Sum, Min };

// Aggregate rate of the links between two consecutive ReEnc nodes.
// Throws InvalidInput on an empty segment.
double associated_rate(std::span<const double> segment, RateAggregate agg = RateAggregate::Sum);

// sigma[i] is the outgoing slot matched to incoming slot i.
using Permutation = std::vector<std::size_t>;

Permutation identity_permutation(std::size_t n);
bool is_bijection(const Permutation& sigma);
Permutation inverse(const Permutation& sigma);

// Sorts both sides by descending rate (ties: lower slot first) and pairs
// equal ranks. With unequal sizes the shorter side is padded with zero-rate
// sentinels; the result then has max(in, out) entries and indices past the
// real side denote sentinels.
Permutation natural_match(std::span<const double> in, std::span<const double> out);

// sum_i min(in[i], out[sigma[i]]), sentinels counting as zero.
double matching_objective(std::span<const double> in, std::span<const double> out, const Permutation& sigma);

struct PathSplit {
  std::vector<std::size_t> type1;  // NEW
  std::vector<std::size_t> type2;  // REP
};

// Largest sum of type-1 rates such that the type-2 rates sum to at least
// delta. Ties go to fewer type-2 paths, then lexicographically lowest type-2
// indices. Exact for up to kExactBitFillLimit paths, greedy beyond.
inline constexpr std::size_t kExactBitFillLimit = 20;
PathSplit bit_fill_source(std::span<const double> rates, double delta);

// VN Net variant: the demand is the rate of the incoming type-2 paths. With
// no NEW input this slot every outgoing path is type 2.
PathSplit bit_fill_vn(std::span<const double> in_type2_rates, std::span<const double> out_rates,
                      bool new_inputs_present = true);

// Per-hop link assignment of one service along its route. hops[h][s] is the
// link in slot s of hop h (route[h] -> route[h+1]); sigma[i] is the matching
// at route position i (empty at both ends).
struct RouteLayout {
  std::vector<std::size_t> nodes;
  std::vector<NodeRole> roles;
  std::vector<std::vector<std::size_t>> hops;
  std::vector<Permutation> sigma;

  std::size_t paths() const { return hops.empty() ? 0 : hops.front().size(); }
  // Slot used at hop h by the path that starts in slot p of hop `from`.
  std::size_t follow(std::size_t from, std::size_t p, std::size_t h) const;
};

struct GlobalPath {
  std::vector<std::size_t> links;
  double rate = 0.0;
};

// Paths over hops [first_hop, last_hop), one per slot of first_hop, with rate
// equal to the bottleneck link rate.
std::vector<GlobalPath> compose_paths(const RouteLayout& layout, std::span<const double> link_rates,
                                      std::size_t first_hop, std::size_t last_hop);

// Natural matching at every ReEnc node of route positions [first, last],
// in order. Relay matchings stay as they are and fold into associated rates.
void balance_vn(RouteLayout& layout, std::span<const double> link_rates, std::size_t first, std::size_t last,
                RateAggregate agg = RateAggregate::Sum);

// Sum of bottleneck rates of the end-to-end paths of hop_rates chained by
// the matchings (one per inner node).
double chained_throughput(const std::vector<std::vector<double>>& hop_rates, const std::vector<Permutation>& sigma);

}  // namespace acrlnc
