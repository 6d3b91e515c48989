#include "acrlnc/path_opt.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "acrlnc/errors.hpp"

namespace acrlnc {

double associated_rate(std::span<const double> segment, RateAggregate agg) {
  if (segment.empty()) throw InvalidInput("associated_rate: empty segment");
  if (agg == RateAggregate::Min) return *std::min_element(segment.begin(), segment.end());
  return std::accumulate(segment.begin(), segment.end(), 0.0);
}

Permutation identity_permutation(std::size_t n) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  return p;
}

bool is_bijection(const Permutation& sigma) {
  std::vector<bool> hit(sigma.size(), false);
  for (std::size_t j : sigma) {
    if (j >= sigma.size() || hit[j]) return false;
    hit[j] = true;
  }
  return true;
}

Permutation inverse(const Permutation& sigma) {
  Permutation inv(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) inv.at(sigma[i]) = i;
  return inv;
}

namespace {

std::vector<std::size_t> rank_order(std::span<const double> v, std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto at = [&](std::size_t i) { return i < v.size() ? v[i] : 0.0; };
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return at(a) > at(b); });
  return idx;
}

}  // namespace

Permutation natural_match(std::span<const double> in, std::span<const double> out) {
  const std::size_t n = std::max(in.size(), out.size());
  const auto in_rank = rank_order(in, n);
  const auto out_rank = rank_order(out, n);
  Permutation sigma(n);
  for (std::size_t k = 0; k < n; ++k) sigma[in_rank[k]] = out_rank[k];
  return sigma;
}

double matching_objective(std::span<const double> in, std::span<const double> out, const Permutation& sigma) {
  double total = 0.0;
  for (std::size_t i = 0; i < sigma.size() && i < in.size(); ++i) {
    if (sigma[i] < out.size()) total += std::min(in[i], out[sigma[i]]);
  }
  return total;
}

PathSplit bit_fill_source(std::span<const double> rates, double delta) {
  if (rates.empty()) throw InvalidInput("bit_fill_source: no paths");
  const std::size_t n = rates.size();
  const double total = std::accumulate(rates.begin(), rates.end(), 0.0);
  const double tol = 1e-9 * std::max(1.0, total);

  PathSplit split;
  if (!(delta > 0.0)) {
    split.type1 = identity_permutation(n);
    return split;
  }
  if (delta > total + tol) {
    split.type2 = identity_permutation(n);
    return split;
  }

  std::uint64_t best = (std::uint64_t{1} << n) - 1;
  if (n <= kExactBitFillLimit) {
    const std::uint64_t count = std::uint64_t{1} << n;
    std::vector<double> sum(count, 0.0);
    double best_sum = total;
    for (std::uint64_t mask = 1; mask < count; ++mask) {
      sum[mask] = sum[mask & (mask - 1)] + rates[std::countr_zero(mask)];
      if (sum[mask] + tol < delta) continue;
      if (sum[mask] < best_sum - tol) {
        best = mask;
        best_sum = sum[mask];
        continue;
      }
      if (sum[mask] > best_sum + tol) continue;
      const int pc = std::popcount(mask);
      const int best_pc = std::popcount(best);
      if (pc < best_pc) {
        best = mask;
        best_sum = sum[mask];
      } else if (pc == best_pc) {
        const std::uint64_t diff = mask ^ best;
        if (diff != 0 && (mask & diff & (~diff + 1)) != 0) {
          best = mask;
          best_sum = sum[mask];
        }
      }
    }
  } else {
    std::vector<std::size_t> order = identity_permutation(n);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rates[a] < rates[b]; });
    best = 0;
    double acc = 0.0;
    for (std::size_t i : order) {
      if (acc + tol >= delta) break;
      best |= std::uint64_t{1} << i;
      acc += rates[i];
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    ((best >> i) & 1U ? split.type2 : split.type1).push_back(i);
  }
  return split;
}

PathSplit bit_fill_vn(std::span<const double> in_type2_rates, std::span<const double> out_rates,
                      bool new_inputs_present) {
  if (out_rates.empty()) throw InvalidInput("bit_fill_vn: no outgoing paths");
  if (!new_inputs_present) {
    PathSplit split;
    split.type2 = identity_permutation(out_rates.size());
    return split;
  }
  const double demand = std::accumulate(in_type2_rates.begin(), in_type2_rates.end(), 0.0);
  return bit_fill_source(out_rates, demand);
}

std::size_t RouteLayout::follow(std::size_t from, std::size_t p, std::size_t h) const {
  std::size_t slot = p;
  for (std::size_t k = from + 1; k <= h; ++k) slot = sigma.at(k).at(slot);
  return slot;
}

std::vector<GlobalPath> compose_paths(const RouteLayout& layout, std::span<const double> link_rates,
                                      std::size_t first_hop, std::size_t last_hop) {
  std::vector<GlobalPath> out;
  if (first_hop >= last_hop || first_hop >= layout.hops.size()) return out;
  const std::size_t n = layout.hops[first_hop].size();
  for (std::size_t p = 0; p < n; ++p) {
    GlobalPath g;
    g.rate = std::numeric_limits<double>::infinity();
    std::size_t slot = p;
    for (std::size_t h = first_hop; h < last_hop; ++h) {
      if (h > first_hop) slot = layout.sigma.at(h).at(slot);
      const std::size_t link = layout.hops.at(h).at(slot);
      g.links.push_back(link);
      g.rate = std::min(g.rate, link_rates[link]);
    }
    out.push_back(std::move(g));
  }
  return out;
}

void balance_vn(RouteLayout& layout, std::span<const double> link_rates, std::size_t first, std::size_t last,
                RateAggregate agg) {
  const std::size_t n_nodes = layout.nodes.size();
  for (std::size_t pos = std::max<std::size_t>(first, 1); pos <= last && pos + 1 < n_nodes; ++pos) {
    if (layout.roles[pos] != NodeRole::ReEnc) continue;
    const std::size_t p = layout.hops[pos].size();

    std::vector<double> in_rates(p);
    for (std::size_t s = 0; s < p; ++s) {
      std::vector<double> seg{link_rates[layout.hops[pos - 1][s]]};
      std::size_t slot = s;
      for (std::size_t k = pos - 1; k > 0 && layout.roles[k] == NodeRole::Relay; --k) {
        slot = inverse(layout.sigma[k])[slot];
        seg.push_back(link_rates[layout.hops[k - 1][slot]]);
      }
      in_rates[s] = associated_rate(seg, agg);
    }

    std::vector<double> out_rates(p);
    for (std::size_t s = 0; s < p; ++s) {
      std::vector<double> seg{link_rates[layout.hops[pos][s]]};
      std::size_t slot = s;
      for (std::size_t k = pos + 1; k + 1 < n_nodes && layout.roles[k] == NodeRole::Relay; ++k) {
        slot = layout.sigma[k][slot];
        seg.push_back(link_rates[layout.hops[k][slot]]);
      }
      out_rates[s] = associated_rate(seg, agg);
    }

    layout.sigma[pos] = natural_match(in_rates, out_rates);
  }
}

double chained_throughput(const std::vector<std::vector<double>>& hop_rates, const std::vector<Permutation>& sigma) {
  if (hop_rates.empty()) return 0.0;
  if (sigma.size() + 1 != hop_rates.size()) throw InvalidInput("chained_throughput: need one matching per inner node");
  double total = 0.0;
  for (std::size_t p = 0; p < hop_rates.front().size(); ++p) {
    double r = hop_rates.front()[p];
    std::size_t slot = p;
    for (std::size_t h = 1; h < hop_rates.size(); ++h) {
      slot = sigma[h - 1].at(slot);
      r = std::min(r, hop_rates[h].at(slot));
    }
    total += r;
  }
  return total;
}

}  // namespace acrlnc
