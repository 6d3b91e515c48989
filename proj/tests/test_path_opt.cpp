#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "acrlnc/errors.hpp"
#include "acrlnc/oracles.hpp"
#include "acrlnc/path_opt.hpp"
#include "acrlnc/rng.hpp"

using namespace acrlnc;

namespace {

std::vector<double> random_rates(Rng& rng, std::size_t n, double lo = 0.05, double hi = 1.0) {
  std::vector<double> r(n);
  for (auto& x : r) x = lo + (hi - lo) * rng.uniform();
  return r;
}

double best_matching(const std::vector<double>& in, const std::vector<double>& out) {
  Permutation p(in.size());
  std::iota(p.begin(), p.end(), 0);
  double best = -1;
  do {
    double s = 0;
    for (std::size_t i = 0; i < in.size(); ++i) s += std::min(in[i], out[p[i]]);
    best = std::max(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

struct Split {
  double new_rate = -1;
  bool feasible = false;
};

Split best_split(const std::vector<double>& rates, double delta) {
  Split best;
  const std::size_t n = rates.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double t1 = 0, t2 = 0;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1 ? t2 : t1) += rates[i];
    if (t2 + 1e-12 >= delta && t1 > best.new_rate) best = {t1, true};
  }
  return best;
}

double sum_at(const std::vector<double>& r, const std::vector<std::size_t>& idx) {
  double s = 0;
  for (auto i : idx) s += r[i];
  return s;
}

// 3-hop layout S - n1 - n2 - D with link id h * P + s on hop h, slot s.
RouteLayout three_hop(std::size_t p, NodeRole mid1, NodeRole mid2) {
  RouteLayout l;
  l.nodes = {0, 1, 2, 3};
  l.roles = {NodeRole::Enc, mid1, mid2, NodeRole::Dec};
  for (std::size_t h = 0; h < 3; ++h) {
    std::vector<std::size_t> slots(p);
    for (std::size_t s = 0; s < p; ++s) slots[s] = h * p + s;
    l.hops.push_back(slots);
  }
  l.sigma = {{}, identity_permutation(p), identity_permutation(p), {}};
  return l;
}

double layout_throughput(const RouteLayout& l, const std::vector<double>& rates) {
  double s = 0;
  for (const auto& g : compose_paths(l, rates, 0, 3)) s += g.rate;
  return s;
}

}  // namespace

TEST_CASE("associated rate aggregates") {
  const std::vector<double> one{0.7};
  CHECK(associated_rate(one) == doctest::Approx(0.7));
  const std::vector<double> seg{0.9, 0.6};
  CHECK(associated_rate(seg) == doctest::Approx(1.5));
  CHECK(associated_rate(seg, RateAggregate::Min) == doctest::Approx(0.6));
  CHECK_THROWS_AS(associated_rate(std::vector<double>{}), InvalidInput);
}

TEST_CASE("natural matching examples") {
  const std::vector<double> flat{0.5, 0.5, 0.5};
  CHECK(matching_objective(flat, flat, natural_match(flat, flat)) == doctest::Approx(1.5));

  const std::vector<double> in{1.3, 0.8, 0.5}, out{1.2, 1.0, 0.4};
  const auto sigma = natural_match(in, out);
  CHECK(sigma == Permutation{0, 1, 2});
  CHECK(matching_objective(in, out, sigma) == doctest::Approx(2.4));
  CHECK(best_matching(in, out) == doctest::Approx(2.4));

  const std::vector<double> single{0.3};
  CHECK(natural_match(single, single) == Permutation{0});
}

TEST_CASE("natural matching is a bijection and pads unequal sides") {
  const std::vector<double> in{0.2, 0.9}, out{0.5, 0.7, 0.1};
  const auto sigma = natural_match(in, out);
  CHECK(sigma.size() == 3);
  CHECK(is_bijection(sigma));
  CHECK(matching_objective(in, out, sigma) == doctest::Approx(0.9));
  CHECK(inverse(inverse(sigma)) == sigma);
}

TEST_CASE("natural matching equals exhaustive optimum") {
  Rng rng(21);
  for (int t = 0; t < 500; ++t) {
    const std::size_t p = 1 + rng.below(6);
    const auto in = random_rates(rng, p, 0.0, 2.0), out = random_rates(rng, p, 0.0, 2.0);
    const auto sigma = natural_match(in, out);
    REQUIRE(is_bijection(sigma));
    CHECK(matching_objective(in, out, sigma) == doctest::Approx(best_matching(in, out)));
  }
}

TEST_CASE("bit filling examples") {
  const std::vector<double> r{0.9, 0.8, 0.5};
  auto s = bit_fill_source(r, 0.6);
  CHECK(s.type2 == std::vector<std::size_t>{1});
  CHECK(s.type1 == std::vector<std::size_t>{0, 2});
  CHECK(sum_at(r, s.type1) == doctest::Approx(1.4));

  CHECK(bit_fill_source(r, 0.0).type2.empty());
  CHECK(bit_fill_source(r, -3.0).type1.size() == 3);
  CHECK(bit_fill_source(r, 5.0).type2.size() == 3);
  CHECK_THROWS_AS(bit_fill_source(std::vector<double>{}, 0.1), InvalidInput);
}

TEST_CASE("bit filling ties prefer fewer REP paths then lower indices") {
  const std::vector<double> r{0.5, 0.5, 0.5};
  CHECK(bit_fill_source(r, 0.5).type2 == std::vector<std::size_t>{0});
  const std::vector<double> q{0.6, 0.3, 0.3};
  CHECK(bit_fill_source(q, 0.6).type2 == std::vector<std::size_t>{0});
}

TEST_CASE("VN bit filling") {
  const std::vector<double> out{1.0, 0.5};
  CHECK(bit_fill_vn(std::vector<double>{}, out).type2.empty());
  CHECK(bit_fill_vn(std::vector<double>{0.5}, out).type2 == std::vector<std::size_t>{1});
  const auto none = bit_fill_vn(std::vector<double>{}, out, false);
  CHECK(none.type1.empty());
  CHECK(none.type2.size() == 2);
}

TEST_CASE("bit filling is feasible, optimal and scale invariant") {
  Rng rng(33);
  for (int t = 0; t < 500; ++t) {
    const std::size_t p = 1 + rng.below(10);
    const auto r = random_rates(rng, p);
    const double total = std::accumulate(r.begin(), r.end(), 0.0);
    const double delta = -0.2 + (total + 0.4) * rng.uniform();
    const auto s = bit_fill_source(r, delta);
    REQUIRE(s.type1.size() + s.type2.size() == p);
    const auto ref = best_split(r, delta);
    if (ref.feasible) {
      CHECK(sum_at(r, s.type2) + 1e-9 >= delta);
      CHECK(sum_at(r, s.type1) == doctest::Approx(ref.new_rate));
    } else {
      CHECK(s.type1.empty());
    }
    const double c = 0.25 + 4.0 * rng.uniform();
    std::vector<double> scaled(r);
    for (auto& x : scaled) x *= c;
    const auto sc = bit_fill_source(scaled, delta * c);
    CHECK(sc.type2 == s.type2);
  }
}

TEST_CASE("greedy fallback beyond the exact limit stays feasible") {
  Rng rng(4);
  const auto r = random_rates(rng, 30);
  const auto s = bit_fill_source(r, 3.0);
  CHECK(sum_at(r, s.type2) >= 3.0);
  CHECK(s.type1.size() + s.type2.size() == 30);
}

TEST_CASE("path composition with crossed and natural matching") {
  // hop 0: links 0 (0.9), 1 (0.4); hop 1: links 2 (0.4), 3 (0.9).
  const std::vector<double> rates{0.9, 0.4, 0.4, 0.9};
  RouteLayout l;
  l.nodes = {0, 1, 2};
  l.roles = {NodeRole::Enc, NodeRole::ReEnc, NodeRole::Dec};
  l.hops = {{0, 1}, {2, 3}};
  l.sigma = {{}, identity_permutation(2), {}};
  auto g = compose_paths(l, rates, 0, 2);
  REQUIRE(g.size() == 2);
  CHECK(g[0].rate == doctest::Approx(0.4));
  CHECK(g[1].rate == doctest::Approx(0.4));
  balance_vn(l, rates, 1, 1);
  g = compose_paths(l, rates, 0, 2);
  CHECK(g[0].rate == doctest::Approx(0.9));
  CHECK(g[1].rate == doctest::Approx(0.4));
  CHECK(g[0].links == std::vector<std::size_t>{0, 3});

  const std::vector<double> direct{0.9, 0.4};
  RouteLayout d;
  d.nodes = {0, 1};
  d.roles = {NodeRole::Enc, NodeRole::Dec};
  d.hops = {{0, 1}};
  d.sigma = {{}, {}};
  g = compose_paths(d, direct, 0, 1);
  CHECK(g[0].rate == doctest::Approx(0.9));
  CHECK(g[1].rate == doctest::Approx(0.4));
}

TEST_CASE("all-ReEnc balancing beats every joint matching") {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const std::size_t p = 1 + rng.below(4);
    const auto rates = random_rates(rng, 3 * p);
    auto l = three_hop(p, NodeRole::ReEnc, NodeRole::ReEnc);
    balance_vn(l, rates, 1, 2);
    const double got = layout_throughput(l, rates);
    double best = 0;
    Permutation a = identity_permutation(p);
    do {
      Permutation b = identity_permutation(p);
      do {
        auto m = l;
        m.sigma[1] = a;
        m.sigma[2] = b;
        best = std::max(best, layout_throughput(m, rates));
      } while (std::next_permutation(b.begin(), b.end()));
    } while (std::next_permutation(a.begin(), a.end()));
    CHECK(got == doctest::Approx(best));
  }
}

TEST_CASE("strict separation of the three relay configurations") {
  const std::vector<std::vector<double>> hop{{1.3, 0.8, 0.5}, {0.5, 1.3, 0.8}, {0.8, 0.5, 1.3}};
  std::vector<double> rates;
  for (const auto& h : hop) rates.insert(rates.end(), h.begin(), h.end());

  auto naive = three_hop(3, NodeRole::Relay, NodeRole::Relay);
  auto one_relay = three_hop(3, NodeRole::ReEnc, NodeRole::Relay);
  balance_vn(one_relay, rates, 1, 2, RateAggregate::Min);
  auto all = three_hop(3, NodeRole::ReEnc, NodeRole::ReEnc);
  balance_vn(all, rates, 1, 2);

  CHECK(layout_throughput(naive, rates) == doctest::Approx(1.5));
  CHECK(layout_throughput(one_relay, rates) == doctest::Approx(1.8));
  CHECK(layout_throughput(all, rates) == doctest::Approx(2.6));
  CHECK(chained_throughput(hop, {all.sigma[1], all.sigma[2]}) == doctest::Approx(2.6));
  CHECK_THROWS_AS(chained_throughput(hop, {all.sigma[1]}), InvalidInput);
}

TEST_CASE("library oracles agree") {
  const auto m = oracle_matching(200, 1);
  CHECK(m.failed == 0);
  CHECK(m.passed == 200);
  const auto b = oracle_bitfill(200, 2);
  CHECK(b.failed == 0);
  const auto d = oracle_decode(50, 3);
  CHECK(d.failed == 0);
}
