#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "acrlnc/controller.hpp"
#include "acrlnc/errors.hpp"
#include "acrlnc/simulator.hpp"
#include "support.hpp"

using namespace acrlnc;
using acrlnc::testing::check_tables;
using acrlnc::testing::lifecycle_topology;

namespace {

double gprt_sum(const ServiceInfo& s) {
  double t = 0;
  for (const auto& g : s.gprt.paths) t += g.rate;
  return t;
}

}  // namespace

TEST_CASE("change detector") {
  ChangeDetector flat(30);
  for (int i = 0; i < 5000; ++i) CHECK_FALSE(flat.observe(true));
  ChangeDetector dead(30);
  for (int i = 0; i < 5000; ++i) CHECK_FALSE(dead.observe(false));

  ChangeDetector step(30);
  for (int i = 0; i < 300; ++i) step.observe(i % 10 != 0);
  bool fired = false;
  for (int i = 0; i < 60 && !fired; ++i) fired = step.observe(i % 5 == 0);
  CHECK(fired);
  CHECK(step.baseline_rate() < 0.5);

  Rng rng(3);
  ChangeDetector noisy(30);
  int fires = 0;
  for (int i = 0; i < 5000; ++i) fires += noisy.observe(rng.bernoulli(0.5)) ? 1 : 0;
  CHECK(fires == 0);
  CHECK_THROWS_AS(ChangeDetector(0), InvalidInput);
}

TEST_CASE("fairness shares across service lifecycle") {
  Controller c(lifecycle_topology(), 10);
  const auto a = c.init_service(0, 6);
  auto ft = c.fairness_tables();
  REQUIRE(ft.size() == 2);  // source and VN host
  for (const auto& [node, t] : ft) {
    REQUIRE(t.size() == 1);
    CHECK(t.at(a) == doctest::Approx(1.0));
  }
  const double alone = gprt_sum(*c.service(a));

  const auto b = c.init_service(1, 7);
  ft = c.fairness_tables();
  CHECK(ft.at(2).at(a) == doctest::Approx(0.5));
  CHECK(ft.at(2).at(b) == doctest::Approx(0.5));
  CHECK(ft.at(0).at(a) == doctest::Approx(1.0));
  CHECK(ft.at(1).at(b) == doctest::Approx(1.0));
  CHECK(check_tables(c).empty());
  const double shared = gprt_sum(*c.service(a));
  CHECK(shared <= alone + 1e-12);

  CHECK(c.terminate_service(b));
  ft = c.fairness_tables();
  CHECK(ft.at(2).at(a) == doctest::Approx(1.0));
  CHECK(gprt_sum(*c.service(a)) >= shared - 1e-12);
  CHECK_FALSE(c.terminate_service(b));

  CHECK(c.terminate_service(a));
  CHECK(c.fairness_tables().empty());
  CHECK(c.routing_table().empty());
  CHECK(c.services().empty());
}

TEST_CASE("priority weights are proportional") {
  Controller c(lifecycle_topology(), 10);
  const auto a = c.init_service(0, 6, 1.0);
  const auto b = c.init_service(1, 7, 3.0);
  const auto ft = c.fairness_tables();
  CHECK(ft.at(2).at(a) == doctest::Approx(0.25));
  CHECK(ft.at(2).at(b) == doctest::Approx(0.75));
  CHECK_THROWS_AS(c.init_service(0, 6, 0.0), InvalidInput);
  CHECK_THROWS_AS(c.init_service(0, 99), InvalidInput);
}

TEST_CASE("unreachable destination is rejected") {
  Topology t;
  t.add_node("S", NodeRole::Enc);
  t.add_node("D", NodeRole::Dec);
  Controller c(t, 10);
  CHECK_THROWS_AS(c.init_service(0, 1), NoPathError);
  CHECK(c.services().empty());
}

TEST_CASE("service across two VNs composes path rates by minimum") {
  Topology t;
  std::vector<std::size_t> n;
  n.push_back(t.add_node("S", NodeRole::Enc));
  for (const char* name : {"A1", "A2", "B1", "B2"}) n.push_back(t.add_node(name, NodeRole::ReEnc));
  n.push_back(t.add_node("D", NodeRole::Dec));
  const double eps[5][2] = {{0.1, 0.3}, {0.5, 0.05}, {0.2, 0.2}, {0.0, 0.4}, {0.1, 0.15}};
  for (std::size_t h = 0; h < 5; ++h) {
    for (double e : eps[h]) t.add_link(n[h], n[h + 1], e);
  }
  t.add_vn(VirtualNetwork{"VN1", {n[1], n[2]}});
  t.add_vn(VirtualNetwork{"VN2", {n[3], n[4]}});
  Controller c(t, 10);
  const auto id = c.init_service(n[0], n[5]);
  const auto svc = *c.service(id);
  CHECK(svc.vn_gprt.size() == 2);
  CHECK(c.fairness_tables().size() == 3);
  const auto rates = c.link_rates();
  REQUIRE(svc.gprt.paths.size() == 2);
  for (const auto& g : svc.gprt.paths) {
    double m = 1.0;
    for (auto l : g.links) m = std::min(m, rates[l]);
    CHECK(g.rate == doctest::Approx(m));
  }
  CHECK(check_tables(c).empty());
}

TEST_CASE("link rate drop re-matches the ReEnc node") {
  Topology t;
  const auto s = t.add_node("S", NodeRole::Enc);
  const auto r = t.add_node("R", NodeRole::ReEnc);
  const auto d = t.add_node("D", NodeRole::Dec);
  const auto best = t.add_link(s, r, 0.1);
  t.add_link(s, r, 0.4);
  t.add_link(r, d, 0.2);
  t.add_link(r, d, 0.5);
  t.add_vn(VirtualNetwork{"VN", {r}});
  Controller c(t, 10);
  const auto id = c.init_service(s, d);
  const auto before = c.service(id)->layout.sigma.at(1);
  CHECK(gprt_sum(*c.service(id)) == doctest::Approx(0.8 + 0.5));

  const auto affected = c.on_link_change(best, 0.2);
  CHECK(affected == std::vector<ServiceId>{id});
  const auto after = c.service(id)->layout.sigma.at(1);
  CHECK(after != before);
  CHECK(gprt_sum(*c.service(id)) == doctest::Approx(0.6 + 0.2));
  CHECK(c.on_link_change(best, 0.2).size() == 1);
  CHECK(check_tables(c).empty());
}

TEST_CASE("topology changes") {
  auto topo = lifecycle_topology();
  const auto leaf = topo.add_node("L", NodeRole::Relay);
  topo.add_link(5, leaf, 0.1);
  topo.set_node_up(leaf, false);
  Controller c(topo, 10);
  const auto id = c.init_service(0, 6);
  const auto route = c.service(id)->layout.nodes;
  CHECK(route == std::vector<std::size_t>{0, 2, 3, 5, 6});

  CHECK(c.on_topology_change(leaf, true).empty());

  CHECK(c.on_topology_change(3, false) == std::vector<ServiceId>{id});
  auto svc = *c.service(id);
  CHECK_FALSE(svc.suspended);
  CHECK(svc.layout.nodes == std::vector<std::size_t>{0, 2, 4, 5, 6});
  CHECK(check_tables(c).empty());

  c.on_topology_change(6, false);
  svc = *c.service(id);
  CHECK(svc.suspended);
  CHECK_FALSE(svc.error.empty());
  CHECK(check_tables(c).empty());

  c.on_topology_change(6, true);
  CHECK_FALSE(c.service(id)->suspended);
}

TEST_CASE("agent messages") {
  Controller c(lifecycle_topology(), 12);
  const auto id = c.init_service(0, 6);

  const auto rt = std::get<msg::RtReply>(c.handle(msg::GetRt{0, 6}));
  REQUIRE(rt.route);
  CHECK(rt.route->front() == 0);
  CHECK_FALSE(std::get<msg::RtReply>(c.handle(msg::GetRt{1, 7})).route);

  CHECK(std::get<msg::FtReply>(c.handle(msg::GetFt{0})).weights.at(id) == doctest::Approx(1.0));
  CHECK(std::get<msg::FtReply>(c.handle(msg::GetFt{7})).weights.empty());

  auto g = std::get<msg::GprtReply>(c.handle(msg::GetGprt{id, std::nullopt}));
  CHECK(g.found);
  CHECK(g.gprt.paths.size() == c.service(id)->layout.paths());
  CHECK(std::get<msg::GprtReply>(c.handle(msg::GetGprt{id, std::size_t{0}})).found);
  CHECK_FALSE(std::get<msg::GprtReply>(c.handle(msg::GetGprt{id + 7, std::nullopt})).found);

  const std::size_t p = c.service(id)->layout.paths();
  Permutation rev(p);
  std::iota(rev.rbegin(), rev.rend(), std::size_t{0});
  CHECK(std::get<msg::Ack>(c.handle(msg::PutLprt{id, 5, rev})).ok);
  CHECK(c.service(id)->layout.sigma.at(3) == rev);
  CHECK_FALSE(std::get<msg::Ack>(c.handle(msg::PutLprt{id, 5, Permutation(p, 0)})).ok);
  CHECK_FALSE(std::get<msg::Ack>(c.handle(msg::PutLprt{id, 0, rev})).ok);
  CHECK_FALSE(std::get<msg::Ack>(c.handle(msg::PutLprt{id + 7, 5, rev})).ok);
  CHECK(check_tables(c).empty());

  CHECK(std::get<msg::RttReply>(c.handle(msg::GetRtt{})).rtt == 12);
  CHECK(std::get<msg::LinkRatesReply>(c.handle(msg::GetLinkRates{})).rates.size() == c.topology().link_count());
  const auto rc = std::get<msg::RecomputeReply>(c.handle(msg::EventLinkChange{0, 0.3}));
  CHECK(rc.affected == std::vector<ServiceId>{id});
  const auto tc = std::get<msg::RecomputeReply>(c.handle(msg::EventTopoChange{7, false}));
  CHECK(tc.affected.empty());
}

TEST_CASE("random lifecycles keep tables consistent") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CAPTURE(seed);
    CHECK(acrlnc::testing::random_lifecycle(seed, 100).empty());
  }
}

TEST_CASE("max flow") {
  CHECK(max_flow(4, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 3, 1.0}, {2, 3, 0.5}}, 0, 3) == doctest::Approx(1.5));
  CHECK(max_flow(3, {{0, 1, 0.9}, {0, 1, 0.8}, {1, 2, 1.0}}, 0, 2) == doctest::Approx(1.0));
  CHECK(max_flow(3, {{0, 1, 0.9}}, 0, 2) == doctest::Approx(0.0));
  CHECK(max_flow(4, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}, {2, 3, 1.5}, {1, 3, 0.2}}, 0, 3) ==
        doctest::Approx(1.7));
}
