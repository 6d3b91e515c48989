#include <doctest.h>

#include <deque>
#include <vector>

#include "acrlnc/coding.hpp"
#include "acrlnc/errors.hpp"
#include "acrlnc/protocol.hpp"
#include "acrlnc/rng.hpp"

using namespace acrlnc;

namespace {

Encoder filled_encoder(std::size_t max_window, std::size_t packets) {
  Encoder e(PacketHeader{}, max_window, 1);
  for (PacketIndex i = 1; i <= packets; ++i) e.push(InfoPacket{i, Bytes{static_cast<std::uint8_t>(i)}});
  return e;
}

WindowState state_of(const Encoder& e) { return WindowState{e.window(), e.w_max(), e.unsent()}; }

struct LoopStats {
  std::size_t slots = 0;
  std::size_t delivered = 0;
  std::size_t violations = 0;
};

// Source, P erasure paths and a destination with feedback arriving `delay`
// slots after the data. Checks budget invariants every slot.
LoopStats run_loop(std::uint64_t seed, std::vector<double> eps, std::size_t packets, std::uint32_t slots,
                   ProtocolParams params) {
  Rng rng(seed);
  const std::size_t n = eps.size();
  std::vector<double> prior;
  for (double e : eps) prior.push_back(1.0 - e);
  SourceBudget budget(params, prior);
  auto enc = filled_encoder(params.max_window, packets);
  Decoder dec(FeedbackMode::Cumulative, 1);
  std::deque<FeedbackMessage> pending;
  LoopStats st;
  const std::uint32_t delay = params.rtt;

  for (std::uint32_t slot = 1; slot <= slots && dec.delivered_count() < packets; ++slot) {
    while (!pending.empty() && pending.front().emit_slot + delay <= slot) {
      budget.on_feedback(pending.front());
      enc.acknowledge(pending.front().w_min_ack);
      pending.pop_front();
    }
    const auto ws = state_of(enc);
    const auto plan = budget.plan(slot, ws);
    const bool full = ws.unsent > 0 && ws.w < params.max_window;
    if (ws.w > 0 && full && plan.n_new + plan.n_rep != n) ++st.violations;
    if (plan.had_feedback && ws.w > params.max_window && plan.n_new > 0) ++st.violations;
    for (std::size_t p = 0; p < n; ++p) {
      if (plan.kinds[p] == RepKind::FbFec && !(plan.delta > 0.0)) ++st.violations;
    }
    const auto pkts = enc.encode_batch(plan.n_new, plan.n_rep, slot);
    budget.commit(slot, plan, enc.w_max());
    const auto alloc = allocate_packets(pkts, plan.types);

    FeedbackMessage fb;
    fb.path_status.assign(n, PathStatus::Idle);
    for (const auto& a : alloc) {
      const bool lost = rng.bernoulli(eps[a.path]);
      fb.path_status[a.path] = lost ? PathStatus::Erased : PathStatus::Received;
      if (!lost) dec.ingest(*a.packet);
    }
    const auto base = dec.feedback(slot);
    fb.w_min_ack = base.w_min_ack;
    fb.dof_count = base.dof_count;
    fb.emit_slot = slot;
    fb.data_slot = slot;
    pending.push_back(fb);
    for (std::size_t p = 0; p < n; ++p) {
      if (budget.fec_initialized(p) != budget.fec_paid(p) + budget.fec_debt(p)) ++st.violations;
    }
    st.slots = slot;
  }
  st.delivered = dec.delivered_count();
  return st;
}

}  // namespace

TEST_CASE("retransmission criterion") {
  CHECK(update_delta(3, 3, 0, 4) == doctest::Approx(0.0));
  CHECK(update_delta(3, 2, 0, 4) == doctest::Approx(2.0));
  CHECK(update_delta(4, 2, 1, 4) <= 0.0);
  CHECK(update_delta(2, 0, 0, 2) == doctest::Approx(2.0));  // a_dg = 0 read as 1
  for (int k = 1; k <= 5; ++k) CHECK(update_delta(3.0 * k, 2.0 * k, 0.2, 3) == doctest::Approx(update_delta(3, 2, 0.2, 3)));
}

TEST_CASE("FEC count rounding") {
  CHECK(fec_count(0.25, 8, FecRounding::HalfUp) == 2);
  CHECK(fec_count(0.25, 8, FecRounding::Ceil) == 2);
  CHECK(fec_count(0.1, 9, FecRounding::HalfUp) == 1);
  CHECK(fec_count(0.05, 9, FecRounding::HalfUp) == 0);
  CHECK(fec_count(0.05, 9, FecRounding::Ceil) == 1);
  CHECK(fec_count(0.0, 9, FecRounding::Ceil) == 0);
}

TEST_CASE("rate estimator") {
  RateEstimator est(2, 64);
  CHECK(est.rate(0, 0.8) == doctest::Approx(0.8));
  for (int i = 0; i < 20; ++i) est.observe(0, i % 4 == 0 ? PathStatus::Erased : PathStatus::Received);
  est.observe(0, PathStatus::Idle);
  CHECK(est.samples(0) == 20);
  CHECK(est.rate(0, 0.1) == doctest::Approx(0.75));
  for (int i = 0; i < 5; ++i) est.observe(1, PathStatus::Received);
  CHECK(est.rate(1, 0.2) == doctest::Approx(1.0));
  for (int i = 0; i < 70; ++i) est.observe(1, PathStatus::Erased);
  CHECK(est.samples(1) == 64);
  CHECK(est.rate(1, 0.5) == doctest::Approx(RateEstimator::kMinRate));
  CHECK_THROWS_AS(RateEstimator(1, 0), InvalidInput);
}

TEST_CASE("rate estimator converges on a stationary erasure channel") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    RateEstimator est(1, 500);
    for (int i = 0; i < 500; ++i) est.observe(0, rng.bernoulli(0.2) ? PathStatus::Erased : PathStatus::Received);
    CHECK(est.rate(0, 0.0) == doctest::Approx(0.8).epsilon(0.0625));
  }
}

TEST_CASE("first slot without feedback sends all NEW") {
  ProtocolParams params;
  SourceBudget b(params, {0.9, 0.9, 0.9, 0.9});
  auto e = filled_encoder(params.max_window, 100);
  const auto plan = b.plan(1, state_of(e));
  CHECK_FALSE(plan.had_feedback);
  CHECK(plan.n_new == 4);
  CHECK(plan.n_rep == 0);
}

TEST_CASE("window over the limit sends all REP") {
  ProtocolParams params;
  params.max_window = 40;
  SourceBudget b(params, {0.9, 0.9, 0.9, 0.9});
  FeedbackMessage fb;
  fb.w_min_ack = 1;
  b.on_feedback(fb);
  const auto plan = b.plan(20, WindowState{41, 41, 100});
  CHECK(plan.n_new == 0);
  CHECK(plan.n_rep == 4);
  for (auto k : plan.kinds) CHECK(k == RepKind::SizeLimit);
}

TEST_CASE("end of window opens a generation of FEC debt") {
  ProtocolParams params;
  params.rtt = 9;
  SourceBudget b(params, {0.75});
  auto e = filled_encoder(params.max_window, 100);
  for (std::uint32_t slot = 1; slot <= 8; ++slot) {
    const auto plan = b.plan(slot, state_of(e));
    REQUIRE(plan.n_new == 1);
    e.encode_batch(plan.n_new, plan.n_rep, slot);
    b.commit(slot, plan, e.w_max());
  }
  const auto plan = b.plan(9, state_of(e));
  CHECK(b.fec_initialized(0) == 2);
  CHECK(plan.n_rep == 1);
  CHECK(plan.kinds[0] == RepKind::Fec);
  CHECK(b.fec_debt(0) == 1);
  e.encode_batch(plan.n_new, plan.n_rep, 9);
  b.commit(9, plan, e.w_max());
  const auto next = b.plan(10, state_of(e));
  CHECK(next.kinds[0] == RepKind::Fec);
  CHECK(b.fec_debt(0) == 0);
}

TEST_CASE("budget invariants hold in closed loop") {
  ProtocolParams params;
  params.rtt = 6;
  params.max_window = 24;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    Rng pick(seed);
    std::vector<double> eps(1 + pick.below(4));
    for (auto& x : eps) x = 0.05 + 0.3 * pick.uniform();
    const auto st = run_loop(seed, eps, 300, 5000, params);
    CHECK(st.violations == 0);
    CHECK(st.delivered == 300);
  }
}

TEST_CASE("packet allocation pairs types with paths") {
  auto e = filled_encoder(10, 10);
  e.encode_batch(2, 0);
  const auto pkts = e.encode_batch(2, 1);  // REP first, then NEW
  const std::vector<PathType> types{PathType::New, PathType::New, PathType::Rep};
  const auto alloc = allocate_packets(pkts, types);
  REQUIRE(alloc.size() == 3);
  for (const auto& a : alloc) {
    CHECK((types[a.path] == PathType::Rep) == a.packet->is_rep());
    CHECK(decode_wire(a.wire).is_rep() == a.packet->is_rep());
  }
  CHECK(alloc[0].path == 2);

  const auto reps = e.encode_batch(0, 3);
  const std::vector<PathType> all_rep(3, PathType::Rep);
  CHECK(allocate_packets(reps, all_rep).size() == 3);
  CHECK_THROWS_AS(allocate_packets(reps, types), ContractViolation);
}

TEST_CASE("per-packet acknowledgements rebuild the cumulative view") {
  Rng rng(17);
  auto e = filled_encoder(16, 200);
  Decoder dec(FeedbackMode::PerPacket, 1);
  AckTracker tracker;
  std::uint64_t next_id = 1;
  for (std::uint32_t slot = 1; slot < 400 && dec.delivered_count() < 200; ++slot) {
    e.acknowledge(tracker.w_min_ack());
    const std::size_t room = e.max_window() - e.window();
    const std::size_t n_new = std::min<std::size_t>({2, room, e.unsent()});
    auto pkts = e.encode_batch(n_new, e.window() > 0 ? 1 : 0, slot);
    for (auto& p : pkts) {
      p.tx_id = next_id++;
      tracker.record_sent(p);
      if (!rng.bernoulli(0.3)) dec.ingest(p);
    }
    const auto fb = tracker.absorb(dec.feedback(slot));
    CHECK(fb.mode == FeedbackMode::Cumulative);
    CHECK(fb.w_min_ack == dec.next_index());
    CHECK(fb.dof_count == dec.dof_count());
  }
  CHECK(dec.delivered_count() == 200);
}
