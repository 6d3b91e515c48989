#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "acrlnc/linear_system.hpp"
#include "acrlnc/packets.hpp"

namespace acrlnc {

enum class FecRounding { HalfUp, Ceil };

struct ProtocolParams {
  std::uint32_t rtt = 10;
  std::size_t max_window = 40;  // ō
  double threshold = 0.0;       // th
  std::size_t rate_window = 64; // W_est
  FecRounding fec_rounding = FecRounding::HalfUp;

  std::uint32_t generation() const { return rtt > 1 ? rtt - 1 : 1; }  // k
};

// P * (m_dg / a_dg - 1 - th), with a_dg = 0 read as 1.
double update_delta(double m_dg, double a_dg, double th, std::size_t paths);

// round(eps * k) under the configured rounding.
std::uint32_t fec_count(double erasure, std::uint32_t k, FecRounding mode);

// Empirical per-path delivery rate over the last `window` observations.
class RateEstimator {
 public:
  RateEstimator(std::size_t paths, std::size_t window);

  void observe(std::size_t path, PathStatus status);
  void resize(std::size_t paths);
  std::size_t samples(std::size_t path) const { return history_.at(path).size(); }
  // 1 - erased fraction, or prior without samples. Clamped to at least
  // kMinRate so bit-filling always sees positive rates.
  double rate(std::size_t path, double prior) const;

  static constexpr double kMinRate = 0.01;

 private:
  std::size_t window_;
  std::vector<std::deque<bool>> history_;  // true = erased
};

enum class PathType : std::uint8_t { New, Rep, Idle };

enum class RepKind : std::uint8_t { None, Fec, FbFec, SizeLimit, Filler };

struct SlotPlan {
  std::vector<PathType> types;
  std::vector<RepKind> kinds;
  std::size_t n_new = 0;
  std::size_t n_rep = 0;
  double delta = 0.0;
  double m_dg = 0.0;
  double a_dg = 0.0;
  bool had_feedback = false;
};

// Inputs the budget needs from the encoder at the start of a slot.
struct WindowState {
  std::size_t w = 0;        // window after acknowledgements
  PacketIndex w_max = 0;
  std::size_t unsent = 0;   // queued packets not yet in any emission
};

// Source Net budgeting: decides per slot how many NEW and REP packets go out
// and on which global path, from feedback, FEC debt and the window limit.
class SourceBudget {
 public:
  SourceBudget(ProtocolParams params, std::vector<double> prior_rates);

  // Replaces the controller-provided path rates (GPRT refresh). A change in
  // path count resets per-path state.
  void set_prior_rates(std::vector<double> prior_rates);

  void on_feedback(const FeedbackMessage& fb);

  SlotPlan plan(std::uint32_t slot, const WindowState& ws);

  // Must follow every plan() once the packets are sent; w_max_after is the
  // encoder's w_max after the slot's emission.
  void commit(std::uint32_t slot, const SlotPlan& plan, PacketIndex w_max_after);

  std::size_t paths() const { return prior_.size(); }
  double path_rate(std::size_t p) const;
  std::uint32_t fec_debt(std::size_t p) const { return debt_.at(p); }
  std::uint64_t fec_initialized(std::size_t p) const { return fec_init_total_.at(p); }
  std::uint64_t fec_paid(std::size_t p) const { return fec_paid_total_.at(p); }
  const ProtocolParams& params() const { return params_; }

 private:
  bool at_ew(std::size_t p) const { return new_since_anchor_[p] >= params_.generation(); }
  void open_generation(std::size_t p);
  void reset_paths();

  ProtocolParams params_;
  std::vector<double> prior_;
  RateEstimator estimator_;
  std::vector<std::uint32_t> debt_;
  std::vector<std::uint32_t> new_since_anchor_;
  std::vector<std::uint64_t> fec_init_total_;
  std::vector<std::uint64_t> fec_paid_total_;

  bool have_feedback_ = false;
  FeedbackMessage last_fb_;
  std::map<std::uint32_t, PacketIndex> w_max_at_;            // slot -> w_max after emission
  struct InFlight {
    double new_loss = 0.0;  // expected erasures among the slot's NEW packets
    double rep_gain = 0.0;  // expected DoF delivered by the slot's REP packets
    std::vector<std::int64_t> new_index;  // per path: NEW window end, or -1
  };
  std::deque<std::pair<std::uint32_t, InFlight>> in_flight_;
  std::set<PacketIndex> erased_new_;  // NEW packets reported lost, not yet acked
};

// Per-packet acknowledgement mode at the source: replays acknowledged
// combinations into a coefficient-only matrix to recover the cumulative
// (w_min, DoF) view. Only meaningful when packets reach the decoder
// unmodified.
class AckTracker {
 public:
  void record_sent(const CodedPacket& p);
  // Returns a cumulative message equivalent to the per-packet one.
  FeedbackMessage absorb(const FeedbackMessage& per_packet);

  PacketIndex w_min_ack() const { return base_; }
  std::size_t dof() const { return matrix_.rank(); }

 private:
  struct Sent {
    PacketIndex w_min;
    Bytes coeffs;
  };
  std::map<std::uint64_t, Sent> sent_;
  CoeffMatrix matrix_;
  PacketIndex base_ = 1;
};

// Pairs each packet with a path: NEW packets take the type-1 paths and REP
// packets the type-2 paths, both in path order. Throws ContractViolation on a
// count mismatch.
struct Allocation {
  std::size_t path = 0;
  Bytes wire;
  const CodedPacket* packet = nullptr;
};
std::vector<Allocation> allocate_packets(std::span<const CodedPacket> packets, std::span<const PathType> types);

}  // namespace acrlnc
