#include "acrlnc/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "acrlnc/errors.hpp"
#include "acrlnc/path_opt.hpp"

namespace acrlnc {

double update_delta(double m_dg, double a_dg, double th, std::size_t paths) {
  const double a = a_dg == 0.0 ? 1.0 : a_dg;
  return static_cast<double>(paths) * (m_dg / a - 1.0 - th);
}

std::uint32_t fec_count(double erasure, std::uint32_t k, FecRounding mode) {
  const double x = erasure * static_cast<double>(k);
  const double r = mode == FecRounding::Ceil ? std::ceil(x - 1e-9) : std::floor(x + 0.5 + 1e-9);
  return r <= 0.0 ? 0U : static_cast<std::uint32_t>(r);
}

RateEstimator::RateEstimator(std::size_t paths, std::size_t window) : window_(window), history_(paths) {
  if (window_ == 0) throw InvalidInput("RateEstimator: window must be positive");
}

void RateEstimator::observe(std::size_t path, PathStatus status) {
  if (status == PathStatus::Idle) return;
  auto& h = history_.at(path);
  h.push_back(status == PathStatus::Erased);
  if (h.size() > window_) h.pop_front();
}

void RateEstimator::resize(std::size_t paths) { history_.assign(paths, {}); }

double RateEstimator::rate(std::size_t path, double prior) const {
  const auto& h = history_.at(path);
  double r = prior;
  if (!h.empty()) {
    const auto erased = std::count(h.begin(), h.end(), true);
    r = 1.0 - static_cast<double>(erased) / static_cast<double>(h.size());
  }
  return std::clamp(r, kMinRate, 1.0);
}

SourceBudget::SourceBudget(ProtocolParams params, std::vector<double> prior_rates)
    : params_(params), prior_(std::move(prior_rates)), estimator_(prior_.size(), params.rate_window) {
  if (params_.max_window == 0) throw InvalidInput("SourceBudget: max window must be positive");
  reset_paths();
}

void SourceBudget::reset_paths() {
  const std::size_t n = prior_.size();
  estimator_.resize(n);
  debt_.assign(n, 0);
  // Stagger the generation phase so paths do not all pay FEC in the same slot.
  new_since_anchor_.assign(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    new_since_anchor_[p] = static_cast<std::uint32_t>(p * params_.generation() / n);
  }
  fec_init_total_.assign(n, 0);
  fec_paid_total_.assign(n, 0);
}

void SourceBudget::set_prior_rates(std::vector<double> prior_rates) {
  const bool reshaped = prior_rates.size() != prior_.size();
  prior_ = std::move(prior_rates);
  if (reshaped) reset_paths();
}

double SourceBudget::path_rate(std::size_t p) const { return estimator_.rate(p, prior_.at(p)); }

void SourceBudget::on_feedback(const FeedbackMessage& fb) {
  if (have_feedback_ && fb.w_min_ack < last_fb_.w_min_ack) return;  // stale
  have_feedback_ = true;
  last_fb_ = fb;
  for (std::size_t p = 0; p < fb.path_status.size() && p < prior_.size(); ++p) {
    estimator_.observe(p, fb.path_status[p]);
  }
  auto sent = std::find_if(in_flight_.begin(), in_flight_.end(),
                           [&](const auto& e) { return e.first == fb.data_slot; });
  if (sent != in_flight_.end()) {
    const auto& idx = sent->second.new_index;
    for (std::size_t p = 0; p < fb.path_status.size() && p < idx.size(); ++p) {
      if (idx[p] >= 0 && fb.path_status[p] == PathStatus::Erased) {
        erased_new_.insert(static_cast<PacketIndex>(idx[p]));
      }
    }
  }
  erased_new_.erase(erased_new_.begin(), erased_new_.lower_bound(fb.w_min_ack));
}

void SourceBudget::open_generation(std::size_t p) {
  const std::uint32_t m = fec_count(1.0 - path_rate(p), params_.generation(), params_.fec_rounding);
  debt_[p] += m;
  fec_init_total_[p] += m;
  new_since_anchor_[p] = 0;
}

SlotPlan SourceBudget::plan(std::uint32_t slot, const WindowState& ws) {
  const std::size_t n = prior_.size();
  SlotPlan plan;
  plan.types.assign(n, PathType::Idle);
  plan.kinds.assign(n, RepKind::None);
  plan.had_feedback = have_feedback_;
  if (n == 0) return plan;

  std::vector<double> rates(n);
  for (std::size_t p = 0; p < n; ++p) rates[p] = path_rate(p);

  if (have_feedback_) {
    const std::uint32_t ds = last_fb_.data_slot;
    PacketIndex w_max_ds = 0;
    if (auto it = w_max_at_.upper_bound(ds); it != w_max_at_.begin()) w_max_ds = std::prev(it)->second;
    const double outstanding = static_cast<double>(w_max_ds) + 1.0 - static_cast<double>(last_fb_.w_min_ack);
    // Erased NEW packets in the window versus REP packets that arrived for it;
    // their difference is the decoder's reported deficit.
    const double deficit = std::max(0.0, outstanding - static_cast<double>(last_fb_.dof_count));
    plan.m_dg = std::max(deficit, static_cast<double>(erased_new_.size()));
    plan.a_dg = plan.m_dg - deficit;
    for (const auto& [s, sent] : in_flight_) {
      if (s > ds && s < slot) {
        plan.m_dg += sent.new_loss;
        plan.a_dg += sent.rep_gain;
      }
    }
    plan.delta = update_delta(plan.m_dg, plan.a_dg, params_.threshold, n);
  }

  std::vector<bool> assigned(n, false);
  auto set_rep = [&](std::size_t p, RepKind kind) {
    plan.types[p] = PathType::Rep;
    plan.kinds[p] = kind;
    assigned[p] = true;
  };
  auto pay_fec = [&](std::size_t p) {
    --debt_[p];
    ++fec_paid_total_[p];
    set_rep(p, RepKind::Fec);
  };

  if (have_feedback_ && ws.w > params_.max_window) {
    for (std::size_t p = 0; p < n; ++p) set_rep(p, RepKind::SizeLimit);
  } else {
    const bool can_repeat = ws.w > 0;
    if (can_repeat) {
      for (std::size_t p = 0; p < n; ++p) {
        if (debt_[p] > 0) pay_fec(p);
      }
    }
    if (have_feedback_ && can_repeat && plan.delta > 0.0) {
      std::vector<std::size_t> free;
      std::vector<double> free_rates;
      for (std::size_t p = 0; p < n; ++p) {
        if (!assigned[p]) {
          free.push_back(p);
          free_rates.push_back(rates[p]);
        }
      }
      if (!free.empty()) {
        for (std::size_t i : bit_fill_source(free_rates, plan.delta).type2) set_rep(free[i], RepKind::FbFec);
      }
    }
    for (std::size_t p = 0; p < n; ++p) {
      if (assigned[p]) continue;
      if (at_ew(p)) {
        open_generation(p);
        if (can_repeat && debt_[p] > 0) {
          pay_fec(p);
          continue;
        }
      }
      plan.types[p] = PathType::New;
      assigned[p] = true;
    }

    // Window limit and available data cap the NEW count; the weakest paths
    // give up their NEW slot first.
    const std::size_t room = params_.max_window - std::min(ws.w, params_.max_window);
    const std::size_t cap = std::min(room, ws.unsent);
    std::vector<std::size_t> new_paths;
    for (std::size_t p = 0; p < n; ++p) {
      if (plan.types[p] == PathType::New) new_paths.push_back(p);
    }
    if (new_paths.size() > cap) {
      std::stable_sort(new_paths.begin(), new_paths.end(),
                       [&](std::size_t a, std::size_t b) { return rates[a] > rates[b]; });
      for (std::size_t i = cap; i < new_paths.size(); ++i) {
        const std::size_t p = new_paths[i];
        if (can_repeat) {
          plan.types[p] = PathType::Rep;
          plan.kinds[p] = RepKind::Filler;
        } else {
          plan.types[p] = PathType::Idle;
        }
      }
    }
  }

  for (PathType t : plan.types) {
    if (t == PathType::New) ++plan.n_new;
    if (t == PathType::Rep) ++plan.n_rep;
  }
  return plan;
}

void SourceBudget::commit(std::uint32_t slot, const SlotPlan& plan, PacketIndex w_max_after) {
  w_max_at_[slot] = w_max_after;
  InFlight sent;
  sent.new_index.assign(plan.types.size(), -1);
  auto next = static_cast<std::int64_t>(w_max_after) - static_cast<std::int64_t>(plan.n_new) + 1;
  for (std::size_t p = 0; p < plan.types.size() && p < prior_.size(); ++p) {
    if (plan.types[p] == PathType::New) {
      sent.new_index[p] = next++;
      ++new_since_anchor_[p];
      sent.new_loss += 1.0 - path_rate(p);
    }
    if (plan.types[p] == PathType::Rep) sent.rep_gain += path_rate(p);
  }
  in_flight_.emplace_back(slot, sent);

  const std::uint32_t horizon = 4 * params_.rtt + 4;
  if (slot > horizon) {
    const std::uint32_t cutoff = slot - horizon;
    while (!in_flight_.empty() && in_flight_.front().first < cutoff) in_flight_.pop_front();
    // Keep one entry at or below the cutoff so lookups for old data slots still resolve.
    auto it = w_max_at_.upper_bound(cutoff);
    if (it != w_max_at_.begin()) w_max_at_.erase(w_max_at_.begin(), std::prev(it));
  }
}

}  // namespace acrlnc
