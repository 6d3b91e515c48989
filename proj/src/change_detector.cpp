#include "acrlnc/controller.hpp"

#include <cmath>

#include "acrlnc/errors.hpp"

namespace acrlnc {

ChangeDetector::ChangeDetector(std::size_t window) : window_(window) {
  if (window_ == 0) throw InvalidInput("ChangeDetector: window must be positive");
}

double ChangeDetector::recent_rate() const {
  return recent_.empty() ? 0.0 : static_cast<double>(recent_hits_) / static_cast<double>(recent_.size());
}

double ChangeDetector::baseline_rate() const {
  return n_ == 0 ? 0.0 : static_cast<double>(hits_) / static_cast<double>(n_);
}

double ChangeDetector::baseline_sigma() const {
  const double p = baseline_rate();
  return std::sqrt(p * (1.0 - p));
}

bool ChangeDetector::observe(bool delivered) {
  recent_.push_back(delivered);
  recent_hits_ += delivered ? 1 : 0;
  if (recent_.size() > window_) {
    recent_hits_ -= recent_.front() ? 1 : 0;
    recent_.pop_front();
  }

  // The baseline needs a couple of windows of history before it is trusted.
  bool fired = false;
  if (recent_.size() == window_ && n_ >= 2 * window_) {
    const double dev = std::fabs(recent_rate() - baseline_rate());
    fired = dev > std::max(kSigmaFactor * baseline_sigma(), kFloor);
  }
  if (fired) {
    n_ = recent_.size();
    hits_ = recent_hits_;
    return true;
  }
  ++n_;
  hits_ += delivered ? 1 : 0;
  return false;
}

}  // namespace acrlnc
