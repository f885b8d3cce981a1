#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

// <resolv.h> defines _res, which collides with Eigen parameter names.
#pragma push_macro("_res")
#undef _res
#include <Eigen/Dense>
#pragma pop_macro("_res")

#include "citetrend/errors.hpp"

namespace citetrend {

/// Sliding least-squares polynomial smoother.
///
/// Each output sample is the fitted polynomial of degree `order`, evaluated at that sample,
/// over a window of `window` consecutive samples. The target sits at offset
/// floor(window / 2) inside the window (ceil((w-1)/2) samples to the left, floor((w-1)/2) to
/// the right), which is the symmetric window for odd lengths. Near the ends the window is
/// shifted to stay inside the series rather than truncated, so every fit uses `window`
/// samples. Fit weights depend only on the target's offset, so at most `window` weight
/// vectors are computed.
class SavitzkyGolayFilter {
 public:
  SavitzkyGolayFilter(int window, int order) : window_(window), order_(order) {
    if (order < 0) throw DomainError("Savitzky-Golay order must be non-negative");
    if (window < 1) throw DomainError("Savitzky-Golay window must be positive");
    if (order >= window)
      throw DomainError("Savitzky-Golay order " + std::to_string(order) + " must be below window " +
                        std::to_string(window));
    weights_.resize(static_cast<std::size_t>(window));
    for (int offset = 0; offset < window; ++offset) weights_[static_cast<std::size_t>(offset)] = fit_weights(offset);
  }

  int window() const { return window_; }
  int order() const { return order_; }
  int left_span() const { return window_ / 2; }

  std::vector<double> apply(std::span<const double> series) const {
    const auto n = static_cast<long>(series.size());
    if (n < window_)
      throw DomainError("Savitzky-Golay window " + std::to_string(window_) + " exceeds series length " +
                        std::to_string(n));
    std::vector<double> out(series.size());
    for (long i = 0; i < n; ++i) {
      const long start = std::clamp(i - left_span(), 0L, n - window_);
      const auto& w = weights_[static_cast<std::size_t>(i - start)];
      double acc = 0.0;
      for (int j = 0; j < window_; ++j) acc += w[j] * series[static_cast<std::size_t>(start + j)];
      out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
  }

 private:
  // Row of the least-squares pseudo-inverse that yields the polynomial's value at `offset`.
  Eigen::VectorXd fit_weights(int offset) const {
    const double scale = std::max(1.0, window_ / 2.0);
    Eigen::MatrixXd vander(window_, order_ + 1);
    for (int j = 0; j < window_; ++j) {
      const double t = (j - offset) / scale;
      double p = 1.0;
      for (int k = 0; k <= order_; ++k) {
        vander(j, k) = p;
        p *= t;
      }
    }
    Eigen::MatrixXd pinv = vander.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(window_, window_));
    return pinv.row(0).transpose();
  }

  int window_;
  int order_;
  std::vector<Eigen::VectorXd> weights_;
};

inline std::vector<double> savitzky_golay(std::span<const double> series, int window, int order) {
  return SavitzkyGolayFilter(window, order).apply(series);
}

}  // namespace citetrend
