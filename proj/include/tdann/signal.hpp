#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tdann/errors.hpp"

namespace tdann {

// A uniformly sampled real-valued signal. Samples are validated at
// construction: finite, at least one sample, positive sample rate when given.
class TimeSeries {
 public:
  explicit TimeSeries(std::vector<double> samples,
                      std::optional<double> sample_rate_hz = std::nullopt,
                      std::string label = {});

  const std::vector<double>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  // 0-based internal indexing; user-facing formats are 1-based.
  double operator[](std::size_t i) const noexcept { return samples_[i]; }
  std::span<const double> span() const noexcept { return samples_; }

  std::optional<double> sample_rate_hz() const noexcept { return sample_rate_hz_; }
  const std::string& label() const noexcept { return label_; }

  double mean() const;
  double rms() const;
  double variance() const;

 private:
  std::vector<double> samples_;
  std::optional<double> sample_rate_hz_;
  std::string label_;
};

// Inclusive 1-based segment [start, end]. 1 <= start <= end is enforced at
// construction.
struct SegmentBounds {
  SegmentBounds(std::size_t start, std::size_t end);

  std::size_t start;
  std::size_t end;

  std::size_t length() const noexcept { return end - start + 1; }
  bool overlaps(const SegmentBounds& other) const noexcept {
    return start <= other.end && other.start <= end;
  }
};

// Tapped-delay regressor matrix. Row r (0-based) holds the window ending at
// sample d+r, newest first: [u(t), u(t-1), ..., u(t-d)] with t = d+r.
// rows = series length - d, cols = d + 1.
class DelayMatrix {
 public:
  DelayMatrix(Eigen::MatrixXd values, std::size_t delay);

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  std::size_t delay() const noexcept { return delay_; }

 private:
  Eigen::MatrixXd values_;
  std::size_t delay_;
};

// Removes the least-squares straight-line fit. The result has zero mean and
// zero fitted slope up to rounding.
TimeSeries detrend(const TimeSeries& ts);

// Returns samples bounds.start..bounds.end (1-based, inclusive).
TimeSeries slice(const TimeSeries& ts, const SegmentBounds& bounds);

// Samples of a followed by samples of b. Rejects mismatched sample rates
// when both are present.
TimeSeries concat(const TimeSeries& a, const TimeSeries& b);

// Normalized autocorrelation r(0..max_lag) of the mean-removed series,
// biased normalization (divide by n), r(0) = 1.
std::vector<double> autocorrelation(const TimeSeries& ts, std::size_t max_lag);

DelayMatrix build_delay_matrix(const TimeSeries& ts, std::size_t delay);

// Walks the causal windows of `input`, padding the pre-history with `prime`
// (newest first: prime[0] is the sample just before input[0]). fn receives
// (t, window) where window is newest first and t is the 0-based output index.
// prime.size() must be >= d unless the window never reaches past the start.
template <typename Fn>
void for_each_window(std::span<const double> input, std::span<const double> prime,
                     std::size_t d, Fn&& fn) {
  std::vector<double> window(d + 1);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(input.size());
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j <= d; ++j) {
      const std::ptrdiff_t i = t - static_cast<std::ptrdiff_t>(j);
      window[j] = i >= 0 ? input[static_cast<std::size_t>(i)]
                         : prime[static_cast<std::size_t>(-i - 1)];
    }
    fn(static_cast<std::size_t>(t), std::span<const double>(window));
  }
}

}  // namespace tdann
