#include "tdann/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tdann {

TimeSeries::TimeSeries(std::vector<double> samples, std::optional<double> sample_rate_hz,
                       std::string label)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz), label_(std::move(label)) {
  if (samples_.empty()) {
    throw InvalidInputError("time series must contain at least one sample");
  }
  for (double v : samples_) {
    if (!std::isfinite(v)) {
      throw InvalidInputError("time series contains a non-finite sample");
    }
  }
  if (sample_rate_hz_ && !(*sample_rate_hz_ > 0.0 && std::isfinite(*sample_rate_hz_))) {
    throw InvalidInputError("sample_rate_hz must be a positive finite value");
  }
}

double TimeSeries::mean() const {
  return std::accumulate(samples_.begin(), samples_.end(), 0.0) /
         static_cast<double>(samples_.size());
}

double TimeSeries::rms() const {
  double s = 0.0;
  for (double v : samples_) s += v * v;
  return std::sqrt(s / static_cast<double>(samples_.size()));
}

double TimeSeries::variance() const {
  const double m = mean();
  double s = 0.0;
  for (double v : samples_) s += (v - m) * (v - m);
  return s / static_cast<double>(samples_.size());
}

SegmentBounds::SegmentBounds(std::size_t start_, std::size_t end_) : start(start_), end(end_) {
  if (start < 1 || start > end) {
    throw InvalidInputError("segment bounds require 1 <= start <= end, got [" +
                            std::to_string(start) + ", " + std::to_string(end) + "]");
  }
}

DelayMatrix::DelayMatrix(Eigen::MatrixXd values, std::size_t delay)
    : values_(std::move(values)), delay_(delay) {
  if (static_cast<std::size_t>(values_.cols()) != delay_ + 1) {
    throw DimensionError("delay matrix must have d+1 columns");
  }
}

TimeSeries detrend(const TimeSeries& ts) {
  const std::size_t n = ts.size();
  if (n < 2) {
    throw InvalidInputError("detrend needs at least 2 samples");
  }
  // Least-squares line over t = 0..n-1 via centered sums.
  const double t_mean = (static_cast<double>(n) - 1.0) / 2.0;
  const double x_mean = ts.mean();
  double stx = 0.0;
  double stt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double tc = static_cast<double>(i) - t_mean;
    stx += tc * (ts[i] - x_mean);
    stt += tc * tc;
  }
  const double slope = stx / stt;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = ts[i] - (x_mean + slope * (static_cast<double>(i) - t_mean));
  }
  return TimeSeries(std::move(out), ts.sample_rate_hz(), ts.label());
}

TimeSeries slice(const TimeSeries& ts, const SegmentBounds& bounds) {
  if (bounds.end > ts.size()) {
    throw RangeError("slice bounds [" + std::to_string(bounds.start) + ", " +
                     std::to_string(bounds.end) + "] exceed series length " +
                     std::to_string(ts.size()));
  }
  std::vector<double> out(ts.samples().begin() + static_cast<std::ptrdiff_t>(bounds.start - 1),
                          ts.samples().begin() + static_cast<std::ptrdiff_t>(bounds.end));
  return TimeSeries(std::move(out), ts.sample_rate_hz(), ts.label());
}

TimeSeries concat(const TimeSeries& a, const TimeSeries& b) {
  if (a.sample_rate_hz() && b.sample_rate_hz() &&
      *a.sample_rate_hz() != *b.sample_rate_hz()) {
    throw InvalidInputError("cannot concatenate series with different sample rates");
  }
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.samples().begin(), a.samples().end());
  out.insert(out.end(), b.samples().begin(), b.samples().end());
  auto rate = a.sample_rate_hz() ? a.sample_rate_hz() : b.sample_rate_hz();
  return TimeSeries(std::move(out), rate, a.label().empty() ? b.label() : a.label());
}

std::vector<double> autocorrelation(const TimeSeries& ts, std::size_t max_lag) {
  const std::size_t n = ts.size();
  if (max_lag >= n) {
    throw RangeError("max_lag must be smaller than the series length");
  }
  const double m = ts.mean();
  double c0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) c0 += (ts[i] - m) * (ts[i] - m);
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0) {
    throw DegenerateSignalError("autocorrelation of a zero-variance series is undefined");
  }
  std::vector<double> r(max_lag + 1);
  r[0] = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double ck = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) ck += (ts[i] - m) * (ts[i + k] - m);
    ck /= static_cast<double>(n);  // biased normalization keeps |r| <= 1
    r[k] = ck / c0;
  }
  return r;
}

DelayMatrix build_delay_matrix(const TimeSeries& ts, std::size_t delay) {
  const std::size_t n = ts.size();
  if (delay >= n) {
    throw RangeError("delay window " + std::to_string(delay) +
                     " leaves no usable rows in a series of length " + std::to_string(n));
  }
  const std::size_t rows = n - delay;
  Eigen::MatrixXd X(rows, delay + 1);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = delay + r;  // 0-based index of the newest sample
    for (std::size_t j = 0; j <= delay; ++j) {
      X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = ts[t - j];
    }
  }
  return DelayMatrix(std::move(X), delay);
}

}  // namespace tdann
