#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <vector>

namespace remsim {

// Dense fixed-range histogram. Out-of-range samples are tallied separately
// so totals stay exact.
class Histogram1D {
 public:
  Histogram1D() = default;
  Histogram1D(double lo, double hi, std::size_t nbins)
      : lo_(lo), hi_(hi), counts_(nbins, 0.0) {
    if (!(hi > lo) || nbins == 0) throw std::invalid_argument("empty histogram range");
  }

  void add(double x, double w = 1.0) {
    if (x < lo_ || x >= hi_) {
      overflow_ += w;
      return;
    }
    const auto b = static_cast<std::size_t>((x - lo_) / (hi_ - lo_) * counts_.size());
    counts_[b < counts_.size() ? b : counts_.size() - 1] += w;
  }

  void merge(const Histogram1D& other) {
    if (other.counts_.size() != counts_.size() || other.lo_ != lo_ || other.hi_ != hi_)
      throw std::invalid_argument("histogram layout mismatch");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    overflow_ += other.overflow_;
  }

  std::size_t size() const { return counts_.size(); }
  double bin_width() const { return (hi_ - lo_) / counts_.size(); }
  double center(std::size_t i) const { return lo_ + (i + 0.5) * bin_width(); }
  double count(std::size_t i) const { return counts_[i]; }
  double overflow() const { return overflow_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  double total() const {
    double s = 0;
    for (double c : counts_) s += c;
    return s;
  }

  std::vector<double> centers() const {
    std::vector<double> v(counts_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = center(i);
    return v;
  }
  const std::vector<double>& counts() const { return counts_; }

 private:
  double lo_ = 0, hi_ = 1;
  std::vector<double> counts_;
  double overflow_ = 0;
};

// Sparse histogram on an unbounded grid of bins centered at integer multiples
// of the width; bin k covers [(k-1/2)w, (k+1/2)w). Weighted counts are summed
// per bin; with integer-valued weights (counts, the only weights the
// experiments use) accumulation is exact, hence order-independent.
class SparseHistogram {
 public:
  explicit SparseHistogram(double bin_width) : width_(bin_width) {
    if (!(bin_width > 0)) throw std::invalid_argument("bin_width must be > 0");
  }

  void add(double x, double w = 1.0) { bins_[key(x)] += w; }

  void merge(const SparseHistogram& other) {
    if (other.width_ != width_) throw std::invalid_argument("bin width mismatch");
    for (const auto& [k, w] : other.bins_) bins_[k] += w;
  }

  double bin_width() const { return width_; }
  bool empty() const { return bins_.empty(); }
  std::size_t size() const { return bins_.size(); }

  double total() const {
    double s = 0;
    for (const auto& [k, w] : bins_) s += w;
    return s;
  }

  // (bin center, weighted count) in ascending center order
  std::vector<std::pair<double, double>> items() const {
    std::vector<std::pair<double, double>> v;
    v.reserve(bins_.size());
    for (const auto& [k, w] : bins_) v.emplace_back(k * width_, w);
    return v;
  }

  // count at the bin containing x (0 if absent)
  double at(double x) const {
    const auto it = bins_.find(key(x));
    return it == bins_.end() ? 0.0 : it->second;
  }

 private:
  long long key(double x) const {
    return static_cast<long long>(std::floor(x / width_ + 0.5));
  }
  double width_;
  std::map<long long, double> bins_;
};

}  // namespace remsim
