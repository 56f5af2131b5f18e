#pragma once

#include <array>
#include <cmath>
#include <utility>

namespace kw {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Dense K x K solve by Gaussian elimination with partial pivoting.
template <int K>
std::array<double, K> solve_small(std::array<std::array<double, K>, K> a,
                                  std::array<double, K> b) {
  for (int c = 0; c < K; ++c) {
    int piv = c;
    for (int r = c + 1; r < K; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (int r = c + 1; r < K; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < K; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::array<double, K> x{};
  for (int c = K - 1; c >= 0; --c) {
    double s = b[c];
    for (int k = c + 1; k < K; ++k) s -= a[c][k] * x[k];
    x[c] = s / a[c][c];
  }
  return x;
}

}  // namespace kw
