#pragma once

// Special-function substrate: log-gamma, digamma and its first three
// derivatives, the certified envelopes around them, the log-ratio U(a,b)
// with its Stirling sandwich, Topsoe's bracket on log(1+x), and Newton
// forward differences.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "urnent/errors.hpp"

namespace urnent {

/// Closed interval [lo, hi]. Endpoints are finite unless built through
/// RealInterval::unbounded_above.
struct RealInterval {
  double lo = 0.0;
  double hi = 0.0;

  static RealInterval make(double lo, double hi) {
    detail::require(!std::isnan(lo) && !std::isnan(hi), "RealInterval: NaN endpoint");
    detail::require(lo <= hi, "RealInterval: lo > hi");
    detail::require(std::isfinite(lo) && std::isfinite(hi), "RealInterval: infinite endpoint");
    return {lo, hi};
  }

  static RealInterval unbounded_above(double lo) {
    return {lo, std::numeric_limits<double>::infinity()};
  }

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }

  bool contains(double x, double slack = 0.0) const {
    return x >= lo - slack && x <= hi + slack;
  }
};

/// Neumaier's variant of Kahan summation. Result depends only on the order
/// in which terms are added.
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

  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// x log x with the 0 log 0 = 0 convention.
inline double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }

inline double log_gamma(double x) {
  detail::require(x > 0.0 && std::isfinite(x), "log_gamma: argument must be positive and finite");
#if defined(__GLIBC__) || defined(__APPLE__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

/// log Gamma in extended precision. Used for tables whose entries are
/// differenced, where double rounding of large values would dominate.
inline long double log_gamma_ext(long double x) {
  detail::require(x > 0.0L && std::isfinite(x), "log_gamma_ext: argument must be positive and finite");
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgammal_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

namespace detail {

// B_2, B_4, ..., B_20
inline constexpr std::array<double, 10> kBernoulliEven = {
    1.0 / 6.0,         -1.0 / 30.0,   1.0 / 42.0,         -1.0 / 30.0,    5.0 / 66.0,
    -691.0 / 2730.0,   7.0 / 6.0,     -3617.0 / 510.0,    43867.0 / 798.0, -174611.0 / 330.0};

// Below this the argument is shifted up by the recurrence before the
// asymptotic series is summed.
inline constexpr double kPolygammaShift = 16.0;

inline double factorial_small(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

// Asymptotic expansion of psi^(order)(y), valid for y >= kPolygammaShift.
inline double polygamma_asymptotic(double y, int order) {
  const double inv = 1.0 / y;
  const double inv2 = inv * inv;
  if (order == 0) {
    // psi(y) ~ log y - 1/(2y) - sum B_2j / (2j y^2j)
    double tail = 0.0;
    double p = inv2;
    for (std::size_t j = 1; j <= kBernoulliEven.size(); ++j) {
      tail += kBernoulliEven[j - 1] / (2.0 * j) * p;
      p *= inv2;
    }
    return std::log(y) - 0.5 * inv - tail;
  }
  // psi^(m)(y) ~ (-1)^(m+1) [ (m-1)!/y^m + m!/(2 y^(m+1))
  //                           + sum B_2j (2j+m-1)!/(2j)! / y^(2j+m) ]
  const int m = order;
  double ym = 1.0;
  for (int i = 0; i < m; ++i) ym *= inv;  // y^-m
  double acc = factorial_small(m - 1) * ym + factorial_small(m) * 0.5 * ym * inv;
  double p = ym * inv2;  // y^-(2+m)
  for (std::size_t j = 1; j <= kBernoulliEven.size(); ++j) {
    // (2j+m-1)!/(2j)! = (2j+1)(2j+2)...(2j+m-1)
    double rising = 1.0;
    for (int t = 1; t <= m - 1; ++t) rising *= static_cast<double>(2 * j + t);
    acc += kBernoulliEven[j - 1] * rising * p;
    p *= inv2;
  }
  return (m % 2 == 1) ? acc : -acc;
}

}  // namespace detail

/// psi^(order)(x) for order in {0,1,2,3}, x > 0.
inline double digamma_family(double x, int order) {
  detail::require(x > 0.0 && std::isfinite(x), "digamma_family: argument must be positive and finite");
  detail::require(order >= 0 && order <= 3, "digamma_family: order must be 0..3");
  int shift = 0;
  if (x < detail::kPolygammaShift) shift = static_cast<int>(std::ceil(detail::kPolygammaShift - x));
  const double asym = detail::polygamma_asymptotic(x + shift, order);
  if (shift == 0) return asym;
  // psi^(m)(x) = psi^(m)(x+N) - (-1)^m m! sum_{j<N} (x+j)^-(m+1),
  // summed from the smallest term up.
  CompensatedSum correction;
  for (int j = shift - 1; j >= 0; --j) {
    const double v = x + j;
    double p = 1.0;
    for (int t = 0; t <= order; ++t) p /= v;
    correction.add(p);
  }
  const double scale = detail::factorial_small(order) * ((order % 2 == 0) ? 1.0 : -1.0);
  return asym - scale * correction.value();
}

inline double digamma(double x) { return digamma_family(x, 0); }
inline double trigamma(double x) { return digamma_family(x, 1); }

/// Two-sided bound on psi(y):
/// log y - 1/(2y) - 1/(12y^2) <= psi(y) <= that + 1/(120 y^4).
inline RealInterval digamma_envelope(double y) {
  detail::require(y > 0.0 && std::isfinite(y), "digamma_envelope: y must be positive");
  const double lo = std::log(y) - 1.0 / (2.0 * y) - 1.0 / (12.0 * y * y);
  const double y2 = y * y;
  return {lo, lo + 1.0 / (120.0 * y2 * y2)};
}

/// Two-sided bound on -psi'(x) + 1/x.
inline RealInterval trigamma_envelope(double x) {
  detail::require(x > 0.0 && std::isfinite(x), "trigamma_envelope: x must be positive");
  const double x2 = x * x;
  const double lo = -1.0 / (2.0 * x2) - 1.0 / (6.0 * x2 * x);
  return {lo, lo + 1.0 / (30.0 * x2 * x2 * x)};
}

namespace detail {

inline bool is_integral(double v) { return std::isfinite(v) && v == std::floor(v); }

// Integer arguments at or below this use the product form of U.
inline constexpr double kUProductLimit = 1 << 14;

}  // namespace detail

/// U(a,b) = b log a + log Gamma(a-b+1) - log Gamma(a+1), for 0 <= b <= a.
///
/// For integers this is log(a^b (a-b)!/a!) = -sum_{j<b} log(1 - j/a) >= 0.
/// Small integer b takes that sum directly: every term is positive, so the
/// result keeps full relative precision where the log-gamma difference would
/// cancel. Everything else goes through log_gamma.
inline double u_value(double a, double b) {
  detail::require(a > 0.0 && std::isfinite(a), "u_value: a must be positive");
  detail::require(b >= 0.0 && b <= a, "u_value: need 0 <= b <= a");
  if (b == 0.0 || b == 1.0) return 0.0;
  if (detail::is_integral(a) && detail::is_integral(b) && b <= detail::kUProductLimit) {
    CompensatedSum acc;
    const auto top = static_cast<std::int64_t>(b);
    for (std::int64_t j = top - 1; j >= 1; --j) acc.add(-std::log1p(-static_cast<double>(j) / a));
    return acc.value();
  }
  return b * std::log(a) + log_gamma(a - b + 1.0) - log_gamma(a + 1.0);
}

/// Stirling-type sandwich A - eps <= U(a,b) <= A.
struct USandwich {
  double approx = 0.0;  // A(a,b)
  double eps = 0.0;     // eps(a,b) >= 0

  double upper() const { return approx; }
  double lower() const { return approx - eps; }
};

/// Only asserted for 0 <= b <= a-1; b in (a-1, a] is rejected.
inline USandwich u_sandwich(double a, double b) {
  detail::require(std::isfinite(a) && std::isfinite(b), "u_sandwich: non-finite argument");
  detail::require(b >= 0.0 && b <= a - 1.0, "u_sandwich: need 0 <= b <= a-1");
  const double d = a - b;
  USandwich out;
  out.approx = (d + 0.5) * std::log1p(-b / a) + b + 1.0 / (12.0 * d) - 1.0 / (12.0 * a);
  out.eps = (1.0 / (d * d * d) - 1.0 / (a * a * a)) / 360.0;
  return out;
}

struct LogBracket {
  double lower = 0.0;
  double upper = 0.0;
};

/// 2x/(2+x) <= log(1+x) <= x(2+x)/(2(1+x)) for x >= 0.
inline LogBracket log1p_topsoe(double x) {
  detail::require(x >= 0.0 && std::isfinite(x), "log1p_topsoe: x must be nonnegative");
  return {2.0 * x / (2.0 + x), x * (2.0 + x) / (2.0 * (1.0 + x))};
}

/// Delta^r f(m) from the samples f(m), f(m+1), ..., f(m+r).
inline double forward_differences(std::span<const double> values, std::size_t r) {
  if (values.size() < r + 1) {
    throw length_error("forward_differences: need at least r+1 samples, got " +
                       std::to_string(values.size()));
  }
  std::vector<double> work(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(r + 1));
  for (std::size_t level = 0; level < r; ++level) {
    for (std::size_t i = 0; i + 1 < work.size() - level; ++i) work[i] = work[i + 1] - work[i];
  }
  return work[0];
}

/// log(i!) for i = 0..n in extended precision, read-only once built. Sizes
/// up to kSharedSize view one process-wide table built on first use.
class LogFactorials {
 public:
  static constexpr std::int64_t kSharedSize = 4096;

  explicit LogFactorials(std::int64_t n) : n_(n) {
    detail::require(n >= 0, "LogFactorials: negative size");
    table_ = n <= kSharedSize ? shared() : build(n);
  }

  long double operator()(std::int64_t i) const { return (*table_)[static_cast<std::size_t>(i)]; }
  std::int64_t max() const { return n_; }

  long double log_binomial(std::int64_t n, std::int64_t k) const {
    return (*this)(n) - (*this)(k) - (*this)(n - k);
  }

 private:
  using Table = std::vector<long double>;

  static std::shared_ptr<const Table> build(std::int64_t n) {
    auto t = std::make_shared<Table>(static_cast<std::size_t>(n + 1));
    for (std::int64_t i = 2; i <= n; ++i)
      (*t)[static_cast<std::size_t>(i)] = log_gamma_ext(static_cast<long double>(i) + 1.0L);
    return t;
  }

  static const std::shared_ptr<const Table>& shared() {
    static const std::shared_ptr<const Table> table = build(kSharedSize);
    return table;
  }

  std::int64_t n_;
  std::shared_ptr<const Table> table_;
};

// (x)_r = x (x-1) ... (x-r+1)
inline double falling_factorial(double x, std::int64_t r) {
  double p = 1.0;
  for (std::int64_t j = 0; j < r; ++j) p *= (x - static_cast<double>(j));
  return p;
}

}  // namespace urnent
