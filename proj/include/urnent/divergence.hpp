#pragma once

// Exact relative entropy D(H || B) and total variation between sampling
// without (H) and with (B) replacement.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "urnent/numerics.hpp"
#include "urnent/urn.hpp"
#include "urnent/urn_spec.hpp"

namespace urnent {

namespace detail {

// u[s] = U(a, s) = -sum_{j<s} log(1 - j/a) for s = 0..top, in long double.
inline std::vector<long double> u_table(std::int64_t a, std::int64_t top) {
  std::vector<long double> u(static_cast<std::size_t>(top + 1), 0.0L);
  const long double aa = static_cast<long double>(a);
  for (std::int64_t s = 1; s <= top; ++s)
    u[static_cast<std::size_t>(s)] =
        u[static_cast<std::size_t>(s - 1)] - std::log1p(-static_cast<long double>(s - 1) / aa);
  return u;
}

}  // namespace detail

/// D(n,k,ell) in nats: sum over the hypergeometric support of H log(H/B),
/// accumulated in colex order. Empty colours are dropped first; a single
/// remaining colour, or k <= 1 (where H = B), gives 0.
///
/// log(H/B)(s) = U(n,k) - sum_i U(ell_i, s_i) is taken from per-colour tables
/// of small positive terms rather than as a difference of log-factorials.
inline double relative_entropy(const UrnSpec& spec) {
  const UrnSpec red = spec.reduced();
  if (red.c() < 2 || red.k() < 2) return 0.0;
  const PmfEvaluator ev(red);
  std::vector<std::vector<long double>> u_ell;
  for (auto l : red.ell()) u_ell.push_back(detail::u_table(l, std::min(l, red.k())));
  const long double u_nk = detail::u_table(red.n(), red.k()).back();
  long double sum = 0.0L;
  long double comp = 0.0L;
  for (const auto& s : support(red)) {
    long double log_ratio = u_nk;
    for (std::size_t i = 0; i < s.size(); ++i) log_ratio -= u_ell[i][static_cast<std::size_t>(s[i])];
    const long double term = std::exp(ev.log_hypergeometric_ext(s)) * log_ratio;
    const long double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return static_cast<double>(sum + comp);
}

/// E U(ell, S) where S is the count of an ell-ball colour in a k-draw from
/// n balls. U(ell, s) and the law of S are both stepped through the support:
/// U(ell, s+1) = U(ell, s) - log(1 - s/ell), and P(S = s) by its ratio.
inline double expected_u(std::int64_t n, std::int64_t k, std::int64_t ell) {
  detail::require(ell >= 1 && ell <= n && k >= 0 && k <= n, "expected_u: invalid urn parameters");
  const std::int64_t lo = std::max<std::int64_t>(0, k - (n - ell));
  const std::int64_t hi = std::min(k, ell);
  const std::int64_t rest = n - ell;
  double u = u_value(static_cast<double>(ell), static_cast<double>(lo));
  double p = marginal_hypergeometric(n, k, ell, lo);
  CompensatedSum acc;
  for (std::int64_t s = lo; s <= hi; ++s) {
    acc.add(p * u);
    u -= std::log1p(-static_cast<double>(s) / static_cast<double>(ell));
    // P(S = s+1) / P(S = s) = (ell - s)(k - s) / ((s + 1)(rest - k + s + 1))
    p *= static_cast<double>(ell - s) * static_cast<double>(k - s) /
         (static_cast<double>(s + 1) * static_cast<double>(rest - k + s + 1));
  }
  return acc.value();
}

/// D(n,k,ell) = U(n,k) - sum_i E U(ell_i, S_i), S_i ~ H(n,k,ell_i; .).
/// Every colour must be occupied.
inline double relative_entropy_via_u(const UrnSpec& spec) {
  for (auto l : spec.ell())
    detail::require(l >= 1, "relative_entropy_via_u: empty colour in " + to_string(spec));
  CompensatedSum acc;
  acc.add(u_value(static_cast<double>(spec.n()), static_cast<double>(spec.k())));
  for (auto l : spec.ell()) acc.add(-expected_u(spec.n(), spec.k(), l));
  return acc.value();
}

/// (1/2) sum |H - B| over every composition of k (the multinomial support);
/// 0 when k <= 1.
inline double total_variation(const UrnSpec& spec) {
  const UrnSpec red = spec.reduced();
  if (red.c() < 2 || red.k() < 2) return 0.0;
  const PmfEvaluator ev(red);
  CompensatedSum acc;
  for (const auto& s : compositions(red.k(), red.c())) {
    const double h = static_cast<double>(std::exp(ev.log_hypergeometric_ext(s)));
    const double b = static_cast<double>(std::exp(ev.log_multinomial_ext(s)));
    acc.add(std::abs(h - b));
  }
  return 0.5 * acc.value();
}

struct DivergenceReport {
  double kl = 0.0;        // nats
  double tv = 0.0;
  std::int64_t support_size = 0;
  double kl_via_u = 0.0;  // nats

  // Consistency flags, each evaluated with the slack given below.
  bool routes_agree = false;      // |kl - kl_via_u| <= 1e-9
  bool pinsker = false;           // 2 tv^2 <= kl
  bool bretagnolle_huber = false; // tv^2 <= 1 - exp(-kl)
  bool diaconis_freedman = false; // tv <= c k / n

  bool consistent() const { return routes_agree && pinsker && bretagnolle_huber && diaconis_freedman; }
};

inline constexpr double kRouteTolerance = 1e-9;
inline constexpr double kInequalitySlack = 1e-12;

inline DivergenceReport divergence_report(const UrnSpec& spec) {
  const UrnSpec red = spec.reduced();
  DivergenceReport r;
  r.kl = relative_entropy(red);
  r.tv = total_variation(red);
  r.support_size = support(red).count();
  r.kl_via_u = relative_entropy_via_u(red);
  const double c = static_cast<double>(red.c());
  r.routes_agree = std::abs(r.kl - r.kl_via_u) <= kRouteTolerance;
  r.pinsker = 2.0 * r.tv * r.tv <= r.kl + kInequalitySlack;
  r.bretagnolle_huber = r.tv * r.tv <= -std::expm1(-r.kl) + kInequalitySlack;
  r.diaconis_freedman =
      r.tv <= c * static_cast<double>(red.k()) / static_cast<double>(red.n()) + kInequalitySlack;
  return r;
}

}  // namespace urnent
