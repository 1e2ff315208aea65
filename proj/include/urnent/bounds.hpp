#pragma once

// Closed-form upper and lower bounds on D(n,k,ell), the large-n limit
// expressions, and exact-vs-bound diagnostics for each intermediate step of
// the ell-dependent upper bounds.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "urnent/divergence.hpp"
#include "urnent/errors.hpp"
#include "urnent/numerics.hpp"
#include "urnent/urn.hpp"
#include "urnent/urn_spec.hpp"

namespace urnent {

struct BoundPair {
  double upper = 0.0;
  double lower = 0.0;
};

/// Stam's uniform bounds:
///   (c-1)k(k-1) / (4(n-1)^2)  <=  D  <=  (c-1)k(k-1) / (2(n-1)(n-k+1)).
inline BoundPair stam_bounds(std::int64_t n, std::int64_t k, std::int64_t c) {
  detail::require(k >= 1 && k <= n, "stam_bounds: need 1 <= k <= n");
  detail::require(c >= 2, "stam_bounds: need c >= 2");
  if (k == 1) return {0.0, 0.0};
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  const double top = static_cast<double>(c - 1) * kk * (kk - 1.0);
  return {top / (2.0 * (nn - 1.0) * (nn - kk + 1.0)), top / (4.0 * (nn - 1.0) * (nn - 1.0))};
}

/// Harremoes-Matus uniform bounds. The upper bound diverges at k = n and is
/// reported as +infinity with upper_infinite set.
struct HmBounds {
  double upper = 0.0;
  double lower = 0.0;
  bool upper_infinite = false;
};

inline HmBounds hm_bounds(std::int64_t n, std::int64_t k, std::int64_t c) {
  detail::require(n >= 2, "hm_bounds: need n >= 2");
  detail::require(k >= 1 && k <= n, "hm_bounds: need 1 <= k <= n");
  detail::require(c >= 2, "hm_bounds: need c >= 2");
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  const double cm1 = static_cast<double>(c - 1);
  HmBounds out;
  // r = (n-k+1)/(n-1); r - 1 - log r is evaluated around r - 1 so it keeps
  // precision near r = 1. At k = 1 the formula is positive while D = 0, so
  // the lower bound is taken as 0 there.
  if (k >= 2) {
    const double rm1 = (2.0 - kk) / (nn - 1.0);
    out.lower = 0.5 * cm1 * (rm1 - std::log1p(rm1));
  }
  if (k == n) {
    out.upper = std::numeric_limits<double>::infinity();
    out.upper_infinite = true;
  } else {
    out.upper = cm1 * (std::log((nn - 1.0) / (nn - kk)) - kk / nn + 1.0 / (nn - kk + 1.0));
  }
  return out;
}

struct SigmaStats {
  double sigma1 = 0.0;  // sum n / ell_i
  double sigma2 = 0.0;  // sum n^3 / ell_i^3
};

inline SigmaStats sigma_stats(const UrnSpec& spec) {
  SigmaStats out;
  const double n = static_cast<double>(spec.n());
  for (auto l : spec.ell()) {
    detail::require(l >= 1, "sigma_stats: empty colour in " + to_string(spec));
    const double q = n / static_cast<double>(l);
    out.sigma1 += q;
    out.sigma2 += q * q * q;
  }
  return out;
}

namespace detail {

inline void require_main_domain(const UrnSpec& spec, const char* who) {
  require_applicable(spec.c() >= 2, std::string(who) + ": need c >= 2");
  require_applicable(spec.k() >= 1 && 2 * spec.k() <= spec.n(),
                     std::string(who) + ": need 1 <= k <= n/2, got " + to_string(spec));
  for (auto l : spec.ell())
    require_applicable(l >= 1, std::string(who) + ": every colour needs ell_i >= 1");
}

// ((c-1)/2) (log(n/(n-k)) - k/(n-1))
inline double thm1_leading(double n, double k, double c) {
  return 0.5 * (c - 1.0) * (-std::log1p(-k / n) - k / (n - 1.0));
}

inline double thm1_formula(const UrnSpec& spec) {
  const double n = static_cast<double>(spec.n());
  const double k = static_cast<double>(spec.k());
  const double c = static_cast<double>(spec.c());
  const SigmaStats sig = sigma_stats(spec);
  const double nk = n - k;
  return thm1_leading(n, k, c) + k * (2.0 * n + 1.0) / (12.0 * n * (n - 1.0) * nk) * sig.sigma1 +
         (1.0 / (nk * nk * nk) - 1.0 / (n * n * n)) / 360.0 * sig.sigma2;
}

}  // namespace detail

/// The ell-dependent upper bound on D for 1 <= k <= n/2 and ell_i >= 1.
inline double thm1_upper(const UrnSpec& spec) {
  detail::require_main_domain(spec, "thm1_upper");
  return detail::thm1_formula(spec);
}

/// For k > n/2 (and k < n) the bound is not proved; reports whether the same
/// closed form still dominates the exact divergence. Empty otherwise.
inline std::optional<bool> thm1_extrapolation_check(const UrnSpec& spec) {
  if (spec.c() < 2 || spec.has_empty_colour()) return std::nullopt;
  if (2 * spec.k() <= spec.n() || spec.k() >= spec.n()) return std::nullopt;
  return relative_entropy(spec) <= detail::thm1_formula(spec);
}

/// Coefficient brackets of the two-step Newton bound on -E U(ell, S):
///   second = -ell(ell-1) log(ell/(ell-1)),
///   third  = -ell(ell-1)(ell-2) log((ell-1)^2 / (ell(ell-2))).
/// ell = 1 makes both zero; ell = 2 gives second = -2 log 2, third = 0.
struct NewtonBrackets {
  double second = 0.0;
  double third = 0.0;
};

namespace detail {

template <class T>
void newton_brackets_in(std::int64_t ell, T& second, T& third) {
  const T l = static_cast<T>(ell);
  second = ell >= 2 ? -l * (l - 1) * std::log1p(1 / (l - 1)) : T(0);
  third = ell >= 3 ? -l * (l - 1) * (l - 2) * std::log1p(1 / (l * (l - 2))) : T(0);
}

template <class T>
T newton_bound_in(std::int64_t n, std::int64_t k, std::int64_t ell) {
  T second, third;
  newton_brackets_in<T>(ell, second, third);
  const T nn = static_cast<T>(n);
  const T kk = static_cast<T>(k);
  T out = 0;
  if (k >= 2) out += kk * (kk - 1) / (2 * nn * (nn - 1)) * second;
  if (k >= 3) out += kk * (kk - 1) * (kk - 2) / (6 * nn * (nn - 1) * (nn - 2)) * third;
  return out;
}

}  // namespace detail

inline NewtonBrackets newton_brackets(std::int64_t ell) {
  detail::require(ell >= 1, "newton_brackets: need ell >= 1");
  NewtonBrackets b;
  detail::newton_brackets_in<double>(ell, b.second, b.third);
  return b;
}

/// Upper bound on -E U(ell, S) from the factorial moments:
///   (k)_2/(2 (n)_2) * second + (k)_3/(6 (n)_3) * third.
inline double newton_bound(std::int64_t n, std::int64_t k, std::int64_t ell) {
  detail::require(ell >= 1 && ell <= n && k >= 0 && k <= n, "newton_bound: invalid urn parameters");
  return static_cast<double>(detail::newton_bound_in<long double>(n, k, ell));
}

namespace detail {

// ell ((1-x) log(1-x) + x) with x = k/n. The series sum_{j>=2} x^j/(j(j-1))
// avoids the cancellation for small x.
template <class T = double>
T split_first_bound(T n, T k, T ell) {
  const T x = k / n;
  if (x >= T(0.25)) return ell * ((1 - x) * std::log1p(-x) + x);
  T sum = 0, pw = x;
  for (int j = 2; j < 200; ++j) {
    pw *= x;
    const T term = pw / (T(j) * T(j - 1));
    sum += term;
    if (term < sum * std::numeric_limits<T>::epsilon()) break;
  }
  return ell * sum;
}

// -k ell / (2n(n-1)) + k ell / ((n-1)(n-ell)(n-k))
template <class T = double>
T split_third_bound(T n, T k, T ell) {
  return -k * ell / (2 * n * (n - 1)) + k * ell / ((n - 1) * (n - ell) * (n - k));
}

}  // namespace detail

/// Two-colour bound for the minority colour ell <= n/2, with 1 <= k <= n/2.
inline double prop12_upper(std::int64_t n, std::int64_t k, std::int64_t ell) {
  detail::require_applicable(n >= 2, "prop12_upper: need n >= 2");
  detail::require_applicable(ell >= 1 && 2 * ell <= n, "prop12_upper: need 1 <= ell <= n/2");
  detail::require_applicable(k >= 1 && 2 * k <= n, "prop12_upper: need 1 <= k <= n/2");
  using L = long double;
  const L nn = static_cast<L>(n);
  const L kk = static_cast<L>(k);
  const L ll = static_cast<L>(ell);
  return static_cast<double>(detail::split_first_bound(nn, kk, ll) + detail::split_third_bound(nn, kk, ll) +
                             detail::newton_bound_in<L>(n, k, ell));
}

/// D(n,k,(1,n-1)) = (1-k/n) log(1-k/n) - k(1-1/n) log(1-1/n).
inline double exact_binary_divergence(std::int64_t n, std::int64_t k) {
  detail::require(n >= 1 && k >= 0 && k <= n, "exact_binary_divergence: need 0 <= k <= n");
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  return xlogx(1.0 - kk / nn) - kk * xlogx(1.0 - 1.0 / nn);
}

struct LimitValues {
  double balanced = 0.0;    // ((c-1)/2)(-log(1-s) - s)
  double unbalanced = 0.0;  // s + (1-s) log(1-s), two colours with ell = (1, n-1)
};

/// Large-n limits of D with k/n -> s.
inline LimitValues limit_expressions(std::int64_t c, double s) {
  detail::require(s > 0.0 && s < 1.0, "limit_expressions: need 0 < s < 1");
  detail::require(c >= 2, "limit_expressions: need c >= 2");
  const double l1ms = std::log1p(-s);
  return {0.5 * static_cast<double>(c - 1) * (-l1ms - s), s + (1.0 - s) * l1ms};
}

/// Root in (0,1) of unbalanced(s) = balanced(s) for c = 2, by bisection.
inline double crossover_s_star() {
  auto gap = [](double s) {
    const LimitValues v = limit_expressions(2, s);
    return v.unbalanced - v.balanced;
  };
  double lo = 0.5;   // gap > 0
  double hi = 0.99;  // gap < 0
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// An exactly computed quantity and the closed-form bound claimed for it.
struct BoundCheck {
  double exact = 0.0;
  double bound = 0.0;

  bool holds(double slack = 1e-10) const { return exact <= bound + slack; }
};

/// Exact-vs-bound pairs for the intermediate steps behind the ell-dependent
/// upper bounds. With xi_i = ell_i k / n and S_i the count of colour i:
///
///  first_term   U(n,k) - sum U(ell_i, xi_i)
///  second_term  sum (-E U(ell_i, S_i) + U(ell_i, xi_i))
///  taylor[i]    -E U(ell_i,S_i) + U(ell_i,xi_i)
///               vs -psi'(x) M2/2 + psi''(x) M3/6, x = ell_i(1-k/n)+1
///  newton[i]    -E U(ell_i, S_i) vs newton_bound(n, k, ell_i)
///  split        (c = 2 only) the three brackets of
///               [U(n,k) - U(m, m k/n)] + [-E U(ell, S_1)] + [U(m, m k/n) - E U(m, S_2)]
///               for the minority colour ell and m = n - ell.
struct ProofDiagnostics {
  BoundCheck first_term;
  BoundCheck second_term;
  std::vector<BoundCheck> taylor;
  std::vector<BoundCheck> newton;
  std::optional<std::array<BoundCheck, 3>> split;

  bool all_hold(double slack = 1e-10) const {
    if (!first_term.holds(slack) || !second_term.holds(slack)) return false;
    for (const auto& t : taylor)
      if (!t.holds(slack)) return false;
    for (const auto& t : newton)
      if (!t.holds(slack)) return false;
    if (split)
      for (const auto& t : *split)
        if (!t.holds(slack)) return false;
    return true;
  }
};

inline ProofDiagnostics proof_step_diagnostics(const UrnSpec& spec) {
  detail::require_main_domain(spec, "proof_step_diagnostics");
  detail::require_applicable(spec.n() >= 3, "proof_step_diagnostics: need n >= 3");
  const std::int64_t n = spec.n();
  const std::int64_t k = spec.k();
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  const double c = static_cast<double>(spec.c());
  const double frac = kk / nn;
  const SigmaStats sig = sigma_stats(spec);

  ProofDiagnostics d;
  const double u_nk = u_value(nn, kk);

  CompensatedSum first_exact;
  first_exact.add(u_nk);
  CompensatedSum second_exact;
  double inv_cubes = 0.0;
  for (auto l : spec.ell()) {
    const double ll = static_cast<double>(l);
    const double u_mean = u_value(ll, ll * frac);
    const double eu = expected_u(n, k, l);
    first_exact.add(-u_mean);
    second_exact.add(-eu + u_mean);
    inv_cubes += 1.0 / (ll * ll * ll);

    const double x = ll * (1.0 - frac) + 1.0;
    const double taylor_bound = -digamma_family(x, 1) * central_moment(n, k, l, 2) / 2.0 +
                                digamma_family(x, 2) * central_moment(n, k, l, 3) / 6.0;
    d.taylor.push_back({-eu + u_mean, taylor_bound});
    d.newton.push_back({-eu, newton_bound(n, k, l)});
  }
  const double nk = nn - kk;
  d.first_term = {first_exact.value(),
                  0.5 * (c - 1.0) * -std::log1p(-frac) + kk / (12.0 * nn * nk) * (1.0 - sig.sigma1) +
                      ((nn * nn * nn) / (nk * nk * nk) - 1.0) / 360.0 * inv_cubes};
  d.second_term = {second_exact.value(), -kk * (c - 1.0) / (2.0 * (nn - 1.0)) +
                                             kk / (4.0 * nk * (nn - 1.0)) * (sig.sigma1 - c)};

  if (spec.c() == 2) {
    const std::int64_t ell = std::min(spec.ell(0), spec.ell(1));
    const std::int64_t m = n - ell;
    const double ll = static_cast<double>(ell);
    const double mm = static_cast<double>(m);
    const double u_m = u_value(mm, mm * frac);
    std::array<BoundCheck, 3> parts{};
    parts[0] = {u_nk - u_m, detail::split_first_bound(nn, kk, ll)};
    parts[1] = {-expected_u(n, k, ell), newton_bound(n, k, ell)};
    parts[2] = {u_m - expected_u(n, k, m), detail::split_third_bound(nn, kk, ll)};
    d.split = parts;
  }
  return d;
}

/// Every closed-form bound for one urn. Bounds whose hypotheses fail are
/// absent rather than extrapolated. Empty colours are dropped first.
struct BoundReport {
  std::optional<double> stam_upper;
  std::optional<double> stam_lower;
  std::optional<double> hm_upper;  // +infinity when k = n
  std::optional<double> hm_lower;
  std::optional<double> thm1_upper;
  std::optional<double> prop12_upper;
  std::optional<double> exact_binary;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double df_tv = 0.0;  // c k / n
};

inline BoundReport bound_report(const UrnSpec& spec) {
  const UrnSpec red = spec.reduced();
  const std::int64_t n = red.n();
  const std::int64_t k = red.k();
  const auto c = static_cast<std::int64_t>(red.c());
  BoundReport r;
  const SigmaStats sig = sigma_stats(red);
  r.sigma1 = sig.sigma1;
  r.sigma2 = sig.sigma2;
  r.df_tv = static_cast<double>(c) * static_cast<double>(k) / static_cast<double>(n);
  if (c >= 2 && k >= 1) {
    const BoundPair stam = stam_bounds(n, k, c);
    r.stam_upper = stam.upper;
    r.stam_lower = stam.lower;
    const HmBounds hm = hm_bounds(n, k, c);
    r.hm_upper = hm.upper;
    r.hm_lower = hm.lower;
  }
  if (c >= 2 && k >= 1 && 2 * k <= n) {
    r.thm1_upper = detail::thm1_formula(red);
    if (c == 2) r.prop12_upper = prop12_upper(n, k, std::min(red.ell(0), red.ell(1)));
  }
  if (c == 2 && std::min(red.ell(0), red.ell(1)) == 1) r.exact_binary = exact_binary_divergence(n, k);
  return r;
}

}  // namespace urnent
