#pragma once

// Invariant suites behind `urnent verify` and the acceptance run. Each suite
// counts checks, records the first violation with the offending spec, and
// is timed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "urnent/bounds.hpp"
#include "urnent/definetti.hpp"
#include "urnent/divergence.hpp"
#include "urnent/numerics.hpp"
#include "urnent/oracle.hpp"
#include "urnent/parallel.hpp"
#include "urnent/urn.hpp"
#include "urnent/urn_spec.hpp"

namespace urnent::verify {

enum class Level { fast, full };

inline constexpr std::uint64_t kDefinettiSeed = 20240917;
inline constexpr std::uint64_t kOracleSeed = 1234567;
inline constexpr std::uint64_t kTopsoeSeed = 42;

struct SuiteResult {
  std::string name;
  std::int64_t checks = 0;
  std::int64_t violations = 0;
  std::string first_violation;
  std::vector<std::string> notes;
  double seconds = 0.0;

  bool passed() const { return violations == 0; }

  template <class Describe>
  bool check(bool ok, Describe&& describe) {
    ++checks;
    if (!ok && violations++ == 0) first_violation = describe();
    return ok;
  }

  void merge(const SuiteResult& other) {
    checks += other.checks;
    if (other.violations > 0 && violations == 0) first_violation = other.first_violation;
    violations += other.violations;
  }
};

/// The uniform bounds as swappable functions, so a suite can be run against
/// a deliberately broken formula.
struct BoundFunctions {
  std::function<BoundPair(std::int64_t, std::int64_t, std::int64_t)> stam = stam_bounds;
  std::function<HmBounds(std::int64_t, std::int64_t, std::int64_t)> hm = hm_bounds;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class Body>
SuiteResult timed(const std::string& name, Body&& body) {
  SuiteResult r;
  r.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  body(r);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline bool close(double x, double ref, double rel, double abs = 0.0) {
  return std::abs(x - ref) <= rel * std::abs(ref) + abs;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Grids

/// c = 2: n in 20..200, 1 <= k <= n/2, minority ell in 1..n/2. c = 3 is
/// thinned: strided n, k and sorted compositions with parts >= 1.
inline std::vector<UrnSpec> bracketing_grid(Level level) {
  std::vector<UrnSpec> out;
  const bool full = level == Level::full;
  for (std::int64_t n = 20; n <= 200; n += full ? 1 : 10)
    for (std::int64_t k = 1; 2 * k <= n; ++k)
      for (std::int64_t l = 1; 2 * l <= n; ++l) out.emplace_back(k, std::vector<std::int64_t>{l, n - l});
  for (std::int64_t n = 20; n <= 200; n += full ? 15 : 45) {
    const std::int64_t kstep = std::max<std::int64_t>(1, n / (full ? 10 : 5));
    std::set<std::int64_t> ks{1, 2, 3, n / 2};
    for (std::int64_t k = kstep; 2 * k <= n; k += kstep) ks.insert(k);
    const std::int64_t lstep = std::max<std::int64_t>(1, n / (full ? 12 : 6));
    std::set<std::int64_t> ls{1, 2};
    for (std::int64_t l = lstep; 3 * l <= n; l += lstep) ls.insert(l);
    for (auto k : ks)
      for (auto l1 : ls)
        for (auto l2 : ls) {
          const std::int64_t l3 = n - l1 - l2;
          if (l2 < l1 || l3 < l2) continue;
          out.emplace_back(k, std::vector<std::int64_t>{l1, l2, l3});
        }
  }
  return out;
}

/// Specs with n <= 60 and c <= 4 (empty colours allowed) for the p.m.f.
/// identities and the moment checks.
inline std::vector<UrnSpec> urn_grid(Level level) {
  std::vector<UrnSpec> out;
  const bool full = level == Level::full;
  std::mt19937_64 rng(7);
  for (std::int64_t n = 1; n <= 60; n += full ? 1 : 7) {
    std::set<std::int64_t> ks{0, 1, 2, n / 3, n / 2, n - 1, n};
    std::vector<std::vector<std::int64_t>> ells{{n}};
    const std::int64_t step2 = full ? 1 : std::max<std::int64_t>(1, n / 6);
    for (std::int64_t l = 0; l <= n; l += step2) ells.push_back({l, n - l});
    const std::int64_t step3 = std::max<std::int64_t>(1, n / (full ? 6 : 3));
    for (std::int64_t a = 0; a <= n; a += step3)
      for (std::int64_t b = 0; a + b <= n; b += step3) ells.push_back({a, b, n - a - b});
    for (int rep = 0; rep < (full ? 3 : 1); ++rep) {
      std::uniform_int_distribution<std::int64_t> cut(0, n);
      std::array<std::int64_t, 3> cuts{cut(rng), cut(rng), cut(rng)};
      std::sort(cuts.begin(), cuts.end());
      ells.push_back({cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1], n - cuts[2]});
    }
    for (const auto& ell : ells)
      for (auto k : ks)
        if (k >= 0 && k <= n) out.emplace_back(k, ell);
  }
  return out;
}

/// n <= 200, c <= 3, all colours occupied, k over the whole range 0..n.
inline std::vector<UrnSpec> divergence_grid(Level level) {
  std::vector<UrnSpec> out;
  const bool full = level == Level::full;
  std::vector<std::int64_t> ns;
  for (std::int64_t n = 2; n <= 60; n += full ? 1 : 6) ns.push_back(n);
  for (std::int64_t n = 70; n <= 200; n += full ? 10 : 65) ns.push_back(n);
  for (auto n : ns) {
    const std::int64_t div = full ? 25 : 8;
    const std::int64_t kstep = std::max<std::int64_t>(1, n / div);
    std::vector<std::int64_t> ks;
    for (std::int64_t k = 0; k <= n; k += kstep) ks.push_back(k);
    if (ks.back() != n) ks.push_back(n);
    const std::int64_t lstep = std::max<std::int64_t>(1, n / div);
    for (auto k : ks) {
      for (std::int64_t l = 1; 2 * l <= n; l += lstep) out.emplace_back(k, std::vector<std::int64_t>{l, n - l});
      if (n >= 3 && (n <= 60 || k % (2 * kstep) == 0)) {
        const std::int64_t l3step = std::max<std::int64_t>(1, n / (full ? 5 : 3));
        for (std::int64_t a = 1; 3 * a <= n; a += l3step)
          for (std::int64_t b = a; a + 2 * b <= n; b += l3step)
            out.emplace_back(k, std::vector<std::int64_t>{a, b, n - a - b});
      }
    }
  }
  return out;
}

/// Sampled specs for the certified cross-check: n in [10, 200], c in {2,3},
/// every colour occupied, k in [0, n].
inline std::vector<UrnSpec> oracle_sample(std::size_t count, std::uint64_t seed = kOracleSeed) {
  std::mt19937_64 rng(seed);
  std::vector<UrnSpec> out;
  while (out.size() < count) {
    const std::int64_t n = std::uniform_int_distribution<std::int64_t>(10, 200)(rng);
    const std::size_t c = std::uniform_int_distribution<std::size_t>(2, 3)(rng);
    std::vector<std::int64_t> cuts;
    std::uniform_int_distribution<std::int64_t> cut(1, n - 1);
    while (cuts.size() < c - 1) {
      const auto v = cut(rng);
      if (std::find(cuts.begin(), cuts.end(), v) == cuts.end()) cuts.push_back(v);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::int64_t> ell;
    std::int64_t prev = 0;
    for (auto v : cuts) ell.push_back(v - prev), prev = v;
    ell.push_back(n - prev);
    const std::int64_t k = std::uniform_int_distribution<std::int64_t>(0, n)(rng);
    out.emplace_back(k, ell);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Suites

/// Frozen high-precision values of every closed form and of a few exact
/// divergences.
inline SuiteResult suite_reference_values(const BoundFunctions& f = {}) {
  return detail::timed("reference values", [&](SuiteResult& r) {
    auto expect = [&](const std::string& what, double got, double ref) {
      r.check(detail::close(got, ref, 1e-11, 1e-15), [&] {
        return what + " = " + detail::fmt(got) + ", expected " + detail::fmt(ref);
      });
    };
    const BoundPair stam = f.stam(100, 30, 2);
    expect("stam_upper(n=100, k=30, c=2)", stam.upper, 0.061886470337174562527);
    expect("stam_lower(n=100, k=30, c=2)", stam.lower, 0.022191613100704009795);
    const HmBounds hm = f.hm(100, 30, 2);
    expect("hm_upper(n=100, k=30, c=2)", hm.upper, 0.060709115127484469958);
    expect("hm_lower(n=100, k=30, c=2)", hm.lower, 0.024805845132495838620);
    expect("hm_upper(n=100, k=99, c=2)", f.hm(100, 99, 2).upper, 4.1051198501345899269);
    expect("thm1_upper(n=100, k=30, ell=(50,50))", thm1_upper(UrnSpec(30, {50, 50})), 0.029722838485842910015);
    expect("thm1_upper(n=100, k=30, ell=(1,99))", thm1_upper(UrnSpec(30, {1, 99})), 0.10538628070767350038);
    expect("thm1_upper(n=100, k=1, ell=(50,50))", thm1_upper(UrnSpec(1, {50, 50})), 4.3024608087550e-5);
    expect("prop12_upper(n=100, k=30, ell=1)", prop12_upper(100, 30, 1), 0.048856115044190408791);
    expect("prop12_upper(n=100, k=30, ell=50)", prop12_upper(100, 30, 50), 0.065088539764296517286);
    expect("prop12_upper(n=100, k=1, ell=10)", prop12_upper(100, 1, 10), 7.9612569586392e-6);
    expect("D(n=100, k=30, ell=(1,99))", relative_entropy(UrnSpec(30, {1, 99})), 0.048822514091880137912);
    expect("D(n=4, k=2, ell=(2,2))", relative_entropy(UrnSpec(2, {2, 2})), 0.056633012265132490967);
    expect("D(n=100, k=30, ell=(50,50))", relative_entropy(UrnSpec(30, {50, 50})), 0.027581807935282950725);
    expect("TV(n=4, k=2, ell=(2,2))", total_variation(UrnSpec(2, {2, 2})), 1.0 / 6.0);
    expect("TV(n=100, k=30, ell=(50,50))", total_variation(UrnSpec(30, {50, 50})), 0.086441460863272171767);
    expect("exact_binary(n=4, k=2)", exact_binary_divergence(4, 2), 0.084949518397698736450);
    expect("U(4,2)", u_value(4, 2), 0.28768207245178092744);
    expect("A(4,2)", u_sandwich(4, 2).approx, 0.28796538193347005979);
    expect("eps(4,2)", u_sandwich(4, 2).eps, 3.0381944444444444e-4);
    expect("U(100,30)", u_value(100, 30), 4.8547735898562032184);
    expect("A(100,30)", u_sandwich(100, 30).approx, 4.8547735951765101438);
    expect("eps(100,30)", u_sandwich(100, 30).eps, 5.3206997084548e-9);
    expect("balanced(c=2, s=0.3)", limit_expressions(2, 0.3).balanced, 0.028337471969366189456);
    expect("unbalanced(s=0.3)", limit_expressions(2, 0.3).unbalanced, 0.050327539242887334761);
    expect("balanced(c=2, s=0.95)", limit_expressions(2, 0.95).balanced, 1.0228661367769954967);
    expect("unbalanced(s=0.95)", limit_expressions(2, 0.95).unbalanced, 0.80021338632230045033);
    r.check(std::abs(crossover_s_star() - 0.88341396724187915405) <= 1e-8,
            [&] { return "crossover_s_star = " + detail::fmt(crossover_s_star()); });
    expect("log_gamma(0.5)", log_gamma(0.5), 0.57236494292470008707);
    const std::vector<double> fair{0.5, 0.5};
    const auto df = definetti_divergence(mixing_from_iid(fair, 4), 2);
    expect("de Finetti d (fair coin, n=4, k=2)", df.d, 0.032269260568785585836);
    expect("de Finetti chain_mid (fair coin, n=4, k=2)", df.chain_mid, 0.063712138798274052338);
    expect("de Finetti chain_max (fair coin, n=4, k=2)", df.chain_max, 0.084949518397698736450);
  });
}

/// Stirling sandwich, digamma/trigamma envelopes, psi''' sign, Topsoe
/// brackets, forward-difference algebra.
inline SuiteResult suite_numerics(Level level) {
  return detail::timed("numerics", [&](SuiteResult& r) {
    constexpr double slack = 1e-12;
    const std::int64_t a_max = level == Level::full ? 500 : 200;
    for (std::int64_t a = 1; a <= a_max; ++a)
      for (std::int64_t b = 0; b <= a - 1; ++b) {
        const double u = u_value(static_cast<double>(a), static_cast<double>(b));
        const USandwich sw = u_sandwich(static_cast<double>(a), static_cast<double>(b));
        r.check(sw.lower() <= u + slack && u <= sw.upper() + slack, [&] {
          return "U sandwich at (a=" + std::to_string(a) + ", b=" + std::to_string(b) + "): U=" + detail::fmt(u) +
                 " A=" + detail::fmt(sw.approx) + " eps=" + detail::fmt(sw.eps);
        });
      }
    for (int i = 0; i < 200; ++i) {
      const double y = 0.5 * std::pow(2e4, i / 199.0);
      const double psi = digamma(y);
      const RealInterval env = digamma_envelope(y);
      r.check(env.contains(psi, slack), [&] { return "digamma envelope at y=" + detail::fmt(y); });
      const double g = -trigamma(y) + 1.0 / y;
      r.check(trigamma_envelope(y).contains(g, slack), [&] { return "trigamma envelope at x=" + detail::fmt(y); });
      r.check(digamma_family(y, 3) >= -1e-13, [&] { return "psi''' sign at x=" + detail::fmt(y); });
    }
    std::mt19937_64 rng(kTopsoeSeed);
    std::uniform_real_distribution<double> ux(0.0, 100.0);
    for (int i = 0; i < 500; ++i) {
      const double x = ux(rng);
      const LogBracket b = log1p_topsoe(x);
      const double l = std::log1p(x);
      r.check(b.lower <= l + slack && l <= b.upper + slack, [&] { return "Topsoe bracket at x=" + detail::fmt(x); });
    }
    std::uniform_real_distribution<double> uv(-1.0, 1.0);
    for (std::size_t order = 0; order <= 6; ++order) {
      for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> f(order + 1), g(order + 1), h(order + 1), poly(order + 1);
        const double alpha = uv(rng), beta = uv(rng);
        std::vector<double> coef(order);
        for (auto& c : coef) c = uv(rng);
        for (std::size_t i = 0; i <= order; ++i) {
          f[i] = uv(rng);
          g[i] = uv(rng);
          h[i] = alpha * f[i] + beta * g[i];
          double p = 0.0, x = static_cast<double>(i);
          for (std::size_t j = coef.size(); j-- > 0;) p = p * x + coef[j];
          poly[i] = p;
        }
        const double lin = forward_differences(h, order) - alpha * forward_differences(f, order) -
                           beta * forward_differences(g, order);
        r.check(std::abs(lin) <= 1e-12 * std::pow(2.0, static_cast<double>(order)),
                [&] { return "forward_differences linearity, r=" + std::to_string(order); });
        if (order >= 1)
          r.check(std::abs(forward_differences(poly, order)) <= 1e-11 * std::pow(order + 1.0, order),
                  [&] { return "forward_differences annihilation, r=" + std::to_string(order); });
      }
    }
  });
}

/// Per-spec p.m.f. identities: normalization, equal means, permutation and
/// complement symmetry, marginal consistency.
inline void check_pmf_identities(const UrnSpec& spec, SuiteResult& r) {
  constexpr double tol = 1e-12;
  const auto name = [&] { return to_string(spec); };
  const std::size_t c = spec.c();
  const double n = static_cast<double>(spec.n());
  const double k = static_cast<double>(spec.k());

  CompensatedSum sum_h, sum_b;
  std::vector<CompensatedSum> mean_h(c), mean_b(c);
  std::vector<std::map<std::int64_t, double>> marg(c);
  std::vector<std::int64_t> rev_ell(spec.ell().rbegin(), spec.ell().rend());
  const UrnSpec rev(spec.k(), rev_ell);
  const UrnSpec comp(spec.n() - spec.k(), spec.ell());
  const PmfEvaluator ev(spec), ev_rev(rev), ev_comp(comp);
  bool perm_ok = true, comp_ok = true;
  for (const auto& s : compositions(spec.k(), c)) {
    const double h = std::exp(ev.log_hypergeometric(s));
    const double b = std::exp(ev.log_multinomial(s));
    sum_h.add(h);
    sum_b.add(b);
    for (std::size_t i = 0; i < c; ++i) {
      mean_h[i].add(h * static_cast<double>(s[i]));
      mean_b[i].add(b * static_cast<double>(s[i]));
      if (h > 0.0) marg[i][s[i]] += h;
    }
    CountVector rs(std::vector<std::int64_t>(s.s.rbegin(), s.s.rend()));
    perm_ok &= std::abs(std::exp(ev_rev.log_hypergeometric(rs)) - h) <= tol &&
               std::abs(std::exp(ev_rev.log_multinomial(rs)) - b) <= tol;
    bool in_support = true;
    CountVector cs;
    for (std::size_t i = 0; i < c; ++i) {
      in_support &= s[i] <= spec.ell(i);
      cs.s.push_back(spec.ell(i) - s[i]);
    }
    if (in_support) comp_ok &= std::abs(std::exp(ev_comp.log_hypergeometric(cs)) - h) <= tol;
  }
  r.check(std::abs(sum_h.value() - 1.0) <= tol, [&] { return "sum H != 1 for " + name(); });
  r.check(std::abs(sum_b.value() - 1.0) <= tol, [&] { return "sum B != 1 for " + name(); });
  r.check(perm_ok, [&] { return "permutation invariance fails for " + name(); });
  r.check(comp_ok, [&] { return "complement symmetry fails for " + name(); });
  for (std::size_t i = 0; i < c; ++i) {
    const double mean = k * static_cast<double>(spec.ell(i)) / n;
    const double mtol = tol * std::max(1.0, mean);
    r.check(std::abs(mean_h[i].value() - mean) <= mtol && std::abs(mean_b[i].value() - mean) <= mtol,
            [&] { return "mean identity fails for colour " + std::to_string(i) + " of " + name(); });
    bool ok = true;
    for (const auto& [si, p] : marg[i])
      ok &= std::abs(p - marginal_hypergeometric(spec.n(), spec.k(), spec.ell(i), si)) <= tol;
    r.check(ok, [&] { return "marginal consistency fails for colour " + std::to_string(i) + " of " + name(); });
  }
}

/// Factorial moments r <= 4 and central moments of order 2, 3 against
/// summation over the marginal law. Tolerance is 1e-12 relative to
/// max(1, |value|).
inline void check_moments(std::int64_t n, std::int64_t k, std::int64_t ell, SuiteResult& r) {
  const auto where = [&] {
    return "(n=" + std::to_string(n) + ", k=" + std::to_string(k) + ", ell_i=" + std::to_string(ell) + ")";
  };
  const double mean = static_cast<double>(k) * static_cast<double>(ell) / static_cast<double>(n);
  std::array<CompensatedSum, 5> fact;
  CompensatedSum m2, m3;
  for (std::int64_t s = 0; s <= std::min(k, ell); ++s) {
    const double p = marginal_hypergeometric(n, k, ell, s);
    if (p == 0.0) continue;
    for (std::int64_t order = 0; order <= 4; ++order)
      fact[static_cast<std::size_t>(order)].add(p * falling_factorial(static_cast<double>(s), order));
    const double d = static_cast<double>(s) - mean;
    m2.add(p * d * d);
    m3.add(p * d * d * d);
  }
  for (std::int64_t order = 0; order <= 4; ++order) {
    const double want = fact[static_cast<std::size_t>(order)].value();
    const double got = factorial_moment(n, k, ell, order);
    r.check(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)), [&] {
      return "factorial moment r=" + std::to_string(order) + " at " + where() + ": " + detail::fmt(got) + " vs " +
             detail::fmt(want);
    });
  }
  const double got2 = central_moment(n, k, ell, 2);
  r.check(std::abs(got2 - m2.value()) <= 1e-12 * std::max(1.0, m2.value()),
          [&] { return "second central moment at " + where(); });
  if (n > 2) {
    const double got3 = central_moment(n, k, ell, 3);
    r.check(std::abs(got3 - m3.value()) <= 1e-12 * std::max(1.0, std::abs(m3.value())),
            [&] { return "third central moment at " + where(); });
  }
}

inline SuiteResult suite_urn(Level level) {
  return detail::timed("urn identities", [&](SuiteResult& r) {
    for (const auto& spec : urn_grid(level)) check_pmf_identities(spec, r);
  });
}

inline SuiteResult suite_moments(Level level) {
  return detail::timed("moment identities", [&](SuiteResult& r) {
    const std::int64_t step = level == Level::full ? 1 : 5;
    for (std::int64_t n = 1; n <= 60; n += step)
      for (std::int64_t k = 0; k <= n; ++k)
        for (std::int64_t ell = 0; ell <= n; ++ell) check_moments(n, k, ell, r);
  });
}

inline void check_divergence_spec(const UrnSpec& spec, SuiteResult& r) {
  const auto name = [&] { return to_string(spec); };
  const DivergenceReport rep = divergence_report(spec);
  r.check(rep.kl >= -1e-14, [&] { return "negative D " + detail::fmt(rep.kl) + " at " + name(); });
  if (spec.k() <= 1) {
    r.check(std::abs(rep.kl) <= 1e-14 && std::abs(rep.tv) <= 1e-14,
            [&] { return "D or TV nonzero for k <= 1 at " + name(); });
  }
  r.check(rep.routes_agree, [&] {
    return "U-representation disagrees at " + name() + ": " + detail::fmt(rep.kl) + " vs " + detail::fmt(rep.kl_via_u);
  });
  r.check(rep.pinsker, [&] { return "Pinsker fails at " + name(); });
  r.check(rep.bretagnolle_huber, [&] { return "Bretagnolle-Huber fails at " + name(); });
  r.check(rep.diaconis_freedman, [&] { return "Diaconis-Freedman fails at " + name(); });
  std::vector<std::int64_t> rot(spec.ell().begin() + 1, spec.ell().end());
  rot.push_back(spec.ell(0));
  const double d_rot = relative_entropy(UrnSpec(spec.k(), rot));
  r.check(std::abs(d_rot - rep.kl) <= 1e-12, [&] { return "D not permutation invariant at " + name(); });
}

inline SuiteResult suite_divergence(Level level, unsigned threads = 1) {
  return detail::timed("divergence", [&](SuiteResult& r) {
    const auto grid = divergence_grid(level);
    const auto parts = parallel_map<SuiteResult>(grid.size(), threads, [&](std::size_t i) {
      SuiteResult part;
      check_divergence_spec(grid[i], part);
      return part;
    });
    for (const auto& p : parts) r.merge(p);
    const std::int64_t n_max = level == Level::full ? 500 : 100;
    for (std::int64_t n = 2; n <= n_max; ++n)
      for (std::int64_t k = 0; k <= n; ++k) {
        const double exact = relative_entropy(UrnSpec(k, {1, n - 1}));
        const double closed = exact_binary_divergence(n, k);
        r.check(std::abs(exact - closed) <= 1e-12, [&] {
          return "exact binary form at (n=" + std::to_string(n) + ", k=" + std::to_string(k) +
                 "): " + detail::fmt(exact) + " vs " + detail::fmt(closed);
        });
      }
  });
}

/// All bracketing checks for one spec (1 <= k <= n/2, every colour occupied).
inline void check_bracketing(const UrnSpec& spec, const BoundFunctions& f, SuiteResult& r) {
  constexpr double slack = 1e-10;
  const double d = relative_entropy(spec);
  const auto c = static_cast<std::int64_t>(spec.c());
  const auto name = [&] { return to_string(spec) + " with D=" + detail::fmt(d); };
  const BoundPair stam = f.stam(spec.n(), spec.k(), c);
  const HmBounds hm = f.hm(spec.n(), spec.k(), c);
  r.check(stam.lower <= d + slack, [&] { return "stam_lower " + detail::fmt(stam.lower) + " > D at " + name(); });
  r.check(d <= stam.upper + slack, [&] { return "stam_upper " + detail::fmt(stam.upper) + " < D at " + name(); });
  r.check(hm.lower <= d + slack, [&] { return "hm_lower " + detail::fmt(hm.lower) + " > D at " + name(); });
  r.check(d <= hm.upper + slack, [&] { return "hm_upper " + detail::fmt(hm.upper) + " < D at " + name(); });
  const double t1 = thm1_upper(spec);
  r.check(d <= t1 + slack, [&] { return "thm1_upper " + detail::fmt(t1) + " < D at " + name(); });
  if (c == 2) {
    const double p12 = prop12_upper(spec.n(), spec.k(), std::min(spec.ell(0), spec.ell(1)));
    r.check(d <= p12 + slack, [&] { return "prop12_upper " + detail::fmt(p12) + " < D at " + name(); });
  }
  const SigmaStats sig = sigma_stats(spec);
  r.check(sig.sigma1 >= static_cast<double>(c * c) - 1e-12, [&] { return "sigma1 < c^2 at " + name(); });
}

inline void check_diagnostics(const UrnSpec& spec, SuiteResult& r) {
  const ProofDiagnostics diag = proof_step_diagnostics(spec);
  const auto name = [&] { return to_string(spec); };
  r.check(diag.first_term.holds(), [&] { return "first-term lemma bound fails at " + name(); });
  r.check(diag.second_term.holds(), [&] { return "second-term lemma bound fails at " + name(); });
  for (std::size_t i = 0; i < diag.taylor.size(); ++i) {
    r.check(diag.taylor[i].holds(), [&] { return "Taylor bound fails for colour " + std::to_string(i) + " at " + name(); });
    r.check(diag.newton[i].holds(), [&] { return "Newton bound fails for colour " + std::to_string(i) + " at " + name(); });
  }
  if (diag.split)
    for (std::size_t j = 0; j < 3; ++j)
      r.check((*diag.split)[j].holds(), [&] { return "split part " + std::to_string(j + 1) + " fails at " + name(); });
}

/// x majorizes y: equal totals and every partial sum of the decreasing
/// rearrangement of x dominates that of y.
inline bool majorizes(std::vector<std::int64_t> x, std::vector<std::int64_t> y) {
  if (x.size() != y.size()) return false;
  std::sort(x.rbegin(), x.rend());
  std::sort(y.rbegin(), y.rend());
  std::int64_t px = 0, py = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    px += x[i];
    py += y[i];
    if (px < py) return false;
  }
  return px == py;
}

inline const std::vector<std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>>& majorization_pairs() {
  static const std::vector<std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>> pairs{
      {{10, 1, 1}, {8, 2, 2}},   {{8, 2, 2}, {6, 3, 3}},         {{6, 3, 3}, {4, 4, 4}},
      {{6, 4, 2}, {5, 4, 3}},    {{9, 2, 1}, {7, 3, 2}},         {{1, 99}, {10, 90}},
      {{10, 90}, {30, 70}},      {{30, 70}, {50, 50}},           {{17, 1, 1, 1}, {5, 5, 5, 5}},
      {{8, 6, 4, 2}, {6, 5, 5, 4}}};
  return pairs;
}

/// Bracketing over the grid, proof-step diagnostics on its c = 2 part, the
/// figure domination claim, majorization, leading-term and limit checks.
inline SuiteResult suite_bounds(Level level, const BoundFunctions& f = {}, unsigned threads = 1) {
  return detail::timed("bounds", [&](SuiteResult& r) {
    const auto grid = bracketing_grid(level);
    const auto parts = parallel_map<SuiteResult>(grid.size(), threads, [&](std::size_t i) {
      SuiteResult part;
      check_bracketing(grid[i], f, part);
      if (grid[i].c() == 2) check_diagnostics(grid[i], part);
      return part;
    });
    for (const auto& p : parts) r.merge(p);

    for (std::int64_t l = 1; l <= 50; ++l) {
      const UrnSpec spec(30, {l, 100 - l});
      const double ours = std::min(thm1_upper(spec), prop12_upper(100, 30, l));
      const double theirs = std::min(f.stam(100, 30, 2).upper, f.hm(100, 30, 2).upper);
      r.check(ours <= theirs, [&] { return "new bounds do not beat uniform ones at " + to_string(spec); });
    }

    for (const auto& [x, y] : majorization_pairs()) {
      const auto sx = sigma_stats(UrnSpec(0, x)).sigma1;
      const auto sy = sigma_stats(UrnSpec(0, y)).sigma1;
      r.check(majorizes(x, y) && sx >= sy, [&] {
        return "sigma1 not Schur convex on " + to_string(CountVector(x)) + " vs " + to_string(CountVector(y));
      });
    }

    for (std::int64_t c = 2; c <= 3; ++c)
      for (std::int64_t n = 100; n <= 2000; n += 100)
        for (double s : {0.1, 0.2, 0.25, 0.3, 0.4, 0.5}) {
          const auto k = static_cast<std::int64_t>(std::llround(s * static_cast<double>(n)));
          const double nn = static_cast<double>(n), kk = static_cast<double>(k);
          const double lead = urnent::detail::thm1_leading(nn, kk, static_cast<double>(c));
          const double lim = limit_expressions(c, kk / nn).balanced;
          r.check(std::abs(lead - lim) <= static_cast<double>(c - 1) * kk / (nn * (nn - 1.0)), [&] {
            return "leading term far from the balanced limit at n=" + std::to_string(n) + ", k=" + std::to_string(k);
          });
        }

    const double lim = limit_expressions(2, 0.3).balanced;
    double prev_gap = std::numeric_limits<double>::infinity();
    for (std::int64_t n : {100, 1000, 10000}) {
      const double gap = std::abs(relative_entropy(UrnSpec(3 * n / 10, {n / 2, n / 2})) - lim);
      r.check(gap < prev_gap, [&] { return "limit gap not decreasing at n=" + std::to_string(n); });
      prev_gap = gap;
    }
    r.check(prev_gap <= 1e-3, [&] { return "limit gap " + detail::fmt(prev_gap) + " at n=10000"; });
  });
}

/// Probability of one ordered sequence under P_k, drawing sequentially
/// without replacement from each atom.
inline double sequence_probability(const MixingMeasure& mu, const std::vector<std::size_t>& seq) {
  CompensatedSum acc;
  for (const auto& [ell, w] : mu.weights()) {
    std::vector<std::int64_t> left(ell.begin(), ell.end());
    double p = w;
    std::int64_t total = mu.n();
    for (auto x : seq) {
      p *= static_cast<double>(left[x]) / static_cast<double>(total);
      if (left[x] > 0) --left[x];
      --total;
    }
    acc.add(p);
  }
  return acc.value();
}

inline void check_mixing_measure(const MixingMeasure& mu, std::uint64_t seed, SuiteResult& r, bool per_class) {
  constexpr double slack = 1e-10;
  const auto name = [&](std::int64_t k) {
    return "measure #" + std::to_string(seed) + " (n=" + std::to_string(mu.n()) + ", c=" + std::to_string(mu.c()) +
           ", atoms=" + std::to_string(mu.weights().size()) + ", k=" + std::to_string(k) + ")";
  };
  DeFinettiDivergence prev{};
  for (std::int64_t k = 1; k <= mu.n(); ++k) {
    const DeFinettiDivergence dv = definetti_divergence(mu, k);
    const DeFinettiBounds b = definetti_bounds(mu.n(), k, static_cast<std::int64_t>(mu.c()));
    r.check(dv.d <= dv.chain_mid + slack && dv.chain_mid <= dv.chain_max + slack,
            [&] { return "chain inequality fails for " + name(k); });
    r.check(dv.d <= b.corollary + slack, [&] { return "corollary bound fails for " + name(k); });
    r.check(dv.tv <= b.pinsker_tv + slack, [&] { return "Pinsker TV bound fails for " + name(k); });
    if (k > 1)
      r.check(dv.d >= prev.d - slack && dv.tv >= prev.tv - slack,
              [&] { return "not nondecreasing in k for " + name(k); });
    prev = dv;
  }
  if (!per_class) return;
  std::mt19937_64 rng(seed);
  for (std::int64_t k = 1; k <= std::min<std::int64_t>(mu.n(), 6); ++k) {
    const TypeClassPmf pk = pk_from_mixture(mu, k);
    for (const auto& [s, mass] : pk.mass) {
      std::vector<std::size_t> seq;
      for (std::size_t i = 0; i < s.size(); ++i) seq.insert(seq.end(), static_cast<std::size_t>(s[i]), i);
      const double sorted = sequence_probability(mu, seq);
      std::shuffle(seq.begin(), seq.end(), rng);
      const double shuffled = sequence_probability(mu, seq);
      r.check(std::abs(sorted - shuffled) <= 1e-14 && std::abs(sorted - pk.per_sequence(s)) <= 1e-14,
              [&] { return "type class " + to_string(s) + " not uniform for " + name(k); });
    }
  }
}

inline SuiteResult suite_definetti(Level level, unsigned threads = 1) {
  return detail::timed("de Finetti", [&](SuiteResult& r) {
    const std::vector<double> fair{0.5, 0.5};
    const auto df = definetti_divergence(mixing_from_iid(fair, 4), 2);
    r.check(std::abs(df.d - 0.032269260568785585836) <= 1e-10 &&
                std::abs(df.chain_mid - 0.063712138798274052338) <= 1e-10 &&
                std::abs(df.chain_max - 0.084949518397698736450) <= 1e-10,
            [] { return std::string("fair-coin worked example (n=4, k=2) off"); });
    for (std::int64_t n = 2; n <= 12; ++n) {
      const CountVector ell{n / 3, n - n / 3};
      const MixingMeasure mu = MixingMeasure::point_mass(ell);
      for (std::int64_t k = 0; k <= n; ++k)
        r.check(definetti_divergence(mu, k).d == relative_entropy(UrnSpec(k, ell.s)),
                [&] { return "point mass " + to_string(ell) + " differs from D at k=" + std::to_string(k); });
    }
    const std::size_t count = level == Level::full ? 200 : 40;
    const auto parts = parallel_map<SuiteResult>(count, threads, [&](std::size_t i) {
      SuiteResult part;
      std::mt19937_64 rng(kDefinettiSeed + i);
      const std::int64_t n = std::uniform_int_distribution<std::int64_t>(2, 20)(rng);
      const std::size_t c = std::uniform_int_distribution<std::size_t>(2, 3)(rng);
      const MixingMeasure mu = dirichlet_mixing_measure(n, c, 1.0, rng);
      check_mixing_measure(mu, kDefinettiSeed + i, part, i % 10 == 0);
      return part;
    });
    for (const auto& p : parts) r.merge(p);
  });
}

/// Float D against the certified interval. The interval at 128 bits is far
/// narrower than double spacing, so the pass criterion is distance <= 1e-12
/// (the float engine's accuracy target); exact containment is reported as a
/// note.
inline SuiteResult suite_oracle(Level level, int precision_bits = 128, unsigned threads = 1) {
  return detail::timed("oracle", [&](SuiteResult& r) {
    std::vector<UrnSpec> specs{UrnSpec(30, {1, 99}), UrnSpec(2, {2, 2}), UrnSpec(1, {3, 7}), UrnSpec(4, {3, 7})};
    if (level == Level::full)
      for (const auto& s : oracle_sample(20)) specs.push_back(s);
    // Containment is judged against the outward-rounded double enclosure of
    // the certified interval; the MPFR interval itself is far narrower than
    // double spacing.
    struct Outcome {
      double distance = 0.0;
      bool inside = false;
      double width = 0.0;
      double width_cap = 0.0;
    };
    const auto outcomes = parallel_map<Outcome>(specs.size(), threads, [&](std::size_t i) {
      const auto ci = oracle::certified_divergence(specs[i], precision_bits);
      const double d = relative_entropy(specs[i]);
      const RealInterval iv = ci.to_real_interval();
      return Outcome{ci.distance(d), iv.lo <= d && d <= iv.hi, ci.width(),
                     std::ldexp(static_cast<double>(ci.support_size()), 8 - precision_bits)};
    });
    std::int64_t inside = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto& o = outcomes[i];
      inside += o.inside ? 1 : 0;
      worst = std::max(worst, o.distance);
      r.check(o.inside, [&] {
        return "float D lies " + detail::fmt(o.distance) + " outside the certified interval at " + to_string(specs[i]);
      });
      r.check(o.width <= o.width_cap, [&] { return "certified interval too wide at " + to_string(specs[i]); });
    }
    r.notes.push_back(std::to_string(inside) + "/" + std::to_string(specs.size()) +
                      " float values inside the certified interval; largest distance to the exact enclosure " +
                      detail::fmt(worst));

    for (std::int64_t n = 1; n <= 12; ++n)
      for (std::int64_t k = 0; k <= n; ++k)
        for (std::int64_t l = 0; l <= n; ++l) {
          const UrnSpec spec(k, {l, n - l});
          const auto [sh, sb] = oracle::exact_normalization(spec);
          r.check(sh == 1 && sb == 1, [&] { return "exact normalization fails at " + to_string(spec); });
          for (std::int64_t order = 0; order <= 4; ++order)
            r.check(oracle::exact_factorial_moment(n, k, l, order) == oracle::exact_factorial_moment_closed(n, k, l, order),
                    [&] { return "exact factorial-moment identity fails at " + to_string(spec); });
        }
    for (const auto& spec : specs) {
      const PmfEvaluator ev(spec);
      bool ok = true;
      for (const auto& s : support(spec)) {
        const double exact = oracle::exact_pmfs(spec, s).first.to_double();
        ok &= std::abs(std::exp(ev.log_hypergeometric(s)) - exact) <= 1e-13 * exact;
      }
      r.check(ok, [&] { return "float H differs from exact H at " + to_string(spec); });
    }
  });
}

inline std::vector<SuiteResult> run_all(Level level, const BoundFunctions& f = {}, unsigned threads = 1,
                                        int precision_bits = 128) {
  std::vector<SuiteResult> out;
  out.push_back(suite_reference_values(f));
  out.push_back(suite_numerics(level));
  out.push_back(suite_urn(level));
  out.push_back(suite_moments(level));
  out.push_back(suite_divergence(level, threads));
  out.push_back(suite_bounds(level, f, threads));
  out.push_back(suite_definetti(level, threads));
  out.push_back(suite_oracle(level, precision_bits, threads));
  return out;
}

inline bool all_passed(const std::vector<SuiteResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const SuiteResult& s) { return s.passed(); });
}

inline std::string format_report(const std::vector<SuiteResult>& results) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-20s %10s %10s %9s  %s\n", "suite", "checks", "violations", "seconds", "status");
  out += line;
  for (const auto& s : results) {
    std::snprintf(line, sizeof line, "%-20s %10lld %10lld %9.2f  %s\n", s.name.c_str(),
                  static_cast<long long>(s.checks), static_cast<long long>(s.violations), s.seconds,
                  s.passed() ? "PASS" : "FAIL");
    out += line;
  }
  for (const auto& s : results) {
    if (!s.passed()) out += s.name + ": first violation: " + s.first_violation + "\n";
    for (const auto& n : s.notes) out += s.name + ": " + n + "\n";
  }
  return out;
}

}  // namespace urnent::verify
