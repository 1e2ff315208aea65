#pragma once

// Finite exchangeable sequences on a c-letter alphabet, described by the law
// mu of the type (empirical composition) of the full length-n sequence.
// Laws on A^k are held per type class: sequences sharing a type are
// equiprobable under both the k-marginal P_k and the i.i.d. mixture M_{k,mu},
// so relative entropy and total variation over sequences equal the same
// quantities over type classes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "urnent/bounds.hpp"
#include "urnent/divergence.hpp"
#include "urnent/errors.hpp"
#include "urnent/numerics.hpp"
#include "urnent/urn.hpp"
#include "urnent/urn_spec.hpp"

namespace urnent {

/// Probability weights over urn compositions ell of total n.
class MixingMeasure {
 public:
  using Weights = std::map<CountVector, double>;

  /// Weights must already sum to 1 within 1e-12. Zero weights are dropped.
  MixingMeasure(std::int64_t n, std::size_t c, Weights weights) : n_(n), c_(c) {
    detail::require(n >= 1, "MixingMeasure: need n >= 1");
    detail::require(c >= 2, "MixingMeasure: need c >= 2");
    CompensatedSum total;
    for (const auto& [ell, w] : weights) {
      detail::require(ell.size() == c, "MixingMeasure: composition " + to_string(ell) +
                                           " has the wrong number of colours");
      for (auto v : ell) detail::require(v >= 0, "MixingMeasure: negative composition entry");
      detail::require(ell.total() == n, "MixingMeasure: composition " + to_string(ell) +
                                            " does not sum to n = " + std::to_string(n));
      detail::require(std::isfinite(w) && w >= 0.0, "MixingMeasure: weight must be a nonnegative number");
      total.add(w);
      if (w > 0.0) weights_.emplace(ell, w);
    }
    detail::require(std::abs(total.value() - 1.0) <= 1e-12,
                    "MixingMeasure: weights sum to " + std::to_string(total.value()));
  }

  /// Rescales weights whose total lies within `tolerance` of 1.
  static MixingMeasure normalized(std::int64_t n, std::size_t c, Weights weights, double tolerance) {
    CompensatedSum total;
    for (const auto& [ell, w] : weights) total.add(w);
    const double t = total.value();
    detail::require(std::abs(t - 1.0) <= tolerance,
                    "MixingMeasure: weights sum to " + std::to_string(t) + ", not 1");
    for (auto& [ell, w] : weights) w /= t;
    return MixingMeasure(n, c, std::move(weights));
  }

  static MixingMeasure point_mass(const CountVector& ell) {
    return MixingMeasure(ell.total(), ell.size(), Weights{{ell, 1.0}});
  }

  std::int64_t n() const { return n_; }
  std::size_t c() const { return c_; }
  const Weights& weights() const { return weights_; }

  double weight(const CountVector& ell) const {
    auto it = weights_.find(ell);
    return it == weights_.end() ? 0.0 : it->second;
  }

 private:
  std::int64_t n_;
  std::size_t c_;
  Weights weights_;
};

/// Sequence law on A^k aggregated by type: mass[s] is the total probability
/// of the C(k; s) sequences containing s_i copies of letter i.
struct TypeClassPmf {
  std::int64_t k = 0;
  std::size_t c = 0;
  std::map<CountVector, double> mass;

  double total() const {
    CompensatedSum acc;
    for (const auto& [s, m] : mass) acc.add(m);
    return acc.value();
  }

  /// Probability of any one sequence of type s.
  double per_sequence(const CountVector& s) const {
    auto it = mass.find(s);
    const double m = it == mass.end() ? 0.0 : it->second;
    long double log_coef = detail::log_factorial(s.total());
    for (auto v : s) log_coef -= detail::log_factorial(v);
    return m * static_cast<double>(std::exp(-log_coef));
  }
};

namespace detail {

inline std::vector<long double> log_fractions(const CountVector& ell, std::int64_t n) {
  std::vector<long double> out;
  out.reserve(ell.size());
  for (auto l : ell)
    out.push_back(l > 0 ? std::log(static_cast<long double>(l)) - std::log(static_cast<long double>(n))
                        : -std::numeric_limits<long double>::infinity());
  return out;
}

// log of C(k; s) prod p_i^s_i with 0^0 = 1.
inline double log_multinomial_probs(const LogFactorials& lf, const CountVector& s,
                                    const std::vector<long double>& log_p) {
  long double acc = lf(s.total());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == 0) continue;
    if (std::isinf(log_p[i])) return kNegInf;
    acc += static_cast<long double>(s[i]) * log_p[i] - lf(s[i]);
  }
  return static_cast<double>(acc);
}

inline TypeClassPmf empty_type_pmf(std::int64_t k, std::size_t c) {
  TypeClassPmf out{k, c, {}};
  for (const auto& s : compositions(k, c)) out.mass.emplace(s, 0.0);
  return out;
}

}  // namespace detail

/// mu(ell) = multinomial(n; ell) prod p_i^ell_i: the type law of n i.i.d.
/// draws from p.
inline MixingMeasure mixing_from_iid(std::span<const double> p, std::int64_t n) {
  detail::require(p.size() >= 2, "mixing_from_iid: need at least two letters");
  CompensatedSum total;
  for (double v : p) {
    detail::require(std::isfinite(v) && v >= 0.0, "mixing_from_iid: probabilities must be nonnegative");
    total.add(v);
  }
  detail::require(std::abs(total.value() - 1.0) <= 1e-12, "mixing_from_iid: probabilities must sum to 1");
  detail::require(n >= 1, "mixing_from_iid: need n >= 1");
  const LogFactorials lf(n);
  std::vector<long double> log_p;
  for (double v : p)
    log_p.push_back(v > 0.0 ? std::log(static_cast<long double>(v)) : -std::numeric_limits<long double>::infinity());
  MixingMeasure::Weights w;
  for (const auto& ell : compositions(n, p.size())) {
    const double lw = detail::log_multinomial_probs(lf, ell, log_p);
    if (lw != kNegInf) w.emplace(ell, std::exp(lw));
  }
  return MixingMeasure::normalized(n, p.size(), std::move(w), 1e-12);
}

/// P_k by type: mass(s) = sum_ell H(n, k, ell; s) mu(ell).
inline TypeClassPmf pk_from_mixture(const MixingMeasure& mu, std::int64_t k) {
  detail::require(k >= 0 && k <= mu.n(), "pk_from_mixture: need 0 <= k <= n");
  std::map<CountVector, CompensatedSum> acc;
  for (const auto& [ell, w] : mu.weights()) {
    const UrnSpec spec(k, ell.s);
    const PmfEvaluator ev(spec);
    for (const auto& s : support(spec)) acc[s].add(w * std::exp(ev.log_hypergeometric(s)));
  }
  TypeClassPmf out = detail::empty_type_pmf(k, mu.c());
  for (const auto& [s, sum] : acc) out.mass[s] = sum.value();
  return out;
}

/// M_{k,mu} by type: mass(s) = sum_ell B(n, k, ell; s) mu(ell). Draws beyond
/// n are meaningful for the i.i.d. mixture and need allow_beyond_n.
inline TypeClassPmf mk_from_mixture(const MixingMeasure& mu, std::int64_t k, bool allow_beyond_n = false) {
  detail::require(k >= 0, "mk_from_mixture: need k >= 0");
  detail::require(allow_beyond_n || k <= mu.n(), "mk_from_mixture: k > n needs allow_beyond_n");
  const LogFactorials lf(k);
  std::map<CountVector, CompensatedSum> acc;
  for (const auto& [ell, w] : mu.weights()) {
    const auto log_p = detail::log_fractions(ell, mu.n());
    for (const auto& s : compositions(k, mu.c())) {
      const double lb = detail::log_multinomial_probs(lf, s, log_p);
      if (lb != kNegInf) acc[s].add(w * std::exp(lb));
    }
  }
  TypeClassPmf out = detail::empty_type_pmf(k, mu.c());
  for (const auto& [s, sum] : acc) out.mass[s] = sum.value();
  return out;
}

/// D(P || Q) over type classes with 0 log 0 = 0.
inline double type_class_relative_entropy(const TypeClassPmf& p, const TypeClassPmf& q) {
  detail::require(p.k == q.k && p.c == q.c, "type_class_relative_entropy: mismatched alphabets");
  CompensatedSum acc;
  for (const auto& [s, pm] : p.mass) {
    if (pm <= 0.0) continue;
    auto it = q.mass.find(s);
    const double qm = it == q.mass.end() ? 0.0 : it->second;
    detail::require(qm > 0.0, "type_class_relative_entropy: P not absolutely continuous w.r.t. Q");
    acc.add(pm * std::log(pm / qm));
  }
  return acc.value();
}

inline double type_class_total_variation(const TypeClassPmf& p, const TypeClassPmf& q) {
  detail::require(p.k == q.k && p.c == q.c, "type_class_total_variation: mismatched alphabets");
  CompensatedSum acc;
  for (const auto& [s, pm] : p.mass) {
    auto it = q.mass.find(s);
    acc.add(std::abs(pm - (it == q.mass.end() ? 0.0 : it->second)));
  }
  return 0.5 * acc.value();
}

/// d = D(P_k || M_{k,mu}) and the two quantities it is chained under:
/// d <= chain_mid = sum_ell mu(ell) D(n,k,ell) <= chain_max = max_ell D(n,k,ell).
struct DeFinettiDivergence {
  double d = 0.0;
  double chain_mid = 0.0;
  double chain_max = 0.0;
  double tv = 0.0;  // total variation between P_k and M_{k,mu}
};

inline DeFinettiDivergence definetti_divergence(const MixingMeasure& mu, std::int64_t k) {
  detail::require(k >= 0 && k <= mu.n(), "definetti_divergence: need 0 <= k <= n");
  if (mu.weights().size() == 1) {
    // P_k = H and M_{k,mu} = B for a point mass.
    const UrnSpec spec(k, mu.weights().begin()->first.s);
    const double dl = relative_entropy(spec);
    return {dl, dl, dl, total_variation(spec)};
  }
  const TypeClassPmf pk = pk_from_mixture(mu, k);
  const TypeClassPmf mk = mk_from_mixture(mu, k);
  DeFinettiDivergence out;
  out.d = type_class_relative_entropy(pk, mk);
  out.tv = type_class_total_variation(pk, mk);
  CompensatedSum mid;
  for (const auto& [ell, w] : mu.weights()) {
    const double dl = relative_entropy(UrnSpec(k, ell.s));
    mid.add(w * dl);
    out.chain_max = std::max(out.chain_max, dl);
  }
  out.chain_mid = mid.value();
  return out;
}

struct DeFinettiBounds {
  double corollary = 0.0;   // (c-1)k(k-1) / (2(n-1)(n-k+1))
  double pinsker_tv = 0.0;  // sqrt(corollary / 2)
  double df_tv = 0.0;       // c k / n
  std::optional<double> gk_first;  // 5 k^2 log n / (n-k), binary alphabets, k < n
  std::optional<double> gk_b;      // k(k-1) log c / (2(n-k-1)), k <= n-2
};

inline DeFinettiBounds definetti_bounds(std::int64_t n, std::int64_t k, std::int64_t c) {
  detail::require(k >= 1 && k <= n, "definetti_bounds: need 1 <= k <= n");
  detail::require(c >= 2, "definetti_bounds: need c >= 2");
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  DeFinettiBounds b;
  b.corollary = stam_bounds(n, k, c).upper;
  b.pinsker_tv = std::sqrt(b.corollary / 2.0);
  b.df_tv = static_cast<double>(c) * kk / nn;
  if (c == 2 && k < n) b.gk_first = 5.0 * kk * kk * std::log(nn) / (nn - kk);
  if (k <= n - 2) b.gk_b = kk * (kk - 1.0) / (2.0 * (nn - kk - 1.0)) * std::log(static_cast<double>(c));
  return b;
}

/// Rule producing a mixing measure for each sequence length n.
using MixingFamily = std::function<MixingMeasure(std::int64_t n)>;

inline MixingFamily iid_family(std::vector<double> p) {
  return [p = std::move(p)](std::int64_t n) { return mixing_from_iid(p, n); };
}

/// Point mass on the most balanced composition of n into c colours.
inline MixingFamily point_mass_balanced_family(std::size_t c) {
  return [c](std::int64_t n) {
    CountVector ell(std::vector<std::int64_t>(c, n / static_cast<std::int64_t>(c)));
    for (std::int64_t r = 0; r < n % static_cast<std::int64_t>(c); ++r) ++ell[static_cast<std::size_t>(r)];
    return MixingMeasure::point_mass(ell);
  };
}

/// A single measure; only its own n is valid.
inline MixingFamily fixed_family(MixingMeasure mu) {
  return [mu = std::move(mu)](std::int64_t n) {
    detail::require(n == mu.n(), "fixed_family: measure is defined for n = " + std::to_string(mu.n()));
    return mu;
  };
}

struct ExperimentRow {
  std::int64_t n = 0;
  std::int64_t k = 0;
  DeFinettiDivergence div;
  DeFinettiBounds bounds;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;                // ordered by n, then k
  std::map<std::int64_t, bool> monotone_in_k;     // d and tv nondecreasing in k, per n
};

/// Tabulates D(P_k || M_{k,mu_n}) for k = 1..min(k_max, n) and each n. The
/// k-direction check is recorded; nothing is claimed about the n direction.
inline ExperimentResult monotonicity_experiment(const MixingFamily& family, std::int64_t k_max,
                                                std::span<const std::int64_t> n_values,
                                                unsigned threads = 1) {
  detail::require(k_max >= 1, "monotonicity_experiment: need k_max >= 1");
  auto run_one = [&](std::int64_t n) {
    const MixingMeasure mu = family(n);
    std::vector<ExperimentRow> rows;
    const auto c = static_cast<std::int64_t>(mu.c());
    for (std::int64_t k = 1; k <= std::min(k_max, n); ++k)
      rows.push_back({n, k, definetti_divergence(mu, k), definetti_bounds(n, k, c)});
    return rows;
  };

  std::vector<std::vector<ExperimentRow>> per_n(n_values.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_values.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_values.size(); ++i) per_n[i] = run_one(n_values[i]);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < n_values.size(); i += workers) per_n[i] = run_one(n_values[i]);
      }));
    }
    for (auto& j : jobs) j.get();
  }

  ExperimentResult out;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    bool monotone = true;
    for (std::size_t j = 1; j < per_n[i].size(); ++j) {
      const auto& prev = per_n[i][j - 1].div;
      const auto& cur = per_n[i][j].div;
      if (cur.d < prev.d - 1e-12 || cur.tv < prev.tv - 1e-12) monotone = false;
    }
    out.monotone_in_k[n_values[i]] = monotone;
    for (auto& r : per_n[i]) out.rows.push_back(std::move(r));
  }
  return out;
}

/// Random mixing measure: each composition of n is kept with probability 1/2
/// (at least one is kept) and given a Gamma(alpha) weight; weights are then
/// normalized, i.e. a symmetric Dirichlet on the kept atoms.
template <class Rng>
MixingMeasure dirichlet_mixing_measure(std::int64_t n, std::size_t c, double alpha, Rng& rng) {
  detail::require(alpha > 0.0, "dirichlet_mixing_measure: need alpha > 0");
  std::vector<CountVector> atoms;
  std::bernoulli_distribution keep(0.5);
  for (const auto& ell : compositions(n, c))
    if (keep(rng)) atoms.push_back(ell);
  if (atoms.empty()) {
    std::vector<CountVector> all;
    for (const auto& ell : compositions(n, c)) all.push_back(ell);
    std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
    atoms.push_back(all[pick(rng)]);
  }
  std::gamma_distribution<double> gamma(alpha, 1.0);
  MixingMeasure::Weights w;
  for (const auto& ell : atoms) {
    double g = gamma(rng);
    if (!(g > 0.0)) g = std::numeric_limits<double>::min();
    w.emplace(ell, g);
  }
  CompensatedSum total;
  for (const auto& [ell, g] : w) total.add(g);
  for (auto& [ell, g] : w) g /= total.value();
  return MixingMeasure::normalized(n, c, std::move(w), 1e-9);
}

}  // namespace urnent
