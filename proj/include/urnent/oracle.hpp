#pragma once

// Exact-arithmetic reference for the urn engine. Probabilities are GMP
// rationals and the relative entropy is enclosed in an interval built from
// MPFR logarithms with directed rounding. Shares no enumeration or p.m.f. code
// with urn.hpp / divergence.hpp. Link against gmpxx, gmp and mpfr.

#include <gmpxx.h>
#include <mpfr.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "urnent/errors.hpp"
#include "urnent/numerics.hpp"
#include "urnent/urn_spec.hpp"

namespace urnent::oracle {

/// A probability as a fraction in lowest terms.
struct ExactProbability {
  mpz_class numerator;
  mpz_class denominator{1};

  static ExactProbability from(mpq_class q) {
    q.canonicalize();
    detail::require(q >= 0 && q <= 1, "ExactProbability: value outside [0, 1]");
    return {q.get_num(), q.get_den()};
  }

  mpq_class value() const {
    mpq_class q(numerator, denominator);
    q.canonicalize();
    return q;
  }

  double to_double() const { return value().get_d(); }

  std::string to_string() const { return numerator.get_str() + "/" + denominator.get_str(); }

  friend bool operator==(const ExactProbability& a, const ExactProbability& b) {
    return a.numerator == b.numerator && a.denominator == b.denominator;
  }
};

namespace detail {

using urnent::detail::require;

inline mpz_class binomial(std::int64_t n, std::int64_t k) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return r;
}

inline mpz_class factorial(std::int64_t n) {
  mpz_class r;
  mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
  return r;
}

inline mpz_class power(std::int64_t base, std::int64_t e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base), static_cast<unsigned long>(e));
  return r;
}

inline void check_spec(const UrnSpec& spec) {
  require(spec.n() <= 100000, "oracle: urn too large for exact arithmetic");
}

inline void check_draw(const UrnSpec& spec, const CountVector& s) {
  require(s.size() == spec.c(), "oracle: count vector has the wrong number of colours");
  std::int64_t total = 0;
  for (auto v : s) {
    require(v >= 0, "oracle: count vector has a negative entry");
    total += v;
  }
  require(total == spec.k(), "oracle: count vector does not sum to k");
}

// Depth-first walk over {s : sum s = k, 0 <= s_i <= bound_i}.
inline void for_each_draw(std::int64_t k, const std::vector<std::int64_t>& bounds,
                          const std::function<void(const CountVector&)>& visit) {
  CountVector s(std::vector<std::int64_t>(bounds.size(), 0));
  std::vector<std::int64_t> tail(bounds.size() + 1, 0);
  for (std::size_t i = bounds.size(); i-- > 0;) tail[i] = tail[i + 1] + bounds[i];
  std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t i, std::int64_t left) {
    if (i + 1 == bounds.size()) {
      if (left <= bounds[i]) {
        s[i] = left;
        visit(s);
      }
      return;
    }
    const std::int64_t lo = std::max<std::int64_t>(0, left - tail[i + 1]);
    const std::int64_t hi = std::min(bounds[i], left);
    for (std::int64_t v = lo; v <= hi; ++v) {
      s[i] = v;
      rec(i + 1, left - v);
    }
  };
  if (k <= tail[0]) rec(0, k);
}

inline mpq_class exact_h(const UrnSpec& spec, const CountVector& s) {
  mpz_class num = 1;
  for (std::size_t i = 0; i < spec.c(); ++i) {
    if (s[i] > spec.ell(i)) return 0;
    num *= binomial(spec.ell(i), s[i]);
  }
  mpq_class q(num, binomial(spec.n(), spec.k()));
  q.canonicalize();
  return q;
}

inline mpq_class exact_b(const UrnSpec& spec, const CountVector& s) {
  mpz_class num = factorial(spec.k());
  mpz_class den = power(spec.n(), spec.k());
  for (std::size_t i = 0; i < spec.c(); ++i) {
    num *= power(spec.ell(i), s[i]);  // 0^0 = 1
    den *= factorial(s[i]);
  }
  mpq_class q(num, den);
  q.canonicalize();
  return q;
}

// RAII MPFR value.
class Real {
 public:
  explicit Real(mpfr_prec_t bits) { mpfr_init2(v_, bits); mpfr_set_zero(v_, 1); }
  Real(const Real& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Real& operator=(const Real& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

 private:
  mpfr_t v_;
};

}  // namespace detail

/// Exact h = H(n,k,ell;s) and b = B(n,k,ell;s).
inline std::pair<ExactProbability, ExactProbability> exact_pmfs(const UrnSpec& spec, const CountVector& s) {
  detail::check_spec(spec);
  detail::check_draw(spec, s);
  return {ExactProbability::from(detail::exact_h(spec, s)), ExactProbability::from(detail::exact_b(spec, s))};
}

/// Sums of h and b over all compositions of k, as rationals.
inline std::pair<mpq_class, mpq_class> exact_normalization(const UrnSpec& spec) {
  detail::check_spec(spec);
  mpq_class sum_h = 0, sum_b = 0;
  detail::for_each_draw(spec.k(), std::vector<std::int64_t>(spec.c(), spec.k()), [&](const CountVector& s) {
    sum_h += detail::exact_h(spec, s);
    sum_b += detail::exact_b(spec, s);
  });
  return {sum_h, sum_b};
}

/// (1/2) sum |h - b| exactly.
inline mpq_class exact_total_variation(const UrnSpec& spec) {
  detail::check_spec(spec);
  mpq_class acc = 0;
  detail::for_each_draw(spec.k(), std::vector<std::int64_t>(spec.c(), spec.k()), [&](const CountVector& s) {
    acc += abs(detail::exact_h(spec, s) - detail::exact_b(spec, s));
  });
  return acc / 2;
}

/// E[(S_i)_r] for S_i the count of an ell_i-ball colour, by summing over its law.
inline mpq_class exact_factorial_moment(std::int64_t n, std::int64_t k, std::int64_t ell_i, std::int64_t r) {
  detail::require(n >= 1 && k >= 0 && k <= n && ell_i >= 0 && ell_i <= n && r >= 0,
                  "exact_factorial_moment: invalid parameters");
  mpq_class acc = 0;
  const mpz_class total = detail::binomial(n, k);
  for (std::int64_t s = 0; s <= std::min(k, ell_i); ++s) {
    if (k - s > n - ell_i) continue;
    mpz_class falling = 1;
    for (std::int64_t j = 0; j < r; ++j) falling *= (s - j);
    acc += mpq_class(falling * detail::binomial(ell_i, s) * detail::binomial(n - ell_i, k - s), total);
  }
  acc.canonicalize();
  return acc;
}

/// (ell_i)_r (k)_r / (n)_r as a rational.
inline mpq_class exact_factorial_moment_closed(std::int64_t n, std::int64_t k, std::int64_t ell_i,
                                               std::int64_t r) {
  detail::require(n >= 1 && k >= 0 && k <= n && ell_i >= 0 && ell_i <= n && r >= 0,
                  "exact_factorial_moment_closed: invalid parameters");
  if (r > n) return 0;
  mpz_class num = 1, den = 1;
  for (std::int64_t j = 0; j < r; ++j) {
    num *= (ell_i - j);
    num *= (k - j);
    den *= (n - j);
  }
  mpq_class q(num, den);
  q.canonicalize();
  return q;
}

/// Closed interval with MPFR endpoints: lo rounded down, hi rounded up.
class CertifiedInterval {
 public:
  CertifiedInterval(detail::Real lo, detail::Real hi, std::int64_t support_size)
      : lo_(std::move(lo)), hi_(std::move(hi)), support_size_(support_size) {}

  const detail::Real& lo() const { return lo_; }
  const detail::Real& hi() const { return hi_; }
  std::int64_t support_size() const { return support_size_; }

  /// hi - lo, rounded up to a double.
  double width() const {
    detail::Real w(mpfr_get_prec(hi_.get()) + 8);
    mpfr_sub(w.get(), hi_.get(), lo_.get(), MPFR_RNDU);
    return mpfr_get_d(w.get(), MPFR_RNDU);
  }

  bool contains(double x) const {
    return mpfr_cmp_d(lo_.get(), x) <= 0 && mpfr_cmp_d(hi_.get(), x) >= 0;
  }

  /// Distance from x to the interval (0 inside).
  double distance(double x) const {
    if (contains(x)) return 0.0;
    detail::Real d(mpfr_get_prec(hi_.get()) + 64);
    if (mpfr_cmp_d(lo_.get(), x) > 0)
      mpfr_sub_d(d.get(), lo_.get(), x, MPFR_RNDU);
    else
      mpfr_d_sub(d.get(), x, hi_.get(), MPFR_RNDU);
    return mpfr_get_d(d.get(), MPFR_RNDU);
  }

  /// Outward-rounded double enclosure.
  RealInterval to_real_interval() const {
    return RealInterval::make(mpfr_get_d(lo_.get(), MPFR_RNDD), mpfr_get_d(hi_.get(), MPFR_RNDU));
  }

  double midpoint() const {
    detail::Real m(mpfr_get_prec(hi_.get()) + 1);
    mpfr_add(m.get(), lo_.get(), hi_.get(), MPFR_RNDN);
    mpfr_div_2ui(m.get(), m.get(), 1, MPFR_RNDN);
    return mpfr_get_d(m.get(), MPFR_RNDN);
  }

 private:
  detail::Real lo_;
  detail::Real hi_;
  std::int64_t support_size_;
};

namespace detail {

inline CertifiedInterval enclose_divergence(const UrnSpec& spec, mpfr_prec_t bits) {
  Real lo(bits), hi(bits), log_lo(bits), log_hi(bits);
  std::int64_t support_size = 0;
  for_each_draw(spec.k(), spec.ell(), [&](const CountVector& s) {
    ++support_size;
    const mpq_class h = exact_h(spec, s);
    const mpq_class b = exact_b(spec, s);
    mpq_class ratio = h / b;
    // log is increasing, so rounding the argument and the result in the same
    // direction keeps each endpoint on its side.
    mpfr_set_q(log_lo.get(), ratio.get_mpq_t(), MPFR_RNDD);
    mpfr_log(log_lo.get(), log_lo.get(), MPFR_RNDD);
    mpfr_set_q(log_hi.get(), ratio.get_mpq_t(), MPFR_RNDU);
    mpfr_log(log_hi.get(), log_hi.get(), MPFR_RNDU);
    mpfr_mul_q(log_lo.get(), log_lo.get(), h.get_mpq_t(), MPFR_RNDD);
    mpfr_mul_q(log_hi.get(), log_hi.get(), h.get_mpq_t(), MPFR_RNDU);
    mpfr_add(lo.get(), lo.get(), log_lo.get(), MPFR_RNDD);
    mpfr_add(hi.get(), hi.get(), log_hi.get(), MPFR_RNDU);
  });
  return CertifiedInterval(std::move(lo), std::move(hi), support_size);
}

}  // namespace detail

/// Interval certified to contain D(n,k,ell), of width at most
/// 2^(8 - precision_bits) * support_size. Working precision is doubled up to
/// twice before giving up with precision_error.
inline CertifiedInterval certified_divergence(const UrnSpec& spec, int precision_bits) {
  detail::require(precision_bits >= 64, "certified_divergence: need precision_bits >= 64");
  detail::check_spec(spec);
  const UrnSpec red = spec.reduced();
  mpfr_prec_t bits = precision_bits;
  for (int attempt = 0; attempt < 3; ++attempt, bits *= 2) {
    CertifiedInterval out = detail::enclose_divergence(red, bits);
    detail::Real tol(precision_bits + 64);
    mpfr_set_si(tol.get(), out.support_size(), MPFR_RNDN);
    mpfr_mul_2si(tol.get(), tol.get(), 8 - precision_bits, MPFR_RNDN);
    detail::Real w(bits + 8);
    mpfr_sub(w.get(), out.hi().get(), out.lo().get(), MPFR_RNDU);
    if (mpfr_cmp(w.get(), tol.get()) <= 0) return out;
  }
  throw precision_error("certified_divergence: interval for " + to_string(spec) +
                        " did not reach the requested width");
}

}  // namespace urnent::oracle
