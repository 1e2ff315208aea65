#pragma once

// Sampling with and without replacement from a c-coloured urn: support
// enumeration, the two p.m.f.s, one-colour marginals and moments.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <limits>
#include <vector>

#include "urnent/errors.hpp"
#include "urnent/numerics.hpp"
#include "urnent/urn_spec.hpp"

namespace urnent {

/// All vectors s with sum(s) = total and 0 <= s[i] <= bounds[i], visited in
/// colexicographic order (last coordinate most significant).
class BoundedCompositions {
 public:
  BoundedCompositions(std::int64_t total, std::vector<std::int64_t> bounds)
      : total_(total), bounds_(std::move(bounds)) {
    detail::require(!bounds_.empty(), "BoundedCompositions: no parts");
    detail::require(total_ >= 0, "BoundedCompositions: negative total");
  }

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = CountVector;
    using difference_type = std::ptrdiff_t;
    using pointer = const CountVector*;
    using reference = const CountVector&;

    iterator() = default;

    reference operator*() const { return cur_; }
    pointer operator->() const { return &cur_; }

    iterator& operator++() {
      advance();
      return *this;
    }
    void operator++(int) { advance(); }

    friend bool operator==(const iterator& a, const iterator& b) {
      if (a.done_ || b.done_) return a.done_ == b.done_;
      return a.cur_ == b.cur_;
    }

   private:
    friend class BoundedCompositions;

    explicit iterator(const BoundedCompositions* owner) : owner_(owner) {
      cur_.s.assign(owner->bounds_.size(), 0);
      done_ = !fill_prefix(cur_.s.size(), owner->total_);
    }

    static iterator end_sentinel() {
      iterator it;
      it.done_ = true;
      return it;
    }

    // Greedy fill of coordinates [0, upto) with `mass`, lowest index first.
    bool fill_prefix(std::size_t upto, std::int64_t mass) {
      for (std::size_t i = 0; i < upto; ++i) {
        const std::int64_t take = std::min(owner_->bounds_[i], mass);
        cur_.s[i] = take;
        mass -= take;
      }
      return mass == 0;
    }

    void advance() {
      std::int64_t prefix = cur_.s[0];
      for (std::size_t j = 1; j < cur_.s.size(); ++j) {
        if (prefix >= 1 && cur_.s[j] < owner_->bounds_[j]) {
          ++cur_.s[j];
          fill_prefix(j, prefix - 1);
          return;
        }
        prefix += cur_.s[j];
      }
      done_ = true;
    }

    const BoundedCompositions* owner_ = nullptr;
    CountVector cur_;
    bool done_ = true;
  };

  iterator begin() const { return iterator(this); }
  iterator end() const { return iterator::end_sentinel(); }

  std::int64_t total() const { return total_; }
  const std::vector<std::int64_t>& bounds() const { return bounds_; }

  std::int64_t count() const {
    std::int64_t n = 0;
    for (auto it = begin(); it != end(); ++it) ++n;
    return n;
  }

 private:
  std::int64_t total_;
  std::vector<std::int64_t> bounds_;
};

/// Support of the hypergeometric law: 0 <= s_i <= ell_i, sum s = k.
inline BoundedCompositions support(const UrnSpec& spec) {
  return BoundedCompositions(spec.k(), spec.ell());
}

/// Every composition of k into c nonnegative parts (the multinomial support
/// when no colour is empty).
inline BoundedCompositions compositions(std::int64_t k, std::size_t c) {
  return BoundedCompositions(k, std::vector<std::int64_t>(c, k));
}

namespace detail {

inline void check_draw(const UrnSpec& spec, const CountVector& s) {
  require(s.size() == spec.c(), "count vector has " + std::to_string(s.size()) +
                                    " colours, urn has " + std::to_string(spec.c()));
  for (auto v : s) require(v >= 0, "count vector has a negative entry");
  require(s.total() == spec.k(), "count vector sums to " + std::to_string(s.total()) +
                                     ", expected k = " + std::to_string(spec.k()));
}

inline long double log_factorial(std::int64_t m) {
  return m < 2 ? 0.0L : log_gamma_ext(static_cast<long double>(m) + 1.0L);
}

inline long double log_binomial(std::int64_t n, std::int64_t k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

}  // namespace detail

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log H(n,k,ell;s); -inf outside the support.
inline double log_hypergeometric_pmf(const UrnSpec& spec, const CountVector& s) {
  detail::check_draw(spec, s);
  long double acc = -detail::log_binomial(spec.n(), spec.k());
  for (std::size_t i = 0; i < spec.c(); ++i) {
    if (s[i] > spec.ell(i)) return kNegInf;
    acc += detail::log_binomial(spec.ell(i), s[i]);
  }
  return static_cast<double>(acc);
}

/// H(n,k,ell;s) = prod_i C(ell_i, s_i) / C(n,k).
inline double hypergeometric_pmf(const UrnSpec& spec, const CountVector& s) {
  return std::exp(log_hypergeometric_pmf(spec, s));
}

/// log B(n,k,ell;s); -inf where an empty colour is drawn.
inline double log_multinomial_pmf(const UrnSpec& spec, const CountVector& s) {
  detail::check_draw(spec, s);
  const long double log_n = std::log(static_cast<long double>(spec.n()));
  long double acc = detail::log_factorial(spec.k());
  for (std::size_t i = 0; i < spec.c(); ++i) {
    if (s[i] == 0) continue;
    if (spec.ell(i) == 0) return kNegInf;
    acc += static_cast<long double>(s[i]) * (std::log(static_cast<long double>(spec.ell(i))) - log_n) -
           detail::log_factorial(s[i]);
  }
  return static_cast<double>(acc);
}

/// B(n,k,ell;s) = C(k;s) prod_i (ell_i/n)^s_i, with 0^0 = 1.
inline double multinomial_pmf(const UrnSpec& spec, const CountVector& s) {
  return std::exp(log_multinomial_pmf(spec, s));
}

/// Unchecked log-p.m.f. evaluation for enumeration loops; keeps a log n!
/// table for the urn. Callers pass compositions of k with c entries. The
/// *_ext forms keep extended precision so that log(H/B) can be formed before
/// rounding to double.
class PmfEvaluator {
 public:
  explicit PmfEvaluator(const UrnSpec& spec) : spec_(spec), lf_(spec.n()) {
    log_norm_ = -lf_.log_binomial(spec.n(), spec.k());
    const long double log_n = std::log(static_cast<long double>(spec.n()));
    log_frac_.reserve(spec.c());
    for (auto l : spec.ell())
      log_frac_.push_back(l > 0 ? std::log(static_cast<long double>(l)) - log_n
                                : -std::numeric_limits<long double>::infinity());
  }

  long double log_hypergeometric_ext(const CountVector& s) const {
    long double acc = log_norm_;
    for (std::size_t i = 0; i < spec_.c(); ++i) {
      const auto l = spec_.ell(i);
      if (s[i] > l) return -std::numeric_limits<long double>::infinity();
      acc += lf_.log_binomial(l, s[i]);
    }
    return acc;
  }

  long double log_multinomial_ext(const CountVector& s) const {
    long double acc = lf_(spec_.k());
    for (std::size_t i = 0; i < spec_.c(); ++i) {
      if (s[i] == 0) continue;
      if (spec_.ell(i) == 0) return -std::numeric_limits<long double>::infinity();
      acc += static_cast<long double>(s[i]) * log_frac_[i] - lf_(s[i]);
    }
    return acc;
  }

  double log_hypergeometric(const CountVector& s) const { return static_cast<double>(log_hypergeometric_ext(s)); }
  double log_multinomial(const CountVector& s) const { return static_cast<double>(log_multinomial_ext(s)); }

  const UrnSpec& spec() const { return spec_; }
  const LogFactorials& log_factorials() const { return lf_; }

 private:
  UrnSpec spec_;
  LogFactorials lf_;
  long double log_norm_ = 0.0L;
  std::vector<long double> log_frac_;
};

/// Law of a single colour count S_i: the c = 2 reduction (ell_i, n - ell_i).
inline double marginal_hypergeometric(std::int64_t n, std::int64_t k, std::int64_t ell_i,
                                      std::int64_t s_i) {
  detail::require(n >= 1 && k >= 0 && k <= n, "marginal_hypergeometric: need 0 <= k <= n");
  detail::require(ell_i >= 0 && ell_i <= n, "marginal_hypergeometric: need 0 <= ell_i <= n");
  if (s_i < 0 || s_i > std::min(k, ell_i) || k - s_i > n - ell_i) return 0.0;
  return static_cast<double>(std::exp(detail::log_binomial(ell_i, s_i) +
                                      detail::log_binomial(n - ell_i, k - s_i) - detail::log_binomial(n, k)));
}

/// E[(S_i)_r] = (ell_i)_r (k)_r / (n)_r.
inline double factorial_moment(std::int64_t n, std::int64_t k, std::int64_t ell_i, std::int64_t r) {
  detail::require(r >= 0, "factorial_moment: r must be nonnegative");
  detail::require(n >= 1 && k >= 0 && k <= n && ell_i >= 0 && ell_i <= n,
                  "factorial_moment: invalid urn parameters");
  if (r > std::min(k, ell_i)) return 0.0;
  double m = 1.0;
  for (std::int64_t j = 0; j < r; ++j) {
    m *= static_cast<double>(ell_i - j) * static_cast<double>(k - j) / static_cast<double>(n - j);
  }
  return m;
}

/// E[(S_i - k ell_i/n)^order] for order 2 or 3.
inline double central_moment(std::int64_t n, std::int64_t k, std::int64_t ell_i, int order) {
  detail::require(order == 2 || order == 3, "central_moment: order must be 2 or 3");
  detail::require(n >= 1 && k >= 0 && k <= n && ell_i >= 0 && ell_i <= n,
                  "central_moment: invalid urn parameters");
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  const double ll = static_cast<double>(ell_i);
  if (order == 2) {
    if (n == 1) return 0.0;
    return kk * (nn - kk) * ll * (nn - ll) / (nn * nn * (nn - 1.0));
  }
  detail::require(n > 2, "central_moment: third moment needs n > 2");
  return kk * ll * (nn - kk) * (nn - 2.0 * kk) * (nn - ll) * (nn - 2.0 * ll) /
         (nn * nn * nn * (nn - 1.0) * (nn - 2.0));
}

}  // namespace urnent
