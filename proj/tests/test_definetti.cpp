#include <cmath>
#include <random>
#include <vector>

#include <gmpxx.h>
#include <gtest/gtest.h>
#include <mpfr.h>

#include "urnent/bounds.hpp"
#include "urnent/definetti.hpp"

using urnent::CountVector;
using urnent::MixingMeasure;
using urnent::UrnSpec;

namespace {

// D(P_k || M_k) by enumerating all c^k sequences with exact rational
// probabilities; only the final logarithms are rounded (200-bit MPFR).
double sequence_level_divergence(const MixingMeasure& mu, std::int64_t k) {
  const auto c = static_cast<std::int64_t>(mu.c());
  const std::int64_t n = mu.n();
  std::vector<std::int64_t> seq(static_cast<std::size_t>(k), 0);
  mpfr_t acc, term, lp, lm;
  mpfr_inits2(200, acc, term, lp, lm, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_zero(acc, 1);
  while (true) {
    mpq_class p = 0, m = 0;
    for (const auto& [ell, w] : mu.weights()) {
      const mpq_class weight(w);  // exact value of the double
      mpq_class pw = weight, mw = weight;
      std::vector<std::int64_t> left = ell.s;
      for (std::int64_t j = 0; j < k; ++j) {
        const auto x = static_cast<std::size_t>(seq[static_cast<std::size_t>(j)]);
        pw *= mpq_class(left[x], n - j);
        mw *= mpq_class(ell[x], n);
        if (left[x] > 0) --left[x];
      }
      p += pw;
      m += mw;
    }
    if (p > 0) {
      mpfr_set_q(lp, p.get_mpq_t(), MPFR_RNDN);
      mpfr_set_q(lm, m.get_mpq_t(), MPFR_RNDN);
      mpfr_div(term, lp, lm, MPFR_RNDN);
      mpfr_log(term, term, MPFR_RNDN);
      mpfr_mul(term, term, lp, MPFR_RNDN);
      mpfr_add(acc, acc, term, MPFR_RNDN);
    }
    std::int64_t pos = 0;
    while (pos < k && ++seq[static_cast<std::size_t>(pos)] == c) seq[static_cast<std::size_t>(pos++)] = 0;
    if (pos == k) break;
  }
  const double out = mpfr_get_d(acc, MPFR_RNDN);
  mpfr_clears(acc, term, lp, lm, static_cast<mpfr_ptr>(nullptr));
  return out;
}

MixingMeasure fair_coin(std::int64_t n) {
  const std::vector<double> p{0.5, 0.5};
  return urnent::mixing_from_iid(p, n);
}

}  // namespace

TEST(WorkedExample, FairCoinFourDrawsTwo) {
  const MixingMeasure mu = fair_coin(4);
  EXPECT_EQ(mu.weights().size(), 5u);
  EXPECT_DOUBLE_EQ(mu.weight(CountVector{2, 2}), 6.0 / 16.0);

  const auto pk = urnent::pk_from_mixture(mu, 2);
  const auto mk = urnent::mk_from_mixture(mu, 2);
  EXPECT_NEAR(pk.mass.at(CountVector{2, 0}), 0.25, 1e-15);
  EXPECT_NEAR(pk.mass.at(CountVector{1, 1}), 0.5, 1e-15);
  EXPECT_NEAR(mk.mass.at(CountVector{2, 0}), 5.0 / 16.0, 1e-15);
  EXPECT_NEAR(mk.mass.at(CountVector{1, 1}), 3.0 / 8.0, 1e-15);
  EXPECT_NEAR(pk.per_sequence(CountVector{1, 1}), 0.25, 1e-15);

  const auto div = urnent::definetti_divergence(mu, 2);
  EXPECT_NEAR(div.d, 0.032269260568785585836, 1e-15);
  EXPECT_NEAR(div.chain_mid, 0.063712138798274052338, 1e-15);
  EXPECT_NEAR(div.chain_max, 0.084949518397698736450, 1e-15);
}

TEST(SequenceOracle, TypeClassesMatchSequenceEnumeration) {
  std::mt19937_64 rng(20240917);
  for (int trial = 0; trial < 12; ++trial) {
    const std::int64_t n = 3 + trial % 5;
    const std::size_t c = trial % 3 == 0 ? 3 : 2;
    const MixingMeasure mu = urnent::dirichlet_mixing_measure(n, c, 0.7, rng);
    for (std::int64_t k = 1; k <= std::min<std::int64_t>(n, c == 3 ? 4 : 6); ++k) {
      const double ref = sequence_level_divergence(mu, k);
      EXPECT_NEAR(urnent::definetti_divergence(mu, k).d, ref, 1e-13 * std::max(1.0, ref))
          << "trial=" << trial << " k=" << k;
    }
  }
}

TEST(PointMass, ReducesToUrnDivergenceExactly) {
  const CountVector ell{3, 5, 2};
  const MixingMeasure mu = MixingMeasure::point_mass(ell);
  for (std::int64_t k = 0; k <= 10; ++k) {
    const auto div = urnent::definetti_divergence(mu, k);
    EXPECT_EQ(div.d, urnent::relative_entropy(UrnSpec(k, ell.s)));
    EXPECT_EQ(div.d, div.chain_mid);
    EXPECT_EQ(div.d, div.chain_max);
  }
  // The general type-class route agrees with the shortcut.
  const auto pk = urnent::pk_from_mixture(mu, 4);
  const auto mk = urnent::mk_from_mixture(mu, 4);
  EXPECT_NEAR(urnent::type_class_relative_entropy(pk, mk), urnent::relative_entropy(UrnSpec(4, ell.s)), 1e-14);
}

TEST(Chain, HoldsOnRandomMeasures) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const std::int64_t n = 2 + trial % 15;
    const std::size_t c = trial % 2 ? 3 : 2;
    const MixingMeasure mu = urnent::dirichlet_mixing_measure(n, c, 0.5, rng);
    double prev_d = 0.0, prev_tv = 0.0;
    for (std::int64_t k = 1; k <= n; ++k) {
      const auto div = urnent::definetti_divergence(mu, k);
      const auto b = urnent::definetti_bounds(n, k, static_cast<std::int64_t>(c));
      EXPECT_LE(div.d, div.chain_mid + 1e-12);
      EXPECT_LE(div.chain_mid, div.chain_max + 1e-12);
      EXPECT_LE(div.d, b.corollary + 1e-12);
      EXPECT_LE(div.tv, b.pinsker_tv + 1e-12);
      EXPECT_LE(div.tv, b.df_tv + 1e-12);
      EXPECT_GE(div.d, prev_d - 1e-12) << "k=" << k;
      EXPECT_GE(div.tv, prev_tv - 1e-12) << "k=" << k;
      prev_d = div.d;
      prev_tv = div.tv;
    }
  }
}

TEST(Bounds, ClosedForms) {
  const auto b = urnent::definetti_bounds(100, 30, 2);
  EXPECT_DOUBLE_EQ(b.corollary, urnent::stam_bounds(100, 30, 2).upper);
  EXPECT_DOUBLE_EQ(b.pinsker_tv, std::sqrt(b.corollary / 2.0));
  EXPECT_DOUBLE_EQ(b.df_tv, 0.6);
  ASSERT_TRUE(b.gk_first && b.gk_b);
  EXPECT_NEAR(*b.gk_first, 5.0 * 900.0 * std::log(100.0) / 70.0, 1e-12);
  EXPECT_NEAR(*b.gk_b, 30.0 * 29.0 / (2.0 * 69.0) * std::log(2.0), 1e-14);
  const auto three = urnent::definetti_bounds(10, 9, 3);
  EXPECT_FALSE(three.gk_first.has_value());
  EXPECT_FALSE(three.gk_b.has_value());
  EXPECT_THROW(urnent::definetti_bounds(10, 0, 2), urnent::domain_error);
}

TEST(MixingMeasure, Validation) {
  using W = MixingMeasure::Weights;
  EXPECT_THROW(MixingMeasure(4, 2, W{{CountVector{1, 2}, 1.0}}), urnent::domain_error);
  EXPECT_THROW(MixingMeasure(4, 2, W{{CountVector{1, 1, 2}, 1.0}}), urnent::domain_error);
  EXPECT_THROW(MixingMeasure(4, 2, W{{CountVector{1, 3}, 0.5}}), urnent::domain_error);
  EXPECT_THROW(MixingMeasure(4, 2, W{{CountVector{1, 3}, -0.5}, {CountVector{2, 2}, 1.5}}), urnent::domain_error);
  EXPECT_THROW(MixingMeasure::normalized(4, 2, W{{CountVector{1, 3}, 0.9}}, 1e-9), urnent::domain_error);
  const auto mu = MixingMeasure::normalized(4, 2, W{{CountVector{1, 3}, 0.5 + 4e-10}, {CountVector{0, 4}, 0.5}}, 1e-9);
  EXPECT_NEAR(mu.weight(CountVector{1, 3}) + mu.weight(CountVector{0, 4}), 1.0, 1e-15);
  const MixingMeasure dropped(4, 2, W{{CountVector{1, 3}, 1.0}, {CountVector{2, 2}, 0.0}});
  EXPECT_EQ(dropped.weights().size(), 1u);
}

TEST(Families, PointMassBalancedAndIid) {
  const auto fam = urnent::point_mass_balanced_family(3);
  const MixingMeasure mu = fam(10);
  ASSERT_EQ(mu.weights().size(), 1u);
  EXPECT_EQ(mu.weights().begin()->first, (CountVector{4, 3, 3}));
  const std::vector<double> p{0.2, 0.8};
  const MixingMeasure iid = urnent::mixing_from_iid(p, 3);
  EXPECT_NEAR(iid.weight(CountVector{1, 2}), 3 * 0.2 * 0.64, 1e-15);
  EXPECT_THROW(urnent::fixed_family(mu)(11), urnent::domain_error);
}

TEST(Experiment, DeterministicAcrossThreadCounts) {
  const std::vector<std::int64_t> ns{2, 4, 6, 9, 12};
  const auto one = urnent::monotonicity_experiment(urnent::iid_family({0.3, 0.7}), 5, ns, 1);
  const auto four = urnent::monotonicity_experiment(urnent::iid_family({0.3, 0.7}), 5, ns, 4);
  ASSERT_EQ(one.rows.size(), four.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    EXPECT_EQ(one.rows[i].n, four.rows[i].n);
    EXPECT_EQ(one.rows[i].k, four.rows[i].k);
    EXPECT_EQ(one.rows[i].div.d, four.rows[i].div.d);
  }
  for (auto n : ns) EXPECT_TRUE(one.monotone_in_k.at(n)) << "n=" << n;
  EXPECT_EQ(one.rows.front().n, 2);
  EXPECT_EQ(one.rows.front().k, 1);
}
