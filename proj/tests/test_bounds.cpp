#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "urnent/bounds.hpp"
#include "urnent/divergence.hpp"
#include "urnent/verify.hpp"

using urnent::UrnSpec;

TEST(UniformBounds, FrozenValues) {
  const auto stam = urnent::stam_bounds(100, 30, 2);
  EXPECT_NEAR(stam.upper, 0.061886470337174562527, 1e-16);
  EXPECT_NEAR(stam.lower, 0.022191613100704009795, 1e-16);
  const auto hm = urnent::hm_bounds(100, 30, 2);
  EXPECT_NEAR(hm.upper, 0.060709115127484469958, 1e-15);
  EXPECT_NEAR(hm.lower, 0.024805845132495838620, 1e-15);
  EXPECT_NEAR(urnent::hm_bounds(100, 99, 2).upper, 4.1051198501345899269, 1e-14);
}

TEST(UniformBounds, EdgeCases) {
  EXPECT_EQ(urnent::stam_bounds(10, 1, 3).upper, 0.0);
  EXPECT_EQ(urnent::hm_bounds(10, 1, 3).lower, 0.0);
  EXPECT_EQ(urnent::hm_bounds(10, 2, 3).lower, 0.0);
  const auto full = urnent::hm_bounds(10, 10, 2);
  EXPECT_TRUE(full.upper_infinite);
  EXPECT_TRUE(std::isinf(full.upper));
  EXPECT_THROW(urnent::stam_bounds(10, 0, 2), urnent::domain_error);
  EXPECT_THROW(urnent::stam_bounds(10, 3, 1), urnent::domain_error);
  EXPECT_THROW(urnent::hm_bounds(1, 1, 2), urnent::domain_error);
}

TEST(Theorem, FrozenValues) {
  EXPECT_NEAR(urnent::thm1_upper(UrnSpec(30, {50, 50})), 0.029722838485842910015, 1e-15);
  EXPECT_NEAR(urnent::thm1_upper(UrnSpec(30, {1, 99})), 0.10538628070767350038, 1e-15);
  EXPECT_NEAR(urnent::thm1_upper(UrnSpec(1, {50, 50})), 4.3024608087550e-5, 1e-17);
}

TEST(Theorem, OutsideDomainIsNotApplicable) {
  EXPECT_THROW(urnent::thm1_upper(UrnSpec(51, {50, 50})), urnent::applicability_error);
  EXPECT_THROW(urnent::thm1_upper(UrnSpec(3, {0, 10})), urnent::applicability_error);
  EXPECT_THROW(urnent::thm1_upper(UrnSpec(0, {5, 5})), urnent::applicability_error);
  EXPECT_FALSE(urnent::thm1_extrapolation_check(UrnSpec(30, {50, 50})).has_value());
  EXPECT_TRUE(urnent::thm1_extrapolation_check(UrnSpec(70, {50, 50})).has_value());
}

TEST(Proposition, FrozenValues) {
  EXPECT_NEAR(urnent::prop12_upper(100, 30, 1), 0.048856115044190408791, 1e-15);
  EXPECT_NEAR(urnent::prop12_upper(100, 30, 50), 0.065088539764296517286, 1e-15);
  EXPECT_NEAR(urnent::prop12_upper(100, 1, 10), 7.9612569586392e-6, 1e-17);
  EXPECT_THROW(urnent::prop12_upper(100, 30, 51), urnent::applicability_error);
  EXPECT_THROW(urnent::prop12_upper(100, 51, 3), urnent::applicability_error);
}

TEST(Proposition, NewtonBracketConventions) {
  const auto one = urnent::newton_brackets(1);
  EXPECT_EQ(one.second, 0.0);
  EXPECT_EQ(one.third, 0.0);
  const auto two = urnent::newton_brackets(2);
  EXPECT_NEAR(two.second, -2.0 * std::log(2.0), 1e-15);
  EXPECT_EQ(two.third, 0.0);
  const auto five = urnent::newton_brackets(5);
  EXPECT_NEAR(five.second, -20.0 * std::log(5.0 / 4.0), 1e-14);
  EXPECT_NEAR(five.third, -60.0 * std::log(16.0 / 15.0), 1e-14);
}

TEST(Limits, FrozenValuesAndCrossover) {
  const auto a = urnent::limit_expressions(2, 0.3);
  EXPECT_NEAR(a.balanced, 0.028337471969366189456, 1e-16);
  EXPECT_NEAR(a.unbalanced, 0.050327539242887334761, 1e-16);
  const auto b = urnent::limit_expressions(2, 0.5);
  EXPECT_NEAR(b.balanced, 0.096573590279972654709, 1e-16);
  EXPECT_NEAR(b.unbalanced, 0.15342640972002734529, 1e-16);
  const double s = urnent::crossover_s_star();
  EXPECT_NEAR(s, 0.88341396724187915405, 1e-10);
  const auto at = urnent::limit_expressions(2, s);
  EXPECT_NEAR(at.balanced, at.unbalanced, 1e-10);
  EXPECT_NEAR(urnent::exact_binary_divergence(4, 2), 0.084949518397698736450, 1e-16);
}

TEST(Limits, BalancedUrnsApproachLimitFromBelow) {
  const double lim = urnent::limit_expressions(2, 0.3).balanced;
  double prev_gap = 1.0;
  for (std::int64_t n : {100, 1000, 10000}) {
    const double d = urnent::relative_entropy(UrnSpec(3 * n / 10, {n / 2, n / 2}));
    const double gap = std::abs(d - lim);
    EXPECT_LT(gap, prev_gap) << "n=" << n;
    prev_gap = gap;
  }
  EXPECT_LE(prev_gap, 1e-3);
  EXPECT_NEAR(prev_gap, 7.5006e-6, 1e-9);
}

TEST(Bracketing, AllBoundsContainExactValue) {
  for (std::int64_t n : {6, 20, 57, 120})
    for (std::int64_t k = 1; 2 * k <= n; k += std::max<std::int64_t>(1, n / 12))
      for (std::int64_t l = 1; 2 * l <= n; l += std::max<std::int64_t>(1, n / 10)) {
        const UrnSpec spec(k, {l, n - l});
        const double d = urnent::relative_entropy(spec);
        const auto rep = urnent::bound_report(spec);
        ASSERT_TRUE(rep.thm1_upper && rep.prop12_upper && rep.stam_upper && rep.hm_lower);
        EXPECT_LE(d, *rep.stam_upper + 1e-12) << to_string(spec);
        EXPECT_LE(d, *rep.hm_upper + 1e-12) << to_string(spec);
        EXPECT_LE(d, *rep.thm1_upper + 1e-12) << to_string(spec);
        EXPECT_LE(d, *rep.prop12_upper + 1e-12) << to_string(spec);
        EXPECT_GE(d, *rep.stam_lower - 1e-12) << to_string(spec);
        EXPECT_GE(d, *rep.hm_lower - 1e-12) << to_string(spec);
      }
}

TEST(Bracketing, ThreeColours) {
  for (const std::vector<std::int64_t>& ell :
       {std::vector<std::int64_t>{1, 1, 38}, {10, 15, 15}, {2, 9, 29}, {13, 13, 14}})
    for (std::int64_t k = 1; k <= 20; ++k) {
      const UrnSpec spec(k, ell);
      const double d = urnent::relative_entropy(spec);
      EXPECT_LE(d, urnent::thm1_upper(spec) + 1e-12) << to_string(spec);
      EXPECT_LE(d, urnent::stam_bounds(40, k, 3).upper + 1e-12) << to_string(spec);
      EXPECT_GE(d, urnent::hm_bounds(40, k, 3).lower - 1e-12) << to_string(spec);
    }
}

TEST(Diagnostics, ProofStepsHoldOnTwoColours) {
  for (std::int64_t n : {8, 31, 100})
    for (std::int64_t k = 1; 2 * k <= n; k += std::max<std::int64_t>(1, n / 8))
      for (std::int64_t l = 1; 2 * l <= n; l += std::max<std::int64_t>(1, n / 7)) {
        const auto diag = urnent::proof_step_diagnostics(UrnSpec(k, {l, n - l}));
        EXPECT_TRUE(diag.all_hold()) << "n=" << n << " k=" << k << " l=" << l;
        EXPECT_TRUE(diag.split.has_value());
      }
}

TEST(Diagnostics, SplitPartsSumToExact) {
  const UrnSpec spec(30, {7, 93});
  const auto diag = urnent::proof_step_diagnostics(spec);
  ASSERT_TRUE(diag.split);
  double total = 0.0;
  for (const auto& part : *diag.split) total += part.exact;
  EXPECT_NEAR(total, urnent::relative_entropy(spec), 1e-12);
}

TEST(Shape, SigmaStatisticsFollowMajorization) {
  // Sigma_1 and the ell-dependent bound grow as the urn becomes less balanced.
  for (const auto& [x, y] : urnent::verify::majorization_pairs()) {
    ASSERT_TRUE(urnent::verify::majorizes(x, y));
    const auto sx = urnent::sigma_stats(UrnSpec(1, x));
    const auto sy = urnent::sigma_stats(UrnSpec(1, y));
    EXPECT_GE(sx.sigma1, sy.sigma1);
    EXPECT_GE(sx.sigma2, sy.sigma2);
  }
  const auto bal = urnent::sigma_stats(UrnSpec(1, {25, 25, 25, 25}));
  EXPECT_DOUBLE_EQ(bal.sigma1, 16.0);
}

TEST(Report, OptionalFieldsFollowHypotheses) {
  const auto mid = urnent::bound_report(UrnSpec(60, {50, 50}));
  EXPECT_FALSE(mid.thm1_upper.has_value());
  EXPECT_FALSE(mid.prop12_upper.has_value());
  EXPECT_TRUE(mid.stam_upper.has_value());
  const auto zero = urnent::bound_report(UrnSpec(0, {5, 5}));
  EXPECT_FALSE(zero.stam_upper.has_value());
  const auto three = urnent::bound_report(UrnSpec(4, {1, 4, 5}));
  EXPECT_FALSE(three.prop12_upper.has_value());
  EXPECT_FALSE(three.exact_binary.has_value());
  const auto single = urnent::bound_report(UrnSpec(4, {0, 1, 9}));
  ASSERT_TRUE(single.exact_binary.has_value());
  EXPECT_NEAR(*single.exact_binary, urnent::relative_entropy(UrnSpec(4, {1, 9})), 1e-15);
}

TEST(KnownLimitation, HmLowerExceedsExactForFullDrawFromSingletonUrn) {
  // Outside k <= n/2 the lower formula is not a bound for every urn.
  const UrnSpec spec(20, {1, 19});
  EXPECT_GT(urnent::hm_bounds(20, 20, 2).lower, urnent::relative_entropy(spec));
}

TEST(Mutation, MistypedStamDenominatorIsCaught) {
  urnent::verify::BoundFunctions broken;
  broken.stam = [](std::int64_t n, std::int64_t k, std::int64_t c) {
    auto b = urnent::stam_bounds(n, k, c);
    const double nn = double(n), kk = double(k);
    b.upper = double(c - 1) * kk * (kk - 1.0) / (2.0 * (nn - 1.0) * (nn - kk - 1.0));
    return b;
  };
  const auto res = urnent::verify::suite_reference_values(broken);
  EXPECT_FALSE(res.passed());
  EXPECT_NE(res.first_violation.find("stam_upper(n=100, k=30, c=2)"), std::string::npos) << res.first_violation;
  EXPECT_TRUE(urnent::verify::suite_reference_values().passed());
}
