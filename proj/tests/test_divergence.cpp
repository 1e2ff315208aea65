#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "urnent/bounds.hpp"
#include "urnent/divergence.hpp"
#include "urnent/oracle.hpp"

using urnent::UrnSpec;

namespace {

std::vector<UrnSpec> sample_specs(int count, std::uint64_t seed, std::int64_t max_part = 30) {
  std::mt19937_64 rng(seed);
  std::vector<UrnSpec> out;
  while (static_cast<int>(out.size()) < count) {
    const int c = std::uniform_int_distribution<int>(2, 4)(rng);
    std::vector<std::int64_t> ell;
    for (int j = 0; j < c; ++j) ell.push_back(std::uniform_int_distribution<std::int64_t>(1, max_part)(rng));
    std::int64_t n = 0;
    for (auto l : ell) n += l;
    out.emplace_back(std::uniform_int_distribution<std::int64_t>(0, n)(rng), ell);
  }
  return out;
}

}  // namespace

TEST(RelativeEntropy, FrozenValues) {
  EXPECT_NEAR(urnent::relative_entropy(UrnSpec(30, {1, 99})), 0.048822514091880137912, 1e-16);
  EXPECT_NEAR(urnent::relative_entropy(UrnSpec(2, {2, 2})), 0.056633012265132490967, 1e-16);
  EXPECT_NEAR(urnent::relative_entropy(UrnSpec(30, {50, 50})), 0.027581807935282950725, 1e-16);
}

TEST(TotalVariation, FrozenValues) {
  EXPECT_NEAR(urnent::total_variation(UrnSpec(2, {2, 2})), 1.0 / 6.0, 1e-16);
  EXPECT_NEAR(urnent::total_variation(UrnSpec(30, {50, 50})), 0.086441460863272171767, 1e-15);
}

TEST(TotalVariation, MatchesExactRational) {
  for (const auto& spec : sample_specs(25, 5, 8)) {
    const double exact = urnent::oracle::exact_total_variation(spec).get_d();
    EXPECT_NEAR(urnent::total_variation(spec), exact, 1e-14) << to_string(spec);
  }
}

TEST(RelativeEntropy, ZeroForAtMostOneDraw) {
  for (std::int64_t k : {0, 1}) {
    EXPECT_EQ(urnent::relative_entropy(UrnSpec(k, {3, 7, 11})), 0.0);
    EXPECT_EQ(urnent::total_variation(UrnSpec(k, {3, 7, 11})), 0.0);
  }
  EXPECT_EQ(urnent::relative_entropy(UrnSpec(4, {0, 9, 0})), 0.0);
}

TEST(RelativeEntropy, EmptyColoursAreIgnored) {
  EXPECT_EQ(urnent::relative_entropy(UrnSpec(6, {5, 0, 7})), urnent::relative_entropy(UrnSpec(6, {5, 7})));
  EXPECT_EQ(urnent::total_variation(UrnSpec(6, {0, 5, 7})), urnent::total_variation(UrnSpec(6, {5, 7})));
}

TEST(RelativeEntropy, TwoRoutesAgree) {
  for (const auto& spec : sample_specs(200, 17)) {
    EXPECT_NEAR(urnent::relative_entropy(spec), urnent::relative_entropy_via_u(spec), 1e-9) << to_string(spec);
  }
}

TEST(RelativeEntropy, SingletonColourHasClosedForm) {
  for (std::int64_t n : {2, 7, 50, 300})
    for (std::int64_t k = 0; k <= n; k += std::max<std::int64_t>(1, n / 9)) {
      const double closed = urnent::exact_binary_divergence(n, k);
      EXPECT_NEAR(urnent::relative_entropy(UrnSpec(k, {1, n - 1})), closed, 1e-12 * std::max(1.0, closed))
          << "n=" << n << " k=" << k;
    }
}

TEST(RelativeEntropy, InformationInequalities) {
  for (const auto& spec : sample_specs(200, 23)) {
    const double d = urnent::relative_entropy(spec);
    const double tv = urnent::total_variation(spec);
    EXPECT_GE(d, 0.0) << to_string(spec);
    EXPECT_LE(2.0 * tv * tv, d + 1e-12) << to_string(spec);
    EXPECT_LE(tv * tv, 1.0 - std::exp(-d) + 1e-12) << to_string(spec);
    EXPECT_LE(tv, double(spec.c()) * double(spec.k()) / double(spec.n()) + 1e-12) << to_string(spec);
  }
}

TEST(RelativeEntropy, InvariantUnderColourPermutation) {
  for (const auto& spec : sample_specs(50, 29)) {
    auto ell = spec.ell();
    std::rotate(ell.begin(), ell.begin() + 1, ell.end());
    EXPECT_NEAR(urnent::relative_entropy(UrnSpec(spec.k(), ell)), urnent::relative_entropy(spec), 1e-15)
        << to_string(spec);
  }
}

TEST(RelativeEntropy, NondecreasingInDraws) {
  // Data processing: the first k draws are a function of the first k+1.
  for (const std::vector<std::int64_t>& ell : {std::vector<std::int64_t>{10, 10}, {3, 12, 5}, {1, 1, 1, 17}}) {
    double prev = 0.0;
    std::int64_t n = 0;
    for (auto l : ell) n += l;
    for (std::int64_t k = 0; k <= n; ++k) {
      const double d = urnent::relative_entropy(UrnSpec(k, ell));
      EXPECT_GE(d, prev - 1e-14) << "k=" << k;
      prev = d;
    }
  }
}

TEST(ExpectedU, MatchesDirectSum) {
  for (std::int64_t n : {10, 40})
    for (std::int64_t k : std::initializer_list<std::int64_t>{0, 3, n / 2, n})
      for (std::int64_t l : std::initializer_list<std::int64_t>{1, 4, n}) {
        double direct = 0.0;
        for (std::int64_t s = 0; s <= std::min(k, l); ++s)
          direct += urnent::marginal_hypergeometric(n, k, l, s) * urnent::u_value(double(l), double(s));
        EXPECT_NEAR(urnent::expected_u(n, k, l), direct, 1e-13 * std::max(1.0, direct))
            << "n=" << n << " k=" << k << " l=" << l;
      }
}

TEST(DivergenceReport, ConsistentOnSample) {
  for (const auto& spec : sample_specs(40, 31)) {
    const auto rep = urnent::divergence_report(spec);
    EXPECT_TRUE(rep.consistent()) << to_string(spec);
    EXPECT_EQ(rep.support_size, urnent::support(spec).count());
  }
}
