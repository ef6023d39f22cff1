#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "walkgroups/walk_dp.hpp"

using namespace walkgroups;

namespace {

std::vector<Rational> ints(std::initializer_list<int> v) { return {v.begin(), v.end()}; }

WeightedModel scaled(const WeightedModel& m, const Rational& c) {
  WeightMap w;
  for (const auto& [s, v] : m.weights()) w.emplace(s, v * c);
  return WeightedModel(m.dim(), w);
}

}  // namespace

TEST(CountWalks, EmptyWalk) {
  std::mt19937_64 rng(307);
  for (int k = 0; k < 10; ++k) {
    const auto m = wgtest::random_model(rng, 2 + k % 2);
    const LatticePoint P(m.dim(), 1);
    LatticePoint Q = P;
    Q[0] = 2;
    EXPECT_EQ(count_walks(m, P, P, 0), 1);
    EXPECT_EQ(count_walks(m, P, Q, 0), 0);
  }
}

TEST(CountWalks, Examples) {
  EXPECT_EQ(count_walks(models::simple_walk(), {0, 0}, {0, 0}, 2), 2);
  EXPECT_EQ(count_walks(models::kreweras(), {0, 0}, {0, 0}, 3), 2);
  EXPECT_EQ(series_terms(models::simple_walk(), {0, 0}, {0, 0}, 4), ints({1, 0, 2, 0, 10}));
  EXPECT_EQ(series_terms(models::kreweras(), {0, 0}, {0, 0}, 6), ints({1, 0, 0, 2, 0, 0, 16}));
}

TEST(CountWalks, Errors) {
  EXPECT_THROW(count_walks(models::kreweras(), {0, -1}, {0, 0}, 2), WalkQueryError);
  EXPECT_THROW(count_walks(models::kreweras(), {0, 0}, {0, 0, 0}, 2), WalkQueryError);
  EXPECT_THROW(count_walks(models::kreweras(), {0, 0}, {0, 0}, -1), WalkQueryError);
  EXPECT_EQ(count_walks(models::kreweras(), {0, 0}, {50, 50}, 3), 0);
}

TEST(CountWalks, MatchBruteForceOnShippedModels) {
  std::vector<wgtest::Named> cases = wgtest::golden_2d_fixed();
  cases.push_back({"gessel", models::gessel()});
  for (const auto& m : models::order10_triple()) cases.push_back({"order10", m});
  const int n = 8;
  for (const auto& [name, m] : cases)
    for (const LatticePoint& P : {LatticePoint{0, 0}, LatticePoint{1, 2}}) {
      const auto brute = wgtest::brute_force_counts(m, P, n);
      const auto table = count_table(m, P, n);
      for (const auto& [key, value] : brute) EXPECT_EQ(table.at(static_cast<size_t>(key.first), key.second), value) << name;
      // and nothing in the table that brute force did not reach
      for (int len = 0; len <= n; ++len) {
        Rational total = 0;
        for (const auto& [key, value] : brute)
          if (key.first == len) total += value;
        EXPECT_EQ(table.layer_sum(static_cast<size_t>(len)), total) << name;
      }
    }
}

TEST(CountWalks, MatchBruteForceIn3D) {
  for (const auto& [name, m] : wgtest::golden_3d()) {
    const LatticePoint P{0, 1, 0};
    const auto brute = wgtest::brute_force_counts(m, P, 5);
    const auto table = count_table(m, P, 5);
    for (const auto& [key, value] : brute) EXPECT_EQ(table.at(static_cast<size_t>(key.first), key.second), value) << name;
  }
}

TEST(CountWalks, RelabelingInvariance) {
  std::mt19937_64 rng(311);
  for (int k = 0; k < 20; ++k) {
    const int d = 2 + k % 2;
    const auto m = wgtest::random_model(rng, d);
    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto pm = permute_coordinates(m, perm);
    // locate where permute_coordinates sends each axis using a unit step
    LatticePoint P(d), Q(d);
    for (int i = 0; i < d; ++i) {
      P[i] = static_cast<int>(rng() % 3);
      Q[i] = static_cast<int>(rng() % 3);
    }
    std::vector<int> image(d);
    for (int i = 0; i < d; ++i) {
      std::vector<int> e(d, 0);
      e[i] = 1;
      const auto img = permute_coordinates(unweighted(d, {Step(e)}), perm);
      const auto& s = img.weights().begin()->first;
      for (int j = 0; j < d; ++j)
        if (s[j] == 1) image[i] = j;
    }
    LatticePoint PP(d), QQ(d);
    for (int i = 0; i < d; ++i) {
      PP[image[i]] = P[i];
      QQ[image[i]] = Q[i];
    }
    EXPECT_EQ(series_terms(m, P, Q, 6), series_terms(pm, PP, QQ, 6)) << m.str();
  }
}

TEST(CountWalks, ParityOfOddStepSums) {
  const auto m = unweighted(2, {{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {-1, -1}});
  // (1,1) and (-1,-1) have even sum; use the odd-sum steps only
  const auto odd = unweighted(2, {{1, 0}, {0, 1}, {-1, 0}, {0, -1}});
  const auto s = series_terms(odd, {0, 0}, {0, 0}, 9);
  for (int k = 1; k <= 9; k += 2) EXPECT_EQ(s[k], 0);
  const auto g = series_terms(m, {0, 0}, {0, 0}, 9);
  EXPECT_NE(g[3], 0);
}

TEST(CountWalks, NormalizedLayerSumsAreSubProbabilitiesAndNonIncreasing) {
  std::mt19937_64 rng(313);
  std::vector<WeightedModel> cases;
  for (const auto& [name, m] : wgtest::golden_2d_fixed()) cases.push_back(m);
  for (int k = 0; k < 10; ++k) cases.push_back(wgtest::random_model(rng, 2 + k % 2));
  for (const auto& m : cases) {
    const auto n = normalize(m);
    const auto sums = layer_sums(n, LatticePoint(m.dim(), 0), 8);
    EXPECT_EQ(sums[0], 1);
    for (size_t k = 1; k < sums.size(); ++k) {
      EXPECT_LE(sums[k], 1);
      EXPECT_LE(sums[k], sums[k - 1]) << m.str();
    }
  }
  const auto kr = layer_sums(normalize(models::kreweras()), {0, 0}, 3);
  EXPECT_EQ(kr, (std::vector<Rational>{1, Rational(2, 3), Rational(4, 9), Rational(10, 27)}));
}

TEST(CountWalks, IntegerAndRationalPathsAgree) {
  std::mt19937_64 rng(317);
  for (int k = 0; k < 10; ++k) {
    WeightMap w;
    for (const auto& s : wgtest::small_steps(2))
      if (rng() % 2) w.emplace(s, Rational(static_cast<long>(1 + rng() % 4)));
    if (w.empty()) continue;
    const WeightedModel m(2, w);
    const auto a = series_terms(m, {1, 0}, {0, 1}, 7);
    const auto b = series_terms(scaled(m, Rational(1, 2)), {1, 0}, {0, 1}, 7);
    for (int n = 0; n <= 7; ++n) EXPECT_EQ(a[n], b[n] * pow_int(Rational(2), n));
  }
}

TEST(CountWalks, EntriesAreNonNegative) {
  std::mt19937_64 rng(331);
  const auto m = wgtest::random_model(rng, 3);
  const auto t = count_table(m, {1, 0, 2}, 6);
  for (const auto& layer : t.layers)
    for (const auto& v : layer) EXPECT_GE(v, 0);
}

TEST(ZeroDrift, Examples) {
  const auto sw = zero_drift_check(models::simple_walk());
  EXPECT_EQ(sw.drift, 0);
  EXPECT_TRUE(sw.identity);
  const auto e = zero_drift_check(WeightedModel(2, {{Step{1, 0}, 2}, {Step{-1, 0}, 1}, {Step{0, 1}, 1}, {Step{0, -1}, 1}}));
  EXPECT_LT(e.drift, 1e-10);
  EXPECT_TRUE(e.identity);
  const auto kr = zero_drift_check(models::kreweras());
  EXPECT_LT(kr.drift, 1e-12);
  EXPECT_TRUE(kr.identity);
}

TEST(ZeroDrift, RandomModels) {
  std::mt19937_64 rng(337);
  for (int k = 0; k < 50; ++k) {
    const auto m = wgtest::random_model(rng, 2 + k % 2);
    const auto r = zero_drift_check(m);
    EXPECT_LT(r.drift, 1e-10) << m.str();
    EXPECT_TRUE(r.identity) << m.str() << " " << r.covariance_residual;
  }
}

TEST(ZeroDrift, ExactReweightingHasZeroRationalDrift) {
  // x0 = (1, 1) for Kreweras: the reweighted model is the model itself
  EXPECT_EQ(drift(normalize(models::kreweras())), (std::vector<Rational>{0, 0}));
  // east-heavy walk: x0 = (1/sqrt 2, 1) reweights E and W to sqrt 2 each
  const auto e = zero_drift_check(WeightedModel(2, {{Step{1, 0}, 2}, {Step{-1, 0}, 1}, {Step{0, 1}, 1}, {Step{0, -1}, 1}}));
  EXPECT_NEAR(e.x0[0], 1 / std::sqrt(2.0), 1e-12);
}
