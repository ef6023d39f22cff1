#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "walkgroups/model.hpp"

using namespace walkgroups;

namespace {

WeightedModel kreweras() { return parse_model(R"({"d":2,"steps":[["1,0","1"],["0,1","1"],["-1,-1","1"]]})"); }

WeightedModel east_heavy() {
  return WeightedModel(2, {{Step{1, 0}, 2}, {Step{-1, 0}, 1}, {Step{0, 1}, 1}, {Step{0, -1}, 1}});
}

}  // namespace

TEST(ParseModel, KrewerasDocument) {
  const auto m = kreweras();
  EXPECT_EQ(m.dim(), 2);
  EXPECT_EQ(m.size(), 3u);
  EXPECT_EQ(m.weight(Step{-1, -1}), 1);
  EXPECT_FALSE(m.normalized());
}

TEST(ParseModel, RejectsStepOutsideRange) {
  EXPECT_THROW(parse_model(R"({"d":2,"steps":[["2,0","1"]]})"), ModelError);
}

TEST(ParseModel, ThreeDimensional) {
  const auto m = parse_model(R"({"d":3,"steps":[["0,1,-1","1"],["0,-1,1","1"]]})");
  EXPECT_EQ(m.dim(), 3);
  EXPECT_EQ(m.size(), 2u);
}

TEST(ParseModel, Errors) {
  EXPECT_THROW(parse_model("{not json"), ModelError);
  EXPECT_THROW(parse_model(R"({"d":2,"steps":[["1,0","1"],["1,0","2"]]})"), ModelError);
  EXPECT_THROW(parse_model(R"({"d":2,"steps":[["1,0","-1"]]})"), ModelError);
  EXPECT_THROW(parse_model(R"({"d":2,"steps":[["1,0,1","1"]]})"), ModelError);
  EXPECT_THROW(parse_model(R"({"d":2,"steps":[["0,0","1"]]})"), ModelError);
  EXPECT_THROW(parse_model(R"({"d":2,"steps":[["1,0","0"]]})"), ModelError);
  EXPECT_THROW(parse_model(R"({"d":2,"steps":[["1,0","1"],["-1,0","1"]],"normalized":true})"), ModelError);
}

TEST(ParseModel, ZeroWeightsAreDroppedWhenOthersRemain) {
  const auto m = parse_model(R"({"d":2,"steps":[["1,0","1"],["0,1","0"],["-1,-1","1/2"]]})");
  EXPECT_EQ(m.size(), 2u);
  EXPECT_FALSE(m.contains(Step{0, 1}));
}

TEST(ParseModel, JsonRoundTrip) {
  const auto m = models::order4_example();
  EXPECT_EQ(parse_model(model_to_json(m).dump()), m);
  const auto n = normalize(m);
  EXPECT_EQ(parse_model(model_to_json(n).dump()), n);
}

TEST(Normalize, Kreweras) {
  const auto n = normalize(kreweras());
  for (const auto& kv : n.weights()) EXPECT_EQ(kv.second, Rational(1, 3));
  EXPECT_TRUE(n.normalized());
}

TEST(Normalize, OrderFourExampleDividesBy53) {
  const auto m = models::order4_example();
  const auto n = normalize(m);
  for (const auto& [s, w] : m.weights()) EXPECT_EQ(n.weight(s), w / 53);
}

TEST(Normalize, IdempotentAndRatioPreserving) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 50; ++k) {
    const auto m = wgtest::random_model(rng, 2 + k % 2);
    const auto n = normalize(m);
    EXPECT_EQ(normalize(n), n);
    const auto& first = *m.weights().begin();
    for (const auto& [s, w] : m.weights()) EXPECT_EQ(n.weight(s) / n.weight(first.first), w / first.second);
    EXPECT_EQ(inventory_eval<Rational>(n, std::vector<Rational>(m.dim(), Rational(1))), 1);
  }
}

TEST(InventoryEval, Examples) {
  EXPECT_EQ(inventory_eval<Rational>(kreweras(), {1, 1}), 3);
  EXPECT_EQ(inventory_eval<Rational>(kreweras(), {2, 1}), Rational(7, 2));
  EXPECT_DOUBLE_EQ(inventory_eval<double>(kreweras(), {2.0, 1.0}), 3.5);
  EXPECT_EQ(inventory_eval<Rational>(normalize(models::order10_example()), {1, 1}), 1);
  EXPECT_THROW(inventory_eval<Rational>(kreweras(), {0, 1}), ModelError);
}

TEST(CheckH1, Examples) {
  EXPECT_TRUE(check_h1(kreweras()).satisfied);
  const auto v = check_h1(unweighted(2, {{1, 0}, {0, 1}, {1, 1}}));
  ASSERT_FALSE(v.satisfied);
  ASSERT_EQ(v.witness.size(), 2u);
  EXPECT_EQ(v.witness, (std::vector<Rational>{1, 1}));
  EXPECT_TRUE(check_h1(unweighted(3, {{0, 1, -1}, {0, -1, 1}, {1, -1, 0}, {-1, 1, 0}, {1, 0, 0}, {-1, 0, 0}})).satisfied);
}

TEST(CheckH1, WitnessIsSupporting) {
  std::mt19937_64 rng(3);
  const auto steps2 = wgtest::small_steps(2);
  for (unsigned mask = 1; mask < 256; ++mask) {
    std::vector<Step> S;
    for (unsigned b = 0; b < 8; ++b)
      if (mask & (1u << b)) S.push_back(steps2[b]);
    const auto m = unweighted(2, S);
    const auto h = check_h1(m);
    if (h.satisfied) continue;
    for (const auto& s : S) EXPECT_GE(h.witness[0] * s[0] + h.witness[1] * s[1], 0) << m.str();
  }
}

TEST(CheckH1, AgreesWithAngularGapOracleOnAll2DSets) {
  const auto steps2 = wgtest::small_steps(2);
  for (unsigned mask = 1; mask < 256; ++mask) {
    std::vector<Step> S;
    for (unsigned b = 0; b < 8; ++b)
      if (mask & (1u << b)) S.push_back(steps2[b]);
    const auto m = unweighted(2, S);
    EXPECT_EQ(check_h1(m).satisfied, wgtest::h1_by_angles(m)) << m.str();
  }
}

TEST(CheckH1, AgreesWithDirectionGridOracleIn3D) {
  std::mt19937_64 rng(5);
  const auto steps3 = wgtest::small_steps(3);
  std::uniform_int_distribution<int> count(1, 9);
  std::uniform_int_distribution<size_t> pick(0, steps3.size() - 1);
  int satisfied = 0;
  for (int k = 0; k < 400; ++k) {
    std::set<Step> S;
    const int n = count(rng);
    while (static_cast<int>(S.size()) < n) S.insert(steps3[pick(rng)]);
    const auto m = unweighted(3, {S.begin(), S.end()});
    const bool h1 = check_h1(m).satisfied;
    satisfied += h1;
    EXPECT_EQ(h1, wgtest::h1_by_grid(m)) << m.str();
  }
  EXPECT_GT(satisfied, 10);
}

TEST(CheckH1, InvariantUnderCentralWeightingAndPermutation) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 100; ++k) {
    const int d = 2 + k % 2;
    WeightMap w;
    for (const auto& s : wgtest::small_steps(d))
      if (rng() % 3 == 0) w.emplace(s, random_positive_rational(rng, 9));
    if (w.empty()) continue;
    const WeightedModel m(d, w);
    const bool h = check_h1(m).satisfied;
    EXPECT_EQ(check_h1(central_weighting(m, random_positive_rational(rng), wgtest::random_alpha(rng, d))).satisfied, h);
    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    EXPECT_EQ(check_h1(permute_coordinates(m, perm)).satisfied, h);
  }
}

TEST(CentralWeighting, Examples) {
  const auto k = kreweras();
  EXPECT_EQ(central_weighting(k, 1, {1, 1}), k);
  const auto c = central_weighting(k, 1, {2, 1});
  EXPECT_EQ(c.weight(Step{1, 0}), 2);
  EXPECT_EQ(c.weight(Step{0, 1}), 1);
  EXPECT_EQ(c.weight(Step{-1, -1}), Rational(1, 2));
  EXPECT_THROW(central_weighting(k, 0, {1, 1}), ModelError);
  EXPECT_THROW(central_weighting(k, 1, {1, -1}), ModelError);
}

TEST(Drift, Examples) {
  EXPECT_EQ(drift(models::simple_walk()), (std::vector<Rational>{0, 0}));
  EXPECT_EQ(drift(kreweras()), (std::vector<Rational>{0, 0}));
  EXPECT_EQ(drift(east_heavy()), (std::vector<Rational>{1, 0}));
}

TEST(SliceModel, B3ModelOneAtTwo) {
  const auto s = slice_model(families::b3_model1(), 2, 2);
  const auto& m = s.model;
  EXPECT_EQ(m.weight(Step{0, 1}), Rational(1, 2));
  EXPECT_EQ(m.weight(Step{0, -1}), 2);
  EXPECT_EQ(m.weight(Step{1, -1}), 1);
  EXPECT_EQ(m.weight(Step{-1, 1}), 1);
  EXPECT_EQ(m.weight(Step{-1, 0}), 1);
  EXPECT_EQ(m.weight(Step{1, 0}), 1);
  EXPECT_EQ(m.size(), 6u);
}

TEST(SliceModel, NoDependenceOnSlicedAxis) {
  const auto m = unweighted(3, {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}});
  for (const Rational& z : {Rational(1, 3), Rational(1), Rational(5)}) {
    const auto s = slice_model(m, 2, z);
    EXPECT_EQ(s.model, models::simple_walk());
  }
}

TEST(SliceModel, NormalizedParentGivesUnnormalizedSlice) {
  const auto s = slice_model(normalize(families::b3_model2()), 2, 1);
  EXPECT_FALSE(s.model.normalized());
}

TEST(SliceModel, LinearInZOneAndInverseZ) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 30; ++k) {
    const auto m = wgtest::random_model(rng, 3);
    for (int axis = 0; axis < 3; ++axis) {
      const Rational z = random_positive_rational(rng, 9);
      SliceModel s;
      try {
        s = slice_model(m, axis, z);
      } catch (const ModelError&) {
        continue;
      }
      for (const auto& [st, w] : s.model.weights()) {
        Rational expect = 0;
        for (int e = -1; e <= 1; ++e) {
          std::vector<int> c(3);
          int r = 0;
          for (int i = 0; i < 3; ++i) c[i] = i == axis ? e : st[r++];
          if (std::all_of(c.begin(), c.end(), [](int v) { return v == 0; })) continue;
          expect += m.weight(Step(c)) * pow_int(z, e);
        }
        EXPECT_EQ(w, expect);
      }
    }
  }
}

TEST(SliceModel, Errors) {
  EXPECT_THROW(slice_model(kreweras(), 2, 1), ModelError);
  EXPECT_THROW(slice_model(families::b3_model1(), 2, 0), ModelError);
  EXPECT_THROW(slice_model(unweighted(3, {{0, 0, 1}, {0, 0, -1}}), 2, 1), ModelError);
}

TEST(Rational, ParseAndFormat) {
  EXPECT_EQ(parse_rational("3/6"), Rational(1, 2));
  EXPECT_EQ(to_string(Rational(2)), "2");
  EXPECT_EQ(to_string(Rational(-3, 4)), "-3/4");
  EXPECT_EQ(parse_decimal("0.05"), Rational(1, 20));
  EXPECT_EQ(parse_decimal("-3.5"), Rational(-7, 2));
  EXPECT_THROW(parse_rational("1/0"), ParseError);
  EXPECT_EQ(best_rational(0.4000000001, 16), (Fraction{2, 5}));
  EXPECT_EQ(best_rational(0.3333333333, 16), (Fraction{1, 3}));
}
