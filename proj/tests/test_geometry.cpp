#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "walkgroups/geometry.hpp"

using namespace walkgroups;

namespace {

WeightedModel east_heavy() {
  return WeightedModel(2, {{Step{1, 0}, 2}, {Step{-1, 0}, 1}, {Step{0, 1}, 1}, {Step{0, -1}, 1}});
}

Eigen::VectorXd random_point(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(0.4, 2.5);
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = u(rng);
  return x;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(CriticalPoint, Examples) {
  const auto sw = critical_point(models::simple_walk());
  EXPECT_NEAR(sw.x0[0], 1, 1e-12);
  EXPECT_NEAR(sw.x0[1], 1, 1e-12);
  const auto kr = critical_point(models::kreweras());
  EXPECT_NEAR(kr.x0[0], 1, 1e-12);
  EXPECT_NEAR(kr.x0[1], 1, 1e-12);
  const auto e = critical_point(east_heavy());
  EXPECT_NEAR(e.x0[0], 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(e.x0[1], 1, 1e-12);
}

TEST(CriticalPoint, GradientVanishesAndIterationsAreFew) {
  std::mt19937_64 rng(53);
  std::vector<wgtest::Named> cases = wgtest::golden_2d_fixed();
  for (const auto& n : wgtest::golden_3d()) cases.push_back(n);
  for (int k = 0; k < 40; ++k) cases.push_back({"random", wgtest::random_model(rng, 2 + k % 2)});
  for (const auto& [name, m] : cases) {
    const auto cp = critical_point(m);
    EXPECT_LE(cp.residual, 1e-12) << name;
    EXPECT_LE(cp.iterations, 30) << name;
    for (int i = 0; i < m.dim(); ++i) EXPECT_GT(cp.x0[i], 0) << name;
    const Eigen::VectorXd g = chi_gradient(m, cp.x0);
    EXPECT_LE(g.norm() / chi_value(m, cp.x0), 1e-10) << name;
  }
}

TEST(CriticalPoint, MinimizesChiOnThePositiveOrthant) {
  std::mt19937_64 rng(59);
  for (int k = 0; k < 10; ++k) {
    const auto m = wgtest::random_model(rng, 2 + k % 2);
    const auto cp = critical_point(m);
    const double best = chi_value(m, cp.x0);
    for (int j = 0; j < 50; ++j) EXPECT_GE(chi_value(m, random_point(rng, m.dim())), best - 1e-12);
  }
}

TEST(CriticalPoint, FailsWithoutH1) {
  EXPECT_THROW(critical_point(unweighted(2, {{1, 0}, {0, 1}, {1, 1}})), GeometryError);
}

TEST(ChiDerivatives, MatchCentralDifferences) {
  std::mt19937_64 rng(61);
  const double h = 1e-6;
  for (int k = 0; k < 50; ++k) {
    const int d = 2 + k % 2;
    const auto m = wgtest::random_model(rng, d);
    const Eigen::VectorXd x = random_point(rng, d);
    const Eigen::VectorXd g = chi_gradient(m, x);
    const Eigen::MatrixXd H = chi_hessian(m, x);
    for (int i = 0; i < d; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      EXPECT_LT(rel_err((chi_value(m, xp) - chi_value(m, xm)) / (2 * h), g[i]), 1e-6);
      const Eigen::VectorXd dg = (chi_gradient(m, xp) - chi_gradient(m, xm)) / (2 * h);
      for (int j = 0; j < d; ++j) EXPECT_LT(rel_err(dg[j], H(j, i)), 1e-6);
    }
  }
}

TEST(Covariance, Examples) {
  const auto sw = covariance(models::simple_walk(), critical_point(models::simple_walk()));
  EXPECT_LT((sw.delta - Eigen::Matrix2d::Identity()).norm(), 1e-14);
  const auto kr = covariance(models::kreweras(), critical_point(models::kreweras()));
  EXPECT_NEAR(kr.a(0, 1), 0.5, 1e-12);
  // steps symmetric under x -> -x
  const auto sym = unweighted(2, {{1, 1}, {-1, 1}, {1, -1}, {-1, -1}, {0, 1}});
  EXPECT_NEAR(covariance(sym, critical_point(sym)).a(0, 1), 0, 1e-12);
}

TEST(Covariance, UnitDiagonalSymmetricPositiveDefinite) {
  std::mt19937_64 rng(67);
  for (int k = 0; k < 50; ++k) {
    const auto m = wgtest::random_model(rng, 2 + k % 2);
    const auto cov = covariance(m, critical_point(m));
    const auto d = cov.delta.rows();
    for (Eigen::Index i = 0; i < d; ++i) EXPECT_EQ(cov.delta(i, i), 1.0);
    EXPECT_EQ((cov.delta - cov.delta.transpose()).norm(), 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.delta);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0);
    EXPECT_LT((cov.inv_sqrt * cov.inv_sqrt * cov.delta - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Covariance, MatchesReweightedStepCorrelation) {
  // independent route: correlation of the steps under w(s) x0^s / chi(x0)
  std::mt19937_64 rng(71);
  for (int k = 0; k < 30; ++k) {
    const int d = 2 + k % 2;
    const auto m = wgtest::random_model(rng, d);
    const auto cp = critical_point(m);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
    for (const auto& [s, w] : m.weights()) {
      double p = w.get_d();
      Eigen::VectorXd v(d);
      for (int i = 0; i < d; ++i) {
        p *= std::pow(cp.x0[i], s[i]);
        v[i] = s[i];
      }
      S += p * v * v.transpose();
    }
    const auto cov = covariance(m, cp);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) EXPECT_NEAR(cov.a(i, j), S(i, j) / std::sqrt(S(i, i) * S(j, j)), 1e-9);
  }
}

TEST(InvSqrt, Examples) {
  EXPECT_LT((inv_sqrt(Eigen::Matrix2d::Identity()) - Eigen::Matrix2d::Identity()).norm(), 1e-15);
  Eigen::Matrix2d d;
  d << 4, 0, 0, 1;
  Eigen::Matrix2d e;
  e << 0.5, 0, 0, 1;
  EXPECT_LT((inv_sqrt(d) - e).norm(), 1e-15);
  Eigen::Matrix2d k;
  k << 1, 0.5, 0.5, 1;
  const Eigen::MatrixXd r = inv_sqrt(k);
  EXPECT_LT((r * r - k.inverse()).norm(), 1e-12);
  EXPECT_LT((r - r.transpose()).norm(), 1e-15);
  Eigen::Matrix2d bad;
  bad << 1, 2, 2, 1;
  EXPECT_THROW(inv_sqrt(bad), GeometryError);
}

TEST(DihedralOrders, Examples) {
  CovarianceData c;
  c.delta = Eigen::Matrix2d::Identity();
  c.inv_sqrt = c.delta;
  EXPECT_EQ(dihedral_orders(c).at({0, 1}).m, 2);
  c.delta(0, 1) = c.delta(1, 0) = -0.5;
  EXPECT_EQ(dihedral_orders(c).at({0, 1}).m, 3);
  c.delta(0, 1) = c.delta(1, 0) = 0.5;
  const auto o = dihedral_orders(c).at({0, 1});
  EXPECT_FALSE(o.m);
  ASSERT_TRUE(o.rational);
  EXPECT_EQ(*o.rational, (Fraction{2, 3}));
  c.delta(0, 1) = c.delta(1, 0) = -0.3;
  const auto irr = dihedral_orders(c).at({0, 1});
  EXPECT_FALSE(irr.m);
  EXPECT_FALSE(irr.rational);
  EXPECT_THROW(dihedral_orders(c, 1), GeometryError);
}

TEST(ReflectionGroup, Examples) {
  auto run = [](const WeightedModel& m) {
    const auto cov = covariance(m, critical_point(m));
    return reflection_group(cov, dihedral_orders(cov));
  };
  const auto sw = run(models::simple_walk());
  EXPECT_EQ(sw.label, "D4");
  EXPECT_EQ(sw.order, 4);
  const auto kr = run(models::kreweras());
  EXPECT_EQ(kr.label, "D6");
  EXPECT_EQ(kr.order, 6);
  const auto b3 = run(families::b3_model1());
  EXPECT_EQ(b3.label, "B3");
  EXPECT_EQ(b3.order, 48);
  const auto a3 = run(families::a3_family2(1, 1, 1));
  EXPECT_EQ(a3.label, "A3");
  EXPECT_EQ(a3.order, 24);
  EXPECT_EQ(run(families::z2xd2k(4)).label, "Z2xD8");
}

TEST(ReflectionGroup, ReflectionsAreOrthogonalInvolutionsFixingTheirHyperplanes) {
  std::mt19937_64 rng(73);
  for (int k = 0; k < 30; ++k) {
    const int d = 2 + k % 2;
    const auto m = wgtest::random_model(rng, d);
    const auto cov = covariance(m, critical_point(m));
    const auto rd = reflection_group(cov, dihedral_orders(cov), 8);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    for (int i = 0; i < d; ++i) {
      const auto& r = rd.reflections[i];
      EXPECT_LT((r * r - I).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((r * r.transpose() - I).cwiseAbs().maxCoeff(), 1e-10);
      // H_i = Delta^{-1/2} G_i with G_i spanned by e_j, j != i
      for (int j = 0; j < d; ++j) {
        if (j == i) continue;
        const Eigen::VectorXd v = cov.inv_sqrt.col(j);
        EXPECT_LT((r * v - v).cwiseAbs().maxCoeff(), 1e-10);
      }
    }
  }
}

TEST(ReflectionGroup, AngleBetweenMirrorsMatchesDelta) {
  std::mt19937_64 rng(79);
  for (int k = 0; k < 20; ++k) {
    const auto m = wgtest::random_model(rng, 3);
    const auto cov = covariance(m, critical_point(m));
    const auto rd = reflection_group(cov, dihedral_orders(cov), 8);
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) EXPECT_NEAR(rd.normals[i].dot(rd.normals[j]), cov.a(i, j), 1e-10);
  }
}

TEST(ReflectionGroupMatchesWalkGroup, ReflectionOrderMatchesGroupOrder) {
  auto cases = wgtest::golden_2d_fixed();
  for (const auto& n : wgtest::golden_3d()) cases.push_back(n);
  for (const auto& [name, m] : cases) {
    const auto cov = covariance(m, critical_point(m));
    const auto rd = reflection_group(cov, dihedral_orders(cov));
    EXPECT_EQ(rd.order, group_order(m, {128, 3, 1, 4}).order) << name;
  }
}

TEST(WeylCheck, Examples) {
  const auto b3 = families::b3_model1();
  const auto tb = pair_triplet(b3);
  const auto wb = weyl_check(b3, tb);
  EXPECT_TRUE(wb.weyl);
  auto sorted = tb;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::array<int, 3>{2, 3, 4}));

  const auto a3 = families::a3_family1(1);
  const auto ta = pair_triplet(a3);
  EXPECT_EQ(ta, (std::array<int, 3>{3, 2, 3}));
  EXPECT_TRUE(weyl_check(a3, ta).weyl);

  // reverse Kreweras in the plane has a12 = +1/2 but finite pair orders
  const auto rk = unweighted(3, {{-1, 0, 0}, {0, -1, 0}, {1, 1, 0}, {0, 0, 1}, {0, 0, -1}});
  const auto tr = pair_triplet(rk);
  const auto wr = weyl_check(rk, tr);
  EXPECT_FALSE(wr.weyl);
  EXPECT_FALSE(wr.condition2);
  ASSERT_FALSE(wr.reasons.empty());
  EXPECT_NE(wr.reasons.front().find("condition 2"), std::string::npos);
}

TEST(WeylCheck, TripletList) {
  EXPECT_TRUE(triplet_in_list({2, 2, 7}));
  EXPECT_TRUE(triplet_in_list({3, 2, 5}));
  EXPECT_TRUE(triplet_in_list({4, 3, 2}));
  EXPECT_FALSE(triplet_in_list({3, 3, 3}));
  EXPECT_FALSE(triplet_in_list({2, 3, 6}));
  EXPECT_THROW(weyl_check(models::kreweras(), {2, 2, 2}), GeometryError);
}

TEST(WeylCheck, InvariantUnderPermutationAndCentralWeighting) {
  std::mt19937_64 rng(83);
  const std::vector<std::vector<int>> perms = {{0, 2, 1}, {1, 0, 2}, {2, 0, 1}};
  for (const auto& [name, m] : wgtest::golden_3d()) {
    const bool base = weyl_check(m, pair_triplet(m)).weyl;
    EXPECT_TRUE(base) << name;
    for (const auto& p : perms) {
      const auto pm = permute_coordinates(m, p);
      EXPECT_EQ(weyl_check(pm, pair_triplet(pm)).weyl, base) << name;
    }
    const auto cw = central_weighting(m, random_positive_rational(rng, 9), wgtest::random_alpha(rng, 3));
    EXPECT_EQ(weyl_check(cw, pair_triplet(cw), 1e-8).weyl, base) << name;
  }
}
