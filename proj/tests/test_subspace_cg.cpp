#include "iicg/probgen.hpp"
#include "iicg/subgradient.hpp"
#include "iicg/subspace_cg.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace iicg;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double t : v) out[i++] = t;
  return out;
}

CountingOperator dense(const Matrix& a) { return CountingOperator(DenseOperator{a}); }

Matrix random_spd(Rng& rng, Index n, double shift) {
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = rng.normal();
  return m.transpose() * m / static_cast<double>(n) + shift * Matrix::Identity(n, n);
}

}  // namespace

TEST(InitCycle, EmptySupport) {
  const auto s = init_cg_cycle(Vector::Zero(3), vec({1, -2, 3}), 0.5);
  EXPECT_EQ(s.rho, Vector::Zero(3));
  EXPECT_EQ(s.d, Vector::Zero(3));
}

TEST(InitCycle, Examples) {
  auto s = init_cg_cycle(vec({1, 0}), vec({2, 9}), 0.5);
  EXPECT_EQ(s.r, vec({2.5, 9}));
  EXPECT_EQ(s.rho, vec({2.5, 0}));
  EXPECT_EQ(s.d, vec({-2.5, 0}));
  s = init_cg_cycle(vec({-1, 1}), vec({0, 0}), 1);
  EXPECT_EQ(s.r, vec({-1, 1}));
  EXPECT_EQ(s.rho, s.r);
  EXPECT_EQ(s.d, vec({1, -1}));
}

TEST(CGStep, IdentityConvergesInOneStep) {
  auto op = dense(Matrix::Identity(3, 3));
  const Vector x = vec({1, -2, 0.5});
  const Vector b = vec({0.3, 0.1, -4});
  const double tau = 0.2;
  const auto s = init_cg_cycle(x, x - b, tau);
  const auto res = cg_step(s, op, 1e-14);
  ASSERT_EQ(res.outcome, CGStepOutcome::Ok);
  EXPECT_DOUBLE_EQ(res.step, 1.0);
  EXPECT_LE((res.next.x - (x - s.rho)).norm(), 1e-15);
  EXPECT_LE(res.next.rho.norm(), 1e-14);
  EXPECT_EQ(op.mv_count(), 1);
}

TEST(CGStep, ScalarCrossesToZero) {
  Matrix a(1, 1);
  a << 2;
  auto op = dense(a);
  const auto s = init_cg_cycle(vec({1}), vec({2}), 0);
  EXPECT_EQ(s.d, vec({-2}));
  const auto res = cg_step(s, op, 1e-14);
  EXPECT_DOUBLE_EQ(res.step, 0.5);
  EXPECT_EQ(res.next.x, vec({0}));
  EXPECT_TRUE(res.crossed);
}

TEST(CGStep, StationaryStartHasZeroResidual) {
  Matrix a = Matrix::Zero(2, 2);
  a.diagonal() << 2, 4;
  const Vector x = vec({1, 1});
  const Vector g = a * x - vec({2, 4});
  const auto s = init_cg_cycle(x, g, 0);
  EXPECT_EQ(s.r, Vector::Zero(2));
  EXPECT_EQ(s.rho.norm(), 0.0);
}

TEST(CGStep, ZeroCurvatureBreaks) {
  auto op = dense(Matrix::Zero(2, 2));
  const auto s = init_cg_cycle(vec({1, 1}), vec({1, 1}), 0);
  EXPECT_EQ(cg_step(s, op, 0.0).outcome, CGStepOutcome::CurvatureBreak);
  EXPECT_EQ(op.mv_count(), 1);
}

TEST(Cutback, Example) {
  double alpha_b = -1;
  const Vector out = cutback(vec({1, 2}), vec({1, 1}), vec({-2, 1}), &alpha_b);
  EXPECT_EQ(alpha_b, 0.5);
  EXPECT_EQ(out, vec({0, 2.5}));
}

TEST(Cutback, OffOrthantReturnsInput) {
  const Vector x_k = vec({-1, 2});
  EXPECT_EQ(cutback(x_k, vec({1, 1}), vec({-2, 1})), x_k);
}

TEST(Cutback, ZeroDirection) {
  const Vector x_k = vec({1, 2});
  EXPECT_EQ(cutback(x_k, vec({1, 1}), Vector::Zero(2)), x_k);
}

TEST(Cutback, ResultStaysInClosedOrthant) {
  Rng rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    Vector x_cg(6), x_k(6), d(6);
    for (Index i = 0; i < 6; ++i) {
      x_cg[i] = rng.uniform() < 0.3 ? 0.0 : rng.normal();
      x_k[i] = x_cg[i] == 0.0 ? 0.0 : std::abs(rng.normal()) * sgn(x_cg[i]);
      d[i] = x_cg[i] == 0.0 ? 0.0 : 3 * rng.normal();
    }
    bool can_cross = false;
    for (Index i = 0; i < 6; ++i) can_cross |= x_k[i] * d[i] < 0.0;
    if (!can_cross) continue;
    double alpha_b = 0;
    const Vector out = cutback(x_k, x_cg, d, &alpha_b);
    EXPECT_GT(alpha_b, 0.0);
    for (Index i = 0; i < 6; ++i) {
      EXPECT_TRUE(out[i] == 0.0 || sgn(out[i]) == sgn(x_cg[i]));
    }
    EXPECT_LT(count_nonzeros(out), count_nonzeros(x_cg));
    EXPECT_TRUE(same_sign_pattern(x_k + (alpha_b * 0.999) * d, x_cg));
    EXPECT_FALSE(same_sign_pattern(x_k + (alpha_b * 1.001) * d, x_cg));
  }
}

TEST(OrthantModel, Examples) {
  EXPECT_EQ(orthant_model_value(Vector::Zero(2), vec({1, 1}), Vector::Zero(2), vec({1, 2}), 1), 0.0);
  EXPECT_DOUBLE_EQ(orthant_model_value(vec({-1}), vec({1}), vec({0}), vec({0}), 1), -1.0);
}

TEST(OrthantModel, EqualsObjectiveInsideOrthant) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix a = random_spd(rng, 5, 0.1);
    QuadraticProblem p(dense(a), Vector::Random(5), rng.uniform());
    Vector x_cg(5), x(5);
    for (Index i = 0; i < 5; ++i) {
      x_cg[i] = rng.uniform() < 0.3 ? 0.0 : rng.normal();
      x[i] = x_cg[i] == 0.0 ? 0.0 : std::abs(rng.normal()) * sgn(x_cg[i]);
    }
    const Vector ax = a * x;
    const double f = eval_objective(p, x, ax);
    EXPECT_NEAR(orthant_model_value(x, x_cg, ax, p.b, p.tau), f, 1e-12 * std::max(1.0, std::abs(f)));
  }
}

TEST(SufficientDecrease, Examples) {
  const Vector v = vec({2, 0});
  EXPECT_TRUE(sufficient_decrease(5, 5, v, 0));
  EXPECT_FALSE(sufficient_decrease(5.1, 5, v, 0));
  EXPECT_TRUE(sufficient_decrease(9.9996, 10, v, 1e-4));
  EXPECT_FALSE(sufficient_decrease(7, 10, v, 1));
}

TEST(CGCycle, ConjugacyDescentAndResidualRecurrence) {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 5 + static_cast<Index>(rng.uniform() * 25);
    const Matrix a = random_spd(rng, n, 1.0);
    auto op = dense(a);
    const Vector b = 5 * Vector::Random(n);
    const double tau = 0.1;
    Vector x(n);
    for (Index i = 0; i < n; ++i) x[i] = rng.uniform() < 0.3 ? 0.0 : (rng.uniform() < 0.5 ? -1.0 : 1.0);
    CGState s = init_cg_cycle(x, a * x - b, tau);
    // directions from before roundoff dominates: ||rho|| > 1e-6 ||rho_0||
    std::vector<Vector> dirs;
    const double rho0 = s.rho.norm();
    double q_prev = orthant_model_value(s.x, s.x_cg, a * s.x, b, tau);
    const Index support = count_nonzeros(x);
    int steps = 0;
    while (s.rho.norm() > 1e-10 && steps < support + 2) {
      const bool significant = s.rho.norm() > 1e-6 * rho0;
      if (significant) dirs.push_back(s.d);
      auto res = cg_step(s, op, 1e-14);
      ASSERT_EQ(res.outcome, CGStepOutcome::Ok);
      s = res.next;
      ++steps;
      const Vector ax = a * s.x;
      const double q = orthant_model_value(s.x, s.x_cg, ax, b, tau);
      if (significant) {
        EXPECT_LT(q, q_prev);
      } else {
        EXPECT_LE(q, q_prev + 1e-14 * std::abs(q_prev));
      }
      q_prev = q;
      const Vector r_true = ax - b + tau * sgn(s.x_cg);
      EXPECT_LE((r_true - s.r).norm(), 1e-8 * a.norm() * std::max(1.0, s.x.norm()));
      // F from the CG state without an extra product
      QuadraticProblem p(op, b, tau);
      const Vector ax_state = s.r + b - tau * sgn(s.x_cg);
      EXPECT_NEAR(eval_objective(p, s.x, ax_state), eval_objective(p, s.x, ax),
                  1e-8 * std::max(1.0, std::abs(q)));
    }
    EXPECT_LE(s.rho.norm(), 1e-10);
    EXPECT_LE(steps, support + 2);
    for (std::size_t j = 0; j < dirs.size(); ++j)
      for (std::size_t k = j + 1; k < dirs.size(); ++k) {
        const double scale = std::sqrt(dirs[j].dot(a * dirs[j]) * dirs[k].dot(a * dirs[k]));
        EXPECT_LE(std::abs(dirs[j].dot(a * dirs[k])), 1e-8 * scale);
      }
  }
}
