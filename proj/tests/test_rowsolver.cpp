#include <gtest/gtest.h>

#include <random>

#include "cscs/rowsolver.hpp"
#include "oracles.hpp"

using namespace cscs;

namespace {

struct Instance {
  MatrixXd w;  // n x k
  MatrixXd a;  // w^t w
};

Instance random_instance(Index k, Index n, std::mt19937_64& gen) {
  std::normal_distribution<double> z;
  Instance inst;
  inst.w.resize(n, k);
  for (Index i = 0; i < inst.w.size(); ++i) inst.w(i) = z(gen) / std::sqrt(static_cast<double>(n));
  inst.a = inst.w.transpose() * inst.w;
  inst.a = 0.5 * (inst.a + inst.a.transpose()).eval();
  return inst;
}

VectorXd random_start(Index k, std::mt19937_64& gen) {
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.1, 3.0);
  VectorXd x(k);
  for (Index j = 0; j + 1 < k; ++j) x(j) = z(gen);
  x(k - 1) = u(gen);
  return x;
}

}  // namespace

TEST(SoftThreshold, Examples) {
  EXPECT_DOUBLE_EQ(soft_threshold(5.0, 2.0), 3.0);
  EXPECT_DOUBLE_EQ(soft_threshold(-1.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(soft_threshold(-3.0, 0.5), -2.5);
}

TEST(SoftThreshold, MagnitudeAndSignProperty) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> z;
  for (int i = 0; i < 1000; ++i) {
    const double x = 3 * z(gen);
    const double lambda = std::abs(z(gen));
    const double s = soft_threshold(x, lambda);
    EXPECT_NEAR(std::abs(s), std::max(std::abs(x) - lambda, 0.0), 1e-15);
    EXPECT_TRUE(s == 0.0 || (s > 0) == (x > 0));
  }
}

TEST(UpdateOffdiag, MatchesGoldenSectionOnCoordinate) {
  MatrixXd a(2, 2);
  a << 1, 2, 2, 5;
  const RowProblem prob(view_of(a), 1.0);
  VectorXd x(2);
  x << 0.3, 1.0;  // cross term A_21 x_2 = 2
  const double closed = update_offdiag(prob, x, 0);
  EXPECT_NEAR(closed, -1.5, 1e-15);
  const double golden = oracle::golden_section(
      [&](double t) {
        VectorXd y = x;
        y(0) = t;
        return oracle::row_value(a, 1.0, y);
      },
      -10.0, 10.0);
  EXPECT_NEAR(closed, golden, 1e-7);
}

TEST(UpdateOffdiag, ZeroCrossTermGivesZero) {
  const MatrixXd a = MatrixXd::Identity(3, 3);
  for (double lambda : {0.0, 0.3, 5.0}) {
    const RowProblem prob(view_of(a), lambda);
    VectorXd x(3);
    x << 0.7, -0.2, 1.0;
    EXPECT_EQ(update_offdiag(prob, x, 0), 0.0);
  }
}

TEST(UpdateOffdiag, UnpenalizedQuadraticVertex) {
  MatrixXd a(2, 2);
  a << 2, 1, 1, 1;
  const RowProblem prob(view_of(a), 0.0);
  VectorXd x(2);
  x << 0.0, 1.0;
  // t -> 2 t^2 + 2 t: vertex at -b / 2a = -0.5.
  EXPECT_NEAR(update_offdiag(prob, x, 0), -0.5, 1e-15);
}

TEST(UpdateDiag, Examples) {
  {
    const MatrixXd a = MatrixXd::Identity(2, 2);
    const RowProblem prob(view_of(a), 0.1);
    EXPECT_DOUBLE_EQ(update_diag(prob, VectorXd::Unit(2, 1)), 1.0);
  }
  {
    MatrixXd a(1, 1);
    a << 4;
    const RowProblem prob(view_of(a), 0.0);
    EXPECT_DOUBLE_EQ(update_diag(prob, VectorXd::Ones(1)), 0.5);
  }
  {
    MatrixXd a(2, 2);
    a << 1, 1, 1, 1;
    const RowProblem prob(view_of(a), 0.0);
    VectorXd x(2);
    x << 1.0, 2.0;  // c = A_12 x_1 = 1
    const double root = update_diag(prob, x);
    EXPECT_NEAR(root, 0.6180339887498949, 1e-15);
    EXPECT_LT(std::abs(-2.0 / root + 2.0 * root + 2.0 * 1.0), 1e-12);
  }
}

TEST(UpdateDiag, AlwaysPositiveAndStationary) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> z;
  for (int i = 0; i < 500; ++i) {
    const double c = 1e3 * z(gen);
    const double akk = std::exp(3 * z(gen));
    const double root = positive_diag_root(c, akk);
    EXPECT_GT(root, 0.0);
    EXPECT_LT(std::abs(-2.0 / root + 2.0 * akk * root + 2.0 * c), 1e-9 * (1.0 / root + akk * root + std::abs(c)));
  }
}

TEST(MinimizeRow, ScalarProblemIsClosedForm) {
  MatrixXd a(1, 1);
  a << 2.25;
  const RowProblem prob(view_of(a), 3.0);
  const RowSolution sol = minimize_row(prob);
  EXPECT_NEAR(sol.x(0), 1.0 / 1.5, 1e-15);
  EXPECT_TRUE(sol.converged);
  EXPECT_LE(sol.iterations, 2);
}

TEST(MinimizeRow, IdentityDecouples) {
  const MatrixXd a = MatrixXd::Identity(3, 3);
  const RowProblem prob(view_of(a), 0.1);
  SolverConfig cfg;
  cfg.initial = VectorXd::Constant(3, 0.5);
  const RowSolution sol = minimize_row(prob, cfg);
  EXPECT_TRUE(sol.converged);
  EXPECT_NEAR(sol.x(0), 0.0, 0.0);
  EXPECT_NEAR(sol.x(1), 0.0, 0.0);
  EXPECT_NEAR(sol.x(2), 1.0, 1e-15);
}

TEST(MinimizeRow, MatchesProximalOracleOnFullRankInstance) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 5; ++trial) {
    const Instance inst = random_instance(4, 12, gen);
    const RowProblem prob(view_of(inst.a), 0.5);
    SolverConfig cfg;
    cfg.epsilon = 1e-12;
    cfg.max_iterations = 100000;
    const RowSolution sol = minimize_row(prob, cfg);
    ASSERT_TRUE(sol.converged);
    const VectorXd ref = oracle::minimize_row_prox(inst.a, 0.5, default_start(prob));
    for (Index j = 0; j < 4; ++j) EXPECT_NEAR(sol.x(j), ref(j), 1e-4);
  }
}

TEST(MinimizeRow, DescentOnEverySweep) {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 40; ++trial) {
    const Index k = 2 + trial % 8;
    const Instance inst = random_instance(k, 1 + trial % 6, gen);
    const RowProblem prob(view_of(inst.a), 0.05 * (trial % 5), view_of(inst.w));
    SolverConfig cfg;
    cfg.initial = random_start(k, gen);
    cfg.max_iterations = 200;
    const double start = row_objective(prob, *cfg.initial);
    const RowSolution sol = minimize_row(prob, cfg);
    double previous = start;
    for (double v : sol.objective_trace) {
      EXPECT_LE(v, previous + 1e-12 * (1.0 + std::abs(previous)));
      previous = v;
    }
    EXPECT_GT(sol.x(k - 1), 0.0);
  }
}

TEST(MinimizeRow, GlobalValueAgreementAcrossStartsAndOracle) {
  std::mt19937_64 gen(29);
  for (int trial = 0; trial < 20; ++trial) {
    const Index k = 2 + trial % 4;
    const Index n = 1 + trial % 6;  // includes rank-deficient cases
    const Instance inst = random_instance(k, n, gen);
    const double lambda = 0.1 + 0.2 * (trial % 4);
    const RowProblem prob(view_of(inst.a), lambda, view_of(inst.w));
    SolverConfig cfg;
    cfg.epsilon = 1e-12;
    cfg.max_iterations = 1000000;
    std::vector<double> values;
    for (int s = 0; s < 5; ++s) {
      cfg.initial = random_start(k, gen);
      const RowSolution sol = minimize_row(prob, cfg);
      ASSERT_TRUE(sol.converged);
      values.push_back(row_objective(prob, sol.x));
    }
    for (double v : values) EXPECT_NEAR(v, values.front(), 1e-8);
    const VectorXd ref = oracle::minimize_row_prox(inst.a, lambda, random_start(k, gen));
    EXPECT_NEAR(values.front(), oracle::row_value(inst.a, lambda, ref), 1e-6);
    EXPECT_LE(values.front(), oracle::row_value(inst.a, lambda, ref) + 1e-10);
  }
}

TEST(KktCheck, ExactStationaryPoint) {
  const MatrixXd a = MatrixXd::Identity(4, 4);
  const RowProblem prob(view_of(a), 0.0);
  EXPECT_EQ(kkt_check(prob, VectorXd::Unit(4, 3)), 0.0);
}

TEST(KktCheck, SolverOutputIsCertified) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 30; ++trial) {
    const Index k = 2 + trial % 10;
    const Instance inst = random_instance(k, 2 + trial % 7, gen);
    const double lambda = 0.02 * (1 + trial % 6);
    const RowProblem prob(view_of(inst.a), lambda, view_of(inst.w));
    SolverConfig cfg;
    cfg.epsilon = 1e-10;
    cfg.max_iterations = 1000000;
    const RowSolution sol = minimize_row(prob, cfg);
    ASSERT_TRUE(sol.converged);
    EXPECT_LE(sol.kkt_residual, 1e-6 * (1.0 + lambda));
    EXPECT_DOUBLE_EQ(sol.kkt_residual, kkt_check(prob, sol.x));
  }
}

TEST(KktCheck, PerturbationBreaksCertificate) {
  std::mt19937_64 gen(37);
  const Instance inst = random_instance(5, 20, gen);
  const double lambda = 0.8;
  const RowProblem prob(view_of(inst.a), lambda);
  SolverConfig cfg;
  cfg.epsilon = 1e-12;
  cfg.max_iterations = 100000;
  RowSolution sol = minimize_row(prob, cfg);
  Index zero = -1;
  for (Index j = 0; j + 1 < 5; ++j)
    if (sol.x(j) == 0.0) zero = j;
  ASSERT_GE(zero, 0) << "instance should have an inactive coordinate at this penalty";
  const RowProblem small(view_of(inst.a), 1e-3);
  VectorXd moved = minimize_row(small, cfg).x;
  moved(zero) += 0.1;
  EXPECT_GT(kkt_check(small, moved), 1e-3);
}

TEST(LowRank, IdentityFactorHasNoCrossTerm) {
  const MatrixXd b = MatrixXd::Identity(4, 4);
  const MatrixView w = view_of(b);
  VectorXd x(4);
  x << 0.3, -1.2, 2.0, 0.7;
  const VectorXd r = b * x;
  for (Index j = 0; j < 4; ++j) EXPECT_NEAR(low_rank_cross_term(w, r, j, x(j)), 0.0, 1e-15);
}

TEST(LowRank, CrossTermMatchesDense) {
  std::mt19937_64 gen(41);
  const Instance inst = random_instance(5, 3, gen);
  const RowProblem prob(view_of(inst.a), 0.1, view_of(inst.w));
  const VectorXd x = random_start(5, gen);
  VectorXd r = inst.w * x;
  for (Index j = 0; j < 5; ++j)
    EXPECT_NEAR(low_rank_cross_term(prob.factor(), r, j, x(j)), dense_cross_term(prob, x, j), 1e-10);

  // One coordinate move, then the O(n) residual update.
  VectorXd y = x;
  y(2) += 0.37;
  r += inst.w.col(2) * 0.37;
  EXPECT_LE((r - inst.w * y).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NO_THROW(check_residual(prob.factor(), y, r));
  try {
    check_residual(prob.factor(), x, r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StaleResidual);
  }
}

TEST(LowRank, PathsProduceTheSameIterates) {
  std::mt19937_64 gen(43);
  for (int trial = 0; trial < 10; ++trial) {
    const Index k = 6 + trial;
    const Instance inst = random_instance(k, 3, gen);
    const RowProblem prob(view_of(inst.a), 0.05, view_of(inst.w));
    EXPECT_TRUE(prob.prefers_low_rank());
    const VectorXd start = random_start(k, gen);
    for (int sweeps = 1; sweeps <= 8; ++sweeps) {
      SolverConfig cfg;
      cfg.initial = start;
      cfg.max_iterations = sweeps;
      cfg.epsilon = 1e-300;
      cfg.path = RowPath::Dense;
      const RowSolution dense = minimize_row(prob, cfg);
      cfg.path = RowPath::LowRank;
      const RowSolution low = minimize_row(prob, cfg);
      EXPECT_FALSE(dense.low_rank);
      EXPECT_TRUE(low.low_rank);
      EXPECT_LE((dense.x - low.x).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(LowRank, AutomaticPathSelection) {
  std::mt19937_64 gen(47);
  const Instance wide = random_instance(6, 3, gen);
  EXPECT_TRUE(RowProblem(view_of(wide.a), 0.1, view_of(wide.w)).prefers_low_rank());
  const Instance tall = random_instance(3, 6, gen);
  EXPECT_FALSE(RowProblem(view_of(tall.a), 0.1, view_of(tall.w)).prefers_low_rank());
  EXPECT_FALSE(RowProblem(view_of(tall.a), 0.1).prefers_low_rank());
}

TEST(RowProblem, InvalidInputs) {
  MatrixXd a = MatrixXd::Identity(2, 2);
  EXPECT_THROW(RowProblem(view_of(a), -0.1), Error);
  a(1, 1) = 0.0;
  EXPECT_THROW(RowProblem(view_of(a), 0.1), Error);
  a << 1, 0.5, 0.4, 1;
  EXPECT_THROW(RowProblem(view_of(a), 0.1), Error);
  const MatrixXd ok = MatrixXd::Identity(2, 2);
  const MatrixXd wrong = MatrixXd::Ones(1, 2);
  EXPECT_THROW(RowProblem(view_of(ok), 0.1, view_of(wrong)), Error);

  const RowProblem prob(view_of(ok), 0.1);
  SolverConfig cfg;
  cfg.initial = VectorXd::Zero(2);
  EXPECT_THROW(minimize_row(prob, cfg), Error);
  cfg.initial.reset();
  cfg.epsilon = 0.0;
  EXPECT_THROW(minimize_row(prob, cfg), Error);
  cfg.epsilon = 1e-8;
  cfg.path = RowPath::LowRank;
  EXPECT_THROW(minimize_row(prob, cfg), Error);
}

TEST(MinimizeRow, IterationCapIsNotAnError) {
  std::mt19937_64 gen(53);
  const Instance inst = random_instance(8, 2, gen);
  const RowProblem prob(view_of(inst.a), 0.01, view_of(inst.w));
  SolverConfig cfg;
  cfg.max_iterations = 1;
  cfg.epsilon = 1e-14;
  const RowSolution sol = minimize_row(prob, cfg);
  EXPECT_FALSE(sol.converged);
  EXPECT_EQ(sol.iterations, 1);
  EXPECT_EQ(sol.objective_trace.size(), 1u);
}
