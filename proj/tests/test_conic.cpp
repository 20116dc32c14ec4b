#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <sstream>

#include "fdisac/conic/solve.hpp"
#include "fdisac/rng.hpp"

using namespace fdisac::conic;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Eigen::VectorXcd random_unit_cvec(int n, fdisac::rng::Stream& s) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = s.next_cgaussian();
  return v / v.norm();
}

}  // namespace

// min Tr(V) s.t. a^H V a >= 1 with ||a|| = 1: optimum 1 at V = a a^H.
TEST(ConicSolve, SmallestPsdWithUnitQuadraticForm) {
  fdisac::rng::Stream s(10, 0);
  const auto a = random_unit_cvec(4, s);
  ConicProblem p;
  const int v = p.add_psd_var("V", 4);
  p.objective.add_psd(v, Eigen::MatrixXcd::Identity(4, 4));
  p.add_linear(Affine{}.add_psd(v, (a * a.adjoint()).eval()), Relation::ge, 1.0);
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_NEAR(sol.objective_value, 1.0, 1e-6);
  EXPECT_LT((sol.psd_values[0] - a * a.adjoint()).cwiseAbs().maxCoeff(), 1e-5);
}

// min p s.t. p * 1 >= 4 as a degenerate hyperbolic constraint: p = 4.
TEST(ConicSolve, DegenerateHyperbolic) {
  ConicProblem p;
  const int pv = p.add_scalar_var("p");
  p.objective.add_scalar(pv, 1.0);
  Affine y;
  y.offset = 1.0;
  p.add_hyperbolic(Affine{}.add_scalar(pv, 1.0), y, 4.0);
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_NEAR(sol.objective_value, 4.0, 1e-6);
  EXPECT_NEAR(sol.scalar_values[0], 4.0, 1e-6);
}

// min x + y s.t. x y >= 4: optimum 4 at x = y = 2 (AM-GM).
TEST(ConicSolve, HyperbolicAmGm) {
  ConicProblem p;
  const int x = p.add_scalar_var("x");
  const int y = p.add_scalar_var("y");
  p.objective.add_scalar(x, 1.0).add_scalar(y, 1.0);
  p.add_hyperbolic(Affine{}.add_scalar(x, 1.0), Affine{}.add_scalar(y, 1.0), 4.0);
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_NEAR(sol.objective_value, 4.0, 1e-6);
  EXPECT_NEAR(sol.scalar_values[0], 2.0, 1e-5);
  EXPECT_NEAR(sol.scalar_values[1], 2.0, 1e-5);
}

// min Tr(V) s.t. Tr(H V) >= 1: optimum 1/lambda_max(H).
TEST(ConicSolve, ComplexPsdPairsExactly) {
  fdisac::rng::Stream s(11, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 5;
    Eigen::MatrixXcd m(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) m(r, c) = s.next_cgaussian();
    const Eigen::MatrixXcd h = (m * m.adjoint()).eval();  // Hermitian PSD
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const double lmax = es.eigenvalues().maxCoeff();
    ConicProblem p;
    const int v = p.add_psd_var("V", d);
    p.objective.add_psd(v, Eigen::MatrixXcd::Identity(d, d));
    p.add_linear(Affine{}.add_psd(v, h), Relation::ge, 1.0);
    const auto sol = solve(p);
    ASSERT_EQ(sol.status, SolveStatus::optimal);
    EXPECT_NEAR(sol.objective_value * lmax, 1.0, 1e-6);
  }
}

TEST(ConicSolve, InfeasibleDetected) {
  {
    ConicProblem p;  // x1 + x2 = -1 with x >= 0
    const int x1 = p.add_scalar_var("x1");
    const int x2 = p.add_scalar_var("x2");
    p.objective.add_scalar(x1, 1.0);
    p.add_linear(Affine{}.add_scalar(x1, 1.0).add_scalar(x2, 1.0), Relation::eq, -1.0);
    EXPECT_EQ(solve(p).status, SolveStatus::infeasible);
  }
  {
    ConicProblem p;  // Tr(V) <= -2 with V PSD
    const int v = p.add_psd_var("V", 3);
    p.objective.add_psd(v, Eigen::MatrixXcd::Identity(3, 3));
    p.add_linear(Affine{}.add_psd(v, Eigen::MatrixXcd::Identity(3, 3)), Relation::le, -2.0);
    EXPECT_EQ(solve(p).status, SolveStatus::infeasible);
  }
}

TEST(ConicSolve, BadlyScaledDataStillSolves) {
  fdisac::rng::Stream s(12, 0);
  const auto a = random_unit_cvec(4, s);
  ConicProblem p;
  const int v = p.add_psd_var("V", 4);
  const int q = p.add_scalar_var("q");
  p.objective.add_psd(v, Eigen::MatrixXcd::Identity(4, 4)).add_scalar(q, 1e6);
  // a^H V a >= 1e-9 and q * (a^H V a) >= 1e-16. With t = a^H V a the cost is
  // t + 1e-10/t, minimized at t = 1e-5 for a total of 2e-5 (AM-GM).
  p.add_linear(Affine{}.add_psd(v, (a * a.adjoint()).eval()), Relation::ge, 1e-9);
  p.add_hyperbolic(Affine{}.add_scalar(q, 1.0),
                   Affine{}.add_psd(v, (a * a.adjoint()).eval()), 1e-16);
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_NEAR(sol.objective_value, 2e-5, 2e-5 * 0.01);
}

// Random mixed-cone instances with a constructed strictly complementary
// primal-dual pair (x*, y*, s*): b = A x*, c = A' y* + s*, optimum c' x*.
TEST(ConicSolve, RandomInstancesAgainstConstructedOptimum) {
  fdisac::rng::Stream s(13, 0);
  for (int trial = 0; trial < 12; ++trial) {
    ConeLayout lay;
    lay.n_nonneg = 4;
    lay.soc_dims = {3, 4};
    lay.psd_dims = {4, 6};
    const int n = lay.vec_len();
    const int m = 6;

    VectorXd xs = VectorXd::Zero(n), ss = VectorXd::Zero(n);
    // LP block: split active/inactive.
    for (int i = 0; i < lay.n_nonneg; ++i) {
      if (i % 2 == 0)
        xs(i) = 0.5 + s.next_uniform();
      else
        ss(i) = 0.5 + s.next_uniform();
    }
    // SOC blocks: boundary-complementary pair x = (t, z), s = rho (t, -z).
    for (std::size_t bi = 0; bi < lay.soc_dims.size(); ++bi) {
      const int off = lay.soc_offset(static_cast<int>(bi));
      const int q = lay.soc_dims[bi];
      VectorXd z(q - 1);
      for (int i = 0; i < q - 1; ++i) z(i) = s.next_gaussian();
      const double t = z.norm();
      xs.segment(off, q) << t, z;
      const double rho = 0.5 + s.next_uniform();
      ss(off) = rho * t;
      ss.segment(off + 1, q - 1) = -rho * z;
    }
    // PSD blocks: complementary supports in a shared random basis.
    for (std::size_t bi = 0; bi < lay.psd_dims.size(); ++bi) {
      const int off = lay.psd_offset(static_cast<int>(bi));
      const int d = lay.psd_dims[bi];
      MatrixXd g = MatrixXd::NullaryExpr(d, d, [&] { return s.next_gaussian(); });
      Eigen::HouseholderQR<MatrixXd> qr(g);
      const MatrixXd u = qr.householderQ();
      VectorXd ex = VectorXd::Zero(d), es = VectorXd::Zero(d);
      for (int i = 0; i < d; ++i) {
        if (i < d / 2)
          ex(i) = 0.5 + s.next_uniform();
        else
          es(i) = 0.5 + s.next_uniform();
      }
      xs.segment(off, d * (d + 1) / 2) = svec(u * ex.asDiagonal() * u.transpose());
      ss.segment(off, d * (d + 1) / 2) = svec(u * es.asDiagonal() * u.transpose());
    }

    MatrixXd a = MatrixXd::NullaryExpr(m, n, [&] { return s.next_gaussian(); });
    VectorXd ys = VectorXd::NullaryExpr(m, [&] { return s.next_gaussian(); });
    const VectorXd b = a * xs;
    const VectorXd c = a.transpose() * ys + ss;
    const double opt = c.dot(xs);

    const auto res = solve_standard_form(a, b, c, lay);
    ASSERT_EQ(res.status, IpmStatus::optimal) << "trial " << trial;
    EXPECT_NEAR(res.primal_obj, opt, 1e-6 * (1.0 + std::abs(opt))) << "trial " << trial;
  }
}

TEST(ConicSolve, DeterministicAcrossRepeatedCalls) {
  fdisac::rng::Stream s(14, 0);
  const auto a = random_unit_cvec(3, s);
  ConicProblem p;
  const int v = p.add_psd_var("V", 3);
  p.objective.add_psd(v, Eigen::MatrixXcd::Identity(3, 3));
  p.add_linear(Affine{}.add_psd(v, (a * a.adjoint()).eval()), Relation::ge, 2.0);
  const auto s1 = solve(p);
  const auto s2 = solve(p);
  EXPECT_EQ(s1.objective_value, s2.objective_value);
  EXPECT_EQ(s1.iterations, s2.iterations);
}

TEST(ConicSolve, DumpEmitsTriplets) {
  ConicProblem p;
  const int x = p.add_scalar_var("x");
  const int v = p.add_psd_var("V", 2);
  p.objective.add_scalar(x, 1.0).add_psd(v, Eigen::MatrixXcd::Identity(2, 2));
  p.add_linear(Affine{}.add_scalar(x, 2.0), Relation::ge, 1.0);
  p.add_hyperbolic(Affine{}.add_scalar(x, 1.0), Affine{}.add_scalar(x, 1.0), 1.0);
  std::ostringstream os;
  dump_problem(p, os);
  const std::string text = os.str();
  EXPECT_NE(text.find("x 1 obj"), std::string::npos);
  EXPECT_NE(text.find("V[0,0]re 1 obj"), std::string::npos);
  EXPECT_NE(text.find("lin0"), std::string::npos);
  EXPECT_NE(text.find("hyp0x"), std::string::npos);
}
