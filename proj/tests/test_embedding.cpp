#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "fdisac/conic/embedding.hpp"
#include "fdisac/rng.hpp"

using namespace fdisac::conic;

namespace {

Eigen::MatrixXcd random_hermitian(int d, fdisac::rng::Stream& s) {
  Eigen::MatrixXcd m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = s.next_cgaussian();
  return 0.5 * (m + m.adjoint()).eval();
}

}  // namespace

TEST(Embedding, RoundTripIdentity) {
  fdisac::rng::Stream s(1, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto h = random_hermitian(6, s);
    const auto back = extract_hermitian(embed_hermitian(h));
    EXPECT_LT((back - h).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Embedding, TraceHalving) {
  fdisac::rng::Stream s(2, 0);
  const auto h = random_hermitian(5, s);
  EXPECT_NEAR(h.real().trace(), 0.5 * embed_hermitian(h).trace(), 1e-12);
}

TEST(Embedding, PsdIffEmbeddedPsd) {
  fdisac::rng::Stream s(3, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto h = random_hermitian(4, s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ec(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(embed_hermitian(h));
    const bool psd_c = ec.eigenvalues().minCoeff() >= -1e-12;
    const bool psd_r = er.eigenvalues().minCoeff() >= -1e-12;
    EXPECT_EQ(psd_c, psd_r);
    // Embedded spectrum is the complex spectrum doubled.
    for (int i = 0; i < 4; ++i)
      EXPECT_NEAR(er.eigenvalues()(2 * i), ec.eigenvalues()(i), 1e-10);
  }
}

TEST(Embedding, PairingMatchesComplexTrace) {
  fdisac::rng::Stream s(4, 0);
  const auto h = random_hermitian(5, s);
  const auto v = random_hermitian(5, s);
  const double complex_side = std::real((h * v).trace());
  const double real_side = 0.5 * (embed_hermitian(h) * embed_hermitian(v)).trace();
  EXPECT_NEAR(complex_side, real_side, 1e-10 * std::max(1.0, std::abs(complex_side)));
}

TEST(Svec, InnerProductPreserved) {
  fdisac::rng::Stream s(5, 0);
  Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(7, 7, [&] { return s.next_gaussian(); });
  Eigen::MatrixXd b = Eigen::MatrixXd::NullaryExpr(7, 7, [&] { return s.next_gaussian(); });
  a = (0.5 * (a + a.transpose())).eval();
  b = (0.5 * (b + b.transpose())).eval();
  EXPECT_NEAR(svec(a).dot(svec(b)), (a * b).trace(), 1e-10);
  EXPECT_LT((smat(svec(a), 7) - a).cwiseAbs().maxCoeff(), 1e-14);
}
