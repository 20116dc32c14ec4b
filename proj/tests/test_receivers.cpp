#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "fdisac/receivers.hpp"

using namespace fdisac;

namespace {

Eigen::VectorXcd random_cvec(int n, rng::Stream& s) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = s.next_cgaussian();
  return v;
}

TransmitDesign random_design(const ChannelSet& ch, rng::Stream& s) {
  TransmitDesign d;
  d.v_dl.resize(ch.n_dl());
  for (auto& v : d.v_dl) v = 0.3 * random_cvec(ch.n_tx(), s);
  const Eigen::MatrixXcd f = 0.2 * Eigen::MatrixXcd::NullaryExpr(
                                       ch.n_tx(), ch.n_tx(),
                                       [&] { return s.next_cgaussian(); });
  d.v0 = f * f.adjoint();
  d.p_ul.resize(ch.n_ul());
  for (auto& p : d.p_ul) p = 0.2 + s.next_uniform();
  return d;
}

TransmitDesign zero_design(const ChannelSet& ch) {
  TransmitDesign d;
  d.v_dl.assign(ch.n_dl(), Eigen::VectorXcd::Zero(ch.n_tx()));
  d.v0 = Eigen::MatrixXcd::Zero(ch.n_tx(), ch.n_tx());
  d.p_ul.assign(ch.n_ul(), 0.0);
  return d;
}

}  // namespace

TEST(Whitening, NoiseOnlyIsScaledIdentity) {
  const auto ch = realize_channels(SystemConfig{}, 1);
  const auto wm = build_whitening(zero_design(ch), ch);
  const Eigen::MatrixXcd want =
      ch.noise_bs * Eigen::MatrixXcd::Identity(ch.n_rx(), ch.n_rx());
  EXPECT_LT((wm.psi - want).cwiseAbs().maxCoeff(), 1e-15);
  for (const auto& phi : wm.phi)
    EXPECT_LT((phi - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Whitening, OwnPowerExcludedFromOwnPhi) {
  SystemConfig cfg;
  cfg.n_ul_users = 1;
  cfg.ul_sinr_db = {5.0};
  const auto ch = realize_channels(cfg, 2);
  auto d = zero_design(ch);
  d.p_ul = {3.0};
  const auto wm = build_whitening(d, ch);
  const Eigen::MatrixXcd want =
      ch.noise_bs * Eigen::MatrixXcd::Identity(ch.n_rx(), ch.n_rx());
  EXPECT_LT((wm.phi[0] - want).cwiseAbs().maxCoeff(), 1e-15);
  // Psi does include it.
  EXPECT_GT((wm.psi - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Whitening, MatchesTermByTermResummation) {
  rng::Stream s(3, 0);
  const auto ch = realize_channels(SystemConfig{}, 3);
  const auto d = random_design(ch, s);
  const auto wm = build_whitening(d, ch);

  const auto q = covariance_q(d);
  const auto [b, c] = interference_matrices(ch);
  Eigen::MatrixXcd psi =
      ch.noise_bs * Eigen::MatrixXcd::Identity(ch.n_rx(), ch.n_rx());
  for (int k = 0; k < ch.n_ul(); ++k)
    psi += d.p_ul[k] * ch.h_ul[k] * ch.h_ul[k].adjoint();
  psi += b * q * b.adjoint();
  EXPECT_LT((wm.psi - psi).cwiseAbs().maxCoeff(), 1e-15);

  for (int k = 0; k < ch.n_ul(); ++k) {
    Eigen::MatrixXcd phi =
        ch.noise_bs * Eigen::MatrixXcd::Identity(ch.n_rx(), ch.n_rx());
    for (int j = 0; j < ch.n_ul(); ++j)
      if (j != k) phi += d.p_ul[j] * ch.h_ul[j] * ch.h_ul[j].adjoint();
    phi += c * q * c.adjoint();
    EXPECT_LT((wm.phi[k] - phi).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(OptimalReceivers, MatchedFiltersAtZeroDesign) {
  const auto ch = realize_channels(SystemConfig{}, 4);
  const auto rx = optimal_receivers(zero_design(ch), ch);
  // u* proportional to a_r0, w_k* proportional to h_k.
  const auto cos2 = [](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm());
  };
  EXPECT_NEAR(cos2(rx.u, ch.a_r0), 1.0, 1e-12);
  for (int k = 0; k < ch.n_ul(); ++k)
    EXPECT_NEAR(cos2(rx.w_ul[k], ch.h_ul[k]), 1.0, 1e-12);
}

TEST(OptimalReceivers, BeatsRandomChallengersAndEqualsGeneralizedEigenvalue) {
  rng::Stream s(5, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ch = realize_channels(SystemConfig{}, 100 + trial);
    const auto d = random_design(ch, s);
    const auto rx = optimal_receivers(d, ch);
    const double star = radar_sinr(d, rx.u, ch);
    for (int i = 0; i < 1000; ++i) {
      const auto u = random_cvec(ch.n_rx(), s);
      EXPECT_GE(star * (1.0 + 1e-10), radar_sinr(d, u, ch));
    }
    //

    // Principal generalized eigenvalue of (|b0|^2 A0 Q A0^H, Psi).
    const auto q = covariance_q(d);
    const auto a0 = target_matrix(ch);
    const Eigen::MatrixXcd num =
        std::norm(ch.target_amp) * a0 * q * a0.adjoint();
    const auto wm = build_whitening(d, ch);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> ges(num, wm.psi);
    const double lmax = ges.eigenvalues().maxCoeff();
    EXPECT_NEAR(star / lmax, 1.0, 1e-8);
  }
}

TEST(OptimalReceivers, UplinkCombinerAttainsReducedForm) {
  rng::Stream s(6, 0);
  const auto ch = realize_channels(SystemConfig{}, 6);
  const auto d = random_design(ch, s);
  const auto rx = optimal_receivers(d, ch);
  const auto full = uplink_sinr(d, rx.w_ul, ch);
  const auto wm = build_whitening(d, ch);
  for (int k = 0; k < ch.n_ul(); ++k) {
    const Eigen::VectorXcd z =
        Eigen::LLT<Eigen::MatrixXcd>(wm.phi[k]).solve(ch.h_ul[k]);
    const double want = d.p_ul[k] * std::real(ch.h_ul[k].dot(z));
    EXPECT_NEAR(full[k] / want, 1.0, 1e-10);
  }
}

TEST(ReducedSinrs, TrivialCases) {
  SystemConfig cfg;
  cfg.n_ul_users = 0;
  cfg.ul_sinr_db.clear();
  auto ch = realize_channels(cfg, 7);
  ch.h_si.setZero();
  ch.interferer_amps.assign(ch.interferer_amps.size(), 0.0);
  auto d = zero_design(ch);
  EXPECT_EQ(reduced_radar_sinr(d, ch), 0.0);
  d.v0 = Eigen::MatrixXcd::Identity(ch.n_tx(), ch.n_tx());
  const double want = std::norm(ch.target_amp) * ch.n_tx() * ch.n_rx() / ch.noise_bs;
  EXPECT_NEAR(reduced_radar_sinr(d, ch) / want, 1.0, 1e-12);
}

TEST(ReducedSinrs, SingleUserMatchedFilterValue) {
  SystemConfig cfg;
  cfg.n_ul_users = 1;
  cfg.ul_sinr_db = {5.0};
  const auto ch = realize_channels(cfg, 8);
  auto d = zero_design(ch);
  d.p_ul = {1.7};
  const auto got = reduced_uplink_sinr(d, ch);
  // Qbar = 0 so the whitening is sigma^2 I plus the (empty) other-user sum.
  const double want = 1.7 * ch.h_ul[0].squaredNorm() / ch.noise_bs;
  EXPECT_NEAR(got[0] / want, 1.0, 1e-12);
  auto d0 = zero_design(ch);
  EXPECT_EQ(reduced_uplink_sinr(d0, ch)[0], 0.0);
}

// Reduced expressions equal the full SINRs evaluated at the closed-form
// combiners, across random scenarios.
TEST(ReducedSinrs, AgreeWithFullFormsAtOptimalCombiners) {
  rng::Stream s(9, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ch = realize_channels(SystemConfig{}, 200 + trial);
    const auto d = random_design(ch, s);
    const auto rx = optimal_receivers(d, ch);
    const double r1 = reduced_radar_sinr(d, ch);
    const double r2 = radar_sinr(d, rx.u, ch);
    EXPECT_NEAR(r1 / r2, 1.0, 1e-9);
    const auto u1 = reduced_uplink_sinr(d, ch);
    const auto u2 = uplink_sinr(d, rx.w_ul, ch);
    for (int k = 0; k < ch.n_ul(); ++k) EXPECT_NEAR(u1[k] / u2[k], 1.0, 1e-9);
  }
}
