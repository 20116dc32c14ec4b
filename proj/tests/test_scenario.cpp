#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <complex>

#include "fdisac/scenario.hpp"

using namespace fdisac;

TEST(Steering, BroadsideAllOnes) {
  const auto a = make_steering(0.0, 4);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(a(i).real(), 1.0, 1e-15);
    EXPECT_NEAR(a(i).imag(), 0.0, 1e-15);
  }
}

TEST(Steering, EndfireAlternates) {
  const auto a = make_steering(90.0, 2);
  EXPECT_NEAR(a(0).real(), 1.0, 1e-15);
  EXPECT_NEAR(a(1).real(), -1.0, 1e-12);
  EXPECT_NEAR(a(1).imag(), 0.0, 1e-12);
}

TEST(Steering, ThirtyDegreesEightElements) {
  // sin 30 deg = 1/2, so entry m is exp(j pi m / 2).
  const auto a = make_steering(30.0, 8);
  EXPECT_NEAR(std::abs(a.dot(a)), 8.0, 1e-12);
  for (int m = 0; m < 8; ++m) {
    const std::complex<double> want =
        std::exp(std::complex<double>(0.0, M_PI * m * 0.5));
    EXPECT_NEAR(std::abs(a(m) - want), 0.0, 1e-12) << "entry " << m;
  }
}

TEST(Steering, UnitModulusAndNormForRandomAngles) {
  rng::Stream s(1, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const double angle = -90.0 + 180.0 * s.next_uniform();
    const int n = 1 + static_cast<int>(s.next_uniform() * 16);
    const auto a = make_steering(angle, n);
    EXPECT_NEAR(std::abs(a.dot(a)), static_cast<double>(n), 1e-10);
    for (int m = 0; m < n; ++m) EXPECT_NEAR(std::abs(a(m)), 1.0, 1e-12);
  }
}

namespace {
SystemConfig paper_config() { return SystemConfig{}; }
}  // namespace

TEST(Channels, DeterministicForFixedSeed) {
  const auto cfg = paper_config();
  const auto c1 = realize_channels(cfg, 42);
  const auto c2 = realize_channels(cfg, 42);
  for (int k = 0; k < cfg.n_ul_users; ++k)
    EXPECT_TRUE((c1.h_ul[k].array() == c2.h_ul[k].array()).all());
  for (int l = 0; l < cfg.n_dl_users; ++l)
    EXPECT_TRUE((c1.g_dl[l].array() == c2.g_dl[l].array()).all());
  EXPECT_TRUE((c1.h_si.array() == c2.h_si.array()).all());
  EXPECT_EQ(c1.target_amp, c2.target_amp);
  const auto c3 = realize_channels(cfg, 43);
  EXPECT_FALSE((c1.h_si.array() == c3.h_si.array()).all());
}

TEST(Channels, SiEntriesHaveExactMagnitude) {
  const auto ch = realize_channels(paper_config(), 7);
  const double want = std::pow(10.0, -110.0 / 20.0);  // alpha_SI = -110 dB
  for (int r = 0; r < ch.h_si.rows(); ++r)
    for (int c = 0; c < ch.h_si.cols(); ++c)
      EXPECT_NEAR(std::abs(ch.h_si(r, c)), want, 1e-12 * want);
}

TEST(Channels, AmplitudeMagnitudesMatchConfiguredGains) {
  const auto cfg = paper_config();
  const auto ch = realize_channels(cfg, 19);
  EXPECT_NEAR(std::norm(ch.target_amp), db_to_linear(cfg.target_gain_dbm),
              1e-12 * db_to_linear(cfg.target_gain_dbm));
  for (std::size_t i = 0; i < ch.interferer_amps.size(); ++i) {
    const double want = db_to_linear(cfg.interferer_gains_dbm[i]);
    EXPECT_NEAR(std::norm(ch.interferer_amps[i]), want, 1e-12 * want);
  }
}

TEST(Channels, TargetMatrixIsRankOne) {
  const auto ch = realize_channels(paper_config(), 3);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(target_matrix(ch));
  const auto sv = svd.singularValues();
  EXPECT_LT(sv(1), 1e-10 * sv(0));
  EXPECT_NEAR(sv(0), std::sqrt(8.0 * 8.0), 1e-9);
}

// Monte-Carlo moment check: mean |h entry|^2 over 1e6 draws within 1 percent
// of the configured pathloss.
TEST(Channels, RayleighPathlossMoment) {
  auto cfg = paper_config();
  const double want = db_to_linear(cfg.pathloss_db);
  double acc = 0.0;
  long count = 0;
  const long need = 1000000;
  std::uint64_t seed = 1000;
  while (count < need) {
    const auto ch = realize_channels(cfg, seed++);
    for (const auto& h : ch.h_ul) {
      acc += h.squaredNorm();
      count += h.size();
    }
    for (const auto& g : ch.g_dl) {
      acc += g.squaredNorm();
      count += g.size();
    }
  }
  EXPECT_NEAR(acc / count / want, 1.0, 0.01);
}

TEST(Config, ValidationRejectsBadInput) {
  SystemConfig cfg;
  cfg.n_tx = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = SystemConfig{};
  cfg.interferer_angles_deg = {0.0, 45.0};  // collides with target at 0
  cfg.interferer_gains_dbm = {-90.0, -90.0};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = SystemConfig{};
  cfg.interferer_angles_deg = {45.0, 45.0};
  cfg.interferer_gains_dbm = {-90.0, -90.0};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = SystemConfig{};
  cfg.ul_sinr_db = {5.0};  // K = 3 needs 3 entries
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
