#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdisac/rng.hpp"
#include "fdisac/units.hpp"

// Physical scenario: configuration, random channel realization, steering
// vectors and residual self-interference. Everything here is an immutable
// value consumed by the metric and optimizer layers.

namespace fdisac {

struct SystemConfig {
  int n_tx = 8;  // transmit antennas at the BS
  int n_rx = 8;  // receive antennas at the BS
  int n_ul_users = 3;
  int n_dl_users = 3;

  double target_angle_deg = 0.0;
  std::vector<double> interferer_angles_deg{-60.0, 45.0};
  double target_gain_dbm = -100.0;               // |beta_0|^2
  std::vector<double> interferer_gains_dbm{-90.0, -90.0};

  double pathloss_db = -99.0;        // user channel path loss
  double si_attenuation_db = -110.0; // residual SI power attenuation
  double noise_bs_dbm = -100.0;
  std::vector<double> noise_dl_dbm{-100.0, -100.0, -100.0};  // per DL user

  double radar_sinr_db = 6.0;
  std::vector<double> ul_sinr_db{5.0, 5.0, 5.0};  // per UL user
  std::vector<double> dl_sinr_db{8.0, 8.0, 8.0};  // per DL user

  std::uint64_t rng_seed = 1;

  // Throws std::invalid_argument on any violated invariant.
  void validate() const {
    auto require = [](bool ok, const std::string& what) {
      if (!ok) throw std::invalid_argument("SystemConfig: " + what);
    };
    require(n_tx >= 1 && n_rx >= 1, "antenna counts must be >= 1");
    require(n_ul_users >= 0 && n_dl_users >= 0, "user counts must be >= 0");
    require(std::abs(target_angle_deg) <= 90.0, "target angle outside [-90, 90]");
    for (std::size_t i = 0; i < interferer_angles_deg.size(); ++i) {
      require(std::abs(interferer_angles_deg[i]) <= 90.0,
              "interferer angle outside [-90, 90]");
      require(interferer_angles_deg[i] != target_angle_deg,
              "interferer angle coincides with target angle");
      for (std::size_t j = i + 1; j < interferer_angles_deg.size(); ++j)
        require(interferer_angles_deg[i] != interferer_angles_deg[j],
                "interferer angles must be pairwise distinct");
    }
    require(interferer_gains_dbm.size() == interferer_angles_deg.size(),
            "one gain per interferer angle required");
    require(noise_dl_dbm.size() == static_cast<std::size_t>(n_dl_users),
            "noise_dl_dbm must have one entry per DL user");
    require(ul_sinr_db.size() == static_cast<std::size_t>(n_ul_users),
            "ul_sinr_db must have one entry per UL user");
    require(dl_sinr_db.size() == static_cast<std::size_t>(n_dl_users),
            "dl_sinr_db must have one entry per DL user");
    auto finite = [&](double v, const char* name) {
      require(std::isfinite(v), std::string(name) + " must be finite");
    };
    finite(target_gain_dbm, "target_gain_dbm");
    finite(pathloss_db, "pathloss_db");
    finite(si_attenuation_db, "si_attenuation_db");
    finite(noise_bs_dbm, "noise_bs_dbm");
    finite(radar_sinr_db, "radar_sinr_db");
    for (double v : interferer_gains_dbm) finite(v, "interferer_gains_dbm");
    for (double v : noise_dl_dbm) finite(v, "noise_dl_dbm");
    for (double v : ul_sinr_db) finite(v, "ul_sinr_db");
    for (double v : dl_sinr_db) finite(v, "dl_sinr_db");
  }
};

struct ChannelSet {
  std::vector<Eigen::VectorXcd> h_ul;  // K uplink channels, length N_r
  std::vector<Eigen::VectorXcd> g_dl;  // L downlink channels, length N_t
  Eigen::VectorXcd a_t0, a_r0;         // steering towards the target
  std::complex<double> target_amp;     // beta_0
  std::vector<Eigen::MatrixXcd> interferer_matrices;      // A_i = a_ri a_ti^H
  std::vector<std::complex<double>> interferer_amps;       // beta_i
  Eigen::MatrixXcd h_si;               // residual SI channel, N_r x N_t
  double noise_bs = 0.0;               // sigma_r^2, mW
  std::vector<double> noise_dl;        // sigma_l^2 per DL user, mW

  int n_tx() const { return static_cast<int>(a_t0.size()); }
  int n_rx() const { return static_cast<int>(a_r0.size()); }
  int n_ul() const { return static_cast<int>(h_ul.size()); }
  int n_dl() const { return static_cast<int>(g_dl.size()); }
};

// Half-wavelength ULA steering vector: entry m is exp(j*pi*m*sin(angle)).
inline Eigen::VectorXcd make_steering(double angle_deg, int n) {
  Eigen::VectorXcd a(n);
  const double s = std::sin(angle_deg * M_PI / 180.0);
  for (int m = 0; m < n; ++m) {
    const double phase = M_PI * m * s;
    a(m) = std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return a;
}

namespace detail {

// Stream ids for realize_channels; one per channel object so draws never
// alias across objects.
enum StreamId : std::uint64_t {
  kStreamUplink = 0,
  kStreamDownlink = 1,
  kStreamSi = 2,
  kStreamAmplitudes = 3,
};

}  // namespace detail

// Pure function of (cfg, seed): Rayleigh user channels, unit-modulus
// random-phase residual SI, and target/interferer amplitudes with configured
// magnitudes and uniformly random phases.
inline ChannelSet realize_channels(const SystemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ChannelSet ch;

  const double chan_std = std::sqrt(db_to_linear(cfg.pathloss_db));
  rng::Stream ul(seed, detail::kStreamUplink);
  ch.h_ul.resize(cfg.n_ul_users);
  for (auto& h : ch.h_ul) {
    h.resize(cfg.n_rx);
    for (int i = 0; i < cfg.n_rx; ++i) h(i) = chan_std * ul.next_cgaussian();
  }
  rng::Stream dl(seed, detail::kStreamDownlink);
  ch.g_dl.resize(cfg.n_dl_users);
  for (auto& g : ch.g_dl) {
    g.resize(cfg.n_tx);
    for (int i = 0; i < cfg.n_tx; ++i) g(i) = chan_std * dl.next_cgaussian();
  }

  ch.a_t0 = make_steering(cfg.target_angle_deg, cfg.n_tx);
  ch.a_r0 = make_steering(cfg.target_angle_deg, cfg.n_rx);

  rng::Stream si(seed, detail::kStreamSi);
  const double si_amp = db_to_amplitude(cfg.si_attenuation_db);
  ch.h_si.resize(cfg.n_rx, cfg.n_tx);
  for (int r = 0; r < cfg.n_rx; ++r)
    for (int c = 0; c < cfg.n_tx; ++c) {
      const double t = si.next_phase();
      ch.h_si(r, c) = si_amp * std::complex<double>(std::cos(t), std::sin(t));
    }

  rng::Stream amps(seed, detail::kStreamAmplitudes);
  auto draw_amp = [&](double gain_dbm) {
    const double mag = db_to_amplitude(gain_dbm);
    const double t = amps.next_phase();
    return mag * std::complex<double>(std::cos(t), std::sin(t));
  };
  ch.target_amp = draw_amp(cfg.target_gain_dbm);
  const int n_int = static_cast<int>(cfg.interferer_angles_deg.size());
  ch.interferer_matrices.resize(n_int);
  ch.interferer_amps.resize(n_int);
  for (int i = 0; i < n_int; ++i) {
    const auto a_r = make_steering(cfg.interferer_angles_deg[i], cfg.n_rx);
    const auto a_t = make_steering(cfg.interferer_angles_deg[i], cfg.n_tx);
    ch.interferer_matrices[i] = a_r * a_t.adjoint();
    ch.interferer_amps[i] = draw_amp(cfg.interferer_gains_dbm[i]);
  }

  ch.noise_bs = dbm_to_mw(cfg.noise_bs_dbm);
  ch.noise_dl.resize(cfg.n_dl_users);
  for (int l = 0; l < cfg.n_dl_users; ++l) ch.noise_dl[l] = dbm_to_mw(cfg.noise_dl_dbm[l]);
  return ch;
}

// Two-way radar channel towards the target, rank one by construction.
inline Eigen::MatrixXcd target_matrix(const ChannelSet& ch) {
  return ch.a_r0 * ch.a_t0.adjoint();
}

}  // namespace fdisac
