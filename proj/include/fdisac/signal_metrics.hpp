#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "fdisac/rng.hpp"
#include "fdisac/scenario.hpp"

// Covariance-domain SINR expressions, the beampattern gain, and a
// symbol-level Monte-Carlo estimator used as an independent oracle for all
// of them.

namespace fdisac {

// Eigenvalues more negative than -kPsdTol * trace are rejected; anything
// between that and zero is clipped when a factor is needed.
inline constexpr double kPsdTol = 1e-9;

struct TransmitDesign {
  std::vector<Eigen::VectorXcd> v_dl;  // L beamformers, length N_t
  Eigen::MatrixXcd v0;                 // radar covariance, N_t x N_t PSD
  std::vector<double> p_ul;            // K uplink powers, mW

  double total_power_mw() const {
    double p = v0.size() > 0 ? v0.real().trace() : 0.0;
    for (const auto& v : v_dl) p += v.squaredNorm();
    for (double q : p_ul) p += q;
    return p;
  }
};

struct RelaxedDesign {
  std::vector<Eigen::MatrixXcd> v_dl;  // L matrices V_l, N_t x N_t PSD
  Eigen::MatrixXcd v0;
  std::vector<double> p_ul;

  double total_power_mw() const {
    double p = v0.size() > 0 ? v0.real().trace() : 0.0;
    for (const auto& v : v_dl) p += v.real().trace();
    for (double q : p_ul) p += q;
    return p;
  }
};

struct SinrReport {
  double radar = 0.0;
  std::vector<double> uplink;
  std::vector<double> downlink;
};

// Covariance of the downlink ISAC signal: Q = sum_l v_l v_l^H + V0.
inline Eigen::MatrixXcd covariance_q(const TransmitDesign& d) {
  const int n = d.v0.size() > 0 ? static_cast<int>(d.v0.rows())
                                : static_cast<int>(d.v_dl.at(0).size());
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(n, n);
  if (d.v0.size() > 0) q = d.v0;
  for (const auto& v : d.v_dl) q.noalias() += v * v.adjoint();
  return q;
}

inline Eigen::MatrixXcd covariance_q(const RelaxedDesign& d) {
  const int n = d.v0.size() > 0 ? static_cast<int>(d.v0.rows())
                                : static_cast<int>(d.v_dl.at(0).rows());
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(n, n);
  if (d.v0.size() > 0) q = d.v0;
  for (const auto& v : d.v_dl) q += v;
  return q;
}

// B = sum_i beta_i A_i + H_SI (everything the radar combiner sees except the
// target) and C = B + beta_0 A_0 (everything the uplink combiners see).
inline std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> interference_matrices(
    const ChannelSet& ch) {
  Eigen::MatrixXcd b = ch.h_si;
  if (b.size() == 0) b = Eigen::MatrixXcd::Zero(ch.n_rx(), ch.n_tx());
  for (std::size_t i = 0; i < ch.interferer_matrices.size(); ++i)
    b += ch.interferer_amps[i] * ch.interferer_matrices[i];
  Eigen::MatrixXcd c = b + ch.target_amp * target_matrix(ch);
  return {b, c};
}

inline double radar_sinr(const TransmitDesign& d, const Eigen::VectorXcd& u,
                         const ChannelSet& ch) {
  if (u.norm() == 0.0) throw std::domain_error("radar_sinr: zero combiner");
  const Eigen::MatrixXcd q = covariance_q(d);
  const auto [b, c] = interference_matrices(ch);
  const Eigen::MatrixXcd a0 = target_matrix(ch);
  const double gain = std::norm(ch.target_amp);
  const Eigen::VectorXcd a0hu = a0.adjoint() * u;
  const double num = gain * std::real(a0hu.dot(q * a0hu));
  Eigen::MatrixXcd denom_m = ch.noise_bs * Eigen::MatrixXcd::Identity(ch.n_rx(), ch.n_rx());
  for (int k = 0; k < ch.n_ul(); ++k)
    denom_m.noalias() += d.p_ul[k] * ch.h_ul[k] * ch.h_ul[k].adjoint();
  denom_m.noalias() += b * q * b.adjoint();
  const double den = std::real(u.dot(denom_m * u));
  return num / den;
}

inline std::vector<double> uplink_sinr(const TransmitDesign& d,
                                       const std::vector<Eigen::VectorXcd>& w,
                                       const ChannelSet& ch) {
  const Eigen::MatrixXcd q = covariance_q(d);
  const auto [b, c] = interference_matrices(ch);
  const Eigen::MatrixXcd cqc = c * q * c.adjoint();
  std::vector<double> out(ch.n_ul());
  for (int k = 0; k < ch.n_ul(); ++k) {
    if (w.at(k).norm() == 0.0) throw std::domain_error("uplink_sinr: zero combiner");
    const double num = d.p_ul[k] * std::norm(w[k].dot(ch.h_ul[k]));
    Eigen::MatrixXcd denom_m =
        cqc + ch.noise_bs * Eigen::MatrixXcd::Identity(ch.n_rx(), ch.n_rx());
    for (int j = 0; j < ch.n_ul(); ++j)
      if (j != k) denom_m.noalias() += d.p_ul[j] * ch.h_ul[j] * ch.h_ul[j].adjoint();
    out[k] = num / std::real(w[k].dot(denom_m * w[k]));
  }
  return out;
}

inline std::vector<double> downlink_sinr(const TransmitDesign& d, const ChannelSet& ch) {
  std::vector<double> out(ch.n_dl());
  for (int l = 0; l < ch.n_dl(); ++l) {
    const auto& g = ch.g_dl[l];
    const double num = std::norm(g.dot(d.v_dl[l]));
    double den = ch.noise_dl[l];
    if (d.v0.size() > 0) den += std::real(g.dot(d.v0 * g));
    for (int j = 0; j < ch.n_dl(); ++j)
      if (j != l) den += std::norm(g.dot(d.v_dl[j]));
    out[l] = num / den;
  }
  return out;
}

// Downlink SINRs evaluated on the rank-relaxed design: |g^H v_l|^2 becomes
// g^H V_l g.
inline std::vector<double> downlink_sinr(const RelaxedDesign& d, const ChannelSet& ch) {
  std::vector<double> out(ch.n_dl());
  for (int l = 0; l < ch.n_dl(); ++l) {
    const auto& g = ch.g_dl[l];
    const double num = std::real(g.dot(d.v_dl[l] * g));
    double den = ch.noise_dl[l];
    if (d.v0.size() > 0) den += std::real(g.dot(d.v0 * g));
    for (int j = 0; j < ch.n_dl(); ++j)
      if (j != l) den += std::real(g.dot(d.v_dl[j] * g));
    out[l] = num / den;
  }
  return out;
}

// Factor F with F F^H = M for Hermitian PSD M; eigenvalues in
// [-kPsdTol*trace, 0) are clipped, more negative ones are a domain error.
inline Eigen::MatrixXcd psd_factor(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  const double floor = -kPsdTol * std::max(std::abs(m.real().trace()), 1e-300);
  Eigen::VectorXd ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) < floor) throw std::domain_error("psd_factor: matrix is not PSD");
    ev(i) = std::max(ev(i), 0.0);
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
}

struct EmpiricalSinrReport {
  SinrReport value;      // ratio-of-means estimates
  SinrReport std_error;  // delta-method standard errors
  int n_frames = 0;
};

// Symbol-level realization of the signal model: unit-power Gaussian data
// symbols, radar signal drawn with covariance V0, AWGN at BS and users.
// Empirical SINRs use the provided combiners; this is the oracle the
// closed-form expressions are checked against.
inline EmpiricalSinrReport simulate_symbols(const TransmitDesign& d,
                                            const ChannelSet& ch,
                                            const Eigen::VectorXcd& u,
                                            const std::vector<Eigen::VectorXcd>& w,
                                            int n_frames, std::uint64_t seed) {
  if (n_frames < 1) throw std::domain_error("simulate_symbols: n_frames >= 1 required");
  if (u.norm() == 0.0) throw std::domain_error("simulate_symbols: zero radar combiner");
  const int n_tx = ch.n_tx();
  const int big_k = ch.n_ul();
  const int big_l = ch.n_dl();

  const Eigen::MatrixXcd f0 = psd_factor(d.v0);  // radar signal factor
  const auto [b_mat, c_mat] = interference_matrices(ch);
  const Eigen::MatrixXcd a0 = target_matrix(ch);

  // Row projections; each frame then costs a handful of inner products.
  const Eigen::RowVectorXcd u_tgt = ch.target_amp * (u.adjoint() * a0);     // 1 x N_t
  const Eigen::RowVectorXcd u_clut = u.adjoint() * b_mat;                    // 1 x N_t
  Eigen::RowVectorXcd u_h(big_k);
  for (int k = 0; k < big_k; ++k) u_h(k) = u.dot(ch.h_ul[k]);
  std::vector<Eigen::RowVectorXcd> w_tgtclut(big_k), w_x(big_k);
  Eigen::MatrixXcd w_h = Eigen::MatrixXcd::Zero(big_k, big_k);  // w_k^H h_j
  for (int k = 0; k < big_k; ++k) {
    w_x[k] = w.at(k).adjoint() * c_mat;  // target + clutter + SI, as seen by w_k
    for (int j = 0; j < big_k; ++j) w_h(k, j) = w[k].dot(ch.h_ul[j]);
  }
  Eigen::MatrixXcd g_v = Eigen::MatrixXcd::Zero(big_l, std::max(big_l, 1));  // g_l^H v_j
  std::vector<Eigen::RowVectorXcd> g_f0(big_l);
  for (int l = 0; l < big_l; ++l) {
    for (int j = 0; j < big_l; ++j) g_v(l, j) = ch.g_dl[l].dot(d.v_dl[j]);
    g_f0[l] = f0.size() > 0 ? (ch.g_dl[l].adjoint() * f0).eval()
                            : Eigen::RowVectorXcd::Zero(0);
  }

  rng::Stream sym(seed, 10), rad(seed, 11), ul(seed, 12), nbs(seed, 13), ndl(seed, 14);

  struct Acc {
    double sig = 0, intf = 0, sig2 = 0, intf2 = 0;
    void add(double s, double i) {
      sig += s;
      intf += i;
      sig2 += s * s;
      intf2 += i * i;
    }
  };
  Acc acc_r;
  std::vector<Acc> acc_ul(big_k), acc_dl(big_l);

  Eigen::VectorXcd s(big_l), s0(f0.cols()), dsym(big_k), n_bs(ch.n_rx());
  for (int f = 0; f < n_frames; ++f) {
    for (int l = 0; l < big_l; ++l) s(l) = sym.next_cgaussian();
    for (int i = 0; i < s0.size(); ++i) s0(i) = rad.next_cgaussian();
    for (int k = 0; k < big_k; ++k) dsym(k) = std::sqrt(d.p_ul[k]) * ul.next_cgaussian();
    for (int i = 0; i < n_bs.size(); ++i)
      n_bs(i) = std::sqrt(ch.noise_bs) * nbs.next_cgaussian();

    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n_tx);
    for (int l = 0; l < big_l; ++l) x += d.v_dl[l] * s(l);
    if (f0.size() > 0) x.noalias() += f0 * s0;

    // Radar branch.
    const std::complex<double> r_sig = u_tgt * x;
    const std::complex<double> r_int =
        (u_clut * x).value() + (u_h * dsym).value() + u.dot(n_bs);
    acc_r.add(std::norm(r_sig), std::norm(r_int));

    // Uplink branches; the target echo is interference here.
    for (int k = 0; k < big_k; ++k) {
      const std::complex<double> sig = w_h(k, k) * dsym(k);
      std::complex<double> intf = (w_x[k] * x).value() + w[k].dot(n_bs);
      for (int j = 0; j < big_k; ++j)
        if (j != k) intf += w_h(k, j) * dsym(j);
      acc_ul[k].add(std::norm(sig), std::norm(intf));
    }

    // Downlink users.
    for (int l = 0; l < big_l; ++l) {
      const std::complex<double> sig = g_v(l, l) * s(l);
      std::complex<double> intf =
          std::sqrt(ch.noise_dl[l]) * ndl.next_cgaussian();
      for (int j = 0; j < big_l; ++j)
        if (j != l) intf += g_v(l, j) * s(j);
      if (g_f0[l].size() > 0) intf += (g_f0[l] * s0).value();
      acc_dl[l].add(std::norm(sig), std::norm(intf));
    }
  }

  const double nf = static_cast<double>(n_frames);
  auto finish = [nf](const Acc& a, double& est, double& se) {
    const double ms = a.sig / nf, mi = a.intf / nf;
    if (ms == 0.0) {
      est = 0.0;
      se = 0.0;
      return;
    }
    est = ms / mi;
    const double vs = a.sig2 / nf - ms * ms;
    const double vi = a.intf2 / nf - mi * mi;
    se = est * std::sqrt(vs / (nf * ms * ms) + vi / (nf * mi * mi));
  };

  EmpiricalSinrReport rep;
  rep.n_frames = n_frames;
  rep.value.uplink.resize(big_k);
  rep.std_error.uplink.resize(big_k);
  rep.value.downlink.resize(big_l);
  rep.std_error.downlink.resize(big_l);
  finish(acc_r, rep.value.radar, rep.std_error.radar);
  for (int k = 0; k < big_k; ++k)
    finish(acc_ul[k], rep.value.uplink[k], rep.std_error.uplink[k]);
  for (int l = 0; l < big_l; ++l)
    finish(acc_dl[l], rep.value.downlink[l], rep.std_error.downlink[l]);
  return rep;
}

// Expected beampattern gain per angle: the symbol average replaces |a^H x|^2
// with a^H Q a, which is plot-stable and equal in expectation.
inline std::vector<double> beampattern_gain(const Eigen::VectorXcd& u,
                                            const TransmitDesign& d,
                                            const ChannelSet& ch,
                                            const std::vector<double>& angle_grid_deg) {
  if (u.norm() == 0.0) throw std::domain_error("beampattern_gain: zero combiner");
  const Eigen::MatrixXcd q = covariance_q(d);
  const double u2 = u.squaredNorm();
  std::vector<double> out(angle_grid_deg.size());
  for (std::size_t i = 0; i < angle_grid_deg.size(); ++i) {
    const auto a_t = make_steering(angle_grid_deg[i], ch.n_tx());
    const auto a_r = make_steering(angle_grid_deg[i], ch.n_rx());
    const double tx_gain = std::real(a_t.dot(q * a_t));
    out[i] = std::norm(u.dot(a_r)) * tx_gain / (ch.noise_bs * u2);
  }
  return out;
}

}  // namespace fdisac
