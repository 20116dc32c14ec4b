#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <vector>

#include "fdisac/signal_metrics.hpp"

// Closed-form optimal receive beamformers and the reduced SINR expressions
// obtained after substituting them. Both SINR fronts are generalized
// Rayleigh quotients, so the maximizers are whitened matched filters.

namespace fdisac {

struct ReceiveDesign {
  Eigen::VectorXcd u;                   // radar combiner
  std::vector<Eigen::VectorXcd> w_ul;   // uplink combiners
};

// Psi = sum_k p_k h_k h_k^H + B Qbar B^H + sigma_r^2 I
// Phi_k = sum_{k' != k} p_k' h_k' h_k'^H + C Qbar C^H + sigma_r^2 I
// Positive definite by the noise floor, so plain Cholesky applies.
struct WhiteningMatrices {
  Eigen::MatrixXcd psi;
  std::vector<Eigen::MatrixXcd> phi;
};

namespace detail {

inline WhiteningMatrices build_whitening_from_q(const Eigen::MatrixXcd& q,
                                                const std::vector<double>& p_ul,
                                                const ChannelSet& ch) {
  const int n = ch.n_rx();
  const auto [b, c] = interference_matrices(ch);
  const Eigen::MatrixXcd noise = ch.noise_bs * Eigen::MatrixXcd::Identity(n, n);

  WhiteningMatrices wm;
  wm.psi = noise + b * q * b.adjoint();
  Eigen::MatrixXcd users = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < ch.n_ul(); ++k)
    users.noalias() += p_ul.at(k) * ch.h_ul[k] * ch.h_ul[k].adjoint();
  wm.psi += users;

  const Eigen::MatrixXcd cqc = noise + c * q * c.adjoint();
  wm.phi.resize(ch.n_ul());
  for (int k = 0; k < ch.n_ul(); ++k)
    wm.phi[k] = cqc + users - p_ul[k] * ch.h_ul[k] * ch.h_ul[k].adjoint();
  return wm;
}

}  // namespace detail

template <typename Design>
WhiteningMatrices build_whitening(const Design& d, const ChannelSet& ch) {
  return detail::build_whitening_from_q(covariance_q(d), d.p_ul, ch);
}

// u* = Psi^{-1} a_r0, w_k* = Phi_k^{-1} h_k, via Cholesky solves. Returned
// unnormalized; the SINRs are invariant to combiner scale.
template <typename Design>
ReceiveDesign optimal_receivers(const Design& d, const ChannelSet& ch) {
  const WhiteningMatrices wm = build_whitening(d, ch);
  ReceiveDesign r;
  r.u = Eigen::LLT<Eigen::MatrixXcd>(wm.psi).solve(ch.a_r0);
  r.w_ul.resize(ch.n_ul());
  for (int k = 0; k < ch.n_ul(); ++k)
    r.w_ul[k] = Eigen::LLT<Eigen::MatrixXcd>(wm.phi[k]).solve(ch.h_ul[k]);
  return r;
}

// Radar SINR at the optimal combiner:
// |beta_0|^2 (a_t0^H Q a_t0) (a_r0^H Psi^{-1} a_r0).
template <typename Design>
double reduced_radar_sinr(const Design& d, const ChannelSet& ch) {
  const Eigen::MatrixXcd q = covariance_q(d);
  const WhiteningMatrices wm = detail::build_whitening_from_q(q, d.p_ul, ch);
  const double tx = std::real(ch.a_t0.dot(q * ch.a_t0));
  const Eigen::VectorXcd z = Eigen::LLT<Eigen::MatrixXcd>(wm.psi).solve(ch.a_r0);
  return std::norm(ch.target_amp) * tx * std::real(ch.a_r0.dot(z));
}

// Uplink SINRs at the optimal combiners: p_k h_k^H Phi_k^{-1} h_k.
template <typename Design>
std::vector<double> reduced_uplink_sinr(const Design& d, const ChannelSet& ch) {
  const WhiteningMatrices wm = build_whitening(d, ch);
  std::vector<double> out(ch.n_ul());
  for (int k = 0; k < ch.n_ul(); ++k) {
    const Eigen::VectorXcd z = Eigen::LLT<Eigen::MatrixXcd>(wm.phi[k]).solve(ch.h_ul[k]);
    out[k] = d.p_ul[k] * std::real(ch.h_ul[k].dot(z));
  }
  return out;
}

}  // namespace fdisac
