#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fdisac/conic/solve.hpp"
#include "fdisac/receivers.hpp"
#include "fdisac/signal_metrics.hpp"

// Successive convex approximation over the rank-relaxed transmit design:
// the closed-form receivers reduce the problem to (V_0..V_L, p), the two
// remaining nonconvex SINR constraint families are replaced by affine
// underestimators around the previous iterate, and each subproblem is a
// small conic program. A constructive rank-one extraction recovers
// beamformers from the relaxed optimum at identical power and SINRs.

namespace fdisac {

struct ScaSettings {
  int max_iters = 50;
  double rel_obj_tol = 1e-4;
  double init_power_mw = 1.0;
  double init_growth = 10.0;
  int max_init_attempts = 8;
  double feas_tol_db = 0.01;
  double conic_tol = 1e-8;
};

enum class ScaTermination { converged, max_iters, infeasible_init, subproblem_failure };

inline const char* to_string(ScaTermination t) {
  switch (t) {
    case ScaTermination::converged: return "converged";
    case ScaTermination::max_iters: return "max_iters";
    case ScaTermination::infeasible_init: return "infeasible_init";
    default: return "subproblem_failure";
  }
}

struct SolverTrace {
  std::vector<double> objectives;  // total power per iteration, mW
  std::vector<conic::SolveStatus> statuses;            // aligned with objectives
  std::vector<conic::SolveStatus> init_statuses;       // failed start attempts
  ScaTermination termination = ScaTermination::subproblem_failure;
  SinrReport final_sinrs;
  int iterations_used = 0;
  bool feasible = false;            // every SINR within feas_tol_db of threshold
  std::vector<double> slack_db;     // radar, then UL users, then DL users
};

// Affine underestimator of Psi -> a^H Psi^{-1} a around psi_prev (Lemma-1
// style first-order expansion of a convex function):
//   f(Psi) = 2 a^H Psi0^{-1} a - Tr(M Psi),  M = Psi0^{-1} a a^H Psi0^{-1}.
struct InverseQuadraticLinearization {
  Eigen::MatrixXcd weight;   // M, Hermitian PSD rank one
  Eigen::VectorXcd solved;   // Psi0^{-1} a
  double constant = 0.0;     // 2 a^H Psi0^{-1} a

  double eval(const Eigen::MatrixXcd& psi) const {
    return constant - std::real((weight * psi).trace());
  }
};

inline InverseQuadraticLinearization linearize_inverse_quadratic(
    const Eigen::MatrixXcd& psi_prev, const Eigen::VectorXcd& vec) {
  Eigen::LLT<Eigen::MatrixXcd> llt(psi_prev);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("linearization point must be positive definite");
  InverseQuadraticLinearization lin;
  lin.solved = llt.solve(vec);
  lin.constant = 2.0 * std::real(vec.dot(lin.solved));
  lin.weight = lin.solved * lin.solved.adjoint();
  return lin;
}

inline InverseQuadraticLinearization linearize_radar(const Eigen::MatrixXcd& psi_prev,
                                                     const Eigen::VectorXcd& a_r0) {
  return linearize_inverse_quadratic(psi_prev, a_r0);
}

inline InverseQuadraticLinearization linearize_uplink(const Eigen::MatrixXcd& phi_prev,
                                                      const Eigen::VectorXcd& h_k) {
  return linearize_inverse_quadratic(phi_prev, h_k);
}

// Which pieces of the joint problem are active. The proposed scheme uses
// everything; the baselines disable the radar constraint or the dedicated
// radar covariance. User populations are controlled through cfg/ch.
struct ProblemShape {
  bool radar_constraint = true;
  bool dedicated_v0 = true;
};

namespace detail {

struct Subproblem {
  conic::ConicProblem problem;
  std::vector<int> v_ids;  // per DL user
  int v0_id = -1;
  std::vector<int> p_ids;  // per UL user
};

// SINRs are invariant under scaling every channel-like amplitude by 1/kappa
// and every noise power by 1/kappa^2, and the transmit powers keep their
// milliwatt meaning. Normalizing channel entries to unit mean square moves
// the subproblem data from a ~20-decade span into a few orders of magnitude,
// which the conic solver's equilibration can then handle.
inline ChannelSet amplitude_normalized(const ChannelSet& ch) {
  double acc = 0.0;
  long n = 0;
  for (const auto& h : ch.h_ul) {
    acc += h.squaredNorm();
    n += h.size();
  }
  for (const auto& g : ch.g_dl) {
    acc += g.squaredNorm();
    n += g.size();
  }
  const double kappa2 = (n > 0 && acc > 0.0) ? acc / n : 1.0;
  const double kappa = std::sqrt(kappa2);
  ChannelSet out = ch;
  for (auto& h : out.h_ul) h /= kappa;
  for (auto& g : out.g_dl) g /= kappa;
  out.h_si /= kappa;
  out.target_amp /= kappa;
  for (auto& a : out.interferer_amps) a /= kappa;
  out.noise_bs /= kappa2;
  for (auto& s : out.noise_dl) s /= kappa2;
  return out;
}

inline Subproblem build_subproblem_shaped(const RelaxedDesign& prev, const ChannelSet& ch_raw,
                                          const SystemConfig& cfg, const ProblemShape& shape) {
  const ChannelSet ch = amplitude_normalized(ch_raw);
  const int n_tx = ch.n_tx();
  const int big_k = ch.n_ul();
  const int big_l = ch.n_dl();
  const auto [b_mat, c_mat] = interference_matrices(ch);

  Subproblem sp;
  auto& p = sp.problem;
  for (int l = 0; l < big_l; ++l)
    sp.v_ids.push_back(p.add_psd_var("V" + std::to_string(l + 1), n_tx));
  if (shape.dedicated_v0) sp.v0_id = p.add_psd_var("V0", n_tx);
  for (int k = 0; k < big_k; ++k)
    sp.p_ids.push_back(p.add_scalar_var("p" + std::to_string(k + 1)));

  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n_tx, n_tx);
  for (int id : sp.v_ids) p.objective.add_psd(id, eye);
  if (sp.v0_id >= 0) p.objective.add_psd(sp.v0_id, eye);
  for (int id : sp.p_ids) p.objective.add_scalar(id, 1.0);

  auto all_v_ids = sp.v_ids;
  if (sp.v0_id >= 0) all_v_ids.push_back(sp.v0_id);

  const WhiteningMatrices wm = build_whitening(prev, ch);

  // Radar constraint: f(Psi) * (a_t0^H Qbar a_t0) >= tau_r / |beta0|^2.
  if (shape.radar_constraint) {
    const auto lin = linearize_radar(wm.psi, ch.a_r0);
    conic::Affine x;
    x.offset = lin.constant - ch.noise_bs * std::real(lin.weight.trace());
    const Eigen::VectorXcd bm = b_mat.adjoint() * lin.solved;
    const Eigen::MatrixXcd v_coeff = -(bm * bm.adjoint());
    for (int id : all_v_ids) x.add_psd(id, v_coeff);
    for (int k = 0; k < big_k; ++k)
      x.add_scalar(sp.p_ids[k], -std::norm(ch.h_ul[k].dot(lin.solved)));
    conic::Affine y;
    const Eigen::MatrixXcd tx_gain = ch.a_t0 * ch.a_t0.adjoint();
    for (int id : all_v_ids) y.add_psd(id, tx_gain);
    const double c = db_to_linear(cfg.radar_sinr_db) / std::norm(ch.target_amp);
    p.add_hyperbolic(std::move(x), std::move(y), c);
  }

  // Uplink constraints: f(Phi_k) * p_k >= tau_k.
  for (int k = 0; k < big_k; ++k) {
    const auto lin = linearize_uplink(wm.phi[k], ch.h_ul[k]);
    conic::Affine x;
    x.offset = lin.constant - ch.noise_bs * std::real(lin.weight.trace());
    const Eigen::VectorXcd cm = c_mat.adjoint() * lin.solved;
    const Eigen::MatrixXcd v_coeff = -(cm * cm.adjoint());
    for (int id : all_v_ids) x.add_psd(id, v_coeff);
    for (int j = 0; j < big_k; ++j)
      if (j != k) x.add_scalar(sp.p_ids[j], -std::norm(ch.h_ul[j].dot(lin.solved)));
    conic::Affine y;
    y.add_scalar(sp.p_ids[k], 1.0);
    p.add_hyperbolic(std::move(x), std::move(y), db_to_linear(cfg.ul_sinr_db[k]));
  }

  // Downlink constraints are linear in the relaxed variables:
  // Tr(G_l V_l)/tau_l - sum_{l' != l} Tr(G_l V_l') - Tr(G_l V0) >= sigma_l^2.
  for (int l = 0; l < big_l; ++l) {
    const Eigen::MatrixXcd g_mat = ch.g_dl[l] * ch.g_dl[l].adjoint();
    const double tau = db_to_linear(cfg.dl_sinr_db[l]);
    conic::Affine f;
    f.add_psd(sp.v_ids[l], g_mat / tau);
    for (int j = 0; j < big_l; ++j)
      if (j != l) f.add_psd(sp.v_ids[j], -g_mat);
    if (sp.v0_id >= 0) f.add_psd(sp.v0_id, -g_mat);
    p.add_linear(std::move(f), conic::Relation::ge, ch.noise_dl[l]);
  }
  return sp;
}

inline RelaxedDesign design_from_solution(const Subproblem& sp,
                                          const conic::ConicSolution& sol, int n_tx,
                                          int big_k) {
  RelaxedDesign d;
  for (int id : sp.v_ids) d.v_dl.push_back(sol.psd_values.at(id));
  d.v0 = sp.v0_id >= 0 ? sol.psd_values.at(sp.v0_id)
                       : Eigen::MatrixXcd::Zero(n_tx, n_tx).eval();
  for (int k = 0; k < big_k; ++k) d.p_ul.push_back(sol.scalar_values.at(sp.p_ids[k]));
  return d;
}

// Power-scaled starting point: MRT-shaped V_l, isotropic V0, uniform uplink
// powers. Inflated geometrically until the first subproblem is feasible.
inline RelaxedDesign initial_design(const ChannelSet& ch, const ProblemShape& shape,
                                    double total_mw) {
  const int n_tx = ch.n_tx();
  RelaxedDesign d;
  const int slots = ch.n_dl() + (shape.dedicated_v0 ? 1 : 0);
  const double per = slots > 0 ? total_mw / slots : 0.0;
  for (int l = 0; l < ch.n_dl(); ++l) {
    const Eigen::VectorXcd g = ch.g_dl[l] / ch.g_dl[l].norm();
    d.v_dl.push_back(per * (g * g.adjoint()));
  }
  d.v0 = shape.dedicated_v0
             ? (per / n_tx * Eigen::MatrixXcd::Identity(n_tx, n_tx)).eval()
             : Eigen::MatrixXcd::Zero(n_tx, n_tx).eval();
  if (ch.n_ul() > 0) d.p_ul.assign(ch.n_ul(), total_mw / ch.n_ul());
  return d;
}

// SINRs of a relaxed design under the closed-form receivers, with the
// downlink evaluated in its rank-relaxed form.
inline SinrReport relaxed_sinrs(const RelaxedDesign& d, const ChannelSet& ch) {
  SinrReport r;
  r.radar = reduced_radar_sinr(d, ch);
  r.uplink = reduced_uplink_sinr(d, ch);
  r.downlink = downlink_sinr(d, ch);
  return r;
}

inline void fill_slacks(SolverTrace& trace, const SinrReport& sinrs,
                        const SystemConfig& cfg, const ProblemShape& shape,
                        double feas_tol_db) {
  trace.final_sinrs = sinrs;
  trace.slack_db.clear();
  auto slack = [](double got, double want_db) {
    return linear_to_db(std::max(got, 1e-300)) - want_db;
  };
  if (shape.radar_constraint)
    trace.slack_db.push_back(slack(sinrs.radar, cfg.radar_sinr_db));
  for (std::size_t k = 0; k < sinrs.uplink.size(); ++k)
    trace.slack_db.push_back(slack(sinrs.uplink[k], cfg.ul_sinr_db[k]));
  for (std::size_t l = 0; l < sinrs.downlink.size(); ++l)
    trace.slack_db.push_back(slack(sinrs.downlink[l], cfg.dl_sinr_db[l]));
  trace.feasible = true;
  for (double s : trace.slack_db)
    if (s < -feas_tol_db) trace.feasible = false;
}

inline std::pair<RelaxedDesign, SolverTrace> run_sca_shaped(const ChannelSet& ch,
                                                            const SystemConfig& cfg,
                                                            const ScaSettings& st,
                                                            const ProblemShape& shape) {
  SolverTrace trace;
  RelaxedDesign prev;
  bool started = false;

  double p0 = st.init_power_mw;
  for (int attempt = 0; attempt < st.max_init_attempts; ++attempt, p0 *= st.init_growth) {
    const RelaxedDesign init = initial_design(ch, shape, p0);
    const auto sp = build_subproblem_shaped(init, ch, cfg, shape);
    const auto sol = conic::solve(sp.problem, st.conic_tol);
    if (sol.status == conic::SolveStatus::optimal) {
      prev = design_from_solution(sp, sol, ch.n_tx(), ch.n_ul());
      trace.objectives.push_back(sol.objective_value);
      trace.statuses.push_back(sol.status);
      started = true;
      break;
    }
    trace.init_statuses.push_back(sol.status);
  }
  if (!started) {
    trace.termination = ScaTermination::infeasible_init;
    trace.iterations_used = static_cast<int>(trace.objectives.size());
    return {prev, trace};
  }

  trace.termination = ScaTermination::max_iters;
  for (int iter = 2; iter <= st.max_iters; ++iter) {
    const auto sp = build_subproblem_shaped(prev, ch, cfg, shape);
    const auto sol = conic::solve(sp.problem, st.conic_tol);
    trace.statuses.push_back(sol.status);
    if (sol.status != conic::SolveStatus::optimal) {
      trace.termination = ScaTermination::subproblem_failure;
      break;
    }
    const double prev_obj = trace.objectives.back();
    prev = design_from_solution(sp, sol, ch.n_tx(), ch.n_ul());
    trace.objectives.push_back(sol.objective_value);
    if (std::abs(sol.objective_value - prev_obj) <
        st.rel_obj_tol * std::max(prev_obj, 1e-300)) {
      trace.termination = ScaTermination::converged;
      break;
    }
  }
  trace.iterations_used = static_cast<int>(trace.objectives.size());
  fill_slacks(trace, relaxed_sinrs(prev, ch), cfg, shape, st.feas_tol_db);
  return {prev, trace};
}

}  // namespace detail

// Subproblem of the full joint design, linearized around prev.
inline conic::ConicProblem build_subproblem(const RelaxedDesign& prev, const ChannelSet& ch,
                                            const SystemConfig& cfg) {
  return detail::build_subproblem_shaped(prev, ch, cfg, ProblemShape{}).problem;
}

// The iterative loop on the full joint problem.
inline std::pair<RelaxedDesign, SolverTrace> run_sca(const ChannelSet& ch,
                                                     const SystemConfig& cfg,
                                                     const ScaSettings& st = {}) {
  cfg.validate();
  return detail::run_sca_shaped(ch, cfg, st, ProblemShape{});
}

// Constructive rank-one recovery: beamformers from the relaxed optimum at
// identical total power, identical Qbar (hence radar/uplink SINRs) and
// identical downlink quadratic forms.
inline TransmitDesign extract_rank_one(const RelaxedDesign& hat, const ChannelSet& ch) {
  TransmitDesign d;
  const int n_tx = ch.n_tx();
  Eigen::MatrixXcd v0 = hat.v0.size() > 0
                            ? hat.v0
                            : Eigen::MatrixXcd::Zero(n_tx, n_tx).eval();
  for (int l = 0; l < ch.n_dl(); ++l) {
    const auto& vl = hat.v_dl.at(l);
    const auto& g = ch.g_dl[l];
    const double t = std::real(g.dot(vl * g));
    if (t < 1e-12 * std::max(std::real(vl.trace()), 1e-300))
      throw std::domain_error("extract_rank_one: degenerate g^H V g");
    const Eigen::VectorXcd v = (vl * g) / std::sqrt(t);
    d.v_dl.push_back(v);
    v0 += vl - v * v.adjoint();
  }
  d.v0 = 0.5 * (v0 + v0.adjoint());
  d.p_ul = hat.p_ul;
  return d;
}

struct JointResult {
  TransmitDesign tx;
  ReceiveDesign rx;
  SolverTrace trace;
};

// Full pipeline: SCA, rank-one extraction, closed-form receivers, and a
// final feasibility re-check of all SINR constraints on the built design.
inline JointResult solve_joint(const ChannelSet& ch, const SystemConfig& cfg,
                               const ScaSettings& st = {}) {
  cfg.validate();
  JointResult out;
  auto [relaxed, trace] = detail::run_sca_shaped(ch, cfg, st, ProblemShape{});
  out.trace = std::move(trace);
  if (out.trace.termination == ScaTermination::infeasible_init ||
      out.trace.termination == ScaTermination::subproblem_failure)
    return out;

  out.tx = extract_rank_one(relaxed, ch);
  out.rx = optimal_receivers(out.tx, ch);
  SinrReport final;
  final.radar = radar_sinr(out.tx, out.rx.u, ch);
  final.uplink = uplink_sinr(out.tx, out.rx.w_ul, ch);
  final.downlink = downlink_sinr(out.tx, ch);
  detail::fill_slacks(out.trace, final, cfg, ProblemShape{}, st.feas_tol_db);
  return out;
}

}  // namespace fdisac
