#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "fdisac/conic/embedding.hpp"
#include "fdisac/conic/ipm.hpp"
#include "fdisac/conic/problem.hpp"

// Front end: lowers a ConicProblem onto the real symmetric-cone standard
// form (complex PSD variables through the doubling embedding, hyperbolic
// constraints through rotated second-order cones written as ||(2 sqrt(c),
// x - y)|| <= x + y), equilibrates the data, and runs the interior-point
// solver. The raw physical quantities span ~1e-10 to 1e10, which raw
// interior-point iterations do not survive, hence the Ruiz pass.

namespace fdisac::conic {

namespace lowering {

struct StandardForm {
  Eigen::MatrixXd a;
  Eigen::VectorXd b, c;
  ConeLayout layout;
  // variable bookkeeping
  std::vector<int> scalar_offset;  // per scalar var
  std::vector<int> psd_offset;     // per psd var (svec segment start)
  std::vector<int> psd_embed_dim;  // 2 * complex dim
  // column blocks that must be scaled uniformly: [start, len) pairs
  std::vector<std::pair<int, int>> col_blocks;
};

inline StandardForm lower(const ConicProblem& p) {
  p.validate();
  StandardForm sf;
  const int n_scalar = static_cast<int>(p.scalar_vars.size());
  int n_slack = 0;
  for (const auto& lc : p.linear_constraints)
    if (lc.rel != Relation::eq) ++n_slack;
  const int n_hyp = static_cast<int>(p.hyperbolic_constraints.size());

  sf.layout.n_nonneg = n_scalar + n_slack;
  sf.layout.soc_dims.assign(n_hyp, 3);
  sf.scalar_offset.resize(n_scalar);
  for (int i = 0; i < n_scalar; ++i) {
    sf.scalar_offset[i] = i;
    sf.col_blocks.emplace_back(i, 1);
  }
  for (int j = 0; j < n_slack; ++j) sf.col_blocks.emplace_back(n_scalar + j, 1);
  const int soc_base = sf.layout.n_nonneg;
  for (int i = 0; i < n_hyp; ++i) sf.col_blocks.emplace_back(soc_base + 3 * i, 3);

  int off = soc_base + 3 * n_hyp;
  for (const auto& pv : p.psd_vars) {
    const int ed = 2 * pv.dim;
    sf.psd_offset.push_back(off);
    sf.psd_embed_dim.push_back(ed);
    sf.layout.psd_dims.push_back(ed);
    const int len = ed * (ed + 1) / 2;
    sf.col_blocks.emplace_back(off, len);
    off += len;
  }
  const int n = off;
  const int m = static_cast<int>(p.linear_constraints.size()) + 3 * n_hyp;

  sf.a = Eigen::MatrixXd::Zero(m, n);
  sf.b = Eigen::VectorXd::Zero(m);
  sf.c = Eigen::VectorXd::Zero(n);

  auto put_affine = [&](const Affine& f, Eigen::VectorXd& row, double sign) {
    for (const auto& [id, coeff] : f.psd_terms)
      row.segment(sf.psd_offset[id], sf.layout.psd_dims[id] *
                                         (sf.layout.psd_dims[id] + 1) / 2) +=
          sign * 0.5 * svec(embed_hermitian(coeff));
    for (const auto& [id, w] : f.scalar_terms) row(sf.scalar_offset[id]) += sign * w;
  };

  int row = 0, slack = 0;
  Eigen::VectorXd buf(n);
  for (const auto& lc : p.linear_constraints) {
    buf.setZero();
    put_affine(lc.f, buf, 1.0);
    if (lc.rel == Relation::le) buf(n_scalar + slack++) = 1.0;
    if (lc.rel == Relation::ge) buf(n_scalar + slack++) = -1.0;
    sf.a.row(row) = buf.transpose();
    sf.b(row) = lc.bound - lc.f.offset;
    ++row;
  }
  for (int i = 0; i < n_hyp; ++i) {
    const auto& hc = p.hyperbolic_constraints[i];
    const int u = soc_base + 3 * i;
    // u = (x + y, x - y, 2 sqrt(c)) in Q3   <=>   x y >= c, x, y >= 0
    buf.setZero();
    buf(u) = 1.0;
    put_affine(hc.x, buf, -1.0);
    put_affine(hc.y, buf, -1.0);
    sf.a.row(row) = buf.transpose();
    sf.b(row) = hc.x.offset + hc.y.offset;
    ++row;
    buf.setZero();
    buf(u + 1) = 1.0;
    put_affine(hc.x, buf, -1.0);
    put_affine(hc.y, buf, 1.0);
    sf.a.row(row) = buf.transpose();
    sf.b(row) = hc.x.offset - hc.y.offset;
    ++row;
    buf.setZero();
    buf(u + 2) = 1.0;
    sf.a.row(row) = buf.transpose();
    sf.b(row) = 2.0 * std::sqrt(hc.c);
    ++row;
  }
  put_affine(p.objective, sf.c, 1.0);
  return sf;
}

struct Equilibration {
  Eigen::VectorXd row_scale;  // E
  Eigen::VectorXd col_scale;  // D, uniform within each cone block
  double beta = 1.0;          // b normalization; x = beta * D * x_scaled
  double gamma = 1.0;         // c normalization
};

inline Equilibration equilibrate(StandardForm& sf) {
  const int m = static_cast<int>(sf.a.rows());
  const int n = static_cast<int>(sf.a.cols());
  Equilibration eq;
  eq.row_scale = Eigen::VectorXd::Ones(m);
  eq.col_scale = Eigen::VectorXd::Ones(n);
  for (int pass = 0; pass < 8; ++pass) {
    for (int i = 0; i < m; ++i) {
      const double nrm = sf.a.row(i).cwiseAbs().maxCoeff();
      if (nrm > 0.0) {
        const double s = 1.0 / std::sqrt(nrm);
        sf.a.row(i) *= s;
        eq.row_scale(i) *= s;
      }
    }
    for (const auto& [start, len] : sf.col_blocks) {
      const double nrm = sf.a.middleCols(start, len).cwiseAbs().maxCoeff();
      if (nrm > 0.0) {
        const double s = 1.0 / std::sqrt(nrm);
        sf.a.middleCols(start, len) *= s;
        eq.col_scale.segment(start, len) *= s;
      }
    }
  }
  sf.b = eq.row_scale.asDiagonal() * sf.b;
  sf.c = eq.col_scale.asDiagonal() * sf.c;
  const double bn = sf.b.size() > 0 ? sf.b.cwiseAbs().maxCoeff() : 0.0;
  eq.beta = std::clamp(bn, 1e-12, 1e12);
  if (bn > 0.0) sf.b /= eq.beta;
  const double cn = sf.c.size() > 0 ? sf.c.cwiseAbs().maxCoeff() : 0.0;
  eq.gamma = std::clamp(cn, 1e-12, 1e12);
  if (cn > 0.0) sf.c /= eq.gamma;
  return eq;
}

}  // namespace lowering

inline ConicSolution solve(const ConicProblem& p, double tol = 1e-8) {
  auto sf = lowering::lower(p);
  if (sf.layout.vec_len() == 0) {  // no variables: feasible iff no rows
    ConicSolution sol;
    sol.status = SolveStatus::optimal;
    sol.objective_value = p.objective.offset;
    return sol;
  }
  auto eq = lowering::equilibrate(sf);

  IpmSettings st;
  st.tol_feas = tol;
  st.tol_gap = tol;
  const IpmResult r = solve_standard_form(sf.a, sf.b, sf.c, sf.layout, st);

  ConicSolution sol;
  sol.iterations = r.iters;
  switch (r.status) {
    case IpmStatus::optimal:
      sol.status = SolveStatus::optimal;
      break;
    case IpmStatus::primal_infeasible:
      sol.status = SolveStatus::infeasible;
      return sol;
    default:
      // dual infeasibility means an unbounded objective, which for these
      // power-minimization programs is always a modeling defect.
      sol.status = SolveStatus::numerical_failure;
      return sol;
  }

  // Residuals on the unit-equilibrated problem.
  double resid = (sf.a * r.x - sf.b).cwiseAbs().maxCoeff();
  resid = std::max(resid, (sf.a.transpose() * r.y + r.s - sf.c).cwiseAbs().maxCoeff());
  sol.max_residual = resid;
  if (resid > 1e-7) {
    sol.status = SolveStatus::numerical_failure;
    return sol;
  }

  const Eigen::VectorXd x = eq.beta * eq.col_scale.cwiseProduct(r.x);
  sol.scalar_values.resize(p.scalar_vars.size());
  for (std::size_t i = 0; i < p.scalar_vars.size(); ++i)
    sol.scalar_values[i] = std::max(0.0, x(sf.scalar_offset[i]));
  sol.psd_values.resize(p.psd_vars.size());
  for (std::size_t i = 0; i < p.psd_vars.size(); ++i) {
    const int ed = sf.psd_embed_dim[i];
    const Eigen::MatrixXd xm = smat(x.segment(sf.psd_offset[i], ed * (ed + 1) / 2), ed);
    sol.psd_values[i] = extract_hermitian(xm);
  }
  sol.objective_value = p.eval(p.objective, sol.psd_values, sol.scalar_values);
  return sol;
}

}  // namespace fdisac::conic
