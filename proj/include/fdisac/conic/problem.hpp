#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Problem description for the conic solver: a real linear objective over
// Hermitian PSD matrix variables and nonnegative scalars, subject to linear
// relations and hyperbolic constraints x*y >= c (x, y affine and implicitly
// nonnegative through the rotated second-order-cone embedding).

namespace fdisac::conic {

enum class Relation { le, eq, ge };

enum class SolveStatus { optimal, infeasible, numerical_failure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    default: return "numerical_failure";
  }
}

// Real-valued affine functional of the problem variables. PSD terms pair as
// Tr(coeff * V) with Hermitian coeff, which is real on Hermitian V.
struct Affine {
  std::vector<std::pair<int, Eigen::MatrixXcd>> psd_terms;
  std::vector<std::pair<int, double>> scalar_terms;
  double offset = 0.0;

  Affine& add_psd(int var, Eigen::MatrixXcd coeff) {
    psd_terms.emplace_back(var, std::move(coeff));
    return *this;
  }
  Affine& add_scalar(int var, double coeff) {
    scalar_terms.emplace_back(var, coeff);
    return *this;
  }
};

struct LinearConstraint {
  Affine f;
  Relation rel = Relation::eq;
  double bound = 0.0;
};

struct HyperbolicConstraint {
  Affine x, y;
  double c = 0.0;  // requires x*y >= c with c >= 0
};

struct ConicProblem {
  struct PsdVar {
    std::string name;
    int dim = 0;
  };
  struct ScalarVar {
    std::string name;
  };

  std::vector<PsdVar> psd_vars;
  std::vector<ScalarVar> scalar_vars;
  Affine objective;
  std::vector<LinearConstraint> linear_constraints;
  std::vector<HyperbolicConstraint> hyperbolic_constraints;

  int add_psd_var(std::string name, int dim) {
    if (dim < 1) throw std::invalid_argument("psd var dimension must be >= 1");
    psd_vars.push_back({std::move(name), dim});
    return static_cast<int>(psd_vars.size()) - 1;
  }
  int add_scalar_var(std::string name) {
    scalar_vars.push_back({std::move(name)});
    return static_cast<int>(scalar_vars.size()) - 1;
  }
  void add_linear(Affine f, Relation rel, double bound) {
    linear_constraints.push_back({std::move(f), rel, bound});
  }
  void add_hyperbolic(Affine x, Affine y, double c) {
    if (c < 0.0) throw std::invalid_argument("hyperbolic constant must be >= 0");
    hyperbolic_constraints.push_back({std::move(x), std::move(y), c});
  }

  // Checks Hermitian coefficients and variable ids; throws on violation.
  void validate() const {
    auto check_affine = [&](const Affine& f, const char* where) {
      for (const auto& [id, coeff] : f.psd_terms) {
        if (id < 0 || id >= static_cast<int>(psd_vars.size()))
          throw std::invalid_argument(std::string("bad psd var id in ") + where);
        if (coeff.rows() != psd_vars[id].dim || coeff.cols() != psd_vars[id].dim)
          throw std::invalid_argument(std::string("coefficient dim mismatch in ") + where);
        if ((coeff - coeff.adjoint()).cwiseAbs().maxCoeff() >
            1e-10 * std::max(1.0, coeff.cwiseAbs().maxCoeff()))
          throw std::invalid_argument(std::string("non-Hermitian coefficient in ") + where);
      }
      for (const auto& [id, c] : f.scalar_terms) {
        (void)c;
        if (id < 0 || id >= static_cast<int>(scalar_vars.size()))
          throw std::invalid_argument(std::string("bad scalar var id in ") + where);
      }
    };
    check_affine(objective, "objective");
    for (const auto& lc : linear_constraints) check_affine(lc.f, "linear constraint");
    for (const auto& hc : hyperbolic_constraints) {
      check_affine(hc.x, "hyperbolic constraint");
      check_affine(hc.y, "hyperbolic constraint");
      if (hc.c < 0.0) throw std::invalid_argument("hyperbolic constant must be >= 0");
    }
  }

  double eval(const Affine& f, const std::vector<Eigen::MatrixXcd>& psd_values,
              const std::vector<double>& scalar_values) const {
    double v = f.offset;
    for (const auto& [id, coeff] : f.psd_terms)
      v += std::real((coeff * psd_values.at(id)).trace());
    for (const auto& [id, c] : f.scalar_terms) v += c * scalar_values.at(id);
    return v;
  }
};

struct ConicSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  std::vector<Eigen::MatrixXcd> psd_values;
  std::vector<double> scalar_values;
  double objective_value = 0.0;
  double max_residual = 0.0;  // worst constraint violation, unit-scaled data
  int iterations = 0;
};

// Debug dump: one triplet per line, "<variable> <coefficient> <constraint>".
// PSD entries are labelled var[r,c]{re|im}; constraints are obj, lin<i>,
// hyp<i>{x|y|c}. Intended for external cross-checking.
inline void dump_problem(const ConicProblem& p, std::ostream& os) {
  auto emit_affine = [&os, &p](const Affine& f, const std::string& cid) {
    for (const auto& [id, coeff] : f.psd_terms) {
      const auto& name = p.psd_vars[id].name;
      for (Eigen::Index r = 0; r < coeff.rows(); ++r)
        for (Eigen::Index c = 0; c < coeff.cols(); ++c) {
          if (coeff(r, c).real() != 0.0)
            os << name << '[' << r << ',' << c << "]re " << coeff(r, c).real() << ' '
               << cid << '\n';
          if (coeff(r, c).imag() != 0.0)
            os << name << '[' << r << ',' << c << "]im " << coeff(r, c).imag() << ' '
               << cid << '\n';
        }
    }
    for (const auto& [id, c] : f.scalar_terms)
      if (c != 0.0) os << p.scalar_vars[id].name << ' ' << c << ' ' << cid << '\n';
    if (f.offset != 0.0) os << "__offset__ " << f.offset << ' ' << cid << '\n';
  };
  emit_affine(p.objective, "obj");
  for (std::size_t i = 0; i < p.linear_constraints.size(); ++i) {
    const auto& lc = p.linear_constraints[i];
    const std::string cid = "lin" + std::to_string(i);
    emit_affine(lc.f, cid);
    const char* rel = lc.rel == Relation::le ? "le" : (lc.rel == Relation::eq ? "eq" : "ge");
    os << "__rel__ " << rel << ' ' << cid << '\n';
    os << "__bound__ " << lc.bound << ' ' << cid << '\n';
  }
  for (std::size_t i = 0; i < p.hyperbolic_constraints.size(); ++i) {
    const auto& hc = p.hyperbolic_constraints[i];
    emit_affine(hc.x, "hyp" + std::to_string(i) + "x");
    emit_affine(hc.y, "hyp" + std::to_string(i) + "y");
    os << "__const__ " << hc.c << " hyp" << i << "c\n";
  }
}

}  // namespace fdisac::conic
