#pragma once

#include <Eigen/Dense>
#include <complex>

// Complex Hermitian matrices enter the real solver through the standard
// doubling embedding: H is PSD iff [Re H, -Im H; Im H, Re H] is PSD, and
// Tr(H V) = (1/2) Tr(embed(H) embed(V)) for Hermitian H, V. The 1/2 is
// applied wherever a real coefficient row pairs with an embedded variable.

namespace fdisac::conic {

inline Eigen::MatrixXd embed_hermitian(const Eigen::MatrixXcd& h) {
  const Eigen::Index d = h.rows();
  Eigen::MatrixXd out(2 * d, 2 * d);
  out.topLeftCorner(d, d) = h.real();
  out.bottomRightCorner(d, d) = h.real();
  out.topRightCorner(d, d) = -h.imag();
  out.bottomLeftCorner(d, d) = h.imag();
  return out;
}

// Inverse on embedded inputs; on a general symmetric X it projects onto the
// embedded subspace first (the projection preserves PSDness and all pairings
// with embedded data).
inline Eigen::MatrixXcd extract_hermitian(const Eigen::MatrixXd& x) {
  const Eigen::Index d = x.rows() / 2;
  const Eigen::MatrixXd re =
      0.5 * (x.topLeftCorner(d, d) + x.bottomRightCorner(d, d));
  const Eigen::MatrixXd im =
      0.5 * (x.bottomLeftCorner(d, d) - x.topRightCorner(d, d));
  Eigen::MatrixXcd h(d, d);
  h.real() = 0.5 * (re + re.transpose());
  h.imag() = 0.5 * (im - im.transpose());
  return h;
}

inline Eigen::Index svec_len(Eigen::Index d) { return d * (d + 1) / 2; }

// Column-stacked lower triangle with sqrt(2)-scaled off-diagonals, so that
// svec(X) . svec(Y) = <X, Y>_F.
inline Eigen::VectorXd svec(const Eigen::MatrixXd& x) {
  static const double rt2 = std::sqrt(2.0);
  const Eigen::Index d = x.rows();
  Eigen::VectorXd v(svec_len(d));
  Eigen::Index idx = 0;
  for (Eigen::Index c = 0; c < d; ++c) {
    v(idx++) = x(c, c);
    for (Eigen::Index r = c + 1; r < d; ++r) v(idx++) = rt2 * x(r, c);
  }
  return v;
}

inline Eigen::MatrixXd smat(const Eigen::VectorXd& v, Eigen::Index d) {
  static const double inv_rt2 = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd x(d, d);
  Eigen::Index idx = 0;
  for (Eigen::Index c = 0; c < d; ++c) {
    x(c, c) = v(idx++);
    for (Eigen::Index r = c + 1; r < d; ++r) {
      x(r, c) = inv_rt2 * v(idx);
      x(c, r) = x(r, c);
      ++idx;
    }
  }
  return x;
}

}  // namespace fdisac::conic
