#pragma once

#include <cmath>

#include "hhlb/rng.hpp"
#include "hhlb/types.hpp"

namespace hhlb {

/// Euler angles of U = e^{i gamma} U3(theta, phi, lambda).
struct U3Angles {
  double theta = 0.0;
  double phi = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;
};

template <typename Real = double>
CMatrix2<Real> u3_matrix(Real theta, Real phi, Real lambda, Real gamma = Real(0)) {
  using C = std::complex<Real>;
  const Real c = std::cos(theta / 2);
  const Real s = std::sin(theta / 2);
  const C g = std::polar(Real(1), gamma);
  CMatrix2<Real> m;
  m << g * c, -g * std::polar(Real(1), lambda) * s,
       g * std::polar(Real(1), phi) * s, g * std::polar(Real(1), phi + lambda) * c;
  return m;
}

inline Matrix2c u3_matrix(const U3Angles& a) { return u3_matrix(a.theta, a.phi, a.lambda, a.gamma); }

/// ZYZ decomposition of any 2x2 unitary.
U3Angles zyz_decompose(const Matrix2c& u);

namespace mat {
Matrix2c identity();
Matrix2c x();
Matrix2c y();
Matrix2c z();
Matrix2c h();
Matrix2c s();
Matrix2c sdg();
Matrix2c t();
Matrix2c tdg();
Matrix2c phase(double angle);  // diag(1, e^{i angle})
Matrix2c rz(double angle);     // diag(e^{-i a/2}, e^{i a/2})
Matrix2c ry(double angle);
}  // namespace mat

/// Bloch-sphere direction; the involution n.sigma has eigenvalues +1/-1.
struct Axis {
  double theta = 0.0;
  double phi = 0.0;
};

Axis random_axis(Rng& rng);
/// n.sigma for the given direction.
Matrix2c involution(const Axis& axis);
/// Maps |0> to the +1 eigenvector and |1> to the -1 eigenvector of involution(axis).
Matrix2c involution_eigenbasis(const Axis& axis);
/// Haar-random element of SU(2).
Matrix2c random_su2(Rng& rng);

bool is_unitary(const MatrixXc& m, double tol = 1e-10);

/// Kronecker product with `high` acting on the upper qubits.
template <typename DerivedA, typename DerivedB>
MatrixXc kron(const Eigen::MatrixBase<DerivedA>& high, const Eigen::MatrixBase<DerivedB>& low) {
  MatrixXc out(high.rows() * low.rows(), high.cols() * low.cols());
  for (Index i = 0; i < high.rows(); ++i) {
    for (Index j = 0; j < high.cols(); ++j) {
      out.block(i * low.rows(), j * low.cols(), low.rows(), low.cols()) = high(i, j) * low;
    }
  }
  return out;
}

/// Dense operator of a single-qubit matrix acting on `target` of an n-qubit register.
MatrixXc embed_single(const Matrix2c& u, int target, int n_qubits);

}  // namespace hhlb
