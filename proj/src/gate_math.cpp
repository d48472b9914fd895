#include "hhlb/gate_math.hpp"

#include <algorithm>

namespace hhlb {

U3Angles zyz_decompose(const Matrix2c& u) {
  constexpr double eps = 1e-14;
  U3Angles a;
  const double c = std::abs(u(0, 0));
  const double s = std::abs(u(1, 0));
  a.theta = 2.0 * std::atan2(s, c);
  if (c > eps) {
    a.gamma = std::arg(u(0, 0));
    if (s > eps) {
      a.phi = std::arg(u(1, 0)) - a.gamma;
      a.lambda = std::arg(-u(0, 1)) - a.gamma;
    } else {
      a.phi = 0.0;
      a.lambda = std::arg(u(1, 1)) - a.gamma;
    }
  } else {
    a.phi = 0.0;
    a.gamma = std::arg(u(1, 0));
    a.lambda = std::arg(-u(0, 1)) - a.gamma;
  }
  return a;
}

namespace mat {
Matrix2c identity() { return Matrix2c::Identity(); }
Matrix2c x() {
  Matrix2c m;
  m << 0, 1, 1, 0;
  return m;
}
Matrix2c y() {
  Matrix2c m;
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}
Matrix2c z() {
  Matrix2c m;
  m << 1, 0, 0, -1;
  return m;
}
Matrix2c h() {
  Matrix2c m;
  const double r = 1.0 / std::sqrt(2.0);
  m << r, r, r, -r;
  return m;
}
Matrix2c phase(double angle) {
  Matrix2c m;
  m << 1, 0, 0, std::polar(1.0, angle);
  return m;
}
Matrix2c s() { return phase(kPi / 2); }
Matrix2c sdg() { return phase(-kPi / 2); }
Matrix2c t() { return phase(kPi / 4); }
Matrix2c tdg() { return phase(-kPi / 4); }
Matrix2c rz(double angle) {
  Matrix2c m;
  m << std::polar(1.0, -angle / 2), 0, 0, std::polar(1.0, angle / 2);
  return m;
}
Matrix2c ry(double angle) {
  Matrix2c m;
  const double c = std::cos(angle / 2);
  const double s = std::sin(angle / 2);
  m << c, -s, s, c;
  return m;
}
}  // namespace mat

Axis random_axis(Rng& rng) {
  double x = 0, y = 0, z = 0, r = 0;
  do {
    x = rng.normal();
    y = rng.normal();
    z = rng.normal();
    r = std::sqrt(x * x + y * y + z * z);
  } while (r < 1e-9);
  return {std::acos(std::clamp(z / r, -1.0, 1.0)), std::atan2(y, x)};
}

Matrix2c involution(const Axis& a) {
  Matrix2c m;
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  m << c, std::polar(s, -a.phi), std::polar(s, a.phi), -c;
  return m;
}

Matrix2c involution_eigenbasis(const Axis& a) { return u3_matrix(a.theta, a.phi, 0.0); }

Matrix2c random_su2(Rng& rng) {
  double q[4];
  double r = 0;
  do {
    r = 0;
    for (double& v : q) {
      v = rng.normal();
      r += v * v;
    }
    r = std::sqrt(r);
  } while (r < 1e-9);
  const cplx a(q[0] / r, q[1] / r);
  const cplx b(q[2] / r, q[3] / r);
  Matrix2c m;
  m << a, -std::conj(b), b, std::conj(a);
  return m;
}

bool is_unitary(const MatrixXc& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m.adjoint() * m - MatrixXc::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

MatrixXc embed_single(const Matrix2c& u, int target, int n_qubits) {
  const auto hi = static_cast<Index>(dim_of(n_qubits - target - 1));
  const auto lo = static_cast<Index>(dim_of(target));
  return kron(kron(MatrixXc::Identity(hi, hi), u), MatrixXc::Identity(lo, lo));
}

}  // namespace hhlb
