#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hhlb {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using CMatrix2 = Eigen::Matrix<std::complex<Real>, 2, 2>;

using cplx = Complex<double>;
using VectorXc = CVector<double>;
using MatrixXc = CMatrix<double>;
using Matrix2c = CMatrix2<double>;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Machine-readable failure class; the CLI turns these into error JSON.
enum class ErrorKind {
  Dimension,
  InvalidArgument,
  ZeroProbability,
  Resource,
  Singular,
  NoConstantBit,
  PhaseRegisterTooSmall,
  Topology,
  Io,
  Degenerate,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::uint64_t dim_of(int n_qubits) { return std::uint64_t{1} << n_qubits; }

inline int bit_of(std::uint64_t x, int q) { return static_cast<int>((x >> q) & 1U); }

}  // namespace hhlb
