#pragma once

#include <span>
#include <utility>
#include <vector>

#include "hhlb/types.hpp"
#include "json.hpp"

namespace hhlb {

/// Dense pure state on n qubits.  Qubit 0 is the least-significant bit of
/// the basis index, everywhere in this library.
class StateVector {
 public:
  StateVector(int n_qubits, VectorXc amps);

  /// Computational basis state |index>.
  static StateVector basis(int n_qubits, std::uint64_t index = 0);
  /// Infers n from the amplitude count, which must be a power of two.
  static StateVector from_amplitudes(VectorXc amps);

  int n_qubits() const { return n_qubits_; }
  Index dim() const { return amps_.size(); }
  const VectorXc& amps() const { return amps_; }
  cplx operator[](Index i) const { return amps_[i]; }

  double norm() const { return amps_.norm(); }
  /// Throws ErrorKind::Degenerate when the norm is below 1e-12.
  StateVector normalized() const;

  Eigen::VectorXd probabilities() const;

 private:
  int n_qubits_;
  VectorXc amps_;
};

class DensityMatrix {
 public:
  DensityMatrix(int n_qubits, MatrixXc elements);

  static DensityMatrix from_pure(const StateVector& psi);
  static DensityMatrix maximally_mixed(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  Index dim() const { return rho_.rows(); }
  const MatrixXc& matrix() const { return rho_; }
  cplx trace() const { return rho_.trace(); }

  /// Hermitian within 1e-9, unit trace within 1e-9, eigenvalues >= -1e-8.
  bool is_physical(double tol = 1e-9) const;

 private:
  int n_qubits_;
  MatrixXc rho_;
};

/// Non-negative weights over 2^n outcomes (or any dim).
class ProbDist {
 public:
  explicit ProbDist(Eigen::VectorXd probs, bool normalized = true);

  static ProbDist uniform(Index dim);
  static ProbDist from_state(const StateVector& psi);

  Index dim() const { return p_.size(); }
  const Eigen::VectorXd& probs() const { return p_; }
  double operator[](Index i) const { return p_[i]; }
  double total() const { return p_.sum(); }
  bool is_normalized() const { return normalized_; }

  /// Throws ErrorKind::ZeroProbability on an all-zero vector.
  ProbDist normalized() const;

 private:
  Eigen::VectorXd p_;
  bool normalized_;
};

/// Real part of <psi|rho|psi>, clamped to [0, 1].
double state_fidelity(const StateVector& pure, const DensityMatrix& rho);
/// |<a|b>|^2.
double state_fidelity(const StateVector& a, const StateVector& b);

/// Reduced density matrix on `keep`; keep[i] becomes qubit i of the result.
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);

struct Postselected {
  StateVector state;   // remaining qubits, relative order preserved
  double probability;  // pre-selection probability of the outcome
};

/// Projects `qubit` onto `outcome` and removes it.
Postselected postselect(const StateVector& state, int qubit, int outcome);

/// Kronecker product with `high` on the upper qubits.
StateVector kron(const StateVector& high, const StateVector& low);

nlohmann::ordered_json to_json(const StateVector& psi);
StateVector state_from_json(const nlohmann::json& j);

}  // namespace hhlb
