#pragma once

#include <functional>
#include <map>
#include <vector>

#include "hhlb/circuit.hpp"
#include "hhlb/qstate.hpp"

namespace hhlb {

// -- classical oracle ---------------------------------------------------------

/// Eigenphases of a dense unitary on the (0, 1) branch, ascending, with the
/// orthonormal eigenvectors as columns.
struct EigenPhases {
  Eigen::VectorXd phases;
  MatrixXc vectors;
};
EigenPhases eigenphases(const MatrixXc& u);

/// Normalised (log U / 2 pi i)^{-1} b by diagonalisation.  Throws
/// ErrorKind::Singular when an eigenphase is within 1e-10 of 0.
StateVector classical_solve(const MatrixXc& u, const StateVector& b);
/// Same through a known spectrum and its eigenbasis circuit.
StateVector classical_solve(const Spectrum& spectrum, const StateVector& b);

// -- phase register planning ---------------------------------------------------

/// Which bits of the p_full-bit eigenphase numerators the register estimates.
/// Bit positions count from the least-significant bit of the numerator.
struct PhasePlan {
  int p_full = 0;
  int p = 0;
  int window_start = 0;               // lowest estimated bit (may be negative when p > p_full)
  std::map<int, int> fixed_bits;      // eliminated constant bits -> value
  std::uint64_t low_fixed = 0;        // value of the fixed bits below the window
  std::uint64_t fixed_value = 0;      // value of all fixed bits
};

/// Full plan: no eliminated bits, p >= p_full.  Hybrid plan: the constant
/// bits below the lowest varying bit are fixed and the register spans the
/// rest; if bit 0 varies, constant bits above the highest varying bit are
/// fixed instead.  Throws NoConstantBit when nothing can be fixed.
PhasePlan plan_phase_register(const Spectrum& spectrum, int p, bool hybrid);

/// Eigenphase lambda(m) for register value m, fixed bits reinserted.
double plan_phase(const PhasePlan& plan, std::uint64_t m);

// -- circuits --------------------------------------------------------------------

struct HHLLayout {
  int ancilla = 0;
  std::vector<int> phase_qubits;   // phase_qubits[i] holds bit i of the register value
  std::vector<int> vector_qubits;
  int p = 0;
  std::map<int, int> fixed_bits;
  double c_rot = 0.0;
  PhasePlan plan;

  int n_qubits() const { return static_cast<int>(vector_qubits.size() + phase_qubits.size()) + 1; }
};

struct HHLProgram {
  Circuit circuit;
  HHLLayout layout;
  Spectrum spectrum;
  std::size_t qpe_gate_count = 0;  // gates of the forward QPE section
};

/// QPE on the phase qubits for the given plan (Hadamards, controlled powers,
/// swapless inverse QFT).  Phase qubit i ends holding bit i of the register.
Circuit build_qpe(const Circuit& unitary, const PhasePlan& plan, const std::vector<int>& phase_qubits, int width);

/// Uniformly controlled Ry: for every control value m the target gets Ry(angles[m]).
/// Gray-code decomposition with 2^k CNOTs (none for k = 0).
void append_multiplexed_ry(Circuit& c, const std::vector<int>& controls, int target, const std::vector<double>& angles);

/// QPE, AQE (ancilla rotation with sin theta_m = c_rot / lambda(m)) and
/// inverse QPE on the register layout vector | phase | ancilla.  Full mode
/// uses p phase qubits (p <= 0 means p_full).  Hybrid mode always uses the
/// varying window; a positive p only bounds it.  c_rot <= 0 selects the
/// smallest eigenphase.
HHLProgram build_hhl(const Circuit& unitary, const Spectrum& spectrum, int p, bool hybrid, double c_rot = 0.0);

// -- execution ---------------------------------------------------------------------

using Backend = std::function<StateVector(const Circuit&, const StateVector&)>;
Backend default_backend();

struct SolutionReport {
  StateVector solution_state;
  double success_prob = 0.0;
  StateVector oracle_state;
  double fidelity = 0.0;
  double phase_residual = 0.0;  // phase-register weight outside |0..0> after post-selection
};

/// Runs from |0..0>, post-selects ancilla = 1, checks the phase register
/// returned to |0..0> (noiseless exact case) and compares with classical_solve.
SolutionReport run_hhl(const HHLProgram& program, const Backend& backend = default_backend());

/// Distribution over a p-qubit register after QPE on eigenvector `label`.
ProbDist qpe_only(const Circuit& unitary, const Spectrum& spectrum, int p, std::uint64_t eigen_label);

nlohmann::ordered_json to_json(const HHLLayout& layout);
nlohmann::ordered_json to_json(const SolutionReport& report);

}  // namespace hhlb
