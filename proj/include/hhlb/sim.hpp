#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hhlb/circuit.hpp"
#include "hhlb/qstate.hpp"

namespace hhlb {

/// Largest width the dense backend accepts: HHLB_MAX_QUBITS, default 26.
int max_statevector_qubits();

/// Applies the circuit to `initial` gate by gate (stride kernels, no matrix build).
StateVector schrodinger_run(const Circuit& circuit, const StateVector& initial);

// -- Schrodinger-Feynman -------------------------------------------------------

struct CutPlan {
  std::vector<int> part_a;  // larger side, n - n_small qubits
  std::vector<int> part_b;  // smaller side, n_small qubits
  std::vector<std::size_t> cross_gates;
  int k = 0;

  int n_small() const { return static_cast<int>(part_b.size()); }
};

/// Cut with an explicit smaller side.
CutPlan make_cut(const Circuit& circuit, std::vector<int> part_b);
/// Balanced cut (or with `n_small` qubits on the smaller side) minimising the
/// crossing CNOT count.  Exhaustive for n <= 12, contiguous windows otherwise.
CutPlan find_cut(const Circuit& circuit, int n_small = -1);

struct SfaOptions {
  int max_k = 12;
};

/// Sums the 2^k Schmidt branches of the crossing CNOTs, each branch being
/// two independent dense runs.  `initial` must factor across the cut.
StateVector sfa_run(const Circuit& circuit, const CutPlan& plan, const StateVector& initial,
                    const SfaOptions& opts = {});

// -- sampling and noise ----------------------------------------------------------

struct NoiseModel {
  double e1 = 0.0;  // per single-qubit gate
  double e2 = 0.0;  // per CNOT
  double er = 0.0;  // per measured qubit
  std::uint64_t seed = 0;

  void validate() const;
  bool noiseless() const { return e1 == 0.0 && e2 == 0.0 && er == 0.0; }
};

/// Empirical distribution of `shots` measurements, with optional readout flips.
ProbDist sample(const StateVector& state, std::uint64_t shots, const std::optional<NoiseModel>& noise = std::nullopt,
                std::uint64_t seed = 0);
/// Empirical distribution of `shots` draws from `dist`.
ProbDist sample(const ProbDist& dist, std::uint64_t shots, std::uint64_t seed = 0);

/// Flips every bit independently with probability er, applied to a distribution.
ProbDist apply_readout_noise(const ProbDist& p, double er);

/// Monte-Carlo Pauli trajectories: after every single-qubit gate a random
/// non-identity Pauli with probability e1, after every CNOT a random
/// non-identity two-qubit Pauli with probability e2; readout flips are then
/// applied to the averaged distribution.  Trajectory t draws from the stream
/// (noise.seed, t).
ProbDist noisy_run(const Circuit& circuit, const StateVector& initial, const NoiseModel& noise,
                   std::uint64_t trajectories);

// -- classical cost model -----------------------------------------------------------

struct CircuitStats {
  int n = 0;
  std::size_t depth = 0;
  std::size_t gate_count = 0;
  int treewidth = 0;
};

CircuitStats circuit_stats(const Circuit& c);

/// Greedy min-degree upper bound on the treewidth of the circuit's tensor
/// graph (CNOTs as vertices, qubit wires as edges).
int tensor_treewidth(const Circuit& c);

struct Machine {
  double c_family = 5e-9;  // seconds per amplitude update per qubit
  int cores = 1;
  int ram_qubits = 30;     // widest state vector held in memory
};

struct CostEstimate {
  double t_sa = 0.0;           // C n 2^n
  double t_sfa = 0.0;          // C (n - n_small) 2^(n - n_small) 2^k
  double t_tn = 0.0;           // C T 2^tw
  int t_tn_exponent = 0;       // tw
  std::optional<double> t_f;   // t_sfa * fidelity
  double c_family = 0.0;
};

CostEstimate estimate_costs(const CircuitStats& stats, int n_small, int k, const Machine& machine,
                            std::optional<double> fidelity = std::nullopt);
CostEstimate estimate_costs(const CircuitStats& stats, const CutPlan& plan, const Machine& machine,
                            std::optional<double> fidelity = std::nullopt);

/// Reference wall time of a hardware sampling run: 2 + 1.5 n seconds.
double hardware_sampling_seconds(int n);

}  // namespace hhlb
