#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hhlb/circuit.hpp"
#include "hhlb/hhl.hpp"
#include "hhlb/qstate.hpp"
#include "hhlb/sim.hpp"
#include "hhlb/transpile.hpp"

namespace hhlb {

// -- ancilla filtering and XEB ---------------------------------------------------

/// Keeps the outcomes with the ancilla bit set, drops that bit and
/// renormalises.  Throws ZeroProbability when nothing survives.
ProbDist filter_ancilla(const ProbDist& raw, int ancilla);
ProbDist filter_ancilla(const ProbDist& raw, const HHLLayout& layout);

struct XebPair {
  ProbDist p_e;  // measured
  ProbDist p_t;  // noiseless
};
using XebInput = std::vector<XebPair>;

/// sum_j (p_e - p_c, p_t) / sum_j (p_t - p_c, p_t) with p_c uniform over the
/// common dimension.  Throws Degenerate when every p_t is uniform.
double xeb(const XebInput& input);

// -- digital error model ------------------------------------------------------------

struct GateCounts {
  int n = 0;
  std::size_t sq_gates = 0;
  std::size_t cnots = 0;
};
GateCounts gate_counts(const Circuit& c);

struct DemFidelity {
  double f_r = 1.0;
  double f_1qg = 1.0;
  double f_2qg = 1.0;
  double f_xeb = 1.0;
  GateCounts counts;
};

/// f_r = (1-er)^n, f_1qg = (1-e1)^sq, f_2qg = (1-e2)^cnots, f_xeb their product.
DemFidelity dem_predict(const GateCounts& counts, const NoiseModel& rates);

/// Noiseless and trajectory-averaged distributions of an H-HHL style circuit
/// run from |0..0>, both filtered on `ancilla`.  With shots > 0 the noisy
/// distribution is additionally sampled (readout noise included).
XebPair noisy_xeb_pair(const Circuit& c, int ancilla, const NoiseModel& noise, std::uint64_t trajectories,
                       std::uint64_t shots = 0);

// -- tomography -------------------------------------------------------------------------

/// Measurement basis per register qubit: 0 = X, 1 = Y, 2 = Z.
using Setting = std::vector<int>;
/// Z-basis outcome distribution over the 2^m register values after the local
/// rotations of `setting` (register qubit i is bit i).
using SettingOracle = std::function<ProbDist(const Setting&)>;

struct TomographyResult {
  DensityMatrix rho;
  double predicted_error = 0.0;  // expected Frobenius error of the linear estimate
  bool insufficient_shots = false;
};

/// Linear inversion over all 4^m Pauli strings from the 3^m settings, then
/// projection onto the nearest density matrix (Frobenius norm).  `shots_per_setting` = 0
/// marks exact distributions; otherwise insufficient_shots is raised when
/// the predicted error exceeds 0.1.
TomographyResult tomography(const SettingOracle& oracle, int m, std::uint64_t shots_per_setting = 0);

/// Oracle measuring `register_qubits` of psi, optionally conditioned on
/// `postselect` = {qubit, value}.  shots = 0 gives exact distributions;
/// otherwise every setting draws `shots` raw samples and keeps the
/// post-selected ones.
SettingOracle state_oracle(const StateVector& psi, std::vector<int> register_qubits, std::uint64_t shots,
                           std::uint64_t seed, std::optional<std::pair<int, int>> postselect = std::nullopt);
SettingOracle density_oracle(const DensityMatrix& rho, std::uint64_t shots, std::uint64_t seed);

/// Tomography of the vector register of an H-HHL program on ancilla = 1.
/// Shots are raw runs per setting; the predicted error uses the expected
/// post-selected count.
TomographyResult hhl_tomography(const HHLProgram& program, std::uint64_t shots, std::uint64_t seed,
                                const Backend& backend = default_backend());

// -- quantum volume ----------------------------------------------------------------------

struct QvOptions {
  int circuits = 100;
  std::uint64_t trajectories = 200;
  int restarts = 5;
  std::uint64_t seed = 0;
};

struct QvWidth {
  int m = 0;
  double mean_hop = 0.0;
  double sigma = 0.0;  // sqrt(h (1-h) / circuits)
  bool passed = false;
};

struct QvResult {
  int volume = 1;
  std::vector<QvWidth> widths;
};

/// Square model circuit: m layers, each a random qubit pairing with a random
/// two-qubit block (three CNOTs between single-qubit layers) on every pair.
Circuit qv_model_circuit(int m, std::uint64_t seed);

/// Heavy-output protocol for m = 2..max_width.  Circuits are routed onto
/// `map`, restricted to the touched physical qubits and run through
/// noisy_run.  A width passes when mean_hop - 2 sigma > 2/3; the volume is
/// 2^m for the largest passing m, 1 if none.
QvResult quantum_volume(const CouplingMap& map, const NoiseModel& noise, int max_width, const QvOptions& opts = {});

// -- supremacy estimates -----------------------------------------------------------------

struct SupremacyRow {
  std::string family;
  int n = 0;
  std::string device;
  std::optional<double> f_r, f_1qg, f_2qg;  // given factors take precedence
  std::optional<GateCounts> counts;
  std::optional<NoiseModel> rates;
  double t_sfa = 0.0;  // seconds
  std::optional<int> quantum_volume;
};

struct SupremacyEntry {
  SupremacyRow row;
  DemFidelity fidelity;
  double t_f = 0.0;  // t_sfa * f_xeb, seconds
};

std::vector<SupremacyEntry> supremacy_table(const std::vector<SupremacyRow>& rows);

inline constexpr double kSecondsPerYear = 365.25 * 86400.0;
inline constexpr double kSecondsPerMonth = kSecondsPerYear / 12.0;

/// "<1 minute", "48 minutes", "10 months", "2.2e5 years", ...
std::string format_duration(double seconds);
/// Accepts a number of seconds or a string such as "10 months" or "2.2e5 years".
double parse_duration(const nlohmann::json& j);

std::vector<SupremacyRow> supremacy_rows_from_json(const nlohmann::json& j);
std::string table_markdown(const std::vector<SupremacyEntry>& entries);
std::string table_csv(const std::vector<SupremacyEntry>& entries);

}  // namespace hhlb
