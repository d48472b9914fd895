#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hhlb/circuit.hpp"

namespace hhlb {

class CouplingMap {
 public:
  /// Validates endpoints, self-loops and connectivity; duplicate edges are merged.
  CouplingMap(std::string name, int n_qubits, std::vector<std::pair<int, int>> edges);

  const std::string& name() const { return name_; }
  int n_qubits() const { return n_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int q) const { return adj_[static_cast<std::size_t>(q)]; }
  int distance(int a, int b) const { return dist_[static_cast<std::size_t>(a * n_ + b)]; }
  bool adjacent(int a, int b) const { return distance(a, b) == 1; }
  bool is_complete() const { return static_cast<int>(edges_.size()) == n_ * (n_ - 1) / 2; }

  std::optional<double> e1, e2, er;

 private:
  std::string name_;
  int n_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> dist_;
};

CouplingMap all_to_all(int n);
CouplingMap line(int n);

/// Directory holding topologies/*.json: HHLB_DATA_DIR, else the build-time default.
std::string data_dir();

/// "all_to_all(n)", "line(n)", a built-in name (melbourne15, johannesburg20,
/// rochester53, sycamore53) or a path to a topology JSON file.
CouplingMap load_topology(const std::string& spec);
CouplingMap topology_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const CouplingMap& map);

/// Fuses every run of consecutive single-qubit gates on a qubit into one gate.
Circuit merge_single_qubit_runs(const Circuit& c);

struct TranspileReport {
  Circuit routed;                  // on map.n_qubits() physical qubits
  std::size_t depth = 0;
  std::size_t cnot_count = 0;
  std::size_t sq_count = 0;
  int restarts_used = 0;
  int best_restart = 0;
  std::uint64_t seed = 0;
  std::vector<int> initial_layout;  // logical qubit -> physical qubit before the circuit
  std::vector<int> final_layout;    // logical qubit -> physical qubit after it
};

/// SABRE-style lookahead routing from `restarts` random initial placements
/// (each refined by one reverse pass); SWAP = 3 CNOTs.  Returns the restart
/// minimising (depth, cnot_count, restart index).
TranspileReport route(const Circuit& circuit, const CouplingMap& map, int restarts, std::uint64_t seed);

/// Single routing pass from a given placement (logical q on physical initial_layout[q]).
TranspileReport route_from_layout(const Circuit& circuit, const CouplingMap& map, const std::vector<int>& initial_layout,
                                  std::uint64_t seed);

/// Routed circuit restricted to the physical qubits it touches, renumbered
/// in first-touch order (initial layout first).
struct CompactCircuit {
  Circuit circuit;
  std::vector<int> physical;      // compact qubit -> physical qubit
  std::vector<int> final_qubit;   // logical qubit -> compact qubit after the circuit
};
CompactCircuit compact(const TranspileReport& report);

struct StudyRow {
  Family family;
  int width = 0;
  int instances = 0;
  double mean_depth = 0.0;
  double se_depth = 0.0;
  double mean_cnot = 0.0;
  double se_cnot = 0.0;
};

/// H-HHL circuit of total width `width` (width - 3 vector qubits, 2 phase
/// qubits, 1 ancilla) for the given family instance.
Circuit hhl_benchmark_circuit(Family family, int width, std::uint64_t seed);

/// Mean and standard error of routed depth and CNOT count over `instances`
/// random H-HHL circuits per (family, width).  Instance i uses seed
/// mix_seed(seed, i); widths too small for a family are skipped.
std::vector<StudyRow> depth_study(const std::vector<Family>& families, const std::vector<int>& widths,
                                  const CouplingMap& map, int instances = 140, int restarts = 20,
                                  std::uint64_t seed = 0);

std::string study_csv(const std::vector<StudyRow>& rows);

}  // namespace hhlb
