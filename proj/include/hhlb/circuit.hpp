#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hhlb/gate_math.hpp"
#include "hhlb/types.hpp"
#include "json.hpp"

namespace hhlb {

enum class GateKind { SQ, CNOT };

/// Either an arbitrary single-qubit unitary (stored as U3 angles plus a
/// global phase) or a CNOT.
struct Gate {
  GateKind kind = GateKind::SQ;
  int target = 0;
  int control = -1;  // CNOT only
  U3Angles angles;

  static Gate sq(int target, const Matrix2c& u);
  static Gate sq(int target, const U3Angles& a);
  static Gate cnot(int control, int target);

  bool is_cnot() const { return kind == GateKind::CNOT; }
  Matrix2c matrix() const;  // SQ only
  Gate dagger() const;
};

class Circuit {
 public:
  explicit Circuit(int n_qubits = 0);

  int n_qubits() const { return n_qubits_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  Circuit& add(const Gate& g);
  Circuit& sq(int target, const Matrix2c& u) { return add(Gate::sq(target, u)); }
  Circuit& cnot(int control, int target) { return add(Gate::cnot(control, target)); }
  /// Appends all gates of `other` (which must not be wider than this).
  Circuit& append(const Circuit& other);

  Circuit inverse() const;
  /// Same gates on a wider register.
  Circuit widened(int n_qubits) const;
  /// Qubit q of this circuit becomes mapping[q] of a circuit on n_qubits.
  Circuit remapped(std::span<const int> mapping, int n_qubits) const;

  std::size_t cnot_count() const;
  std::size_t sq_count() const;
  /// Longest chain of gate layers; gates on disjoint qubits share a layer.
  std::size_t depth() const;

  nlohmann::ordered_json tags;

 private:
  int n_qubits_;
  std::vector<Gate> gates_;
};

nlohmann::ordered_json to_json(const Circuit& c);
Circuit circuit_from_json(const nlohmann::json& j);

/// Dense unitary of the ordered gate product (n <= 14).
MatrixXc unitary_of(const Circuit& c);

// -- building blocks on {SQ, CNOT} ------------------------------------------

/// Controlled single-qubit unitary.  Uses no CNOT when u is a scalar, one CNOT
/// when u is proportional to an involution, and two CNOTs otherwise.
void append_controlled_sq(Circuit& c, int control, int target, const Matrix2c& u);
/// Six-CNOT Toffoli.
void append_toffoli(Circuit& c, int control_a, int control_b, int target);

// -- unitary families ---------------------------------------------------------

enum class Family { TP1, TP2, NTP };

const char* to_string(Family f);
Family family_from_string(const std::string& s);
int min_width(Family f);

/// Eigen-structure of a generated unitary.  Eigenvector `label` is
/// eigenbasis|label>, with eigenphase numerator(label) / 2^p_full in (0, 1).
class Spectrum {
 public:
  /// Rule used by the generated families: the U_c bit picks one of two
  /// numerators and the parity of label & sign_mask adds 2^(p_full-1).
  Spectrum(int n_qubits, int p_full, int uc_bit, std::array<std::uint64_t, 2> uc_numerators,
           std::uint64_t sign_mask, Circuit eigenbasis);
  /// Explicit per-label table.
  static Spectrum from_table(int p_full, std::vector<std::uint64_t> numerators,
                             std::optional<Circuit> eigenbasis = std::nullopt);

  int n_qubits() const { return n_qubits_; }
  int p_full() const { return p_full_; }
  std::uint64_t numerator(std::uint64_t label) const;
  double phase(std::uint64_t label) const;
  /// Sorted distinct numerators.
  std::vector<std::uint64_t> distinct_numerators() const;
  const Circuit& eigenbasis() const { return eigenbasis_; }

  struct Entry {
    double phase;
    std::uint64_t numerator;
    std::uint64_t label;
  };
  /// One entry per eigenvector (n <= 24).
  std::vector<Entry> entries() const;

 private:
  Spectrum() = default;
  int n_qubits_ = 0;
  int p_full_ = 0;
  int uc_bit_ = 0;
  std::array<std::uint64_t, 2> uc_numerators_{};
  std::uint64_t sign_mask_ = 0;
  std::vector<std::uint64_t> table_;
  Circuit eigenbasis_;
};

struct FamilyInstance {
  Circuit unitary;
  Spectrum spectrum;
};

/// Random member of a unitary family.  Every factor except the correcting
/// gate is an involution, so U^2 = U_c^2 (x) I and the spectrum is
/// {1/8, 3/8, 5/8, 7/8} (or {1/8, 3/8} for a single qubit).
FamilyInstance gen_family(Family family, int n_vector_qubits, std::uint64_t seed);

/// Correcting-gate placement recorded by gen_family.
struct CorrectingGate {
  int qubit;
  Matrix2c matrix;
};
CorrectingGate correcting_gate(const Circuit& family_circuit);

/// Controlled U^(2^s_exp).  For s_exp = 0 the control is attached gate by
/// gate (controlled SQ gates, Toffolis for CNOTs).  For s_exp >= 1 the power
/// collapses to U_c^(2^s_exp) on the correcting-gate qubit; circuits without
/// correcting-gate metadata repeat the s_exp = 0 construction 2^s_exp times.
/// The result has width max(n, control + 1).
Circuit controlled_power(const Circuit& family_circuit, int s_exp, int control);

}  // namespace hhlb
