#include "hhlb/circuit.hpp"

#include <algorithm>
#include <bit>
#include <set>

#include "hhlb/kernels.hpp"

namespace hhlb {

// -- Gate ----------------------------------------------------------------------

Gate Gate::sq(int target, const Matrix2c& u) { return sq(target, zyz_decompose(u)); }

Gate Gate::sq(int target, const U3Angles& a) {
  Gate g;
  g.kind = GateKind::SQ;
  g.target = target;
  g.angles = a;
  return g;
}

Gate Gate::cnot(int control, int target) {
  Gate g;
  g.kind = GateKind::CNOT;
  g.control = control;
  g.target = target;
  return g;
}

Matrix2c Gate::matrix() const { return u3_matrix(angles); }

Gate Gate::dagger() const {
  if (is_cnot()) return *this;
  return sq(target, Matrix2c(matrix().adjoint()));
}

// -- Circuit -------------------------------------------------------------------

Circuit::Circuit(int n_qubits) : tags(nlohmann::ordered_json::object()), n_qubits_(n_qubits) {
  if (n_qubits < 0) throw Error(ErrorKind::InvalidArgument, "negative circuit width");
}

Circuit& Circuit::add(const Gate& g) {
  if (g.target < 0 || g.target >= n_qubits_) {
    throw Error(ErrorKind::InvalidArgument, "gate target " + std::to_string(g.target) + " outside circuit");
  }
  if (g.is_cnot()) {
    if (g.control < 0 || g.control >= n_qubits_) {
      throw Error(ErrorKind::InvalidArgument, "gate control outside circuit");
    }
    if (g.control == g.target) throw Error(ErrorKind::InvalidArgument, "CNOT control equals target");
  }
  gates_.push_back(g);
  return *this;
}

Circuit& Circuit::append(const Circuit& other) {
  if (other.n_qubits() > n_qubits_) throw Error(ErrorKind::InvalidArgument, "appending a wider circuit");
  gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
  return *this;
}

Circuit Circuit::inverse() const {
  Circuit out(n_qubits_);
  out.tags = tags;
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) out.add(it->dagger());
  return out;
}

Circuit Circuit::widened(int n_qubits) const {
  if (n_qubits < n_qubits_) throw Error(ErrorKind::InvalidArgument, "cannot narrow a circuit");
  Circuit out(n_qubits);
  out.tags = tags;
  out.gates_ = gates_;
  return out;
}

Circuit Circuit::remapped(std::span<const int> mapping, int n_qubits) const {
  if (static_cast<int>(mapping.size()) < n_qubits_) throw Error(ErrorKind::InvalidArgument, "mapping too short");
  Circuit out(n_qubits);
  out.tags = tags;
  for (Gate g : gates_) {
    g.target = mapping[static_cast<std::size_t>(g.target)];
    if (g.is_cnot()) g.control = mapping[static_cast<std::size_t>(g.control)];
    out.add(g);
  }
  return out;
}

std::size_t Circuit::cnot_count() const {
  return static_cast<std::size_t>(std::count_if(gates_.begin(), gates_.end(), [](const Gate& g) { return g.is_cnot(); }));
}

std::size_t Circuit::sq_count() const { return gates_.size() - cnot_count(); }

std::size_t Circuit::depth() const {
  std::vector<std::size_t> level(static_cast<std::size_t>(n_qubits_), 0);
  std::size_t d = 0;
  for (const Gate& g : gates_) {
    auto& lt = level[static_cast<std::size_t>(g.target)];
    if (g.is_cnot()) {
      auto& lc = level[static_cast<std::size_t>(g.control)];
      const std::size_t l = std::max(lt, lc) + 1;
      lt = lc = l;
      d = std::max(d, l);
    } else {
      d = std::max(d, ++lt);
    }
  }
  return d;
}

nlohmann::ordered_json to_json(const Circuit& c) {
  nlohmann::ordered_json j;
  j["n_qubits"] = c.n_qubits();
  auto gates = nlohmann::ordered_json::array();
  for (const Gate& g : c.gates()) {
    nlohmann::ordered_json jg;
    if (g.is_cnot()) {
      jg["kind"] = "CNOT";
      jg["targets"] = {g.control, g.target};
      jg["params"] = nlohmann::ordered_json::array();
    } else {
      jg["kind"] = "SQ";
      jg["targets"] = {g.target};
      jg["params"] = {g.angles.theta, g.angles.phi, g.angles.lambda, g.angles.gamma};
    }
    gates.push_back(std::move(jg));
  }
  j["gates"] = std::move(gates);
  j["tags"] = c.tags;
  return j;
}

Circuit circuit_from_json(const nlohmann::json& j) {
  Circuit c(j.at("n_qubits").get<int>());
  for (const auto& jg : j.at("gates")) {
    const auto kind = jg.at("kind").get<std::string>();
    const auto& t = jg.at("targets");
    if (kind == "CNOT") {
      c.cnot(t.at(0).get<int>(), t.at(1).get<int>());
    } else if (kind == "SQ") {
      const auto& p = jg.at("params");
      c.add(Gate::sq(t.at(0).get<int>(), U3Angles{p.at(0).get<double>(), p.at(1).get<double>(),
                                                  p.at(2).get<double>(), p.at(3).get<double>()}));
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown gate kind '" + kind + "'");
    }
  }
  if (j.contains("tags")) c.tags = j.at("tags");
  return c;
}

MatrixXc unitary_of(const Circuit& c) {
  if (c.n_qubits() > 14) throw Error(ErrorKind::Resource, "unitary_of: width above 14 qubits");
  const auto d = static_cast<Index>(dim_of(c.n_qubits()));
  MatrixXc u = MatrixXc::Identity(d, d);
  kernels::apply_circuit(u, c);
  return u;
}

// -- building blocks -------------------------------------------------------------

void append_controlled_sq(Circuit& c, int control, int target, const Matrix2c& u) {
  constexpr double tol = 1e-10;
  if ((u - u(0, 0) * Matrix2c::Identity()).cwiseAbs().maxCoeff() < tol) {
    const double alpha = std::arg(u(0, 0));
    if (std::abs(alpha) > 1e-12) c.sq(control, mat::phase(alpha));
    return;
  }
  if (std::abs(u.trace()) < tol) {
    // u = e^{i alpha} P with P a Hermitian involution: one CNOT in P's frame.
    const double alpha = std::arg(-u.determinant()) / 2.0;
    Matrix2c p = std::polar(1.0, -alpha) * u;
    p = (0.5 * (p + p.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Matrix2c> es(p);
    Matrix2c w;
    w.col(0) = es.eigenvectors().col(1);  // +1
    w.col(1) = es.eigenvectors().col(0);  // -1
    const Matrix2c v = w * mat::h();
    c.sq(target, v.adjoint());
    c.cnot(control, target);
    c.sq(target, v);
    if (std::abs(alpha) > 1e-12) c.sq(control, mat::phase(alpha));
    return;
  }
  const U3Angles a = zyz_decompose(u);
  const double alpha = a.gamma + (a.phi + a.lambda) / 2.0;
  const double beta = a.phi;
  const double gam = a.theta;
  const double delta = a.lambda;
  c.sq(target, mat::rz((delta - beta) / 2.0));
  c.cnot(control, target);
  c.sq(target, Matrix2c(mat::ry(-gam / 2.0) * mat::rz(-(delta + beta) / 2.0)));
  c.cnot(control, target);
  c.sq(target, Matrix2c(mat::rz(beta) * mat::ry(gam / 2.0)));
  if (std::abs(std::remainder(alpha, kTwoPi)) > 1e-12) c.sq(control, mat::phase(alpha));
}

void append_toffoli(Circuit& c, int a, int b, int t) {
  c.sq(t, mat::h());
  c.cnot(b, t);
  c.sq(t, mat::tdg());
  c.cnot(a, t);
  c.sq(t, mat::t());
  c.cnot(b, t);
  c.sq(t, mat::tdg());
  c.cnot(a, t);
  c.sq(b, mat::t());
  c.sq(t, mat::t());
  c.sq(t, mat::h());
  c.cnot(a, b);
  c.sq(a, mat::t());
  c.sq(b, mat::tdg());
  c.cnot(a, b);
}

// -- families --------------------------------------------------------------------

const char* to_string(Family f) {
  switch (f) {
    case Family::TP1: return "TP1";
    case Family::TP2: return "TP2";
    case Family::NTP: return "NTP";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  std::string u;
  for (char ch : s) u += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (u == "TP1") return Family::TP1;
  if (u == "TP2") return Family::TP2;
  if (u == "NTP") return Family::NTP;
  throw Error(ErrorKind::InvalidArgument, "unknown family '" + s + "'");
}

int min_width(Family f) { return f == Family::TP1 ? 1 : 2; }

Spectrum::Spectrum(int n_qubits, int p_full, int uc_bit, std::array<std::uint64_t, 2> uc_numerators,
                   std::uint64_t sign_mask, Circuit eigenbasis)
    : n_qubits_(n_qubits),
      p_full_(p_full),
      uc_bit_(uc_bit),
      uc_numerators_(uc_numerators),
      sign_mask_(sign_mask),
      eigenbasis_(std::move(eigenbasis)) {}

Spectrum Spectrum::from_table(int p_full, std::vector<std::uint64_t> numerators, std::optional<Circuit> eigenbasis) {
  const std::size_t d = numerators.size();
  if (d == 0 || (d & (d - 1)) != 0) throw Error(ErrorKind::Dimension, "spectrum table size must be 2^n");
  const int n = std::countr_zero(d);
  for (auto k : numerators) {
    if (k == 0 || k >= dim_of(p_full)) {
      throw Error(ErrorKind::Singular, "eigenphase numerator must lie in (0, 2^p_full)");
    }
  }
  Spectrum s;
  s.n_qubits_ = n;
  s.p_full_ = p_full;
  s.table_ = std::move(numerators);
  s.eigenbasis_ = eigenbasis ? std::move(*eigenbasis) : Circuit(n);
  if (s.eigenbasis_.n_qubits() != n) throw Error(ErrorKind::Dimension, "eigenbasis width mismatch");
  return s;
}

std::uint64_t Spectrum::numerator(std::uint64_t label) const {
  if (!table_.empty()) return table_.at(label);
  const std::uint64_t mod = dim_of(p_full_);
  std::uint64_t k = uc_numerators_[static_cast<std::size_t>(bit_of(label, uc_bit_))];
  if (std::popcount(label & sign_mask_) & 1) k += mod / 2;
  return k % mod;
}

double Spectrum::phase(std::uint64_t label) const {
  return static_cast<double>(numerator(label)) / static_cast<double>(dim_of(p_full_));
}

std::vector<std::uint64_t> Spectrum::distinct_numerators() const {
  std::set<std::uint64_t> out;
  if (!table_.empty()) {
    out.insert(table_.begin(), table_.end());
  } else {
    const std::uint64_t mod = dim_of(p_full_);
    for (auto k : uc_numerators_) {
      out.insert(k % mod);
      if (sign_mask_ != 0) out.insert((k + mod / 2) % mod);
    }
  }
  return {out.begin(), out.end()};
}

std::vector<Spectrum::Entry> Spectrum::entries() const {
  if (n_qubits_ > 24) throw Error(ErrorKind::Resource, "spectrum enumeration limited to 24 qubits");
  std::vector<Entry> out;
  out.reserve(dim_of(n_qubits_));
  for (std::uint64_t l = 0; l < dim_of(n_qubits_); ++l) out.push_back({phase(l), numerator(l), l});
  return out;
}

namespace {

constexpr int kFamilyPhaseBits = 3;
constexpr std::array<std::uint64_t, 2> kCorrectingNumerators{1, 3};

// diag(e^{2 pi i 1/8}, e^{2 pi i 3/8})
Matrix2c correcting_diagonal() {
  Matrix2c d = Matrix2c::Zero();
  d(0, 0) = std::polar(1.0, kTwoPi * 1.0 / 8.0);
  d(1, 1) = std::polar(1.0, kTwoPi * 3.0 / 8.0);
  return d;
}

// Palindromic block  half . middle . reverse(half).  All gates are
// self-inverse, so the block is an involution whose eigenvectors are
// reverse(half) applied to the middle involutions' eigenvectors.
struct Block {
  std::vector<Gate> half;
  std::vector<std::pair<int, Axis>> middle;
};

class FamilyBuilder {
 public:
  FamilyBuilder(int n, Rng& rng) : n_(n), rng_(rng), unitary_(n), prep_(n) {}

  Gate involution_gate(int q) { return Gate::sq(q, involution(random_axis(rng_))); }

  void add_block(const Block& b) { blocks_.push_back(b); }

  // Correcting gate as its own tensor factor: U_c = V diag V^dagger.
  void standalone_correcting_gate() {
    const Matrix2c v = random_su2(rng_);
    uc_ = v * correcting_diagonal() * v.adjoint();
    unitary_.sq(0, uc_);
    prep_.sq(0, v);
  }

  // Correcting gate U_c = E diag E folded into a block whose half starts
  // with the involution E on qubit 0; qubit 0 only ever controls inside it.
  Gate merged_correcting_gate_start() {
    e_ = involution(random_axis(rng_));
    uc_ = e_ * correcting_diagonal() * e_;
    merged_ = true;
    return Gate::sq(0, e_);
  }

  FamilyInstance finish(Family family, std::uint64_t seed, int n_vector_qubits) {
    std::uint64_t sign_mask = 0;
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
      const Block& b = blocks_[bi];
      for (const Gate& g : b.half) unitary_.add(g);
      for (const auto& [q, axis] : b.middle) {
        unitary_.sq(q, involution(axis));
        sign_mask |= std::uint64_t{1} << q;
      }
      for (auto it = b.half.rbegin(); it != b.half.rend(); ++it) {
        const bool last_merged = merged_ && bi == 0 && std::next(it) == b.half.rend();
        if (last_merged) {
          unitary_.sq(0, Matrix2c(e_ * correcting_diagonal()));
        } else {
          unitary_.add(*it);
        }
      }
      for (const auto& [q, axis] : b.middle) prep_.sq(q, involution_eigenbasis(axis));
      for (auto it = b.half.rbegin(); it != b.half.rend(); ++it) prep_.add(*it);
    }

    const U3Angles a = zyz_decompose(uc_);
    unitary_.tags["family"] = to_string(family);
    unitary_.tags["n_vector_qubits"] = n_vector_qubits;
    unitary_.tags["seed"] = seed;
    unitary_.tags["uc_qubit"] = 0;
    unitary_.tags["uc"] = {a.theta, a.phi, a.lambda, a.gamma};
    prep_.tags["role"] = "eigenbasis";
    Spectrum spec(n_, kFamilyPhaseBits, 0, kCorrectingNumerators, sign_mask, std::move(prep_));
    return {std::move(unitary_), std::move(spec)};
  }

 private:
  int n_;
  Rng& rng_;
  Circuit unitary_;
  Circuit prep_;
  std::vector<Block> blocks_;
  Matrix2c uc_ = Matrix2c::Identity();
  Matrix2c e_ = Matrix2c::Identity();
  bool merged_ = false;
};

// Two-qubit cluster on (a, b): O_a, CNOT(a,b), M_a M_b, CNOT(a,b), O_a.
Block pair_block(int a, int b, FamilyBuilder& fb, Rng& rng) {
  Block blk;
  blk.half.push_back(fb.involution_gate(a));
  blk.half.push_back(Gate::cnot(a, b));
  blk.middle = {{a, random_axis(rng)}, {b, random_axis(rng)}};
  return blk;
}

}  // namespace

FamilyInstance gen_family(Family family, int n, std::uint64_t seed) {
  if (n < min_width(family)) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(to_string(family)) + " needs at least " + std::to_string(min_width(family)) + " qubits");
  }
  if (n > 62) throw Error(ErrorKind::Resource, "family width above 62 qubits");
  Rng rng(seed, static_cast<std::uint64_t>(family) * 1024 + static_cast<std::uint64_t>(n));
  FamilyBuilder fb(n, rng);

  switch (family) {
    case Family::TP1: {
      // n single-qubit gates: U_c and n-1 involutions.
      fb.standalone_correcting_gate();
      for (int q = 1; q < n; ++q) {
        Block b;
        b.middle = {{q, random_axis(rng)}};
        fb.add_block(b);
      }
      break;
    }
    case Family::TP2: {
      // 2n-1 single-qubit gates in two-qubit clusters.
      int first = 1;
      if (n % 2 == 0) {
        Block b;
        b.half.push_back(fb.merged_correcting_gate_start());
        b.half.push_back(Gate::cnot(0, 1));
        b.middle = {{1, random_axis(rng)}};
        fb.add_block(b);
        first = 2;
      } else {
        fb.standalone_correcting_gate();
      }
      for (int a = first; a + 1 < n; a += 2) fb.add_block(pair_block(a, a + 1, fb, rng));
      break;
    }
    case Family::NTP: {
      // Single CNOT-ladder cluster over all qubits; 2n-2 single-qubit gates
      // for n >= 3 (n = 2 needs an outer layer to stay above TP2).
      int n_middle = 0;
      int n_outer = 0;
      if (n == 2) {
        n_middle = 1;
        n_outer = 1;
      } else if (n % 2 == 1) {
        n_middle = n - 1;
        n_outer = (n - 3) / 2;
      } else {
        n_middle = n - 2;
        n_outer = (n - 2) / 2;
      }
      Block b;
      b.half.push_back(fb.merged_correcting_gate_start());
      for (int q = 1; q <= n_outer; ++q) b.half.push_back(fb.involution_gate(q));
      for (int q = 0; q + 1 < n; ++q) b.half.push_back(Gate::cnot(q, q + 1));
      for (int q = 1; q <= n_middle; ++q) b.middle.push_back({q, random_axis(rng)});
      fb.add_block(b);
      break;
    }
  }
  return fb.finish(family, seed, n);
}

CorrectingGate correcting_gate(const Circuit& fc) {
  if (!fc.tags.contains("uc") || !fc.tags.contains("uc_qubit")) {
    throw Error(ErrorKind::InvalidArgument, "circuit carries no correcting-gate metadata (not from gen_family)");
  }
  const auto& p = fc.tags["uc"];
  const U3Angles a{p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>(), p.at(3).get<double>()};
  return {fc.tags["uc_qubit"].get<int>(), u3_matrix(a)};
}

Circuit controlled_power(const Circuit& fc, int s_exp, int control) {
  if (s_exp < 0) throw Error(ErrorKind::InvalidArgument, "negative power exponent");
  if (control >= 0 && control < fc.n_qubits()) {
    throw Error(ErrorKind::InvalidArgument, "control qubit overlaps the unitary's qubits");
  }
  if (control < 0) throw Error(ErrorKind::InvalidArgument, "negative control index");
  Circuit out(std::max(fc.n_qubits(), control + 1));
  out.tags["controlled_power"] = s_exp;
  const bool has_uc = fc.tags.contains("uc");
  if (s_exp == 0 || !has_uc) {
    // without the collapse the power is the controlled circuit repeated 2^s times
    if (s_exp > 16) throw Error(ErrorKind::Resource, "controlled power too large without a correcting gate");
    for (std::uint64_t rep = 0; rep < dim_of(s_exp); ++rep) {
      for (const Gate& g : fc.gates()) {
        if (g.is_cnot()) {
          append_toffoli(out, control, g.control, g.target);
        } else {
          append_controlled_sq(out, control, g.target, g.matrix());
        }
      }
    }
    return out;
  }
  const CorrectingGate cg = correcting_gate(fc);
  Matrix2c power = cg.matrix;
  for (int i = 0; i < s_exp; ++i) power = (power * power).eval();
  append_controlled_sq(out, control, cg.qubit, power);
  return out;
}

}  // namespace hhlb
