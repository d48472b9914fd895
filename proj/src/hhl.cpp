#include "hhlb/hhl.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "hhlb/kernels.hpp"
#include "hhlb/sim.hpp"

namespace hhlb {

// -- classical oracle ---------------------------------------------------------

EigenPhases eigenphases(const MatrixXc& u) {
  if (u.rows() != u.cols() || u.rows() == 0) throw Error(ErrorKind::Dimension, "matrix must be square");
  if (!is_unitary(u, 1e-8)) throw Error(ErrorKind::InvalidArgument, "matrix is not unitary within 1e-8");
  Eigen::ComplexSchur<MatrixXc> schur(u);
  const MatrixXc& t = schur.matrixT();
  const Index d = u.rows();
  std::vector<std::pair<double, Index>> order;
  for (Index i = 0; i < d; ++i) {
    double ph = std::arg(t(i, i)) / kTwoPi;
    if (ph < 0) ph += 1.0;
    order.emplace_back(ph, i);
  }
  std::stable_sort(order.begin(), order.end());
  EigenPhases out;
  out.phases.resize(d);
  out.vectors.resize(d, d);
  for (Index i = 0; i < d; ++i) {
    out.phases[i] = order[static_cast<std::size_t>(i)].first;
    out.vectors.col(i) = schur.matrixU().col(order[static_cast<std::size_t>(i)].second);
  }
  return out;
}

StateVector classical_solve(const MatrixXc& u, const StateVector& b) {
  if (u.rows() != b.dim()) throw Error(ErrorKind::Dimension, "matrix and vector sizes differ");
  const EigenPhases ep = eigenphases(u);
  for (Index i = 0; i < ep.phases.size(); ++i) {
    if (ep.phases[i] < 1e-10 || ep.phases[i] > 1.0 - 1e-10) {
      throw Error(ErrorKind::Singular, "eigenphase indistinguishable from 0: log U is singular");
    }
  }
  const VectorXc coeff = ep.vectors.adjoint() * b.amps();
  const VectorXc x = ep.vectors * (coeff.array() / ep.phases.array().cast<cplx>()).matrix();
  return StateVector(b.n_qubits(), x).normalized();
}

StateVector classical_solve(const Spectrum& spectrum, const StateVector& b) {
  if (spectrum.n_qubits() != b.n_qubits()) throw Error(ErrorKind::Dimension, "spectrum and vector widths differ");
  VectorXc v = b.amps();
  kernels::apply_circuit(v, spectrum.eigenbasis().inverse());
  for (Index l = 0; l < v.size(); ++l) {
    const double ph = spectrum.phase(static_cast<std::uint64_t>(l));
    if (ph < 1e-10) throw Error(ErrorKind::Singular, "zero eigenphase: log U is singular");
    v[l] /= ph;
  }
  kernels::apply_circuit(v, spectrum.eigenbasis());
  return StateVector(b.n_qubits(), v).normalized();
}

// -- phase register planning ---------------------------------------------------

PhasePlan plan_phase_register(const Spectrum& spectrum, int p, bool hybrid) {
  const int big_p = spectrum.p_full();
  const auto nums = spectrum.distinct_numerators();
  PhasePlan plan;
  plan.p_full = big_p;

  if (!hybrid) {
    if (p <= 0) p = big_p;
    if (p < big_p) {
      throw Error(ErrorKind::PhaseRegisterTooSmall, "full QPE needs p >= " + std::to_string(big_p) + " phase qubits");
    }
    plan.p = p;
    plan.window_start = big_p - p;
    return plan;
  }

  std::vector<int> constant;
  int v_lo = -1, v_hi = -1;
  for (int pos = 0; pos < big_p; ++pos) {
    const int first = bit_of(nums.front(), pos);
    const bool same = std::all_of(nums.begin(), nums.end(), [&](std::uint64_t k) { return bit_of(k, pos) == first; });
    if (same) {
      constant.push_back(pos);
    } else {
      if (v_lo < 0) v_lo = pos;
      v_hi = pos;
    }
  }
  if (constant.empty()) {
    throw Error(ErrorKind::NoConstantBit, "hybrid reduction needs a bit position constant across the spectrum");
  }
  // Constant low-order bits are eliminated and the window runs to the top
  // bit.  With no constant low bit, constant high-order bits are dropped instead.
  int lo = 0, hi = big_p - 1;
  if (v_lo < 0) {
    lo = big_p - 1;
  } else if (v_lo > 0) {
    lo = v_lo;
  } else {
    hi = v_hi;
  }
  if (lo == 0 && hi == big_p - 1) {
    throw Error(ErrorKind::NoConstantBit, "no constant bit lies outside the varying bits");
  }
  const int need = hi - lo + 1;
  if (p > 0 && p < need) {
    throw Error(ErrorKind::PhaseRegisterTooSmall,
                "hybrid register needs " + std::to_string(need) + " bits but p = " + std::to_string(p));
  }
  plan.p = need;
  plan.window_start = lo;
  for (int pos : constant) {
    if (pos >= lo && pos <= hi) continue;
    const int value = bit_of(nums.front(), pos);
    plan.fixed_bits[pos] = value;
    if (value) {
      plan.fixed_value |= std::uint64_t{1} << pos;
      if (pos < lo) plan.low_fixed |= std::uint64_t{1} << pos;
    }
  }
  return plan;
}

double plan_phase(const PhasePlan& plan, std::uint64_t m) {
  const double window = std::ldexp(static_cast<double>(m), plan.window_start);
  return (static_cast<double>(plan.fixed_value) + window) / std::ldexp(1.0, plan.p_full);
}

// -- circuits --------------------------------------------------------------------

namespace {

void append_controlled_phase(Circuit& c, int a, int b, double theta) {
  c.sq(a, mat::phase(theta / 2));
  c.cnot(a, b);
  c.sq(b, mat::phase(-theta / 2));
  c.cnot(a, b);
  c.sq(b, mat::phase(theta / 2));
}

}  // namespace

Circuit build_qpe(const Circuit& unitary, const PhasePlan& plan, const std::vector<int>& phase_qubits, int width) {
  const int p = plan.p;
  if (p < 1) throw Error(ErrorKind::PhaseRegisterTooSmall, "QPE needs at least one phase qubit");
  if (static_cast<int>(phase_qubits.size()) != p) throw Error(ErrorKind::InvalidArgument, "phase qubit count differs from p");
  const int e0 = plan.p_full - plan.window_start - p;
  if (e0 < 0) throw Error(ErrorKind::InvalidArgument, "phase window extends above the eigenphase bits");

  Circuit c(width);
  for (int q : phase_qubits) c.sq(q, mat::h());
  // phase_qubits[i] receives V^(2^j), j = p-1-i, with V = U^(2^e0)
  for (int i = 0; i < p; ++i) {
    const int j = p - 1 - i;
    const int control = phase_qubits[static_cast<std::size_t>(i)];
    c.append(controlled_power(unitary, e0 + j, control).widened(width));
    if (plan.low_fixed != 0) {
      // remove the known low bits: their phase is low / 2^(start+p) per power of V
      const double f = std::ldexp(static_cast<double>(plan.low_fixed), -(plan.window_start + p) + j);
      c.sq(control, mat::phase(-kTwoPi * (f - std::floor(f))));
    }
  }
  // swapless inverse QFT, least significant bit first
  for (int j = p - 1; j >= 0; --j) {
    const int qj = phase_qubits[static_cast<std::size_t>(p - 1 - j)];
    for (int l = p - 1; l > j; --l) {
      const int ql = phase_qubits[static_cast<std::size_t>(p - 1 - l)];
      append_controlled_phase(c, ql, qj, -kTwoPi / std::ldexp(1.0, l - j + 1));
    }
    c.sq(qj, mat::h());
  }
  return c;
}

void append_multiplexed_ry(Circuit& c, const std::vector<int>& controls, int target, const std::vector<double>& angles) {
  const int k = static_cast<int>(controls.size());
  const std::uint64_t n = dim_of(k);
  if (angles.size() != n) throw Error(ErrorKind::InvalidArgument, "multiplexor needs 2^k angles");
  if (k == 0) {
    c.sq(target, mat::ry(angles[0]));
    return;
  }
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t gray = i ^ (i >> 1);
    double beta = 0.0;
    for (std::uint64_t m = 0; m < n; ++m) {
      beta += (std::popcount(m & gray) & 1) ? -angles[m] : angles[m];
    }
    beta /= static_cast<double>(n);
    c.sq(target, mat::ry(beta));
    const int flip = i + 1 < n ? std::countr_zero(i + 1) : k - 1;
    c.cnot(controls[static_cast<std::size_t>(flip)], target);
  }
}

HHLProgram build_hhl(const Circuit& unitary, const Spectrum& spectrum, int p, bool hybrid, double c_rot) {
  const int nv = spectrum.n_qubits();
  if (unitary.n_qubits() != nv) throw Error(ErrorKind::Dimension, "unitary and spectrum widths differ");
  const PhasePlan plan = plan_phase_register(spectrum, p, hybrid);

  HHLLayout layout;
  layout.plan = plan;
  layout.p = plan.p;
  layout.fixed_bits = plan.fixed_bits;
  for (int q = 0; q < nv; ++q) layout.vector_qubits.push_back(q);
  for (int i = 0; i < plan.p; ++i) layout.phase_qubits.push_back(nv + i);
  layout.ancilla = nv + plan.p;

  const auto nums = spectrum.distinct_numerators();
  const double lambda_min = std::ldexp(static_cast<double>(nums.front()), -spectrum.p_full());
  if (c_rot <= 0.0) c_rot = lambda_min;
  if (c_rot > lambda_min + 1e-15) throw Error(ErrorKind::InvalidArgument, "c_rot must not exceed the smallest eigenphase");
  layout.c_rot = c_rot;

  const int width = layout.n_qubits();
  const Circuit qpe = build_qpe(unitary, plan, layout.phase_qubits, width);

  std::vector<double> angles(dim_of(plan.p));
  for (std::uint64_t m = 0; m < angles.size(); ++m) {
    const double lambda = plan_phase(plan, m);
    angles[m] = lambda > 0.0 ? 2.0 * std::asin(std::min(1.0, c_rot / lambda)) : 0.0;
  }

  HHLProgram prog{Circuit(width), layout, spectrum, qpe.size()};
  prog.circuit.append(qpe);
  append_multiplexed_ry(prog.circuit, layout.phase_qubits, layout.ancilla, angles);
  prog.circuit.append(qpe.inverse());
  prog.circuit.tags = unitary.tags;
  prog.circuit.tags["algorithm"] = hybrid ? "H-HHL" : "HHL";
  prog.circuit.tags["layout"] = to_json(layout);
  return prog;
}

// -- execution ---------------------------------------------------------------------

Backend default_backend() {
  return [](const Circuit& c, const StateVector& s) { return schrodinger_run(c, s); };
}

SolutionReport run_hhl(const HHLProgram& program, const Backend& backend) {
  const HHLLayout& lay = program.layout;
  const int width = lay.n_qubits();
  if (program.circuit.n_qubits() != width) throw Error(ErrorKind::Dimension, "circuit width does not match the layout");
  const StateVector out = backend(program.circuit, StateVector::basis(width));

  double success = 0.0;
  const std::uint64_t abit = std::uint64_t{1} << lay.ancilla;
  for (Index i = 0; i < out.dim(); ++i) {
    if (static_cast<std::uint64_t>(i) & abit) success += std::norm(out[i]);
  }
  if (success < 1e-12) throw Error(ErrorKind::ZeroProbability, "ancilla success probability below 1e-12");

  const int nv = static_cast<int>(lay.vector_qubits.size());
  VectorXc x(static_cast<Index>(dim_of(nv)));
  for (Index v = 0; v < x.size(); ++v) x[v] = out[static_cast<Index>(abit) | v];
  const double kept = x.squaredNorm() / success;
  const double residual = std::max(0.0, 1.0 - kept);
  if (residual > 1e-9) {
    throw Error(ErrorKind::Degenerate, "phase register not restored to |0..0> (residual " + std::to_string(residual) + ")");
  }

  SolutionReport rep{StateVector(nv, x).normalized(), success, classical_solve(program.spectrum, StateVector::basis(nv)),
                     0.0, residual};
  rep.fidelity = std::clamp(state_fidelity(rep.solution_state, rep.oracle_state), 0.0, 1.0);
  return rep;
}

ProbDist qpe_only(const Circuit& unitary, const Spectrum& spectrum, int p, std::uint64_t eigen_label) {
  if (p < 1) throw Error(ErrorKind::PhaseRegisterTooSmall, "QPE needs at least one phase qubit");
  const int nv = spectrum.n_qubits();
  if (unitary.n_qubits() != nv) throw Error(ErrorKind::Dimension, "unitary and spectrum widths differ");
  if (eigen_label >= dim_of(nv)) throw Error(ErrorKind::InvalidArgument, "eigenvector label out of range");
  const int big_p = spectrum.p_full();
  const std::uint64_t k = spectrum.numerator(eigen_label);
  if (p < big_p && (k & ((std::uint64_t{1} << (big_p - p)) - 1)) != 0) {
    throw Error(ErrorKind::InvalidArgument, "eigenphase is not dyadic at " + std::to_string(p) + " bits");
  }
  PhasePlan plan;
  plan.p_full = big_p;
  plan.p = p;
  plan.window_start = big_p - p;
  std::vector<int> phase_qubits;
  for (int i = 0; i < p; ++i) phase_qubits.push_back(nv + i);

  Circuit c(nv + p);
  for (int q = 0; q < nv; ++q) {
    if (bit_of(eigen_label, q)) c.sq(q, mat::x());
  }
  c.append(spectrum.eigenbasis());
  c.append(build_qpe(unitary, plan, phase_qubits, nv + p));
  const StateVector out = schrodinger_run(c, StateVector::basis(nv + p));
  Eigen::VectorXd dist = Eigen::VectorXd::Zero(static_cast<Index>(dim_of(p)));
  for (Index i = 0; i < out.dim(); ++i) dist[i >> nv] += std::norm(out[i]);
  return ProbDist(dist);
}

nlohmann::ordered_json to_json(const HHLLayout& layout) {
  nlohmann::ordered_json j;
  j["ancilla"] = layout.ancilla;
  j["phase_qubits"] = layout.phase_qubits;
  j["vector_qubits"] = layout.vector_qubits;
  j["p"] = layout.p;
  j["p_full"] = layout.plan.p_full;
  j["window_start"] = layout.plan.window_start;
  auto fixed = nlohmann::ordered_json::object();
  for (auto [pos, v] : layout.fixed_bits) fixed[std::to_string(pos)] = v;
  j["fixed_bits"] = fixed;
  j["c_rot"] = layout.c_rot;
  j["phase_readout"] = "swapless inverse QFT; phase_qubits[i] holds bit i of the register value";
  return j;
}

nlohmann::ordered_json to_json(const SolutionReport& report) {
  nlohmann::ordered_json j;
  j["success_prob"] = report.success_prob;
  j["fidelity"] = report.fidelity;
  j["phase_residual"] = report.phase_residual;
  j["solution_state"] = to_json(report.solution_state);
  j["oracle_state"] = to_json(report.oracle_state);
  return j;
}

}  // namespace hhlb
