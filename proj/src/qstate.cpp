#include "hhlb/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hhlb {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::ZeroProbability: return "zero_probability";
    case ErrorKind::Resource: return "resource";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::NoConstantBit: return "no_constant_bit";
    case ErrorKind::PhaseRegisterTooSmall: return "phase_register_too_small";
    case ErrorKind::Topology: return "topology";
    case ErrorKind::Io: return "io";
    case ErrorKind::Degenerate: return "degenerate";
  }
  return "unknown";
}

namespace {

int log2_exact(Index n) {
  if (n <= 0 || (n & (n - 1)) != 0) {
    throw Error(ErrorKind::Dimension, "length " + std::to_string(n) + " is not a power of two");
  }
  int k = 0;
  while ((Index{1} << k) < n) ++k;
  return k;
}

}  // namespace

StateVector::StateVector(int n_qubits, VectorXc amps) : n_qubits_(n_qubits), amps_(std::move(amps)) {
  if (n_qubits < 0 || n_qubits > 40) {
    throw Error(ErrorKind::Dimension, "unsupported qubit count " + std::to_string(n_qubits));
  }
  if (static_cast<std::uint64_t>(amps_.size()) != dim_of(n_qubits)) {
    throw Error(ErrorKind::Dimension, "amplitude count does not match 2^n");
  }
}

StateVector StateVector::basis(int n_qubits, std::uint64_t index) {
  VectorXc v = VectorXc::Zero(static_cast<Index>(dim_of(n_qubits)));
  if (index >= dim_of(n_qubits)) throw Error(ErrorKind::Dimension, "basis index out of range");
  v[static_cast<Index>(index)] = 1.0;
  return {n_qubits, std::move(v)};
}

StateVector StateVector::from_amplitudes(VectorXc amps) {
  const int n = log2_exact(amps.size());
  return {n, std::move(amps)};
}

StateVector StateVector::normalized() const {
  const double nrm = norm();
  if (nrm < 1e-12) throw Error(ErrorKind::Degenerate, "cannot normalise a state with norm < 1e-12");
  return {n_qubits_, amps_ / nrm};
}

Eigen::VectorXd StateVector::probabilities() const { return amps_.cwiseAbs2(); }

DensityMatrix::DensityMatrix(int n_qubits, MatrixXc elements) : n_qubits_(n_qubits), rho_(std::move(elements)) {
  const auto d = static_cast<Index>(dim_of(n_qubits));
  if (rho_.rows() != d || rho_.cols() != d) {
    throw Error(ErrorKind::Dimension, "density matrix must be 2^n x 2^n");
  }
}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi) {
  return {psi.n_qubits(), psi.amps() * psi.amps().adjoint()};
}

DensityMatrix DensityMatrix::maximally_mixed(int n_qubits) {
  const auto d = static_cast<Index>(dim_of(n_qubits));
  return {n_qubits, MatrixXc::Identity(d, d) / static_cast<double>(d)};
}

bool DensityMatrix::is_physical(double tol) const {
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(rho_.trace() - cplx{1.0, 0.0}) > tol) return false;
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(rho_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -1e-8;
}

ProbDist::ProbDist(Eigen::VectorXd probs, bool normalized) : p_(std::move(probs)), normalized_(normalized) {
  if (p_.size() == 0) throw Error(ErrorKind::Dimension, "empty distribution");
  if ((p_.array() < 0.0).any()) throw Error(ErrorKind::InvalidArgument, "negative probability");
  if (normalized_ && std::abs(p_.sum() - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidArgument, "distribution flagged normalised does not sum to 1");
  }
}

ProbDist ProbDist::uniform(Index dim) {
  return ProbDist(Eigen::VectorXd::Constant(dim, 1.0 / static_cast<double>(dim)));
}

ProbDist ProbDist::from_state(const StateVector& psi) {
  Eigen::VectorXd p = psi.probabilities();
  p /= p.sum();
  return ProbDist(std::move(p));
}

ProbDist ProbDist::normalized() const {
  const double s = p_.sum();
  if (s <= 0.0) throw Error(ErrorKind::ZeroProbability, "distribution has zero total mass");
  return ProbDist(p_ / s);
}

double state_fidelity(const StateVector& pure, const DensityMatrix& rho) {
  if (pure.dim() != rho.dim()) throw Error(ErrorKind::Dimension, "state/density matrix size mismatch");
  const double f = (pure.amps().adjoint() * rho.matrix() * pure.amps())(0, 0).real();
  return std::clamp(f, 0.0, 1.0);
}

double state_fidelity(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::Dimension, "state size mismatch");
  return std::clamp(std::norm(a.amps().dot(b.amps())), 0.0, 1.0);
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  const int n = rho.n_qubits();
  if (keep.empty()) throw Error(ErrorKind::InvalidArgument, "partial_trace: empty keep set");
  std::vector<bool> kept(static_cast<std::size_t>(n), false);
  for (int q : keep) {
    if (q < 0 || q >= n) throw Error(ErrorKind::InvalidArgument, "partial_trace: qubit index out of range");
    if (kept[static_cast<std::size_t>(q)]) throw Error(ErrorKind::InvalidArgument, "partial_trace: duplicate qubit");
    kept[static_cast<std::size_t>(q)] = true;
  }
  std::vector<int> traced;
  for (int q = 0; q < n; ++q) {
    if (!kept[static_cast<std::size_t>(q)]) traced.push_back(q);
  }
  const int k = static_cast<int>(keep.size());
  const auto dk = static_cast<Index>(dim_of(k));
  const auto dt = static_cast<Index>(dim_of(static_cast<int>(traced.size())));

  auto spread = [](std::uint64_t bits, std::span<const int> positions) {
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < positions.size(); ++i) out |= ((bits >> i) & 1U) << positions[i];
    return out;
  };

  std::vector<std::uint64_t> kept_index(static_cast<std::size_t>(dk));
  std::vector<std::uint64_t> traced_index(static_cast<std::size_t>(dt));
  for (Index i = 0; i < dk; ++i) kept_index[static_cast<std::size_t>(i)] = spread(static_cast<std::uint64_t>(i), keep);
  for (Index t = 0; t < dt; ++t) traced_index[static_cast<std::size_t>(t)] = spread(static_cast<std::uint64_t>(t), traced);

  MatrixXc out = MatrixXc::Zero(dk, dk);
  const MatrixXc& m = rho.matrix();
  for (Index i = 0; i < dk; ++i) {
    for (Index j = 0; j < dk; ++j) {
      cplx acc{0.0, 0.0};
      for (Index t = 0; t < dt; ++t) {
        const auto tt = traced_index[static_cast<std::size_t>(t)];
        acc += m(static_cast<Index>(kept_index[static_cast<std::size_t>(i)] | tt),
                 static_cast<Index>(kept_index[static_cast<std::size_t>(j)] | tt));
      }
      out(i, j) = acc;
    }
  }
  return {k, std::move(out)};
}

Postselected postselect(const StateVector& state, int qubit, int outcome) {
  const int n = state.n_qubits();
  if (qubit < 0 || qubit >= n) throw Error(ErrorKind::InvalidArgument, "postselect: qubit out of range");
  if (outcome != 0 && outcome != 1) throw Error(ErrorKind::InvalidArgument, "postselect: outcome must be 0 or 1");
  const auto half = static_cast<Index>(dim_of(n - 1));
  const std::uint64_t low_mask = (std::uint64_t{1} << qubit) - 1;
  VectorXc out(half);
  for (Index r = 0; r < half; ++r) {
    const auto ru = static_cast<std::uint64_t>(r);
    const std::uint64_t full = ((ru & ~low_mask) << 1) | (ru & low_mask) |
                               (static_cast<std::uint64_t>(outcome) << qubit);
    out[r] = state[static_cast<Index>(full)];
  }
  const double prob = out.squaredNorm() / state.amps().squaredNorm();
  if (prob <= 1e-300 || out.norm() < 1e-12) {
    throw Error(ErrorKind::ZeroProbability, "postselect: outcome has zero probability");
  }
  return {StateVector(n - 1, out / out.norm()), prob};
}

StateVector kron(const StateVector& high, const StateVector& low) {
  VectorXc v(high.dim() * low.dim());
  for (Index h = 0; h < high.dim(); ++h) v.segment(h * low.dim(), low.dim()) = high[h] * low.amps();
  return {high.n_qubits() + low.n_qubits(), std::move(v)};
}

nlohmann::ordered_json to_json(const StateVector& psi) {
  nlohmann::ordered_json j;
  j["n_qubits"] = psi.n_qubits();
  auto arr = nlohmann::ordered_json::array();
  for (Index i = 0; i < psi.dim(); ++i) arr.push_back({psi[i].real(), psi[i].imag()});
  j["amps"] = std::move(arr);
  return j;
}

StateVector state_from_json(const nlohmann::json& j) {
  const int n = j.at("n_qubits").get<int>();
  const auto& arr = j.at("amps");
  VectorXc v(static_cast<Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    v[static_cast<Index>(i)] = cplx{arr[i].at(0).get<double>(), arr[i].at(1).get<double>()};
  }
  return {n, std::move(v)};
}

}  // namespace hhlb
