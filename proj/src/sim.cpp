#include "hhlb/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>
#include <string>

#include "hhlb/kernels.hpp"
#include "hhlb/parallel.hpp"
#include "hhlb/rng.hpp"

namespace hhlb {

int max_statevector_qubits() {
  if (const char* env = std::getenv("HHLB_MAX_QUBITS")) {
    const int v = std::atoi(env);
    if (v > 0) return std::min(v, 34);
  }
  return 26;
}

namespace {

void check_width(int n) {
  if (n > max_statevector_qubits()) {
    throw Error(ErrorKind::Resource, "width " + std::to_string(n) + " exceeds the state-vector cap of " +
                                         std::to_string(max_statevector_qubits()) + " qubits");
  }
}

void check_same_width(const Circuit& c, const StateVector& s) {
  if (c.n_qubits() != s.n_qubits()) {
    throw Error(ErrorKind::Dimension, "circuit width " + std::to_string(c.n_qubits()) + " does not match state width " +
                                          std::to_string(s.n_qubits()));
  }
}

const Matrix2c& pauli(int code) {
  static const std::array<Matrix2c, 4> p{mat::identity(), mat::x(), mat::y(), mat::z()};
  return p[static_cast<std::size_t>(code)];
}

}  // namespace

StateVector schrodinger_run(const Circuit& circuit, const StateVector& initial) {
  check_same_width(circuit, initial);
  check_width(circuit.n_qubits());
  VectorXc v = initial.amps();
  kernels::apply_circuit(v, circuit);
  return {initial.n_qubits(), std::move(v)};
}

// -- Schrodinger-Feynman -------------------------------------------------------

CutPlan make_cut(const Circuit& circuit, std::vector<int> part_b) {
  const int n = circuit.n_qubits();
  std::sort(part_b.begin(), part_b.end());
  if (std::adjacent_find(part_b.begin(), part_b.end()) != part_b.end()) {
    throw Error(ErrorKind::InvalidArgument, "cut lists a qubit twice");
  }
  std::vector<char> in_b(static_cast<std::size_t>(n), 0);
  for (int q : part_b) {
    if (q < 0 || q >= n) throw Error(ErrorKind::InvalidArgument, "cut qubit out of range");
    in_b[static_cast<std::size_t>(q)] = 1;
  }
  if (part_b.empty() || 2 * static_cast<int>(part_b.size()) > n) {
    throw Error(ErrorKind::InvalidArgument, "smaller cut side must hold between 1 and n/2 qubits");
  }
  CutPlan plan;
  plan.part_b = std::move(part_b);
  for (int q = 0; q < n; ++q) {
    if (!in_b[static_cast<std::size_t>(q)]) plan.part_a.push_back(q);
  }
  const auto& gates = circuit.gates();
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const Gate& g = gates[i];
    if (g.is_cnot() && in_b[static_cast<std::size_t>(g.control)] != in_b[static_cast<std::size_t>(g.target)]) {
      plan.cross_gates.push_back(i);
    }
  }
  plan.k = static_cast<int>(plan.cross_gates.size());
  return plan;
}

CutPlan find_cut(const Circuit& circuit, int n_small) {
  const int n = circuit.n_qubits();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "a cut needs at least two qubits");
  if (n_small < 0) n_small = n / 2;
  if (n_small < 1 || 2 * n_small > n) throw Error(ErrorKind::InvalidArgument, "invalid smaller-side size");

  std::vector<std::pair<int, int>> cnots;
  for (const Gate& g : circuit.gates()) {
    if (g.is_cnot()) cnots.emplace_back(g.control, g.target);
  }
  auto crossings = [&](std::uint64_t mask) {
    int k = 0;
    for (auto [c, t] : cnots) k += bit_of(mask, c) != bit_of(mask, t);
    return k;
  };
  auto to_list = [&](std::uint64_t mask) {
    std::vector<int> out;
    for (int q = 0; q < n; ++q) {
      if (bit_of(mask, q)) out.push_back(q);
    }
    return out;
  };

  std::uint64_t best_mask = 0;
  int best_k = -1;
  auto consider = [&](std::uint64_t mask) {
    const int k = crossings(mask);
    if (best_k < 0 || k < best_k) {
      best_k = k;
      best_mask = mask;
    }
  };
  if (n <= 12) {
    for (std::uint64_t mask = 0; mask < dim_of(n); ++mask) {
      if (std::popcount(mask) == n_small) consider(mask);
    }
  } else {
    for (int start = 0; start < n; ++start) {
      std::uint64_t mask = 0;
      for (int j = 0; j < n_small; ++j) mask |= std::uint64_t{1} << ((start + j) % n);
      consider(mask);
    }
  }
  return make_cut(circuit, to_list(best_mask));
}

namespace {

struct SideOp {
  enum Kind { Gate1, Cnot, CrossControl, CrossTarget } kind;
  int q = 0;
  int q2 = 0;
  std::size_t cross = 0;  // index into the plan's crossing list
  Matrix2c m;
};

struct Side {
  int n = 0;
  std::vector<SideOp> ops;
  std::vector<Index> scatter;  // local basis index -> global bit pattern
};

Side build_side(const Circuit& c, const std::vector<int>& qubits, const CutPlan& plan) {
  Side side;
  side.n = static_cast<int>(qubits.size());
  std::vector<int> local(static_cast<std::size_t>(c.n_qubits()), -1);
  for (std::size_t i = 0; i < qubits.size(); ++i) local[static_cast<std::size_t>(qubits[i])] = static_cast<int>(i);
  side.scatter.resize(dim_of(side.n));
  for (std::uint64_t l = 0; l < dim_of(side.n); ++l) {
    Index g = 0;
    for (int i = 0; i < side.n; ++i) {
      if (bit_of(l, i)) g |= Index{1} << qubits[static_cast<std::size_t>(i)];
    }
    side.scatter[l] = g;
  }
  std::size_t next_cross = 0;
  const auto& gates = c.gates();
  for (std::size_t gi = 0; gi < gates.size(); ++gi) {
    const Gate& g = gates[gi];
    if (next_cross < plan.cross_gates.size() && plan.cross_gates[next_cross] == gi) {
      SideOp op;
      if (local[static_cast<std::size_t>(g.control)] >= 0) {
        op.kind = SideOp::CrossControl;
        op.q = local[static_cast<std::size_t>(g.control)];
      } else {
        op.kind = SideOp::CrossTarget;
        op.q = local[static_cast<std::size_t>(g.target)];
      }
      op.cross = next_cross++;
      side.ops.push_back(op);
      continue;
    }
    const int lt = local[static_cast<std::size_t>(g.target)];
    if (lt < 0) continue;
    SideOp op;
    if (g.is_cnot()) {
      op.kind = SideOp::Cnot;
      op.q = local[static_cast<std::size_t>(g.control)];
      op.q2 = lt;
    } else {
      op.kind = SideOp::Gate1;
      op.q = lt;
      op.m = g.matrix();
    }
    side.ops.push_back(op);
  }
  return side;
}

// Runs one side for the branch selected by `mask`: term 0 of a crossing CNOT
// is |0><0| (x) I, term 1 is |1><1| (x) X.
VectorXc run_side(const Side& side, VectorXc v, std::uint64_t mask) {
  static const Matrix2c proj0 = (Matrix2c() << 1, 0, 0, 0).finished();
  static const Matrix2c proj1 = (Matrix2c() << 0, 0, 0, 1).finished();
  for (const SideOp& op : side.ops) {
    switch (op.kind) {
      case SideOp::Gate1: kernels::apply_sq(v, op.q, op.m); break;
      case SideOp::Cnot: kernels::apply_cnot(v, op.q, op.q2); break;
      case SideOp::CrossControl: kernels::apply_sq(v, op.q, bit_of(mask, static_cast<int>(op.cross)) ? proj1 : proj0); break;
      case SideOp::CrossTarget:
        if (bit_of(mask, static_cast<int>(op.cross))) kernels::apply_sq(v, op.q, mat::x());
        break;
    }
  }
  return v;
}

}  // namespace

StateVector sfa_run(const Circuit& circuit, const CutPlan& plan, const StateVector& initial, const SfaOptions& opts) {
  check_same_width(circuit, initial);
  const int n = circuit.n_qubits();
  check_width(n);
  if (static_cast<int>(plan.part_a.size() + plan.part_b.size()) != n) {
    throw Error(ErrorKind::InvalidArgument, "cut plan does not cover the circuit");
  }
  if (plan.k > opts.max_k) {
    throw Error(ErrorKind::Resource, "cut crosses " + std::to_string(plan.k) + " CNOTs, above the branch cap of " +
                                         std::to_string(opts.max_k));
  }
  const Side a = build_side(circuit, plan.part_a, plan);
  const Side b = build_side(circuit, plan.part_b, plan);

  // factor the initial state across the cut
  const auto da = static_cast<Index>(dim_of(a.n));
  const auto db = static_cast<Index>(dim_of(b.n));
  MatrixXc m(da, db);
  for (Index i = 0; i < da; ++i)
    for (Index j = 0; j < db; ++j) m(i, j) = initial[a.scatter[static_cast<std::size_t>(i)] | b.scatter[static_cast<std::size_t>(j)]];
  Index pi = 0, pj = 0;
  m.cwiseAbs2().maxCoeff(&pi, &pj);
  const VectorXc psi_a = m.col(pj);
  const VectorXc psi_b = m.row(pi).transpose() / m(pi, pj);
  if ((m - psi_a * psi_b.transpose()).cwiseAbs2().maxCoeff() > 1e-20) {
    throw Error(ErrorKind::InvalidArgument, "initial state is not a product across the cut");
  }

  const std::uint64_t branches = dim_of(plan.k);
  // the scatter is a bijection onto the full index range, so the first
  // branch of a chunk initialises every amplitude
  auto add_branch = [&](VectorXc& acc, std::uint64_t mask, bool first) {
    const VectorXc va = run_side(a, psi_a, mask);
    const VectorXc vb = run_side(b, psi_b, mask);
    for (Index j = 0; j < db; ++j) {
      const cplx bj = vb[j];
      const Index gb = b.scatter[static_cast<std::size_t>(j)];
      if (first) {
        for (Index i = 0; i < da; ++i) acc[a.scatter[static_cast<std::size_t>(i)] | gb] = va[i] * bj;
      } else if (bj != cplx(0.0)) {
        for (Index i = 0; i < da; ++i) acc[a.scatter[static_cast<std::size_t>(i)] | gb] += va[i] * bj;
      }
    }
  };

  // Chunks of 16 branches are summed in mask order; groups of 16 chunks are
  // reduced pairwise and added to the total in group order.  None of this
  // depends on the thread count.
  constexpr std::uint64_t kChunk = 16;
  constexpr std::uint64_t kGroup = 16;
  const std::uint64_t chunk = std::min(branches, kChunk);
  const std::uint64_t n_chunks = branches / chunk;
  std::vector<VectorXc> partial(std::min(n_chunks, kGroup));
  VectorXc total;
  for (std::uint64_t g0 = 0; g0 < n_chunks; g0 += kGroup) {
    const std::uint64_t size = std::min(kGroup, n_chunks - g0);
    parallel_for(size, [&](std::size_t c) {
      VectorXc& acc = partial[c];
      if (acc.size() == 0) acc.resize(static_cast<Index>(dim_of(n)));
      const std::uint64_t first = (g0 + c) * chunk;
      for (std::uint64_t mask = first; mask < first + chunk; ++mask) add_branch(acc, mask, mask == first);
    });
    for (std::uint64_t step = 1; step < size; step *= 2) {
      for (std::uint64_t c = 0; c + step < size; c += 2 * step) partial[c] += partial[c + step];
    }
    if (g0 == 0) {
      total = n_chunks <= kGroup ? std::move(partial[0]) : partial[0];
    } else {
      total += partial[0];
    }
  }
  return {n, std::move(total)};
}

// -- sampling and noise ----------------------------------------------------------

void NoiseModel::validate() const {
  for (double p : {e1, e2, er}) {
    if (!(p >= 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "noise probabilities must lie in [0, 1)");
  }
}

namespace {

ProbDist sample_probs(const Eigen::VectorXd& p, int n_bits, std::uint64_t shots, double er, std::uint64_t seed) {
  if (shots == 0) throw Error(ErrorKind::InvalidArgument, "shots must be at least 1");
  std::vector<double> cdf(static_cast<std::size_t>(p.size()));
  std::partial_sum(p.data(), p.data() + p.size(), cdf.begin());
  const double total = cdf.back();
  if (!(total > 0.0)) throw Error(ErrorKind::ZeroProbability, "cannot sample an all-zero distribution");
  Rng rng(seed);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(p.size());
  for (std::uint64_t s = 0; s < shots; ++s) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), rng.uniform() * total);
    if (it == cdf.end()) --it;
    auto outcome = static_cast<std::uint64_t>(it - cdf.begin());
    if (er > 0.0) {
      for (int q = 0; q < n_bits; ++q) {
        if (rng.uniform() < er) outcome ^= std::uint64_t{1} << q;
      }
    }
    counts[static_cast<Index>(outcome)] += 1.0;
  }
  return ProbDist(counts / static_cast<double>(shots));
}

}  // namespace

ProbDist sample(const StateVector& state, std::uint64_t shots, const std::optional<NoiseModel>& noise,
                std::uint64_t seed) {
  if (noise) noise->validate();
  return sample_probs(state.probabilities(), state.n_qubits(), shots, noise ? noise->er : 0.0, seed);
}

ProbDist sample(const ProbDist& dist, std::uint64_t shots, std::uint64_t seed) {
  return sample_probs(dist.probs(), 0, shots, 0.0, seed);
}

ProbDist apply_readout_noise(const ProbDist& p, double er) {
  if (!(er >= 0.0 && er < 1.0)) throw Error(ErrorKind::InvalidArgument, "readout error must lie in [0, 1)");
  Eigen::VectorXd v = p.probs();
  if (er == 0.0) return ProbDist(v, p.is_normalized());
  const Index d = v.size();
  for (Index bit = 1; bit < d; bit <<= 1) {
    for (Index i = 0; i < d; ++i) {
      if (i & bit) continue;
      const double a = v[i];
      const double b = v[i | bit];
      v[i] = (1.0 - er) * a + er * b;
      v[i | bit] = (1.0 - er) * b + er * a;
    }
  }
  return ProbDist(v, p.is_normalized());
}

ProbDist noisy_run(const Circuit& circuit, const StateVector& initial, const NoiseModel& noise,
                   std::uint64_t trajectories) {
  noise.validate();
  if (trajectories == 0) throw Error(ErrorKind::InvalidArgument, "trajectories must be at least 1");
  check_same_width(circuit, initial);
  check_width(circuit.n_qubits());
  const auto& gates = circuit.gates();
  const std::size_t n_gates = gates.size();

  // ideal checkpoints so a trajectory resumes just before its first error
  const std::size_t state_bytes = dim_of(circuit.n_qubits()) * sizeof(cplx);
  std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n_gates))));
  while ((n_gates / stride + 1) * state_bytes > (std::size_t{256} << 20)) stride *= 2;
  std::vector<VectorXc> checkpoints;
  VectorXc v = initial.amps();
  for (std::size_t i = 0; i < n_gates; ++i) {
    if (i % stride == 0) checkpoints.push_back(v);
    kernels::apply_gate(v, gates[i]);
  }
  const Eigen::VectorXd ideal = v.cwiseAbs2();

  struct Event {
    std::size_t gate;
    int code;
  };
  constexpr std::uint64_t chunk = 256;
  const std::uint64_t n_chunks = (trajectories + chunk - 1) / chunk;
  std::vector<Eigen::VectorXd> partial(n_chunks);
  std::vector<std::uint64_t> clean(n_chunks, 0);
  parallel_for(n_chunks, [&](std::size_t c) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(ideal.size());
    std::vector<Event> events;
    const std::uint64_t end = std::min(trajectories, (c + 1) * chunk);
    for (std::uint64_t t = c * chunk; t < end; ++t) {
      Rng rng(noise.seed, t);
      events.clear();
      for (std::size_t i = 0; i < n_gates; ++i) {
        const bool two = gates[i].is_cnot();
        const double rate = two ? noise.e2 : noise.e1;
        const double u = rng.uniform();
        if (u < rate) {
          // Pauli index reuses u; higher rates give nested event sets
          const int kinds = two ? 15 : 3;
          events.push_back({i, 1 + std::min(kinds - 1, static_cast<int>(u / rate * kinds))});
        }
      }
      if (events.empty()) {
        ++clean[c];
        continue;
      }
      const std::size_t start = events.front().gate / stride;
      VectorXc w = checkpoints[start];
      std::size_t e = 0;
      for (std::size_t i = start * stride; i < n_gates; ++i) {
        const Gate& g = gates[i];
        kernels::apply_gate(w, g);
        if (e < events.size() && events[e].gate == i) {
          const int code = events[e++].code;
          if (g.is_cnot()) {
            if (code / 4) kernels::apply_sq(w, g.control, pauli(code / 4));
            if (code % 4) kernels::apply_sq(w, g.target, pauli(code % 4));
          } else {
            kernels::apply_sq(w, g.target, pauli(code));
          }
        }
      }
      acc += w.cwiseAbs2();
    }
    partial[c] = std::move(acc);
  });

  Eigen::VectorXd total = Eigen::VectorXd::Zero(ideal.size());
  std::uint64_t n_clean = 0;
  for (std::uint64_t c = 0; c < n_chunks; ++c) {
    total += partial[c];
    n_clean += clean[c];
  }
  total += static_cast<double>(n_clean) * ideal;
  total /= static_cast<double>(trajectories);
  total /= total.sum();
  return apply_readout_noise(ProbDist(total), noise.er);
}

// -- classical cost model -----------------------------------------------------------

int tensor_treewidth(const Circuit& c) {
  std::vector<std::set<int>> adj;
  std::vector<int> last(static_cast<std::size_t>(c.n_qubits()), -1);
  for (const Gate& g : c.gates()) {
    if (!g.is_cnot()) continue;
    const int v = static_cast<int>(adj.size());
    adj.emplace_back();
    for (int q : {g.control, g.target}) {
      const int u = last[static_cast<std::size_t>(q)];
      if (u >= 0 && u != v) {
        adj[static_cast<std::size_t>(u)].insert(v);
        adj[static_cast<std::size_t>(v)].insert(u);
      }
      last[static_cast<std::size_t>(q)] = v;
    }
  }
  const std::size_t nv = adj.size();
  std::vector<char> gone(nv, 0);
  int width = 0;
  for (std::size_t step = 0; step < nv; ++step) {
    std::size_t best = nv;
    for (std::size_t v = 0; v < nv; ++v) {
      if (!gone[v] && (best == nv || adj[v].size() < adj[best].size())) best = v;
    }
    const std::vector<int> nb(adj[best].begin(), adj[best].end());
    width = std::max(width, static_cast<int>(nb.size()));
    for (int u : nb) {
      adj[static_cast<std::size_t>(u)].erase(static_cast<int>(best));
      for (int w : nb) {
        if (w != u) adj[static_cast<std::size_t>(u)].insert(w);
      }
    }
    adj[best].clear();
    gone[best] = 1;
  }
  return width;
}

CircuitStats circuit_stats(const Circuit& c) {
  return {c.n_qubits(), c.depth(), c.size(), tensor_treewidth(c)};
}

CostEstimate estimate_costs(const CircuitStats& stats, int n_small, int k, const Machine& machine,
                            std::optional<double> fidelity) {
  if (stats.n < 1) throw Error(ErrorKind::InvalidArgument, "cost model needs n >= 1");
  if (n_small < 0 || 2 * n_small > stats.n || k < 0) {
    throw Error(ErrorKind::InvalidArgument, "cut sizes must satisfy 0 <= n_small <= n/2 and k >= 0");
  }
  if (stats.n - n_small > machine.ram_qubits) {
    throw Error(ErrorKind::Resource, "larger cut side exceeds the machine's RAM width");
  }
  if (fidelity && !(*fidelity >= 0.0 && *fidelity <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "fidelity must lie in [0, 1]");
  }
  const double c = machine.c_family;
  const int n_big = stats.n - n_small;
  CostEstimate e;
  e.c_family = c;
  e.t_sa = c * stats.n * std::ldexp(1.0, stats.n);
  e.t_sfa = c * n_big * std::ldexp(1.0, n_big) * std::ldexp(1.0, k);
  e.t_tn_exponent = stats.treewidth;
  e.t_tn = c * static_cast<double>(stats.gate_count) * std::ldexp(1.0, stats.treewidth);
  if (fidelity) e.t_f = e.t_sfa * *fidelity;
  return e;
}

CostEstimate estimate_costs(const CircuitStats& stats, const CutPlan& plan, const Machine& machine,
                            std::optional<double> fidelity) {
  return estimate_costs(stats, plan.n_small(), plan.k, machine, fidelity);
}

double hardware_sampling_seconds(int n) { return 2.0 + 1.5 * n; }

}  // namespace hhlb
