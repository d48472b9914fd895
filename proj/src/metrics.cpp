#include "hhlb/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "hhlb/gate_math.hpp"
#include "hhlb/kernels.hpp"
#include "hhlb/rng.hpp"

namespace hhlb {

namespace {

int log2_dim(Index dim) {
  int n = 0;
  while ((Index{1} << n) < dim) ++n;
  if ((Index{1} << n) != dim) throw Error(ErrorKind::Dimension, "distribution size is not a power of two");
  return n;
}

}  // namespace

// -- ancilla filtering and XEB ---------------------------------------------------

ProbDist filter_ancilla(const ProbDist& raw, int ancilla) {
  const int n = log2_dim(raw.dim());
  if (ancilla < 0 || ancilla >= n) {
    throw Error(ErrorKind::InvalidArgument, "ancilla " + std::to_string(ancilla) + " outside a " +
                                                std::to_string(n) + "-qubit distribution");
  }
  const Index bit = Index{1} << ancilla;
  Eigen::VectorXd out(raw.dim() / 2);
  for (Index j = 0; j < out.size(); ++j) {
    const Index low = j & (bit - 1);
    const Index high = (j >> ancilla) << (ancilla + 1);
    out[j] = raw[high | bit | low];
  }
  const double mass = out.sum();
  if (!(mass > 0.0)) throw Error(ErrorKind::ZeroProbability, "no outcome with ancilla = 1");
  return ProbDist(out / mass);
}

ProbDist filter_ancilla(const ProbDist& raw, const HHLLayout& layout) { return filter_ancilla(raw, layout.ancilla); }

double xeb(const XebInput& input) {
  if (input.empty()) throw Error(ErrorKind::InvalidArgument, "xeb needs at least one circuit");
  const Index dim = input.front().p_t.dim();
  for (const auto& pair : input) {
    if (pair.p_e.dim() != dim || pair.p_t.dim() != dim) {
      throw Error(ErrorKind::Dimension, "xeb distributions differ in dimension");
    }
    if (std::abs(pair.p_e.total() - 1.0) > 1e-9 || std::abs(pair.p_t.total() - 1.0) > 1e-9) {
      throw Error(ErrorKind::InvalidArgument, "xeb distributions must be normalised");
    }
  }
  const double pc = 1.0 / static_cast<double>(dim);
  double num = 0.0;
  double den = 0.0;
  for (const auto& pair : input) {
    const double t_sum = pair.p_t.total();
    num += pair.p_e.probs().dot(pair.p_t.probs()) - pc * t_sum;
    den += pair.p_t.probs().squaredNorm() - pc * t_sum;
  }
  if (std::abs(den) < 1e-15) throw Error(ErrorKind::Degenerate, "xeb undefined: every ideal distribution is uniform");
  return num / den;
}

// -- digital error model ------------------------------------------------------------

GateCounts gate_counts(const Circuit& c) { return {c.n_qubits(), c.sq_count(), c.cnot_count()}; }

DemFidelity dem_predict(const GateCounts& counts, const NoiseModel& rates) {
  rates.validate();
  DemFidelity d;
  d.counts = counts;
  d.f_r = std::pow(1.0 - rates.er, counts.n);
  d.f_1qg = std::pow(1.0 - rates.e1, static_cast<double>(counts.sq_gates));
  d.f_2qg = std::pow(1.0 - rates.e2, static_cast<double>(counts.cnots));
  d.f_xeb = d.f_r * d.f_1qg * d.f_2qg;
  return d;
}

XebPair noisy_xeb_pair(const Circuit& c, int ancilla, const NoiseModel& noise, std::uint64_t trajectories,
                       std::uint64_t shots) {
  const StateVector zero = StateVector::basis(c.n_qubits());
  ProbDist ideal = ProbDist::from_state(schrodinger_run(c, zero));
  ProbDist measured = noise.noiseless() ? ideal : noisy_run(c, zero, noise, trajectories);
  if (shots > 0) measured = sample(measured, shots, mix_seed(noise.seed, ~std::uint64_t{0}));
  return {filter_ancilla(measured, ancilla), filter_ancilla(ideal, ancilla)};
}

// -- tomography -------------------------------------------------------------------------

namespace {

std::uint64_t pow_int(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

Setting setting_of(std::uint64_t index, int m) {
  Setting s(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    s[static_cast<std::size_t>(i)] = static_cast<int>(index % 3);
    index /= 3;
  }
  return s;
}

std::uint64_t index_of(const Setting& s) {
  std::uint64_t index = 0;
  for (std::size_t i = s.size(); i-- > 0;) index = index * 3 + static_cast<std::uint64_t>(s[i]);
  return index;
}

// Rotation taking the measurement basis onto Z.
Matrix2c basis_rotation(int basis) {
  switch (basis) {
    case 0:
      return mat::h();
    case 1:
      return mat::h() * mat::sdg();
    case 2:
      return mat::identity();
    default:
      throw Error(ErrorKind::InvalidArgument, "setting basis must be 0 (X), 1 (Y) or 2 (Z)");
  }
}

double predicted_frobenius_error(int m, std::uint64_t shots) {
  // Pauli of weight w is estimated from shots * 3^(m-w) samples
  double e = 0.0;
  double binom = 1.0;
  for (int w = 1; w <= m; ++w) {
    binom = binom * (m - w + 1) / w;
    e += binom * std::pow(3.0, w) / (static_cast<double>(shots) * std::pow(3.0, m - w));
  }
  return std::sqrt(e / std::pow(2.0, m));
}

// Euclidean projection onto {x >= 0, sum x = 1}; applied to the spectrum it
// gives the nearest density matrix in Frobenius norm.
Eigen::VectorXd simplex_projection(const Eigen::VectorXd& v) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cum = 0.0, shift = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cum += sorted[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] > t) shift = t;
  }
  return (v.array() - shift).cwiseMax(0.0).matrix();
}

}  // namespace

TomographyResult tomography(const SettingOracle& oracle, int m, std::uint64_t shots_per_setting) {
  if (m < 1 || m > 5) throw Error(ErrorKind::InvalidArgument, "tomography supports 1 to 5 register qubits");
  const std::uint64_t n_settings = pow_int(3, m);
  const std::uint64_t n_paulis = pow_int(4, m);
  const Index dim = Index{1} << m;

  // Pauli string code: base 4 digits, 0 = I, 1 = X, 2 = Y, 3 = Z
  std::vector<double> sum(n_paulis, 0.0);
  std::vector<int> hits(n_paulis, 0);
  for (std::uint64_t s = 0; s < n_settings; ++s) {
    const Setting setting = setting_of(s, m);
    const ProbDist dist = oracle(setting);
    if (dist.dim() != dim) throw Error(ErrorKind::Dimension, "oracle returned a distribution of the wrong size");
    const double total = dist.total();
    for (Index subset = 0; subset < dim; ++subset) {
      double e = 0.0;
      for (Index o = 0; o < dim; ++o) e += (std::popcount(static_cast<std::uint64_t>(o & subset)) & 1 ? -1.0 : 1.0) * dist[o];
      std::uint64_t code = 0;
      for (int i = m; i-- > 0;) {
        code *= 4;
        if (subset >> i & 1) code += static_cast<std::uint64_t>(setting[static_cast<std::size_t>(i)]) + 1;
      }
      sum[code] += e / total;
      ++hits[code];
    }
  }

  MatrixXc rho = MatrixXc::Zero(dim, dim);
  const cplx i_unit(0.0, 1.0);
  for (std::uint64_t code = 0; code < n_paulis; ++code) {
    const double expectation = sum[code] / hits[code];
    Index flip = 0;
    std::vector<int> letters(static_cast<std::size_t>(m));
    std::uint64_t c = code;
    for (int q = 0; q < m; ++q) {
      letters[static_cast<std::size_t>(q)] = static_cast<int>(c % 4);
      c /= 4;
      if (letters[static_cast<std::size_t>(q)] == 1 || letters[static_cast<std::size_t>(q)] == 2) flip |= Index{1} << q;
    }
    for (Index a = 0; a < dim; ++a) {
      cplx coef = 1.0;
      for (int q = 0; q < m; ++q) {
        const int bit = static_cast<int>(a >> q & 1);
        switch (letters[static_cast<std::size_t>(q)]) {
          case 2:
            coef *= bit ? i_unit : -i_unit;
            break;
          case 3:
            if (bit) coef = -coef;
            break;
          default:
            break;
        }
      }
      rho(a, a ^ flip) += expectation * coef;
    }
  }
  rho /= static_cast<double>(dim);
  rho = (0.5 * (rho + rho.adjoint())).eval();

  Eigen::SelfAdjointEigenSolver<MatrixXc> eig(rho);
  const Eigen::VectorXd ev = simplex_projection(eig.eigenvalues());
  MatrixXc projected = eig.eigenvectors() * ev.cast<cplx>().asDiagonal() * eig.eigenvectors().adjoint();

  TomographyResult result{DensityMatrix(m, projected), 0.0, false};
  if (shots_per_setting > 0) {
    result.predicted_error = predicted_frobenius_error(m, shots_per_setting);
    result.insufficient_shots = result.predicted_error > 0.1;
  }
  return result;
}

SettingOracle state_oracle(const StateVector& psi, std::vector<int> register_qubits, std::uint64_t shots,
                           std::uint64_t seed, std::optional<std::pair<int, int>> postselect) {
  const int n = psi.n_qubits();
  for (int q : register_qubits) {
    if (q < 0 || q >= n) throw Error(ErrorKind::InvalidArgument, "register qubit outside the state");
  }
  if (postselect && (postselect->first < 0 || postselect->first >= n)) {
    throw Error(ErrorKind::InvalidArgument, "post-selected qubit outside the state");
  }
  return [psi, reg = std::move(register_qubits), shots, seed, postselect](const Setting& setting) {
    if (setting.size() != reg.size()) throw Error(ErrorKind::Dimension, "setting size differs from the register");
    VectorXc v = psi.amps();
    for (std::size_t i = 0; i < reg.size(); ++i) kernels::apply_sq(v, reg[i], basis_rotation(setting[i]));
    ProbDist raw = ProbDist::from_state(StateVector(psi.n_qubits(), v));
    if (shots > 0) raw = sample(raw, shots, mix_seed(seed, index_of(setting)));
    Eigen::VectorXd out = Eigen::VectorXd::Zero(Index{1} << reg.size());
    for (Index x = 0; x < raw.dim(); ++x) {
      if (postselect && bit_of(static_cast<std::uint64_t>(x), postselect->first) != postselect->second) continue;
      Index r = 0;
      for (std::size_t i = 0; i < reg.size(); ++i) r |= static_cast<Index>(bit_of(static_cast<std::uint64_t>(x), reg[i])) << i;
      out[r] += raw[x];
    }
    const double mass = out.sum();
    if (!(mass > 0.0)) throw Error(ErrorKind::ZeroProbability, "no post-selected outcome for a tomography setting");
    return ProbDist(out / mass);
  };
}

SettingOracle density_oracle(const DensityMatrix& rho, std::uint64_t shots, std::uint64_t seed) {
  return [rho, shots, seed](const Setting& setting) {
    if (static_cast<int>(setting.size()) != rho.n_qubits()) {
      throw Error(ErrorKind::Dimension, "setting size differs from the register");
    }
    MatrixXc m = rho.matrix();
    for (std::size_t i = 0; i < setting.size(); ++i) kernels::apply_sq(m, static_cast<int>(i), basis_rotation(setting[i]));
    m = m.adjoint().eval();
    for (std::size_t i = 0; i < setting.size(); ++i) kernels::apply_sq(m, static_cast<int>(i), basis_rotation(setting[i]));
    Eigen::VectorXd p = m.diagonal().real().cwiseMax(0.0);
    ProbDist dist(p / p.sum());
    return shots > 0 ? sample(dist, shots, mix_seed(seed, index_of(setting))) : dist;
  };
}

TomographyResult hhl_tomography(const HHLProgram& program, std::uint64_t shots, std::uint64_t seed,
                                const Backend& backend) {
  const auto& layout = program.layout;
  const StateVector out = backend(program.circuit, StateVector::basis(program.circuit.n_qubits()));
  const int m = static_cast<int>(layout.vector_qubits.size());
  const auto oracle = state_oracle(out, layout.vector_qubits, shots, seed, std::pair{layout.ancilla, 1});
  TomographyResult result = tomography(oracle, m, 0);
  if (shots > 0) {
    const double p1 = postselect(out, layout.ancilla, 1).probability;
    const auto kept = static_cast<std::uint64_t>(std::max(1.0, std::floor(p1 * static_cast<double>(shots))));
    result.predicted_error = predicted_frobenius_error(m, 1) / std::sqrt(static_cast<double>(kept));
    result.insufficient_shots = result.predicted_error > 0.1;
  }
  return result;
}

// -- quantum volume ----------------------------------------------------------------------

Circuit qv_model_circuit(int m, std::uint64_t seed) {
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "model circuits need at least 2 qubits");
  Rng rng(seed);
  Circuit c(m);
  std::vector<int> perm(static_cast<std::size_t>(m));
  for (int layer = 0; layer < m; ++layer) {
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    for (int k = 0; k + 1 < m; k += 2) {
      const int a = perm[static_cast<std::size_t>(k)];
      const int b = perm[static_cast<std::size_t>(k + 1)];
      for (int step = 0; step < 3; ++step) {
        c.sq(a, random_su2(rng));
        c.sq(b, random_su2(rng));
        if (step == 1) {
          c.cnot(b, a);
        } else {
          c.cnot(a, b);
        }
      }
      c.sq(a, random_su2(rng));
      c.sq(b, random_su2(rng));
    }
  }
  return c;
}

namespace {

QvWidth qv_width(const CouplingMap& map, const NoiseModel& noise, int m, const QvOptions& opts) {
  std::vector<double> hop(static_cast<std::size_t>(opts.circuits));
  for (int i = 0; i < opts.circuits; ++i) {
    const std::uint64_t id = static_cast<std::uint64_t>(m) << 32 | static_cast<std::uint64_t>(i);
    const Circuit model = qv_model_circuit(m, mix_seed(opts.seed, id));

    const Eigen::VectorXd ideal = schrodinger_run(model, StateVector::basis(m)).probabilities();
    std::vector<double> sorted(ideal.data(), ideal.data() + ideal.size());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t half = sorted.size() / 2;
    const double median = 0.5 * (sorted[half - 1] + sorted[half]);

    const CompactCircuit small = compact(route(model, map, opts.restarts, mix_seed(opts.seed ^ 0x51u, id)));
    NoiseModel nm = noise;
    nm.seed = mix_seed(noise.seed, id);
    const ProbDist measured =
        noisy_run(small.circuit, StateVector::basis(small.circuit.n_qubits()), nm, opts.trajectories);
    double h = 0.0;
    for (Index y = 0; y < measured.dim(); ++y) {
      if (measured[y] == 0.0) continue;
      Index x = 0;
      for (int q = 0; q < m; ++q) {
        const int bit = bit_of(static_cast<std::uint64_t>(y), small.final_qubit[static_cast<std::size_t>(q)]);
        x |= static_cast<Index>(bit) << q;
      }
      if (ideal[x] > median) h += measured[y];
    }
    hop[static_cast<std::size_t>(i)] = h;
  }
  QvWidth w;
  w.m = m;
  w.mean_hop = std::accumulate(hop.begin(), hop.end(), 0.0) / static_cast<double>(opts.circuits);
  w.sigma = std::sqrt(w.mean_hop * (1.0 - w.mean_hop) / static_cast<double>(opts.circuits));
  w.passed = w.mean_hop - 2.0 * w.sigma > 2.0 / 3.0;
  return w;
}

}  // namespace

QvResult quantum_volume(const CouplingMap& map, const NoiseModel& noise, int max_width, const QvOptions& opts) {
  noise.validate();
  if (max_width < 2 || max_width > 8) throw Error(ErrorKind::InvalidArgument, "max_width must lie in [2, 8]");
  if (max_width > map.n_qubits()) throw Error(ErrorKind::Topology, "max_width exceeds the coupling map");
  if (opts.circuits < 1 || opts.trajectories < 1) throw Error(ErrorKind::InvalidArgument, "qv needs circuits and trajectories");
  QvResult result;
  for (int m = 2; m <= max_width; ++m) {
    result.widths.push_back(qv_width(map, noise, m, opts));
    if (result.widths.back().passed) result.volume = 1 << m;
  }
  return result;
}

// -- supremacy estimates -----------------------------------------------------------------

std::vector<SupremacyEntry> supremacy_table(const std::vector<SupremacyRow>& rows) {
  std::vector<SupremacyEntry> out;
  for (const auto& row : rows) {
    const bool given = row.f_r && row.f_1qg && row.f_2qg;
    if (!given && !(row.counts && row.rates)) {
      throw Error(ErrorKind::InvalidArgument, "row " + row.family + "/" + std::to_string(row.n) +
                                                  " needs either all three factors or counts and rates");
    }
    DemFidelity f = row.counts && row.rates ? dem_predict(*row.counts, *row.rates) : DemFidelity{};
    if (row.counts) f.counts = *row.counts;
    if (row.f_r) f.f_r = *row.f_r;
    if (row.f_1qg) f.f_1qg = *row.f_1qg;
    if (row.f_2qg) f.f_2qg = *row.f_2qg;
    f.f_xeb = f.f_r * f.f_1qg * f.f_2qg;
    out.push_back({row, f, row.t_sfa * f.f_xeb});
  }
  return out;
}

namespace {

std::string two_sig(double v) {
  char buf[32];
  if (v >= 1e4) {
    std::snprintf(buf, sizeof buf, "%.1e", v);
    std::string s(buf);
    // 2.2e+05 -> 2.2e5
    const auto e = s.find('e');
    std::string mant = s.substr(0, e);
    int exp = std::stoi(s.substr(e + 1));
    if (mant.size() > 2 && mant.substr(mant.size() - 2) == ".0") mant.resize(mant.size() - 2);
    return mant + "e" + std::to_string(exp);
  }
  if (v >= 10) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.2g", v);
  }
  return buf;
}

std::string with_unit(double v, const std::string& unit) {
  const std::string num = two_sig(v);
  return num + " " + unit + (num == "1" ? "" : "s");
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2g", v);
  return buf;
}

}  // namespace

std::string format_duration(double seconds) {
  if (seconds < 60.0) return "<1 minute";
  if (seconds < 3600.0) return with_unit(seconds / 60.0, "minute");
  if (seconds < 86400.0) return with_unit(seconds / 3600.0, "hour");
  if (seconds < kSecondsPerMonth) return with_unit(seconds / 86400.0, "day");
  if (seconds < kSecondsPerYear) return with_unit(seconds / kSecondsPerMonth, "month");
  return with_unit(seconds / kSecondsPerYear, "year");
}

double parse_duration(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw Error(ErrorKind::InvalidArgument, "duration must be a number of seconds or a string");
  std::string s = j.get<std::string>();
  if (!s.empty() && s.front() == '<') s.erase(0, 1);
  std::istringstream in(s);
  double v = 0.0;
  std::string unit;
  if (!(in >> v)) throw Error(ErrorKind::InvalidArgument, "cannot parse duration '" + j.get<std::string>() + "'");
  in >> unit;
  if (!unit.empty() && unit.back() == 's') unit.pop_back();
  static const std::map<std::string, double> units = {
      {"", 1.0},       {"second", 1.0},        {"minute", 60.0},           {"hour", 3600.0},
      {"day", 86400.0}, {"month", kSecondsPerMonth}, {"year", kSecondsPerYear}};
  const auto it = units.find(unit);
  if (it == units.end()) throw Error(ErrorKind::InvalidArgument, "unknown duration unit '" + unit + "'");
  return v * it->second;
}

std::vector<SupremacyRow> supremacy_rows_from_json(const nlohmann::json& j) {
  const nlohmann::json& arr = j.is_array() ? j : j.at("rows");
  std::vector<SupremacyRow> rows;
  for (const auto& r : arr) {
    SupremacyRow row;
    row.family = r.at("family").get<std::string>();
    row.n = r.at("n").get<int>();
    row.device = r.value("device", std::string());
    if (r.contains("f_r")) row.f_r = r["f_r"].get<double>();
    if (r.contains("f_1qg")) row.f_1qg = r["f_1qg"].get<double>();
    if (r.contains("f_2qg")) row.f_2qg = r["f_2qg"].get<double>();
    if (r.contains("counts")) {
      const auto& c = r["counts"];
      row.counts = GateCounts{c.value("n", row.n), c.at("sq_gates").get<std::size_t>(), c.at("cnots").get<std::size_t>()};
    }
    if (r.contains("rates")) {
      const auto& e = r["rates"];
      NoiseModel nm;
      nm.e1 = e.value("e1", 0.0);
      nm.e2 = e.value("e2", 0.0);
      nm.er = e.value("er", 0.0);
      nm.validate();
      row.rates = nm;
    }
    row.t_sfa = parse_duration(r.at("t_sfa"));
    if (r.contains("quantum_volume")) row.quantum_volume = r["quantum_volume"].get<int>();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string table_markdown(const std::vector<SupremacyEntry>& entries) {
  std::ostringstream out;
  out << "| Type | n | QPU | F_r | F_1QG | F_2QG | F_XEB | V_Q | T_SFA | T_f |\n";
  out << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& e : entries) {
    out << "| " << e.row.family << " | " << e.row.n << " | " << e.row.device << " | " << sci(e.fidelity.f_r) << " | "
        << sci(e.fidelity.f_1qg) << " | " << sci(e.fidelity.f_2qg) << " | " << sci(e.fidelity.f_xeb) << " | "
        << (e.row.quantum_volume ? std::to_string(*e.row.quantum_volume) : "-") << " | "
        << format_duration(e.row.t_sfa) << " | " << format_duration(e.t_f) << " |\n";
  }
  return out.str();
}

std::string table_csv(const std::vector<SupremacyEntry>& entries) {
  std::ostringstream out;
  out << "family,n,device,f_r,f_1qg,f_2qg,f_xeb,quantum_volume,t_sfa_s,t_f_s\n";
  char buf[256];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%s,%d,%s,%.6g,%.6g,%.6g,%.6g,%s,%.6g,%.6g\n", e.row.family.c_str(), e.row.n,
                  e.row.device.c_str(), e.fidelity.f_r, e.fidelity.f_1qg, e.fidelity.f_2qg, e.fidelity.f_xeb,
                  e.row.quantum_volume ? std::to_string(*e.row.quantum_volume).c_str() : "", e.row.t_sfa, e.t_f);
    out << buf;
  }
  return out.str();
}

}  // namespace hhlb
