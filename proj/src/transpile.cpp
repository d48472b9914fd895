#include "hhlb/transpile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <regex>
#include <sstream>

#include "hhlb/hhl.hpp"
#include "hhlb/parallel.hpp"
#include "hhlb/rng.hpp"

#ifndef HHLB_DEFAULT_DATA_DIR
#define HHLB_DEFAULT_DATA_DIR "data"
#endif

namespace hhlb {

// -- coupling maps ------------------------------------------------------------------

CouplingMap::CouplingMap(std::string name, int n_qubits, std::vector<std::pair<int, int>> edges)
    : name_(std::move(name)), n_(n_qubits) {
  if (n_ < 1) throw Error(ErrorKind::Topology, "topology '" + name_ + "' has no qubits");
  for (auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n_ || b >= n_) {
      throw Error(ErrorKind::Topology, "topology '" + name_ + "' has an edge endpoint outside 0.." + std::to_string(n_ - 1));
    }
    if (a == b) throw Error(ErrorKind::Topology, "topology '" + name_ + "' has a self-loop on " + std::to_string(a));
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  adj_.assign(static_cast<std::size_t>(n_), {});
  for (auto [a, b] : edges_) {
    adj_[static_cast<std::size_t>(a)].push_back(b);
    adj_[static_cast<std::size_t>(b)].push_back(a);
  }
  dist_.assign(static_cast<std::size_t>(n_ * n_), -1);
  for (int s = 0; s < n_; ++s) {
    std::deque<int> queue{s};
    dist_[static_cast<std::size_t>(s * n_ + s)] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : adj_[static_cast<std::size_t>(u)]) {
        auto& d = dist_[static_cast<std::size_t>(s * n_ + v)];
        if (d < 0) {
          d = dist_[static_cast<std::size_t>(s * n_ + u)] + 1;
          queue.push_back(v);
        }
      }
    }
  }
  if (std::any_of(dist_.begin(), dist_.end(), [](int d) { return d < 0; })) {
    throw Error(ErrorKind::Topology, "topology '" + name_ + "' is not connected");
  }
}

CouplingMap all_to_all(int n) {
  std::vector<std::pair<int, int>> e;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) e.emplace_back(a, b);
  return {"all_to_all(" + std::to_string(n) + ")", n, std::move(e)};
}

CouplingMap line(int n) {
  std::vector<std::pair<int, int>> e;
  for (int a = 0; a + 1 < n; ++a) e.emplace_back(a, a + 1);
  return {"line(" + std::to_string(n) + ")", n, std::move(e)};
}

std::string data_dir() {
  if (const char* env = std::getenv("HHLB_DATA_DIR")) return env;
  return HHLB_DEFAULT_DATA_DIR;
}

CouplingMap topology_from_json(const nlohmann::json& j) {
  try {
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    CouplingMap m(j.value("name", std::string("custom")), j.at("n").get<int>(), std::move(edges));
    if (j.contains("e1")) m.e1 = j["e1"].get<double>();
    if (j.contains("e2")) m.e2 = j["e2"].get<double>();
    if (j.contains("er")) m.er = j["er"].get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Topology, std::string("malformed topology document: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const CouplingMap& map) {
  nlohmann::ordered_json j;
  j["name"] = map.name();
  j["n"] = map.n_qubits();
  auto edges = nlohmann::ordered_json::array();
  for (auto [a, b] : map.edges()) edges.push_back({a, b});
  j["edges"] = edges;
  if (map.e1) j["e1"] = *map.e1;
  if (map.e2) j["e2"] = *map.e2;
  if (map.er) j["er"] = *map.er;
  return j;
}

CouplingMap load_topology(const std::string& spec) {
  static const std::regex sized(R"(^\s*(all_to_all|line)\s*[(:]\s*(\d+)\s*\)?\s*$)");
  std::smatch m;
  if (std::regex_match(spec, m, sized)) {
    const int n = std::stoi(m[2]);
    return m[1] == "line" ? line(n) : all_to_all(n);
  }
  std::filesystem::path path;
  for (const char* builtin : {"melbourne15", "johannesburg20", "rochester53", "sycamore53"}) {
    if (spec == builtin) path = std::filesystem::path(data_dir()) / "topologies" / (spec + ".json");
  }
  if (path.empty()) {
    if (!std::filesystem::exists(spec)) throw Error(ErrorKind::Topology, "unknown topology '" + spec + "'");
    path = spec;
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read topology file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Topology, "topology file " + path.string() + " is not valid JSON: " + e.what());
  }
  return topology_from_json(j);
}

// -- single-qubit fusion ------------------------------------------------------------

Circuit merge_single_qubit_runs(const Circuit& c) {
  Circuit out(c.n_qubits());
  out.tags = c.tags;
  std::vector<std::optional<Matrix2c>> pending(static_cast<std::size_t>(c.n_qubits()));
  auto flush = [&](int q) {
    auto& p = pending[static_cast<std::size_t>(q)];
    if (!p) return;
    const bool identity = ((*p) - (*p)(0, 0) * Matrix2c::Identity()).cwiseAbs().maxCoeff() < 1e-12;
    if (!identity) out.sq(q, *p);
    p.reset();
  };
  for (const Gate& g : c.gates()) {
    if (g.is_cnot()) {
      flush(g.control);
      flush(g.target);
      out.add(g);
    } else {
      auto& p = pending[static_cast<std::size_t>(g.target)];
      p = p ? Matrix2c(g.matrix() * *p) : g.matrix();
    }
  }
  for (int q = 0; q < c.n_qubits(); ++q) flush(q);
  return out;
}

// -- routing ---------------------------------------------------------------------------

namespace {

class Router {
 public:
  Router(const std::vector<Gate>& gates, const CouplingMap& map) : gates_(gates), map_(map) {
    const int n = map.n_qubits();
    succ_.assign(gates_.size(), {});
    npred_.assign(gates_.size(), 0);
    std::vector<int> last(static_cast<std::size_t>(n), -1);
    for (std::size_t i = 0; i < gates_.size(); ++i) {
      const Gate& g = gates_[i];
      std::vector<int> qs{g.target};
      if (g.is_cnot()) qs.push_back(g.control);
      for (int q : qs) {
        const int prev = last[static_cast<std::size_t>(q)];
        if (prev >= 0) {
          succ_[static_cast<std::size_t>(prev)].push_back(static_cast<int>(i));
          ++npred_[i];
        }
        last[static_cast<std::size_t>(q)] = static_cast<int>(i);
      }
    }
  }

  // Routes with the given logical->physical layout; returns the final layout.
  std::vector<int> run(std::vector<int> l2p, Rng& rng, Circuit* out) const {
    const int n = map_.n_qubits();
    std::vector<int> p2l(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) p2l[static_cast<std::size_t>(l2p[static_cast<std::size_t>(l)])] = l;
    std::vector<int> npred = npred_;
    std::vector<int> front;
    for (std::size_t i = 0; i < gates_.size(); ++i) {
      if (npred[i] == 0) front.push_back(static_cast<int>(i));
    }
    std::vector<double> decay(static_cast<std::size_t>(n), 1.0);
    int swaps_since_progress = 0;

    auto phys = [&](int lq) { return l2p[static_cast<std::size_t>(lq)]; };
    auto emit_swap = [&](int a, int b) {
      if (out) out->cnot(a, b).cnot(b, a).cnot(a, b);
      const int la = p2l[static_cast<std::size_t>(a)];
      const int lb = p2l[static_cast<std::size_t>(b)];
      std::swap(p2l[static_cast<std::size_t>(a)], p2l[static_cast<std::size_t>(b)]);
      l2p[static_cast<std::size_t>(la)] = b;
      l2p[static_cast<std::size_t>(lb)] = a;
    };

    while (!front.empty()) {
      // execute everything that is executable, releasing successors as we go
      bool progressed = false;
      std::vector<int> blocked;
      std::deque<int> work(front.begin(), front.end());
      while (!work.empty()) {
        const int gi = work.front();
        work.pop_front();
        const Gate& g = gates_[static_cast<std::size_t>(gi)];
        if (g.is_cnot() && !map_.adjacent(phys(g.control), phys(g.target))) {
          blocked.push_back(gi);
          continue;
        }
        if (out) {
          if (g.is_cnot()) {
            out->cnot(phys(g.control), phys(g.target));
          } else {
            Gate pg = g;
            pg.target = phys(g.target);
            out->add(pg);
          }
        }
        progressed = true;
        for (int s : succ_[static_cast<std::size_t>(gi)]) {
          if (--npred[static_cast<std::size_t>(s)] == 0) work.push_back(s);
        }
      }
      front = std::move(blocked);
      if (front.empty()) break;
      if (progressed) {
        std::fill(decay.begin(), decay.end(), 1.0);
        swaps_since_progress = 0;
      }

      if (swaps_since_progress > 3 * n) {
        // release valve: walk the first blocked CNOT together along a shortest path
        const Gate& g = gates_[static_cast<std::size_t>(front.front())];
        int a = phys(g.control);
        const int b = phys(g.target);
        while (map_.distance(a, b) > 1) {
          int step = -1;
          for (int nb : map_.neighbors(a)) {
            if (map_.distance(nb, b) == map_.distance(a, b) - 1) {
              step = nb;
              break;
            }
          }
          emit_swap(a, step);
          a = step;
        }
        swaps_since_progress = 0;
        continue;
      }

      // lookahead set: the next CNOTs behind the front
      std::vector<int> extended;
      {
        std::deque<int> q(front.begin(), front.end());
        std::vector<char> seen(gates_.size(), 0);
        for (int f : front) seen[static_cast<std::size_t>(f)] = 1;
        while (!q.empty() && extended.size() < 20) {
          const int gi = q.front();
          q.pop_front();
          for (int s : succ_[static_cast<std::size_t>(gi)]) {
            if (seen[static_cast<std::size_t>(s)]) continue;
            seen[static_cast<std::size_t>(s)] = 1;
            if (gates_[static_cast<std::size_t>(s)].is_cnot()) extended.push_back(s);
            q.push_back(s);
          }
        }
      }

      std::vector<std::pair<int, int>> candidates;
      for (int gi : front) {
        const Gate& g = gates_[static_cast<std::size_t>(gi)];
        for (int p : {phys(g.control), phys(g.target)}) {
          for (int nb : map_.neighbors(p)) candidates.emplace_back(std::min(p, nb), std::max(p, nb));
        }
      }
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

      auto moved = [&](int p, int a, int b) { return p == a ? b : (p == b ? a : p); };
      auto set_cost = [&](const std::vector<int>& set, int a, int b) {
        double s = 0.0;
        for (int gi : set) {
          const Gate& g = gates_[static_cast<std::size_t>(gi)];
          s += map_.distance(moved(phys(g.control), a, b), moved(phys(g.target), a, b));
        }
        return set.empty() ? 0.0 : s / static_cast<double>(set.size());
      };
      double best = 0.0;
      std::vector<std::pair<int, int>> best_swaps;
      for (auto [a, b] : candidates) {
        const double h = std::max(decay[static_cast<std::size_t>(a)], decay[static_cast<std::size_t>(b)]) *
                         (set_cost(front, a, b) + 0.5 * set_cost(extended, a, b));
        if (best_swaps.empty() || h < best - 1e-12) {
          best = h;
          best_swaps = {{a, b}};
        } else if (std::abs(h - best) <= 1e-12) {
          best_swaps.emplace_back(a, b);
        }
      }
      const auto [a, b] = best_swaps[rng.below(best_swaps.size())];
      emit_swap(a, b);
      decay[static_cast<std::size_t>(a)] += 0.001;
      decay[static_cast<std::size_t>(b)] += 0.001;
      if (++swaps_since_progress % 5 == 0) std::fill(decay.begin(), decay.end(), 1.0);
    }
    return l2p;
  }

 private:
  std::vector<Gate> gates_;
  const CouplingMap& map_;
  std::vector<std::vector<int>> succ_;
  std::vector<int> npred_;
};

// Random connected region for the used logical qubits, random assignment inside it.
std::vector<int> random_layout(const CouplingMap& map, int n_used, Rng& rng) {
  const int n = map.n_qubits();
  std::vector<int> order;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::deque<int> queue{static_cast<int>(rng.below(static_cast<std::uint64_t>(n)))};
  seen[static_cast<std::size_t>(queue.front())] = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    order.push_back(u);
    std::vector<int> nb = map.neighbors(u);
    std::shuffle(nb.begin(), nb.end(), rng.engine());
    for (int v : nb) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        queue.push_back(v);
      }
    }
  }
  std::shuffle(order.begin(), order.begin() + n_used, rng.engine());
  return order;  // logical l sits on order[l]
}

}  // namespace

TranspileReport route(const Circuit& circuit, const CouplingMap& map, int restarts, std::uint64_t seed) {
  if (circuit.n_qubits() > map.n_qubits()) {
    throw Error(ErrorKind::Topology, "circuit width " + std::to_string(circuit.n_qubits()) + " exceeds device '" +
                                         map.name() + "' with " + std::to_string(map.n_qubits()) + " qubits");
  }
  if (restarts < 1) throw Error(ErrorKind::InvalidArgument, "restarts must be at least 1");
  const Circuit logical = merge_single_qubit_runs(circuit).widened(map.n_qubits());
  const Router forward(logical.gates(), map);
  std::vector<Gate> reversed(logical.gates().rbegin(), logical.gates().rend());
  const Router backward(reversed, map);

  // on a complete graph every placement gives the same circuit shape
  const int runs = map.is_complete() ? 1 : restarts;
  std::vector<TranspileReport> reports(static_cast<std::size_t>(runs));
  parallel_for(static_cast<std::size_t>(runs), [&](std::size_t r) {
    Rng rng(seed, r);
    std::vector<int> layout = random_layout(map, std::max(1, circuit.n_qubits()), rng);
    if (!map.is_complete()) layout = backward.run(layout, rng, nullptr);
    Circuit out(map.n_qubits());
    TranspileReport rep;
    rep.initial_layout.assign(layout.begin(), layout.begin() + circuit.n_qubits());
    const auto final_layout = forward.run(layout, rng, &out);
    rep.final_layout.assign(final_layout.begin(), final_layout.begin() + circuit.n_qubits());
    rep.routed = merge_single_qubit_runs(out);
    rep.depth = rep.routed.depth();
    rep.cnot_count = rep.routed.cnot_count();
    rep.sq_count = rep.routed.sq_count();
    rep.best_restart = static_cast<int>(r);
    reports[r] = std::move(rep);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < reports.size(); ++r) {
    const auto& a = reports[r];
    const auto& b = reports[best];
    if (std::tie(a.depth, a.cnot_count) < std::tie(b.depth, b.cnot_count)) best = r;
  }
  TranspileReport rep = std::move(reports[best]);
  rep.restarts_used = runs;
  rep.seed = seed;
  rep.routed.tags = circuit.tags;
  rep.routed.tags["topology"] = map.name();
  rep.routed.tags["initial_layout"] = rep.initial_layout;
  rep.routed.tags["final_layout"] = rep.final_layout;
  return rep;
}

TranspileReport route_from_layout(const Circuit& circuit, const CouplingMap& map, const std::vector<int>& initial_layout,
                                  std::uint64_t seed) {
  const int n = map.n_qubits();
  if (circuit.n_qubits() > n) throw Error(ErrorKind::Topology, "circuit width exceeds device '" + map.name() + "'");
  if (static_cast<int>(initial_layout.size()) != circuit.n_qubits()) {
    throw Error(ErrorKind::InvalidArgument, "layout must place every logical qubit");
  }
  std::vector<int> layout = initial_layout;
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (int p : layout) {
    if (p < 0 || p >= n || used[static_cast<std::size_t>(p)]) throw Error(ErrorKind::InvalidArgument, "invalid layout");
    used[static_cast<std::size_t>(p)] = 1;
  }
  for (int p = 0; p < n; ++p) {
    if (!used[static_cast<std::size_t>(p)]) layout.push_back(p);
  }
  const Circuit logical = merge_single_qubit_runs(circuit).widened(n);
  const Router forward(logical.gates(), map);
  Rng rng(seed);
  Circuit out(n);
  TranspileReport rep;
  rep.initial_layout = initial_layout;
  const auto final_layout = forward.run(layout, rng, &out);
  rep.final_layout.assign(final_layout.begin(), final_layout.begin() + circuit.n_qubits());
  rep.routed = merge_single_qubit_runs(out);
  rep.depth = rep.routed.depth();
  rep.cnot_count = rep.routed.cnot_count();
  rep.sq_count = rep.routed.sq_count();
  rep.restarts_used = 1;
  rep.seed = seed;
  return rep;
}

// -- Fig. 2 style study -------------------------------------------------------------------

CompactCircuit compact(const TranspileReport& report) {
  std::vector<int> index(static_cast<std::size_t>(report.routed.n_qubits()), -1);
  CompactCircuit out;
  auto touch = [&](int phys) {
    if (index[static_cast<std::size_t>(phys)] < 0) {
      index[static_cast<std::size_t>(phys)] = static_cast<int>(out.physical.size());
      out.physical.push_back(phys);
    }
  };
  for (int q : report.initial_layout) touch(q);
  for (int q : report.final_layout) touch(q);
  for (const Gate& g : report.routed.gates()) {
    touch(g.target);
    if (g.is_cnot()) touch(g.control);
  }
  out.circuit = Circuit(static_cast<int>(out.physical.size()));
  for (Gate g : report.routed.gates()) {
    g.target = index[static_cast<std::size_t>(g.target)];
    if (g.is_cnot()) g.control = index[static_cast<std::size_t>(g.control)];
    out.circuit.add(g);
  }
  out.circuit.tags = report.routed.tags;
  for (int q : report.final_layout) out.final_qubit.push_back(index[static_cast<std::size_t>(q)]);
  return out;
}

Circuit hhl_benchmark_circuit(Family family, int width, std::uint64_t seed) {
  const int nv = width - 3;
  if (nv < min_width(family)) {
    throw Error(ErrorKind::InvalidArgument, std::string(to_string(family)) + " needs total width >= " +
                                                std::to_string(min_width(family) + 3));
  }
  const auto fam = gen_family(family, nv, seed);
  return build_hhl(fam.unitary, fam.spectrum, 0, true).circuit;
}

std::vector<StudyRow> depth_study(const std::vector<Family>& families, const std::vector<int>& widths,
                                  const CouplingMap& map, int instances, int restarts, std::uint64_t seed) {
  if (instances < 1) throw Error(ErrorKind::InvalidArgument, "instances must be at least 1");
  std::vector<StudyRow> rows;
  for (Family f : families) {
    for (int w : widths) {
      if (w - 3 < min_width(f)) continue;
      if (w > map.n_qubits()) throw Error(ErrorKind::Topology, "width " + std::to_string(w) + " exceeds " + map.name());
      std::vector<double> depth(static_cast<std::size_t>(instances)), cnot(static_cast<std::size_t>(instances));
      for (int i = 0; i < instances; ++i) {
        const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(i));
        const auto rep = route(hhl_benchmark_circuit(f, w, s), map, restarts, s);
        depth[static_cast<std::size_t>(i)] = static_cast<double>(rep.depth);
        cnot[static_cast<std::size_t>(i)] = static_cast<double>(rep.cnot_count);
      }
      auto stats = [&](const std::vector<double>& v) {
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double se = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size())) : 0.0;
        return std::pair{mean, se};
      };
      StudyRow row;
      row.family = f;
      row.width = w;
      row.instances = instances;
      std::tie(row.mean_depth, row.se_depth) = stats(depth);
      std::tie(row.mean_cnot, row.se_cnot) = stats(cnot);
      rows.push_back(row);
    }
  }
  return rows;
}

std::string study_csv(const std::vector<StudyRow>& rows) {
  std::ostringstream os;
  os << "family,width,instances,mean_depth,se_depth,mean_cnot,se_cnot\n";
  os.precision(10);
  for (const auto& r : rows) {
    os << to_string(r.family) << ',' << r.width << ',' << r.instances << ',' << r.mean_depth << ',' << r.se_depth << ','
       << r.mean_cnot << ',' << r.se_cnot << '\n';
  }
  return os.str();
}

}  // namespace hhlb
