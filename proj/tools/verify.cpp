#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "cli_common.hpp"
#include "hhlb/hhl.hpp"
#include "hhlb/metrics.hpp"
#include "hhlb/rng.hpp"
#include "hhlb/transpile.hpp"

namespace hhlb::cli {

namespace {

constexpr Family kFamilies[] = {Family::TP1, Family::TP2, Family::NTP};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Check oracle_check(bool quick) {
  const int max_nv = quick ? 3 : 6;
  const std::uint64_t seeds = quick ? 3 : 20;
  double worst = 1.0;
  int n = 0;
  for (Family f : kFamilies) {
    for (int nv = min_width(f); nv <= max_nv; ++nv) {
      for (std::uint64_t s = 0; s < seeds; ++s) {
        const auto inst = gen_family(f, nv, s);
        worst = std::min(worst, run_hhl(build_hhl(inst.unitary, inst.spectrum, 0, true)).fidelity);
        ++n;
      }
    }
  }
  return {"oracle", worst >= 1 - 1e-9, fmt("%d H-HHL programs, min fidelity vs classical solve 1-%.1e", n, 1 - worst)};
}

Check backend_check(bool quick) {
  const std::vector<int> widths = quick ? std::vector<int>{8, 10} : std::vector<int>{8, 10, 12, 14};
  const std::uint64_t seeds = quick ? 2 : 5;
  double worst = 0.0;
  int n = 0, max_k = 0;
  for (Family f : kFamilies) {
    for (int w : widths) {
      for (std::uint64_t s = 0; s < seeds; ++s) {
        const Circuit c = hhl_benchmark_circuit(f, w, s);
        const CutPlan plan = find_cut(c);
        if (plan.k > 12) continue;
        const StateVector zero = StateVector::basis(w);
        worst = std::max(worst, (sfa_run(c, plan, zero).amps() - schrodinger_run(c, zero).amps()).cwiseAbs().maxCoeff());
        max_k = std::max(max_k, plan.k);
        ++n;
      }
    }
    for (int nv = 4; nv <= (quick ? 8 : 14); nv += 2) {
      for (std::uint64_t s = 0; s < seeds; ++s) {
        const Circuit c = gen_family(f, nv, s).unitary;
        const CutPlan plan = find_cut(c);
        if (plan.k > 12) continue;
        const StateVector zero = StateVector::basis(nv);
        worst = std::max(worst, (sfa_run(c, plan, zero).amps() - schrodinger_run(c, zero).amps()).cwiseAbs().maxCoeff());
        max_k = std::max(max_k, plan.k);
        ++n;
      }
    }
  }
  return {"backend", n > 0 && worst < 1e-10, fmt("%d circuits, k <= %d, max |sfa - sv| %.1e", n, max_k, worst)};
}

Check hybrid_check(bool quick) {
  const int max_nv = quick ? 3 : 4;
  const std::uint64_t seeds = quick ? 3 : 10;
  double worst = 1.0;
  int n = 0, fewer = 0;
  for (Family f : kFamilies) {
    for (int nv = min_width(f); nv <= max_nv; ++nv) {
      for (std::uint64_t s = 0; s < seeds; ++s) {
        const auto inst = gen_family(f, nv, s);
        const auto hybrid = build_hhl(inst.unitary, inst.spectrum, 2, true);
        const auto full = build_hhl(inst.unitary, inst.spectrum, 3, false);
        const auto a = run_hhl(hybrid), b = run_hhl(full);
        worst = std::min(worst, state_fidelity(a.solution_state, b.solution_state));
        fewer += hybrid.qpe_gate_count < full.qpe_gate_count;
        ++n;
      }
    }
  }
  return {"hybrid", worst >= 1 - 1e-9 && fewer == n,
          fmt("%d pairs p=2 vs p=3: min fidelity 1-%.1e, smaller QPE in %d", n, 1 - worst, fewer)};
}

Check xeb_check(bool quick) {
  const int m = quick ? 5 : 20;
  constexpr std::uint64_t kShots = 100000;
  XebInput clean, flat;
  for (int j = 0; j < m; ++j) {
    const Circuit c = hhl_benchmark_circuit(kFamilies[j % 3], 8, static_cast<std::uint64_t>(j));
    auto pair = noisy_xeb_pair(c, 7, NoiseModel{}, 1, kShots);
    const ProbDist uniform = sample(ProbDist::uniform(256), kShots, mix_seed(0xf1a7, static_cast<std::uint64_t>(j)));
    flat.push_back({filter_ancilla(uniform, 7), pair.p_t});
    clean.push_back(std::move(pair));
  }
  const double f_clean = xeb(clean), f_flat = xeb(flat);
  return {"xeb", std::abs(f_clean - 1.0) <= 0.05 && std::abs(f_flat) <= 0.05,
          fmt("%d circuits, 1e5 shots: noiseless %.4f, uniform sampler %+.4f", m, f_clean, f_flat)};
}

Check topology_check(const std::vector<std::string>& extra) {
  std::vector<std::string> specs{"melbourne15", "johannesburg20", "rochester53", "sycamore53"};
  specs.insert(specs.end(), extra.begin(), extra.end());
  std::string failures;
  for (const auto& s : specs) {
    try {
      load_topology(s);
    } catch (const Error& e) {
      failures += (failures.empty() ? "" : "; ") + s + ": " + to_string(e.kind()) + " (" + e.what() + ")";
    } catch (const std::exception& e) {
      failures += (failures.empty() ? "" : "; ") + s + ": " + e.what();
    }
  }
  if (failures.empty()) return {"topology", true, fmt("%zu maps loaded", specs.size())};
  return {"topology", false, failures};
}

}  // namespace

int run_verify(bool quick, const std::vector<std::string>& topologies) {
  const std::vector<std::pair<const char*, std::function<Check()>>> suite{
      {"oracle", [&] { return oracle_check(quick); }},
      {"backend", [&] { return backend_check(quick); }},
      {"hybrid", [&] { return hybrid_check(quick); }},
      {"xeb", [&] { return xeb_check(quick); }},
      {"topology", [&] { return topology_check(topologies); }},
  };
  int failed = 0;
  std::printf("%-9s %-5s %8s  %s\n", "check", "", "seconds", "detail");
  for (const auto& [name, run] : suite) {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = run();
    } catch (const Error& e) {
      c = {name, false, std::string(to_string(e.kind())) + ": " + e.what()};
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%-9s %-5s %8.2f  %s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL", c.seconds, c.detail.c_str());
    std::fflush(stdout);
    failed += !c.pass;
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace hhlb::cli
