#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "cli_common.hpp"
#include "hhlb/hhl.hpp"
#include "hhlb/metrics.hpp"
#include "hhlb/sim.hpp"
#include "hhlb/transpile.hpp"

using namespace hhlb;
using namespace hhlb::cli;

namespace {

Circuit load_circuit(const std::string& path) {
  if (path.empty()) throw Error(ErrorKind::InvalidArgument, "--circuit is required");
  return circuit_from_json(read_json(path));
}

Backend backend_named(const std::string& name, int n_small) {
  if (name == "sv") return default_backend();
  if (name == "sfa") {
    return [n_small](const Circuit& c, const StateVector& init) { return sfa_run(c, find_cut(c, n_small), init); };
  }
  throw Error(ErrorKind::InvalidArgument, "unknown backend '" + name + "'");
}

ojson header(const char* kind) {
  return ojson{{"schema", std::string("hhlb.") + kind}, {"schema_version", kSchemaVersion}, {"tool_version", kToolVersion}};
}

void print_error(const std::string& kind, const std::string& message) {
  std::cout << ojson{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

struct HhlArgs {
  std::string family = "tp1";
  int n_vec = 2;
  std::uint64_t seed = 0;
  int p = 0;
  bool full = false;
  double c_rot = 0.0;

  void add_to(CLI::App* app) {
    app->add_option("--family", family, "tp1 | tp2 | ntp")->capture_default_str();
    app->add_option("--n-vec", n_vec, "vector-register qubits")->capture_default_str();
    app->add_option("--seed", seed, "family instance seed")->capture_default_str();
    app->add_option("--p", p, "phase qubits (0 = automatic)")->capture_default_str();
    app->add_flag("--full", full, "plain HHL instead of the hybrid reduction");
    app->add_option("--c-rot", c_rot, "AQE constant (0 = smallest eigenphase)");
  }
  HHLProgram build() const {
    const auto inst = gen_family(family_from_string(family), n_vec, seed);
    return build_hhl(inst.unitary, inst.spectrum, p, !full, c_rot);
  }
  ojson describe() const {
    return ojson{{"family", family}, {"n_vec", n_vec}, {"seed", seed}, {"hybrid", !full}};
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hhlb: hybrid HHL circuit generation, simulation and benchmarking"};
  app.require_subcommand(1);
  int threads = 0, max_qubits = 0;
  app.add_option("--threads", threads, "worker threads (sets HHLB_THREADS)");
  app.add_option("--max-qubits", max_qubits, "state-vector width cap (sets HHLB_MAX_QUBITS)");

  std::vector<std::pair<CLI::App*, std::function<int()>>> actions;
  auto on = [&](CLI::App* sub, std::function<int()> fn) { actions.emplace_back(sub, std::move(fn)); };

  // gen
  std::string out;
  auto* gen = app.add_subcommand("gen", "random family unitary, or an H-HHL benchmark circuit with --width");
  std::string gen_family_name = "tp1";
  int gen_nvec = 2, gen_width = 0;
  std::uint64_t gen_seed = 0;
  gen->add_option("--family", gen_family_name, "tp1 | tp2 | ntp")->capture_default_str();
  gen->add_option("--n-vec", gen_nvec, "qubits of the unitary")->capture_default_str();
  gen->add_option("--width", gen_width, "total width of an H-HHL benchmark circuit");
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out,-o", out, "output file (default stdout)");
  on(gen, [&] {
    const Family f = family_from_string(gen_family_name);
    emit(to_json(gen_width > 0 ? hhl_benchmark_circuit(f, gen_width, gen_seed) : gen_family(f, gen_nvec, gen_seed).unitary),
         out);
    return 0;
  });

  // transpile
  auto* tr = app.add_subcommand("transpile", "route a circuit onto a coupling map");
  tr->require_subcommand(0, 1);
  std::string tr_circuit, tr_map = "rochester53";
  int tr_restarts = 20;
  std::uint64_t tr_seed = 0;
  bool tr_compact = false;
  tr->add_option("--circuit", tr_circuit, "circuit JSON");
  tr->add_option("--map", tr_map, "topology name, all_to_all(n), line(n) or file")->capture_default_str();
  tr->add_option("--restarts", tr_restarts)->capture_default_str();
  tr->add_option("--seed", tr_seed)->capture_default_str();
  tr->add_flag("--compact", tr_compact, "keep only the touched physical qubits");
  tr->add_option("--out,-o", out);
  on(tr, [&] {
    const CouplingMap map = load_topology(tr_map);
    const auto report = route(load_circuit(tr_circuit), map, tr_restarts, tr_seed);
    ojson j = header("transpile");
    j["map"] = map.name();
    j["restarts"] = tr_restarts;
    j["seed"] = tr_seed;
    j["depth"] = report.depth;
    j["cnot_count"] = report.cnot_count;
    j["sq_count"] = report.sq_count;
    j["best_restart"] = report.best_restart;
    j["initial_layout"] = report.initial_layout;
    j["final_layout"] = report.final_layout;
    if (tr_compact) {
      const auto small = compact(report);
      j["physical_qubits"] = small.physical;
      j["final_qubit"] = small.final_qubit;
      j["circuit"] = to_json(small.circuit);
    } else {
      j["circuit"] = to_json(report.routed);
    }
    emit(j, out);
    return 0;
  });

  auto* study = tr->add_subcommand("study", "mean routed depth and CNOT count of H-HHL circuits");
  std::string st_families, st_widths = "4..20", st_map = "rochester53", st_format = "csv";
  int st_instances = 140, st_restarts = 20;
  std::uint64_t st_seed = 0;
  study->add_option("--families", st_families, "comma list (default all)");
  study->add_option("--widths", st_widths, "4..20, 4..20:2 or 4,6,8")->capture_default_str();
  study->add_option("--map", st_map)->capture_default_str();
  study->add_option("--instances", st_instances)->capture_default_str();
  study->add_option("--restarts", st_restarts)->capture_default_str();
  study->add_option("--seed", st_seed)->capture_default_str();
  study->add_option("--format", st_format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  study->add_option("--out,-o", out);
  on(study, [&] {
    const auto rows = depth_study(parse_families(st_families), parse_int_list(st_widths), load_topology(st_map),
                                  st_instances, st_restarts, st_seed);
    if (st_format == "csv") {
      if (out.empty() || out == "-") {
        std::cout << study_csv(rows);
      } else {
        write_text(out, study_csv(rows));
      }
      return 0;
    }
    ojson j = header("study");
    j["map"] = st_map;
    j["instances"] = st_instances;
    j["restarts"] = st_restarts;
    j["seed"] = st_seed;
    auto arr = ojson::array();
    for (const auto& r : rows) {
      arr.push_back({{"family", to_string(r.family)}, {"width", r.width}, {"instances", r.instances},
                     {"mean_depth", r.mean_depth}, {"se_depth", r.se_depth}, {"mean_cnot", r.mean_cnot},
                     {"se_cnot", r.se_cnot}});
    }
    j["rows"] = arr;
    emit(j, out);
    return 0;
  });

  // sim run
  auto* sim = app.add_subcommand("sim", "simulation");
  sim->require_subcommand(1);
  auto* run = sim->add_subcommand("run", "run a circuit from |0..0>");
  std::string sim_circuit, sim_backend = "sv", sim_noise, sim_dump;
  int sim_nsmall = -1;
  std::uint64_t sim_traj = 1000, sim_shots = 0, sim_seed = 0;
  run->add_option("--circuit", sim_circuit, "circuit JSON")->required();
  run->add_option("--backend", sim_backend, "sv | sfa")->check(CLI::IsMember({"sv", "sfa"}))->capture_default_str();
  run->add_option("--n-small", sim_nsmall, "qubits on the smaller SFA side (default balanced)");
  run->add_option("--noise", sim_noise, "e1,e2,er Pauli and readout error rates");
  run->add_option("--trajectories", sim_traj, "Monte-Carlo trajectories when noisy")->capture_default_str();
  run->add_option("--shots", sim_shots, "sample this many shots (0 = exact distribution)")->capture_default_str();
  run->add_option("--seed", sim_seed)->capture_default_str();
  run->add_option("--dump-state", sim_dump, "write the final state vector JSON here");
  run->add_option("--out,-o", out);
  on(run, [&] {
    const Circuit c = load_circuit(sim_circuit);
    const NoiseModel noise = parse_noise(sim_noise, sim_seed);
    const StateVector zero = StateVector::basis(c.n_qubits());
    ojson j = header("sim");
    j["n_qubits"] = c.n_qubits();
    j["backend"] = sim_backend;
    j["noise"] = noise_json(noise);
    j["shots"] = sim_shots;
    j["seed"] = sim_seed;
    ProbDist probs = ProbDist::uniform(1);
    if (!noise.noiseless() && (noise.e1 > 0.0 || noise.e2 > 0.0)) {
      if (sim_backend != "sv") throw Error(ErrorKind::InvalidArgument, "gate noise needs the sv backend");
      if (!sim_dump.empty()) throw Error(ErrorKind::InvalidArgument, "a noisy run has no single final state");
      j["trajectories"] = sim_traj;
      probs = noisy_run(c, zero, noise, sim_traj);
      if (sim_shots > 0) probs = sample(probs, sim_shots, sim_seed);
    } else {
      StateVector psi = zero;
      if (sim_backend == "sfa") {
        const CutPlan plan = find_cut(c, sim_nsmall);
        j["cut"] = {{"part_b", plan.part_b}, {"k", plan.k}};
        psi = sfa_run(c, plan, zero);
      } else {
        psi = schrodinger_run(c, zero);
      }
      if (!sim_dump.empty()) write_text(sim_dump, to_json(psi).dump() + "\n");
      if (sim_shots > 0) {
        probs = sample(psi, sim_shots, noise, sim_seed);
      } else {
        probs = apply_readout_noise(ProbDist::from_state(psi), noise.er);
      }
    }
    j["probs"] = probs_json(probs);
    emit(j, out);
    return 0;
  });

  // hhl build | run
  auto* hhl = app.add_subcommand("hhl", "H-HHL programs for generated families");
  hhl->require_subcommand(1);
  HhlArgs hb, hr;
  auto* hbuild = hhl->add_subcommand("build", "emit the circuit and register layout");
  hb.add_to(hbuild);
  hbuild->add_option("--out,-o", out);
  on(hbuild, [&] {
    const auto prog = hb.build();
    ojson j = header("hhl_program");
    j["instance"] = hb.describe();
    j["qpe_gate_count"] = prog.qpe_gate_count;
    j["gate_count"] = prog.circuit.size();
    j["cnot_count"] = prog.circuit.cnot_count();
    j["layout"] = to_json(prog.layout);
    j["circuit"] = to_json(prog.circuit);
    emit(j, out);
    return 0;
  });
  auto* hrun = hhl->add_subcommand("run", "simulate, post-select the ancilla and compare with the classical solution");
  hr.add_to(hrun);
  std::string hr_backend = "sv";
  std::uint64_t hr_tomo = 0;
  hrun->add_option("--backend", hr_backend, "sv | sfa")->check(CLI::IsMember({"sv", "sfa"}))->capture_default_str();
  hrun->add_option("--tomography-shots", hr_tomo, "also reconstruct the vector register from sampled tomography");
  hrun->add_option("--out,-o", out);
  on(hrun, [&] {
    const auto prog = hr.build();
    const Backend backend = backend_named(hr_backend, -1);
    const auto report = run_hhl(prog, backend);
    ojson j = header("hhl_report");
    j["instance"] = hr.describe();
    j["backend"] = hr_backend;
    const ojson body = to_json(report);
    for (const auto& [k, v] : body.items()) j[k] = v;
    if (hr_tomo > 0) {
      const auto t = hhl_tomography(prog, hr_tomo, hr.seed, backend);
      j["tomography"] = {{"shots_per_setting", hr_tomo},
                         {"fidelity", state_fidelity(report.oracle_state, t.rho)},
                         {"predicted_error", t.predicted_error},
                         {"insufficient_shots", t.insufficient_shots}};
    }
    emit(j, out);
    return 0;
  });

  // metrics
  auto* met = app.add_subcommand("metrics", "fidelity metrics and estimators");
  met->require_subcommand(1);
  auto* mx = met->add_subcommand("xeb", "XEB fidelity of measured vs ideal distributions");
  std::string mx_in;
  mx->add_option("--in", mx_in, "JSON {pairs:[{p_e, p_t}], ancilla?}")->required();
  mx->add_option("--out,-o", out);
  on(mx, [&] {
    const auto in = read_json(mx_in);
    const std::optional<int> anc = in.contains("ancilla") ? std::optional<int>(in.at("ancilla").get<int>()) : std::nullopt;
    XebInput pairs;
    for (const auto& p : in.at("pairs")) {
      ProbDist pe(Eigen::Map<const Eigen::VectorXd>(p.at("p_e").get<std::vector<double>>().data(),
                                                    static_cast<Index>(p.at("p_e").size())),
                  false);
      ProbDist pt(Eigen::Map<const Eigen::VectorXd>(p.at("p_t").get<std::vector<double>>().data(),
                                                    static_cast<Index>(p.at("p_t").size())),
                  false);
      if (anc) {
        pairs.push_back({filter_ancilla(pe, *anc), filter_ancilla(pt, *anc)});
      } else {
        pairs.push_back({pe.normalized(), pt.normalized()});
      }
    }
    ojson j = header("xeb");
    j["circuits"] = pairs.size();
    j["f_xeb"] = xeb(pairs);
    emit(j, out);
    return 0;
  });

  auto* md = met->add_subcommand("dem", "digital error model prediction");
  std::string md_counts, md_circuit, md_rates;
  md->add_option("--counts", md_counts, "n,sq_gates,cnots");
  md->add_option("--circuit", md_circuit, "take the counts from a circuit JSON");
  md->add_option("--rates", md_rates, "e1,e2,er")->required();
  md->add_option("--out,-o", out);
  on(md, [&] {
    GateCounts counts;
    if (!md_circuit.empty()) {
      counts = gate_counts(load_circuit(md_circuit));
    } else {
      const auto v = parse_int_list(md_counts.empty() ? std::string("x") : md_counts);
      if (v.size() != 3) throw Error(ErrorKind::InvalidArgument, "--counts is n,sq_gates,cnots");
      counts = {v[0], static_cast<std::size_t>(v[1]), static_cast<std::size_t>(v[2])};
    }
    const NoiseModel rates = parse_noise(md_rates, 0);
    const auto d = dem_predict(counts, rates);
    ojson j = header("dem");
    j["counts"] = {{"n", counts.n}, {"sq_gates", counts.sq_gates}, {"cnots", counts.cnots}};
    j["rates"] = {{"e1", rates.e1}, {"e2", rates.e2}, {"er", rates.er}};
    j["f_r"] = d.f_r;
    j["f_1qg"] = d.f_1qg;
    j["f_2qg"] = d.f_2qg;
    j["f_xeb"] = d.f_xeb;
    emit(j, out);
    return 0;
  });

  auto* mq = met->add_subcommand("qv", "quantum volume by the heavy-output protocol");
  std::string mq_map = "johannesburg20", mq_noise;
  int mq_width = 5;
  QvOptions mq_opts;
  mq->add_option("--map", mq_map)->capture_default_str();
  mq->add_option("--noise", mq_noise, "e1,e2,er");
  mq->add_option("--max-width", mq_width, "2..8")->capture_default_str();
  mq->add_option("--circuits", mq_opts.circuits)->capture_default_str();
  mq->add_option("--trajectories", mq_opts.trajectories)->capture_default_str();
  mq->add_option("--restarts", mq_opts.restarts)->capture_default_str();
  mq->add_option("--seed", mq_opts.seed)->capture_default_str();
  mq->add_option("--out,-o", out);
  on(mq, [&] {
    const NoiseModel noise = parse_noise(mq_noise, mq_opts.seed);
    const auto r = quantum_volume(load_topology(mq_map), noise, mq_width, mq_opts);
    ojson j = header("qv");
    j["map"] = mq_map;
    j["noise"] = noise_json(noise);
    j["circuits"] = mq_opts.circuits;
    j["trajectories"] = mq_opts.trajectories;
    j["quantum_volume"] = r.volume;
    auto arr = ojson::array();
    for (const auto& w : r.widths) {
      arr.push_back({{"m", w.m}, {"mean_hop", w.mean_hop}, {"sigma", w.sigma}, {"passed", w.passed}});
    }
    j["widths"] = arr;
    emit(j, out);
    return 0;
  });

  auto* mt = met->add_subcommand("table", "supremacy estimate table (T_f = T_SFA * F_XEB)");
  std::string mt_config, mt_format = "md";
  mt->add_option("--config", mt_config, "rows JSON (default: bundled table1.json)");
  mt->add_option("--format", mt_format, "md | csv | json")->check(CLI::IsMember({"md", "csv", "json"}))->capture_default_str();
  mt->add_option("--out,-o", out);
  on(mt, [&] {
    const auto entries =
        supremacy_table(supremacy_rows_from_json(read_json(mt_config.empty() ? data_dir() + "/table1.json" : mt_config)));
    std::string text;
    if (mt_format == "md") {
      text = table_markdown(entries);
    } else if (mt_format == "csv") {
      text = table_csv(entries);
    } else {
      ojson j = header("table");
      auto arr = ojson::array();
      for (const auto& e : entries) {
        arr.push_back({{"family", e.row.family}, {"n", e.row.n}, {"device", e.row.device}, {"f_r", e.fidelity.f_r},
                       {"f_1qg", e.fidelity.f_1qg}, {"f_2qg", e.fidelity.f_2qg}, {"f_xeb", e.fidelity.f_xeb},
                       {"t_sfa_s", e.row.t_sfa}, {"t_f_s", e.t_f}, {"t_f", format_duration(e.t_f)}});
      }
      j["rows"] = arr;
      text = j.dump(2) + "\n";
    }
    if (out.empty() || out == "-") {
      std::cout << text;
    } else {
      write_text(out, text);
    }
    return 0;
  });

  // estimate
  auto* est = app.add_subcommand("estimate", "classical simulation cost model");
  std::string es_circuit;
  CircuitStats es_stats;
  int es_nsmall = -1, es_k = -1;
  Machine machine;
  double es_fid = -1.0;
  est->add_option("--circuit", es_circuit, "take n, depth, gate count, treewidth and the cut from a circuit");
  est->add_option("--n", es_stats.n);
  est->add_option("--depth", es_stats.depth);
  est->add_option("--gates", es_stats.gate_count);
  est->add_option("--treewidth", es_stats.treewidth);
  est->add_option("--n-small", es_nsmall, "qubits on the smaller SFA side");
  est->add_option("--k", es_k, "CNOTs crossing the cut");
  est->add_option("--c-family", machine.c_family, "seconds per amplitude update per qubit")->capture_default_str();
  est->add_option("--cores", machine.cores)->capture_default_str();
  est->add_option("--ram-qubits", machine.ram_qubits, "widest state vector held in memory")->capture_default_str();
  est->add_option("--fidelity", es_fid, "F_XEB for T_f");
  est->add_option("--out,-o", out);
  on(est, [&] {
    std::optional<double> fid = es_fid >= 0.0 ? std::optional<double>(es_fid) : std::nullopt;
    CostEstimate cost;
    ojson j = header("estimate");
    if (!es_circuit.empty()) {
      const Circuit c = load_circuit(es_circuit);
      es_stats = circuit_stats(c);
      if (es_k < 0) {
        const CutPlan plan = find_cut(c, es_nsmall);
        es_nsmall = plan.n_small();
        es_k = plan.k;
      }
    } else if (es_stats.n <= 0) {
      throw Error(ErrorKind::InvalidArgument, "give --circuit or --n");
    }
    if (es_nsmall < 0) es_nsmall = es_stats.n / 2;
    if (es_k < 0) throw Error(ErrorKind::InvalidArgument, "--k is required without --circuit");
    cost = estimate_costs(es_stats, es_nsmall, es_k, machine, fid);
    j["n"] = es_stats.n;
    j["depth"] = es_stats.depth;
    j["gates"] = es_stats.gate_count;
    j["treewidth"] = es_stats.treewidth;
    j["n_small"] = es_nsmall;
    j["k"] = es_k;
    j["c_family"] = cost.c_family;
    j["t_sa_s"] = cost.t_sa;
    j["t_sfa_s"] = cost.t_sfa;
    j["t_tn_s"] = cost.t_tn;
    j["t_tn_exponent"] = cost.t_tn_exponent;
    if (cost.t_f) j["t_f_s"] = *cost.t_f;
    j["hardware_s"] = hardware_sampling_seconds(es_stats.n);
    j["readable"] = {{"t_sa", format_duration(cost.t_sa)},
                     {"t_sfa", format_duration(cost.t_sfa)},
                     {"hardware", format_duration(hardware_sampling_seconds(es_stats.n))}};
    if (cost.t_f) j["readable"]["t_f"] = format_duration(*cost.t_f);
    emit(j, out);
    return 0;
  });

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "run a fig2 | fig4 | table1 study from a JSON config");
  std::string pp_config, pp_out;
  pipe->add_option("--config", pp_config, "experiment config JSON")->required();
  pipe->add_option("--out,-o", pp_out, "output directory (overrides config.output_dir)");
  on(pipe, [&] {
    const auto cfg = read_json(pp_config);
    std::string dir = pp_out;
    if (dir.empty() && cfg.contains("output_dir")) dir = cfg.at("output_dir").get<std::string>();
    if (dir.empty()) throw Error(ErrorKind::InvalidArgument, "no output directory (--out or output_dir)");
    return run_pipeline(cfg, dir);
  });

  // verify
  auto* ver = app.add_subcommand("verify", "self-check: oracle, backends, hybrid reduction, XEB, topologies");
  bool quick = false;
  std::vector<std::string> topo_files;
  ver->add_flag("--quick", quick, "reduced widths and seeds");
  ver->add_option("--topology", topo_files, "additional topology files to load");
  on(ver, [&] { return run_verify(quick, topo_files); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }
  if (threads > 0) setenv("HHLB_THREADS", std::to_string(threads).c_str(), 1);
  if (max_qubits > 0) setenv("HHLB_MAX_QUBITS", std::to_string(max_qubits).c_str(), 1);

  // deepest parsed subcommand wins (transpile vs transpile study)
  std::function<int()> action;
  for (auto& [sub, fn] : actions) {
    if (sub->parsed()) action = fn;
  }
  try {
    return action();
  } catch (const Error& e) {
    print_error(to_string(e.kind()), e.what());
  } catch (const nlohmann::json::exception& e) {
    print_error("invalid_argument", e.what());
  } catch (const std::exception& e) {
    print_error("internal", e.what());
  }
  return 1;
}
