#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "cli_common.hpp"
#include "hhlb/metrics.hpp"
#include "hhlb/rng.hpp"
#include "hhlb/transpile.hpp"

namespace fs = std::filesystem;

namespace hhlb::cli {

namespace {

using json = nlohmann::json;

const std::set<std::string> kKeys{"kind",  "families", "widths",       "instances", "restarts", "shots",  "noise",
                                  "topology", "seed",  "trajectories", "table",     "rows",     "output_dir"};

json noise_entry(const json& j) {
  NoiseModel n;
  n.e1 = j.value("e1", 0.0);
  n.e2 = j.value("e2", 0.0);
  n.er = j.value("er", 0.0);
  n.validate();
  return json{{"e1", n.e1}, {"e2", n.e2}, {"er", n.er}};
}

// Defaults filled in, output_dir dropped: the hash covers what determines the results.
json normalize(const json& in) {
  if (!in.is_object()) throw Error(ErrorKind::InvalidArgument, "config must be a JSON object");
  for (const auto& [k, v] : in.items()) {
    if (!kKeys.count(k)) throw Error(ErrorKind::InvalidArgument, "unknown config key '" + k + "'");
  }
  json c;
  const std::string kind = in.at("kind").get<std::string>();
  if (kind != "fig2" && kind != "fig4" && kind != "table1") {
    throw Error(ErrorKind::InvalidArgument, "kind must be fig2, fig4 or table1");
  }
  c["kind"] = kind;
  c["seed"] = in.value("seed", std::uint64_t{0});
  if (kind == "table1") {
    if (in.contains("rows")) {
      c["rows"] = in.at("rows");
    } else {
      // rows are inlined so the hash follows the table contents, not its path
      const auto t = read_json(in.value("table", data_dir() + "/table1.json"));
      c["rows"] = t.is_array() ? t : t.at("rows");
    }
    return c;
  }

  json fams = json::array();
  if (in.contains("families")) {
    for (const auto& f : in.at("families")) fams.push_back(to_string(family_from_string(f.get<std::string>())));
  } else {
    fams = {"TP1", "TP2", "NTP"};
  }
  if (fams.empty()) throw Error(ErrorKind::InvalidArgument, "families is empty");
  c["families"] = fams;

  std::vector<int> widths;
  if (!in.contains("widths")) {
    widths = kind == "fig2" ? parse_int_list("4..20") : parse_int_list("8..12:2");
  } else if (in.at("widths").is_string()) {
    widths = parse_int_list(in.at("widths").get<std::string>());
  } else {
    widths = in.at("widths").get<std::vector<int>>();
  }
  for (const auto& f : fams) {
    const int lowest = min_width(family_from_string(f.get<std::string>())) + 3;
    bool any = false;
    for (int w : widths) any = any || w >= lowest;
    if (!any) throw Error(ErrorKind::InvalidArgument, "no width reaches the minimum " + std::to_string(lowest) + " of " + f.get<std::string>());
  }
  for (int w : widths) {
    if (w < 4) throw Error(ErrorKind::InvalidArgument, "width " + std::to_string(w) + " is below the H-HHL minimum of 4");
  }
  c["widths"] = widths;

  const int instances = in.value("instances", 140);
  if (instances < 1) throw Error(ErrorKind::InvalidArgument, "instances must be at least 1");
  c["instances"] = instances;

  if (kind == "fig2") {
    const int restarts = in.value("restarts", 20);
    if (restarts < 1) throw Error(ErrorKind::InvalidArgument, "restarts must be at least 1");
    c["restarts"] = restarts;
    c["topology"] = in.value("topology", std::string("rochester53"));
    load_topology(c["topology"].get<std::string>());
  } else {
    c["shots"] = in.value("shots", std::uint64_t{100000});
    c["trajectories"] = in.value("trajectories", std::uint64_t{1000});
    if (c["trajectories"].get<std::uint64_t>() < 1) throw Error(ErrorKind::InvalidArgument, "trajectories must be at least 1");
    json noise = json::array();
    if (!in.contains("noise")) {
      for (double e1 : {1e-3, 3e-3, 1e-2}) noise.push_back(noise_entry(json{{"e1", e1}, {"e2", 5 * e1}}));
    } else if (in.at("noise").is_array()) {
      for (const auto& n : in.at("noise")) noise.push_back(noise_entry(n));
    } else {
      noise.push_back(noise_entry(in.at("noise")));
    }
    c["noise"] = noise;
  }
  return c;
}

struct Artifacts {
  fs::path root;
  std::string stamp;  // first line of every CSV
  json list = json::array();

  void put(const std::string& rel, const std::string& text) {
    write_text(root / rel, text);
    list.push_back(json{{"path", rel}, {"fnv1a", hex64(fnv1a(text))}});
  }
  void put_json(const std::string& rel, const ojson& j) { put(rel, j.dump(2) + "\n"); }
};

std::string slug(const std::string& family, int width) {
  std::string s;
  for (char ch : family) s += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s + "_w" + std::to_string(width);
}

json run_fig2(const json& c, Artifacts& art, const ojson& tag) {
  const CouplingMap map = load_topology(c["topology"].get<std::string>());
  const auto widths = c["widths"].get<std::vector<int>>();
  const std::uint64_t seed = c["seed"];
  std::vector<Family> fams;
  for (const auto& f : c["families"]) fams.push_back(family_from_string(f.get<std::string>()));
  const auto rows = depth_study(fams, widths, map, c["instances"].get<int>(), c["restarts"].get<int>(), seed);
  art.put("metrics.csv", art.stamp + study_csv(rows));

  json results = json::array();
  for (const auto& r : rows) {
    const std::string name = slug(to_string(r.family), r.width);
    Circuit first = hhl_benchmark_circuit(r.family, r.width, mix_seed(seed, 0));
    ojson cj = tag;
    cj["instance_seed"] = mix_seed(seed, 0);
    cj["circuit"] = to_json(first);
    art.put_json("circuits/" + name + "_i0.json", cj);

    ojson rep = tag;
    rep["family"] = to_string(r.family);
    rep["width"] = r.width;
    rep["map"] = map.name();
    rep["instances"] = r.instances;
    rep["mean_depth"] = r.mean_depth;
    rep["se_depth"] = r.se_depth;
    rep["mean_cnot"] = r.mean_cnot;
    rep["se_cnot"] = r.se_cnot;
    art.put_json("reports/" + name + ".json", rep);
    results.push_back(json{{"family", to_string(r.family)}, {"width", r.width}, {"mean_depth", r.mean_depth},
                           {"mean_cnot", r.mean_cnot}});
  }
  return results;
}

json run_fig4(const json& c, Artifacts& art, const ojson& tag) {
  const std::uint64_t seed = c["seed"];
  const int m = c["instances"];
  const std::uint64_t shots = c["shots"], trajectories = c["trajectories"];
  std::ostringstream csv;
  csv.precision(10);
  csv << "family,width,e1,e2,er,circuits,f_xeb_measured,f_xeb_dem,rel\n";
  json results = json::array();
  for (const auto& fj : c["families"]) {
    const Family f = family_from_string(fj.get<std::string>());
    for (int w : c["widths"].get<std::vector<int>>()) {
      if (w - 3 < min_width(f)) continue;
      std::vector<Circuit> circuits;
      for (int j = 0; j < m; ++j) {
        circuits.push_back(hhl_benchmark_circuit(f, w, mix_seed(seed, static_cast<std::uint64_t>(j))));
      }
      ojson cj = tag;
      cj["instance_seed"] = mix_seed(seed, 0);
      cj["circuit"] = to_json(circuits.front());
      art.put_json("circuits/" + slug(to_string(f), w) + "_i0.json", cj);

      for (std::size_t ni = 0; ni < c["noise"].size(); ++ni) {
        const auto& nj = c["noise"][ni];
        XebInput input;
        double dem = 0.0;
        ojson per = ojson::array();
        for (int j = 0; j < m; ++j) {
          NoiseModel noise;
          noise.e1 = nj["e1"];
          noise.e2 = nj["e2"];
          noise.er = nj["er"];
          noise.seed = mix_seed(seed, static_cast<std::uint64_t>(j));
          const Circuit& circ = circuits[static_cast<std::size_t>(j)];
          input.push_back(noisy_xeb_pair(circ, w - 1, noise, trajectories, shots));
          const auto counts = gate_counts(circ);
          const double f_dem = dem_predict(counts, noise).f_xeb;
          dem += f_dem / m;
          per.push_back({{"seed", noise.seed}, {"sq_gates", counts.sq_gates}, {"cnots", counts.cnots}, {"f_dem", f_dem}});
        }
        const double measured = xeb(input);
        const double rel = (dem - measured) / measured;
        csv << to_string(f) << ',' << w << ',' << nj["e1"].get<double>() << ',' << nj["e2"].get<double>() << ','
            << nj["er"].get<double>() << ',' << m << ',' << measured << ',' << dem << ',' << rel << '\n';
        ojson rep = tag;
        rep["family"] = to_string(f);
        rep["width"] = w;
        rep["noise"] = nj;
        rep["trajectories"] = trajectories;
        rep["shots"] = shots;
        rep["f_xeb_measured"] = measured;
        rep["f_xeb_dem"] = dem;
        rep["circuits"] = per;
        art.put_json("reports/" + slug(to_string(f), w) + "_n" + std::to_string(ni) + ".json", rep);
        results.push_back(json{{"family", to_string(f)}, {"width", w}, {"noise", nj}, {"f_xeb_measured", measured},
                               {"f_xeb_dem", dem}});
      }
    }
  }
  art.put("metrics.csv", art.stamp + csv.str());
  return results;
}

json run_table1(const json& c, Artifacts& art, const ojson& tag) {
  const auto entries = supremacy_table(supremacy_rows_from_json(c["rows"]));
  art.put("metrics.csv", art.stamp + table_csv(entries));
  art.put("reports/table1.md", table_markdown(entries));
  ojson rep = tag;
  auto arr = ojson::array();
  json results = json::array();
  for (const auto& e : entries) {
    arr.push_back({{"family", e.row.family}, {"n", e.row.n}, {"device", e.row.device}, {"f_xeb", e.fidelity.f_xeb},
                   {"t_sfa_s", e.row.t_sfa}, {"t_f_s", e.t_f}, {"t_f", format_duration(e.t_f)}});
    results.push_back(json{{"family", e.row.family}, {"n", e.row.n}, {"device", e.row.device},
                           {"f_xeb", e.fidelity.f_xeb}, {"t_f_s", e.t_f}});
  }
  rep["rows"] = arr;
  art.put_json("reports/table1.json", rep);
  return results;
}

}  // namespace

int run_pipeline(const nlohmann::json& config, const std::string& out_dir) {
  const json c = normalize(config);
  const std::string hash = hex64(fnv1a(c.dump()));
  Artifacts art;
  art.root = out_dir;
  std::error_code ec;
  fs::create_directories(art.root / "circuits", ec);
  if (!ec) fs::create_directories(art.root / "reports", ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + out_dir + ": " + ec.message());
  art.stamp = "# hhlb " + std::string(kToolVersion) + " kind=" + c["kind"].get<std::string>() + " config=" + hash +
              " seed=" + std::to_string(c["seed"].get<std::uint64_t>()) + "\n";
  const ojson tag{{"schema_version", kSchemaVersion}, {"tool_version", kToolVersion}, {"config_hash", hash},
                  {"seed", c["seed"]}};

  const std::string kind = c["kind"];
  json results;
  if (kind == "fig2") {
    results = run_fig2(c, art, tag);
  } else if (kind == "fig4") {
    results = run_fig4(c, art, tag);
  } else {
    results = run_table1(c, art, tag);
  }

  ojson summary;
  summary["schema"] = "hhlb.summary";
  summary["schema_version"] = kSchemaVersion;
  summary["tool_version"] = kToolVersion;
  summary["kind"] = kind;
  summary["config_hash"] = hash;
  summary["seeds"] = {{"global", c["seed"]}, {"instance", "mix_seed(global, i) for instance i"}};
  summary["config"] = c;
  summary["artifacts"] = art.list;
  summary["results"] = results;
  write_text(art.root / "summary.json", summary.dump(2) + "\n");
  std::cout << "wrote " << art.list.size() + 1 << " files to " << out_dir << " (config " << hash << ")\n";
  return 0;
}

}  // namespace hhlb::cli
