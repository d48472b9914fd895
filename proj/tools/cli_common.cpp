#include "cli_common.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hhlb/types.hpp"

namespace hhlb::cli {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Io, path + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

void emit(const ojson& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    write_text(path, j.dump(2) + "\n");
  }
}

NoiseModel parse_noise(const std::string& s, std::uint64_t seed) {
  NoiseModel n;
  n.seed = seed;
  if (s.empty()) return n;
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (...) {
      throw Error(ErrorKind::InvalidArgument, "bad noise rate '" + item + "'");
    }
  }
  if (v.empty() || v.size() > 3) throw Error(ErrorKind::InvalidArgument, "noise is e1[,e2[,er]]");
  n.e1 = v[0];
  if (v.size() > 1) n.e2 = v[1];
  if (v.size() > 2) n.er = v[2];
  n.validate();
  return n;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  try {
    if (const auto dots = s.find(".."); dots != std::string::npos) {
      const int lo = std::stoi(s.substr(0, dots));
      std::string rest = s.substr(dots + 2);
      int step = 1;
      if (const auto colon = rest.find(':'); colon != std::string::npos) {
        step = std::stoi(rest.substr(colon + 1));
        rest = rest.substr(0, colon);
      }
      const int hi = std::stoi(rest);
      if (step < 1) throw Error(ErrorKind::InvalidArgument, "range step must be positive");
      for (int v = lo; v <= hi; v += step) out.push_back(v);
    } else {
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    }
  } catch (const Error&) {
    throw;
  } catch (...) {
    throw Error(ErrorKind::InvalidArgument, "bad integer list '" + s + "'");
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "empty integer list '" + s + "'");
  return out;
}

std::vector<Family> parse_families(const std::string& s) {
  if (s.empty()) return {Family::TP1, Family::TP2, Family::NTP};
  std::vector<Family> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(family_from_string(item));
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ojson noise_json(const NoiseModel& n) {
  return ojson{{"e1", n.e1}, {"e2", n.e2}, {"er", n.er}, {"seed", n.seed}};
}

ojson probs_json(const ProbDist& p) {
  auto arr = ojson::array();
  for (Index i = 0; i < p.dim(); ++i) arr.push_back(p[i]);
  return arr;
}

}  // namespace hhlb::cli
