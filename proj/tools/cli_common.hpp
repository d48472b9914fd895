#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hhlb/circuit.hpp"
#include "hhlb/sim.hpp"
#include "json.hpp"

namespace hhlb::cli {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

using ojson = nlohmann::ordered_json;

nlohmann::json read_json(const std::string& path);
void write_text(const std::filesystem::path& path, const std::string& text);
/// Pretty JSON to `path`, or stdout when path is empty or "-".
void emit(const ojson& j, const std::string& path);

/// "e1,e2,er" (missing trailing fields are 0).
NoiseModel parse_noise(const std::string& s, std::uint64_t seed);
/// "4..20", "4..20:2" or "4,6,8".
std::vector<int> parse_int_list(const std::string& s);
/// "tp1,tp2,ntp"; empty means all three.
std::vector<Family> parse_families(const std::string& s);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

ojson noise_json(const NoiseModel& n);
ojson probs_json(const ProbDist& p);

int run_pipeline(const nlohmann::json& config, const std::string& out_dir);
int run_verify(bool quick, const std::vector<std::string>& topologies);

}  // namespace hhlb::cli
