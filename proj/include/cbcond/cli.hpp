#pragma once

// Command-line front end. run() is the whole program minus process setup,
// so tests can drive it with string streams.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cbcond::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2 };

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// 64-bit FNV-1a of the given bytes, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  double wall_time = 0.0;
  std::vector<std::string> outputs;
  nlohmann::json to_json() const;
};

// "%.10g", with inf and nan spelled out.
std::string format_number(double v);

struct GateResult {
  std::string name;
  // "pass", "FAIL" or "n/a".
  std::string status;
  double measured = 0.0;
  double threshold = 0.0;
  std::string note;
};

}  // namespace cbcond::cli
