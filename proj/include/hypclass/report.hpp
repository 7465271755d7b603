#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hypclass/builtins.hpp"

namespace hypclass {

inline constexpr const char* kToolVersion = "0.3.0";

using Json = nlohmann::ordered_json;

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the region seed
  std::optional<double> tol;          // overrides the command's main tolerance
  bool csv = false;
  std::string input_digest;
};

struct Report {
  std::string command;
  Json doc;
  bool ok = true;  // false when a checked property failed
  std::vector<std::pair<std::string, std::string>> files;  // CSV name, contents

  std::string json() const { return doc.dump(2) + "\n"; }
  std::string text() const;
};

// A reported number and the tolerance it was judged against.
Json tv(double value, double tol);
Json tv_int(long long value);

// FNV-1a, hex.
std::string digest(std::string_view bytes);

const std::vector<std::string>& command_names();
Report run(const std::string& command, const Problem& problem, const RunOptions& opt = {});
Report run_selftest(std::uint64_t seed);

}  // namespace hypclass
