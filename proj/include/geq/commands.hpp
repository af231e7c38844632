#pragma once

// Batch commands of the geq tool. Each command returns a JSON report and an
// exit code: 0 when every check passes the tolerance ladder, 2 when a check
// fails, 3 for input errors.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "geq/equiv.hpp"
#include "geq/report.hpp"
#include "geq/scene.hpp"

namespace geq::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 2;
inline constexpr int kExitInputError = 3;

struct Options {
  int points = 100;
  std::uint64_t seed = 42;
  int grid = 9;
  int trajectories = 20;
  std::optional<std::string> export_path;
  Ladder ladder;
};

struct Outcome {
  Json report;
  int exit_code = kExitPass;
};

Outcome cmd_check(const Scene& scene, const Options& opts);
Outcome cmd_split(const Scene& scene, const std::string& groups, const Options& opts);
Outcome cmd_glue(const Scene& first, const Scene& second, const Options& opts);
Outcome cmd_ts(const Scene& scene, const std::string& function, const Options& opts);
Outcome cmd_oracle(const Scene& scene, const Options& opts);
/// Closed-form scene of the Levi-Civita pair.
Json cmd_generate(const equiv::LeviCivitaParams& params);

/// "0,1|2"
equiv::Grouping parse_groups(const std::string& text);
/// "poly:c0,c1,...", "recip:c", "exp" or "id" (the constant function 1).
ScalarFunction parse_function(const std::string& text);

Outcome error_outcome(const std::string& command, const Error& e);

/// Samples named fields on a uniform lattice with k nodes per axis and writes
/// the grid JSON to path.
void export_grid(const std::string& path, const Chart& chart, int k,
                 const std::vector<std::pair<std::string, const MatrixField*>>& fields);

/// Command-line entry point; reports go to out, diagnostics to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace geq::cli
