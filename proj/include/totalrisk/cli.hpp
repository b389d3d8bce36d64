#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace totalrisk {

inline constexpr int kExitHolds = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitInputError = 2;

struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;
  std::optional<std::string> out;
  std::string format = "json";  // json | csv
  bool exact = false;
  std::optional<std::string> tol;
  std::uint64_t seed = 1;
  std::size_t samples = 1000000;
  std::vector<std::string> lambdas;
  std::vector<std::string> meshes;
  std::optional<std::string> ecdf_out;
};

/// Runs one subcommand. Returns 0 when every check holds, 1 on a violation
/// (a witness is written), 2 on input or configuration errors.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv and calls run.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace totalrisk
