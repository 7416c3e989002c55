#pragma once

// Command-line front end. Subcommands: simulate, exact, bounds, verify,
// table-bench, replay.
//
// Every output starts with a manifest (subcommand, arguments, seed, RNG
// algorithm, version, timestamp). Data rows never contain the timestamp, so
// re-running the same arguments reproduces them byte for byte.

#include <iosfwd>
#include <string>
#include <vector>

namespace linhash::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kSizeGuard = 2,
  kVerificationFailed = 3,
};

// Fixed header for simulate and exact output.
inline constexpr const char* kExperimentHeader =
    "experiment,u,b,f,set_kind,set_size,trial,seed,lbin,threshold,freq,ci_lo,ci_hi";

// Environment variable consulted for the default --seed.
inline constexpr const char* kSeedEnv = "LINHASH_SEED";

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Output lines that are data rows, i.e. everything except the manifest line.
std::vector<std::string> data_rows(const std::string& output);

}  // namespace linhash::cli
