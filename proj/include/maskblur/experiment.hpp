#pragma once

#include <string>

namespace maskblur {

/// Exit codes shared by the CLI and the library entry points.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericError = 3;
inline constexpr int kExitChecksumError = 4;

/// Runs the experiment described by a JSON config (schema 1): builds the
/// configured system, executes the experiment kind, writes its artifact
/// files plus a manifest with SHA-256 checksums into the output directory,
/// and returns a process exit code. The MASKBLUR_OUTPUT_ROOT environment
/// variable, when set, re-roots the configured output directory.
int run_experiment(const std::string& config_path);

/// Re-hashes every checksummed file listed in a manifest. Returns 0 when all
/// match, otherwise the checksum exit code; mismatches are listed on stderr.
int verify_manifest(const std::string& manifest_path);

/// Writes the configured pattern set (packed binary + CSV) to the output
/// directory without running the experiment.
int dump_patterns(const std::string& config_path);

/// Applies the output-root override to a configured directory.
std::string resolve_output_dir(const std::string& configured);

}  // namespace maskblur
