#ifndef RODPLAST_RUNNER_HPP
#define RODPLAST_RUNNER_HPP

#include "rodplast/config.hpp"

namespace rodplast {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitIo = 4;

/// Executes one subcommand run: writes every artifact atomically into
/// cfg.out_dir together with a manifest listing content hashes. Returns the
/// process exit code; solver failures leave partial artifacts plus a
/// diagnostics file behind.
int run(const RunConfig& cfg);

/// 64-bit FNV-1a content hash used by the manifest.
std::uint64_t fnv1a64(const std::string& data);

} // namespace rodplast

#endif
