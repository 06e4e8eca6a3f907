#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "symqoc/config.hpp"

namespace symqoc {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2 };

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"adjoint", "optimize", "trotter", "analyze", "bench", "verify"};
  return names;
}

/// `step,t,Bx,By` for one channel, `step,t,Bx1,By1,...` for several.
void write_pulses_csv(std::ostream& os, const PulseSchedule& s);
PulseSchedule read_pulses_csv(std::istream& is);

/// `iter,P,wall_ms`; wall_ms is written only when `timing` is set.
void write_trace_csv(std::ostream& os, const QocResult& r, bool timing);

/// Directory outputs get `resolved.cfg` inside; file outputs get `<file>.resolved.cfg`.
std::filesystem::path resolved_config_path(const RunConfig& cfg);

/// Runs cfg.command. stdout carries the summary (JSON when `json`),
/// stderr the diagnostics. Returns an ExitCode.
int run_command(const RunConfig& cfg, bool json, std::ostream& out, std::ostream& err);

}  // namespace symqoc
