#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "tcpsync_cli/config.hpp"

namespace tcpsync::cli {

enum class TraceFormat { Csv, Json };

TraceFormat parse_trace_format(const std::string& name);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // nothing is written when empty
  TraceFormat format = TraceFormat::Csv;
  std::optional<int> jobs;  // overrides sweep.jobs
};

// Every report embeds the resolved configuration under "config".

/// Equilibria, intrinsic frequencies, coupling strength and locked states.
/// Writes report.json.
nlohmann::json cmd_analyze(const ExperimentConfig& cfg, const RunOptions& opt = {});

/// Fluid-model trace plus limit-cycle summary. Writes trace.{csv,json} and summary.json.
nlohmann::json cmd_simulate_fluid(const ExperimentConfig& cfg, const RunOptions& opt = {});

/// Phase-oscillator trace plus lock summary. Writes trace.{csv,json} and summary.json.
nlohmann::json cmd_simulate_phase(const ExperimentConfig& cfg, const RunOptions& opt = {});

/// Packet-level run. Writes queues, windows1, windows2 traces and summary.json.
nlohmann::json cmd_simulate_packets(const ExperimentConfig& cfg, const RunOptions& opt = {});

/// Runs cfg.sweep->command at every sweep value on a bounded worker pool.
/// Writes sweep.csv and sweep.json; rows are ordered by sweep index.
nlohmann::json cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opt = {});

// Configuration of sweep point `value`: every target set to value * factor, sweep removed.
ExperimentConfig sweep_point(const ExperimentConfig& cfg, double value);

// Machine-readable description of an exception and the exit code it maps to:
// 1 for configuration errors, 2 for numerical failures.
struct ErrorReport {
  int exit_code = 2;
  nlohmann::json body;
};
ErrorReport describe_current_exception();

}  // namespace tcpsync::cli
