// File formats and configuration: event CSVs, the key-value config
// document, trace/metrics persistence with a reproducibility sidecar,
// the mode-comparison table, and the per-step weight-sweep grid.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pdmpc/engine.hpp"
#include "pdmpc/hydro.hpp"

namespace pdmpc::io {

/// Full application configuration with every default resolved.  Matches
/// the JSON config document section for section; a default-constructed
/// value is the built-in configuration used when no file is given.
struct AppConfig {
  // [reservoir] -- the built-in plant constants unless overridden.
  double fwl_m = 80.0;
  double nhwl_m = 76.5;
  double lwl_m = 60.0;
  double spillway_crest_m = 64.5;
  double mo_turb = 264.0;
  double mo_spill = 11680.0;
  double dt_s = 3600.0;
  std::string curve_path;  // empty -> built-in stage-storage anchors

  // [run]
  std::size_t horizon = 6;
  std::string mode = "pdmpc";  // pdmpc | fixed1 | fixed2
  std::uint64_t seed = 0;
  double initial_level_m = 76.5;
  double initial_turb = 150.0;
  double initial_spill = 0.0;
  double change_tol = 1.0;  // metrics: plan-change tolerance, m3/s

  // [forecast]
  bool forecast_certain = false;  // true -> exact future inflows
  double forecast_a = 0.05;
  double forecast_b = 0.03;
  double forecast_c = 0.1;
  std::size_t forecast_window = 3;

  // [ga]
  std::size_t ga_population = 24;
  std::size_t ga_generations = 30;
  std::size_t ga_tournament = 3;
  double ga_crossover = 0.9;
  double ga_mutation = 0.1;
  std::size_t ga_elitism = 2;

  // [evaluator]
  std::array<double, 8> e{5.0, 1.0, 2.0, 2.0, 5.0, 3.0, 1.0, 1.0};
  double large_value = 1000.0;
  double s_u_level = 76.5;  // comfort band in metres; converted via curve
  double s_l_level = 76.0;
  double w_su = 1.0;
  double w_sl = 2.0;
  double w_sh = 20.0;

  // [search]
  double f = 0.0;  // storage-weight denominator factor; <= 0 -> horizon
  std::array<double, 3> sh_levels{78.5, 79.0, 79.5};
  bool pin_ceiling = false;

  // [output]
  std::string out_dir = ".";

  /// Throws ValidationError on out-of-range values or an unknown mode.
  void validate() const;
};

/// Strict parse of a JSON config document.  Absent sections and keys keep
/// their defaults; unknown sections or keys throw ValidationError; type
/// mismatches throw ParseError naming the key.  `origin` labels messages.
AppConfig parse_config(const std::string& text, const std::string& origin);

/// Reads and parses a config file.  Throws IoError when unreadable.
AppConfig load_config(const std::string& path);

/// Canonical JSON rendition with every field present (keys sorted); this
/// is what the sidecar records and what the config hash covers.
std::string resolved_config_json(const AppConfig& cfg);

/// FNV-1a 64-bit hash of the canonical JSON, as a hex string.  Two runs
/// with equal hashes and seeds produce byte-identical numeric output.
std::string config_hash(const AppConfig& cfg);

/// Reservoir spec from the config (built-in curve unless curve_path set).
hydro::ReservoirSpec to_spec(const AppConfig& cfg);

/// Engine run configuration from the config; band levels are converted
/// to storages through the spec's curve.
engine::RunConfig to_run_config(const AppConfig& cfg,
                                const hydro::ReservoirSpec& spec);

/// Parses event CSV text (`step,inflow_m3s[,demand_m3s]`).  Throws
/// ParseError with a line number on malformed rows, ValidationError on
/// negative values or non-contiguous steps.  The event name is `origin`
/// minus directory and extension.
engine::Event parse_event(const std::string& text, const std::string& origin);

/// Reads and parses an event file.  Throws IoError when unreadable.
engine::Event load_event(const std::string& path);

/// Writes an event back out in the same CSV format (full precision).
void save_event(const engine::Event& event, const std::string& path);

/// Trace CSV text: a `# config_hash=... seed=...` comment line, the
/// column header, then one row per step (full precision).
std::string render_trace(const engine::Trace& trace,
                         const hydro::ReservoirSpec& spec,
                         const AppConfig& cfg);

/// Summary sidecar JSON: metrics, run identity, and the resolved config.
std::string render_summary(const engine::Trace& trace,
                           const engine::Metrics& metrics,
                           const AppConfig& cfg);

/// Writes the trace CSV to `path` and the summary to `path` with its
/// extension replaced by `.summary.json`.  Throws IoError.
void write_trace(const engine::Trace& trace, const engine::Metrics& metrics,
                 const std::string& path, const hydro::ReservoirSpec& spec,
                 const AppConfig& cfg);

/// Comparison table CSV (one row per mode x seed).
std::string render_comparison(const std::vector<engine::ComparisonRow>& rows,
                              const AppConfig& cfg);

void write_comparison(const std::vector<engine::ComparisonRow>& rows,
                      const std::string& path, const AppConfig& cfg);

/// Gene index for a sweepable weight name (w1, w2, w3i, w3d, w4i, w4d,
/// w5, sh).  Throws ValidationError on anything else.
std::size_t gene_index(const std::string& name);

/// Penalty grid from re-evaluating a finished PD-MPC run with one gene
/// forced to each value in turn: penalty[i][j] is the nonlinear penalty
/// at step first_step+i with the gene set to values[j], all other genes
/// held at the values the search chose at that step.
struct SweepGrid {
  std::size_t gene = 0;
  std::size_t first_step = 0;
  std::vector<int> values;
  std::vector<std::vector<double>> penalty;
};

/// Re-solves the linear subproblem per (step, value) against the states
/// and forecasts recorded in `trace`.  Steps span [k0, k1] inclusive.
/// Throws ValidationError when the range leaves the trace, the values
/// are empty, or the trace lacks searched chromosomes (non-PD-MPC run).
SweepGrid sweep_penalties(const engine::Event& event,
                          const hydro::ReservoirSpec& spec,
                          const engine::RunConfig& cfg,
                          const engine::Trace& trace, std::size_t gene,
                          const std::vector<int>& values, std::size_t k0,
                          std::size_t k1);

/// Grid CSV.  When `saturate` is set, any penalty >= large_value renders
/// as the marker 99; otherwise raw values are written.
std::string render_sweep(const SweepGrid& grid, double large_value,
                         bool saturate, const AppConfig& cfg);

/// Writes the saturated grid to `path` and the raw companion to `path`
/// with `_raw` appended to the stem.
void write_sweep(const SweepGrid& grid, const std::string& path,
                 const AppConfig& cfg);

}  // namespace pdmpc::io
