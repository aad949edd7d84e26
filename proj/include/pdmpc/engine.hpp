// The receding-horizon control loop: implement the committed outflow,
// observe inflow, forecast ahead, search weights (or use a fixed set),
// solve the linear subproblem, score it, and commit the next outflow.
// Also computes the summary metrics the comparison experiments report.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pdmpc/evaluator.hpp"
#include "pdmpc/forecast.hpp"
#include "pdmpc/hydro.hpp"
#include "pdmpc/linprog.hpp"
#include "pdmpc/mpc.hpp"
#include "pdmpc/search.hpp"

namespace pdmpc::engine {

struct Event {
  std::string name;
  std::vector<double> inflow;  // hourly, m3/s
  std::vector<double> demand;  // optional; empty means all-zero

  /// Throws ValidationError: length >= 2, inflow >= 0, demand >= 0 and
  /// matching length when present.
  void validate() const;
};

enum class Mode { PDMPC, Fixed1, Fixed2, FixedCustom };

const char* mode_name(Mode m);

struct RunConfig {
  std::size_t horizon = 6;
  Mode mode = Mode::PDMPC;
  mpc::WeightVector custom_weights{};  // used by FixedCustom only

  forecast::ForecastConfig forecast{};
  search::GAConfig ga{};
  eval::EvaluatorConfig evaluator{};  // zero band -> copied from targets
  mpc::TargetLevels targets{};        // all-zero -> default_targets(spec)
  std::array<double, 3> sh_levels{78.5, 79.0, 79.5};
  double f = 0.0;  // storage-weight denominator factor; <= 0 -> horizon

  double initial_level_m = 76.5;
  double initial_turb = 150.0;
  double initial_spill = 0.0;
  bool pin_ceiling = false;  // lock the ceiling gene to the middle level
  std::uint64_t seed = 0;
};

/// One hour of a finished run.  `total/spill/turb` are the flows actually
/// implemented during the hour; `storage/level` are the state at its end.
/// `schedule` is the plan committed during this hour (its entry for the
/// next hour becomes the next implemented outflow).
struct StepRecord {
  long step = 0;
  double inflow = 0.0;
  std::vector<double> forecast;
  double total = 0.0, spill = 0.0, turb = 0.0;
  double storage = 0.0, level = 0.0;
  mpc::Schedule schedule;
  search::Chromosome chromosome{};  // meaningful in PDMPC mode
  mpc::WeightVector weights;
  eval::PenaltyReport penalty;
  linprog::SolveStatus lp_status = linprog::SolveStatus::Optimal;
  bool fallback_soften = false;  // storage cap had to be relaxed
  bool fallback_clamp = false;   // over-release clamped to keep LWS
  bool fallback_hold = false;    // solver failed; previous outflow held
  std::size_t ga_generations = 0;
  std::size_t ga_evaluations = 0;
  double ga_best_penalty = 0.0;

  bool any_fallback() const {
    return fallback_soften || fallback_clamp || fallback_hold;
  }
};

struct Trace {
  std::string event_name;
  double initial_storage = 0.0;
  double initial_level = 0.0;
  std::vector<StepRecord> steps;
};

struct Metrics {
  double peak_outflow = 0.0;
  double peak_rwl = 0.0;
  double lowest_rwl = 0.0;
  std::size_t schedule_changes = 0;
  double total_penalty = 0.0;
  double max_penalty = 0.0;
};

/// Published fixed-weight baselines (gene codes sit partly outside the
/// search ranges; decode for these bypasses the range check).
search::Chromosome fixed1_genes();
search::Chromosome fixed2_genes();

Trace run_event(const Event& event, const hydro::ReservoirSpec& spec,
                const RunConfig& cfg);

/// Throws ValidationError on an empty trace.  A step counts as a schedule
/// change when its committed plan differs from the previous step's plan
/// by more than change_tol at any hour both plans cover.
Metrics compute_metrics(const Trace& trace, double change_tol = 1.0);

struct ComparisonRow {
  Mode mode;
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  Metrics metrics;
};

std::vector<ComparisonRow> compare_modes(const Event& event,
                                         const hydro::ReservoirSpec& spec,
                                         const RunConfig& base_cfg,
                                         const std::vector<Mode>& modes,
                                         const std::vector<std::uint64_t>& seeds);

}  // namespace pdmpc::engine
