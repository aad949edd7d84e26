#pragma once

// Translates (reservoir state, forecast, weights, horizon) into the linear
// MPC subproblem and maps LP solutions back into outflow schedules.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "pdmpc/errors.hpp"
#include "pdmpc/hydro.hpp"
#include "pdmpc/linprog.hpp"

namespace pdmpc {

// Schedule extraction needs an Optimal LP solution and a matching map.
class NotOptimalError : public Error {
public:
  explicit NotOptimalError(const std::string& msg) : Error(msg) {}
};

}  // namespace pdmpc

namespace pdmpc::mpc {

/// Planned outflows over one horizon, starting at step start_step.
struct Schedule {
  long start_step = 0;
  std::vector<double> totals;  // m3/s
  std::vector<double> spills;
  std::vector<double> turbs;

  std::size_t horizon() const { return totals.size(); }

  /// Constant turbine-only schedule (spill 0), the configured initial
  /// commitment at step 0.
  static Schedule constant(long start_step, std::size_t H, double total);

  /// Total at absolute step t; entries beyond the end repeat the last
  /// value (the tail-padding rule used for cross-schedule comparisons).
  double total_at(long t) const;
};

/// Storage targets: stay under s_u, over s_l, and strictly under the
/// operator ceiling s_h. All in m3.
struct TargetLevels {
  double s_u = 0.0;
  double s_l = 0.0;
  double s_h = 0.0;

  /// Throws ValidationError unless s_l < s_u <= s_h < fws.
  void validate(double fws) const;
};

/// Default targets for a spec: s_u at NHWL, s_l at one-half meter below
/// NHWL, s_h at one meter below FWL.
TargetLevels default_targets(const hydro::ReservoirSpec& spec);

/// The decision vector searched per step: nine objective weights (already
/// multiplied by their normalizers, so directly usable as LP costs) plus
/// the operator ceiling s_h in m3.
struct WeightVector {
  double w1 = 0.0;
  double w2 = 0.0;
  double w3_i = 0.0, w3_d = 0.0;
  double w4_i = 0.0, w4_d = 0.0;
  double w5_1 = 0.0, w5_2 = 0.0, w5_3 = 0.0;
  double s_h = 0.0;

  /// Throws ValidationError on negative weights or w5_1 == 0.
  void validate() const;
};

/// Index layout of the LP variable vector. Families, in order: totals,
/// spills, turbs (H each); storages S_{k+1..k+H} (H, in storage_scale
/// units); in-horizon change slacks (H-1 each direction); between-schedule
/// change slacks (H each direction); storage-violation slacks (H per
/// target); the peak-spill epigraph variable; then, only when the
/// emergency softening is on, one cap-overrun slack per storage.
struct VarMap {
  std::size_t H = 0;
  std::size_t totals = 0, spills = 0, turbs = 0, storages = 0;
  std::size_t din_i = 0, din_d = 0;
  std::size_t dbw_i = 0, dbw_d = 0;
  std::size_t mu1 = 0, mu2 = 0, mu3 = 0;
  std::size_t peak = 0;
  std::size_t soften = 0, soften_count = 0;
  double storage_scale = 1e6;  // m3 per LP storage unit

  std::size_t size() const { return 11 * H - 1 + soften_count; }
};

/// Schedule-change penalty weights over a horizon: w_in for in-horizon
/// changes at offsets 1..H-1, w_between for cross-schedule changes at
/// offsets 0..H-1. Larger near the start of the horizon.
std::pair<std::vector<double>, std::vector<double>> time_weights(std::size_t H);

struct BuildOptions {
  /// Emergency fallback when the hard storage cap makes the LP
  /// infeasible: replace the cap with a heavily penalized overrun slack.
  bool soften_storage_cap = false;
  /// Penalty per full-reservoir (FWS) of cap overrun.
  double soften_penalty = 1e6;
};

struct BuiltProblem {
  linprog::StandardFormLP lp;
  VarMap map;
};

/// Assembles the linear subproblem for one step: flow split, locked first
/// outflow, storage dynamics under the forecast, change-slack equalities
/// with the time weights folded in, storage-violation inequalities against
/// (targets.s_u, targets.s_l, z.s_h), the peak epigraph, hard storage and
/// capacity bounds, and demand as lower bounds on totals.
/// Throws LengthMismatchError on inconsistent series lengths and
/// OutOfRangeError when state.storage is outside the curve.
BuiltProblem build(const hydro::ReservoirSpec& spec,
                   const hydro::ReservoirState& state,
                   std::span<const double> forecast,
                   const Schedule& prev_schedule, const WeightVector& z,
                   const TargetLevels& targets, std::span<const double> demand,
                   const BuildOptions& opts = {});

/// Reads the flow families out of an Optimal solution; magnitudes below
/// 1e-9 are clamped to zero. Throws NotOptimalError for non-Optimal
/// solutions or a map/solution size mismatch.
Schedule extract_schedule(const linprog::LPSolution& sol, const VarMap& map,
                          long k);

/// Simulated storages S_{k+1..k+H} from an extracted schedule, in m3
/// (convenience mirror of the LP's storage family for reporting).
std::vector<double> storages_from_solution(const linprog::LPSolution& sol,
                                           const VarMap& map);

}  // namespace pdmpc::mpc
