// Nonlinear schedule scoring: the practical flood-operation objectives
// J1..J8 evaluated against a stage-storage simulation of the candidate
// schedule.  This is the fitness function the weight search minimizes and
// the per-step quality record the engine logs.
#pragma once

#include <array>
#include <span>

#include "pdmpc/hydro.hpp"
#include "pdmpc/mpc.hpp"

namespace pdmpc::eval {

// Spill readings smaller than this are treated as "gate closed" when
// classifying gate state; LP solutions carry round-off.
inline constexpr double kZeroSpillThreshold = 1e-6;

struct EvaluatorConfig {
  // Blend weights, one per objective J1..J8.
  std::array<double, 8> e{5.0, 1.0, 2.0, 2.0, 5.0, 3.0, 1.0, 1.0};
  double large_value = 1000.0;  // saturating price of a hard-rule breach

  // Storage comfort band (m3) for the three-part exceedance term.  The
  // upper emergency threshold s_h is a per-candidate input to evaluate(),
  // not part of the config.
  double s_u = 0.0;
  double s_l = 0.0;
  double w_su = 1.0;
  double w_sl = 2.0;
  double w_sh = 20.0;

  void validate() const;
};

// Convenience: copy the band thresholds out of the planner targets.
EvaluatorConfig make_evaluator_config(const mpc::TargetLevels& targets);

struct PenaltyReport {
  double j1 = 0.0;  // peak spill, m3/s
  double j2 = 0.0;  // cumulative spill, m3/s
  double j3 = 0.0;  // within-schedule outflow changes, time-weighted
  double j4 = 0.0;  // change versus the previous step's schedule
  double j5 = 0.0;  // storage excursion beyond the comfort band, m3
  double j6 = 0.0;  // count of spillway gate open/close transitions
  double j7 = 0.0;  // peak-retention breach (0 or large_value)
  double j8 = 0.0;  // spill-before-turbine breach (0 or large_value)
  double total = 0.0;

  bool j7_triggered = false;
  bool j8_triggered = false;
  bool fwl_reached = false;    // simulated storage hit the curve ceiling
  bool floor_reached = false;  // simulated storage hit the curve floor
};

// Number of hours at which the spillway gates change state (open <-> shut)
// along the spill series, with prev_spill giving the state just before the
// first entry.
int gate_continuity_penalty(double prev_spill, std::span<const double> spills);

// large_value when the schedule's peak outflow exceeds the largest inflow
// observed so far (strictly), else 0.
double peak_retention_penalty(std::span<const double> totals,
                              double hist_peak_inflow, double large_value);

// large_value when any hour spills while total outflow is still within
// turbine capacity, else 0.
double turbine_first_penalty(std::span<const double> totals,
                             std::span<const double> spills, double mo_turb,
                             double large_value);

// Score a candidate schedule.  Simulates storage hour by hour under the
// forecast, clamping at the curve limits (a breach sets a flag and adds a
// saturating large_value to the total instead of throwing), then folds the
// eight objectives into one normalized penalty.
PenaltyReport evaluate(const mpc::Schedule& schedule,
                       const mpc::Schedule& prev_schedule,
                       const hydro::ReservoirState& state,
                       std::span<const double> forecast,
                       double hist_peak_inflow,
                       const hydro::ReservoirSpec& spec, double z_s_h,
                       const EvaluatorConfig& cfg);

}  // namespace pdmpc::eval
