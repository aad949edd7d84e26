#include "pdmpc/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pdmpc/errors.hpp"

namespace pdmpc::eval {

void EvaluatorConfig::validate() const {
  for (double w : e)
    if (w < 0.0) throw ValidationError("objective blend weights must be >= 0");
  if (large_value <= 0.0) throw ValidationError("large_value must be > 0");
  if (w_su < 0.0 || w_sl < 0.0 || w_sh < 0.0)
    throw ValidationError("storage band weights must be >= 0");
  if (!(s_l < s_u))
    throw ValidationError("storage band requires s_l < s_u (got s_l=" +
                          std::to_string(s_l) + ", s_u=" + std::to_string(s_u) +
                          ")");
}

EvaluatorConfig make_evaluator_config(const mpc::TargetLevels& targets) {
  EvaluatorConfig cfg;
  cfg.s_u = targets.s_u;
  cfg.s_l = targets.s_l;
  return cfg;
}

namespace {
bool gate_open(double spill) { return spill > kZeroSpillThreshold; }
double hinge(double x) { return x > 0.0 ? x : 0.0; }
}  // namespace

int gate_continuity_penalty(double prev_spill, std::span<const double> spills) {
  int count = 0;
  bool open = gate_open(prev_spill);
  for (double s : spills) {
    bool now = gate_open(s);
    if (now != open) ++count;
    open = now;
  }
  return count;
}

double peak_retention_penalty(std::span<const double> totals,
                              double hist_peak_inflow, double large_value) {
  for (double t : totals)
    if (t > hist_peak_inflow) return large_value;
  return 0.0;
}

double turbine_first_penalty(std::span<const double> totals,
                             std::span<const double> spills, double mo_turb,
                             double large_value) {
  if (totals.size() != spills.size())
    throw LengthMismatchError("turbine_first_penalty: totals has " +
                              std::to_string(totals.size()) +
                              " entries, spills " +
                              std::to_string(spills.size()));
  for (std::size_t i = 0; i < totals.size(); ++i)
    if (gate_open(spills[i]) && totals[i] <= mo_turb) return large_value;
  return 0.0;
}

PenaltyReport evaluate(const mpc::Schedule& schedule,
                       const mpc::Schedule& prev_schedule,
                       const hydro::ReservoirState& state,
                       std::span<const double> forecast,
                       double hist_peak_inflow,
                       const hydro::ReservoirSpec& spec, double z_s_h,
                       const EvaluatorConfig& cfg) {
  cfg.validate();
  spec.validate();
  const std::size_t H = schedule.horizon();
  if (H == 0) throw LengthMismatchError("evaluate: empty schedule");
  if (schedule.spills.size() != H || schedule.turbs.size() != H)
    throw LengthMismatchError("evaluate: schedule series lengths differ");
  if (forecast.size() != H)
    throw LengthMismatchError("evaluate: forecast has " +
                              std::to_string(forecast.size()) +
                              " entries for a horizon of " +
                              std::to_string(H));
  if (prev_schedule.horizon() == 0)
    throw LengthMismatchError("evaluate: previous schedule is empty");
  const double floor = spec.curve.min_storage();
  const double ceiling = spec.curve.max_storage();
  if (state.storage_m3 < floor || state.storage_m3 > ceiling)
    throw OutOfRangeError("evaluate: starting storage " +
                          std::to_string(state.storage_m3) +
                          " is outside the stage-storage curve");

  PenaltyReport rep;

  for (double s : schedule.spills) {
    rep.j1 = std::max(rep.j1, s);
    rep.j2 += s;
  }

  auto [w_in, w_between] = mpc::time_weights(H);
  for (std::size_t i = 1; i < H; ++i)
    rep.j3 +=
        std::abs(schedule.totals[i] - schedule.totals[i - 1]) * w_in[i - 1];
  for (std::size_t i = 0; i < H; ++i) {
    double prev_total =
        prev_schedule.total_at(state.step_index + static_cast<long>(i));
    rep.j4 += std::abs(schedule.totals[i] - prev_total) * w_between[i];
  }

  // Hour-by-hour storage simulation under the forecast.  A run past either
  // curve limit is flagged and the trajectory clamped so later hours stay
  // meaningful.
  double s = state.storage_m3;
  for (std::size_t i = 0; i < H; ++i) {
    double next;
    try {
      next = hydro::step_storage(s, forecast[i], schedule.totals[i],
                                 spec.dt_s);
    } catch (const NegativeStorageError&) {
      next = floor - 1.0;  // clamped (and flagged) just below
    }
    if (next > ceiling) {
      rep.fwl_reached = true;
      next = ceiling;
    } else if (next < floor) {
      rep.floor_reached = true;
      next = floor;
    }
    s = next;
    rep.j5 += cfg.w_su * hinge(s - cfg.s_u) + cfg.w_sl * hinge(cfg.s_l - s) +
              cfg.w_sh * hinge(s - z_s_h);
  }

  rep.j6 = gate_continuity_penalty(state.last_spill, schedule.spills);
  rep.j7 =
      peak_retention_penalty(schedule.totals, hist_peak_inflow,
                             cfg.large_value);
  rep.j8 = turbine_first_penalty(schedule.totals, schedule.spills,
                                 spec.mo_turb, cfg.large_value);
  rep.j7_triggered = rep.j7 > 0.0;
  rep.j8_triggered = rep.j8 > 0.0;

  // Flow terms normalize against spillway capacity, the storage term
  // against flood-control storage; the count/indicator terms stand as-is.
  rep.total = cfg.e[0] * rep.j1 / spec.mo_spill +
              cfg.e[1] * rep.j2 / spec.mo_spill +
              cfg.e[2] * rep.j3 / spec.mo_spill +
              cfg.e[3] * rep.j4 / spec.mo_spill +
              cfg.e[4] * rep.j5 / spec.fws() + cfg.e[5] * rep.j6 +
              cfg.e[6] * rep.j7 + cfg.e[7] * rep.j8;
  if (rep.fwl_reached) rep.total += cfg.large_value;
  if (rep.floor_reached) rep.total += cfg.large_value;
  return rep;
}

}  // namespace pdmpc::eval
