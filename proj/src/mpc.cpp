#include "pdmpc/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pdmpc::mpc {

Schedule Schedule::constant(long start_step, std::size_t H, double total) {
  Schedule s;
  s.start_step = start_step;
  s.totals.assign(H, total);
  s.spills.assign(H, 0.0);
  s.turbs.assign(H, total);
  return s;
}

double Schedule::total_at(long t) const {
  if (totals.empty()) throw LengthMismatchError("empty schedule");
  long i = t - start_step;
  if (i < 0)
    throw OutOfRangeError("schedule lookup before start_step");
  if (i >= static_cast<long>(totals.size()))
    i = static_cast<long>(totals.size()) - 1;  // tail padding
  return totals[static_cast<std::size_t>(i)];
}

void TargetLevels::validate(double fws) const {
  if (!(s_l < s_u && s_u <= s_h && s_h < fws))
    throw ValidationError("targets must satisfy s_l < s_u <= s_h < FWS");
}

TargetLevels default_targets(const hydro::ReservoirSpec& spec) {
  TargetLevels t;
  t.s_u = hydro::storage_from_level(spec.curve, spec.nhwl_m);
  t.s_l = hydro::storage_from_level(spec.curve, spec.nhwl_m - 0.5);
  t.s_h = hydro::storage_from_level(spec.curve, spec.fwl_m - 1.0);
  return t;
}

void WeightVector::validate() const {
  const double ws[] = {w1, w2, w3_i, w3_d, w4_i, w4_d, w5_1, w5_2, w5_3};
  for (double w : ws)
    if (w < 0.0) throw ValidationError("objective weights must be >= 0");
  if (!(w5_1 > 0.0))
    throw ValidationError("w5_1 must be positive (its search range starts at 1)");
}

std::pair<std::vector<double>, std::vector<double>> time_weights(
    std::size_t H) {
  std::vector<double> w_in(H >= 1 ? H - 1 : 0);
  std::vector<double> w_between(H);
  for (std::size_t i = 1; i < H; ++i)
    w_in[i - 1] = 1.0 / (static_cast<double>(i + 1) * 3.0);
  for (std::size_t i = 0; i < H; ++i)
    w_between[i] = i <= 3 ? 1.0 / static_cast<double>(i + 1)
                          : 1.0 / (static_cast<double>(i + 1) * 2.0);
  return {std::move(w_in), std::move(w_between)};
}

BuiltProblem build(const hydro::ReservoirSpec& spec,
                   const hydro::ReservoirState& state,
                   std::span<const double> forecast,
                   const Schedule& prev_schedule, const WeightVector& z,
                   const TargetLevels& targets, std::span<const double> demand,
                   const BuildOptions& opts) {
  const std::size_t H = forecast.size();
  if (H < 1) throw LengthMismatchError("horizon must be >= 1");
  if (demand.size() != H)
    throw LengthMismatchError("demand series must match the horizon");
  if (prev_schedule.totals.empty())
    throw LengthMismatchError("previous schedule is empty");
  if (state.storage_m3 < spec.curve.min_storage() ||
      state.storage_m3 > spec.curve.max_storage())
    throw OutOfRangeError("state storage outside the stage-storage curve");
  z.validate();

  VarMap map;
  map.H = H;
  map.totals = 0;
  map.spills = H;
  map.turbs = 2 * H;
  map.storages = 3 * H;
  map.din_i = 4 * H;
  map.din_d = 4 * H + (H - 1);
  map.dbw_i = 4 * H + 2 * (H - 1);
  map.dbw_d = 5 * H + 2 * (H - 1);
  map.mu1 = 6 * H + 2 * (H - 1);
  map.mu2 = 7 * H + 2 * (H - 1);
  map.mu3 = 8 * H + 2 * (H - 1);
  map.peak = 9 * H + 2 * (H - 1);
  map.soften_count = opts.soften_storage_cap ? H : 0;
  map.soften = map.peak + 1;

  const double scale = map.storage_scale;
  const double lws = spec.lws() / scale;
  const double fws = spec.fws() / scale;
  const double dt = spec.dt_s;

  linprog::StandardFormLP lp;
  lp.resize(map.size());

  // ---- bounds
  for (std::size_t i = 0; i < H; ++i) {
    lp.lower[map.totals + i] = std::max(demand[i], 0.0);
    lp.upper[map.totals + i] = spec.mo_turb + spec.mo_spill;
    lp.upper[map.spills + i] = spec.mo_spill;
    lp.upper[map.turbs + i] = spec.mo_turb;
    lp.lower[map.storages + i] = lws;
    lp.upper[map.storages + i] = opts.soften_storage_cap
                                     ? linprog::kInf  // cap moved into a row
                                     : fws;
  }
  // the first total is already committed: a bound fix, exact by construction
  lp.lower[map.totals] = state.committed_total;
  lp.upper[map.totals] = state.committed_total;
  // slack families and the epigraph variable default to [0, +inf)

  // ---- objective
  lp.objective[map.peak] = z.w1;
  for (std::size_t i = 0; i < H; ++i) {
    lp.objective[map.spills + i] += z.w2;
    lp.objective[map.dbw_i + i] = z.w4_i;
    lp.objective[map.dbw_d + i] = z.w4_d;
    lp.objective[map.mu1 + i] = z.w5_1 * scale;  // weights are per m3
    lp.objective[map.mu2 + i] = z.w5_2 * scale;
    lp.objective[map.mu3 + i] = z.w5_3 * scale;
  }
  for (std::size_t i = 0; i + 1 < H; ++i) {
    lp.objective[map.din_i + i] = z.w3_i;
    lp.objective[map.din_d + i] = z.w3_d;
  }
  if (opts.soften_storage_cap) {
    const double per_unit = opts.soften_penalty * scale / spec.fws();
    for (std::size_t i = 0; i < H; ++i)
      lp.objective[map.soften + i] = per_unit;
  }

  auto zero_row = [&] { return std::vector<double>(lp.n, 0.0); };

  // ---- flow split: spill + turb - total = 0
  for (std::size_t i = 0; i < H; ++i) {
    auto row = zero_row();
    row[map.spills + i] = 1.0;
    row[map.turbs + i] = 1.0;
    row[map.totals + i] = -1.0;
    lp.add_eq(std::move(row), 0.0);
  }

  // ---- storage dynamics: S_{t+1} = S_t + (forecast_t - total_t) * dt
  for (std::size_t i = 0; i < H; ++i) {
    auto row = zero_row();
    row[map.storages + i] = 1.0;
    row[map.totals + i] = dt / scale;
    double rhs = forecast[i] * dt / scale;
    if (i == 0)
      rhs += state.storage_m3 / scale;
    else
      row[map.storages + i - 1] = -1.0;
    lp.add_eq(std::move(row), rhs);
  }

  auto [w_in, w_between] = time_weights(H);

  // ---- in-horizon change slacks:
  //      dI - dD + (total_i - total_{i-1}) * w_in = 0
  for (std::size_t i = 1; i < H; ++i) {
    auto row = zero_row();
    row[map.din_i + (i - 1)] = 1.0;
    row[map.din_d + (i - 1)] = -1.0;
    row[map.totals + i] = w_in[i - 1];
    row[map.totals + i - 1] = -w_in[i - 1];
    lp.add_eq(std::move(row), 0.0);
  }

  // ---- between-schedule change slacks:
  //      dI - dD + (total_i - prev_total_i) * w_between = 0
  for (std::size_t i = 0; i < H; ++i) {
    double prev = prev_schedule.total_at(state.step_index + static_cast<long>(i));
    auto row = zero_row();
    row[map.dbw_i + i] = 1.0;
    row[map.dbw_d + i] = -1.0;
    row[map.totals + i] = w_between[i];
    lp.add_eq(std::move(row), prev * w_between[i]);
  }

  // ---- storage-violation slacks (all storages in scale units)
  for (std::size_t i = 0; i < H; ++i) {
    auto above = zero_row();  // mu1 >= S - s_u
    above[map.mu1 + i] = 1.0;
    above[map.storages + i] = -1.0;
    lp.add_ineq(std::move(above), -targets.s_u / scale);

    auto below = zero_row();  // mu2 >= s_l - S
    below[map.mu2 + i] = 1.0;
    below[map.storages + i] = 1.0;
    lp.add_ineq(std::move(below), targets.s_l / scale);

    auto ceiling = zero_row();  // mu3 >= S - s_h (candidate's own ceiling)
    ceiling[map.mu3 + i] = 1.0;
    ceiling[map.storages + i] = -1.0;
    lp.add_ineq(std::move(ceiling), -z.s_h / scale);
  }

  // ---- peak epigraph: P >= spill_i
  for (std::size_t i = 0; i < H; ++i) {
    auto row = zero_row();
    row[map.peak] = 1.0;
    row[map.spills + i] = -1.0;
    lp.add_ineq(std::move(row), 0.0);
  }

  // ---- softened cap: eps_i >= S_i - fws
  if (opts.soften_storage_cap) {
    for (std::size_t i = 0; i < H; ++i) {
      auto row = zero_row();
      row[map.soften + i] = 1.0;
      row[map.storages + i] = -1.0;
      lp.add_ineq(std::move(row), -fws);
    }
  }

  return {std::move(lp), map};
}

Schedule extract_schedule(const linprog::LPSolution& sol, const VarMap& map,
                          long k) {
  if (sol.status != linprog::SolveStatus::Optimal)
    throw NotOptimalError("schedule extraction needs an Optimal solution, got " +
                          std::string(linprog::status_name(sol.status)));
  if (sol.values.size() != map.size())
    throw NotOptimalError("solution length does not match the variable map");

  auto clamp_tiny = [](double v) { return std::abs(v) < 1e-9 ? 0.0 : v; };

  Schedule out;
  out.start_step = k;
  out.totals.resize(map.H);
  out.spills.resize(map.H);
  out.turbs.resize(map.H);
  for (std::size_t i = 0; i < map.H; ++i) {
    out.totals[i] = clamp_tiny(sol.values[map.totals + i]);
    out.spills[i] = clamp_tiny(sol.values[map.spills + i]);
    out.turbs[i] = clamp_tiny(sol.values[map.turbs + i]);
  }
  return out;
}

std::vector<double> storages_from_solution(const linprog::LPSolution& sol,
                                           const VarMap& map) {
  if (sol.status != linprog::SolveStatus::Optimal)
    throw NotOptimalError("storage readout needs an Optimal solution");
  if (sol.values.size() != map.size())
    throw NotOptimalError("solution length does not match the variable map");
  std::vector<double> out(map.H);
  for (std::size_t i = 0; i < map.H; ++i)
    out[i] = sol.values[map.storages + i] * map.storage_scale;
  return out;
}

}  // namespace pdmpc::mpc
