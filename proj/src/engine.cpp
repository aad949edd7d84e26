#include "pdmpc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "pdmpc/errors.hpp"
#include "pdmpc/rng.hpp"

namespace pdmpc::engine {

void Event::validate() const {
  if (inflow.size() < 2)
    throw ValidationError("event '" + name + "' needs at least two hours");
  for (std::size_t i = 0; i < inflow.size(); ++i)
    if (!(inflow[i] >= 0.0))
      throw ValidationError("event '" + name + "': negative inflow at hour " +
                            std::to_string(i));
  if (!demand.empty()) {
    if (demand.size() != inflow.size())
      throw LengthMismatchError("event '" + name + "': demand has " +
                                std::to_string(demand.size()) +
                                " entries, inflow " +
                                std::to_string(inflow.size()));
    for (std::size_t i = 0; i < demand.size(); ++i)
      if (!(demand[i] >= 0.0))
        throw ValidationError("event '" + name +
                              "': negative demand at hour " +
                              std::to_string(i));
  }
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::PDMPC: return "pdmpc";
    case Mode::Fixed1: return "fixed1";
    case Mode::Fixed2: return "fixed2";
    case Mode::FixedCustom: return "custom";
  }
  return "?";
}

search::Chromosome fixed1_genes() {
  search::Chromosome ch;
  ch.genes = {3, 1, 3, 3, 20, 20, 15, 1};
  return ch;
}

search::Chromosome fixed2_genes() {
  search::Chromosome ch;
  ch.genes = {20, 5, 3, 3, 3, 3, 15, 1};
  return ch;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Resolved {
  mpc::TargetLevels targets;
  eval::EvaluatorConfig evaluator;
  search::SHTable sh_table;
  double f = 0.0;
};

Resolved resolve(const RunConfig& cfg, const hydro::ReservoirSpec& spec) {
  if (cfg.horizon < 2)
    throw ValidationError("run: horizon must be at least 2 hours");
  double lvl = cfg.initial_level_m;
  if (lvl < spec.curve.min_level() || lvl > spec.curve.max_level())
    throw OutOfRangeError("run: initial level " + std::to_string(lvl) +
                          " outside the stage-storage curve");
  cfg.forecast.validate();
  cfg.ga.validate();
  if (cfg.initial_turb < 0.0 || cfg.initial_spill < 0.0)
    throw ValidationError("run: initial outflows must be >= 0");

  Resolved r;
  r.targets = cfg.targets;
  if (r.targets.s_u == 0.0 && r.targets.s_l == 0.0 && r.targets.s_h == 0.0)
    r.targets = mpc::default_targets(spec);
  r.targets.validate(spec.fws());

  r.evaluator = cfg.evaluator;
  if (r.evaluator.s_u == 0.0 && r.evaluator.s_l == 0.0) {
    r.evaluator.s_u = r.targets.s_u;
    r.evaluator.s_l = r.targets.s_l;
  }
  r.evaluator.validate();

  r.sh_table = search::SHTable::from_levels(spec.curve, cfg.sh_levels);
  r.sh_table.validate(spec.fws());

  r.f = cfg.f > 0.0 ? cfg.f : static_cast<double>(cfg.horizon);
  if (cfg.mode == Mode::FixedCustom) cfg.custom_weights.validate();
  return r;
}

// Outcome of one step's schedule selection.
struct Chosen {
  mpc::Schedule schedule;
  mpc::WeightVector weights;
  search::Chromosome chromosome{};
  linprog::SolveStatus status = linprog::SolveStatus::Optimal;
  bool softened = false;
  bool held = false;
  std::size_t ga_generations = 0;
  std::size_t ga_evaluations = 0;
  double ga_best_penalty = 0.0;
};

mpc::Schedule solve_once(const hydro::ReservoirSpec& spec,
                         const hydro::ReservoirState& state,
                         std::span<const double> fc,
                         const mpc::Schedule& prev,
                         const mpc::WeightVector& z,
                         const mpc::TargetLevels& targets,
                         std::span<const double> demand,
                         const mpc::BuildOptions& opts,
                         linprog::SolveStatus& status_out) {
  auto built = mpc::build(spec, state, fc, prev, z, targets, demand, opts);
  auto sol = linprog::solve(built.lp);
  status_out = sol.status;
  if (sol.status != linprog::SolveStatus::Optimal)
    throw NotOptimalError(linprog::status_name(sol.status));
  return mpc::extract_schedule(sol, built.map, state.step_index);
}

}  // namespace

Trace run_event(const Event& event, const hydro::ReservoirSpec& spec,
                const RunConfig& cfg) {
  event.validate();
  spec.validate();
  Resolved res = resolve(cfg, spec);

  const std::size_t len = event.inflow.size();
  std::vector<double> demand = event.demand;
  if (demand.empty()) demand.assign(len, 0.0);

  Trace trace;
  trace.event_name = event.name;
  trace.initial_level = cfg.initial_level_m;
  trace.initial_storage =
      hydro::storage_from_level(spec.curve, cfg.initial_level_m);
  trace.steps.reserve(len);

  Rng master = make_rng(cfg.seed);

  hydro::ReservoirState state;
  state.storage_m3 = trace.initial_storage;
  state.committed_total = cfg.initial_turb + cfg.initial_spill;
  state.committed_spill = cfg.initial_spill;
  state.last_spill = 0.0;
  state.step_index = 0;

  mpc::Schedule prev =
      mpc::Schedule::constant(-1, cfg.horizon, state.committed_total);
  std::optional<search::Chromosome> warm;
  double running_peak = 0.0;  // max observed inflow so far

  for (std::size_t k = 0; k < len; ++k) {
    const std::size_t Hk = std::min(cfg.horizon, len - k);
    const double inflow = event.inflow[k];
    // before any history exists the peak-retention rule cannot bind
    const double hist_peak = k == 0 ? kInf : running_peak;

    StepRecord row;
    row.step = static_cast<long>(k);
    row.inflow = inflow;

    // (1) implement the committed outflow, clamped if it would drain the
    // reservoir below its low-water storage
    double tot = state.committed_total;
    double spl = state.committed_spill;
    double trb = tot - spl;
    double max_total =
        (state.storage_m3 + inflow * spec.dt_s - spec.lws()) / spec.dt_s;
    if (tot > max_total + 1e-9) {
      tot = std::max(0.0, max_total);
      trb = std::min(trb, tot);  // turbine flow has priority
      spl = tot - trb;
      row.fallback_clamp = true;
    }
    row.total = tot;
    row.spill = spl;
    row.turb = trb;

    // (2) observe the true inflow and advance the real storage.  The true
    // storage may overtop the curve ceiling; the trace keeps the physical
    // value and the level report clamps to the curve's ends.
    double storage_end = hydro::step_storage(state.storage_m3, inflow, tot,
                                             spec.dt_s);
    row.storage = storage_end;
    row.level = hydro::level_from_storage(
        spec.curve, std::clamp(storage_end, spec.curve.min_storage(),
                               spec.curve.max_storage()));

    // (3) forecast the horizon (truncated near the event's end)
    row.forecast = forecast::generate_forecast(cfg.forecast, event.inflow, k,
                                               Hk, master);
    std::uint64_t step_seed = master();  // drawn in every mode to keep the
                                         // forecast stream mode-independent

    // (4)-(5) pick a schedule.  The planner anchors on the in-curve
    // projection of the true storage; when the reservoir has physically
    // overtopped, the softened rebuild below absorbs the difference.
    hydro::ReservoirState lp_state = state;
    lp_state.storage_m3 = std::clamp(state.storage_m3,
                                     spec.curve.min_storage(), spec.fws());
    lp_state.committed_total = tot;
    lp_state.committed_spill = spl;
    std::span<const double> dk(demand.data() + k, Hk);

    Chosen chosen;
    chosen.weights.s_h = res.targets.s_h;
    mpc::BuildOptions opts;

    auto fixed_weights = [&]() -> mpc::WeightVector {
      switch (cfg.mode) {
        case Mode::Fixed1:
          return search::decode_unchecked(fixed1_genes(), spec, res.sh_table,
                                          Hk, res.f);
        case Mode::Fixed2:
          return search::decode_unchecked(fixed2_genes(), spec, res.sh_table,
                                          Hk, res.f);
        default:
          return cfg.custom_weights;
      }
    };

    if (cfg.mode == Mode::PDMPC) {
      search::GAConfig ga = cfg.ga;
      ga.seed = step_seed;
      auto fitness = [&](search::Chromosome ch) {
        if (cfg.pin_ceiling) ch.genes[7] = 1;
        auto z = search::decode(ch, spec, res.sh_table, Hk, res.f);
        linprog::SolveStatus st;
        auto sched =
            solve_once(spec, lp_state, row.forecast, prev, z, res.targets,
                       dk, opts, st);
        return eval::evaluate(sched, prev, lp_state, row.forecast, hist_peak,
                              spec, z.s_h, res.evaluator)
            .total;
      };
      auto ga_result = search::optimize(fitness, warm, ga);
      if (!std::isfinite(ga_result.best_penalty)) {
        // every candidate failed: the step itself is infeasible, so relax
        // the storage cap and search again
        opts.soften_storage_cap = true;
        chosen.softened = true;
        ga_result = search::optimize(fitness, warm, ga);
      }
      chosen.ga_generations = ga_result.best_by_generation.size();
      chosen.ga_evaluations = ga_result.evaluations;
      chosen.ga_best_penalty = ga_result.best_penalty;
      if (std::isfinite(ga_result.best_penalty)) {
        chosen.chromosome = ga_result.best;
        if (cfg.pin_ceiling) chosen.chromosome.genes[7] = 1;
        chosen.weights = search::decode(chosen.chromosome, spec, res.sh_table,
                                        Hk, res.f);
        chosen.schedule =
            solve_once(spec, lp_state, row.forecast, prev, chosen.weights,
                       res.targets, dk, opts, chosen.status);
        warm = chosen.chromosome;
      } else {
        chosen.held = true;
      }
    } else {
      chosen.weights = fixed_weights();
      try {
        chosen.schedule =
            solve_once(spec, lp_state, row.forecast, prev, chosen.weights,
                       res.targets, dk, opts, chosen.status);
      } catch (const NotOptimalError&) {
        opts.soften_storage_cap = true;
        chosen.softened = true;
        try {
          chosen.schedule =
              solve_once(spec, lp_state, row.forecast, prev, chosen.weights,
                         res.targets, dk, opts, chosen.status);
        } catch (const NotOptimalError&) {
          chosen.held = true;
        }
      }
    }

    if (chosen.held) {
      // last resort: carry the current outflow forward unchanged
      chosen.schedule = mpc::Schedule::constant(static_cast<long>(k), Hk, tot);
      chosen.schedule.spills.assign(Hk, spl);
      for (std::size_t i = 0; i < Hk; ++i)
        chosen.schedule.turbs[i] = tot - spl;
      chosen.status = linprog::SolveStatus::NumericalFailure;
    }

    row.schedule = chosen.schedule;
    row.chromosome = chosen.chromosome;
    row.weights = chosen.weights;
    row.lp_status = chosen.status;
    row.fallback_soften = chosen.softened;
    row.fallback_hold = chosen.held;
    row.ga_generations = chosen.ga_generations;
    row.ga_evaluations = chosen.ga_evaluations;
    row.ga_best_penalty = chosen.ga_best_penalty;
    double sh_for_eval =
        chosen.weights.s_h > 0.0 ? chosen.weights.s_h : res.targets.s_h;
    row.penalty = eval::evaluate(chosen.schedule, prev, lp_state,
                                 row.forecast, hist_peak, spec, sh_for_eval,
                                 res.evaluator);

    // (6) commit: the plan's next-hour entry becomes the next outflow
    state.storage_m3 = storage_end;
    if (Hk >= 2) {
      state.committed_total = chosen.schedule.totals[1];
      state.committed_spill = chosen.schedule.spills[1];
    }
    state.last_spill = spl;
    state.step_index = static_cast<long>(k) + 1;
    prev = chosen.schedule;
    running_peak = std::max(running_peak, inflow);

    trace.steps.push_back(std::move(row));
  }
  return trace;
}

Metrics compute_metrics(const Trace& trace, double change_tol) {
  if (trace.steps.empty())
    throw ValidationError("compute_metrics: empty trace");
  Metrics m;
  m.peak_outflow = 0.0;
  m.peak_rwl = -kInf;
  m.lowest_rwl = kInf;
  for (const auto& row : trace.steps) {
    m.peak_outflow = std::max(m.peak_outflow, row.total);
    m.peak_rwl = std::max(m.peak_rwl, row.level);
    m.lowest_rwl = std::min(m.lowest_rwl, row.level);
    m.total_penalty += row.penalty.total;
    m.max_penalty = std::max(m.max_penalty, row.penalty.total);
  }
  for (std::size_t k = 1; k < trace.steps.size(); ++k) {
    const mpc::Schedule& a = trace.steps[k - 1].schedule;
    const mpc::Schedule& b = trace.steps[k].schedule;
    long lo = std::max(a.start_step, b.start_step);
    long hi = std::min(a.start_step + static_cast<long>(a.horizon()),
                       b.start_step + static_cast<long>(b.horizon()));
    for (long t = lo; t < hi; ++t) {
      double va = a.totals[static_cast<std::size_t>(t - a.start_step)];
      double vb = b.totals[static_cast<std::size_t>(t - b.start_step)];
      if (std::abs(va - vb) > change_tol) {
        ++m.schedule_changes;
        break;
      }
    }
  }
  return m;
}

std::vector<ComparisonRow> compare_modes(
    const Event& event, const hydro::ReservoirSpec& spec,
    const RunConfig& base_cfg, const std::vector<Mode>& modes,
    const std::vector<std::uint64_t>& seeds) {
  if (modes.empty() || seeds.empty())
    throw ValidationError("compare_modes: need at least one mode and seed");
  std::vector<ComparisonRow> rows;
  rows.reserve(modes.size() * seeds.size());
  for (Mode mode : modes) {
    for (std::uint64_t seed : seeds) {
      RunConfig cfg = base_cfg;
      cfg.mode = mode;
      cfg.seed = seed;
      Trace trace = run_event(event, spec, cfg);
      ComparisonRow row;
      row.mode = mode;
      row.seed = seed;
      row.horizon = cfg.horizon;
      row.metrics = compute_metrics(trace);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace pdmpc::engine
