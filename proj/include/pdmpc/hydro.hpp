#pragma once

// Reservoir physics: stage-storage conversion, hourly mass-balance
// stepping, and operational-constraint validation.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pdmpc/errors.hpp"

namespace pdmpc::hydro {

/// Piecewise-linear level<->storage relation. Levels are meters above
/// datum, storages cubic meters; both strictly increasing.
struct StageStorageCurve {
  struct Point {
    double level_m;
    double storage_m3;
  };
  std::vector<Point> points;

  /// Throws ValidationError unless there are >= 2 points with strictly
  /// increasing levels and storages.
  void validate() const;

  double min_level() const { return points.front().level_m; }
  double max_level() const { return points.back().level_m; }
  double min_storage() const { return points.front().storage_m3; }
  double max_storage() const { return points.back().storage_m3; }
};

/// Physical constants of one reservoir.
struct ReservoirSpec {
  double fwl_m = 0.0;             // flood water level
  double nhwl_m = 0.0;            // normal high water level
  double lwl_m = 0.0;             // low water level
  double spillway_crest_m = 0.0;  // spill physically possible above this level
  double mo_turb = 0.0;           // turbine outflow capacity, m3/s
  double mo_spill = 0.0;          // spillway outflow capacity, m3/s
  StageStorageCurve curve;
  double dt_s = 3600.0;  // seconds per step

  /// Storage anchors derived from the curve.
  double lws() const;  // storage at lwl
  double fws() const;  // storage at fwl

  /// Throws ValidationError on ordering/capacity/curve-coverage problems.
  void validate() const;
};

/// Mutable reservoir condition carried between receding-horizon steps.
struct ReservoirState {
  double storage_m3 = 0.0;
  double committed_total = 0.0;  // total outflow of the last implemented step, m3/s
  double committed_spill = 0.0;  // spillway part of the same, m3/s
  double last_spill = 0.0;       // spillway outflow one step further back, m3/s
  long step_index = 0;
};

/// Interpolated water level for a storage inside the curve range.
/// Throws OutOfRangeError outside [min_storage, max_storage].
double level_from_storage(const StageStorageCurve& curve, double storage_m3);

/// Exact inverse of level_from_storage on the curve range.
/// Throws OutOfRangeError outside [min_level, max_level].
double storage_from_level(const StageStorageCurve& curve, double level_m);

/// One mass-balance step: storage + (inflow - outflow_total) * dt.
/// Throws NegativeStorageError when the result would be negative; callers
/// must clamp the outflow, never the storage.
double step_storage(double storage_m3, double inflow, double outflow_total,
                    double dt_s);

/// One operational-rule breach found by check_constraints.
struct Violation {
  enum class Kind {
    Demand,            // total outflow below downstream demand
    StorageLow,        // storage below LWS
    StorageHigh,       // storage above FWS
    TurbineCapacity,   // total - spill above mo_turb
    SpillCapacity,     // spill above mo_spill
    SpillBelowCrest,   // spilling while level is under the spillway crest
    SpillExceedsTotal  // spill above total outflow
  };
  Kind kind;
  std::size_t step;
  double value;  // offending quantity
  double limit;  // bound it broke
};

const char* violation_name(Violation::Kind k);

struct ViolationReport {
  std::vector<Violation> items;
  bool ok() const { return items.empty(); }
  std::string describe() const;  // one line per violation, for diagnostics
};

/// Checks a whole schedule against the operating rules: demand coverage,
/// storage band [LWS, FWS], turbine and spillway capacity, no spill below
/// the crest, and spill <= total. `storages` holds either one entry per
/// step (end-of-step storage) or one extra leading entry (the storage at
/// the start of the first step); the crest rule uses the entry aligned to
/// the step start when that extra entry is present.
/// Throws LengthMismatchError when the series lengths disagree.
ViolationReport check_constraints(const ReservoirSpec& spec,
                                  std::span<const double> totals,
                                  std::span<const double> spills,
                                  std::span<const double> storages,
                                  std::span<const double> demand);

/// Reads a curve from a two-column text table (level_m storage_m3), one
/// header line required, rows strictly increasing in both columns.
/// Throws ParseError / ValidationError.
StageStorageCurve load_curve(const std::string& path);

/// Bundled demonstration reservoir: a large flood-control dam with a
/// 1.49e9 m3 flood-water storage and an 11,680 m3/s spillway.
ReservoirSpec default_reservoir();

}  // namespace pdmpc::hydro
