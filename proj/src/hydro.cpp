#include "pdmpc/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pdmpc::hydro {

void StageStorageCurve::validate() const {
  if (points.size() < 2)
    throw ValidationError("stage-storage curve needs at least 2 points");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].level_m > points[i - 1].level_m))
      throw ValidationError("curve levels must be strictly increasing (row " +
                            std::to_string(i) + ")");
    if (!(points[i].storage_m3 > points[i - 1].storage_m3))
      throw ValidationError("curve storages must be strictly increasing (row " +
                            std::to_string(i) + ")");
  }
}

double ReservoirSpec::lws() const { return storage_from_level(curve, lwl_m); }
double ReservoirSpec::fws() const { return storage_from_level(curve, fwl_m); }

void ReservoirSpec::validate() const {
  curve.validate();
  if (!(lwl_m < spillway_crest_m && spillway_crest_m < nhwl_m && nhwl_m < fwl_m))
    throw ValidationError("reservoir levels must satisfy lwl < crest < nhwl < fwl");
  if (!(mo_turb > 0.0)) throw ValidationError("mo_turb must be positive");
  if (!(mo_spill > 0.0)) throw ValidationError("mo_spill must be positive");
  if (!(dt_s > 0.0)) throw ValidationError("dt must be positive");
  if (lwl_m < curve.min_level() || fwl_m > curve.max_level())
    throw ValidationError("curve does not cover [lwl, fwl]");
}

double level_from_storage(const StageStorageCurve& curve, double storage_m3) {
  const auto& p = curve.points;
  if (storage_m3 < p.front().storage_m3 || storage_m3 > p.back().storage_m3)
    throw OutOfRangeError("storage " + std::to_string(storage_m3) +
                          " outside curve range");
  auto it = std::lower_bound(p.begin(), p.end(), storage_m3,
                             [](const StageStorageCurve::Point& q, double s) {
                               return q.storage_m3 < s;
                             });
  if (it->storage_m3 == storage_m3) return it->level_m;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  double f = (storage_m3 - lo.storage_m3) / (hi.storage_m3 - lo.storage_m3);
  return lo.level_m + f * (hi.level_m - lo.level_m);
}

double storage_from_level(const StageStorageCurve& curve, double level_m) {
  const auto& p = curve.points;
  if (level_m < p.front().level_m || level_m > p.back().level_m)
    throw OutOfRangeError("level " + std::to_string(level_m) +
                          " outside curve range");
  auto it = std::lower_bound(p.begin(), p.end(), level_m,
                             [](const StageStorageCurve::Point& q, double l) {
                               return q.level_m < l;
                             });
  if (it->level_m == level_m) return it->storage_m3;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  double f = (level_m - lo.level_m) / (hi.level_m - lo.level_m);
  return lo.storage_m3 + f * (hi.storage_m3 - lo.storage_m3);
}

double step_storage(double storage_m3, double inflow, double outflow_total,
                    double dt_s) {
  double next = storage_m3 + (inflow - outflow_total) * dt_s;
  if (next < 0.0)
    throw NegativeStorageError("mass-balance step would drive storage to " +
                               std::to_string(next));
  return next;
}

const char* violation_name(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::Demand: return "demand";
    case Violation::Kind::StorageLow: return "storage_low";
    case Violation::Kind::StorageHigh: return "storage_high";
    case Violation::Kind::TurbineCapacity: return "turbine_capacity";
    case Violation::Kind::SpillCapacity: return "spill_capacity";
    case Violation::Kind::SpillBelowCrest: return "spill_below_crest";
    case Violation::Kind::SpillExceedsTotal: return "spill_exceeds_total";
  }
  return "?";
}

std::string ViolationReport::describe() const {
  std::ostringstream out;
  for (const auto& v : items)
    out << "step " << v.step << ": " << violation_name(v.kind) << " (value "
        << v.value << ", limit " << v.limit << ")\n";
  return out.str();
}

ViolationReport check_constraints(const ReservoirSpec& spec,
                                  std::span<const double> totals,
                                  std::span<const double> spills,
                                  std::span<const double> storages,
                                  std::span<const double> demand) {
  const std::size_t n = totals.size();
  if (spills.size() != n || demand.size() != n)
    throw LengthMismatchError("totals/spills/demand lengths disagree");
  const bool has_initial = storages.size() == n + 1;
  if (!has_initial && storages.size() != n)
    throw LengthMismatchError("storages must have length n or n+1");

  // Small absolute slack so machine-precision LP output does not trip the
  // checks on flows (m3/s) or storages (m3).
  const double flow_eps = 1e-6;
  const double stor_eps = 1e-3;

  ViolationReport rep;
  auto add = [&rep](Violation::Kind k, std::size_t step, double value,
                    double limit) {
    rep.items.push_back({k, step, value, limit});
  };

  const double lws = spec.lws();
  const double fws = spec.fws();
  for (std::size_t t = 0; t < storages.size(); ++t) {
    // Report against the step the storage belongs to; the optional extra
    // leading entry is the start of step 0.
    std::size_t step = has_initial ? (t == 0 ? 0 : t - 1) : t;
    if (storages[t] < lws - stor_eps)
      add(Violation::Kind::StorageLow, step, storages[t], lws);
    if (storages[t] > fws + stor_eps)
      add(Violation::Kind::StorageHigh, step, storages[t], fws);
  }

  for (std::size_t t = 0; t < n; ++t) {
    if (totals[t] < demand[t] - flow_eps)
      add(Violation::Kind::Demand, t, totals[t], demand[t]);
    double turbine = totals[t] - spills[t];
    if (turbine > spec.mo_turb + flow_eps)
      add(Violation::Kind::TurbineCapacity, t, turbine, spec.mo_turb);
    if (spills[t] > spec.mo_spill + flow_eps)
      add(Violation::Kind::SpillCapacity, t, spills[t], spec.mo_spill);
    if (spills[t] > totals[t] + flow_eps)
      add(Violation::Kind::SpillExceedsTotal, t, spills[t], totals[t]);
    if (spills[t] > flow_eps) {
      // With the extra leading entry, storages[t] is the start of step t;
      // without it, storages[t] (end of step t) is the best stand-in.
      double s = storages[t];
      if (s >= spec.curve.min_storage() && s <= spec.curve.max_storage()) {
        double level = level_from_storage(spec.curve, s);
        if (level < spec.spillway_crest_m)
          add(Violation::Kind::SpillBelowCrest, t, level, spec.spillway_crest_m);
      }
    }
  }
  return rep;
}

StageStorageCurve load_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open curve file: " + path);
  StageStorageCurve curve;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
    if (trimmed.empty() || trimmed[0] == '#') continue;
    if (!header_seen) {  // first non-comment line is the header
      header_seen = true;
      continue;
    }
    std::istringstream row(trimmed);
    double level, storage;
    char comma;
    if (!(row >> level)) goto bad;
    row >> std::ws;
    if (row.peek() == ',') row >> comma;
    if (!(row >> storage)) goto bad;
    curve.points.push_back({level, storage});
    continue;
  bad:
    throw ParseError(path + ":" + std::to_string(lineno) +
                     ": expected 'level storage' row");
  }
  if (!header_seen) throw ParseError(path + ": missing header line");
  curve.validate();
  return curve;
}

ReservoirSpec default_reservoir() {
  ReservoirSpec spec;
  spec.fwl_m = 80.0;
  spec.nhwl_m = 76.5;
  spec.lwl_m = 60.0;
  spec.spillway_crest_m = 64.5;
  spec.mo_turb = 264.0;
  spec.mo_spill = 11680.0;
  spec.dt_s = 3600.0;
  spec.curve.points = {
      {60.0, 0.30e9}, {64.5, 0.55e9}, {76.5, 1.24e9}, {80.0, 1.49e9}};
  spec.validate();
  return spec;
}

}  // namespace pdmpc::hydro
