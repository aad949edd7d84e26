// Integer-coded genetic search over the eight-gene weight/parameter
// chromosome: seven objective-weight codes plus the operator-ceiling
// selector.  Each step of the engine re-runs this search, warm-started
// from the previous step's winner.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pdmpc/hydro.hpp"
#include "pdmpc/mpc.hpp"

namespace pdmpc::search {

/// Gene order: g_w1, g_w2, g_w3i, g_w3d, g_w4i, g_w4d, g_w5, g_sh.
struct Chromosome {
  std::array<int, 8> genes{};

  static constexpr std::array<int, 8> kMin{0, 0, 0, 0, 0, 0, 1, 0};
  static constexpr std::array<int, 8> kMax{19, 2, 19, 19, 19, 19, 20, 2};

  /// Throws OutOfRangeError when a gene leaves its closed range.
  void validate() const;

  bool operator==(const Chromosome&) const = default;
};

struct GAConfig {
  std::size_t population = 24;
  std::size_t generations = 30;
  std::size_t tournament_size = 3;
  double crossover_prob = 0.9;
  double mutation_prob_per_gene = 0.1;
  std::size_t elitism = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// The three candidate operator-ceiling storages the g_sh gene selects
/// among, precomputed from their levels through the stage-storage curve.
struct SHTable {
  std::array<double, 3> storages_m3{};

  static SHTable from_levels(const hydro::StageStorageCurve& curve,
                             const std::array<double, 3>& levels = {78.5, 79.0,
                                                                    79.5});
  /// Throws ValidationError unless strictly increasing and below fws.
  void validate(double fws) const;
};

/// Gene codes -> LP-ready weights.  Flow-weight codes scale by 20 (2 for
/// the volume weight) over spillway capacity; the shared storage-weight
/// code scales by 20/40/400 over FWS*f.  When f <= 0 it defaults to the
/// horizon length, keeping the storage term's scale horizon-independent.
mpc::WeightVector decode(const Chromosome& ch,
                         const hydro::ReservoirSpec& spec, const SHTable& sh,
                         std::size_t horizon, double f = 0.0);

/// Same arithmetic without the range check; the published fixed-weight
/// baselines sit outside the search ranges and need this entry point.
mpc::WeightVector decode_unchecked(const Chromosome& ch,
                                   const hydro::ReservoirSpec& spec,
                                   const SHTable& sh, std::size_t horizon,
                                   double f = 0.0);

using Fitness = std::function<double(const Chromosome&)>;

struct SearchResult {
  Chromosome best;
  double best_penalty = 0.0;
  std::size_t evaluations = 0;  // distinct chromosomes scored
  std::vector<double> best_by_generation;  // incumbent after each generation
};

/// Minimize fitness over the chromosome space.  Tournament selection,
/// single-point crossover, per-gene uniform-redraw mutation, elitism.
/// Fitness calls are cached per distinct chromosome; a fitness that throws
/// marks that chromosome +inf and the search continues.
SearchResult optimize(const Fitness& fitness,
                      const std::optional<Chromosome>& warm_start,
                      const GAConfig& cfg);

}  // namespace pdmpc::search
