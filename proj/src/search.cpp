#include "pdmpc/search.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "pdmpc/errors.hpp"
#include "pdmpc/rng.hpp"

namespace pdmpc::search {

void Chromosome::validate() const {
  for (std::size_t i = 0; i < genes.size(); ++i)
    if (genes[i] < kMin[i] || genes[i] > kMax[i])
      throw OutOfRangeError("gene " + std::to_string(i) + " = " +
                            std::to_string(genes[i]) + " outside [" +
                            std::to_string(kMin[i]) + ", " +
                            std::to_string(kMax[i]) + "]");
}

void GAConfig::validate() const {
  if (population < 4) throw ValidationError("population must be >= 4");
  if (generations < 1) throw ValidationError("generations must be >= 1");
  if (elitism >= population)
    throw ValidationError("elitism must be smaller than the population");
  if (tournament_size < 1 || tournament_size > population)
    throw ValidationError("tournament size must be in [1, population]");
  if (crossover_prob < 0.0 || crossover_prob > 1.0)
    throw ValidationError("crossover probability must be in [0, 1]");
  if (mutation_prob_per_gene < 0.0 || mutation_prob_per_gene > 1.0)
    throw ValidationError("mutation probability must be in [0, 1]");
}

SHTable SHTable::from_levels(const hydro::StageStorageCurve& curve,
                             const std::array<double, 3>& levels) {
  SHTable t;
  for (std::size_t i = 0; i < 3; ++i)
    t.storages_m3[i] = hydro::storage_from_level(curve, levels[i]);
  return t;
}

void SHTable::validate(double fws) const {
  if (!(storages_m3[0] < storages_m3[1] && storages_m3[1] < storages_m3[2]))
    throw ValidationError("ceiling table must be strictly increasing");
  if (storages_m3[2] >= fws)
    throw ValidationError("ceiling table must stay below flood storage");
}

mpc::WeightVector decode_unchecked(const Chromosome& ch,
                                   const hydro::ReservoirSpec& spec,
                                   const SHTable& sh, std::size_t horizon,
                                   double f) {
  if (f <= 0.0) f = static_cast<double>(horizon);
  mpc::WeightVector z;
  z.w1 = ch.genes[0] * 20.0 / spec.mo_spill;
  z.w2 = ch.genes[1] * 2.0 / spec.mo_spill;
  z.w3_i = ch.genes[2] * 20.0 / spec.mo_spill;
  z.w3_d = ch.genes[3] * 20.0 / spec.mo_spill;
  z.w4_i = ch.genes[4] * 20.0 / spec.mo_spill;
  z.w4_d = ch.genes[5] * 20.0 / spec.mo_spill;
  double denom = spec.fws() * f;
  z.w5_1 = ch.genes[6] * 20.0 / denom;
  z.w5_2 = ch.genes[6] * 40.0 / denom;
  z.w5_3 = ch.genes[6] * 400.0 / denom;
  std::size_t slot = static_cast<std::size_t>(
      std::clamp(ch.genes[7], 0, 2));
  z.s_h = sh.storages_m3[slot];
  return z;
}

mpc::WeightVector decode(const Chromosome& ch,
                         const hydro::ReservoirSpec& spec, const SHTable& sh,
                         std::size_t horizon, double f) {
  ch.validate();
  return decode_unchecked(ch, spec, sh, horizon, f);
}

namespace {

constexpr double kInfPenalty = std::numeric_limits<double>::infinity();

class Cache {
public:
  explicit Cache(const Fitness& fitness) : fitness_(fitness) {}

  double score(const Chromosome& ch) {
    auto it = seen_.find(ch.genes);
    if (it != seen_.end()) return it->second;
    double p;
    try {
      p = fitness_(ch);
    } catch (...) {
      p = kInfPenalty;  // a failed candidate loses every comparison
    }
    seen_.emplace(ch.genes, p);
    return p;
  }

  std::size_t distinct() const { return seen_.size(); }

private:
  const Fitness& fitness_;
  std::map<std::array<int, 8>, double> seen_;
};

Chromosome random_chromosome(Rng& rng) {
  Chromosome ch;
  for (std::size_t i = 0; i < ch.genes.size(); ++i) {
    std::uniform_int_distribution<int> dist(Chromosome::kMin[i],
                                            Chromosome::kMax[i]);
    ch.genes[i] = dist(rng);
  }
  return ch;
}

void mutate(Chromosome& ch, double prob, Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t i = 0; i < ch.genes.size(); ++i) {
    if (coin(rng) >= prob) continue;
    std::uniform_int_distribution<int> dist(Chromosome::kMin[i],
                                            Chromosome::kMax[i]);
    ch.genes[i] = dist(rng);
  }
}

std::size_t tournament(const std::vector<double>& fit, std::size_t k,
                       Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, fit.size() - 1);
  std::size_t winner = pick(rng);
  for (std::size_t i = 1; i < k; ++i) {
    std::size_t challenger = pick(rng);
    if (fit[challenger] < fit[winner]) winner = challenger;
  }
  return winner;
}

}  // namespace

SearchResult optimize(const Fitness& fitness,
                      const std::optional<Chromosome>& warm_start,
                      const GAConfig& cfg) {
  cfg.validate();
  if (warm_start) warm_start->validate();
  if (!fitness) throw ValidationError("optimize: fitness is empty");

  Rng rng = make_rng(cfg.seed);
  Cache cache(fitness);

  std::vector<Chromosome> pop(cfg.population);
  std::vector<double> fit(cfg.population);
  for (std::size_t i = 0; i < cfg.population; ++i)
    pop[i] = (i == 0 && warm_start) ? *warm_start : random_chromosome(rng);

  SearchResult result;
  result.best = pop[0];  // placeholder in case every candidate fails
  result.best_penalty = kInfPenalty;
  result.best_by_generation.reserve(cfg.generations);

  for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
    if (gen > 0) {
      // elites carry over unchanged; the rest are bred from the scored
      // parents of the previous generation
      std::vector<std::size_t> order(cfg.population);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) {
                         return fit[a] < fit[b];
                       });
      std::vector<Chromosome> next;
      next.reserve(cfg.population);
      for (std::size_t i = 0; i < cfg.elitism; ++i)
        next.push_back(pop[order[i]]);

      std::uniform_real_distribution<double> coin(0.0, 1.0);
      std::uniform_int_distribution<int> cut(1, 7);
      while (next.size() < cfg.population) {
        Chromosome a = pop[tournament(fit, cfg.tournament_size, rng)];
        Chromosome b = pop[tournament(fit, cfg.tournament_size, rng)];
        if (coin(rng) < cfg.crossover_prob) {
          int point = cut(rng);
          for (int g = point; g < 8; ++g)
            std::swap(a.genes[static_cast<std::size_t>(g)],
                      b.genes[static_cast<std::size_t>(g)]);
        }
        mutate(a, cfg.mutation_prob_per_gene, rng);
        mutate(b, cfg.mutation_prob_per_gene, rng);
        next.push_back(a);
        if (next.size() < cfg.population) next.push_back(b);
      }
      pop = std::move(next);
    }

    for (std::size_t i = 0; i < cfg.population; ++i) {
      fit[i] = cache.score(pop[i]);
      if (fit[i] < result.best_penalty) {
        result.best_penalty = fit[i];
        result.best = pop[i];
      }
    }
    result.best_by_generation.push_back(result.best_penalty);
  }

  result.evaluations = cache.distinct();
  return result;
}

}  // namespace pdmpc::search
