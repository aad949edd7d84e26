#include "pdmpc/forecast.hpp"

#include <algorithm>
#include <string>

namespace pdmpc::forecast {

void ForecastConfig::validate() const {
  if (a < 0.0 || b < 0.0)
    throw ValidationError("forecast noise stds a, b must be >= 0");
  if (!(c > 0.0 && c <= 1.0))
    throw ValidationError("forecast clamp c must be in (0, 1]");
  if (window < 1) throw ValidationError("forecast window must be >= 1");
}

ForecastConfig ForecastConfig::certainty() {
  ForecastConfig cfg;
  cfg.a = 0.0;
  cfg.b = 0.0;
  cfg.window = 1;
  return cfg;
}

double smooth_inflow(std::span<const double> real_inflow, std::size_t t,
                     int window) {
  if (t >= real_inflow.size())
    throw OutOfRangeError("smooth_inflow: index " + std::to_string(t) +
                          " outside series of length " +
                          std::to_string(real_inflow.size()));
  if (window < 1) throw ValidationError("smooth_inflow: window must be >= 1");
  std::size_t lo = t + 1 >= static_cast<std::size_t>(window)
                       ? t + 1 - static_cast<std::size_t>(window)
                       : 0;
  double acc = 0.0;
  for (std::size_t j = lo; j <= t; ++j) acc += real_inflow[j];
  return acc / static_cast<double>(t - lo + 1);
}

std::vector<double> generate_forecast(const ForecastConfig& cfg,
                                      std::span<const double> real_inflow,
                                      std::size_t k, std::size_t H, Rng& rng) {
  cfg.validate();
  if (H < 1) throw ValidationError("generate_forecast: H must be >= 1");
  if (k + H > real_inflow.size())
    throw OutOfRangeError("generate_forecast: horizon k+H = " +
                          std::to_string(k + H) + " exceeds series length " +
                          std::to_string(real_inflow.size()));

  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> out(H);
  for (std::size_t T = 0; T < H; ++T) {
    double sigma = cfg.a + static_cast<double>(T) * cfg.b;
    double x = sigma > 0.0 ? sigma * n01(rng) : 0.0;
    double omega = std::max(1.0 + x, cfg.c);
    out[T] = smooth_inflow(real_inflow, k + T, cfg.window) * omega;
  }
  return out;
}

}  // namespace pdmpc::forecast
