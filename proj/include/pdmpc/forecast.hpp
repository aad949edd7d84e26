#pragma once

// Synthetic inflow forecasts: smooth the real inflow with a short moving
// average, then scale each horizon position by a noise multiplier whose
// spread grows with lead time.

#include <cstddef>
#include <span>
#include <vector>

#include "pdmpc/errors.hpp"
#include "pdmpc/rng.hpp"

namespace pdmpc::forecast {

struct ForecastConfig {
  double a = 0.05;  // multiplier std at lead time 0
  double b = 0.03;  // std growth per step of lead time
  double c = 0.1;   // lower clamp on the multiplier
  int window = 3;   // moving-average span, steps

  /// Throws ValidationError unless a,b >= 0, 0 < c <= 1, window >= 1.
  void validate() const;

  /// a = b = 0 and window = 1: forecasts equal the true inflow.
  static ForecastConfig certainty();
};

/// Mean of real_inflow[max(0, t-window+1) .. t]; the window truncates at
/// the series start. Throws OutOfRangeError for t outside the series.
double smooth_inflow(std::span<const double> real_inflow, std::size_t t,
                     int window);

/// Forecast for steps k .. k+H-1, seen from step k. For horizon position
/// T the multiplier is max(1 + x, c) with x ~ Normal(0, (a + T*b)^2); a
/// zero-spread position skips the draw so certainty mode leaves the rng
/// untouched. Throws OutOfRangeError when k+H exceeds the series.
std::vector<double> generate_forecast(const ForecastConfig& cfg,
                                      std::span<const double> real_inflow,
                                      std::size_t k, std::size_t H, Rng& rng);

}  // namespace pdmpc::forecast
