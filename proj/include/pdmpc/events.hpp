// Bundled synthetic flood hydrographs: smooth gamma-shaped pulses over a
// dry-season base flow, sized so their peaks land in the 2,500-4,500 m3/s
// band.  These are the repository's standard test storms.
#pragma once

#include <vector>

#include "pdmpc/engine.hpp"

namespace pdmpc::events {

/// One storm pulse peaking at hour tp with amplitude A; m controls width.
double pulse(double t, double tp, double amplitude, double sharpness);

engine::Event double_peak();  // 96 h, crests near hours 28 and 58
engine::Event single_peak();  // 96 h, one large crest near hour 46
engine::Event triple_peak();  // 120 h, three crests

std::vector<engine::Event> bundled();

}  // namespace pdmpc::events
