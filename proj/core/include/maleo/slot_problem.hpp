// Everything that stays fixed while one slot is optimized.
#pragma once

#include "maleo/array_channel.hpp"
#include "maleo/geometry.hpp"
#include "maleo/metrics.hpp"

#include <algorithm>
#include <vector>

namespace maleo {

struct SlotProblem {
  SlotGeometry slot;
  SensingScene scene;
  std::vector<CommTarget> ces;
  WaveformConfig waveform;
  double p_max = 100.0;  // W

  int num_sensing() const noexcept { return static_cast<int>(scene.targets.size()); }

  /// True when at least one CE carries an active SINR threshold.
  bool has_sinr_rows() const {
    return std::any_of(ces.begin(), ces.end(), [](const CommTarget& c) { return c.threshold > 0.0; });
  }
};

}  // namespace maleo
