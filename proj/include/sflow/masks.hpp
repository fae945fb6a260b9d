#pragma once

#include <cstdint>

#include "sflow/image.hpp"

namespace sflow {

// Irregular hole mask from random brush strokes (random walks of stamped
// disks with varying radius). Stamping stops as soon as ceil(ratio * W * H)
// pixels are set, so the achieved ratio never undershoots the target.
Mask generate_irregular_mask(int width, int height, double target_ratio, std::uint64_t seed);

}  // namespace sflow
