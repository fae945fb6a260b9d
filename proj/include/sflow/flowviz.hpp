#pragma once

#include <optional>

#include "sflow/image.hpp"

namespace sflow {

// Colour-wheel encoding: hue is the flow direction (0 deg = +x, red),
// saturation the magnitude over `max_magnitude` clamped to 1, value 1, so zero
// flow is white. Without `max_magnitude` the largest magnitude in the field is
// used, which makes images comparable only within one field.
ImageBuffer flow_to_color(const FlowField& flow, std::optional<double> max_magnitude = std::nullopt);

}  // namespace sflow
