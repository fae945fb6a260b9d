#include "sflow/flowviz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sflow/error.hpp"

namespace sflow {

namespace {

void hsv_to_rgb(double h, double s, double v, double rgb[3]) {
  const double hp = h * 6.0;
  const int sector = static_cast<int>(std::floor(hp)) % 6;
  const double f = hp - std::floor(hp);
  const double p = v * (1 - s);
  const double q = v * (1 - s * f);
  const double t = v * (1 - s * (1 - f));
  const double table[6][3] = {{v, t, p}, {q, v, p}, {p, v, t}, {p, q, v}, {t, p, v}, {v, p, q}};
  std::copy(table[sector], table[sector] + 3, rgb);
}

}  // namespace

ImageBuffer flow_to_color(const FlowField& flow, std::optional<double> max_magnitude) {
  double scale = 0.0;
  if (max_magnitude) {
    if (!(*max_magnitude > 0.0) || !std::isfinite(*max_magnitude)) {
      throw Error(ErrorCode::invalid_argument, "max magnitude must be positive");
    }
    scale = *max_magnitude;
  } else {
    for (const FlowVector& f : flow.vectors()) scale = std::max(scale, std::hypot(f.dx, f.dy));
  }
  ImageBuffer out(flow.width(), flow.height(), 3, 1.0);
  if (scale == 0.0) return out;
  for (int y = 0; y < flow.height(); ++y)
    for (int x = 0; x < flow.width(); ++x) {
      const FlowVector f = flow.at(x, y);
      const double mag = std::hypot(f.dx, f.dy);
      if (mag == 0.0) continue;
      double angle = std::atan2(f.dy, f.dx) / (2 * std::numbers::pi);
      if (angle < 0) angle += 1.0;
      double rgb[3];
      hsv_to_rgb(angle, std::min(mag / scale, 1.0), 1.0, rgb);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = rgb[c];
    }
  return out;
}

}  // namespace sflow
