#include "sflow/masks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sflow/rng.hpp"

namespace sflow {

Mask generate_irregular_mask(int width, int height, double target_ratio, std::uint64_t seed) {
  if (!(target_ratio > 0.0 && target_ratio < 0.9)) {
    throw Error(ErrorCode::invalid_ratio, "target ratio must lie in (0, 0.9)");
  }
  Mask m(width, height);
  const std::size_t total = m.pixel_count();
  const auto target = static_cast<std::size_t>(std::ceil(target_ratio * static_cast<double>(total)));
  std::size_t count = 0;

  Rng rng(seed);
  const int max_radius = std::max(1, std::min(width, height) / 12);
  const int min_radius = std::max(1, max_radius / 3);

  auto stamp = [&](double cx, double cy, int r) {
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(cx + r)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(cy + r)));
    for (int y = y0; y <= y1 && count < target; ++y) {
      for (int x = x0; x <= x1 && count < target; ++x) {
        const double ddx = x - cx;
        const double ddy = y - cy;
        if (ddx * ddx + ddy * ddy > (r + 0.5) * (r + 0.5) || m.hole(x, y)) continue;
        m.set(x, y, true);
        ++count;
      }
    }
  };

  while (count < target) {
    double x = rng.uniform(0.0, width);
    double y = rng.uniform(0.0, height);
    double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    int radius = rng.uniform_int(min_radius, max_radius);
    const int vertices = rng.uniform_int(3, 10);
    for (int v = 0; v < vertices && count < target; ++v) {
      angle += rng.uniform(-std::numbers::pi / 3.0, std::numbers::pi / 3.0);
      const double length = rng.uniform(1.0, 4.0) * max_radius;
      const int steps = std::max(1, static_cast<int>(std::ceil(length)));
      for (int s = 0; s < steps && count < target; ++s) {
        x = std::clamp(x + std::cos(angle) * length / steps, 0.0, width - 1.0);
        y = std::clamp(y + std::sin(angle) * length / steps, 0.0, height - 1.0);
        stamp(x, y, radius);
      }
      radius = std::clamp(radius + rng.uniform_int(-1, 1), min_radius, max_radius);
    }
  }
  return m;
}

}  // namespace sflow
