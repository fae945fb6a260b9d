#include "sflow/filters.hpp"

#include <algorithm>
#include <cmath>

namespace sflow {

std::vector<double> gaussian_taps(double sigma) {
  if (!(sigma > 0.0)) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& t : taps) t /= sum;
  return taps;
}

std::vector<double> gaussian_blur(std::span<const double> plane, int width, int height,
                                  double sigma) {
  const std::vector<double> taps = gaussian_taps(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  if (radius == 0) return {plane.begin(), plane.end()};

  auto idx = [width](int x, int y) {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x);
  };
  std::vector<double> tmp(plane.size());
  std::vector<double> out(plane.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += taps[static_cast<std::size_t>(k + radius)] *
               plane[idx(std::clamp(x + k, 0, width - 1), y)];
      }
      tmp[idx(x, y)] = acc;
    }
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += taps[static_cast<std::size_t>(k + radius)] *
               tmp[idx(x, std::clamp(y + k, 0, height - 1))];
      }
      out[idx(x, y)] = acc;
    }
  }
  return out;
}

}  // namespace sflow
