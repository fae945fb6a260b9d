#include "sflow/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sflow/filters.hpp"
#include "sflow/masks.hpp"
#include "sflow/rng.hpp"

namespace sflow::synthetic {

namespace {

// Tints a gray value into `channels` samples; color scenes get a fixed
// warm/cool cast so channels are not identical.
void put(ImageBuffer& img, int x, int y, double v) {
  if (img.channels() == 1) {
    img.at(x, y) = std::clamp(v, 0.0, 1.0);
    return;
  }
  img.at(x, y, 0) = std::clamp(0.9 * v + 0.08, 0.0, 1.0);
  img.at(x, y, 1) = std::clamp(v, 0.0, 1.0);
  img.at(x, y, 2) = std::clamp(0.8 * v + 0.05, 0.0, 1.0);
}

int floor_mod(int a, int m) { return ((a % m) + m) % m; }

}  // namespace

ImageBuffer step_edge(int width, int height, int edge_x, double left, double right, double noise,
                      std::uint64_t seed) {
  ImageBuffer img(width, height, 1);
  Rng rng(seed);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double base = x < edge_x ? left : right;
      img.at(x, y) = std::clamp(base + (noise > 0.0 ? rng.uniform(-noise, noise) : 0.0), 0.0, 1.0);
    }
  }
  return img;
}

ImageBuffer ramp(int width, int height, double offset, double slope_x, double slope_y) {
  ImageBuffer img(width, height, 1);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      img.at(x, y) = std::clamp(offset + slope_x * x + slope_y * y, 0.0, 1.0);
    }
  }
  return img;
}

ImageBuffer bricks(int width, int height, int brick_w, int brick_h, int mortar, int channels) {
  ImageBuffer img(width, height, channels);
  for (int y = 0; y < height; ++y) {
    const int course = y / brick_h;
    const int shift = (course % 2) * (brick_w / 2);
    for (int x = 0; x < width; ++x) {
      const int bx = x + shift;
      const int brick = bx / brick_w;
      const bool joint = floor_mod(y, brick_h) < mortar || floor_mod(bx, brick_w) < mortar;
      double v = 0.25;
      if (!joint) v = (brick + course) % 2 == 0 ? 0.78 : 0.55;
      put(img, x, y, v);
    }
  }
  return img;
}

ImageBuffer checkerboard(int width, int height, int cell, double lo, double hi, int channels) {
  ImageBuffer img(width, height, channels);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) put(img, x, y, ((x / cell) + (y / cell)) % 2 == 0 ? lo : hi);
  }
  return img;
}

ImageBuffer periodic_tiles(int width, int height, int period, int channels) {
  ImageBuffer img(width, height, channels);
  const double k = 2.0 * std::numbers::pi / period;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double v = 0.5 + 0.22 * std::sin(k * x) * std::cos(k * y) + 0.18 * std::sin(k * (x + 2 * y));
      put(img, x, y, v);
    }
  }
  return img;
}

ImageBuffer stripes(int width, int height, double period, double angle, int channels) {
  ImageBuffer img(width, height, channels);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double t = (c * x + s * y) / period;
      put(img, x, y, 0.5 + 0.35 * std::sin(2.0 * std::numbers::pi * t));
    }
  }
  return img;
}

ImageBuffer dot_grid(int width, int height, int pitch, double radius, int channels) {
  ImageBuffer img(width, height, channels);
  const double center = 0.5 * (pitch - 1);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = floor_mod(x, pitch) - center;
      const double dy = floor_mod(y, pitch) - center;
      put(img, x, y, dx * dx + dy * dy <= radius * radius ? 0.2 : 0.75);
    }
  }
  return img;
}

ImageBuffer smooth_noise(int width, int height, double blur_sigma, double lo, double hi,
                         int channels, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> plane(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (double& v : plane) v = rng.uniform();
  plane = gaussian_blur(plane, width, height, blur_sigma);
  const auto [mn, mx] = std::minmax_element(plane.begin(), plane.end());
  const double span = std::max(*mx - *mn, 1e-12);
  ImageBuffer img(width, height, channels);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double t = (plane[static_cast<std::size_t>(y) * width + x] - *mn) / span;
      put(img, x, y, lo + (hi - lo) * t);
    }
  }
  return img;
}

std::vector<CorpusItem> corpus(int count, std::uint64_t seed) {
  constexpr int kSide = 64;
  std::vector<CorpusItem> items;
  items.reserve(static_cast<std::size_t>(count));
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    const int channels = i % 3 == 2 ? 3 : 1;
    CorpusItem item;
    switch (i % 6) {
      case 0:
        item.name = "bricks";
        item.periodic = true;
        item.image = bricks(kSide, kSide, 16 + 4 * (i % 2), 8, 2, channels);
        break;
      case 1:
        item.name = "checker";
        item.periodic = true;
        item.image = checkerboard(kSide, kSide, 6 + (i % 4), 0.2, 0.8, channels);
        break;
      case 2:
        item.name = "tiles";
        item.periodic = true;
        item.image = periodic_tiles(kSide, kSide, 8 + 4 * (i % 3), channels);
        break;
      case 3:
        item.name = "stripes";
        item.periodic = true;
        item.image = stripes(kSide, kSide, 8.0 + (i % 5), 0.35 * (i % 4), channels);
        break;
      case 4:
        item.name = "dots";
        item.periodic = true;
        item.image = dot_grid(kSide, kSide, 8 + 2 * (i % 3), 2.5, channels);
        break;
      default: {
        // Step edge between two periodic textures.
        item.name = "edge";
        item.periodic = false;
        const ImageBuffer a = stripes(kSide, kSide, 6.0, 0.0, channels);
        const ImageBuffer b = checkerboard(kSide, kSide, 4, 0.1, 0.45, channels);
        item.image = ImageBuffer(kSide, kSide, channels);
        const int edge = 24 + (i % 16);
        for (int y = 0; y < kSide; ++y)
          for (int x = 0; x < kSide; ++x)
            for (int c = 0; c < channels; ++c)
              item.image.at(x, y, c) = x < edge ? a.at(x, y, c) : b.at(x, y, c);
        break;
      }
    }
    const double ratio = 0.03 + 0.55 * ((i * 7) % count) / static_cast<double>(count);
    item.mask = generate_irregular_mask(kSide, kSide, ratio, seed + static_cast<std::uint64_t>(i) * 977u + rng.uniform_int(0, 7));
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace sflow::synthetic
