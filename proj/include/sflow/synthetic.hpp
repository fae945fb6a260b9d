#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sflow/image.hpp"

namespace sflow::synthetic {

// Vertical step at column `edge_x`: `left` for x < edge_x, `right` otherwise,
// plus uniform noise in [-noise, noise] (clamped to [0, 1]).
ImageBuffer step_edge(int width, int height, int edge_x, double left, double right, double noise,
                      std::uint64_t seed);

// f(x, y) = offset + slope_x * x + slope_y * y.
ImageBuffer ramp(int width, int height, double offset, double slope_x, double slope_y);

// Brick wall: courses of `brick_h` rows, bricks `brick_w` wide, alternate
// courses offset by half a brick; bricks alternate between two shades and
// are separated by `mortar`-pixel joints.
ImageBuffer bricks(int width, int height, int brick_w, int brick_h, int mortar, int channels);

// Checkerboard of `cell` x `cell` squares with intensities lo/hi.
ImageBuffer checkerboard(int width, int height, int cell, double lo, double hi, int channels);

// Smooth periodic tile pattern with the given period in both axes; every
// pixel's neighbourhood pattern repeats exactly with that period.
ImageBuffer periodic_tiles(int width, int height, int period, int channels);

// Sinusoidal stripes along direction `angle` (radians) with `period` pixels.
ImageBuffer stripes(int width, int height, double period, double angle, int channels);

// Dot lattice: discs of radius `radius` on a square grid of pitch `pitch`.
ImageBuffer dot_grid(int width, int height, int pitch, double radius, int channels);

// Low-pass filtered uniform noise, rescaled to [lo, hi].
ImageBuffer smooth_noise(int width, int height, double blur_sigma, double lo, double hi,
                         int channels, std::uint64_t seed);

struct CorpusItem {
  std::string name;
  bool periodic = false;
  ImageBuffer image;
  Mask mask;
};

// Deterministic evaluation corpus of `count` textured 64x64 scenes paired
// with irregular masks spanning the 0-60% hole-ratio range.
std::vector<CorpusItem> corpus(int count = 24, std::uint64_t seed = 2024);

}  // namespace sflow::synthetic
