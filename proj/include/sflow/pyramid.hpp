#pragma once

#include <vector>

#include "sflow/image.hpp"

namespace sflow {

struct PyramidLevel {
  ImageBuffer image;
  Mask mask;
  double scale = 1.0;  // level size relative to the finest level
};

struct Pyramid {
  std::vector<PyramidLevel> levels;  // coarsest first
  double factor = 2.0;
};

inline constexpr int kMinPyramidSide = 16;

// Box-filtered image levels and OR-pooled masks. Throws TooSmall when the
// coarsest level would fall below 16x16.
Pyramid build_pyramid(const ImageBuffer& img, const Mask& mask, int levels, double factor = 2.0);

// Largest level count (<= requested) that keeps the coarsest level >= 16x16.
int max_pyramid_levels(int width, int height, int requested, double factor = 2.0);

ImageBuffer downsample_box(const ImageBuffer& img, double factor);
// A coarse pixel is a hole iff any fine pixel it covers is a hole.
Mask downsample_mask(const Mask& m, double factor);
ImageBuffer upsample_bilinear(const ImageBuffer& img, int width, int height);

// Each fine pixel inherits the flow of the coarse pixel covering it, with the
// vector scaled by the per-axis size ratio.
FlowField upscale_flow(const FlowField& coarse, int width, int height);

}  // namespace sflow
