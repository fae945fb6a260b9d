#pragma once

#include "sflow/image.hpp"

namespace sflow {

// Relative-total-variation smoothing parameters. `sigma` is the window scale
// that bounds the size of texture elements removed; sigma == 0 disables
// smoothing entirely.
struct RtvParams {
  double sigma = 3.0;
  double lambda = 0.01;
  int iterations = 4;
  double eps = 1e-3;
  double cg_tol = 1e-6;
  int cg_max_iters = 1000;

  void validate() const;
};

// Windowed total variation (D) and windowed inherent variation (L) of a
// single-channel image, each as a depth-1 map. D is the Gaussian-windowed
// sum of |forward difference|, L the windowed sum of the signed difference,
// so |L| <= D pointwise.
struct WindowedVariations {
  FeatureMap dx, dy, lx, ly;
};

WindowedVariations windowed_variations(const ImageBuffer& gray, double sigma);

// Solves (Id + lambda * Lap_w) s = rhs per channel with CG. weights_x(x, y)
// couples (x, y) with (x + 1, y); weights_y(x, y) couples (x, y) with
// (x, y + 1). Entries on the last column/row are ignored.
ImageBuffer solve_screened_poisson(const FeatureMap& weights_x, const FeatureMap& weights_y,
                                   const ImageBuffer& rhs, double lambda, double tol,
                                   int max_iters = 1000);

ImageBuffer rtv_smooth(const ImageBuffer& img, const RtvParams& p);

double total_variation(const ImageBuffer& img);

}  // namespace sflow
