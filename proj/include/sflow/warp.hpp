#pragma once

#include <span>
#include <vector>

#include "sflow/image.hpp"

namespace sflow {

// n x n Gaussian sampling window; n odd, sigma > 0 (pixels).
struct SamplingKernel {
  int n = 3;
  double sigma = 1.0;

  void validate() const;
  int radius() const noexcept { return n / 2; }
};

struct SampleGradients {
  FeatureMap grad_source;
  FlowField grad_flow;
};

// Normalized Gaussian weights of the n x n neighbourhood around a sample
// centre whose offset from the nearest grid point is (frac_dx, frac_dy).
// Row-major, index (j + r) * n + (i + r) for grid offsets i (x), j (y) in
// [-r, r]. The weights sum to 1.
std::vector<double> gaussian_weights(double frac_dx, double frac_dy, const SamplingKernel& k);

// Sample centre c = (x + dx, y + dy). The window is centred on the nearest
// grid point round(c) (halves round up); out-of-range taps read the
// clamped-to-edge pixel.
FeatureMap gaussian_sample(const FeatureMap& src, const FlowField& flow, const SamplingKernel& k);

// Gradients of sum(upstream * gaussian_sample(src, flow)) with respect to the
// source values and the flow. Flow derivatives differentiate the normalized
// weights (quotient rule); the window choice is piecewise constant.
SampleGradients gaussian_sample_backward(const FeatureMap& src, const FlowField& flow,
                                         const SamplingKernel& k, const FeatureMap& upstream);

// Four-tap bilinear interpolation at (x + dx, y + dy) with clamp-to-edge.
FeatureMap bilinear_sample(const FeatureMap& src, const FlowField& flow);

// At integer coordinates the derivative is taken from the cell to the right
// (below), i.e. floor() selects the cell.
SampleGradients bilinear_sample_backward(const FeatureMap& src, const FlowField& flow,
                                         const FeatureMap& upstream);

// Point samplers used by the loss and the optimizer: evaluate a single
// centre (cx, cy) into `out` (length src.depth()).
void gaussian_sample_at(const FeatureMap& src, double cx, double cy, const SamplingKernel& k,
                        std::span<double> out);
void bilinear_sample_at(const FeatureMap& src, double cx, double cy, std::span<double> out);

// Derivative of the sampled vector dotted with `upstream`, w.r.t. (cx, cy).
// When `grad_source` is non-null the source gradient is accumulated into it.
FlowVector gaussian_sample_at_backward(const FeatureMap& src, double cx, double cy,
                                       const SamplingKernel& k, std::span<const double> upstream,
                                       FeatureMap* grad_source);
FlowVector bilinear_sample_at_backward(const FeatureMap& src, double cx, double cy,
                                       std::span<const double> upstream, FeatureMap* grad_source);

enum class Sampler { gaussian, bilinear };

}  // namespace sflow
