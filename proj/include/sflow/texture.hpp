#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "sflow/image.hpp"
#include "sflow/rng.hpp"
#include "sflow/warp.hpp"

namespace sflow {

struct FlowOptConfig {
  int pyramid_levels = 3;
  int steps_per_level = 200;
  double step_size = 0.5;  // largest per-pixel move of one descent step, in pixels
  double smoothness_weight = 0.1;
  // Weight of the H1 preconditioner applied to the descent direction: the
  // gradient g is replaced by (I + sobolev * L)^-1 g, L being the graph
  // Laplacian of the hole pixels. 0 gives plain gradient steps.
  double sobolev = 10.0;
  SamplingKernel kernel{3, 1.0};
  int patch = 7;
  int nnf_iters = 5;
  // NNF + voting rounds per pyramid level in the full pipeline.
  int em_iters = 3;
  // Weight of the structure channels against the texture channels in the
  // pipeline's patch distance.
  double structure_weight = 1.0;
  // Kernel used to render the final fill; n = 1 copies source pixels.
  SamplingKernel render_kernel{1, 1.0};

  void validate() const;
};

// Sum of squared differences between the patch x patch neighbourhoods of p and
// q in `guide` (clamp-to-edge). Stops early once the sum exceeds `bound`.
double patch_ssd(const FeatureMap& guide, Point p, Point q, int patch,
                 double bound = std::numeric_limits<double>::infinity());

// Randomized nearest-neighbour field over the hole pixels of `m`: propagation
// in alternating scan order plus random search, sources restricted to valid
// pixels, equal distances resolved towards the lowest (y, x) source. `start`
// seeds the search (targets are projected onto valid pixels first); without it
// the field starts from uniformly drawn valid sources.
FlowField nnf_search(const FeatureMap& guide, const Mask& m, int patch, int iters, Rng& rng,
                     const FlowField* start = nullptr);

// Structure-only NNF on a complete structure image.
FlowField init_flow_nnf(const ImageBuffer& s_hat, const Mask& m, const FlowOptConfig& cfg,
                        std::uint64_t seed = 0);

struct FlowOptResult {
  FlowField flow;
  std::vector<double> trace;  // objective before the first step and after each accepted step
};

// Minimizes L_c(vgt, vin, flow) + smoothness * E_s(flow) over the hole pixels,
// where E_s = (1/N) sum over 4-adjacent hole pairs of |f_p - f_q|^2. Each step
// moves along the negative gradient scaled so the largest per-pixel move is
// step_size, halving the step until the objective decreases; targets are
// projected onto the nearest valid pixel after every step. Stops early when
// no decrease is found.
FlowOptResult optimize_flow_features(const FeatureMap& vgt, const FeatureMap& vin, const Mask& m,
                                     const FlowField& flow0, const FlowOptConfig& cfg, int steps,
                                     Sampler sampler = Sampler::gaussian);

// V^gt = features of s_hat, V^in = features of i_in with the hole taken from
// s_hat (sources are restricted to valid pixels).
FlowOptResult optimize_flow(const ImageBuffer& i_in, const ImageBuffer& s_hat, const Mask& m,
                            const FlowField& flow0, const FlowOptConfig& cfg);

// Moves every hole target onto a valid in-bounds pixel: targets whose nearest
// grid pixel is a hole (or outside the image) jump to the nearest valid pixel.
// Valid-pixel flow is reset to zero.
void project_flow(FlowField& flow, const Mask& m);

// Valid pixels copied from i_in; hole pixels gaussian-sampled from i_in.
ImageBuffer render_fill(const ImageBuffer& i_in, const FlowField& flow, const Mask& m,
                        const SamplingKernel& k);

// Patch voting: each hole pixel averages the source pixels proposed by all
// hole patches covering it.
ImageBuffer vote_fill(const ImageBuffer& i_in, const FlowField& flow, const Mask& m, int patch);

}  // namespace sflow
