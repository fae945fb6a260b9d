#pragma once

#include <span>
#include <vector>

#include "sflow/image.hpp"
#include "sflow/warp.hpp"

namespace sflow {

inline constexpr int kFeatureDepth = 10;

// Channel layout of extract_features.
enum FeatureChannel : int {
  feat_luma = 0,
  feat_gx,
  feat_gy,
  feat_d0,    // second difference along x
  feat_d45,   // along (1, -1), i.e. up and to the right
  feat_d90,   // along y
  feat_d135,  // along (1, 1)
  feat_mean,
  feat_std,
  feat_one,
};

struct LossWeights {
  double l1_s = 4.0;
  double adv_s = 1.0;
  double l1_t = 5.0;
  double corr_t = 0.25;
  double adv_t = 1.0;

  void validate() const;
};

// Hand-crafted descriptor on luminance: Y, central gradients, four oriented
// second differences, 3x3 mean and standard deviation, and a constant 1.
// `scale` is the number of 2x box downsamplings applied first. Borders use
// clamp-to-edge.
FeatureMap extract_features(const ImageBuffer& img, int scale = 0);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// max over valid q of cos(vgt(at), vin(q)).
double best_match_similarity(const FeatureMap& vgt, const FeatureMap& vin, Point at,
                             const Mask& valid);

// best_match_similarity for every hole coordinate; parallel over holes.
std::vector<double> best_match_table(const FeatureMap& vgt, const FeatureMap& vin,
                                     const HoleCoords& holes, const Mask& valid);

struct CorrectnessLoss {
  double value = 0.0;
  FlowField grad_flow;  // zero outside the hole set
};

// L = (1/N) sum_p exp(-mu(vgt_p, sample(vin, p + flow_p)) / mu_max_p). mu_max is
// held constant and clamped below at 1e-6. `mu_max` may carry a precomputed
// best_match_table; when empty it is computed here.
CorrectnessLoss sampling_correctness_loss(const FeatureMap& vgt, const FeatureMap& vin,
                                          const FlowField& flow, const HoleCoords& holes,
                                          const SamplingKernel& k, const Mask& valid,
                                          std::span<const double> mu_max = {},
                                          Sampler sampler = Sampler::gaussian);

double l1_loss(const ImageBuffer& a, const ImageBuffer& b);

// mean(log real) + mean(log(1 - fake)); scores strictly inside (0, 1).
double adversarial_loss(std::span<const double> real_scores, std::span<const double> fake_scores);

double structure_objective(const ImageBuffer& pred, const ImageBuffer& target,
                           std::span<const double> real_scores,
                           std::span<const double> fake_scores, const LossWeights& w);
double texture_objective(const ImageBuffer& pred, const ImageBuffer& target,
                         double correctness, std::span<const double> real_scores,
                         std::span<const double> fake_scores, const LossWeights& w);

// 10 log10(1 / MSE); +infinity when the images are identical.
double psnr(const ImageBuffer& a, const ImageBuffer& b);
// PSNR restricted to the hole pixels of `m`.
double psnr_masked(const ImageBuffer& a, const ImageBuffer& b, const Mask& m);
// Mean SSIM over all 8x8 windows (stride 1) and channels.
double ssim(const ImageBuffer& a, const ImageBuffer& b);
// Same windows, averaged only over those containing at least one hole pixel.
double ssim_masked(const ImageBuffer& a, const ImageBuffer& b, const Mask& m);

}  // namespace sflow
