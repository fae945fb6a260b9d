#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "sflow/pipeline.hpp"

namespace sflow {

// Per-image hole PSNR is capped before averaging because an exact fill gives
// +infinity.
inline constexpr double kPsnrCap = 100.0;

struct BenchOptions {
  int corpus_size = 24;
  std::uint64_t corpus_seed = 2024;
  int trials = 50;
  std::uint64_t trial_seed = 1;
  InpaintConfig config;
  // Gaussian kernel of the sampler comparison and the kernels swept alongside it.
  SamplingKernel sampler_kernel{7, 1.5};
  std::vector<SamplingKernel> sampler_sweep{{3, 1.0}, {5, 1.5}, {7, 1.5}, {9, 2.0}};
};

nlohmann::json bench_sigma_sweep(const BenchOptions& opt, const std::vector<double>& sigmas = {0, 1, 3, 6, 9});

struct AblationSummary {
  int images = 0;
  int periodic_images = 0;
  double max_ratio = 0.0;
  double full = 0.0, no_structure = 0.0, no_flow = 0.0;
  double periodic_full = 0.0, periodic_no_flow = 0.0;
};

// Mean hole PSNR of the three pipeline variants over the corpus, plus the
// expected ordering checks; "pass" is true only if every invariant holds.
nlohmann::json bench_ablation(const BenchOptions& opt, AblationSummary* summary = nullptr);

struct SamplerTrial {
  double displacement = 0.0;  // initial distance from the exact flow, px
  double gaussian = 0.0;      // final correctness loss of each run, bilinear evaluator
  double bilinear = 0.0;
};

// Flow refinement from one shared start per trial with Gaussian and with
// bilinear sampling. Each trial copies a valid patch of a fine random texture
// (correlation length about 1 px) into the hole, so a constant flow reproduces
// it exactly, and starts 2.5-4 px away from that flow. Both results are scored
// with the bilinear-sampled loss.
std::vector<SamplerTrial> sampler_trials(int trials, std::uint64_t seed, const FlowOptConfig& cfg);
nlohmann::json bench_sampler(const BenchOptions& opt);

nlohmann::json run_bench(const std::string& suite, const BenchOptions& opt);

}  // namespace sflow
