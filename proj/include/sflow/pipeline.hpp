#pragma once

#include <cstdint>

#include "sflow/image.hpp"
#include "sflow/losses.hpp"
#include "sflow/rtv.hpp"
#include "sflow/structure.hpp"
#include "sflow/texture.hpp"

namespace sflow {

struct InpaintConfig {
  RtvParams rtv;
  StructureFillParams fill;
  FlowOptConfig flowopt;
  LossWeights weights;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class PipelineVariant {
  full,
  // Texture generation guided by the masked input instead of the completed
  // structure image.
  no_structure,
  // Diffusion only: the structure fill applied to the raw masked image.
  no_flow,
};

struct InpaintResult {
  ImageBuffer s_in;   // structure of the valid region, hole zeroed
  ImageBuffer s_hat;  // completed structure
  FlowField flow;
  ImageBuffer i_hat;
};

// Structure of the known region: the hole is pre-filled harmonically so RTV
// sees no artificial edges, then smoothed and masked again.
ImageBuffer extract_structure(const ImageBuffer& img, const Mask& m, const RtvParams& p);

// S_in followed by completion and compositing.
ImageBuffer reconstruct_structure(const ImageBuffer& s_in, const Mask& m,
                                  const StructureFillParams& p);

// Coarse-to-fine flow estimation guided by `guide` (the completed structure in
// the full pipeline), then rendering. `i_in` hole pixels are never read.
InpaintResult generate_texture(const ImageBuffer& i_in, const ImageBuffer& guide, const Mask& m,
                               const InpaintConfig& cfg);

// Full pipeline. Hole pixels of `img` are discarded before any stage runs, so
// the ground truth may be passed in directly.
InpaintResult inpaint(const ImageBuffer& img, const Mask& m, const InpaintConfig& cfg,
                      PipelineVariant variant = PipelineVariant::full);

}  // namespace sflow
