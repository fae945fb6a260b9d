#pragma once

#include "sflow/image.hpp"

namespace sflow {

enum class FillMethod { harmonic, tv };

struct StructureFillParams {
  FillMethod method = FillMethod::tv;
  double tol = 1e-6;    // CG relative residual per linear solve
  int max_iters = 2000;  // CG iteration cap per linear solve
  double tv_eps = 1e-3;
  int tv_outer_iters = 200;
  double tv_change_tol = 1e-5;  // stop once no value moves more than this

  void validate() const;
};

struct StructureFillReport {
  int outer_iterations = 0;
  double residual = 0.0;  // worst relative residual of the final linear solves
};

// Fills masked pixels of `s_in`; valid pixels are returned bit-exact.
// harmonic solves the Laplace equation with the valid pixels as Dirichlet
// data; tv runs lagged-diffusivity (per-edge) total-variation inpainting
// starting from the harmonic fill. Channels are filled independently.
ImageBuffer complete_structure(const ImageBuffer& s_in, const Mask& m,
                               const StructureFillParams& p = {},
                               StructureFillReport* report = nullptr);

// Valid pixels from s_in, hole pixels from s_hat.
ImageBuffer composite_structure(const ImageBuffer& s_hat, const ImageBuffer& s_in, const Mask& m);

}  // namespace sflow
