#include "sflow/pipeline.hpp"

#include <algorithm>

#include "sflow/pyramid.hpp"

namespace sflow {

void InpaintConfig::validate() const {
  rtv.validate();
  fill.validate();
  flowopt.validate();
  weights.validate();
}

namespace {

// Texture estimate and structure guide stacked into one matching space.
FeatureMap stack_guide(const ImageBuffer& texture, const ImageBuffer& guide, double weight) {
  const int tc = texture.channels();
  const int gc = guide.channels();
  FeatureMap f(texture.width(), texture.height(), tc + gc);
  for (int y = 0; y < texture.height(); ++y)
    for (int x = 0; x < texture.width(); ++x) {
      auto v = f.at(x, y);
      for (int c = 0; c < tc; ++c) v[static_cast<std::size_t>(c)] = texture.at(x, y, c);
      for (int c = 0; c < gc; ++c) v[static_cast<std::size_t>(tc + c)] = weight * guide.at(x, y, c);
    }
  return f;
}

struct Level {
  ImageBuffer image;
  ImageBuffer guide;
  Mask mask;
};

// Finest level last. Levels whose pooled mask leaves too few sources to match
// a patch are dropped from the coarse end.
std::vector<Level> build_levels(const ImageBuffer& i_in, const ImageBuffer& guide, const Mask& m,
                                const FlowOptConfig& cfg) {
  std::vector<Level> levels;
  const bool pyramid_ok = i_in.width() >= kMinPyramidSide && i_in.height() >= kMinPyramidSide;
  const int count = pyramid_ok ? max_pyramid_levels(i_in.width(), i_in.height(), cfg.pyramid_levels) : 1;
  if (count == 1) {
    levels.push_back({i_in, guide, m});
    return levels;
  }
  const Pyramid img_pyr = build_pyramid(i_in, m, count);
  const Pyramid guide_pyr = build_pyramid(guide, m, count);
  const std::size_t min_sources = static_cast<std::size_t>(cfg.patch * cfg.patch);
  for (std::size_t l = 0; l < img_pyr.levels.size(); ++l) {
    const Mask& lm = img_pyr.levels[l].mask;
    const bool last = l + 1 == img_pyr.levels.size();
    if (!last && lm.pixel_count() - lm.hole_count() < min_sources) continue;
    levels.push_back({img_pyr.levels[l].image, guide_pyr.levels[l].image, lm});
  }
  return levels;
}

}  // namespace

ImageBuffer extract_structure(const ImageBuffer& img, const Mask& m, const RtvParams& p) {
  require_same_size(img, m);
  const ImageBuffer masked = apply_mask(img, m);
  if (m.hole_count() == m.pixel_count()) return masked;
  StructureFillParams prefill;
  prefill.method = FillMethod::harmonic;
  const ImageBuffer filled = complete_structure(masked, m, prefill);
  return apply_mask(rtv_smooth(filled, p), m);
}

ImageBuffer reconstruct_structure(const ImageBuffer& s_in, const Mask& m,
                                  const StructureFillParams& p) {
  return composite_structure(complete_structure(s_in, m, p), s_in, m);
}

InpaintResult generate_texture(const ImageBuffer& i_in_raw, const ImageBuffer& guide,
                               const Mask& m, const InpaintConfig& cfg) {
  cfg.validate();
  require_same_size(i_in_raw, m);
  if (!guide.same_shape(i_in_raw)) {
    throw Error(ErrorCode::dimension_mismatch, "structure guide and image differ in shape");
  }
  const ImageBuffer i_in = apply_mask(i_in_raw, m);
  InpaintResult out;
  out.flow = FlowField(m.width(), m.height());
  if (!m.any_hole()) {
    out.i_hat = i_in;
    return out;
  }
  if (m.hole_count() == m.pixel_count()) {
    throw Error(ErrorCode::no_valid_source, "mask leaves no valid pixels");
  }

  const FlowOptConfig& fc = cfg.flowopt;
  Rng rng(cfg.seed);
  const std::vector<Level> levels = build_levels(i_in, guide, m, fc);
  FlowField flow;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const Level& lv = levels[l];
    ImageBuffer estimate;
    const FlowField* start = nullptr;
    if (l == 0) {
      estimate = composite(lv.guide, lv.image, lv.mask);
    } else {
      flow = upscale_flow(flow, lv.mask.width(), lv.mask.height());
      project_flow(flow, lv.mask);
      estimate = vote_fill(lv.image, flow, lv.mask, fc.patch);
      start = &flow;
    }
    const FeatureMap vgt = extract_features(lv.guide);
    const FeatureMap vin = extract_features(composite(lv.guide, lv.image, lv.mask));
    for (int it = 0; it < fc.em_iters; ++it) {
      if (start != nullptr && fc.steps_per_level > 0) {
        flow = optimize_flow_features(vgt, vin, lv.mask, flow, fc, fc.steps_per_level).flow;
      }
      const FeatureMap stacked = stack_guide(estimate, lv.guide, fc.structure_weight);
      flow = nnf_search(stacked, lv.mask, fc.patch, fc.nnf_iters, rng, start);
      start = &flow;
      estimate = vote_fill(lv.image, flow, lv.mask, fc.patch);
    }
  }
  out.flow = flow;
  out.i_hat = render_fill(i_in, flow, m, fc.render_kernel);
  return out;
}

InpaintResult inpaint(const ImageBuffer& img, const Mask& m, const InpaintConfig& cfg,
                      PipelineVariant variant) {
  cfg.validate();
  require_same_size(img, m);
  const ImageBuffer i_in = apply_mask(img, m);
  InpaintResult out;
  out.s_in = extract_structure(i_in, m, cfg.rtv);
  out.s_hat = m.any_hole() ? reconstruct_structure(out.s_in, m, cfg.fill) : out.s_in;
  if (!m.any_hole()) {
    out.flow = FlowField(m.width(), m.height());
    out.i_hat = i_in;
    return out;
  }
  switch (variant) {
    case PipelineVariant::no_flow:
      out.flow = FlowField(m.width(), m.height());
      out.i_hat = reconstruct_structure(i_in, m, cfg.fill);
      return out;
    case PipelineVariant::no_structure: {
      InpaintResult tex = generate_texture(i_in, i_in, m, cfg);
      out.flow = std::move(tex.flow);
      out.i_hat = std::move(tex.i_hat);
      return out;
    }
    case PipelineVariant::full:
      break;
  }
  InpaintResult tex = generate_texture(i_in, out.s_hat, m, cfg);
  out.flow = std::move(tex.flow);
  out.i_hat = std::move(tex.i_hat);
  return out;
}

}  // namespace sflow
