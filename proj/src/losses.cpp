#include "sflow/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sflow/parallel.hpp"
#include "sflow/pyramid.hpp"

namespace sflow {

void LossWeights::validate() const {
  for (double v : {l1_s, adv_s, l1_t, corr_t, adv_t}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::invalid_argument, "loss weights must be positive");
    }
  }
}

namespace {

constexpr double kMuMaxFloor = 1e-6;

double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::dimension_mismatch, "images differ in shape");
}

}  // namespace

FeatureMap extract_features(const ImageBuffer& img, int scale) {
  if (scale < 0) throw Error(ErrorCode::invalid_argument, "feature scale must be >= 0");
  ImageBuffer level = img;
  for (int s = 0; s < scale; ++s) level = downsample_box(level, 2.0);
  const ImageBuffer y = to_gray(level);
  const int w = y.width();
  const int h = y.height();
  auto lum = [&](int px, int py) {
    return y.at(std::clamp(px, 0, w - 1), std::clamp(py, 0, h - 1));
  };

  FeatureMap f(w, h, kFeatureDepth);
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const double c = lum(px, py);
      auto v = f.at(px, py);
      v[feat_luma] = c;
      v[feat_gx] = 0.5 * (lum(px + 1, py) - lum(px - 1, py));
      v[feat_gy] = 0.5 * (lum(px, py + 1) - lum(px, py - 1));
      v[feat_d0] = lum(px + 1, py) - 2.0 * c + lum(px - 1, py);
      v[feat_d45] = lum(px + 1, py - 1) - 2.0 * c + lum(px - 1, py + 1);
      v[feat_d90] = lum(px, py + 1) - 2.0 * c + lum(px, py - 1);
      v[feat_d135] = lum(px + 1, py + 1) - 2.0 * c + lum(px - 1, py - 1);
      double s = 0.0, s2 = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const double t = lum(px + dx, py + dy);
          s += t;
          s2 += t * t;
        }
      const double mean = s / 9.0;
      v[feat_mean] = mean;
      v[feat_std] = std::sqrt(std::max(0.0, s2 / 9.0 - mean * mean));
      v[feat_one] = 1.0;
    }
  }
  return f;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::dimension_mismatch, "vector lengths differ");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::zero_vector, "cosine of a zero vector");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * b[i];
  return std::clamp(d / (na * nb), -1.0, 1.0);
}

double best_match_similarity(const FeatureMap& vgt, const FeatureMap& vin, Point at,
                             const Mask& valid) {
  HoleCoords one;
  one.coords.push_back(at);
  return best_match_table(vgt, vin, one, valid).front();
}

std::vector<double> best_match_table(const FeatureMap& vgt, const FeatureMap& vin,
                                     const HoleCoords& holes, const Mask& valid) {
  if (!vgt.same_shape(vin) || valid.width() != vin.width() || valid.height() != vin.height()) {
    throw Error(ErrorCode::dimension_mismatch, "feature maps and mask differ in shape");
  }
  // Unit-normalized valid source vectors, so each candidate is one dot product.
  const std::size_t depth = static_cast<std::size_t>(vin.depth());
  std::vector<double> unit;
  for (int y = 0; y < vin.height(); ++y)
    for (int x = 0; x < vin.width(); ++x) {
      if (!valid.valid(x, y)) continue;
      const auto v = vin.at(x, y);
      const double n = norm(v);
      if (n == 0.0) throw Error(ErrorCode::zero_vector, "zero source feature vector");
      for (double e : v) unit.push_back(e / n);
    }
  if (unit.empty()) throw Error(ErrorCode::empty_valid_set, "no valid source positions");
  const std::size_t count = unit.size() / depth;

  std::vector<double> out(holes.count());
  parallel_for(holes.count(), [&](std::size_t h) {
    const Point p = holes.coords[h];
    if (p.x < 0 || p.y < 0 || p.x >= vgt.width() || p.y >= vgt.height()) {
      throw Error(ErrorCode::invalid_argument, "coordinate out of bounds");
    }
    const auto g = vgt.at(p.x, p.y);
    const double ng = norm(g);
    if (ng == 0.0) throw Error(ErrorCode::zero_vector, "zero target feature vector");
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < count; ++q) {
      const double* u = unit.data() + q * depth;
      double d = 0.0;
      for (std::size_t i = 0; i < depth; ++i) d += g[i] * u[i];
      best = std::max(best, d);
    }
    out[h] = std::clamp(best / ng, -1.0, 1.0);
  }, 16);
  return out;
}

CorrectnessLoss sampling_correctness_loss(const FeatureMap& vgt, const FeatureMap& vin,
                                          const FlowField& flow, const HoleCoords& holes,
                                          const SamplingKernel& k, const Mask& valid,
                                          std::span<const double> mu_max, Sampler sampler) {
  if (!vgt.same_shape(vin) || flow.width() != vin.width() || flow.height() != vin.height()) {
    throw Error(ErrorCode::dimension_mismatch, "features and flow differ in shape");
  }
  if (holes.count() == 0) throw Error(ErrorCode::invalid_argument, "empty hole set");
  k.validate();
  std::vector<double> table;
  if (mu_max.empty()) {
    table = best_match_table(vgt, vin, holes, valid);
    mu_max = table;
  } else if (mu_max.size() != holes.count()) {
    throw Error(ErrorCode::dimension_mismatch, "mu_max table size differs from the hole count");
  }

  const std::size_t depth = static_cast<std::size_t>(vin.depth());
  const double inv_n = 1.0 / static_cast<double>(holes.count());
  CorrectnessLoss out{0.0, FlowField(flow.width(), flow.height())};
  std::vector<double> terms(holes.count());
  parallel_for(holes.count(), [&](std::size_t h) {
    const Point p = holes.coords[h];
    const FlowVector f = flow.at(p.x, p.y);
    const double cx = p.x + f.dx;
    const double cy = p.y + f.dy;
    std::vector<double> s(depth), up(depth);
    if (sampler == Sampler::gaussian) {
      gaussian_sample_at(vin, cx, cy, k, s);
    } else {
      bilinear_sample_at(vin, cx, cy, s);
    }
    const auto g = vgt.at(p.x, p.y);
    const double ng = norm(g);
    const double ns = norm(s);
    if (ng == 0.0 || ns == 0.0) throw Error(ErrorCode::zero_vector, "zero feature vector in loss");
    double dot = 0.0;
    for (std::size_t i = 0; i < depth; ++i) dot += g[i] * s[i];
    const double mu = dot / (ng * ns);
    const double mmax = std::max(mu_max[h], kMuMaxFloor);
    const double term = std::exp(-mu / mmax);
    terms[h] = term;
    // d term / d s = -(term / mmax) * (g / (|g||s|) - mu s / |s|^2), scaled by 1/N.
    const double coef = -term / mmax * inv_n;
    for (std::size_t i = 0; i < depth; ++i) up[i] = coef * (g[i] / (ng * ns) - mu * s[i] / (ns * ns));
    out.grad_flow.at(p.x, p.y) = sampler == Sampler::gaussian
                                     ? gaussian_sample_at_backward(vin, cx, cy, k, up, nullptr)
                                     : bilinear_sample_at_backward(vin, cx, cy, up, nullptr);
  });
  for (double t : terms) out.value += t;
  out.value *= inv_n;
  return out;
}

double l1_loss(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b);
  if (a.data().empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += std::abs(a.data()[i] - b.data()[i]);
  return s / static_cast<double>(a.data().size());
}

double adversarial_loss(std::span<const double> real_scores, std::span<const double> fake_scores) {
  if (real_scores.empty() || fake_scores.empty()) {
    throw Error(ErrorCode::invalid_argument, "score fields must be non-empty");
  }
  auto mean_log = [](std::span<const double> scores, bool complement) {
    double s = 0.0;
    for (double v : scores) {
      if (!(v > 0.0 && v < 1.0)) {
        throw Error(ErrorCode::score_out_of_range, "scores must lie strictly inside (0, 1)");
      }
      s += complement ? std::log1p(-v) : std::log(v);
    }
    return s / static_cast<double>(scores.size());
  };
  return mean_log(real_scores, false) + mean_log(fake_scores, true);
}

double structure_objective(const ImageBuffer& pred, const ImageBuffer& target,
                           std::span<const double> real_scores,
                           std::span<const double> fake_scores, const LossWeights& w) {
  w.validate();
  return w.l1_s * l1_loss(pred, target) + w.adv_s * adversarial_loss(real_scores, fake_scores);
}

double texture_objective(const ImageBuffer& pred, const ImageBuffer& target, double correctness,
                         std::span<const double> real_scores,
                         std::span<const double> fake_scores, const LossWeights& w) {
  w.validate();
  return w.l1_t * l1_loss(pred, target) + w.corr_t * correctness +
         w.adv_t * adversarial_loss(real_scores, fake_scores);
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b);
  double se = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    se += d * d;
  }
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(static_cast<double>(a.data().size()) / se);
}

double psnr_masked(const ImageBuffer& a, const ImageBuffer& b, const Mask& m) {
  require_same_shape(a, b);
  require_same_size(a, m);
  double se = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      if (!m.hole(x, y)) continue;
      for (int c = 0; c < a.channels(); ++c) {
        const double d = a.at(x, y, c) - b.at(x, y, c);
        se += d * d;
        ++n;
      }
    }
  if (n == 0) throw Error(ErrorCode::invalid_argument, "mask has no hole pixels");
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(static_cast<double>(n) / se);
}

namespace {

double ssim_windows(const ImageBuffer& a, const ImageBuffer& b, const Mask* m) {
  require_same_shape(a, b);
  if (m != nullptr) require_same_size(a, *m);
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const int ww = std::min(8, a.width());
  const int wh = std::min(8, a.height());
  const double n = static_cast<double>(ww * wh);
  double total = 0.0;
  std::size_t windows = 0;
  for (int c = 0; c < a.channels(); ++c) {
    for (int y0 = 0; y0 + wh <= a.height(); ++y0) {
      for (int x0 = 0; x0 + ww <= a.width(); ++x0) {
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        bool touches_hole = false;
        for (int y = y0; y < y0 + wh; ++y)
          for (int x = x0; x < x0 + ww; ++x) {
            const double va = a.at(x, y, c);
            const double vb = b.at(x, y, c);
            sa += va;
            sb += vb;
            saa += va * va;
            sbb += vb * vb;
            sab += va * vb;
            if (m != nullptr && m->hole(x, y)) touches_hole = true;
          }
        if (m != nullptr && !touches_hole) continue;
        const double ma = sa / n, mb = sb / n;
        const double va = saa / n - ma * ma;
        const double vb = sbb / n - mb * mb;
        const double cov = sab / n - ma * mb;
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++windows;
      }
    }
  }
  return windows == 0 ? 1.0 : total / static_cast<double>(windows);
}

}  // namespace

double ssim(const ImageBuffer& a, const ImageBuffer& b) { return ssim_windows(a, b, nullptr); }

double ssim_masked(const ImageBuffer& a, const ImageBuffer& b, const Mask& m) {
  return ssim_windows(a, b, &m);
}

}  // namespace sflow
