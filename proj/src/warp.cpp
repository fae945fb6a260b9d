#include "sflow/warp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sflow {

void SamplingKernel::validate() const {
  if (n < 1 || n % 2 == 0 || !(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::invalid_argument, "sampling kernel needs odd n >= 1 and sigma > 0");
  }
}

namespace {

// Normalized 1-D weights for offsets -r..r and their derivative with respect
// to the sample position.
struct Taps1d {
  std::vector<double> w;
  std::vector<double> dw;
};

Taps1d taps_1d(double frac, const SamplingKernel& k) {
  const int r = k.radius();
  const double inv_var = 1.0 / (k.sigma * k.sigma);
  Taps1d t{std::vector<double>(static_cast<std::size_t>(k.n)),
           std::vector<double>(static_cast<std::size_t>(k.n))};
  std::vector<double> expo(static_cast<std::size_t>(k.n));
  double top = -std::numeric_limits<double>::infinity();
  for (int i = -r; i <= r; ++i) {
    const double d = i - frac;
    expo[static_cast<std::size_t>(i + r)] = -0.5 * d * d * inv_var;
    top = std::max(top, expo[static_cast<std::size_t>(i + r)]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < expo.size(); ++i) {
    t.w[i] = std::exp(expo[i] - top);
    sum += t.w[i];
  }
  double centroid = 0.0;
  for (int i = -r; i <= r; ++i) {
    t.w[static_cast<std::size_t>(i + r)] /= sum;
    centroid += t.w[static_cast<std::size_t>(i + r)] * i;
  }
  for (int i = -r; i <= r; ++i) {
    const std::size_t s = static_cast<std::size_t>(i + r);
    t.dw[s] = t.w[s] * (i - centroid) * inv_var;
  }
  return t;
}

int clamp_index(int v, int size) { return std::clamp(v, 0, size - 1); }

int nearest(double c) { return static_cast<int>(std::floor(c + 0.5)); }

void check_shapes(const FeatureMap& src, const FlowField& flow) {
  if (src.width() != flow.width() || src.height() != flow.height()) {
    throw Error(ErrorCode::dimension_mismatch, "source and flow sizes differ");
  }
}

void check_upstream(const FeatureMap& src, const FeatureMap& upstream) {
  if (!upstream.same_shape(src)) {
    throw Error(ErrorCode::dimension_mismatch, "upstream gradient shape differs from the source");
  }
}

}  // namespace

std::vector<double> gaussian_weights(double frac_dx, double frac_dy, const SamplingKernel& k) {
  k.validate();
  const Taps1d tx = taps_1d(frac_dx, k);
  const Taps1d ty = taps_1d(frac_dy, k);
  std::vector<double> w(static_cast<std::size_t>(k.n) * static_cast<std::size_t>(k.n));
  for (int j = 0; j < k.n; ++j)
    for (int i = 0; i < k.n; ++i)
      w[static_cast<std::size_t>(j * k.n + i)] =
          ty.w[static_cast<std::size_t>(j)] * tx.w[static_cast<std::size_t>(i)];
  return w;
}

void gaussian_sample_at(const FeatureMap& src, double cx, double cy, const SamplingKernel& k,
                        std::span<double> out) {
  const int bx = nearest(cx);
  const int by = nearest(cy);
  const Taps1d tx = taps_1d(cx - bx, k);
  const Taps1d ty = taps_1d(cy - by, k);
  const int r = k.radius();
  std::fill(out.begin(), out.end(), 0.0);
  for (int j = -r; j <= r; ++j) {
    const int sy = clamp_index(by + j, src.height());
    const double wy = ty.w[static_cast<std::size_t>(j + r)];
    for (int i = -r; i <= r; ++i) {
      const int sx = clamp_index(bx + i, src.width());
      const double w = wy * tx.w[static_cast<std::size_t>(i + r)];
      const auto v = src.at(sx, sy);
      for (std::size_t d = 0; d < out.size(); ++d) out[d] += w * v[d];
    }
  }
}

FlowVector gaussian_sample_at_backward(const FeatureMap& src, double cx, double cy,
                                       const SamplingKernel& k, std::span<const double> upstream,
                                       FeatureMap* grad_source) {
  const int bx = nearest(cx);
  const int by = nearest(cy);
  const Taps1d tx = taps_1d(cx - bx, k);
  const Taps1d ty = taps_1d(cy - by, k);
  const int r = k.radius();
  FlowVector g;
  for (int j = -r; j <= r; ++j) {
    const int sy = clamp_index(by + j, src.height());
    const std::size_t sj = static_cast<std::size_t>(j + r);
    for (int i = -r; i <= r; ++i) {
      const int sx = clamp_index(bx + i, src.width());
      const std::size_t si = static_cast<std::size_t>(i + r);
      const auto v = src.at(sx, sy);
      double dot = 0.0;
      for (std::size_t d = 0; d < upstream.size(); ++d) dot += upstream[d] * v[d];
      g.dx += tx.dw[si] * ty.w[sj] * dot;
      g.dy += tx.w[si] * ty.dw[sj] * dot;
      if (grad_source != nullptr) {
        const double w = tx.w[si] * ty.w[sj];
        auto gs = grad_source->at(sx, sy);
        for (std::size_t d = 0; d < upstream.size(); ++d) gs[d] += w * upstream[d];
      }
    }
  }
  return g;
}

void bilinear_sample_at(const FeatureMap& src, double cx, double cy, std::span<double> out) {
  const double fx = std::floor(cx);
  const double fy = std::floor(cy);
  const double tx = cx - fx;
  const double ty = cy - fy;
  const int x0 = clamp_index(static_cast<int>(fx), src.width());
  const int x1 = clamp_index(static_cast<int>(fx) + 1, src.width());
  const int y0 = clamp_index(static_cast<int>(fy), src.height());
  const int y1 = clamp_index(static_cast<int>(fy) + 1, src.height());
  const auto a = src.at(x0, y0);
  const auto b = src.at(x1, y0);
  const auto c = src.at(x0, y1);
  const auto e = src.at(x1, y1);
  for (std::size_t d = 0; d < out.size(); ++d) {
    out[d] = (1 - ty) * ((1 - tx) * a[d] + tx * b[d]) + ty * ((1 - tx) * c[d] + tx * e[d]);
  }
}

FlowVector bilinear_sample_at_backward(const FeatureMap& src, double cx, double cy,
                                       std::span<const double> upstream, FeatureMap* grad_source) {
  const double fx = std::floor(cx);
  const double fy = std::floor(cy);
  const double tx = cx - fx;
  const double ty = cy - fy;
  const int x0 = clamp_index(static_cast<int>(fx), src.width());
  const int x1 = clamp_index(static_cast<int>(fx) + 1, src.width());
  const int y0 = clamp_index(static_cast<int>(fy), src.height());
  const int y1 = clamp_index(static_cast<int>(fy) + 1, src.height());
  const auto a = src.at(x0, y0);
  const auto b = src.at(x1, y0);
  const auto c = src.at(x0, y1);
  const auto e = src.at(x1, y1);
  FlowVector g;
  for (std::size_t d = 0; d < upstream.size(); ++d) {
    g.dx += upstream[d] * ((1 - ty) * (b[d] - a[d]) + ty * (e[d] - c[d]));
    g.dy += upstream[d] * ((1 - tx) * (c[d] - a[d]) + tx * (e[d] - b[d]));
  }
  if (grad_source != nullptr) {
    const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
    const int xs[4] = {x0, x1, x0, x1};
    const int ys[4] = {y0, y0, y1, y1};
    for (int t = 0; t < 4; ++t) {
      auto gs = grad_source->at(xs[t], ys[t]);
      for (std::size_t d = 0; d < upstream.size(); ++d) gs[d] += w[t] * upstream[d];
    }
  }
  return g;
}

FeatureMap gaussian_sample(const FeatureMap& src, const FlowField& flow, const SamplingKernel& k) {
  check_shapes(src, flow);
  k.validate();
  FeatureMap out(src.width(), src.height(), src.depth());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) {
      const FlowVector f = flow.at(x, y);
      gaussian_sample_at(src, x + f.dx, y + f.dy, k, out.at(x, y));
    }
  return out;
}

FeatureMap bilinear_sample(const FeatureMap& src, const FlowField& flow) {
  check_shapes(src, flow);
  FeatureMap out(src.width(), src.height(), src.depth());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) {
      const FlowVector f = flow.at(x, y);
      bilinear_sample_at(src, x + f.dx, y + f.dy, out.at(x, y));
    }
  return out;
}

SampleGradients gaussian_sample_backward(const FeatureMap& src, const FlowField& flow,
                                         const SamplingKernel& k, const FeatureMap& upstream) {
  check_shapes(src, flow);
  check_upstream(src, upstream);
  k.validate();
  SampleGradients g{FeatureMap(src.width(), src.height(), src.depth()),
                    FlowField(src.width(), src.height())};
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) {
      const FlowVector f = flow.at(x, y);
      g.grad_flow.at(x, y) =
          gaussian_sample_at_backward(src, x + f.dx, y + f.dy, k, upstream.at(x, y), &g.grad_source);
    }
  return g;
}

SampleGradients bilinear_sample_backward(const FeatureMap& src, const FlowField& flow,
                                         const FeatureMap& upstream) {
  check_shapes(src, flow);
  check_upstream(src, upstream);
  SampleGradients g{FeatureMap(src.width(), src.height(), src.depth()),
                    FlowField(src.width(), src.height())};
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) {
      const FlowVector f = flow.at(x, y);
      g.grad_flow.at(x, y) =
          bilinear_sample_at_backward(src, x + f.dx, y + f.dy, upstream.at(x, y), &g.grad_source);
    }
  return g;
}

}  // namespace sflow
