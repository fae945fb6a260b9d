#include "sflow/rtv.hpp"

#include <cmath>
#include <string>

#include "sflow/cg.hpp"
#include "sflow/filters.hpp"

namespace sflow {

void RtvParams::validate() const {
  if (!(sigma >= 0.0) || !(lambda > 0.0) || iterations < 1 || !(eps > 0.0) || !(cg_tol > 0.0) ||
      cg_max_iters < 1) {
    throw Error(ErrorCode::invalid_argument,
                "RTV parameters require sigma >= 0, lambda > 0, iterations >= 1, eps > 0");
  }
}

namespace {

std::size_t at(int width, int x, int y) {
  return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
         static_cast<std::size_t>(x);
}

// Forward differences with replicate padding (zero on the last column/row).
void forward_differences(std::span<const double> s, int w, int h, std::vector<double>& gx,
                         std::vector<double>& gy) {
  gx.assign(s.size(), 0.0);
  gy.assign(s.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) gx[at(w, x, y)] = s[at(w, x + 1, y)] - s[at(w, x, y)];
      if (y + 1 < h) gy[at(w, x, y)] = s[at(w, x, y + 1)] - s[at(w, x, y)];
    }
  }
}

FeatureMap as_map(const std::vector<double>& plane, int w, int h) {
  FeatureMap m(w, h, 1);
  std::copy(plane.begin(), plane.end(), m.data().begin());
  return m;
}

FivePointSystem screened_system(const FeatureMap& wx, const FeatureMap& wy, double lambda) {
  const int w = wx.width();
  const int h = wx.height();
  FivePointSystem sys(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = at(w, x, y);
      if (x + 1 < w) sys.east()[i] = lambda * wx.value(x, y, 0);
      if (y + 1 < h) sys.south()[i] = lambda * wy.value(x, y, 0);
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = at(w, x, y);
      double sum = sys.east()[i] + sys.south()[i];
      if (x > 0) sum += sys.east()[i - 1];
      if (y > 0) sum += sys.south()[i - static_cast<std::size_t>(w)];
      sys.diag()[i] = 1.0 + sum;
    }
  }
  return sys;
}

}  // namespace

WindowedVariations windowed_variations(const ImageBuffer& gray, double sigma) {
  if (gray.channels() != 1) {
    throw Error(ErrorCode::invalid_argument, "windowed_variations expects a single channel");
  }
  const int w = gray.width();
  const int h = gray.height();
  std::vector<double> gx, gy;
  forward_differences(gray.data(), w, h, gx, gy);
  std::vector<double> ax(gx.size()), ay(gy.size());
  for (std::size_t i = 0; i < gx.size(); ++i) {
    ax[i] = std::abs(gx[i]);
    ay[i] = std::abs(gy[i]);
  }
  return {as_map(gaussian_blur(ax, w, h, sigma), w, h), as_map(gaussian_blur(ay, w, h, sigma), w, h),
          as_map(gaussian_blur(gx, w, h, sigma), w, h), as_map(gaussian_blur(gy, w, h, sigma), w, h)};
}

ImageBuffer solve_screened_poisson(const FeatureMap& weights_x, const FeatureMap& weights_y,
                                   const ImageBuffer& rhs, double lambda, double tol,
                                   int max_iters) {
  if (weights_x.width() != rhs.width() || weights_x.height() != rhs.height() ||
      !weights_x.same_shape(weights_y) || weights_x.depth() != 1) {
    throw Error(ErrorCode::dimension_mismatch, "weight maps must be depth-1 and match the image");
  }
  for (std::span<const double> ws : {weights_x.data(), weights_y.data()}) {
    for (double v : ws) {
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorCode::invalid_argument, "edge weights must be finite and nonnegative");
      }
    }
  }
  const FivePointSystem sys = screened_system(weights_x, weights_y, lambda);

  ImageBuffer out(rhs.width(), rhs.height(), rhs.channels());
  for (int c = 0; c < rhs.channels(); ++c) {
    const std::vector<double> b = channel_plane(rhs, c);
    std::vector<double> x = b;
    const CgReport report = sys.solve(b, x, tol, max_iters);
    if (!report.converged) {
      throw Error(ErrorCode::solver_divergence,
                  "screened Poisson CG stalled at relative residual " +
                      std::to_string(report.relative_residual) + " after " +
                      std::to_string(report.iterations) + " iterations");
    }
    for (int y = 0; y < rhs.height(); ++y) {
      for (int px = 0; px < rhs.width(); ++px) out.at(px, y, c) = x[at(rhs.width(), px, y)];
    }
  }
  out.clamp();
  return out;
}

ImageBuffer rtv_smooth(const ImageBuffer& img, const RtvParams& p) {
  p.validate();
  if (p.sigma == 0.0) return img;

  const int w = img.width();
  const int h = img.height();
  ImageBuffer s = img;
  std::vector<double> gx, gy;
  FeatureMap wx(w, h, 1), wy(w, h, 1);
  for (int it = 0; it < p.iterations; ++it) {
    // Weights come from a shared luminance guide so all channels keep the
    // same edges.
    const ImageBuffer guide = to_gray(s);
    forward_differences(guide.data(), w, h, gx, gy);
    const std::vector<double> lx = gaussian_blur(gx, w, h, p.sigma);
    const std::vector<double> ly = gaussian_blur(gy, w, h, p.sigma);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      wx.data()[i] = 1.0 / ((std::abs(lx[i]) + p.eps) * (std::abs(gx[i]) + p.eps));
      wy.data()[i] = 1.0 / ((std::abs(ly[i]) + p.eps) * (std::abs(gy[i]) + p.eps));
    }
    s = solve_screened_poisson(wx, wy, img, p.lambda, p.cg_tol, p.cg_max_iters);
  }
  return s;
}

double total_variation(const ImageBuffer& img) {
  double tv = 0.0;
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        if (x + 1 < img.width()) tv += std::abs(img.at(x + 1, y, c) - img.at(x, y, c));
        if (y + 1 < img.height()) tv += std::abs(img.at(x, y + 1, c) - img.at(x, y, c));
      }
    }
  }
  return tv / static_cast<double>(img.pixel_count());
}

}  // namespace sflow
