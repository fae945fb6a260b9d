#include "sflow/pyramid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sflow {

namespace {

int coarse_size(int fine, double factor) {
  return std::max(1, static_cast<int>(std::ceil(static_cast<double>(fine) / factor)));
}

// Fine-pixel span [begin, end) covered by coarse index i.
std::pair<int, int> coverage(int i, int fine, double factor) {
  const int begin = static_cast<int>(std::floor(i * factor));
  const int end = std::min(fine, static_cast<int>(std::ceil((i + 1) * factor)));
  return {std::min(begin, fine - 1), std::max(end, begin + 1)};
}

void check_factor(double factor) {
  if (!(factor > 1.0) || !std::isfinite(factor)) {
    throw Error(ErrorCode::invalid_argument, "pyramid factor must be > 1");
  }
}

}  // namespace

ImageBuffer downsample_box(const ImageBuffer& img, double factor) {
  check_factor(factor);
  const int w = coarse_size(img.width(), factor);
  const int h = coarse_size(img.height(), factor);
  ImageBuffer out(w, h, img.channels());
  for (int y = 0; y < h; ++y) {
    const auto [y0, y1] = coverage(y, img.height(), factor);
    for (int x = 0; x < w; ++x) {
      const auto [x0, x1] = coverage(x, img.width(), factor);
      const double n = static_cast<double>((y1 - y0) * (x1 - x0));
      for (int c = 0; c < img.channels(); ++c) {
        double sum = 0.0;
        for (int yy = y0; yy < y1; ++yy) {
          for (int xx = x0; xx < x1; ++xx) sum += img.at(xx, yy, c);
        }
        out.at(x, y, c) = std::clamp(sum / n, 0.0, 1.0);
      }
    }
  }
  return out;
}

Mask downsample_mask(const Mask& m, double factor) {
  check_factor(factor);
  const int w = coarse_size(m.width(), factor);
  const int h = coarse_size(m.height(), factor);
  Mask out(w, h);
  for (int y = 0; y < h; ++y) {
    const auto [y0, y1] = coverage(y, m.height(), factor);
    for (int x = 0; x < w; ++x) {
      const auto [x0, x1] = coverage(x, m.width(), factor);
      bool any = false;
      for (int yy = y0; yy < y1 && !any; ++yy) {
        for (int xx = x0; xx < x1 && !any; ++xx) any = m.hole(xx, yy);
      }
      out.set(x, y, any);
    }
  }
  return out;
}

ImageBuffer upsample_bilinear(const ImageBuffer& img, int width, int height) {
  ImageBuffer out(width, height, img.channels());
  const double sx = static_cast<double>(img.width()) / width;
  const double sy = static_cast<double>(img.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double ty = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double tx = fx - x0;
      for (int c = 0; c < img.channels(); ++c) {
        const double top = (1 - tx) * img.at(x0, y0, c) + tx * img.at(x1, y0, c);
        const double bottom = (1 - tx) * img.at(x0, y1, c) + tx * img.at(x1, y1, c);
        out.at(x, y, c) = std::clamp((1 - ty) * top + ty * bottom, 0.0, 1.0);
      }
    }
  }
  return out;
}

FlowField upscale_flow(const FlowField& coarse, int width, int height) {
  FlowField fine(width, height);
  const double rx = static_cast<double>(width) / coarse.width();
  const double ry = static_cast<double>(height) / coarse.height();
  for (int y = 0; y < height; ++y) {
    const int cy = std::min(coarse.height() - 1, static_cast<int>(std::floor(y / ry)));
    for (int x = 0; x < width; ++x) {
      const int cx = std::min(coarse.width() - 1, static_cast<int>(std::floor(x / rx)));
      const FlowVector& v = coarse.at(cx, cy);
      fine.at(x, y) = {v.dx * rx, v.dy * ry};
    }
  }
  return fine;
}

int max_pyramid_levels(int width, int height, int requested, double factor) {
  check_factor(factor);
  int levels = 1;
  int w = width;
  int h = height;
  while (levels < requested) {
    const int nw = coarse_size(w, factor);
    const int nh = coarse_size(h, factor);
    if (nw < kMinPyramidSide || nh < kMinPyramidSide) break;
    w = nw;
    h = nh;
    ++levels;
  }
  return levels;
}

Pyramid build_pyramid(const ImageBuffer& img, const Mask& mask, int levels, double factor) {
  require_same_size(img, mask);
  check_factor(factor);
  if (levels < 1) throw Error(ErrorCode::invalid_argument, "pyramid needs at least one level");

  Pyramid pyr;
  pyr.factor = factor;
  pyr.levels.push_back({img, mask, 1.0});
  for (int l = 1; l < levels; ++l) {
    const PyramidLevel& prev = pyr.levels.back();
    PyramidLevel next{downsample_box(prev.image, factor), downsample_mask(prev.mask, factor), 0.0};
    next.scale = static_cast<double>(next.image.width()) / img.width();
    pyr.levels.push_back(std::move(next));
  }
  const PyramidLevel& coarsest = pyr.levels.back();
  if (coarsest.image.width() < kMinPyramidSide || coarsest.image.height() < kMinPyramidSide) {
    throw Error(ErrorCode::too_small,
                "coarsest level " + std::to_string(coarsest.image.width()) + "x" +
                    std::to_string(coarsest.image.height()) + " is below 16x16");
  }
  std::reverse(pyr.levels.begin(), pyr.levels.end());
  return pyr;
}

}  // namespace sflow
