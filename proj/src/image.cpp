#include "sflow/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sflow {

namespace {

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::invalid_argument,
                "dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height);
  if (channels != 1 && channels != 3) {
    throw Error(ErrorCode::invalid_argument, "channels must be 1 or 3");
  }
  data_.assign(pixel_count() * static_cast<std::size_t>(channels), std::clamp(fill, 0.0, 1.0));
}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_dims(width, height);
  if (channels != 1 && channels != 3) {
    throw Error(ErrorCode::invalid_argument, "channels must be 1 or 3");
  }
  if (data_.size() != pixel_count() * static_cast<std::size_t>(channels)) {
    throw Error(ErrorCode::dimension_mismatch, "data length does not match width*height*channels");
  }
  clamp();
}

void ImageBuffer::clamp() noexcept {
  for (double& v : data_) {
    // NaN maps to 0 so the [0,1] invariant holds unconditionally.
    v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
  }
}

Mask::Mask(int width, int height, bool fill) : width_(width), height_(height) {
  check_dims(width, height);
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
               fill ? 1 : 0);
}

std::size_t Mask::hole_count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

double Mask::ratio() const noexcept {
  if (bits_.empty()) return 0.0;
  return static_cast<double>(hole_count()) / static_cast<double>(bits_.size());
}

FlowField::FlowField(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  vectors_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                  FlowVector{});
}

bool FlowField::all_finite() const noexcept {
  return std::all_of(vectors_.begin(), vectors_.end(), [](const FlowVector& v) {
    return std::isfinite(v.dx) && std::isfinite(v.dy);
  });
}

FeatureMap::FeatureMap(int width, int height, int depth, double fill)
    : width_(width), height_(height), depth_(depth) {
  check_dims(width, height);
  if (depth <= 0) throw Error(ErrorCode::invalid_argument, "feature depth must be positive");
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                   static_cast<std::size_t>(depth),
               fill);
}

FeatureMap FeatureMap::from_image(const ImageBuffer& img) {
  FeatureMap out(img.width(), img.height(), img.channels());
  std::copy(img.data().begin(), img.data().end(), out.data_.begin());
  return out;
}

HoleCoords hole_coords(const Mask& m) {
  HoleCoords out;
  out.coords.reserve(m.hole_count());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m.hole(x, y)) out.coords.push_back({x, y});
    }
  }
  return out;
}

void require_same_size(const ImageBuffer& img, const Mask& m) {
  if (img.width() != m.width() || img.height() != m.height()) {
    throw Error(ErrorCode::dimension_mismatch,
                "image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                    " vs mask " + std::to_string(m.width()) + "x" + std::to_string(m.height()));
  }
}

ImageBuffer apply_mask(const ImageBuffer& img, const Mask& m) {
  require_same_size(img, m);
  ImageBuffer out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!m.hole(x, y)) continue;
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = 0.0;
    }
  }
  return out;
}

ImageBuffer composite(const ImageBuffer& s_hat, const ImageBuffer& s_in, const Mask& m) {
  if (!s_hat.same_shape(s_in)) {
    throw Error(ErrorCode::dimension_mismatch, "composite inputs differ in shape");
  }
  require_same_size(s_in, m);
  ImageBuffer out = s_in;
  for (int y = 0; y < s_in.height(); ++y) {
    for (int x = 0; x < s_in.width(); ++x) {
      if (!m.hole(x, y)) continue;
      for (int c = 0; c < s_in.channels(); ++c) out.at(x, y, c) = s_hat.at(x, y, c);
    }
  }
  return out;
}

ImageBuffer to_gray(const ImageBuffer& img) {
  if (img.channels() == 1) return img;
  ImageBuffer out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      out.at(x, y) = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
    }
  }
  out.clamp();
  return out;
}

std::vector<double> channel_plane(const ImageBuffer& img, int c) {
  std::vector<double> plane(img.pixel_count());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      plane[static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width()) +
            static_cast<std::size_t>(x)] = img.at(x, y, c);
    }
  }
  return plane;
}

}  // namespace sflow
