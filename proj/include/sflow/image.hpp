#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sflow/error.hpp"

namespace sflow {

struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
};

// Real-valued raster, row-major and channel-interleaved. Public operations
// keep every sample in [0, 1].
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels, double fill = 0.0);
  // Takes ownership of `data`; values are clamped to [0, 1].
  ImageBuffer(int width, int height, int channels, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const noexcept { return data_.empty(); }

  double at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }
  // Caller is responsible for storing values in [0, 1].
  double& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  void clamp() noexcept;
  bool same_shape(const ImageBuffer& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  bool operator==(const ImageBuffer&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Binary field; 1 marks a missing pixel.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, bool fill = false);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return bits_.size(); }

  bool hole(int x, int y) const noexcept {
    return bits_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(x)] != 0;
  }
  bool valid(int x, int y) const noexcept { return !hole(x, y); }
  void set(int x, int y, bool is_hole) noexcept {
    bits_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
          static_cast<std::size_t>(x)] = is_hole ? 1 : 0;
  }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  std::size_t hole_count() const noexcept;
  double ratio() const noexcept;
  bool any_hole() const noexcept { return hole_count() > 0; }

  bool operator==(const Mask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct FlowVector {
  double dx = 0.0;
  double dy = 0.0;
  bool operator==(const FlowVector&) const = default;
};

// Per-pixel displacement stored at target pixels and pointing at the source
// location (gather semantics): pixel (x, y) reads from (x + dx, y + dy).
class FlowField {
 public:
  FlowField() = default;
  FlowField(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  const FlowVector& at(int x, int y) const noexcept { return vectors_[offset(x, y)]; }
  FlowVector& at(int x, int y) noexcept { return vectors_[offset(x, y)]; }

  std::span<const FlowVector> vectors() const noexcept { return vectors_; }
  std::span<FlowVector> vectors() noexcept { return vectors_; }

  bool all_finite() const noexcept;
  bool operator==(const FlowField&) const = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<FlowVector> vectors_;
};

// H x W grid of D-dimensional descriptors. Unlike ImageBuffer the values are
// unbounded; it carries both extracted features and raw pixels fed to the
// samplers.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int width, int height, int depth, double fill = 0.0);

  static FeatureMap from_image(const ImageBuffer& img);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int depth() const noexcept { return depth_; }

  std::span<const double> at(int x, int y) const noexcept {
    return {data_.data() + offset(x, y), static_cast<std::size_t>(depth_)};
  }
  std::span<double> at(int x, int y) noexcept {
    return {data_.data() + offset(x, y), static_cast<std::size_t>(depth_)};
  }
  double value(int x, int y, int d) const noexcept { return data_[offset(x, y) + d]; }
  double& value(int x, int y, int d) noexcept { return data_[offset(x, y) + d]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool same_shape(const FeatureMap& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && depth_ == other.depth_;
  }
  bool operator==(const FeatureMap&) const = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
           static_cast<std::size_t>(depth_);
  }

  int width_ = 0;
  int height_ = 0;
  int depth_ = 0;
  std::vector<double> data_;
};

// Coordinates of missing pixels in row-major order.
struct HoleCoords {
  std::vector<Point> coords;
  std::size_t count() const noexcept { return coords.size(); }
};

HoleCoords hole_coords(const Mask& m);

// Zeroes masked pixels: out = img * (1 - m).
ImageBuffer apply_mask(const ImageBuffer& img, const Mask& m);

// Pixelwise select: s_in where the mask is 0, s_hat where it is 1.
ImageBuffer composite(const ImageBuffer& s_hat, const ImageBuffer& s_in, const Mask& m);

ImageBuffer to_gray(const ImageBuffer& img);

// Single channel of `img` as a plain row-major plane.
std::vector<double> channel_plane(const ImageBuffer& img, int c);

void require_same_size(const ImageBuffer& img, const Mask& m);

}  // namespace sflow
