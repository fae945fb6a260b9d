#pragma once

#include <filesystem>
#include <string>

#include "sflow/image.hpp"
#include "sflow/rng.hpp"

namespace sflow::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(
                                               std::filesystem::file_time_type::clock::now()
                                                   .time_since_epoch()
                                                   .count()));
    path_ = std::filesystem::temp_directory_path() /
            ("sflow_" + tag + "_" + std::to_string(rng.uniform_int(0, 1 << 30)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline ImageBuffer random_image(int w, int h, int c, Rng& rng) {
  ImageBuffer img(w, h, c);
  for (double& v : img.data()) v = rng.uniform();
  return img;
}

inline FeatureMap random_features(int w, int h, int d, Rng& rng, double lo = -1.0, double hi = 1.0) {
  FeatureMap f(w, h, d);
  for (double& v : f.data()) v = rng.uniform(lo, hi);
  return f;
}

inline double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

}  // namespace sflow::test
