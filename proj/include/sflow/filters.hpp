#pragma once

#include <span>
#include <vector>

namespace sflow {

// Normalized 1-D Gaussian taps of radius ceil(3 * sigma). sigma <= 0 yields
// the identity tap {1}.
std::vector<double> gaussian_taps(double sigma);

// Separable Gaussian filter of a row-major plane with replicate padding.
std::vector<double> gaussian_blur(std::span<const double> plane, int width, int height,
                                  double sigma);

}  // namespace sflow
