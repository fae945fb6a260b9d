#include "sflow/structure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sflow/cg.hpp"
#include "sflow/parallel.hpp"

namespace sflow {

void StructureFillParams::validate() const {
  if (!(tol > 0.0) || max_iters < 1 || !(tv_eps > 0.0) || tv_outer_iters < 1 ||
      !(tv_change_tol > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "structure fill needs tol > 0 and max_iters >= 1");
  }
}

namespace {

// Edge weight callbacks receive the two endpoint indices.
template <typename EdgeWeight>
double solve_fill(std::vector<double>& u, const Mask& m, const EdgeWeight& weight,
                  const StructureFillParams& p) {
  const int w = m.width();
  const int h = m.height();
  const std::size_t sw = static_cast<std::size_t>(w);
  FivePointSystem sys(w, h);
  std::vector<double> b(u.size(), 0.0);
  auto hole = [&](std::size_t i) { return m.bits()[i] != 0; };

  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!hole(i)) {
      sys.diag()[i] = 1.0;
      b[i] = u[i];
    }
  }
  auto couple = [&](std::size_t i, std::size_t j, double& slot) {
    if (!hole(i) && !hole(j)) return;
    const double c = weight(i, j);
    if (hole(i)) sys.diag()[i] += c;
    if (hole(j)) sys.diag()[j] += c;
    if (hole(i) && hole(j)) {
      slot = c;
    } else if (hole(i)) {
      b[i] += c * u[j];
    } else {
      b[j] += c * u[i];
    }
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * sw + static_cast<std::size_t>(x);
      if (x + 1 < w) couple(i, i + 1, sys.east()[i]);
      if (y + 1 < h) couple(i, i + sw, sys.south()[i]);
    }
  }
  const CgReport r = sys.solve(b, u, p.tol, p.max_iters);
  if (!r.converged) {
    throw Error(ErrorCode::solver_divergence,
                "structure fill CG stalled at relative residual " +
                    std::to_string(r.relative_residual));
  }
  return r.relative_residual;
}

// Mean of the valid pixels 4-adjacent to the hole; the CG starting value.
double boundary_mean(const std::vector<double>& u, const Mask& m) {
  double sum = 0.0;
  double lo = 1.0, hi = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      if (m.hole(x, y)) continue;
      const bool touches = (x > 0 && m.hole(x - 1, y)) || (x + 1 < m.width() && m.hole(x + 1, y)) ||
                           (y > 0 && m.hole(x, y - 1)) || (y + 1 < m.height() && m.hole(x, y + 1));
      if (!touches) continue;
      const double v = u[static_cast<std::size_t>(y) * static_cast<std::size_t>(m.width()) +
                         static_cast<std::size_t>(x)];
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      ++n;
    }
  if (n == 0) return 0.0;
  return lo == hi ? lo : sum / static_cast<double>(n);
}

}  // namespace

ImageBuffer complete_structure(const ImageBuffer& s_in, const Mask& m, const StructureFillParams& p,
                               StructureFillReport* report) {
  p.validate();
  require_same_size(s_in, m);
  StructureFillReport rep;
  if (!m.any_hole()) {
    if (report != nullptr) *report = rep;
    return s_in;
  }
  // On a connected grid every hole component borders a valid pixel unless
  // there are no valid pixels at all.
  if (m.hole_count() == m.pixel_count()) {
    throw Error(ErrorCode::isolated_hole, "hole region has no valid boundary");
  }

  const int channels = s_in.channels();
  std::vector<std::vector<double>> planes(static_cast<std::size_t>(channels));
  std::vector<double> residual(static_cast<std::size_t>(channels), 0.0);
  std::vector<int> outer(static_cast<std::size_t>(channels), 0);
  parallel_for(static_cast<std::size_t>(channels), [&](std::size_t c) {
    std::vector<double> u = channel_plane(s_in, static_cast<int>(c));
    const double start = boundary_mean(u, m);
    for (std::size_t i = 0; i < u.size(); ++i)
      if (m.bits()[i] != 0) u[i] = start;
    residual[c] = solve_fill(u, m, [](std::size_t, std::size_t) { return 1.0; }, p);
    if (p.method == FillMethod::tv) {
      const double eps2 = p.tv_eps * p.tv_eps;
      for (int it = 0; it < p.tv_outer_iters; ++it) {
        const std::vector<double> lagged = u;
        residual[c] = solve_fill(
            u, m,
            [&](std::size_t i, std::size_t j) {
              const double d = lagged[i] - lagged[j];
              return 1.0 / std::sqrt(d * d + eps2);
            },
            p);
        outer[c] = it + 1;
        double change = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) change = std::max(change, std::abs(u[i] - lagged[i]));
        if (change < p.tv_change_tol) break;
      }
    }
    planes[c] = std::move(u);
  }, 1);

  ImageBuffer out = s_in;
  for (int y = 0; y < s_in.height(); ++y)
    for (int x = 0; x < s_in.width(); ++x) {
      if (!m.hole(x, y)) continue;
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(s_in.width()) +
                            static_cast<std::size_t>(x);
      for (int c = 0; c < channels; ++c)
        out.at(x, y, c) = std::clamp(planes[static_cast<std::size_t>(c)][i], 0.0, 1.0);
    }
  rep.residual = *std::max_element(residual.begin(), residual.end());
  rep.outer_iterations = *std::max_element(outer.begin(), outer.end());
  if (report != nullptr) *report = rep;
  return out;
}

ImageBuffer composite_structure(const ImageBuffer& s_hat, const ImageBuffer& s_in, const Mask& m) {
  return composite(s_hat, s_in, m);
}

}  // namespace sflow
