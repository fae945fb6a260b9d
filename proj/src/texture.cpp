#include "sflow/texture.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "sflow/cg.hpp"
#include "sflow/losses.hpp"

namespace sflow {

void FlowOptConfig::validate() const {
  if (pyramid_levels < 1 || steps_per_level < 0 || !(step_size > 0.0) ||
      !(smoothness_weight >= 0.0) || patch < 3 || patch % 2 == 0 || nnf_iters < 0 ||
      em_iters < 1 || !(structure_weight >= 0.0) || !(sobolev >= 0.0)) {
    throw Error(ErrorCode::invalid_argument,
                "flow config needs levels >= 1, steps >= 0, step > 0, smoothness >= 0, sobolev >= 0, odd patch >= 3");
  }
  kernel.validate();
  render_kernel.validate();
}

namespace {

std::size_t flat(int w, int x, int y) {
  return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
}

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

// For every pixel, the valid pixel reached first by a breadth-first sweep
// from all valid pixels (4-connected, fixed neighbour order).
std::vector<Point> nearest_valid_map(const Mask& m) {
  const int w = m.width();
  const int h = m.height();
  std::vector<Point> nearest(m.pixel_count(), Point{-1, -1});
  std::deque<Point> queue;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (m.valid(x, y)) {
        nearest[flat(w, x, y)] = {x, y};
        queue.push_back({x, y});
      }
  if (queue.empty()) throw Error(ErrorCode::no_valid_source, "mask has no valid pixels");
  const int step[4][2] = {{0, -1}, {-1, 0}, {1, 0}, {0, 1}};
  while (!queue.empty()) {
    const Point p = queue.front();
    queue.pop_front();
    for (const auto& d : step) {
      const int qx = p.x + d[0];
      const int qy = p.y + d[1];
      if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
      Point& slot = nearest[flat(w, qx, qy)];
      if (slot.x >= 0) continue;
      slot = nearest[flat(w, p.x, p.y)];
      queue.push_back({qx, qy});
    }
  }
  return nearest;
}

void project_with(FlowField& flow, const Mask& m, const std::vector<Point>& nearest) {
  const int w = m.width();
  const int h = m.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      FlowVector& f = flow.at(x, y);
      if (m.valid(x, y)) {
        f = {};
        continue;
      }
      if (!std::isfinite(f.dx) || !std::isfinite(f.dy)) f = {};
      const double cx = std::clamp(x + f.dx, 0.0, static_cast<double>(w - 1));
      const double cy = std::clamp(y + f.dy, 0.0, static_cast<double>(h - 1));
      const int gx = std::min(round_half_up(cx), w - 1);
      const int gy = std::min(round_half_up(cy), h - 1);
      if (m.valid(gx, gy)) {
        f = {cx - x, cy - y};
      } else {
        const Point q = nearest[flat(w, gx, gy)];
        f = {static_cast<double>(q.x - x), static_cast<double>(q.y - y)};
      }
    }
  }
}

// Mean over 4-adjacent hole pairs, normalized by the hole count.
// I + beta * L on the hole pixels, identity rows elsewhere.
FivePointSystem sobolev_system(const Mask& m, double beta) {
  const int w = m.width();
  const int h = m.height();
  FivePointSystem sys(w, h);
  std::fill(sys.diag().begin(), sys.diag().end(), 1.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!m.hole(x, y)) continue;
      const std::size_t i = flat(w, x, y);
      if (x + 1 < w && m.hole(x + 1, y)) {
        sys.east()[i] = beta;
        sys.diag()[i] += beta;
        sys.diag()[i + 1] += beta;
      }
      if (y + 1 < h && m.hole(x, y + 1)) {
        sys.south()[i] = beta;
        sys.diag()[i] += beta;
        sys.diag()[i + static_cast<std::size_t>(w)] += beta;
      }
    }
  return sys;
}

void precondition(const FivePointSystem& sys, FlowField& grad) {
  const std::size_t n = sys.size();
  std::vector<double> b(n), x(n);
  for (int comp = 0; comp < 2; ++comp) {
    for (std::size_t i = 0; i < n; ++i) b[i] = comp == 0 ? grad.vectors()[i].dx : grad.vectors()[i].dy;
    std::copy(b.begin(), b.end(), x.begin());
    sys.solve(b, x, 1e-4, 200);
    for (std::size_t i = 0; i < n; ++i) (comp == 0 ? grad.vectors()[i].dx : grad.vectors()[i].dy) = x[i];
  }
}

double smoothness_energy(const FlowField& flow, const Mask& m, double inv_n,
                         FlowField* grad, double weight) {
  double e = 0.0;
  const int w = m.width();
  const int h = m.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!m.hole(x, y)) continue;
      const FlowVector a = flow.at(x, y);
      const int nb[2][2] = {{x + 1, y}, {x, y + 1}};
      for (const auto& q : nb) {
        if (q[0] >= w || q[1] >= h || !m.hole(q[0], q[1])) continue;
        const FlowVector b = flow.at(q[0], q[1]);
        const double ddx = a.dx - b.dx;
        const double ddy = a.dy - b.dy;
        e += ddx * ddx + ddy * ddy;
        if (grad != nullptr) {
          const double c = 2.0 * weight * inv_n;
          grad->at(x, y).dx += c * ddx;
          grad->at(x, y).dy += c * ddy;
          grad->at(q[0], q[1]).dx -= c * ddx;
          grad->at(q[0], q[1]).dy -= c * ddy;
        }
      }
    }
  }
  return e * inv_n;
}

bool lower_source(Point a, Point b) { return a.y < b.y || (a.y == b.y && a.x < b.x); }

}  // namespace

double patch_ssd(const FeatureMap& guide, Point p, Point q, int patch, double bound) {
  const int r = patch / 2;
  const int w = guide.width();
  const int h = guide.height();
  double sum = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    const int py = std::clamp(p.y + dy, 0, h - 1);
    const int qy = std::clamp(q.y + dy, 0, h - 1);
    for (int dx = -r; dx <= r; ++dx) {
      const auto a = guide.at(std::clamp(p.x + dx, 0, w - 1), py);
      const auto b = guide.at(std::clamp(q.x + dx, 0, w - 1), qy);
      for (std::size_t d = 0; d < a.size(); ++d) {
        const double t = a[d] - b[d];
        sum += t * t;
      }
    }
    if (sum > bound) return sum;
  }
  return sum;
}

void project_flow(FlowField& flow, const Mask& m) {
  if (flow.width() != m.width() || flow.height() != m.height()) {
    throw Error(ErrorCode::dimension_mismatch, "flow and mask sizes differ");
  }
  if (!m.any_hole()) {
    for (auto& f : flow.vectors()) f = {};
    return;
  }
  project_with(flow, m, nearest_valid_map(m));
}

FlowField nnf_search(const FeatureMap& guide, const Mask& m, int patch, int iters, Rng& rng,
                     const FlowField* start) {
  const int w = m.width();
  const int h = m.height();
  if (guide.width() != w || guide.height() != h) {
    throw Error(ErrorCode::dimension_mismatch, "guide and mask sizes differ");
  }
  if (patch < 1 || patch % 2 == 0) throw Error(ErrorCode::invalid_argument, "patch must be odd");
  FlowField flow(w, h);
  if (!m.any_hole()) return flow;

  std::vector<Point> valid;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (m.valid(x, y)) valid.push_back({x, y});
  if (valid.empty()) throw Error(ErrorCode::no_valid_source, "no valid source pixels");

  std::vector<Point> best(m.pixel_count(), Point{-1, -1});
  std::vector<double> dist(m.pixel_count(), std::numeric_limits<double>::infinity());
  if (start != nullptr) {
    if (start->width() != w || start->height() != h) {
      throw Error(ErrorCode::dimension_mismatch, "start flow size differs from the mask");
    }
    FlowField projected = *start;
    project_flow(projected, m);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (m.hole(x, y)) {
          const FlowVector f = projected.at(x, y);
          best[flat(w, x, y)] = {std::min(round_half_up(x + f.dx), w - 1),
                                 std::min(round_half_up(y + f.dy), h - 1)};
        }
    // Rounding a projected target can still land on a hole pixel.
    const std::vector<Point> nearest = nearest_valid_map(m);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        Point& b = best[flat(w, x, y)];
        if (m.hole(x, y) && !m.valid(b.x, b.y)) b = nearest[flat(w, b.x, b.y)];
      }
  } else {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (m.hole(x, y))
          best[flat(w, x, y)] = valid[static_cast<std::size_t>(
              rng.uniform_int(0, static_cast<int>(valid.size()) - 1))];
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (m.hole(x, y)) dist[flat(w, x, y)] = patch_ssd(guide, {x, y}, best[flat(w, x, y)], patch);

  auto consider = [&](int x, int y, int qx, int qy) {
    if (qx < 0 || qy < 0 || qx >= w || qy >= h || !m.valid(qx, qy)) return;
    const std::size_t i = flat(w, x, y);
    const Point q{qx, qy};
    if (q == best[i]) return;
    const double d = patch_ssd(guide, {x, y}, q, patch, dist[i]);
    if (d < dist[i] || (d == dist[i] && lower_source(q, best[i]))) {
      dist[i] = d;
      best[i] = q;
    }
  };

  const int max_radius = std::max(w, h);
  for (int it = 0; it < iters; ++it) {
    const bool forward = it % 2 == 0;
    const int s = forward ? 1 : -1;
    for (int yy = 0; yy < h; ++yy) {
      const int y = forward ? yy : h - 1 - yy;
      for (int xx = 0; xx < w; ++xx) {
        const int x = forward ? xx : w - 1 - xx;
        if (!m.hole(x, y)) continue;
        // Propagation: a neighbour's source shifted by the same offset.
        const int nx = x - s;
        const int ny = y - s;
        if (nx >= 0 && nx < w && m.hole(nx, y)) {
          const Point b = best[flat(w, nx, y)];
          consider(x, y, b.x + s, b.y);
        }
        if (ny >= 0 && ny < h && m.hole(x, ny)) {
          const Point b = best[flat(w, x, ny)];
          consider(x, y, b.x, b.y + s);
        }
        // Random search with exponentially shrinking radius, window clipped to the image.
        for (int radius = max_radius; radius >= 1; radius /= 2) {
          const Point b = best[flat(w, x, y)];
          consider(x, y, rng.uniform_int(std::max(0, b.x - radius), std::min(w - 1, b.x + radius)),
                   rng.uniform_int(std::max(0, b.y - radius), std::min(h - 1, b.y + radius)));
        }
      }
    }
  }

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (m.hole(x, y)) {
        const Point b = best[flat(w, x, y)];
        flow.at(x, y) = {static_cast<double>(b.x - x), static_cast<double>(b.y - y)};
      }
  return flow;
}

FlowField init_flow_nnf(const ImageBuffer& s_hat, const Mask& m, const FlowOptConfig& cfg,
                        std::uint64_t seed) {
  cfg.validate();
  require_same_size(s_hat, m);
  Rng rng(seed);
  return nnf_search(FeatureMap::from_image(s_hat), m, cfg.patch, cfg.nnf_iters, rng);
}

FlowOptResult optimize_flow_features(const FeatureMap& vgt, const FeatureMap& vin, const Mask& m,
                                     const FlowField& flow0, const FlowOptConfig& cfg, int steps,
                                     Sampler sampler) {
  cfg.validate();
  if (!vgt.same_shape(vin) || vin.width() != m.width() || vin.height() != m.height() ||
      flow0.width() != m.width() || flow0.height() != m.height()) {
    throw Error(ErrorCode::dimension_mismatch, "features, flow and mask differ in size");
  }
  FlowOptResult result{flow0, {}};
  const HoleCoords holes = hole_coords(m);
  if (holes.count() == 0) {
    project_flow(result.flow, m);
    return result;
  }
  const std::vector<Point> nearest = nearest_valid_map(m);
  project_with(result.flow, m, nearest);
  const std::vector<double> mu_max = best_match_table(vgt, vin, holes, m);
  const double inv_n = 1.0 / static_cast<double>(holes.count());

  auto evaluate = [&](const FlowField& f, FlowField* grad) {
    CorrectnessLoss lc = sampling_correctness_loss(vgt, vin, f, holes, cfg.kernel, m, mu_max, sampler);
    double value = lc.value;
    if (grad != nullptr) *grad = std::move(lc.grad_flow);
    if (cfg.smoothness_weight > 0.0) {
      value += cfg.smoothness_weight * smoothness_energy(f, m, inv_n, grad, cfg.smoothness_weight);
    }
    if (!std::isfinite(value)) throw Error(ErrorCode::divergence, "objective became non-finite");
    return value;
  };

  FlowField grad;
  double current = evaluate(result.flow, &grad);
  result.trace.push_back(current);
  const bool use_sobolev = cfg.sobolev > 0.0;
  const FivePointSystem sys = sobolev_system(m, use_sobolev ? cfg.sobolev : 0.0);
  constexpr int kMaxHalvings = 10;
  for (int step = 0; step < steps; ++step) {
    if (use_sobolev) precondition(sys, grad);
    double largest = 0.0;
    for (const Point p : holes.coords) {
      const FlowVector g = grad.at(p.x, p.y);
      largest = std::max(largest, std::hypot(g.dx, g.dy));
    }
    if (!(largest > 0.0)) break;
    bool accepted = false;
    double eta = cfg.step_size / largest;
    for (int halving = 0; halving <= kMaxHalvings && !accepted; ++halving, eta *= 0.5) {
      FlowField trial = result.flow;
      for (const Point p : holes.coords) {
        trial.at(p.x, p.y).dx -= eta * grad.at(p.x, p.y).dx;
        trial.at(p.x, p.y).dy -= eta * grad.at(p.x, p.y).dy;
      }
      project_with(trial, m, nearest);
      FlowField trial_grad;
      const double value = evaluate(trial, &trial_grad);
      if (value < current) {
        result.flow = std::move(trial);
        grad = std::move(trial_grad);
        current = value;
        accepted = true;
      }
    }
    if (!accepted) break;
    result.trace.push_back(current);
  }
  return result;
}

FlowOptResult optimize_flow(const ImageBuffer& i_in, const ImageBuffer& s_hat, const Mask& m,
                            const FlowField& flow0, const FlowOptConfig& cfg) {
  require_same_size(i_in, m);
  if (!i_in.same_shape(s_hat)) {
    throw Error(ErrorCode::dimension_mismatch, "image and structure differ in shape");
  }
  const FeatureMap vgt = extract_features(s_hat);
  const FeatureMap vin = extract_features(composite(s_hat, i_in, m));
  return optimize_flow_features(vgt, vin, m, flow0, cfg, cfg.steps_per_level);
}

ImageBuffer render_fill(const ImageBuffer& i_in, const FlowField& flow, const Mask& m,
                        const SamplingKernel& k) {
  require_same_size(i_in, m);
  if (flow.width() != m.width() || flow.height() != m.height()) {
    throw Error(ErrorCode::dimension_mismatch, "flow and image sizes differ");
  }
  k.validate();
  ImageBuffer out = i_in;
  if (!m.any_hole()) return out;
  const FeatureMap src = FeatureMap::from_image(i_in);
  std::vector<double> px(static_cast<std::size_t>(i_in.channels()));
  for (int y = 0; y < i_in.height(); ++y)
    for (int x = 0; x < i_in.width(); ++x) {
      if (!m.hole(x, y)) continue;
      const FlowVector f = flow.at(x, y);
      gaussian_sample_at(src, x + f.dx, y + f.dy, k, px);
      for (int c = 0; c < i_in.channels(); ++c)
        out.at(x, y, c) = std::clamp(px[static_cast<std::size_t>(c)], 0.0, 1.0);
    }
  return out;
}

ImageBuffer vote_fill(const ImageBuffer& i_in, const FlowField& flow, const Mask& m, int patch) {
  require_same_size(i_in, m);
  const int w = m.width();
  const int h = m.height();
  const int r = patch / 2;
  const int ch = i_in.channels();
  ImageBuffer out = i_in;
  std::vector<double> acc(static_cast<std::size_t>(ch));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!m.hole(x, y)) continue;
      std::fill(acc.begin(), acc.end(), 0.0);
      int count = 0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int ox = x - dx;
          const int oy = y - dy;
          if (ox < 0 || oy < 0 || ox >= w || oy >= h || !m.hole(ox, oy)) continue;
          const FlowVector f = flow.at(ox, oy);
          const int sx = round_half_up(x + f.dx);
          const int sy = round_half_up(y + f.dy);
          if (sx < 0 || sy < 0 || sx >= w || sy >= h || !m.valid(sx, sy)) continue;
          for (int c = 0; c < ch; ++c) acc[static_cast<std::size_t>(c)] += i_in.at(sx, sy, c);
          ++count;
        }
      if (count == 0) {
        const FlowVector f = flow.at(x, y);
        const int sx = std::clamp(round_half_up(x + f.dx), 0, w - 1);
        const int sy = std::clamp(round_half_up(y + f.dy), 0, h - 1);
        for (int c = 0; c < ch; ++c) out.at(x, y, c) = i_in.at(sx, sy, c);
        continue;
      }
      for (int c = 0; c < ch; ++c) out.at(x, y, c) = acc[static_cast<std::size_t>(c)] / count;
    }
  return out;
}

}  // namespace sflow
