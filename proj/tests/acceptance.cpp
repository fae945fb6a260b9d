// Acceptance checks: prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sflow/bench.hpp"
#include "sflow/cli.hpp"
#include "sflow/io.hpp"
#include "sflow/losses.hpp"
#include "sflow/masks.hpp"
#include "sflow/pipeline.hpp"
#include "sflow/rtv.hpp"
#include "sflow/structure.hpp"
#include "sflow/synthetic.hpp"
#include "sflow/warp.hpp"
#include "test_util.hpp"

using namespace sflow;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---- sampling kernel ----

Outcome normalization() {
  Rng rng(101);
  const auto t0 = Clock::now();
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const SamplingKernel k{1 + 2 * rng.uniform_int(0, 4), rng.uniform(0.2, 4.0)};
    const auto w = gaussian_weights(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), k);
    double sum = 0;
    for (double v : w) sum += v;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 1.0,
          "worst |sum-1| " + fmt("%.2e", worst) + ", " + fmt("%.3f", secs) + " s"};
}

double dot(const FeatureMap& a, const FeatureMap& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

// Keeps v at least `margin` away from the coordinates where the sampler
// switches cells (kink_offset + integers).
double away_from(double v, double kink_offset, double margin) {
  const double frac = (v - kink_offset) - std::floor(v - kink_offset);
  if (frac < margin) return v + margin;
  if (frac > 1 - margin) return v - margin;
  return v;
}

using Forward = std::function<FeatureMap(const FeatureMap&, const FlowField&)>;
using Backward = std::function<SampleGradients(const FeatureMap&, const FlowField&, const FeatureMap&)>;

double fd_worst(const Forward& fwd, const Backward& bwd, Rng& rng, double kink_offset) {
  const int w = 8, h = 8;
  const FeatureMap src = sflow::test::random_features(w, h, 3, rng);
  const FeatureMap up = sflow::test::random_features(w, h, 3, rng);
  FlowField flow(w, h);
  for (auto& v : flow.vectors()) {
    v.dx = away_from(rng.uniform(-3, 3), kink_offset, 1e-2);
    v.dy = away_from(rng.uniform(-3, 3), kink_offset, 1e-2);
  }
  const SampleGradients g = bwd(src, flow, up);
  const double hs = 1e-4;
  auto rel = [](double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-3}); };
  double worst = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int comp = 0; comp < 2; ++comp) {
        FlowField p = flow, m = flow;
        (comp ? p.at(x, y).dy : p.at(x, y).dx) += hs;
        (comp ? m.at(x, y).dy : m.at(x, y).dx) -= hs;
        const double fd = (dot(up, fwd(src, p)) - dot(up, fwd(src, m))) / (2 * hs);
        worst = std::max(worst, rel(comp ? g.grad_flow.at(x, y).dy : g.grad_flow.at(x, y).dx, fd));
      }
  for (std::size_t i = 0; i < src.data().size(); ++i) {
    FeatureMap p = src, m = src;
    p.data()[i] += hs;
    m.data()[i] -= hs;
    const double fd = (dot(up, fwd(p, flow)) - dot(up, fwd(m, flow))) / (2 * hs);
    worst = std::max(worst, rel(g.grad_source.data()[i], fd));
  }
  return worst;
}

Outcome gradients() {
  Rng rng(102);
  const auto t0 = Clock::now();
  double worst_g = 0, worst_b = 0;
  for (int t = 0; t < 100; ++t) {
    const SamplingKernel k{1 + 2 * rng.uniform_int(1, 3), rng.uniform(0.5, 2.5)};
    worst_g = std::max(worst_g, fd_worst([&](const FeatureMap& s, const FlowField& f) { return gaussian_sample(s, f, k); },
                                         [&](const FeatureMap& s, const FlowField& f, const FeatureMap& u) {
                                           return gaussian_sample_backward(s, f, k, u);
                                         },
                                         rng, 0.5));
  }
  for (int t = 0; t < 100; ++t) {
    worst_b = std::max(worst_b, fd_worst([](const FeatureMap& s, const FlowField& f) { return bilinear_sample(s, f); },
                                         [](const FeatureMap& s, const FlowField& f, const FeatureMap& u) {
                                           return bilinear_sample_backward(s, f, u);
                                         },
                                         rng, 0.0));
  }
  const double secs = seconds_since(t0);
  return {worst_g < 1e-4 && worst_b < 1e-4 && secs < 10.0,
          "gaussian " + fmt("%.2e", worst_g) + ", bilinear " + fmt("%.2e", worst_b) + ", " + fmt("%.2f", secs) + " s"};
}

// ---- correctness loss ----

double cos_ref(std::span<const double> a, std::span<const double> b) {
  double d = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return d / std::sqrt(na * nb);
}

Mask random_mask(int w, int h, double p, Rng& rng) {
  Mask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(x, y, rng.uniform() < p);
  if (!m.any_hole()) m.set(w / 2, h / 2, true);
  if (m.hole_count() == m.pixel_count()) m.set(0, 0, false);
  return m;
}

Outcome anchor() {
  Rng rng(103);
  const int n = 12;
  const FeatureMap vgt = sflow::test::random_features(n, n, kFeatureDepth, rng);
  const FeatureMap vin = sflow::test::random_features(n, n, kFeatureDepth, rng);
  const Mask m = random_mask(n, n, 0.3, rng);
  const HoleCoords holes = hole_coords(m);
  FlowField flow(n, n);
  for (const Point p : holes.coords) {
    double best = -2;
    for (int qy = 0; qy < n; ++qy)
      for (int qx = 0; qx < n; ++qx) {
        if (!m.valid(qx, qy)) continue;
        const double c = cos_ref(vgt.at(p.x, p.y), vin.at(qx, qy));
        if (c > best) {
          best = c;
          flow.at(p.x, p.y) = {static_cast<double>(qx - p.x), static_cast<double>(qy - p.y)};
        }
      }
  }
  bool positive = true;
  for (double v : best_match_table(vgt, vin, holes, m)) positive = positive && v > 1e-6;
  const double lc = sampling_correctness_loss(vgt, vin, flow, holes, SamplingKernel{1, 1.0}, m).value;
  return {positive && std::abs(lc - 0.367879) <= 1e-6 && std::abs(lc - std::exp(-1.0)) <= 1e-12,
          "L_c " + fmt("%.9f", lc)};
}

Outcome best_match() {
  Rng rng(104);
  double worst = 0;
  int checked = 0;
  for (int t = 0; t < 50; ++t) {
    const int w = rng.uniform_int(2, 32), h = rng.uniform_int(2, 32);
    const int d = rng.uniform_int(1, kFeatureDepth);
    const FeatureMap vgt = sflow::test::random_features(w, h, d, rng);
    const FeatureMap vin = sflow::test::random_features(w, h, d, rng);
    const Mask m = random_mask(w, h, rng.uniform(0.0, 0.7), rng);
    const HoleCoords holes = hole_coords(m);
    const auto table = best_match_table(vgt, vin, holes, m);
    for (std::size_t i = 0; i < holes.coords.size(); ++i) {
      const Point p = holes.coords[i];
      double brute = -2;
      for (int qy = 0; qy < h; ++qy)
        for (int qx = 0; qx < w; ++qx)
          if (m.valid(qx, qy)) brute = std::max(brute, cos_ref(vgt.at(p.x, p.y), vin.at(qx, qy)));
      worst = std::max(worst, std::abs(table[i] - brute));
      worst = std::max(worst, std::abs(best_match_similarity(vgt, vin, p, m) - brute));
      ++checked;
    }
  }
  return {worst <= 1e-14, std::to_string(checked) + " holes, worst |diff| " + fmt("%.1e", worst)};
}

Outcome linearity() {
  const LossWeights w;
  const bool weights = w.l1_s == 4 && w.adv_s == 1 && w.l1_t == 5 && w.corr_t == 0.25 && w.adv_t == 1;
  Rng rng(105);
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const ImageBuffer a = sflow::test::random_image(9, 7, 3, rng);
    const ImageBuffer b = sflow::test::random_image(9, 7, 3, rng);
    std::vector<double> real(5), fake(5);
    for (double& v : real) v = rng.uniform(0.05, 0.95);
    for (double& v : fake) v = rng.uniform(0.05, 0.95);
    double l1 = 0;
    for (std::size_t i = 0; i < a.data().size(); ++i) l1 += std::abs(a.data()[i] - b.data()[i]);
    l1 /= static_cast<double>(a.data().size());
    double lr = 0, lf = 0;
    for (double v : real) lr += std::log(v) / 5;
    for (double v : fake) lf += std::log(1 - v) / 5;
    const double adv = lr + lf;
    const double corr = rng.uniform(0.3, 1.0);
    worst = std::max(worst, std::abs(structure_objective(a, b, real, fake, w) - (4 * l1 + 1 * adv)));
    worst = std::max(worst, std::abs(texture_objective(a, b, corr, real, fake, w) - (5 * l1 + 0.25 * corr + 1 * adv)));
  }
  return {weights && worst <= 1e-12, "worst |diff| " + fmt("%.1e", worst)};
}

// ---- structure ----

double region_variance(const ImageBuffer& img, int x0, int x1, int y0, int y1) {
  double s = 0, s2 = 0;
  int n = 0;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      s += img.at(x, y);
      s2 += img.at(x, y) * img.at(x, y);
      ++n;
    }
  return s2 / n - (s / n) * (s / n);
}

double step_amplitude(const ImageBuffer& img, int edge) {
  double left = 0, right = 0;
  int n = 0;
  for (int y = 4; y < img.height() - 4; ++y) {
    for (int k = 0; k < 4; ++k) {
      left += img.at(edge - 4 + k, y);
      right += img.at(edge + k, y);
    }
    n += 4;
  }
  return (right - left) / n;
}

Outcome rtv() {
  const auto t0 = Clock::now();
  std::ostringstream detail;
  bool ok = true;

  const ImageBuffer flat(32, 32, 3, 0.42);
  const bool fixed = rtv_smooth(flat, RtvParams{}) == flat;
  ok = ok && fixed;
  detail << "constant " << (fixed ? "exact" : "changed");

  bool monotone = true;
  for (const ImageBuffer& img : {synthetic::step_edge(48, 48, 20, 0.3, 0.7, 0.12, 5),
                                 synthetic::bricks(48, 48, 16, 8, 2, 1),
                                 synthetic::smooth_noise(48, 48, 1.0, 0.1, 0.9, 1, 8)}) {
    double prev = total_variation(img);
    for (double sigma : {1.0, 3.0, 6.0, 9.0}) {
      RtvParams p;
      p.sigma = sigma;
      const double tv = total_variation(rtv_smooth(img, p));
      monotone = monotone && tv <= prev + 1e-6;
      prev = tv;
    }
  }
  ok = ok && monotone;
  detail << ", tv monotone " << (monotone ? "yes" : "no");

  const ImageBuffer step = synthetic::step_edge(64, 64, 32, 0.2, 0.8, 0.1, 99);
  const ImageBuffer out = rtv_smooth(step, RtvParams{});
  const double retention = step_amplitude(out, 32) / 0.6;
  const double reduction = region_variance(step, 4, 26, 4, 60) / region_variance(out, 4, 26, 4, 60);
  ok = ok && retention >= 0.8 && reduction >= 10.0;
  const double secs = seconds_since(t0);
  ok = ok && secs < 30.0;
  detail << ", edge retention " << fmt("%.3f", retention) << ", variance reduction " << fmt("%.1f", reduction)
         << "x, " << fmt("%.2f", secs) << " s";
  return {ok, detail.str()};
}

Outcome structure_fill() {
  StructureFillParams p;
  p.method = FillMethod::harmonic;
  Mask box(32, 24);
  for (int y = 6; y < 17; ++y)
    for (int x = 9; x < 21; ++x) box.set(x, y, true);
  const ImageBuffer ramp = synthetic::ramp(32, 24, 0.1, 0.02, 0.01);
  const double ramp_err = sflow::test::max_abs_diff(complete_structure(apply_mask(ramp, box), box, p), ramp);

  Rng rng(106);
  int violations = 0, instances = 0;
  p.tol = 1e-10;
  while (instances < 100) {
    const int w = rng.uniform_int(8, 24), h = rng.uniform_int(8, 24);
    const ImageBuffer img = sflow::test::random_image(w, h, 1, rng);
    const Mask m = generate_irregular_mask(w, h, rng.uniform(0.05, 0.6), static_cast<std::uint64_t>(rng.uniform_int(0, 1 << 30)));
    if (!m.any_hole() || m.hole_count() == m.pixel_count()) continue;
    ++instances;
    const ImageBuffer out = complete_structure(apply_mask(img, m), m, p);
    double lo = 1, hi = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (!m.valid(x, y)) continue;
        const bool boundary = (x > 0 && m.hole(x - 1, y)) || (x + 1 < w && m.hole(x + 1, y)) ||
                              (y > 0 && m.hole(x, y - 1)) || (y + 1 < h && m.hole(x, y + 1));
        if (boundary) {
          lo = std::min(lo, img.at(x, y));
          hi = std::max(hi, img.at(x, y));
        }
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (m.hole(x, y) && (out.at(x, y) < lo - 1e-9 || out.at(x, y) > hi + 1e-9)) ++violations;
  }
  return {ramp_err < 1e-3 && violations == 0,
          "ramp max error " + fmt("%.2e", ramp_err) + ", maximum-principle violations " + std::to_string(violations) +
              " over " + std::to_string(instances) + " instances"};
}

// ---- pipeline ----

Outcome preservation() {
  const auto items = synthetic::corpus();
  const InpaintConfig cfg;
  std::size_t changed = 0, checked = 0;
  for (const auto& item : items) {
    const ImageBuffer out = inpaint(item.image, item.mask, cfg).i_hat;
    for (int y = 0; y < out.height(); ++y)
      for (int x = 0; x < out.width(); ++x)
        if (item.mask.valid(x, y))
          for (int c = 0; c < out.channels(); ++c) {
            ++checked;
            if (out.at(x, y, c) != item.image.at(x, y, c)) ++changed;
          }
  }
  return {changed == 0, std::to_string(items.size()) + " images, " + std::to_string(checked) + " valid samples, " +
                            std::to_string(changed) + " altered"};
}

Outcome ablation() {
  const auto t0 = Clock::now();
  AblationSummary s;
  const auto report = bench_ablation(BenchOptions{}, &s);
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << s.images << " images (max hole " << fmt("%.0f", 100 * s.max_ratio) << "%), full " << fmt("%.2f", s.full)
    << " dB, no_structure " << fmt("%.2f", s.no_structure) << ", no_flow " << fmt("%.2f", s.no_flow)
    << "; periodic (" << s.periodic_images << ") full " << fmt("%.2f", s.periodic_full) << " vs no_flow "
    << fmt("%.2f", s.periodic_no_flow) << "; " << fmt("%.0f", secs) << " s";
  const bool ok = s.images >= 20 && s.max_ratio <= 0.6 && s.full >= s.no_structure && s.full >= s.no_flow &&
                  s.periodic_images > 0 && s.periodic_full - s.periodic_no_flow >= 3.0 && secs < 600 &&
                  report["pass"].get<bool>();
  return {ok, d.str()};
}

Outcome sampler() {
  const auto t0 = Clock::now();
  BenchOptions opt;
  FlowOptConfig cfg = opt.config.flowopt;
  cfg.kernel = opt.sampler_kernel;
  const auto trials = sampler_trials(50, opt.trial_seed, cfg);
  const double secs = seconds_since(t0);
  int wins = 0;
  double min_disp = 1e9;
  for (const auto& t : trials) {
    if (t.gaussian < t.bilinear) ++wins;
    min_disp = std::min(min_disp, t.displacement);
  }
  const bool ok = trials.size() == 50 && min_disp > 2.0 && wins >= 40 && secs < 300;
  return {ok, std::to_string(wins) + "/" + std::to_string(trials.size()) + " gaussian wins, min start offset " +
                  fmt("%.2f", min_disp) + " px, " + fmt("%.0f", secs) + " s"};
}

// ---- metrics and formats ----

double ssim_ref(const ImageBuffer& a, const ImageBuffer& b) {
  const double c1 = 1e-4, c2 = 9e-4;
  double total = 0;
  int count = 0;
  for (int c = 0; c < a.channels(); ++c)
    for (int y0 = 0; y0 + 8 <= a.height(); ++y0)
      for (int x0 = 0; x0 + 8 <= a.width(); ++x0) {
        double ma = 0, mb = 0;
        for (int y = y0; y < y0 + 8; ++y)
          for (int x = x0; x < x0 + 8; ++x) {
            ma += a.at(x, y, c) / 64;
            mb += b.at(x, y, c) / 64;
          }
        double va = 0, vb = 0, cov = 0;
        for (int y = y0; y < y0 + 8; ++y)
          for (int x = x0; x < x0 + 8; ++x) {
            va += (a.at(x, y, c) - ma) * (a.at(x, y, c) - ma) / 64;
            vb += (b.at(x, y, c) - mb) * (b.at(x, y, c) - mb) / 64;
            cov += (a.at(x, y, c) - ma) * (b.at(x, y, c) - mb) / 64;
          }
        total += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
  return total / count;
}

Outcome metrics() {
  const ImageBuffer lo(32, 32, 3, 0.5), hi(32, 32, 3, 0.5 + 1.0 / 255.0);
  const double p = psnr(lo, hi);
  Rng rng(107);
  const ImageBuffer a = sflow::test::random_image(24, 20, 3, rng);
  const double self = ssim(a, a);
  double worst = 0;
  for (int t = 0; t < 10; ++t) {
    const ImageBuffer x = sflow::test::random_image(21, 18, t % 2 ? 1 : 3, rng);
    ImageBuffer y = x;
    for (double& v : y.data()) v = std::clamp(v + rng.uniform(-0.2, 0.2), 0.0, 1.0);
    double mse = 0;
    for (std::size_t i = 0; i < x.data().size(); ++i) mse += (x.data()[i] - y.data()[i]) * (x.data()[i] - y.data()[i]);
    mse /= static_cast<double>(x.data().size());
    worst = std::max(worst, std::abs(psnr(x, y) - 10 * std::log10(1 / mse)));
    worst = std::max(worst, std::abs(ssim(x, y) - ssim_ref(x, y)));
  }
  return {std::abs(p - 48.13) <= 0.01 && self == 1.0 && worst <= 1e-9,
          "psnr " + fmt("%.4f", p) + " dB, ssim(a,a) " + fmt("%.1f", self) + ", reference diff " + fmt("%.1e", worst)};
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"sflow"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome formats() {
  namespace fs = std::filesystem;
  sflow::test::TempDir dir("acceptance");
  Rng rng(108);
  bool ok = true;
  std::ostringstream d;

  FlowField flow(37, 23);
  for (auto& v : flow.vectors()) {
    v.dx = static_cast<float>(rng.uniform(-40, 40));
    v.dy = static_cast<float>(rng.uniform(-40, 40));
  }
  write_flo(flow, dir / "f.flo");
  const FlowField back = read_flo(dir / "f.flo");
  const bool flo_ok = back == flow && encode_flo(back) == read_file(dir / "f.flo");
  ok = ok && flo_ok;
  d << ".flo " << (flo_ok ? "exact" : "differs");

  bool png_ok = true;
  for (int c : {1, 3}) {
    ImageBuffer img(29, 17, c);
    for (double& v : img.data()) v = rng.uniform_int(0, 255) / 255.0;
    const fs::path path = dir / ("i" + std::to_string(c) + ".png");
    save_image(img, path);
    const ImageBuffer again = load_image(path);
    png_ok = png_ok && again == img && encode_png(again) == read_file(path);
  }
  const Mask m = generate_irregular_mask(40, 30, 0.3, 5);
  save_mask(m, dir / "m.png");
  png_ok = png_ok && load_mask(dir / "m.png") == m;
  ok = ok && png_ok;
  d << ", png " << (png_ok ? "exact" : "differs");

  save_image(synthetic::bricks(48, 48, 12, 6, 1, 3), dir / "in.png");
  save_mask(generate_irregular_mask(48, 48, 0.25, 3), dir / "hole.png");
  const std::vector<std::string> outputs = {"s_hat.png", "flow.flo", "flow.png", "result.png"};
  std::vector<std::vector<std::uint8_t>> first;
  bool cli_ok = true;
  for (int run = 0; run < 2; ++run) {
    const fs::path o = dir / ("run" + std::to_string(run));
    cli_ok = cli_ok && run_cli({"inpaint", "--mask", (dir / "hole.png").string(), "--seed", "7",
                                (dir / "in.png").string(), o.string()}) == 0;
    for (std::size_t i = 0; i < outputs.size() && cli_ok; ++i) {
      const auto bytes = read_file(o / outputs[i]);
      if (run == 0) first.push_back(bytes);
      else cli_ok = cli_ok && bytes == first[i];
    }
  }
  ok = ok && cli_ok;
  d << ", cli seed 7 " << (cli_ok ? "identical" : "differs");
  return {ok, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"kernel normalization", normalization},
      {"sampler gradients", gradients},
      {"correctness loss anchor", anchor},
      {"best-match oracle", best_match},
      {"objective linearity", linearity},
      {"rtv properties", rtv},
      {"structure fill", structure_fill},
      {"pipeline preservation", preservation},
      {"variant ablation", ablation},
      {"sampler comparison", sampler},
      {"metrics", metrics},
      {"formats and cli determinism", formats},
  };
  int failed = 0;
  for (const auto& [name, fn] : checks) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (checks.size() - failed) << "/" << checks.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
