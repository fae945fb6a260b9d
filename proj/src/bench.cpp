#include "sflow/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sflow/error.hpp"
#include "sflow/losses.hpp"
#include "sflow/synthetic.hpp"

namespace sflow {

using nlohmann::json;

namespace {

double capped_psnr(const ImageBuffer& out, const ImageBuffer& truth, const Mask& m) {
  return std::min(psnr_masked(out, truth, m), kPsnrCap);
}

}  // namespace

json bench_sigma_sweep(const BenchOptions& opt, const std::vector<double>& sigmas) {
  const auto items = synthetic::corpus(opt.corpus_size, opt.corpus_seed);
  json rows = json::array();
  for (const double sigma : sigmas) {
    InpaintConfig cfg = opt.config;
    cfg.rtv.sigma = sigma;
    double p = 0.0, s = 0.0;
    for (const auto& item : items) {
      const InpaintResult r = inpaint(item.image, item.mask, cfg);
      p += capped_psnr(r.i_hat, item.image, item.mask);
      s += ssim_masked(r.i_hat, item.image, item.mask);
    }
    const double n = static_cast<double>(items.size());
    rows.push_back({{"sigma", sigma}, {"psnr", p / n}, {"ssim", s / n}});
  }
  return {{"suite", "sigma-sweep"}, {"images", items.size()}, {"psnr_cap", kPsnrCap}, {"rows", rows}};
}

json bench_ablation(const BenchOptions& opt, AblationSummary* summary) {
  const auto items = synthetic::corpus(opt.corpus_size, opt.corpus_seed);
  AblationSummary s;
  json per_image = json::array();
  for (const auto& item : items) {
    const double full = capped_psnr(inpaint(item.image, item.mask, opt.config).i_hat, item.image, item.mask);
    const double nos = capped_psnr(inpaint(item.image, item.mask, opt.config, PipelineVariant::no_structure).i_hat,
                                   item.image, item.mask);
    const double nof = capped_psnr(inpaint(item.image, item.mask, opt.config, PipelineVariant::no_flow).i_hat,
                                   item.image, item.mask);
    per_image.push_back({{"name", item.name},
                         {"periodic", item.periodic},
                         {"hole_ratio", item.mask.ratio()},
                         {"full", full},
                         {"no_structure", nos},
                         {"no_flow", nof}});
    s.full += full;
    s.no_structure += nos;
    s.no_flow += nof;
    s.max_ratio = std::max(s.max_ratio, item.mask.ratio());
    if (item.periodic) {
      s.periodic_full += full;
      s.periodic_no_flow += nof;
      ++s.periodic_images;
    }
  }
  s.images = static_cast<int>(items.size());
  if (s.images > 0) {
    s.full /= s.images;
    s.no_structure /= s.images;
    s.no_flow /= s.images;
  }
  if (s.periodic_images > 0) {
    s.periodic_full /= s.periodic_images;
    s.periodic_no_flow /= s.periodic_images;
  }
  const double gain = s.periodic_full - s.periodic_no_flow;
  const json invariants = json::array({
      {{"name", "full >= no_structure"}, {"pass", s.full >= s.no_structure}},
      {{"name", "full >= no_flow"}, {"pass", s.full >= s.no_flow}},
      {{"name", "periodic: full - no_flow >= 3 dB"}, {"pass", s.periodic_images > 0 && gain >= 3.0}},
  });
  bool pass = true;
  for (const auto& inv : invariants) pass = pass && inv["pass"].get<bool>();
  if (summary != nullptr) *summary = s;
  return {{"suite", "ablation"},
          {"images", s.images},
          {"periodic_images", s.periodic_images},
          {"max_hole_ratio", s.max_ratio},
          {"psnr_cap", kPsnrCap},
          {"mean_psnr", {{"full", s.full}, {"no_structure", s.no_structure}, {"no_flow", s.no_flow}}},
          {"periodic_mean_psnr", {{"full", s.periodic_full}, {"no_flow", s.periodic_no_flow}, {"gain", gain}}},
          {"invariants", invariants},
          {"pass", pass},
          {"per_image", per_image}};
}

std::vector<SamplerTrial> sampler_trials(int trials, std::uint64_t seed, const FlowOptConfig& cfg) {
  constexpr int kSize = 56;
  constexpr int kHole = 12;
  constexpr int kHole0 = (kSize - kHole) / 2;
  std::vector<SamplerTrial> out;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed * 1000003 + static_cast<std::uint64_t>(t));
    const ImageBuffer base = synthetic::smooth_noise(kSize, kSize, 1.0, 0.0, 1.0, 1, rng.uniform_int(0, 1 << 30));
    const double angle = rng.uniform(0.0, 2 * std::numbers::pi);
    const int tx = static_cast<int>(std::lround(20 * std::cos(angle)));
    const int ty = static_cast<int>(std::lround(20 * std::sin(angle)));
    Mask m(kSize, kSize);
    ImageBuffer img = base;
    for (int y = kHole0; y < kHole0 + kHole; ++y)
      for (int x = kHole0; x < kHole0 + kHole; ++x) {
        m.set(x, y, true);
        img.at(x, y) = base.at(x + tx, y + ty);
      }
    const FeatureMap v = extract_features(img);
    const double da = rng.uniform(0.0, 2 * std::numbers::pi);
    const double dr = rng.uniform(2.5, 4.0);
    FlowField flow0(kSize, kSize);
    for (const Point p : hole_coords(m).coords) flow0.at(p.x, p.y) = {tx + dr * std::cos(da), ty + dr * std::sin(da)};

    const FlowField g = optimize_flow_features(v, v, m, flow0, cfg, cfg.steps_per_level, Sampler::gaussian).flow;
    const FlowField b = optimize_flow_features(v, v, m, flow0, cfg, cfg.steps_per_level, Sampler::bilinear).flow;
    const HoleCoords holes = hole_coords(m);
    const std::vector<double> mu_max = best_match_table(v, v, holes, m);
    auto judge = [&](const FlowField& f) {
      return sampling_correctness_loss(v, v, f, holes, cfg.kernel, m, mu_max, Sampler::bilinear).value;
    };
    out.push_back({dr, judge(g), judge(b)});
  }
  return out;
}

namespace {

json sampler_summary(const std::vector<SamplerTrial>& trials, const SamplingKernel& k, bool rows_too) {
  int wins = 0;
  json rows = json::array();
  for (const auto& t : trials) {
    if (t.gaussian < t.bilinear) ++wins;
    rows.push_back({{"displacement", t.displacement}, {"gaussian", t.gaussian}, {"bilinear", t.bilinear}});
  }
  const double rate = trials.empty() ? 0.0 : static_cast<double>(wins) / static_cast<double>(trials.size());
  json out = {{"kernel", {{"n", k.n}, {"sigma", k.sigma}}},
              {"trials", trials.size()},
              {"gaussian_wins", wins},
              {"win_rate", rate}};
  if (rows_too) out["rows"] = rows;
  return out;
}

}  // namespace

json bench_sampler(const BenchOptions& opt) {
  FlowOptConfig cfg = opt.config.flowopt;
  cfg.kernel = opt.sampler_kernel;
  json primary = sampler_summary(sampler_trials(opt.trials, opt.trial_seed, cfg), cfg.kernel, true);
  json sweep = json::array();
  for (const SamplingKernel& k : opt.sampler_sweep) {
    cfg.kernel = k;
    sweep.push_back(sampler_summary(sampler_trials(opt.trials, opt.trial_seed, cfg), k, false));
  }
  const bool pass = primary["win_rate"].get<double>() >= 0.8;
  return {{"suite", "sampler"}, {"primary", primary}, {"pass", pass}, {"kernel_sweep", sweep}};
}

json run_bench(const std::string& suite, const BenchOptions& opt) {
  if (suite == "sigma-sweep") return bench_sigma_sweep(opt);
  if (suite == "ablation") return bench_ablation(opt);
  if (suite == "sampler") return bench_sampler(opt);
  throw Error(ErrorCode::invalid_argument, "unknown bench suite '" + suite + "'");
}

}  // namespace sflow
