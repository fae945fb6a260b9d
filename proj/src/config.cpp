#include "sflow/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "sflow/error.hpp"

namespace sflow {

using nlohmann::json;

namespace {

json kernel_json(const SamplingKernel& k) { return {{"n", k.n}, {"sigma", k.sigma}}; }

// Reads the keys of one JSON object into typed fields, rejecting anything
// unexpected.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) fail(std::string(key) + " must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) fail(std::string(key) + " must be an integer");
      if (std::is_unsigned_v<T> && !it->is_number_unsigned()) fail(std::string(key) + " must be non-negative");
    } else {
      if (!it->is_number()) fail(std::string(key) + " must be a number");
    }
    out = it->template get<T>();
  }

  void kernel(const char* key, SamplingKernel& k) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    Reader r(*it, where_ + "." + key);
    r.get("n", k.n);
    r.get("sigma", k.sigma);
    r.finish();
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail("unknown key '" + key + "'");
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::invalid_config, where_ + ": " + msg);
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

const char* method_name(FillMethod m) { return m == FillMethod::tv ? "tv" : "harmonic"; }

}  // namespace

json config_to_json(const InpaintConfig& cfg) {
  const auto& r = cfg.rtv;
  const auto& f = cfg.fill;
  const auto& o = cfg.flowopt;
  const auto& w = cfg.weights;
  return {
      {"rtv",
       {{"sigma", r.sigma},
        {"lambda", r.lambda},
        {"iterations", r.iterations},
        {"eps", r.eps},
        {"cg_tol", r.cg_tol},
        {"cg_max_iters", r.cg_max_iters}}},
      {"fill",
       {{"method", method_name(f.method)},
        {"tol", f.tol},
        {"max_iters", f.max_iters},
        {"tv_eps", f.tv_eps},
        {"tv_outer_iters", f.tv_outer_iters},
        {"tv_change_tol", f.tv_change_tol}}},
      {"flowopt",
       {{"pyramid_levels", o.pyramid_levels},
        {"steps_per_level", o.steps_per_level},
        {"step_size", o.step_size},
        {"smoothness_weight", o.smoothness_weight},
        {"sobolev", o.sobolev},
        {"kernel", kernel_json(o.kernel)},
        {"patch", o.patch},
        {"nnf_iters", o.nnf_iters},
        {"em_iters", o.em_iters},
        {"structure_weight", o.structure_weight},
        {"render_kernel", kernel_json(o.render_kernel)}}},
      {"weights",
       {{"l1_s", w.l1_s}, {"adv_s", w.adv_s}, {"l1_t", w.l1_t}, {"corr_t", w.corr_t}, {"adv_t", w.adv_t}}},
      {"seed", cfg.seed},
  };
}

InpaintConfig config_from_json(const json& j, const InpaintConfig& base) {
  InpaintConfig cfg = base;
  Reader top(j, "config");
  if (const json* r = top.child("rtv")) {
    Reader rd(*r, "rtv");
    rd.get("sigma", cfg.rtv.sigma);
    rd.get("lambda", cfg.rtv.lambda);
    rd.get("iterations", cfg.rtv.iterations);
    rd.get("eps", cfg.rtv.eps);
    rd.get("cg_tol", cfg.rtv.cg_tol);
    rd.get("cg_max_iters", cfg.rtv.cg_max_iters);
    rd.finish();
  }
  if (const json* f = top.child("fill")) {
    Reader rd(*f, "fill");
    if (const json* m = rd.child("method")) {
      if (*m == "tv") {
        cfg.fill.method = FillMethod::tv;
      } else if (*m == "harmonic") {
        cfg.fill.method = FillMethod::harmonic;
      } else {
        rd.fail("method must be \"tv\" or \"harmonic\"");
      }
    }
    rd.get("tol", cfg.fill.tol);
    rd.get("max_iters", cfg.fill.max_iters);
    rd.get("tv_eps", cfg.fill.tv_eps);
    rd.get("tv_outer_iters", cfg.fill.tv_outer_iters);
    rd.get("tv_change_tol", cfg.fill.tv_change_tol);
    rd.finish();
  }
  if (const json* o = top.child("flowopt")) {
    Reader rd(*o, "flowopt");
    rd.get("pyramid_levels", cfg.flowopt.pyramid_levels);
    rd.get("steps_per_level", cfg.flowopt.steps_per_level);
    rd.get("step_size", cfg.flowopt.step_size);
    rd.get("smoothness_weight", cfg.flowopt.smoothness_weight);
    rd.get("sobolev", cfg.flowopt.sobolev);
    rd.kernel("kernel", cfg.flowopt.kernel);
    rd.get("patch", cfg.flowopt.patch);
    rd.get("nnf_iters", cfg.flowopt.nnf_iters);
    rd.get("em_iters", cfg.flowopt.em_iters);
    rd.get("structure_weight", cfg.flowopt.structure_weight);
    rd.kernel("render_kernel", cfg.flowopt.render_kernel);
    rd.finish();
  }
  if (const json* w = top.child("weights")) {
    Reader rd(*w, "weights");
    rd.get("l1_s", cfg.weights.l1_s);
    rd.get("adv_s", cfg.weights.adv_s);
    rd.get("l1_t", cfg.weights.l1_t);
    rd.get("corr_t", cfg.weights.corr_t);
    rd.get("adv_t", cfg.weights.adv_t);
    rd.finish();
  }
  top.get("seed", cfg.seed);
  top.finish();
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::invalid_config, e.what());
  }
  return cfg;
}

InpaintConfig parse_config(const std::string& text, const InpaintConfig& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::invalid_argument, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j, base);
}

InpaintConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace sflow
