#include <cmath>

#include "doctest.h"
#include "sflow/losses.hpp"
#include "sflow/masks.hpp"
#include "sflow/rtv.hpp"
#include "sflow/structure.hpp"
#include "sflow/synthetic.hpp"
#include "test_util.hpp"

using namespace sflow;

namespace {

Mask box_mask(int w, int h, int x0, int y0, int x1, int y1) {
  Mask m(w, h);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) m.set(x, y, true);
  return m;
}

// Largest horizontal jump inside the hole rows, per row, minimum over rows.
double weakest_row_jump(const ImageBuffer& img, int y0, int y1) {
  double weakest = 1e9;
  for (int y = y0; y < y1; ++y) {
    double best = 0;
    for (int x = 0; x + 1 < img.width(); ++x) best = std::max(best, std::abs(img.at(x + 1, y) - img.at(x, y)));
    weakest = std::min(weakest, best);
  }
  return weakest;
}

double hole_l1(const ImageBuffer& a, const ImageBuffer& b, const Mask& m) {
  double s = 0;
  std::size_t n = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      if (m.hole(x, y))
        for (int c = 0; c < a.channels(); ++c) {
          s += std::abs(a.at(x, y, c) - b.at(x, y, c));
          ++n;
        }
  return s / static_cast<double>(n);
}

}  // namespace

TEST_CASE("complete_structure on analytic inputs") {
  const Mask m = box_mask(32, 24, 9, 6, 21, 17);
  for (const FillMethod method : {FillMethod::harmonic, FillMethod::tv}) {
    StructureFillParams p;
    p.method = method;
    const ImageBuffer flat(32, 24, 3, 0.35);
    const ImageBuffer filled_flat = complete_structure(apply_mask(flat, m), m, p);
    CHECK(filled_flat == flat);
  }

  const ImageBuffer ramp = synthetic::ramp(32, 24, 0.1, 0.02, 0.01);
  StructureFillParams harmonic;
  harmonic.method = FillMethod::harmonic;
  StructureFillReport rep;
  const ImageBuffer filled = complete_structure(apply_mask(ramp, m), m, harmonic, &rep);
  CHECK(sflow::test::max_abs_diff(filled, ramp) < 1e-3);
  CHECK(rep.residual <= harmonic.tol);

  SUBCASE("valid pixels are untouched") {
    Rng rng(3);
    const ImageBuffer img = sflow::test::random_image(32, 24, 3, rng);
    for (const FillMethod method : {FillMethod::harmonic, FillMethod::tv}) {
      StructureFillParams p;
      p.method = method;
      const ImageBuffer out = complete_structure(apply_mask(img, m), m, p);
      const ImageBuffer masked = apply_mask(img, m);
      for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 32; ++x)
          if (m.valid(x, y))
            for (int c = 0; c < 3; ++c) CHECK(out.at(x, y, c) == masked.at(x, y, c));
    }
  }
}

TEST_CASE("tv fill keeps a step sharp where harmonic blurs it") {
  const ImageBuffer step = synthetic::step_edge(40, 32, 20, 0.2, 0.8, 0.0, 1);
  const Mask m = box_mask(40, 32, 12, 8, 28, 24);
  StructureFillParams tv, harm;
  harm.method = FillMethod::harmonic;
  StructureFillReport rep;
  const ImageBuffer out_tv = complete_structure(apply_mask(step, m), m, tv, &rep);
  const ImageBuffer out_h = complete_structure(apply_mask(step, m), m, harm);
  const double jump_tv = weakest_row_jump(out_tv, 8, 24);
  const double jump_h = weakest_row_jump(out_h, 8, 24);
  MESSAGE("tv jump " << jump_tv << ", harmonic jump " << jump_h << ", outer " << rep.outer_iterations);
  CHECK(jump_tv >= 0.5 * 0.6);
  CHECK(jump_h < 0.5 * 0.6);
  CHECK(rep.residual <= tv.tol);
}

TEST_CASE("harmonic fill obeys the maximum principle") {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const int w = rng.uniform_int(8, 24), h = rng.uniform_int(8, 24);
    const ImageBuffer img = sflow::test::random_image(w, h, 1, rng);
    const Mask m = generate_irregular_mask(w, h, rng.uniform(0.05, 0.6), static_cast<std::uint64_t>(t));
    if (m.hole_count() == m.pixel_count()) continue;
    StructureFillParams p;
    p.method = FillMethod::harmonic;
    p.tol = 1e-10;
    const ImageBuffer out = complete_structure(apply_mask(img, m), m, p);
    double lo = 1, hi = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (!m.valid(x, y)) continue;
        bool boundary = false;
        const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& d : nb) {
          const int qx = x + d[0], qy = y + d[1];
          if (qx >= 0 && qy >= 0 && qx < w && qy < h && m.hole(qx, qy)) boundary = true;
        }
        if (boundary) {
          lo = std::min(lo, img.at(x, y));
          hi = std::max(hi, img.at(x, y));
        }
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (m.hole(x, y)) {
          CHECK(out.at(x, y) >= lo - 1e-9);
          CHECK(out.at(x, y) <= hi + 1e-9);
        }
  }
}

TEST_CASE("structure fill improves on zero fill") {
  for (const auto& item : synthetic::corpus(12, 5)) {
    const ImageBuffer s_gt = rtv_smooth(item.image, RtvParams{});
    const ImageBuffer s_in = apply_mask(s_gt, item.mask);
    const ImageBuffer s_hat = complete_structure(s_in, item.mask);
    CHECK(hole_l1(s_hat, s_gt, item.mask) < hole_l1(s_in, s_gt, item.mask));
  }
}

TEST_CASE("complete_structure errors and composite") {
  CHECK_THROWS_AS(complete_structure(ImageBuffer(8, 8, 1), Mask(8, 8, true)), Error);
  try {
    complete_structure(ImageBuffer(8, 8, 1), Mask(8, 8, true));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::isolated_hole);
  }
  CHECK_THROWS_AS(complete_structure(ImageBuffer(8, 8, 1), Mask(7, 8)), Error);
  StructureFillParams bad;
  bad.max_iters = 0;
  CHECK_THROWS_AS(complete_structure(ImageBuffer(8, 8, 1), Mask(8, 8), bad), Error);

  StructureFillParams starved;
  starved.max_iters = 1;
  starved.tol = 1e-14;
  Rng rng(5);
  const ImageBuffer img = sflow::test::random_image(24, 24, 1, rng);
  const Mask m = box_mask(24, 24, 4, 4, 20, 20);
  try {
    complete_structure(apply_mask(img, m), m, starved);
    FAIL("expected SolverDivergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::solver_divergence);
  }

  const ImageBuffer a = sflow::test::random_image(6, 5, 3, rng);
  const ImageBuffer b = sflow::test::random_image(6, 5, 3, rng);
  CHECK(composite_structure(a, b, Mask(6, 5)) == b);
  CHECK(composite_structure(a, b, Mask(6, 5, true)) == a);
  Mask mixed(6, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 6; ++x) mixed.set(x, y, rng.uniform() < 0.5);
  const ImageBuffer c = composite_structure(a, b, mixed);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 6; ++x)
      for (int ch = 0; ch < 3; ++ch) CHECK(c.at(x, y, ch) == (mixed.hole(x, y) ? a.at(x, y, ch) : b.at(x, y, ch)));
}
