#include <cmath>
#include <vector>

#include "doctest.h"
#include "sflow/rtv.hpp"
#include "sflow/synthetic.hpp"
#include "test_util.hpp"

using namespace sflow;

namespace {

// Dense Gaussian elimination with partial pivoting.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t k = i + 1; k < n; ++k) acc -= a[i][k] * x[k];
    x[i] = acc / a[i][i];
  }
  return x;
}

double region_variance(const ImageBuffer& img, int x0, int x1, int y0, int y1) {
  double s = 0, s2 = 0;
  int n = 0;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      s += img.at(x, y);
      s2 += img.at(x, y) * img.at(x, y);
      ++n;
    }
  const double m = s / n;
  return s2 / n - m * m;
}

// Mean of the four columns right of the edge minus the four columns left.
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

double mean(const ImageBuffer& img) {
  double s = 0;
  for (double v : img.data()) s += v;
  return s / static_cast<double>(img.data().size());
}

}  // namespace

TEST_CASE("rtv_smooth fixed points") {
  RtvParams p;
  const ImageBuffer flat(24, 20, 3, 0.42);
  CHECK(rtv_smooth(flat, p) == flat);

  Rng rng(1);
  const ImageBuffer noisy = sflow::test::random_image(16, 16, 1, rng);
  p.sigma = 0.0;
  CHECK(rtv_smooth(noisy, p) == noisy);
}

TEST_CASE("rtv_smooth removes texture and keeps the step") {
  const ImageBuffer img = synthetic::step_edge(64, 64, 32, 0.2, 0.8, 0.1, 99);
  RtvParams p;
  p.sigma = 3.0;
  const ImageBuffer out = rtv_smooth(img, p);
  REQUIRE(out.same_shape(img));
  const double var_in = region_variance(img, 4, 26, 4, 60);
  const double var_out = region_variance(out, 4, 26, 4, 60);
  CHECK(var_in >= 10.0 * var_out);
  CHECK(step_amplitude(out, 32) >= 0.8 * 0.6);
  CHECK(std::abs(mean(out) - mean(img)) <= 0.01 * mean(img));
  CHECK(rtv_smooth(img, p) == out);
}

TEST_CASE("rtv total variation is non-increasing in sigma") {
  const std::vector<ImageBuffer> images = {
      synthetic::step_edge(48, 48, 20, 0.3, 0.7, 0.12, 5),
      synthetic::bricks(48, 48, 16, 8, 2, 1),
      synthetic::smooth_noise(48, 48, 1.0, 0.1, 0.9, 1, 8),
      synthetic::dot_grid(48, 48, 6, 1.5, 3),
  };
  for (const ImageBuffer& img : images) {
    double prev = std::numeric_limits<double>::infinity();
    for (double sigma : {1.0, 3.0, 6.0, 9.0}) {
      RtvParams p;
      p.sigma = sigma;
      const ImageBuffer out = rtv_smooth(img, p);
      const double tv = total_variation(out);
      // Once an image is flattened the remaining TV is CG residual noise.
      CHECK(tv <= prev + 1e-6);
      prev = tv;
      CHECK(std::abs(mean(out) - mean(img)) <= 0.01 * mean(img));
    }
  }
}

TEST_CASE("rtv color channels share edges") {
  ImageBuffer img(40, 24, 3);
  Rng rng(4);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 40; ++x) {
      const bool right = x >= 17;
      img.at(x, y, 0) = std::clamp((right ? 0.7 : 0.2) + rng.uniform(-0.08, 0.08), 0.0, 1.0);
      img.at(x, y, 1) = std::clamp((right ? 0.3 : 0.6) + rng.uniform(-0.08, 0.08), 0.0, 1.0);
      img.at(x, y, 2) = std::clamp((right ? 0.9 : 0.5) + rng.uniform(-0.08, 0.08), 0.0, 1.0);
    }
  const ImageBuffer out = rtv_smooth(img, RtvParams{});
  for (int y = 2; y < 22; ++y) {
    for (int c = 0; c < 3; ++c) {
      int best = 0;
      double best_jump = -1;
      for (int x = 0; x + 1 < 40; ++x) {
        const double jump = std::abs(out.at(x + 1, y, c) - out.at(x, y, c));
        if (jump > best_jump) {
          best_jump = jump;
          best = x;
        }
      }
      CHECK(best == 16);
    }
  }
}

TEST_CASE("windowed variations") {
  SUBCASE("constant input") {
    const auto v = windowed_variations(ImageBuffer(12, 9, 1, 0.3), 3.0);
    for (const FeatureMap* m : {&v.dx, &v.dy, &v.lx, &v.ly})
      for (double x : m->data()) CHECK(x == 0.0);
  }
  SUBCASE("ramp has aligned gradients") {
    const auto v = windowed_variations(synthetic::ramp(32, 16, 0.1, 0.02, 0.01), 2.0);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 32; ++x) {
        CHECK(std::abs(v.lx.value(x, y, 0)) == doctest::Approx(v.dx.value(x, y, 0)).epsilon(1e-12));
        CHECK(std::abs(v.ly.value(x, y, 0)) == doctest::Approx(v.dy.value(x, y, 0)).epsilon(1e-12));
      }
    CHECK(v.dx.value(10, 8, 0) == doctest::Approx(0.02).epsilon(1e-9));
  }
  SUBCASE("period-2 stripes cancel") {
    ImageBuffer img(40, 8, 1);
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 40; ++x) img.at(x, y) = x % 2 == 0 ? 0.2 : 0.8;
    const auto v = windowed_variations(img, 3.0);
    for (int x = 12; x < 28; ++x) {
      CHECK(v.dx.value(x, 4, 0) > 0.5);
      CHECK(std::abs(v.lx.value(x, 4, 0)) < 0.01);
    }
  }
  SUBCASE("|L| <= D for random input") {
    Rng rng(17);
    const ImageBuffer img = sflow::test::random_image(20, 20, 1, rng);
    for (double sigma : {0.0, 0.7, 2.0, 5.0}) {
      const auto v = windowed_variations(img, sigma);
      for (std::size_t i = 0; i < v.dx.data().size(); ++i) {
        CHECK(v.dx.data()[i] >= 0.0);
        CHECK(std::abs(v.lx.data()[i]) <= v.dx.data()[i] + 1e-12);
        CHECK(std::abs(v.ly.data()[i]) <= v.dy.data()[i] + 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(windowed_variations(ImageBuffer(4, 4, 3), 1.0), Error);
}

TEST_CASE("screened Poisson solve") {
  Rng rng(21);
  const ImageBuffer rhs = sflow::test::random_image(4, 4, 1, rng);

  SUBCASE("zero weights give the identity") {
    const FeatureMap zero(4, 4, 1, 0.0);
    CHECK(solve_screened_poisson(zero, zero, rhs, 0.5, 1e-10) == rhs);
  }
  SUBCASE("vanishing lambda") {
    const FeatureMap ones(4, 4, 1, 1.0);
    const ImageBuffer out = solve_screened_poisson(ones, ones, rhs, 1e-9, 1e-8);
    CHECK(sflow::test::max_abs_diff(out, rhs) < 1e-6);
  }
  SUBCASE("matches a dense direct solve") {
    const double lambda = 0.7;
    FeatureMap wx(4, 4, 1), wy(4, 4, 1);
    for (double& v : wx.data()) v = rng.uniform(0.1, 3.0);
    for (double& v : wy.data()) v = rng.uniform(0.1, 3.0);
    for (const bool uniform : {true, false}) {
      FeatureMap ux = wx, uy = wy;
      if (uniform) {
        std::fill(ux.data().begin(), ux.data().end(), 1.3);
        std::fill(uy.data().begin(), uy.data().end(), 1.3);
      }
      std::vector<std::vector<double>> a(16, std::vector<double>(16, 0.0));
      std::vector<double> b(16);
      auto id = [](int x, int y) { return static_cast<std::size_t>(y * 4 + x); };
      for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
          a[id(x, y)][id(x, y)] += 1.0;
          b[id(x, y)] = rhs.at(x, y);
          auto couple = [&](int x2, int y2, double w) {
            a[id(x, y)][id(x, y)] += lambda * w;
            a[id(x, y)][id(x2, y2)] -= lambda * w;
            a[id(x2, y2)][id(x2, y2)] += lambda * w;
            a[id(x2, y2)][id(x, y)] -= lambda * w;
          };
          if (x + 1 < 4) couple(x + 1, y, ux.value(x, y, 0));
          if (y + 1 < 4) couple(x, y + 1, uy.value(x, y, 0));
        }
      const std::vector<double> ref = dense_solve(a, b);
      const ImageBuffer out = solve_screened_poisson(ux, uy, rhs, lambda, 1e-12);
      for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) CHECK(std::abs(out.at(x, y) - ref[id(x, y)]) < 1e-6);
    }
  }
  SUBCASE("rejects bad weights") {
    FeatureMap bad(4, 4, 1, 1.0);
    bad.value(1, 1, 0) = -1.0;
    CHECK_THROWS_AS(solve_screened_poisson(bad, bad, rhs, 1.0, 1e-6), Error);
    CHECK_THROWS_AS(solve_screened_poisson(FeatureMap(3, 4, 1), FeatureMap(3, 4, 1), rhs, 1.0, 1e-6),
                    Error);
  }
  SUBCASE("iteration cap reports divergence") {
    FeatureMap stiff(4, 4, 1);
    for (double& v : stiff.data()) v = rng.uniform(1.0, 1e4);
    try {
      solve_screened_poisson(stiff, stiff, rhs, 1.0, 1e-14, 1);
      FAIL("expected SolverDivergence");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::solver_divergence);
    }
  }
}
