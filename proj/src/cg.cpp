#include "sflow/cg.hpp"

#include <cmath>
#include <numeric>

#include "sflow/error.hpp"

namespace sflow {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

CgReport conjugate_gradient(const LinearOp& apply, const LinearOp& precondition,
                            std::span<const double> b, std::span<double> x, double tol,
                            int max_iters) {
  const std::size_t n = b.size();
  CgReport report;
  const double b_norm = std::sqrt(dot(b, b));
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    report.converged = true;
    return report;
  }

  std::vector<double> r(n), z(n), p(n), ap(n);
  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  report.relative_residual = std::sqrt(dot(r, r)) / b_norm;
  if (report.relative_residual <= tol) {
    report.converged = true;
    return report;
  }
  precondition(r, z);
  p = z;
  double rz = dot(r, z);

  for (int it = 1; it <= max_iters; ++it) {
    apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0) || !std::isfinite(pap)) break;
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    report.iterations = it;
    report.relative_residual = std::sqrt(dot(r, r)) / b_norm;
    if (report.relative_residual <= tol) {
      report.converged = true;
      break;
    }
    precondition(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return report;
}

FivePointSystem::FivePointSystem(int width, int height)
    : width_(width),
      height_(height),
      diag_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0),
      east_(diag_.size(), 0.0),
      south_(diag_.size(), 0.0) {}

void FivePointSystem::apply(std::span<const double> u, std::span<double> out) const {
  const std::size_t w = static_cast<std::size_t>(width_);
  const std::size_t n = diag_.size();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = diag_[i] * u[i];
    const std::size_t x = i % w;
    if (x + 1 < w) acc -= east_[i] * u[i + 1];
    if (x > 0) acc -= east_[i - 1] * u[i - 1];
    if (i + w < n) acc -= south_[i] * u[i + w];
    if (i >= w) acc -= south_[i - w] * u[i - w];
    out[i] = acc;
  }
}

CgReport FivePointSystem::solve(std::span<const double> b, std::span<double> x, double tol,
                                int max_iters) const {
  const std::size_t w = static_cast<std::size_t>(width_);
  const std::size_t n = diag_.size();

  // IC(0): L has the lower sparsity of A; lw[i] = L(i, i-1), ln[i] = L(i, i-w).
  std::vector<double> ld(n), lw(n, 0.0), ln(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i % w > 0) lw[i] = -east_[i - 1] / ld[i - 1];
    if (i >= w) ln[i] = -south_[i - w] / ld[i - w];
    const double pivot = diag_[i] - lw[i] * lw[i] - ln[i] * ln[i];
    if (!(pivot > 0.0)) {
      throw Error(ErrorCode::solver_divergence, "incomplete Cholesky breakdown");
    }
    ld[i] = std::sqrt(pivot);
  }
  auto precondition = [&](std::span<const double> r, std::span<double> z) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = r[i];
      if (i % w > 0) acc -= lw[i] * z[i - 1];
      if (i >= w) acc -= ln[i] * z[i - w];
      z[i] = acc / ld[i];
    }
    for (std::size_t i = n; i-- > 0;) {
      double acc = z[i];
      if ((i + 1) % w != 0 && i + 1 < n) acc -= lw[i + 1] * z[i + 1];
      if (i + w < n) acc -= ln[i + w] * z[i + w];
      z[i] = acc / ld[i];
    }
  };
  auto apply_op = [this](std::span<const double> u, std::span<double> out) { apply(u, out); };
  return conjugate_gradient(apply_op, precondition, b, x, tol, max_iters);
}

}  // namespace sflow
