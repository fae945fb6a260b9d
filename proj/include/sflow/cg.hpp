#pragma once

#include <functional>
#include <span>
#include <vector>

namespace sflow {

struct CgReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

using LinearOp = std::function<void(std::span<const double>, std::span<double>)>;

// Preconditioned conjugate gradient for a symmetric positive-definite
// operator. `x` holds the initial guess and receives the solution. Stops once
// ||b - A x|| <= tol * ||b||.
CgReport conjugate_gradient(const LinearOp& apply, const LinearOp& precondition,
                            std::span<const double> b, std::span<double> x, double tol,
                            int max_iters);

// Symmetric 5-point operator on a W x H grid:
//   (A u)_p = diag_p u_p - sum_q c_pq u_q
// where east[p] couples p with its right neighbour and south[p] with the one
// below. Couplings must be >= 0 and diag_p >= sum of couplings (M-matrix).
class FivePointSystem {
 public:
  FivePointSystem(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return diag_.size(); }

  std::vector<double>& diag() noexcept { return diag_; }
  std::vector<double>& east() noexcept { return east_; }
  std::vector<double>& south() noexcept { return south_; }

  void apply(std::span<const double> u, std::span<double> out) const;

  // Solves with CG preconditioned by the incomplete Cholesky factor IC(0).
  CgReport solve(std::span<const double> b, std::span<double> x, double tol, int max_iters) const;

 private:
  int width_;
  int height_;
  std::vector<double> diag_, east_, south_;
};

}  // namespace sflow
