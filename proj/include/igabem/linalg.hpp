#pragma once

#include <Eigen/Dense>

#include "igabem/errors.hpp"

namespace igabem {

/// Direct solve by LU with partial pivoting. Throws NumericalError when a pivot falls
/// below 1e-14 * max|V_ij|.
Eigen::VectorXcd lu_solve(const Eigen::MatrixXcd& V, const Eigen::VectorXcd& rhs);

struct GmresOptions {
  double tol = 1e-10;
  int restart = 50;
  int max_iter = 1000;
};

struct GmresResult {
  Eigen::VectorXcd x;
  int iterations = 0;
  double residual = 0;  // ||V x - rhs|| / ||rhs||
  std::vector<double> history;  // estimated relative residual after each iteration
};

/// Thrown when GMRES exhausts max_iter; still carries the best iterate found.
class GmresNonConvergence : public NumericalError {
 public:
  GmresNonConvergence(const std::string& what, GmresResult best)
      : NumericalError(what), best_(std::move(best)) {}
  const GmresResult& best() const noexcept { return best_; }

 private:
  GmresResult best_;
};

/// Restarted GMRES(m) without preconditioning, zero initial guess.
GmresResult gmres(const Eigen::MatrixXcd& V, const Eigen::VectorXcd& rhs,
                  const GmresOptions& options = {});

}  // namespace igabem
