#include "igabem/linalg.hpp"

#include <cmath>
#include <vector>

namespace igabem {

namespace {

using cd = std::complex<double>;

// Complex Givens rotation [c s; -conj(s) c] zeroing b against a.
void make_rotation(const cd& a, const cd& b, double& c, cd& s) {
  const double abs_a = std::abs(a);
  const double r = std::hypot(abs_a, std::abs(b));
  if (r == 0.0) {
    c = 1.0;
    s = 0.0;
  } else if (abs_a == 0.0) {
    c = 0.0;
    s = 1.0;
  } else {
    c = abs_a / r;
    s = (a / abs_a) * std::conj(b) / r;
  }
}

void apply_rotation(double c, const cd& s, cd& x, cd& y) {
  const cd t = c * x + s * y;
  y = -std::conj(s) * x + c * y;
  x = t;
}

}  // namespace

Eigen::VectorXcd lu_solve(const Eigen::MatrixXcd& V, const Eigen::VectorXcd& rhs) {
  if (V.rows() != V.cols() || V.rows() != rhs.size())
    throw ContractError("lu_solve: dimension mismatch");
  if (V.size() == 0) return Eigen::VectorXcd();
  if (!V.allFinite() || !rhs.allFinite()) throw NumericalError("lu_solve: non-finite input");
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(V);
  const double scale = V.cwiseAbs().maxCoeff();
  const double smallest = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(smallest >= 1e-14 * scale))
    throw NumericalError("lu_solve: numerically singular matrix (pivot " + std::to_string(smallest) +
                         ")");
  return lu.solve(rhs);
}

GmresResult gmres(const Eigen::MatrixXcd& V, const Eigen::VectorXcd& rhs,
                  const GmresOptions& options) {
  if (V.rows() != V.cols() || V.rows() != rhs.size())
    throw ContractError("gmres: dimension mismatch");
  if (!(options.tol > 0.0)) throw ContractError("gmres: tol must be positive");
  if (options.restart < 1 || options.max_iter < 0)
    throw ContractError("gmres: restart must be >= 1 and max_iter >= 0");

  const Eigen::Index n = rhs.size();
  GmresResult result;
  result.x = Eigen::VectorXcd::Zero(n);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) return result;

  const int m = static_cast<int>(std::min<Eigen::Index>(options.restart, n));
  Eigen::MatrixXcd Q(n, m + 1);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
  Eigen::VectorXcd g(m + 1);
  std::vector<double> cs(m);
  std::vector<cd> sn(m);

  Eigen::VectorXcd r = rhs;
  double beta = bnorm;
  result.residual = 1.0;
  while (result.iterations < options.max_iter) {
    Q.col(0) = r / beta;
    g.setZero();
    g[0] = beta;
    H.setZero();
    int k = 0;
    bool breakdown = false;
    for (; k < m && result.iterations < options.max_iter; ++k) {
      Eigen::VectorXcd w = V * Q.col(k);
      for (int i = 0; i <= k; ++i) {
        H(i, k) = Q.col(i).dot(w);
        w -= H(i, k) * Q.col(i);
      }
      H(k + 1, k) = w.norm();
      breakdown = std::abs(H(k + 1, k)) <= 1e-14 * beta;
      if (!breakdown) Q.col(k + 1) = w / H(k + 1, k);
      for (int i = 0; i < k; ++i) apply_rotation(cs[i], sn[i], H(i, k), H(i + 1, k));
      make_rotation(H(k, k), H(k + 1, k), cs[k], sn[k]);
      apply_rotation(cs[k], sn[k], H(k, k), H(k + 1, k));
      apply_rotation(cs[k], sn[k], g[k], g[k + 1]);
      ++result.iterations;
      result.history.push_back(std::abs(g[k + 1]) / bnorm);
      if (std::abs(g[k + 1]) / bnorm <= options.tol || breakdown) {
        ++k;
        break;
      }
    }
    const Eigen::VectorXcd y =
        H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    result.x += Q.leftCols(k) * y;
    r = rhs - V * result.x;
    beta = r.norm();
    result.residual = beta / bnorm;
    if (result.residual <= options.tol) return result;
    if (breakdown && beta <= 1e-14 * bnorm) return result;
  }
  throw GmresNonConvergence("gmres: no convergence after " + std::to_string(result.iterations) +
                                " iterations (relative residual " +
                                std::to_string(result.residual) + ")",
                            result);
}

}  // namespace igabem
