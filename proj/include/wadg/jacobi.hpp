#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace wadg {

using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

/// Orthonormal Jacobi polynomial P_n^{(a,b)} evaluated at x in [-1,1],
/// normalized so that int_{-1}^1 (1-x)^a (1+x)^b P_n^2 dx = 1.
inline VecX jacobi_p(const VecX& x, double a, double b, int n) {
  const Eigen::Index m = x.size();
  MatX pl(m, n + 1);
  double gamma0 = std::pow(2.0, a + b + 1.0) / (a + b + 1.0) * std::tgamma(a + 1.0) *
                  std::tgamma(b + 1.0) / std::tgamma(a + b + 1.0);
  pl.col(0).setConstant(1.0 / std::sqrt(gamma0));
  if (n == 0) return pl.col(0);
  double gamma1 = (a + 1.0) * (b + 1.0) / (a + b + 3.0) * gamma0;
  pl.col(1) = ((a + b + 2.0) / 2.0 * x.array() + (a - b) / 2.0) / std::sqrt(gamma1);
  if (n == 1) return pl.col(1);

  double aold = 2.0 / (2.0 + a + b) * std::sqrt((a + 1.0) * (b + 1.0) / (a + b + 3.0));
  for (int i = 1; i <= n - 1; ++i) {
    double h1 = 2.0 * i + a + b;
    double anew = 2.0 / (h1 + 2.0) *
                  std::sqrt((i + 1.0) * (i + 1.0 + a + b) * (i + 1.0 + a) * (i + 1.0 + b) /
                            ((h1 + 1.0) * (h1 + 3.0)));
    double bnew = -(a * a - b * b) / (h1 * (h1 + 2.0));
    pl.col(i + 1) =
        1.0 / anew * (-aold * pl.col(i - 1).array() + (x.array() - bnew) * pl.col(i).array());
    aold = anew;
  }
  return pl.col(n);
}

inline VecX grad_jacobi_p(const VecX& x, double a, double b, int n) {
  if (n == 0) return VecX::Zero(x.size());
  return std::sqrt(n * (n + a + b + 1.0)) * jacobi_p(x, a + 1.0, b + 1.0, n - 1);
}

struct Rule1d {
  VecX x, w;
};

/// Gauss quadrature for the Jacobi weight (1-x)^a (1+x)^b, npts points
/// (exact for polynomials of degree 2*npts-1).  Golub-Welsch.
inline Rule1d gauss_jacobi(double a, double b, int npts) {
  if (npts < 1) throw std::invalid_argument("gauss_jacobi: npts must be >= 1");
  const int n = npts - 1;
  double mu0 = std::pow(2.0, a + b + 1.0) / (a + b + 1.0) * std::tgamma(a + 1.0) *
               std::tgamma(b + 1.0) / std::tgamma(a + b + 1.0);
  if (npts == 1) {
    Rule1d r;
    r.x = VecX::Constant(1, (b - a) / (a + b + 2.0));
    r.w = VecX::Constant(1, mu0);
    return r;
  }
  MatX J = MatX::Zero(npts, npts);
  for (int i = 0; i <= n; ++i) {
    double h1 = 2.0 * i + a + b;
    J(i, i) = (std::abs(a + b) < 10 * std::numeric_limits<double>::epsilon() && i == 0)
                  ? 0.0
                  : -(a * a - b * b) / ((h1 + 2.0) * h1);
    if (i < n) {
      double k = i + 1.0;
      J(i, i + 1) = 2.0 / (h1 + 2.0) *
                    std::sqrt(k * (k + a + b) * (k + a) * (k + b) /
                              ((h1 + 1.0) * (h1 + 3.0)));
      J(i + 1, i) = J(i, i + 1);
    }
  }
  Eigen::SelfAdjointEigenSolver<MatX> es(J);
  Rule1d r;
  r.x = es.eigenvalues();
  r.w = mu0 * es.eigenvectors().row(0).transpose().array().square();
  return r;
}

inline Rule1d gauss_legendre(int npts) { return gauss_jacobi(0.0, 0.0, npts); }

/// Gauss-Lobatto points of the Legendre weight: endpoints plus interior
/// Gauss-Jacobi(1,1) points.  Used for the node warping construction.
inline VecX gauss_lobatto(int n) {
  VecX x(n + 1);
  x(0) = -1.0;
  x(n) = 1.0;
  if (n >= 2) x.segment(1, n - 1) = gauss_jacobi(1.0, 1.0, n - 1).x;
  return x;
}

}  // namespace wadg
