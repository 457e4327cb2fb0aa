#pragma once

#include <random>

#include "wadg/mesh.hpp"

namespace wadg {

/// Material data sampled at volume quadrature points.  Acoustic density is
/// fixed at 1; elastic density is constant per element.
struct MaterialField {
  // acoustic elements: wavespeed squared, Nq x Ka (columns follow
  // mesh.acoustic_elems order)
  MatX c2;
  // elastic elements: Voigt stiffness entries at quadrature points, each
  // Nq x Ke; order C11, C12, C13, C22, C23, C33
  std::array<MatX, 6> C;
  std::array<MatX, 6> Cinv;
  VecX rho_e;  // per elastic element
  VecX cmax;   // per global element, largest local wavespeed
};

inline Mat3 voigt_from_entries(const std::array<double, 6>& e) {
  Mat3 C;
  C << e[0], e[1], e[2], e[1], e[3], e[4], e[2], e[4], e[5];
  return C;
}

/// Largest plane-wave modulus: max over propagation directions n of the
/// dominant eigenvalue of the Christoffel matrix B(n)^T C B(n), where
/// B(n) = [[n1,0],[0,n2],[n2,n1]].  Sampled over angles (heuristic for dt;
/// exact for isotropic C, where it returns lambda + 2 mu).
inline double max_christoffel_eig(const Mat3& C) {
  double best = 0;
  for (int i = 0; i < 64; ++i) {
    double th = M_PI * i / 64.0;
    double n1 = std::cos(th), n2 = std::sin(th);
    Eigen::Matrix<double, 3, 2> B;
    B << n1, 0, 0, n2, n2, n1;
    Mat2 G = B.transpose() * C * B;
    Eigen::SelfAdjointEigenSolver<Mat2> es(G);
    best = std::max(best, es.eigenvalues().maxCoeff());
  }
  return best;
}

inline Mat3 isotropic_stiffness(double lambda, double mu) {
  if (mu < 0 || lambda + 2 * mu <= 0)
    throw std::invalid_argument("isotropic_stiffness: need mu >= 0 and lambda + 2mu > 0");
  Mat3 C;
  C << lambda + 2 * mu, lambda, 0, lambda, lambda + 2 * mu, 0, 0, 0, mu;
  return C;
}

/// Sample material data over the mesh from pointwise callbacks.
/// acoustic_c2(x,y) and elastic_C(x,y) are evaluated at volume quadrature
/// points; elastic_rho(k) gives the per-element density.
inline MaterialField make_material(const Mesh& m, const ReferenceElement& re,
                                   const std::function<double(double, double)>& acoustic_c2,
                                   const std::function<Mat3(double, double)>& elastic_C,
                                   const std::function<double(int)>& elastic_rho) {
  MaterialField mat;
  const int nq = re.num_quad;
  const int Ka = int(m.acoustic_elems.size()), Ke = int(m.elastic_elems.size());
  MatX xq = re.interp_vol * m.x, yq = re.interp_vol * m.y;

  mat.c2.resize(nq, Ka);
  for (int a = 0; a < Ka; ++a) {
    int k = m.acoustic_elems[a];
    for (int q = 0; q < nq; ++q) {
      double v = acoustic_c2(xq(q, k), yq(q, k));
      if (!(v > 0)) throw std::runtime_error("make_material: nonpositive wavespeed");
      mat.c2(q, a) = v;
    }
  }

  for (auto& M : mat.C) M.resize(nq, Ke);
  for (auto& M : mat.Cinv) M.resize(nq, Ke);
  mat.rho_e.resize(Ke);
  for (int e = 0; e < Ke; ++e) {
    int k = m.elastic_elems[e];
    mat.rho_e(e) = elastic_rho(k);
    if (!(mat.rho_e(e) > 0)) throw std::runtime_error("make_material: nonpositive density");
    for (int q = 0; q < nq; ++q) {
      Mat3 C = elastic_C(xq(q, k), yq(q, k));
      if ((C - C.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::runtime_error("make_material: stiffness not symmetric");
      Eigen::LLT<Mat3> llt(C);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("make_material: stiffness not SPD");
      Mat3 Ci = C.inverse();
      mat.C[0](q, e) = C(0, 0);
      mat.C[1](q, e) = C(0, 1);
      mat.C[2](q, e) = C(0, 2);
      mat.C[3](q, e) = C(1, 1);
      mat.C[4](q, e) = C(1, 2);
      mat.C[5](q, e) = C(2, 2);
      mat.Cinv[0](q, e) = Ci(0, 0);
      mat.Cinv[1](q, e) = Ci(0, 1);
      mat.Cinv[2](q, e) = Ci(0, 2);
      mat.Cinv[3](q, e) = Ci(1, 1);
      mat.Cinv[4](q, e) = Ci(1, 2);
      mat.Cinv[5](q, e) = Ci(2, 2);
    }
  }

  mat.cmax.resize(m.K);
  for (int k = 0; k < m.K; ++k) {
    if (m.is_acoustic(k)) {
      mat.cmax(k) = std::sqrt(mat.c2.col(m.local[k]).maxCoeff());
    } else {
      int e = m.local[k];
      double gmax = 0;
      for (int q = 0; q < nq; ++q) {
        Mat3 C = voigt_from_entries({mat.C[0](q, e), mat.C[1](q, e), mat.C[2](q, e),
                                     mat.C[3](q, e), mat.C[4](q, e), mat.C[5](q, e)});
        gmax = std::max(gmax, max_christoffel_eig(C));
      }
      mat.cmax(k) = std::sqrt(gmax / mat.rho_e(e));
    }
  }
  return mat;
}

inline MaterialField uniform_material(const Mesh& m, const ReferenceElement& re, double c2,
                                      double lambda, double mu, double rho) {
  Mat3 C = isotropic_stiffness(lambda, mu);
  return make_material(
      m, re, [c2](double, double) { return c2; }, [C](double, double) { return C; },
      [rho](int) { return rho; });
}

/// Random SPD stiffness sampler: C = U D U^T with eigenvalues uniform in
/// [d_min, d_max] and U a Haar-ish random rotation (QR of a Gaussian matrix
/// with sign-fixed diagonal).  Deterministic for a fixed seed.
class RandomSpdStiffness {
 public:
  RandomSpdStiffness(unsigned seed, double d_min, double d_max)
      : rng_(seed), d_min_(d_min), d_max_(d_max) {
    if (!(0 < d_min && d_min <= d_max))
      throw std::invalid_argument("RandomSpdStiffness: need 0 < d_min <= d_max");
  }

  Mat3 next() {
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> uni(d_min_, d_max_);
    Mat3 A;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) A(i, j) = gauss(rng_);
    Eigen::HouseholderQR<Mat3> qr(A);
    Mat3 Q = qr.householderQ();
    Mat3 R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < 3; ++i)
      if (R(i, i) < 0) Q.col(i) = -Q.col(i);
    Vec3 d;
    if (d_min_ == d_max_)
      d.setConstant(d_min_);
    else
      for (int i = 0; i < 3; ++i) d(i) = uni(rng_);
    return Q * d.asDiagonal() * Q.transpose();
  }

  double next_scalar(double lo, double hi) {
    std::uniform_real_distribution<double> uni(lo, hi);
    return uni(rng_);
  }

 private:
  std::mt19937_64 rng_;
  double d_min_, d_max_;
};

/// Random heterogeneous/anisotropic media for the stability experiments:
/// per-quadrature-point random SPD C in the elastic region, random wavespeed
/// c in [c_min, c_max] in the acoustic region.  Deterministic per seed.
inline MaterialField random_material(const Mesh& m, const ReferenceElement& re, unsigned seed,
                                     double d_min, double d_max, double c_min, double c_max,
                                     double rho = 1.0) {
  RandomSpdStiffness gen(seed, d_min, d_max);
  const int nq = re.num_quad;
  const int Ka = int(m.acoustic_elems.size()), Ke = int(m.elastic_elems.size());
  // Pre-draw in a fixed order, independent of callback evaluation order.
  MatX c2(nq, Ka);
  for (int a = 0; a < Ka; ++a)
    for (int q = 0; q < nq; ++q) {
      double c = gen.next_scalar(c_min, c_max);
      c2(q, a) = c * c;
    }
  std::vector<Mat3> Cs(size_t(nq) * Ke);
  for (int e = 0; e < Ke; ++e)
    for (int q = 0; q < nq; ++q) Cs[size_t(e) * nq + q] = gen.next();

  MaterialField mat;
  mat.c2 = c2;
  for (auto& M : mat.C) M.resize(nq, Ke);
  for (auto& M : mat.Cinv) M.resize(nq, Ke);
  mat.rho_e = VecX::Constant(Ke, rho);
  mat.cmax.resize(m.K);
  for (int e = 0; e < Ke; ++e)
    for (int q = 0; q < nq; ++q) {
      Mat3 C = Cs[size_t(e) * nq + q];
      Mat3 Ci = C.inverse();
      mat.C[0](q, e) = C(0, 0);
      mat.C[1](q, e) = C(0, 1);
      mat.C[2](q, e) = C(0, 2);
      mat.C[3](q, e) = C(1, 1);
      mat.C[4](q, e) = C(1, 2);
      mat.C[5](q, e) = C(2, 2);
      mat.Cinv[0](q, e) = Ci(0, 0);
      mat.Cinv[1](q, e) = Ci(0, 1);
      mat.Cinv[2](q, e) = Ci(0, 2);
      mat.Cinv[3](q, e) = Ci(1, 1);
      mat.Cinv[4](q, e) = Ci(1, 2);
      mat.Cinv[5](q, e) = Ci(2, 2);
    }
  for (int k = 0; k < m.K; ++k) {
    if (m.is_acoustic(k))
      mat.cmax(k) = std::sqrt(mat.c2.col(m.local[k]).maxCoeff());
    else
      mat.cmax(k) = std::sqrt(d_max / rho);
  }
  return mat;
}

/// Demo media on [-0.32, 0.32]^2 with rho = 7100: x < 0 anisotropic elastic,
/// x > 0, y < 0 isotropic elastic, x > 0, y > 0 acoustic with c^2 = C11/rho.
/// heterogeneous=true modulates C11, C22, C33 by (1 + sin(pi x / 0.08)/4).
inline MaterialField aniso_demo_material(const Mesh& m, const ReferenceElement& re,
                                         bool heterogeneous) {
  const double rho = 7100.0;
  auto het = [heterogeneous](double x) {
    return heterogeneous ? 1.0 + 0.25 * std::sin(M_PI * x / 0.08) : 1.0;
  };
  auto elastic_C = [het](double x, double /*y*/) {
    Mat3 C = Mat3::Zero();
    double f = het(x);
    if (x < 0) {
      C(0, 0) = 0.165 * f;
      C(0, 1) = C(1, 0) = 0.05;
      C(1, 1) = 0.062 * f;
      C(2, 2) = 0.0396 * f;
    } else {
      C(0, 0) = 0.165 * f;
      C(0, 1) = C(1, 0) = 0.0858;
      C(1, 1) = 0.165 * f;
      C(2, 2) = 0.0396 * f;
    }
    return C;
  };
  auto acoustic_c2 = [&](double, double) { return 0.165 / rho; };
  return make_material(m, re, acoustic_c2, elastic_C, [rho](int) { return rho; });
}

inline Region aniso_demo_region(double x, double y) {
  return (x > 0 && y > 0) ? Region::Acoustic : Region::Elastic;
}

}  // namespace wadg
