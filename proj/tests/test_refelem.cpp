#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "wadg/refelem.hpp"

using namespace wadg;

namespace {

// Exact monomial moment over the bi-unit triangle {r,s >= -1, r+s <= 0},
// worked out from nested 1D integrals:
//   int_T r^i s^j = (-1)^(i+1)/(i+1) * (I(i+1+j) - I(j)),  I(m) = int_{-1}^1 s^m ds.
double tri_moment(int i, int j) {
  auto I = [](int m) { return (m % 2 == 1) ? 0.0 : 2.0 / (m + 1); };
  double sign = (i % 2 == 0) ? -1.0 : 1.0;
  return sign / (i + 1.0) * (I(i + 1 + j) - I(j));
}

VecX monomial(const MatX& pts, int i, int j) {
  return pts.col(0).array().pow(i) * pts.col(1).array().pow(j);
}

}  // namespace

TEST_CASE("degree bounds rejected") {
  CHECK_THROWS(build_reference_element(0));
  CHECK_THROWS(build_reference_element(9));
  CHECK_THROWS(build_reference_element(-3));
}

TEST_CASE("N=1 basics") {
  auto re = build_reference_element(1);
  CHECK(re.num_basis == 3);
  CHECK(re.mass.sum() == Catch::Approx(2.0).margin(1e-13));
  CHECK(re.quad_w.sum() == Catch::Approx(2.0).margin(1e-14));
}

TEST_CASE("vandermonde at a vertex") {
  MatX pt(1, 2);
  pt << -1.0, -1.0;
  MatX V = vandermonde(pt, 1);
  CHECK(V.rows() == 1);
  CHECK(V.cols() == 3);
  CHECK(V(0, 0) == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-14));
}

TEST_CASE("quadrature exact to degree 2N+1") {
  for (int N = 1; N <= 8; ++N) {
    auto re = build_reference_element(N);
    CHECK(re.quad_w.minCoeff() > 0.0);
    for (int d = 0; d <= 2 * N + 1; ++d)
      for (int i = 0; i <= d; ++i) {
        int j = d - i;
        double got = re.quad_w.dot(monomial(re.quad_pts, i, j));
        CHECK(got == Catch::Approx(tri_moment(i, j)).margin(1e-13));
      }
  }
}

TEST_CASE("N=2 first moment to 1e-14") {
  auto re = build_reference_element(2);
  double got = re.quad_w.dot(monomial(re.quad_pts, 1, 0));
  CHECK(std::abs(got + 2.0 / 3.0) < 1e-14);
}

TEST_CASE("modal orthonormality under quadrature") {
  for (int N : {1, 3, 5, 8}) {
    auto re = build_reference_element(N);
    MatX Vq = vandermonde(re.quad_pts, N);
    MatX G = Vq.transpose() * re.quad_w.asDiagonal() * Vq;
    CHECK((G - MatX::Identity(re.num_basis, re.num_basis)).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("nodal mass consistent with quadrature") {
  for (int N : {2, 4, 7}) {
    auto re = build_reference_element(N);
    MatX Mq = re.interp_vol.transpose() * re.quad_w.asDiagonal() * re.interp_vol;
    CHECK((Mq - re.mass).cwiseAbs().maxCoeff() < 1e-12);
    // SPD
    Eigen::LLT<MatX> llt(re.mass);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("projection reproduces polynomials") {
  for (int N : {1, 4, 8}) {
    auto re = build_reference_element(N);
    MatX PV = re.project * re.interp_vol;
    CHECK((PV - MatX::Identity(re.num_basis, re.num_basis)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("nodes lie in the closed triangle and include vertices") {
  for (int N : {1, 3, 6, 8}) {
    auto re = build_reference_element(N);
    for (int i = 0; i < re.num_basis; ++i) {
      double r = re.nodes(i, 0), s = re.nodes(i, 1);
      CHECK(r >= -1.0 - 1e-10);
      CHECK(s >= -1.0 - 1e-10);
      CHECK(r + s <= 1e-10);
    }
    auto has = [&](double r, double s) {
      for (int i = 0; i < re.num_basis; ++i)
        if (std::abs(re.nodes(i, 0) - r) < 1e-10 && std::abs(re.nodes(i, 1) - s) < 1e-10)
          return true;
      return false;
    };
    CHECK(has(-1, -1));
    CHECK(has(1, -1));
    CHECK(has(-1, 1));
    // Vandermonde well conditioned enough to invert
    CHECK((re.vand * re.vand_inv - MatX::Identity(re.num_basis, re.num_basis))
              .cwiseAbs()
              .maxCoeff() < 1e-11);
  }
}

TEST_CASE("differentiation exact on monomials") {
  for (int N : {2, 5, 8}) {
    auto re = build_reference_element(N);
    for (int i = 0; i + 0 <= N; ++i)
      for (int j = 0; i + j <= N; ++j) {
        VecX u = monomial(re.nodes, i, j);
        VecX dur = re.dr * u;
        VecX dus = re.ds * u;
        VecX dur_ex = (i == 0) ? VecX::Zero(re.num_basis).eval()
                               : (double(i) * monomial(re.nodes, i - 1, j)).eval();
        VecX dus_ex = (j == 0) ? VecX::Zero(re.num_basis).eval()
                               : (double(j) * monomial(re.nodes, i, j - 1)).eval();
        CHECK((dur - dur_ex).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((dus - dus_ex).cwiseAbs().maxCoeff() < 1e-12);
      }
  }
}

TEST_CASE("weak/strong duality (discrete integration by parts)") {
  std::mt19937 rng(1234);
  std::normal_distribution<double> dist;
  for (int N : {1, 3, 6}) {
    auto re = build_reference_element(N);
    const int np = re.num_basis;
    const int nfq = re.num_face_quad;
    for (int trial = 0; trial < 4; ++trial) {
      VecX u(np), v(np);
      for (int i = 0; i < np; ++i) {
        u(i) = dist(rng);
        v(i) = dist(rng);
      }
      VecX uf = re.interp_face * u;
      VecX vf = re.interp_face * v;
      double br = 0.0, bs = 0.0;
      for (int f = 0; f < 3; ++f)
        for (int q = 0; q < nfq; ++q) {
          int k = f * nfq + q;
          // ref_normals holds n*Jf for the reference faces
          br += re.face_quad_w(q) * re.ref_normals(0, f) * uf(k) * vf(k);
          bs += re.face_quad_w(q) * re.ref_normals(1, f) * uf(k) * vf(k);
        }
      double lr = v.dot((re.weak_diff_r + re.weak_diff_r.transpose()) * u);
      double ls = v.dot((re.weak_diff_s + re.weak_diff_s.transpose()) * u);
      CHECK(std::abs(lr - br) < 1e-12 * (1.0 + std::abs(br)));
      CHECK(std::abs(ls - bs) < 1e-12 * (1.0 + std::abs(bs)));
    }
  }
}

TEST_CASE("face quadrature exact on edge polynomials") {
  for (int N : {1, 4, 8}) {
    auto re = build_reference_element(N);
    CHECK(re.face_quad_w.sum() == Catch::Approx(2.0).margin(1e-14));
    for (int d = 0; d <= 2 * N + 1; ++d) {
      double got = 0.0;
      for (int q = 0; q < re.num_face_quad; ++q)
        got += re.face_quad_w(q) * std::pow(re.face_quad_x(q), d);
      double exact = (d % 2 == 1) ? 0.0 : 2.0 / (d + 1);
      CHECK(got == Catch::Approx(exact).margin(1e-13));
    }
  }
}

TEST_CASE("lift consistent with face mass") {
  auto re = build_reference_element(3);
  // M * lift should equal interp_face^T diag(face weights)
  VecX wf3(3 * re.num_face_quad);
  for (int f = 0; f < 3; ++f)
    wf3.segment(f * re.num_face_quad, re.num_face_quad) = re.face_quad_w;
  MatX expect = re.interp_face.transpose() * wf3.asDiagonal();
  CHECK((re.mass * re.lift - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("operator dump round trip") {
  auto re = build_reference_element(2);
  std::string dir = "refelem_dump";
  std::system(("mkdir -p " + dir).c_str());
  dump_reference_operators(re, dir);
  std::ifstream is(dir + "/mass.txt");
  REQUIRE(is.good());
  int rows, cols;
  is >> rows >> cols;
  CHECK(rows == re.num_basis);
  CHECK(cols == re.num_basis);
  MatX m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) is >> m(i, j);
  CHECK((m - re.mass).cwiseAbs().maxCoeff() < 1e-15);
}
