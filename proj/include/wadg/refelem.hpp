#pragma once

#include <array>
#include <fstream>
#include <functional>

#include "wadg/jacobi.hpp"

namespace wadg {

// Reference domain: bi-unit right triangle {(r,s) >= -1, r+s <= 0}.
// Vertices (-1,-1), (1,-1), (-1,1); faces 0: s=-1, 1: r+s=0, 2: r=-1.

inline void rs_to_ab(const VecX& r, const VecX& s, VecX& a, VecX& b) {
  const Eigen::Index n = r.size();
  a.resize(n);
  b = s;
  for (Eigen::Index i = 0; i < n; ++i)
    a(i) = (std::abs(s(i) - 1.0) > 1e-14) ? 2.0 * (1.0 + r(i)) / (1.0 - s(i)) - 1.0 : -1.0;
}

/// Orthonormal modal basis (Koornwinder-Dubiner) evaluated at points (r,s).
/// Column ordering: (i,j) with i+j <= N, j fastest within fixed i? We use the
/// conventional ordering i=0..N, j=0..N-i.
inline MatX simplex_vandermonde(int N, const VecX& r, const VecX& s) {
  VecX a, b;
  rs_to_ab(r, s, a, b);
  const int np = (N + 1) * (N + 2) / 2;
  MatX V(r.size(), np);
  int sk = 0;
  for (int i = 0; i <= N; ++i) {
    VecX fa = jacobi_p(a, 0.0, 0.0, i);
    for (int j = 0; j <= N - i; ++j) {
      VecX gb = jacobi_p(b, 2.0 * i + 1.0, 0.0, j);
      V.col(sk++) = std::sqrt(2.0) * fa.array() * gb.array() * (1.0 - b.array()).pow(i);
    }
  }
  return V;
}

/// Derivatives of the modal basis with respect to (r,s).
inline void simplex_grad_vandermonde(int N, const VecX& r, const VecX& s, MatX& Vr, MatX& Vs) {
  VecX a, b;
  rs_to_ab(r, s, a, b);
  const int np = (N + 1) * (N + 2) / 2;
  Vr.resize(r.size(), np);
  Vs.resize(r.size(), np);
  int sk = 0;
  for (int i = 0; i <= N; ++i) {
    VecX fa = jacobi_p(a, 0.0, 0.0, i);
    VecX dfa = grad_jacobi_p(a, 0.0, 0.0, i);
    for (int j = 0; j <= N - i; ++j) {
      VecX gb = jacobi_p(b, 2.0 * i + 1.0, 0.0, j);
      VecX dgb = grad_jacobi_p(b, 2.0 * i + 1.0, 0.0, j);
      Eigen::ArrayXd hb = (0.5 * (1.0 - b.array()));
      Eigen::ArrayXd dmdr = dfa.array() * gb.array();
      if (i > 0) dmdr *= hb.pow(i - 1);
      Eigen::ArrayXd dmds = dfa.array() * gb.array() * (0.5 * (1.0 + a.array()));
      if (i > 0) dmds *= hb.pow(i - 1);
      Eigen::ArrayXd tmp = dgb.array() * hb.pow(i);
      if (i > 0) tmp -= 0.5 * i * gb.array() * hb.pow(i - 1);
      dmds += fa.array() * tmp;
      const double scale = std::pow(2.0, i + 0.5);
      Vr.col(sk) = scale * dmdr;
      Vs.col(sk) = scale * dmds;
      ++sk;
    }
  }
}

namespace detail {

inline VecX warp_factor(int N, const VecX& rout) {
  VecX lgl = gauss_lobatto(N);
  VecX req = VecX::LinSpaced(N + 1, -1.0, 1.0);
  MatX Veq(N + 1, N + 1);
  for (int j = 0; j <= N; ++j) Veq.col(j) = jacobi_p(req, 0.0, 0.0, j);
  MatX Pmat(rout.size(), N + 1);
  for (int j = 0; j <= N; ++j) Pmat.col(j) = jacobi_p(rout, 0.0, 0.0, j);
  // Lagrange basis (equispaced) evaluated at rout
  MatX Lmat = Veq.transpose().colPivHouseholderQr().solve(Pmat.transpose()).transpose();
  VecX warp = Lmat * (lgl - req);
  for (Eigen::Index i = 0; i < rout.size(); ++i) {
    bool interior = std::abs(rout(i)) < 1.0 - 1e-10;
    double sf = interior ? 1.0 - rout(i) * rout(i) : 1.0;
    warp(i) = interior ? warp(i) / sf : 0.0;
  }
  return warp;
}

}  // namespace detail

/// Warp & Blend interpolation nodes on the reference triangle.
inline MatX warp_blend_nodes(int N) {
  static const double alpopt[15] = {0.0000, 0.0000, 1.4152, 0.1001, 0.2751, 0.9800, 1.0999,
                                    1.2832, 1.3648, 1.4773, 1.4959, 1.5743, 1.5770, 1.6223,
                                    1.6258};
  const double alpha = (N <= 15) ? alpopt[N - 1] : 5.0 / 3.0;
  const int np = (N + 1) * (N + 2) / 2;

  VecX l1(np), l2(np), l3(np);
  int sk = 0;
  for (int n = 0; n <= N; ++n)
    for (int m = 0; m <= N - n; ++m) {
      l1(sk) = double(n) / N;
      l3(sk) = double(m) / N;
      l2(sk) = 1.0 - l1(sk) - l3(sk);
      ++sk;
    }
  VecX x = -l2 + l3;
  VecX y = (2.0 * l1.array() - l2.array() - l3.array()).matrix() / std::sqrt(3.0);

  auto apply_warp = [&](const VecX& la, const VecX& lb, const VecX& lc, double angle) {
    VecX blend = 4.0 * (lb.array() * lc.array());
    VecX wf = detail::warp_factor(N, (lc - lb));
    VecX warp =
        blend.array() * wf.array() * (1.0 + (alpha * la.array()).square());
    x.array() += std::cos(angle) * warp.array();
    y.array() += std::sin(angle) * warp.array();
  };
  apply_warp(l1, l2, l3, 0.0);
  apply_warp(l2, l3, l1, 2.0 * M_PI / 3.0);
  apply_warp(l3, l1, l2, 4.0 * M_PI / 3.0);

  MatX rs(np, 2);
  for (int i = 0; i < np; ++i) {
    double L1 = (std::sqrt(3.0) * y(i) + 1.0) / 3.0;
    double L2 = (-3.0 * x(i) - std::sqrt(3.0) * y(i) + 2.0) / 6.0;
    double L3 = (3.0 * x(i) - std::sqrt(3.0) * y(i) + 2.0) / 6.0;
    rs(i, 0) = -L2 + L3 - L1;
    rs(i, 1) = -L2 - L3 + L1;
  }
  return rs;
}

struct TriRule {
  MatX pts;  // Nq x 2
  VecX w;    // Nq
};

/// Quadrature on the reference triangle exact for total degree `deg`,
/// built from a collapsed-coordinate Gauss-Legendre x Gauss-Jacobi(1,0)
/// tensor product.  All weights positive, all points strictly interior.
inline TriRule triangle_quadrature(int deg) {
  const int n = (deg + 2) / 2;  // ceil((deg+1)/2)
  Rule1d ra = gauss_legendre(n);
  Rule1d rb = gauss_jacobi(1.0, 0.0, n);
  TriRule rule;
  rule.pts.resize(n * n, 2);
  rule.w.resize(n * n);
  int sk = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double a = ra.x(i), b = rb.x(j);
      rule.pts(sk, 0) = 0.5 * (1.0 + a) * (1.0 - b) - 1.0;
      rule.pts(sk, 1) = b;
      rule.w(sk) = 0.5 * ra.w(i) * rb.w(j);
      ++sk;
    }
  return rule;
}

struct ReferenceElement {
  int degree = 0;   // N
  int num_basis = 0;  // Np
  int num_quad = 0;   // Nq
  int num_face_quad = 0;  // Nfq per face

  MatX nodes;       // Np x 2, Warp & Blend interpolation nodes
  MatX quad_pts;    // Nq x 2
  VecX quad_w;      // Nq
  VecX face_quad_x; // Nfq, 1D Gauss-Legendre points on [-1,1]
  VecX face_quad_w; // Nfq

  MatX vand;        // modal Vandermonde at nodes, Np x Np
  MatX vand_inv;
  MatX mass;        // nodal reference mass matrix M = V^{-T} V^{-1}
  MatX mass_inv;    // V V^T
  MatX weak_diff_r, weak_diff_s;  // entries int (dphi_j/dr) phi_i
  MatX dr, ds;      // nodal differentiation matrices

  MatX interp_vol;            // Vq, Nq x Np, nodal basis at volume quad points
  MatX interp_grad_r, interp_grad_s;  // Nq x Np
  MatX face_pts;              // (3*Nfq) x 2, face quad points on the triangle
  MatX interp_face;           // (3*Nfq) x Np
  MatX interp_face_grad_r, interp_face_grad_s;  // (3*Nfq) x Np
  MatX project;               // Pq = M^{-1} Vq^T diag(w), Np x Nq
  MatX lift;                  // M^{-1} interp_face^T diag(face_w x3), Np x (3*Nfq)

  Eigen::Matrix<double, 2, 3> ref_normals;  // unnormalized outward face normals

  /// Parametrize face f by t in [-1,1], first vertex to second (CCW order).
  static Vec2 face_point(int f, double t) {
    switch (f) {
      case 0: return {t, -1.0};
      case 1: return {-t, t};
      default: return {-1.0, -t};
    }
  }
};

/// Nodal (Lagrange) basis values at arbitrary points: V_modal(pts) * V^{-1}.
inline MatX nodal_interp(const ReferenceElement& re, const MatX& pts) {
  return simplex_vandermonde(re.degree, pts.col(0), pts.col(1)) * re.vand_inv;
}

inline ReferenceElement build_reference_element(int N) {
  if (N < 1 || N > 8)
    throw std::invalid_argument("build_reference_element: degree must satisfy 1 <= N <= 8");
  ReferenceElement re;
  re.degree = N;
  re.num_basis = (N + 1) * (N + 2) / 2;
  re.nodes = warp_blend_nodes(N);

  re.vand = simplex_vandermonde(N, re.nodes.col(0), re.nodes.col(1));
  re.vand_inv = re.vand.inverse();
  re.mass_inv = re.vand * re.vand.transpose();
  re.mass = re.vand_inv.transpose() * re.vand_inv;

  MatX Vr, Vs;
  simplex_grad_vandermonde(N, re.nodes.col(0), re.nodes.col(1), Vr, Vs);
  re.dr = Vr * re.vand_inv;
  re.ds = Vs * re.vand_inv;
  re.weak_diff_r = re.mass * re.dr;
  re.weak_diff_s = re.mass * re.ds;

  TriRule rule = triangle_quadrature(2 * N + 1);
  re.num_quad = int(rule.w.size());
  re.quad_pts = rule.pts;
  re.quad_w = rule.w;
  re.interp_vol = nodal_interp(re, rule.pts);
  MatX Vqr, Vqs;
  simplex_grad_vandermonde(N, rule.pts.col(0), rule.pts.col(1), Vqr, Vqs);
  re.interp_grad_r = Vqr * re.vand_inv;
  re.interp_grad_s = Vqs * re.vand_inv;
  re.project = re.mass_inv * re.interp_vol.transpose() * rule.w.asDiagonal();

  re.num_face_quad = N + 1;
  Rule1d fq = gauss_legendre(N + 1);
  re.face_quad_x = fq.x;
  re.face_quad_w = fq.w;
  re.face_pts.resize(3 * re.num_face_quad, 2);
  for (int f = 0; f < 3; ++f)
    for (int q = 0; q < re.num_face_quad; ++q)
      re.face_pts.row(f * re.num_face_quad + q) =
          ReferenceElement::face_point(f, fq.x(q)).transpose();
  re.interp_face = nodal_interp(re, re.face_pts);
  MatX Vfr, Vfs;
  simplex_grad_vandermonde(N, re.face_pts.col(0), re.face_pts.col(1), Vfr, Vfs);
  re.interp_face_grad_r = Vfr * re.vand_inv;
  re.interp_face_grad_s = Vfs * re.vand_inv;

  VecX wf3(3 * re.num_face_quad);
  for (int f = 0; f < 3; ++f) wf3.segment(f * re.num_face_quad, re.num_face_quad) = fq.w;
  re.lift = re.mass_inv * re.interp_face.transpose() * wf3.asDiagonal();

  re.ref_normals << 0.0, 1.0, -1.0,
                   -1.0, 1.0, 0.0;
  return re;
}

/// Modal Vandermonde at arbitrary 2D points (extrapolation outside the
/// closed triangle is permitted; callers validate point location).
inline MatX vandermonde(const MatX& pts, int N) {
  return simplex_vandermonde(N, pts.col(0), pts.col(1));
}

inline void write_matrix_txt(const MatX& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_matrix_txt: cannot open " + path);
  os.precision(17);
  os << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << m(i, j) << (j + 1 < m.cols() ? " " : "");
    os << "\n";
  }
}

/// Dump all reference operators for cross-validation.
inline void dump_reference_operators(const ReferenceElement& re, const std::string& dir) {
  write_matrix_txt(re.nodes, dir + "/nodes.txt");
  write_matrix_txt(re.quad_pts, dir + "/quad_pts.txt");
  write_matrix_txt(re.quad_w, dir + "/quad_w.txt");
  write_matrix_txt(re.mass, dir + "/mass.txt");
  write_matrix_txt(re.weak_diff_r, dir + "/weak_diff_r.txt");
  write_matrix_txt(re.weak_diff_s, dir + "/weak_diff_s.txt");
  write_matrix_txt(re.interp_vol, dir + "/interp_vol.txt");
  write_matrix_txt(re.interp_grad_r, dir + "/interp_grad_r.txt");
  write_matrix_txt(re.interp_grad_s, dir + "/interp_grad_s.txt");
  write_matrix_txt(re.interp_face, dir + "/interp_face.txt");
  write_matrix_txt(re.project, dir + "/project.txt");
}

}  // namespace wadg
