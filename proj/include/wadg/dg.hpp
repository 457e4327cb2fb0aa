#pragma once

#include "wadg/exact.hpp"
#include "wadg/wadg.hpp"

namespace wadg {

/// Solution fields, nodal coefficients per region (Np x Ka / Np x Ke).
struct State {
  MatX p, u1, u2;            // acoustic: pressure, velocity
  MatX v1, v2, s1, s2, s3;   // elastic: velocity, stress (Voigt s11, s22, s12)
};

inline State make_state(const ReferenceElement& re, const Mesh& m) {
  State s;
  const int np = re.num_basis;
  const int Ka = int(m.acoustic_elems.size()), Ke = int(m.elastic_elems.size());
  s.p = MatX::Zero(np, Ka);
  s.u1 = s.p;
  s.u2 = s.p;
  s.v1 = MatX::Zero(np, Ke);
  s.v2 = s.v1;
  s.s1 = s.v1;
  s.s2 = s.v1;
  s.s3 = s.v1;
  return s;
}

template <class F>
void for_each_field(State& s, F f) {
  f(s.p);
  f(s.u1);
  f(s.u2);
  f(s.v1);
  f(s.v2);
  f(s.s1);
  f(s.s2);
  f(s.s3);
}

template <class F>
void for_each_field2(State& a, const State& b, F f) {
  f(a.p, b.p);
  f(a.u1, b.u1);
  f(a.u2, b.u2);
  f(a.v1, b.v1);
  f(a.v2, b.v2);
  f(a.s1, b.s1);
  f(a.s2, b.s2);
  f(a.s3, b.s3);
}

/// Penalty parameters.  tau_u applies to both velocity penalties (tau_u =
/// tau_v), tau_p to the pressure/stress penalties (tau_p = tau_sigma).
/// Defaults give the energy-stable upwind-like choice 1/2; zero gives the
/// central flux.
struct FluxParams {
  double tau_u = 0.5;
  double tau_p = 0.5;
};

enum class GeometryMode { Affine, StrongWeak };

/// Semidiscrete DG operator for the coupled elastic-acoustic system.
///
/// apply_premass computes the inverse-reference-mass residual: for affine
/// geometry the standard strong-form nodal DG residual (M^k)^{-1} A_k U; for
/// strong-weak geometry M^{-1} applied to the reference-integrated residual
/// (pressure and stress volume terms integrated by parts, velocity equations
/// kept strong).  apply composes this with the weight-adjusted mass inverses
/// (c^2, C, rho and, for curved elements, 1/J) to give dU/dt.
class CoupledDgOperator {
 public:
  CoupledDgOperator(const ReferenceElement& re, const Mesh& m, const MaterialField& mat,
                    FluxParams tau, GeometryMode mode)
      : re_(re), m_(m), mat_(mat), tau_(tau), mode_(mode) {
    if (mode_ == GeometryMode::Affine && m_.curved)
      throw std::invalid_argument("CoupledDgOperator: affine mode on a curved mesh");
    const int nfp = m_.num_face_pts;
    Ka_ = int(m_.acoustic_elems.size());
    Ke_ = int(m_.elastic_elems.size());
    if (mat_.c2.cols() != Ka_ || mat_.C[0].cols() != Ke_ || mat_.rho_e.size() != Ke_)
      throw std::invalid_argument("CoupledDgOperator: material does not match the mesh");

    bool absorbing = false;
    for (int k = 0; k < m_.K; ++k)
      for (int f = 0; f < 3; ++f) {
        Bc bc = m_.faces[k][f].bc;
        if (bc == Bc::Absorbing) absorbing = true;
        if (bc == Bc::DirichletPressure && !m_.is_acoustic(k))
          throw std::invalid_argument("CoupledDgOperator: pressure BC on an elastic face");
      }
    if (absorbing && (tau_.tau_u <= 0 || tau_.tau_p <= 0))
      throw std::invalid_argument("CoupledDgOperator: absorbing BC requires positive penalties");

    xf_ = re_.interp_face * m_.x;
    yf_ = re_.interp_face * m_.y;

    // face integration scale: Jf/J (affine, folds into lift) or Jf (strong-weak)
    fscale_a_.resize(nfp, Ka_);
    fscale_e_.resize(nfp, Ke_);
    for (int k = 0; k < m_.K; ++k) {
      int c = m_.local[k];
      VecX col = m_.Jf.col(k);
      if (mode_ == GeometryMode::Affine) col /= m_.Jn(0, k);
      (m_.is_acoustic(k) ? fscale_a_ : fscale_e_).col(c) = col;
    }

    auto region_cols = [&](const std::vector<int>& elems, const MatX& src) {
      MatX out(src.rows(), Eigen::Index(elems.size()));
      for (size_t i = 0; i < elems.size(); ++i) out.col(Eigen::Index(i)) = src.col(elems[i]);
      return out;
    };
    if (mode_ == GeometryMode::StrongWeak) {
      rxq_a_ = region_cols(m_.acoustic_elems, m_.rx);
      sxq_a_ = region_cols(m_.acoustic_elems, m_.sx);
      ryq_a_ = region_cols(m_.acoustic_elems, m_.ry);
      syq_a_ = region_cols(m_.acoustic_elems, m_.sy);
      Jq_a_ = region_cols(m_.acoustic_elems, m_.J);
      rxq_e_ = region_cols(m_.elastic_elems, m_.rx);
      sxq_e_ = region_cols(m_.elastic_elems, m_.sx);
      ryq_e_ = region_cols(m_.elastic_elems, m_.ry);
      syq_e_ = region_cols(m_.elastic_elems, m_.sy);
      Jq_e_ = region_cols(m_.elastic_elems, m_.J);
      check_positive_weight(Jq_a_, "CoupledDgOperator");
      check_positive_weight(Jq_e_, "CoupledDgOperator");
      // WADG weights with the geometric factor folded in
      c2w_ = (mat_.c2.array() / Jq_a_.array()).matrix();
      invJ_a_ = Jq_a_.cwiseInverse();
      for (int i = 0; i < 6; ++i) Cw_[i] = (mat_.C[i].array() / Jq_e_.array()).matrix();
      invJrho_e_.resize(re_.num_quad, Ke_);
      for (int e = 0; e < Ke_; ++e)
        invJrho_e_.col(e) = Jq_e_.col(e).cwiseInverse() / mat_.rho_e(e);
    } else {
      // per-element constant metrics
      auto row_of = [&](const MatX& src) {
        Eigen::RowVectorXd r(m_.K);
        for (int k = 0; k < m_.K; ++k) r(k) = src(0, k);
        return r;
      };
      rxc_ = row_of(m_.rxn);
      sxc_ = row_of(m_.sxn);
      ryc_ = row_of(m_.ryn);
      syc_ = row_of(m_.syn);
    }
  }

  // boundary data, evaluated at face quadrature points
  std::function<double(double, double, double)> pressure_bc =
      [](double, double, double) { return 0.0; };
  std::function<Vec2(double, double, double, double, double)> traction_bc =
      [](double, double, double, double, double) { return Vec2::Zero().eval(); };

  const Mesh& mesh() const { return m_; }
  const ReferenceElement& ref() const { return re_; }
  GeometryMode mode() const { return mode_; }

  void apply_premass(const State& s, double t, State& out) const {
    const int nfq = re_.num_face_quad;
    const int nfp = m_.num_face_pts;
    const double tu = tau_.tau_u, tp = tau_.tau_p;
    const bool sw = mode_ == GeometryMode::StrongWeak;

    // traces at face quadrature points
    MatX Pf = re_.interp_face * s.p;
    MatX U1f = re_.interp_face * s.u1;
    MatX U2f = re_.interp_face * s.u2;
    MatX V1f = re_.interp_face * s.v1;
    MatX V2f = re_.interp_face * s.v2;
    MatX S1f = re_.interp_face * s.s1;
    MatX S2f = re_.interp_face * s.s2;
    MatX S3f = re_.interp_face * s.s3;

    MatX FP = MatX::Zero(nfp, Ka_), FU1 = FP, FU2 = FP;
    MatX FV1 = MatX::Zero(nfp, Ke_), FV2 = FV1, FS1 = FV1, FS2 = FV1, FS3 = FV1;

    for (int k = 0; k < m_.K; ++k) {
      const int c = m_.local[k];
      for (int f = 0; f < 3; ++f) {
        const FaceInfo& fi = m_.faces[k][f];
        for (int q = 0; q < nfq; ++q) {
          const int i = f * nfq + q;
          const double n1 = m_.nx(i, k), n2 = m_.ny(i, k);
          const int j = m_.mapP[size_t(k) * nfp + i];
          const int k2 = j / nfp, i2 = j % nfp;
          const int c2 = m_.local[k2];

          if (m_.is_acoustic(k)) {
            const double p = Pf(i, c), u1 = U1f(i, c), u2 = U2f(i, c);
            double dp = 0, du1 = 0, du2 = 0;     // exterior - interior
            double tv1 = 0, tv2 = 0, text = 0;   // coupled-face data
            bool coupled = false;
            switch (fi.type) {
              case FaceType::AA:
                dp = Pf(i2, c2) - p;
                du1 = U1f(i2, c2) - u1;
                du2 = U2f(i2, c2) - u2;
                break;
              case FaceType::AE: {
                coupled = true;
                tv1 = V1f(i2, c2);
                tv2 = V2f(i2, c2);
                const double ss1 = S1f(i2, c2), ss2 = S2f(i2, c2), ss3 = S3f(i2, c2);
                text = n1 * (n1 * ss1 + n2 * ss3) + n2 * (n2 * ss2 + n1 * ss3);
                break;
              }
              case FaceType::Boundary:
                switch (fi.bc) {
                  case Bc::DirichletPressure:
                    dp = 2 * (pressure_bc(xf_(i, k), yf_(i, k), t) - p);
                    break;
                  case Bc::TractionPrescribed: {
                    Vec2 tb = traction_bc(xf_(i, k), yf_(i, k), n1, n2, t);
                    dp = 2 * (tb(0) * n1 + tb(1) * n2 - p);
                    break;
                  }
                  case Bc::ZeroVelocity: {
                    const double un = n1 * u1 + n2 * u2;
                    du1 = -2 * un * n1;
                    du2 = -2 * un * n2;
                    break;
                  }
                  case Bc::Absorbing:
                    dp = -p;
                    du1 = -u1;
                    du2 = -u2;
                    break;
                  default:
                    throw std::runtime_error("CoupledDgOperator: boundary face without BC");
                }
                break;
              default:
                throw std::runtime_error("CoupledDgOperator: bad face type on acoustic element");
            }
            double fp, g;
            if (coupled) {
              const double dvn = n1 * (tv1 - u1) + n2 * (tv2 - u2);
              fp = 0.5 * dvn + 0.5 * tp * (text - p);
              g = 0.5 * (text - p) + 0.5 * tu * dvn;
            } else {
              const double dun = n1 * du1 + n2 * du2;
              fp = 0.5 * dun + 0.5 * tp * dp;
              g = 0.5 * dp + 0.5 * tu * dun;
            }
            if (sw) fp += n1 * u1 + n2 * u2;
            FP(i, c) = fp;
            FU1(i, c) = n1 * g;
            FU2(i, c) = n2 * g;
          } else {
            const double v1 = V1f(i, c), v2 = V2f(i, c);
            const double s1 = S1f(i, c), s2 = S2f(i, c), s3 = S3f(i, c);
            const double tl1 = n1 * s1 + n2 * s3, tl2 = n2 * s2 + n1 * s3;  // A_n^T sigma
            double fv1, fv2, fs1, fs2, fs3;
            auto ee_flux = [&](double dv1, double dv2, double ds1, double ds2, double ds3) {
              const double dt1 = n1 * ds1 + n2 * ds3, dt2 = n2 * ds2 + n1 * ds3;
              // A_n^T A_n dv
              const double a1 = dv1 + n1 * n2 * dv2, a2 = dv2 + n1 * n2 * dv1;
              fv1 = 0.5 * dt1 + 0.5 * tu * a1;
              fv2 = 0.5 * dt2 + 0.5 * tu * a2;
              // A_n w with w = 0.5*dv + 0.5*tp*(A_n^T dsigma)
              const double w1 = 0.5 * dv1 + 0.5 * tp * dt1;
              const double w2 = 0.5 * dv2 + 0.5 * tp * dt2;
              fs1 = n1 * w1;
              fs2 = n2 * w2;
              fs3 = n2 * w1 + n1 * w2;
            };
            switch (fi.type) {
              case FaceType::EE:
                ee_flux(V1f(i2, c2) - v1, V2f(i2, c2) - v2, S1f(i2, c2) - s1,
                        S2f(i2, c2) - s2, S3f(i2, c2) - s3);
                break;
              case FaceType::EA: {
                const double pe = Pf(i2, c2);
                const double ue1 = U1f(i2, c2), ue2 = U2f(i2, c2);
                const double dun = n1 * (ue1 - v1) + n2 * (ue2 - v2);
                const double tn = n1 * tl1 + n2 * tl2;
                // 0.5*(p n - A_n^T s - (I - n n^T) A_n^T s) + tau_v/2 n n^T (u - v)
                fv1 = 0.5 * (pe * n1 - 2 * tl1 + tn * n1) + 0.5 * tu * dun * n1;
                fv2 = 0.5 * (pe * n2 - 2 * tl2 + tn * n2) + 0.5 * tu * dun * n2;
                // 0.5 A_n n n^T (u - v) + tau_s/2 A_n (p n - A_n^T s)
                const double w1 = 0.5 * dun * n1 + 0.5 * tp * (pe * n1 - tl1);
                const double w2 = 0.5 * dun * n2 + 0.5 * tp * (pe * n2 - tl2);
                fs1 = n1 * w1;
                fs2 = n2 * w2;
                fs3 = n2 * w1 + n1 * w2;
                break;
              }
              case FaceType::Boundary:
                switch (fi.bc) {
                  case Bc::TractionPrescribed: {
                    Vec2 tb = traction_bc(xf_(i, k), yf_(i, k), n1, n2, t);
                    const double dt1 = 2 * (tb(0) - tl1), dt2 = 2 * (tb(1) - tl2);
                    fv1 = 0.5 * dt1;
                    fv2 = 0.5 * dt2;
                    const double w1 = 0.5 * tp * dt1, w2 = 0.5 * tp * dt2;
                    fs1 = n1 * w1;
                    fs2 = n2 * w2;
                    fs3 = n2 * w1 + n1 * w2;
                    break;
                  }
                  case Bc::ZeroVelocity: {
                    const double vn = n1 * v1 + n2 * v2;
                    ee_flux(-2 * vn * n1, -2 * vn * n2, 0, 0, 0);
                    break;
                  }
                  case Bc::Absorbing:
                    ee_flux(-v1, -v2, -s1, -s2, -s3);
                    break;
                  default:
                    throw std::runtime_error("CoupledDgOperator: boundary face without BC");
                }
                break;
              default:
                throw std::runtime_error("CoupledDgOperator: bad face type on elastic element");
            }
            if (sw) {
              // integrate the stress equation by parts: add A_n v (local trace)
              fs1 += n1 * v1;
              fs2 += n2 * v2;
              fs3 += n2 * v1 + n1 * v2;
            }
            FV1(i, c) = fv1;
            FV2(i, c) = fv2;
            FS1(i, c) = fs1;
            FS2(i, c) = fs2;
            FS3(i, c) = fs3;
          }
        }
      }
    }

    if (!sw) {
      auto sel = [&](const Eigen::RowVectorXd& r, const std::vector<int>& elems) {
        Eigen::RowVectorXd out(elems.size());
        for (size_t i = 0; i < elems.size(); ++i) out(Eigen::Index(i)) = r(elems[i]);
        return out;
      };
      Eigen::RowVectorXd rxa = sel(rxc_, m_.acoustic_elems), sxa = sel(sxc_, m_.acoustic_elems);
      Eigen::RowVectorXd rya = sel(ryc_, m_.acoustic_elems), sya = sel(syc_, m_.acoustic_elems);
      Eigen::RowVectorXd rxe = sel(rxc_, m_.elastic_elems), sxe = sel(sxc_, m_.elastic_elems);
      Eigen::RowVectorXd rye = sel(ryc_, m_.elastic_elems), sye = sel(syc_, m_.elastic_elems);
      auto ddx = [&](const MatX& U, const Eigen::RowVectorXd& rx, const Eigen::RowVectorXd& sx) {
        return ((re_.dr * U).array().rowwise() * rx.array() +
                (re_.ds * U).array().rowwise() * sx.array())
            .matrix();
      };
      out.p = ddx(s.u1, rxa, sxa) + ddx(s.u2, rya, sya) +
              re_.lift * fscale_a_.cwiseProduct(FP);
      out.u1 = ddx(s.p, rxa, sxa) + re_.lift * fscale_a_.cwiseProduct(FU1);
      out.u2 = ddx(s.p, rya, sya) + re_.lift * fscale_a_.cwiseProduct(FU2);
      out.v1 = ddx(s.s1, rxe, sxe) + ddx(s.s3, rye, sye) +
               re_.lift * fscale_e_.cwiseProduct(FV1);
      out.v2 = ddx(s.s3, rxe, sxe) + ddx(s.s2, rye, sye) +
               re_.lift * fscale_e_.cwiseProduct(FV2);
      out.s1 = ddx(s.v1, rxe, sxe) + re_.lift * fscale_e_.cwiseProduct(FS1);
      out.s2 = ddx(s.v2, rye, sye) + re_.lift * fscale_e_.cwiseProduct(FS2);
      out.s3 = ddx(s.v1, rye, sye) + ddx(s.v2, rxe, sxe) +
               re_.lift * fscale_e_.cwiseProduct(FS3);
    } else {
      const VecX& w = re_.quad_w;
      auto weak_div = [&](const MatX& F1q, const MatX& F2q, const MatX& rx, const MatX& ry,
                          const MatX& sx, const MatX& sy, const MatX& J) {
        // -(Vq^r)^T diag(w) [J(rx F1 + ry F2)] - (Vq^s)^T diag(w) [J(sx F1 + sy F2)]
        MatX Ur = (J.array() * (rx.array() * F1q.array() + ry.array() * F2q.array())).matrix();
        MatX Us = (J.array() * (sx.array() * F1q.array() + sy.array() * F2q.array())).matrix();
        return (-re_.interp_grad_r.transpose() * (Ur.array().colwise() * w.array()).matrix() -
                re_.interp_grad_s.transpose() * (Us.array().colwise() * w.array()).matrix())
            .eval();
      };
      auto strong_grad = [&](const MatX& Fr, const MatX& Fs, const MatX& a1, const MatX& a2,
                             const MatX& J) {
        // Vq^T diag(w) [J (a1 Fr + a2 Fs)]
        MatX g = (J.array() * (a1.array() * Fr.array() + a2.array() * Fs.array())).matrix();
        return (re_.interp_vol.transpose() * (g.array().colwise() * w.array()).matrix()).eval();
      };

      // acoustic
      MatX U1q = re_.interp_vol * s.u1, U2q = re_.interp_vol * s.u2;
      MatX Pr = re_.interp_grad_r * s.p, Ps = re_.interp_grad_s * s.p;
      out.p = re_.mass_inv * weak_div(U1q, U2q, rxq_a_, ryq_a_, sxq_a_, syq_a_, Jq_a_) +
              re_.lift * fscale_a_.cwiseProduct(FP);
      out.u1 = re_.mass_inv * strong_grad(Pr, Ps, rxq_a_, sxq_a_, Jq_a_) +
               re_.lift * fscale_a_.cwiseProduct(FU1);
      out.u2 = re_.mass_inv * strong_grad(Pr, Ps, ryq_a_, syq_a_, Jq_a_) +
               re_.lift * fscale_a_.cwiseProduct(FU2);

      // elastic: stress equations weak, velocity equations strong
      MatX V1q = re_.interp_vol * s.v1, V2q = re_.interp_vol * s.v2;
      MatX Z = MatX::Zero(V1q.rows(), V1q.cols());
      out.s1 = re_.mass_inv * weak_div(V1q, Z, rxq_e_, ryq_e_, sxq_e_, syq_e_, Jq_e_) +
               re_.lift * fscale_e_.cwiseProduct(FS1);
      out.s2 = re_.mass_inv * weak_div(Z, V2q, rxq_e_, ryq_e_, sxq_e_, syq_e_, Jq_e_) +
               re_.lift * fscale_e_.cwiseProduct(FS2);
      out.s3 = re_.mass_inv * weak_div(V2q, V1q, rxq_e_, ryq_e_, sxq_e_, syq_e_, Jq_e_) +
               re_.lift * fscale_e_.cwiseProduct(FS3);
      MatX S1r = re_.interp_grad_r * s.s1, S1s = re_.interp_grad_s * s.s1;
      MatX S2r = re_.interp_grad_r * s.s2, S2s = re_.interp_grad_s * s.s2;
      MatX S3r = re_.interp_grad_r * s.s3, S3s = re_.interp_grad_s * s.s3;
      out.v1 = re_.mass_inv * (strong_grad(S1r, S1s, rxq_e_, sxq_e_, Jq_e_) +
                               strong_grad(S3r, S3s, ryq_e_, syq_e_, Jq_e_)) +
               re_.lift * fscale_e_.cwiseProduct(FV1);
      out.v2 = re_.mass_inv * (strong_grad(S3r, S3s, rxq_e_, sxq_e_, Jq_e_) +
                               strong_grad(S2r, S2s, ryq_e_, syq_e_, Jq_e_)) +
               re_.lift * fscale_e_.cwiseProduct(FV2);
    }
  }

  /// dU/dt: premass residual composed with the weight-adjusted mass inverses.
  void apply(const State& s, double t, State& out) const {
    State pre = make_state(re_, m_);
    apply_premass(s, t, pre);
    if (mode_ == GeometryMode::Affine) {
      out.p = apply_wadg_scalar(re_, mat_.c2, pre.p);
      out.u1 = std::move(pre.u1);
      out.u2 = std::move(pre.u2);
      out.v1 = (pre.v1.array().rowwise() / mat_.rho_e.transpose().array()).matrix();
      out.v2 = (pre.v2.array().rowwise() / mat_.rho_e.transpose().array()).matrix();
      apply_wadg_matrix(re_, mat_.C, pre.s1, pre.s2, pre.s3, out.s1, out.s2, out.s3);
    } else {
      out.p = wadg_apply(re_, c2w_, pre.p);
      out.u1 = wadg_apply(re_, invJ_a_, pre.u1);
      out.u2 = wadg_apply(re_, invJ_a_, pre.u2);
      out.v1 = wadg_apply(re_, invJrho_e_, pre.v1);
      out.v2 = wadg_apply(re_, invJrho_e_, pre.v2);
      apply_wadg_matrix(re_, Cw_, pre.s1, pre.s2, pre.s3, out.s1, out.s2, out.s3);
    }
  }

 private:
  const ReferenceElement& re_;
  const Mesh& m_;
  const MaterialField& mat_;
  FluxParams tau_;
  GeometryMode mode_;
  int Ka_ = 0, Ke_ = 0;
  MatX xf_, yf_;
  MatX fscale_a_, fscale_e_;
  Eigen::RowVectorXd rxc_, sxc_, ryc_, syc_;
  MatX rxq_a_, sxq_a_, ryq_a_, syq_a_, Jq_a_;
  MatX rxq_e_, sxq_e_, ryq_e_, syq_e_, Jq_e_;
  MatX c2w_, invJ_a_, invJrho_e_;
  std::array<MatX, 6> Cw_;
};

/// Elementwise L2 projection of an analytic solution onto the nodal space,
/// with the geometric Jacobian in the inner product (exact on affine meshes,
/// quadrature-based on curved ones).
inline State project_solution(const ReferenceElement& re, const Mesh& m,
                              const ExactSolution& sol, double t) {
  State s = make_state(re, m);
  const int nq = re.num_quad;
  MatX xq = re.interp_vol * m.x, yq = re.interp_vol * m.y;
  for (int k = 0; k < m.K; ++k) {
    VecX wj = (re.quad_w.array() * m.J.col(k).array()).matrix();
    MatX MJ = re.interp_vol.transpose() * wj.asDiagonal() * re.interp_vol;
    Eigen::LDLT<MatX> ldlt(MJ);
    const int c = m.local[k];
    if (m.is_acoustic(k)) {
      VecX fp(nq), f1(nq), f2(nq);
      for (int q = 0; q < nq; ++q) {
        FieldValues v = sol(xq(q, k), yq(q, k), t);
        fp(q) = v.p;
        f1(q) = v.u1;
        f2(q) = v.u2;
      }
      s.p.col(c) = ldlt.solve(re.interp_vol.transpose() * wj.cwiseProduct(fp));
      s.u1.col(c) = ldlt.solve(re.interp_vol.transpose() * wj.cwiseProduct(f1));
      s.u2.col(c) = ldlt.solve(re.interp_vol.transpose() * wj.cwiseProduct(f2));
    } else {
      VecX g[5];
      for (auto& v : g) v.resize(nq);
      for (int q = 0; q < nq; ++q) {
        FieldValues v = sol(xq(q, k), yq(q, k), t);
        g[0](q) = v.v1;
        g[1](q) = v.v2;
        g[2](q) = v.s1;
        g[3](q) = v.s2;
        g[4](q) = v.s3;
      }
      MatX* dst[5] = {&s.v1, &s.v2, &s.s1, &s.s2, &s.s3};
      for (int i = 0; i < 5; ++i)
        dst[i]->col(c) = ldlt.solve(re.interp_vol.transpose() * wj.cwiseProduct(g[i]));
    }
  }
  return s;
}

/// L2 error over all solution components against an analytic solution.
inline double l2_error(const ReferenceElement& re, const Mesh& m, const State& s,
                       const ExactSolution& sol, double t) {
  const int nq = re.num_quad;
  MatX xq = re.interp_vol * m.x, yq = re.interp_vol * m.y;
  double err2 = 0;
  for (int k = 0; k < m.K; ++k) {
    const int c = m.local[k];
    if (m.is_acoustic(k)) {
      VecX pq = re.interp_vol * s.p.col(c);
      VecX u1q = re.interp_vol * s.u1.col(c);
      VecX u2q = re.interp_vol * s.u2.col(c);
      for (int q = 0; q < nq; ++q) {
        FieldValues v = sol(xq(q, k), yq(q, k), t);
        double d = std::pow(pq(q) - v.p, 2) + std::pow(u1q(q) - v.u1, 2) +
                   std::pow(u2q(q) - v.u2, 2);
        err2 += re.quad_w(q) * m.J(q, k) * d;
      }
    } else {
      VecX v1q = re.interp_vol * s.v1.col(c);
      VecX v2q = re.interp_vol * s.v2.col(c);
      VecX s1q = re.interp_vol * s.s1.col(c);
      VecX s2q = re.interp_vol * s.s2.col(c);
      VecX s3q = re.interp_vol * s.s3.col(c);
      for (int q = 0; q < nq; ++q) {
        FieldValues v = sol(xq(q, k), yq(q, k), t);
        double d = std::pow(v1q(q) - v.v1, 2) + std::pow(v2q(q) - v.v2, 2) +
                   std::pow(s1q(q) - v.s1, 2) + std::pow(s2q(q) - v.s2, 2) +
                   std::pow(s3q(q) - v.s3, 2);
        err2 += re.quad_w(q) * m.J(q, k) * d;
      }
    }
  }
  return std::sqrt(err2);
}

/// Boundary-data closures for an analytic solution: Dirichlet pressure on
/// acoustic faces, prescribed traction A_n^T sigma on elastic faces.
inline void set_exact_bc(CoupledDgOperator& op, const ExactSolution& sol) {
  op.pressure_bc = [sol](double x, double y, double t) { return sol(x, y, t).p; };
  op.traction_bc = [sol](double x, double y, double n1, double n2, double t) {
    FieldValues v = sol(x, y, t);
    return Vec2(n1 * v.s1 + n2 * v.s3, n2 * v.s2 + n1 * v.s3);
  };
}

}  // namespace wadg
