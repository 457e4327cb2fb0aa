#pragma once

#include <optional>

#include "wadg/dg.hpp"

namespace wadg {

// Carpenter-Kennedy low-storage five-stage fourth-order RK coefficients.
namespace lserk {
inline constexpr double a[5] = {0.0, -567301805773.0 / 1357537059087.0,
                                -2404267990393.0 / 2016746695238.0,
                                -3550918686646.0 / 2091501179385.0,
                                -1275806237668.0 / 842570457699.0};
inline constexpr double b[5] = {1432997174477.0 / 9575080441755.0,
                                5161836677717.0 / 13612068292357.0,
                                1720146321549.0 / 2090206949498.0,
                                3134564353537.0 / 4481467310338.0,
                                2277821191437.0 / 14882151754819.0};
inline constexpr double c[5] = {0.0, 1432997174477.0 / 9575080441755.0,
                                2526269341429.0 / 6820363962896.0,
                                2006345519317.0 / 3224310063776.0,
                                2802321613138.0 / 2924317926251.0};
}  // namespace lserk

struct TimeConfig {
  double t_final = 1.0;
  double cfl = 0.5;
  std::optional<double> dt_override;
};

/// Stable explicit step size: cfl * min_k h_k / (c_max,k (N+1)^2) with
/// h_k = 2 * inradius of the straight triangle.
inline double estimate_dt(const Mesh& m, const MaterialField& mat, int N, double cfl) {
  if (!(cfl > 0)) throw std::invalid_argument("estimate_dt: cfl must be positive");
  double dt = std::numeric_limits<double>::infinity();
  for (int k = 0; k < m.K; ++k) {
    Vec2 a = m.vertices.row(m.elements[k][0]).transpose();
    Vec2 b = m.vertices.row(m.elements[k][1]).transpose();
    Vec2 c = m.vertices.row(m.elements[k][2]).transpose();
    double area = 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
    double per = (b - a).norm() + (c - b).norm() + (a - c).norm();
    double h = 2.0 * (2.0 * area / per);
    dt = std::min(dt, h / (mat.cmax(k) * double((N + 1) * (N + 1))));
  }
  return cfl * dt;
}

/// Point source on the vertical velocity: delta at (x0,y0) discretized by
/// basis evaluation in the containing element, with Ricker time dependence
/// (1 - 2 (pi f0 (t-t0))^2) exp(-(pi f0 (t-t0))^2).
struct PointSource {
  int elem = -1;      // global element index
  bool acoustic = false;
  VecX load;          // Np, (M^k)^{-1}-consistent delta load incl. 1/(rho J)
  double f0 = 0, t0 = 0;

  double time_factor(double t) const {
    double a = M_PI * f0 * (t - t0);
    return (1.0 - 2.0 * a * a) * std::exp(-a * a);
  }

  void add_to(State& ds, const Mesh& m, double t) const {
    double f = time_factor(t);
    int c = m.local[elem];
    if (acoustic)
      ds.u2.col(c) += f * load;
    else
      ds.v2.col(c) += f * load;
  }
};

inline PointSource make_ricker_source(const ReferenceElement& re, const Mesh& m,
                                      const MaterialField& mat, double x0, double y0, double f0,
                                      double t0) {
  if (m.curved)
    throw std::invalid_argument("make_ricker_source: straight meshes only");
  PointSource src;
  src.f0 = f0;
  src.t0 = t0;
  const double eps = 1e-12;
  for (int k = 0; k < m.K && src.elem < 0; ++k) {
    Vec2 a = m.vertices.row(m.elements[k][0]).transpose();
    Vec2 b = m.vertices.row(m.elements[k][1]).transpose();
    Vec2 c = m.vertices.row(m.elements[k][2]).transpose();
    // barycentric coordinates of (x0, y0)
    double det = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    double l2 = ((x0 - a.x()) * (c - a).y() - (y0 - a.y()) * (c - a).x()) / det;
    double l3 = ((b - a).x() * (y0 - a.y()) - (b - a).y() * (x0 - a.x())) / det;
    double l1 = 1.0 - l2 - l3;
    if (l1 < -eps || l2 < -eps || l3 < -eps) continue;
    src.elem = k;
    src.acoustic = m.is_acoustic(k);
    // reference coordinates: x = l1 a + l2 b + l3 c with l1 = -(r+s)/2 etc.
    MatX pt(1, 2);
    pt(0, 0) = -l1 + l2 - l3;
    pt(0, 1) = -l1 - l2 + l3;
    VecX phi = nodal_interp(re, pt).transpose();
    double rho = src.acoustic ? 1.0 : mat.rho_e(m.local[k]);
    src.load = (re.mass_inv * phi) / (m.Jn(0, k) * rho);
  }
  if (src.elem < 0)
    throw std::runtime_error("make_ricker_source: source point outside the mesh");
  return src;
}

namespace detail {
inline bool state_finite(const State& s) {
  bool ok = true;
  auto& sm = const_cast<State&>(s);
  for_each_field(sm, [&](MatX& f) {
    if (f.size() && !f.allFinite()) ok = false;
  });
  return ok;
}
}  // namespace detail

/// Advance ds/dt = rhs(s, t) from t=0 to t_final with LSERK(5,4).  The last
/// step is shortened so the final time equals t_final exactly.  on_step, if
/// given, is called after every accepted step (and once at t=0).
template <class Rhs>
State integrate(State s, Rhs&& rhs, double dt, double t_final,
                const std::function<void(const State&, double)>& on_step = {}) {
  if (!(dt > 0) || !(t_final > 0))
    throw std::invalid_argument("integrate: need positive dt and t_final");
  const long nsteps = std::max(1L, long(std::ceil(t_final / dt - 1e-12)));
  const double h = t_final / double(nsteps);
  State res = s, k = s;
  for_each_field(res, [](MatX& f) { f.setZero(); });
  if (on_step) on_step(s, 0.0);
  for (long step = 0; step < nsteps; ++step) {
    const double t = double(step) * h;
    for (int stage = 0; stage < 5; ++stage) {
      rhs(s, t + lserk::c[stage] * h, k);
      for_each_field2(res, k, [&](MatX& r, const MatX& ki) {
        r = lserk::a[stage] * r + h * ki;
      });
      for_each_field2(s, res, [&](MatX& u, const MatX& r) { u += lserk::b[stage] * r; });
    }
    if (!detail::state_finite(s))
      throw std::runtime_error("integrate: NaN detected at step " + std::to_string(step + 1));
    if (on_step) on_step(s, step + 1 == nsteps ? t_final : t + h);
  }
  return s;
}

/// RHS closure: DG operator plus optional point source.
inline auto make_rhs(const CoupledDgOperator& op, const PointSource* src = nullptr) {
  const Mesh& m = op.mesh();
  return [&op, src, &m](const State& s, double t, State& out) {
    op.apply(s, t, out);
    if (src) src->add_to(out, m, t);
  };
}

}  // namespace wadg
