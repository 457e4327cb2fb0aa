#pragma once

#include <complex>
#include <fstream>

#include <lapacke.h>

#include "wadg/timeint.hpp"

namespace wadg {

// ---------------------------------------------------------------------------
// Global DoF packing: acoustic fields (p, u1, u2) then elastic (v1..s3),
// each field column-major over its region.

inline int total_dof(const ReferenceElement& re, const Mesh& m) {
  return re.num_basis *
         (3 * int(m.acoustic_elems.size()) + 5 * int(m.elastic_elems.size()));
}

inline VecX pack_state(const State& s) {
  VecX v(3 * s.p.size() + 5 * s.v1.size());
  Eigen::Index at = 0;
  auto& sm = const_cast<State&>(s);
  for_each_field(sm, [&](MatX& f) {
    v.segment(at, f.size()) = Eigen::Map<const VecX>(f.data(), f.size());
    at += f.size();
  });
  return v;
}

inline State unpack_state(const VecX& v, const ReferenceElement& re, const Mesh& m) {
  State s = make_state(re, m);
  Eigen::Index at = 0;
  for_each_field(s, [&](MatX& f) {
    f = Eigen::Map<const MatX>(v.data() + at, f.rows(), f.cols());
    at += f.size();
  });
  return s;
}

/// Dense semidiscrete operator L with dQ/dt = L Q, assembled by unit-vector
/// probing of the full RHS (including the weight-adjusted mass application).
inline MatX assemble_operator(const ReferenceElement& re, const Mesh& m,
                              const MaterialField& mat, FluxParams tau, GeometryMode mode,
                              int dof_cap = 20000) {
  const int n = total_dof(re, m);
  if (n > dof_cap)
    throw std::runtime_error("assemble_operator: " + std::to_string(n) +
                             " DoF exceeds the cap of " + std::to_string(dof_cap) +
                             "; use a smaller mesh or lower N");
  CoupledDgOperator op(re, m, mat, tau, mode);
  MatX L(n, n);
  State out = make_state(re, m);
  for (int j = 0; j < n; ++j) {
    VecX e = VecX::Zero(n);
    e(j) = 1.0;
    State sj = unpack_state(e, re, m);
    op.apply(sj, 0.0, out);
    L.col(j) = pack_state(out);
  }
  return L;
}

/// Full eigenvalue set of a dense operator (LAPACK dgeev).
inline std::vector<std::complex<double>> spectrum(MatX L) {
  const lapack_int n = lapack_int(L.rows());
  if (L.rows() != L.cols()) throw std::invalid_argument("spectrum: matrix not square");
  VecX wr(n), wi(n);
  lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, L.data(), n, wr.data(),
                                  wi.data(), nullptr, 1, nullptr, 1);
  if (info != 0)
    throw std::runtime_error("spectrum: dgeev failed with info " + std::to_string(info));
  std::vector<std::complex<double>> eigs(n);
  for (lapack_int i = 0; i < n; ++i) eigs[size_t(i)] = {wr(i), wi(i)};
  return eigs;
}

inline double max_real_part(const std::vector<std::complex<double>>& eigs) {
  double m = -std::numeric_limits<double>::infinity();
  for (auto& e : eigs) m = std::max(m, e.real());
  return m;
}

inline double spectral_radius(const std::vector<std::complex<double>>& eigs) {
  double m = 0;
  for (auto& e : eigs) m = std::max(m, std::abs(e));
  return m;
}

inline void write_spectra_csv(const std::string& path,
                              const std::vector<std::complex<double>>& eigs) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_spectra_csv: cannot open " + path);
  os.precision(17);
  os << "re,im\n";
  for (auto& e : eigs) os << e.real() << "," << e.imag() << "\n";
}

/// Discrete energy: quadrature evaluation of
/// 1/2 sum_k int [p^2/c^2 + |u|^2] J + 1/2 sum_k int [rho |v|^2 + s^T C^-1 s] J.
inline double discrete_energy(const ReferenceElement& re, const Mesh& m,
                              const MaterialField& mat, const State& s) {
  double e = 0;
  const int nq = re.num_quad;
  for (int k = 0; k < m.K; ++k) {
    const int c = m.local[k];
    if (m.is_acoustic(k)) {
      VecX pq = re.interp_vol * s.p.col(c);
      VecX u1q = re.interp_vol * s.u1.col(c);
      VecX u2q = re.interp_vol * s.u2.col(c);
      for (int q = 0; q < nq; ++q)
        e += re.quad_w(q) * m.J(q, k) *
             (pq(q) * pq(q) / mat.c2(q, c) + u1q(q) * u1q(q) + u2q(q) * u2q(q));
    } else {
      VecX v1q = re.interp_vol * s.v1.col(c);
      VecX v2q = re.interp_vol * s.v2.col(c);
      VecX s1q = re.interp_vol * s.s1.col(c);
      VecX s2q = re.interp_vol * s.s2.col(c);
      VecX s3q = re.interp_vol * s.s3.col(c);
      double rho = mat.rho_e(c);
      for (int q = 0; q < nq; ++q) {
        Vec3 sv(s1q(q), s2q(q), s3q(q));
        Mat3 Ci = voigt_from_entries({mat.Cinv[0](q, c), mat.Cinv[1](q, c), mat.Cinv[2](q, c),
                                      mat.Cinv[3](q, c), mat.Cinv[4](q, c), mat.Cinv[5](q, c)});
        e += re.quad_w(q) * m.J(q, k) *
             (rho * (v1q(q) * v1q(q) + v2q(q) * v2q(q)) + sv.dot(Ci * sv));
      }
    }
  }
  return 0.5 * e;
}

// ---------------------------------------------------------------------------
// Convergence studies on the interface problems.

enum class Scenario { Snell, Scholte, ScholteKm };

struct ScenarioSetup {
  ExactSolution sol;
  std::function<Region(double, double)> region;
  double acoustic_c2 = 1;
  Mat3 elastic_C;
  double elastic_rho = 1;
  double t_final = 5.0;
  // Penalty terms add real eigenvalues ~ tau c / (cfl-normalized dt), so the
  // workable CFL shrinks with the fastest wavespeed; 0.25 is safe up to c ~ 3.
  double cfl = 0.25;
};

namespace detail {
inline ExactSolution scale_solution(ExactSolution sol, double a) {
  return [sol = std::move(sol), a](double x, double y, double t) {
    FieldValues f = sol(x, y, t);
    f.p *= a;
    f.u1 *= a;
    f.u2 *= a;
    f.v1 *= a;
    f.v2 *= a;
    f.s1 *= a;
    f.s2 *= a;
    f.s3 *= a;
    return f;
  };
}
}  // namespace detail

inline ScenarioSetup make_scenario(Scenario sc) {
  ScenarioSetup st;
  switch (sc) {
    case Scenario::Snell: {
      auto cfg = snell_setup(SnellConfig{});
      st.sol = make_snell_solution(cfg);
      // fluid below the interface
      st.region = [](double, double y) { return y < 0 ? Region::Acoustic : Region::Elastic; };
      st.acoustic_c2 = cfg.c_p1 * cfg.c_p1;
      st.elastic_C = isotropic_stiffness(cfg.lambda2, cfg.mu2);
      st.elastic_rho = cfg.rho2;
      st.t_final = 5.0;
      break;
    }
    case Scenario::Scholte: {
      auto cfg = scholte_setup(ScholteConfig{});
      // potentials normalized per unit shear impedance (trivial for unit media)
      st.sol = detail::scale_solution(make_scholte_solution(cfg), 1.0 / (cfg.rho2 * cfg.c2s));
      st.region = [](double, double y) { return y > 0 ? Region::Acoustic : Region::Elastic; };
      st.acoustic_c2 = cfg.lambda1 / cfg.rho1;
      st.elastic_C = isotropic_stiffness(cfg.lambda2, cfg.mu2);
      st.elastic_rho = cfg.rho2;
      st.t_final = 5.0;
      break;
    }
    case Scenario::ScholteKm: {
      ScholteConfig cfg;
      cfg.lambda1 = 1.5 * 1.5;  // fluid c = 1.5, rho = 1
      cfg.rho1 = 1.0;
      cfg.rho2 = 2.5;           // solid cp = 3, cs = 1.5
      cfg.mu2 = cfg.rho2 * 1.5 * 1.5;
      cfg.lambda2 = cfg.rho2 * 9.0 - 2.0 * cfg.mu2;
      cfg = scholte_setup(cfg);
      st.sol = detail::scale_solution(make_scholte_solution(cfg), 1.0 / (cfg.rho2 * cfg.c2s));
      st.region = [](double, double y) { return y > 0 ? Region::Acoustic : Region::Elastic; };
      st.acoustic_c2 = cfg.lambda1 / cfg.rho1;
      st.elastic_C = isotropic_stiffness(cfg.lambda2, cfg.mu2);
      st.elastic_rho = cfg.rho2;
      st.t_final = 1.0;
      break;
    }
  }
  return st;
}

/// One interface-problem run on [-1,1]^2 with n elements per side (h = 2/n):
/// project the exact solution at t=0, advance to t_final, return the L2 error.
inline double run_interface_problem(Scenario sc, int N, int n, FluxParams tau,
                                    GeometryMode mode, bool warped = false, double cfl = 0,
                                    double t_final_override = -1) {
  auto st = make_scenario(sc);
  if (cfl <= 0) cfl = st.cfl;
  auto re = build_reference_element(N);
  auto m = uniform_square_mesh(n, re, st.region);
  if (warped) warp_mesh(m, re);
  set_region_boundary_bc(m, Bc::DirichletPressure, Bc::TractionPrescribed);
  Mat3 C = st.elastic_C;
  double rho = st.elastic_rho, c2 = st.acoustic_c2;
  auto mat = make_material(
      m, re, [c2](double, double) { return c2; }, [C](double, double) { return C; },
      [rho](int) { return rho; });
  CoupledDgOperator op(re, m, mat, tau, mode);
  set_exact_bc(op, st.sol);
  State s0 = project_solution(re, m, st.sol, 0.0);
  double T = t_final_override > 0 ? t_final_override : st.t_final;
  double dt = estimate_dt(m, mat, N, cfl);
  State sT = integrate(std::move(s0), make_rhs(op), dt, T);
  return l2_error(re, m, sT, st.sol, T);
}

struct ConvergenceRow {
  int N;
  double h;
  double error;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  // least-squares slope per N over the finest (up to) 3 levels
  std::map<int, double> slope;
};

inline double ls_slope(const std::vector<double>& h, const std::vector<double>& err) {
  const size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
}

inline ConvergenceResult convergence_study(Scenario sc, const std::vector<int>& Ns,
                                           const std::vector<int>& ns, FluxParams tau,
                                           GeometryMode mode, bool warped = false,
                                           double cfl = 0, double t_final_override = -1) {
  ConvergenceResult res;
  for (int N : Ns) {
    std::vector<double> hs, errs;
    for (int n : ns) {
      double err = run_interface_problem(sc, N, n, tau, mode, warped, cfl, t_final_override);
      res.rows.push_back({N, 2.0 / n, err});
      hs.push_back(2.0 / n);
      errs.push_back(err);
    }
    size_t take = std::min<size_t>(3, hs.size());
    std::vector<double> hf(hs.end() - take, hs.end()), ef(errs.end() - take, errs.end());
    res.slope[N] = ls_slope(hf, ef);
  }
  return res;
}

inline void write_convergence_csv(const std::string& path, const ConvergenceResult& res) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_convergence_csv: cannot open " + path);
  os.precision(12);
  os << "N,h,error\n";
  for (auto& r : res.rows) os << r.N << "," << r.h << "," << r.error << "\n";
}

}  // namespace wadg
