#pragma once

#include <complex>

#include "wadg/materials.hpp"

namespace wadg {

// Local field values of an analytic solution in the solver's variables.
// Acoustic points fill (p, u1, u2); elastic points fill (v1, v2, s1, s2, s3).
struct FieldValues {
  double p = 0, u1 = 0, u2 = 0;
  double v1 = 0, v2 = 0, s1 = 0, s2 = 0, s3 = 0;
};

// ---------------------------------------------------------------------------
// Snell's law: plane pressure wave incident on a fluid(x2<0)-solid(x2>0)
// interface, reflected P plus transmitted P and S waves.

struct SnellConfig {
  double c_p1 = 1.0, rho1 = 1.0;
  double c_p2 = 3.0, c_s2 = 2.0, rho2 = 1.0;
  double omega = 2.0 * M_PI;
  double alpha_ip = 0.2;
  double C_ip = 1.0;

  // derived
  double alpha_rp = 0, alpha_tp = 0, alpha_ts = 0;
  double C_rp = 0, C_tp = 0, C_ts = 0;
  double kappa_p1 = 0, kappa_p2 = 0, kappa_s2 = 0;
  double lambda2 = 0, mu2 = 0;
};

inline SnellConfig snell_setup(SnellConfig cfg) {
  if (cfg.c_p1 <= 0 || cfg.c_p2 <= 0 || cfg.c_s2 <= 0 || cfg.rho1 <= 0 || cfg.rho2 <= 0)
    throw std::invalid_argument("snell_setup: nonpositive material parameter");
  double sa = std::sin(cfg.alpha_ip);
  double stp = cfg.c_p2 * sa / cfg.c_p1;
  double sts = cfg.c_s2 * sa / cfg.c_p1;
  if (stp >= 1.0 || sts >= 1.0)
    throw std::runtime_error("snell_setup: post-critical incidence (evanescent transmission)");
  cfg.alpha_rp = cfg.alpha_ip;
  cfg.alpha_tp = std::asin(stp);
  cfg.alpha_ts = std::asin(sts);
  cfg.kappa_p1 = cfg.omega / cfg.c_p1;
  cfg.kappa_p2 = cfg.omega / cfg.c_p2;
  cfg.kappa_s2 = cfg.omega / cfg.c_s2;

  double Zp1 = cfg.rho1 * cfg.c_p1 / std::cos(cfg.alpha_ip);
  double Zp2 = cfg.rho2 * cfg.c_p2 / std::cos(cfg.alpha_tp);
  double Zs2 = cfg.rho2 * cfg.c_s2 / std::cos(cfg.alpha_ts);
  double c2t = std::cos(2.0 * cfg.alpha_ts), s2t = std::sin(2.0 * cfg.alpha_ts);
  double denom = Zp2 * c2t * c2t + Zs2 * s2t * s2t + Zp1;
  cfg.C_rp = cfg.C_ip * (Zp2 * c2t * c2t + Zs2 * s2t * s2t - Zp1) / denom;
  cfg.C_tp = cfg.C_ip * (cfg.c_p1 * cfg.rho1) / (cfg.c_p2 * cfg.rho2) * 2.0 * Zp2 * c2t / denom;
  cfg.C_ts = cfg.C_ip * (cfg.c_p1 * cfg.rho1) / (cfg.c_s2 * cfg.rho2) * 2.0 * Zs2 * s2t / denom;

  cfg.mu2 = cfg.rho2 * cfg.c_s2 * cfg.c_s2;
  cfg.lambda2 = cfg.rho2 * cfg.c_p2 * cfg.c_p2 - 2.0 * cfg.mu2;
  return cfg;
}

namespace detail {

struct PlaneWave {
  double C;        // amplitude
  Vec2 d;          // displacement direction
  Vec2 khat;       // propagation direction
  double kappa;    // wavenumber
};

}  // namespace detail

inline FieldValues snell_fields(const SnellConfig& c, double x, double y, double t) {
  using detail::PlaneWave;
  FieldValues f;
  auto phase = [&](const PlaneWave& w) {
    return w.kappa * (x * w.khat(0) + y * w.khat(1)) - c.omega * t;
  };
  if (y < 0) {
    // fluid: incident + reflected P (d parallel to khat)
    PlaneWave ip{c.C_ip, {std::sin(c.alpha_ip), std::cos(c.alpha_ip)},
                 {std::sin(c.alpha_ip), std::cos(c.alpha_ip)}, c.kappa_p1};
    PlaneWave rp{c.C_rp, {std::sin(c.alpha_rp), -std::cos(c.alpha_rp)},
                 {std::sin(c.alpha_rp), -std::cos(c.alpha_rp)}, c.kappa_p1};
    for (const auto& w : {ip, rp}) {
      double sn = std::sin(phase(w));
      // u = dw/dt, p = rho c^2 div(w)
      f.u1 += c.omega * w.C * w.d(0) * sn;
      f.u2 += c.omega * w.C * w.d(1) * sn;
      f.p += -c.rho1 * c.c_p1 * c.c_p1 * w.C * w.kappa * w.d.dot(w.khat) * sn;
    }
  } else {
    PlaneWave tp{c.C_tp, {std::sin(c.alpha_tp), std::cos(c.alpha_tp)},
                 {std::sin(c.alpha_tp), std::cos(c.alpha_tp)}, c.kappa_p2};
    PlaneWave ts{c.C_ts, {-std::cos(c.alpha_ts), std::sin(c.alpha_ts)},
                 {std::sin(c.alpha_ts), std::cos(c.alpha_ts)}, c.kappa_s2};
    Mat3 C = isotropic_stiffness(c.lambda2, c.mu2);
    for (const auto& w : {tp, ts}) {
      double sn = std::sin(phase(w));
      f.v1 += c.omega * w.C * w.d(0) * sn;
      f.v2 += c.omega * w.C * w.d(1) * sn;
      // strain of C d cos(theta): eps_ij = -C kappa sym(d_i khat_j) sin(theta)
      double e1 = -w.C * w.kappa * w.d(0) * w.khat(0) * sn;
      double e2 = -w.C * w.kappa * w.d(1) * w.khat(1) * sn;
      double g = -w.C * w.kappa * (w.d(0) * w.khat(1) + w.d(1) * w.khat(0)) * sn;
      f.s1 += C(0, 0) * e1 + C(0, 1) * e2 + C(0, 2) * g;
      f.s2 += C(1, 0) * e1 + C(1, 1) * e2 + C(1, 2) * g;
      f.s3 += C(2, 0) * e1 + C(2, 1) * e2 + C(2, 2) * g;
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Scholte wave: evanescent interface wave, fluid x2>0 over solid x2<0.

struct ScholteConfig {
  double lambda1 = 1.0, rho1 = 1.0;          // acoustic (mu1 = 0)
  double lambda2 = 1.0, mu2 = 1.0, rho2 = 1.0;  // elastic
  double omega = 2.0;

  // derived
  double c1p = 0, c2p = 0, c2s = 0;
  double c = 0;        // Scholte speed
  double kappa = 0;
  double b1p = 0, b2p = 0, b2s = 0;
  std::complex<double> B1, B2, B3;
};

/// Characteristic function of the Scholte speed, in r = c/c_2s.
inline double scholte_characteristic(double c, double c1p, double c2p, double c2s, double rho1,
                                     double rho2) {
  double b1p = std::sqrt(1.0 - c * c / (c1p * c1p));
  double b2p = std::sqrt(1.0 - c * c / (c2p * c2p));
  double b2s = std::sqrt(1.0 - c * c / (c2s * c2s));
  double r = c / c2s;
  return (rho1 / rho2 * b2p + b1p) * std::pow(r, 4) - 4.0 * b1p * r * r -
         4.0 * b1p * (b2p * b2s - 1.0);
}

inline double scholte_speed(double lambda1, double rho1, double lambda2, double mu2,
                            double rho2) {
  double c1p = std::sqrt(lambda1 / rho1);
  double c2p = std::sqrt((lambda2 + 2.0 * mu2) / rho2);
  double c2s = std::sqrt(mu2 / rho2);
  double hi = std::min(c1p, c2s);
  auto f = [&](double c) { return scholte_characteristic(c, c1p, c2p, c2s, rho1, rho2); };
  // scan downward from just below hi for a bracket (f -> 0- as c -> 0+)
  const int nscan = 4000;
  double a = -1, b = -1;
  double prev_c = hi * (1.0 - 1e-9), prev_f = f(prev_c);
  for (int i = 1; i <= nscan; ++i) {
    double ci = hi * (1.0 - double(i) / nscan) + 1e-12;
    double fi = f(ci);
    if (fi == 0.0) return ci;
    if (fi * prev_f < 0) {
      a = ci;
      b = prev_c;
      break;
    }
    prev_c = ci;
    prev_f = fi;
  }
  if (a < 0) throw std::runtime_error("scholte_speed: no sign change in bracket");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (a + b);
    double fm = f(mid);
    if (std::abs(fm) < 1e-15 || b - a < 1e-15) return mid;
    if (fm * f(a) < 0)
      b = mid;
    else
      a = mid;
  }
  return 0.5 * (a + b);
}

inline ScholteConfig scholte_setup(ScholteConfig cfg) {
  cfg.c1p = std::sqrt(cfg.lambda1 / cfg.rho1);
  cfg.c2p = std::sqrt((cfg.lambda2 + 2.0 * cfg.mu2) / cfg.rho2);
  cfg.c2s = std::sqrt(cfg.mu2 / cfg.rho2);
  cfg.c = scholte_speed(cfg.lambda1, cfg.rho1, cfg.lambda2, cfg.mu2, cfg.rho2);
  cfg.kappa = cfg.omega / cfg.c;
  cfg.b1p = std::sqrt(1.0 - cfg.c * cfg.c / (cfg.c1p * cfg.c1p));
  cfg.b2p = std::sqrt(1.0 - cfg.c * cfg.c / (cfg.c2p * cfg.c2p));
  cfg.b2s = std::sqrt(1.0 - cfg.c * cfg.c / (cfg.c2s * cfg.c2s));
  // amplitudes from the interface system with B3 = 1
  using cd = std::complex<double>;
  const cd I(0.0, 1.0);
  double r2 = cfg.c * cfg.c / (cfg.c2s * cfg.c2s);
  cfg.B3 = 1.0;
  // first equation: 2i b2p B2 - (2 - r^2) B3 = 0
  cfg.B2 = (2.0 - r2) * cfg.B3 / (2.0 * I * cfg.b2p);
  // third equation: b1p B1 + b2p B2 + i B3 = 0
  cfg.B1 = -(cfg.b2p * cfg.B2 + I * cfg.B3) / cfg.b1p;
  return cfg;
}

/// Residual of the 3x3 amplitude system (max row magnitude).
inline double scholte_amplitude_residual(const ScholteConfig& c) {
  using cd = std::complex<double>;
  const cd I(0.0, 1.0);
  double r2 = c.c * c.c / (c.c2s * c.c2s);
  double rr = c.rho2 / c.rho1;
  cd e1 = 2.0 * I * c.b2p * c.B2 - (2.0 - r2) * c.B3;
  cd e2 = r2 * c.B1 + rr * (2.0 - r2) * c.B2 + 2.0 * I * rr * c.b2s * c.B3;
  cd e3 = c.b1p * c.B1 + c.b2p * c.B2 + I * c.B3;
  return std::max({std::abs(e1), std::abs(e2), std::abs(e3)});
}

inline FieldValues scholte_fields(const ScholteConfig& c, double x, double y, double t) {
  using cd = std::complex<double>;
  const cd I(0.0, 1.0);
  FieldValues f;
  cd E = std::exp(I * (c.kappa * x - c.omega * t));
  double k = c.kappa;
  if (y > 0) {
    cd decay = std::exp(-k * c.b1p * y);
    cd w1 = I * k * c.B1 * decay * E;
    cd w2 = -k * c.b1p * c.B1 * decay * E;
    f.u1 = std::real(-I * c.omega * w1);
    f.u2 = std::real(-I * c.omega * w2);
    f.p = std::real(-c.rho1 * c.omega * c.omega * c.B1 * decay * E);
  } else {
    cd ep = std::exp(k * c.b2p * y), es = std::exp(k * c.b2s * y);
    cd w1 = (I * k * c.B2 * ep - k * c.b2s * c.B3 * es) * E;
    cd w2 = (k * c.b2p * c.B2 * ep + I * k * c.B3 * es) * E;
    f.v1 = std::real(-I * c.omega * w1);
    f.v2 = std::real(-I * c.omega * w2);
    cd e1 = (-k * k * c.B2 * ep - I * k * k * c.b2s * c.B3 * es) * E;
    cd e2 = (k * k * c.b2p * c.b2p * c.B2 * ep + I * k * k * c.b2s * c.B3 * es) * E;
    cd g = (2.0 * I * k * k * c.b2p * c.B2 * ep - k * k * (1.0 + c.b2s * c.b2s) * c.B3 * es) * E;
    Mat3 C = isotropic_stiffness(c.lambda2, c.mu2);
    f.s1 = std::real(C(0, 0) * e1 + C(0, 1) * e2 + C(0, 2) * g);
    f.s2 = std::real(C(1, 0) * e1 + C(1, 1) * e2 + C(1, 2) * g);
    f.s3 = std::real(C(2, 0) * e1 + C(2, 1) * e2 + C(2, 2) * g);
  }
  return f;
}

// ---------------------------------------------------------------------------

using ExactSolution = std::function<FieldValues(double, double, double)>;

inline ExactSolution make_snell_solution(const SnellConfig& cfg) {
  return [cfg](double x, double y, double t) { return snell_fields(cfg, x, y, t); };
}

inline ExactSolution make_scholte_solution(const ScholteConfig& cfg) {
  return [cfg](double x, double y, double t) { return scholte_fields(cfg, x, y, t); };
}

}  // namespace wadg
