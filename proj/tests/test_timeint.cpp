#include <catch2/catch_amalgamated.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "wadg/timeint.hpp"

using namespace wadg;

namespace {

// pack/unpack acoustic-only states for the dense oracle
VecX pack(const State& s) {
  VecX v(3 * s.p.size());
  v << Eigen::Map<const VecX>(s.p.data(), s.p.size()),
      Eigen::Map<const VecX>(s.u1.data(), s.u1.size()),
      Eigen::Map<const VecX>(s.u2.data(), s.u2.size());
  return v;
}

State unpack(const VecX& v, const ReferenceElement& re, const Mesh& m) {
  State s = make_state(re, m);
  Eigen::Index n = s.p.size();
  s.p = Eigen::Map<const MatX>(v.data(), s.p.rows(), s.p.cols());
  s.u1 = Eigen::Map<const MatX>(v.data() + n, s.p.rows(), s.p.cols());
  s.u2 = Eigen::Map<const MatX>(v.data() + 2 * n, s.p.rows(), s.p.cols());
  return s;
}

}  // namespace

TEST_CASE("time step estimate") {
  auto re = build_reference_element(3);
  auto m = uniform_square_mesh(8, re, [](double, double) { return Region::Acoustic; });
  auto mat = uniform_material(m, re, 1.0, 1.0, 1.0, 1.0);
  double dt = estimate_dt(m, mat, 3, 0.5);
  CHECK(dt == Catch::Approx(0.5 * m.min_inradius_h() / 16.0).epsilon(1e-12));
  // doubling cmax halves dt
  auto mat2 = uniform_material(m, re, 4.0, 1.0, 1.0, 1.0);
  CHECK(estimate_dt(m, mat2, 3, 0.5) == Catch::Approx(dt / 2).epsilon(1e-12));
  // monotone decreasing in N
  double prev = estimate_dt(m, mat, 1, 0.5);
  for (int N = 2; N <= 6; ++N) {
    double d = estimate_dt(m, mat, N, 0.5);
    CHECK(d < prev);
    prev = d;
  }
  CHECK_THROWS(estimate_dt(m, mat, 3, 0.0));
}

TEST_CASE("zero state stays zero and lands exactly") {
  auto re = build_reference_element(2);
  auto m = uniform_square_mesh(2, re, [](double, double) { return Region::Acoustic; });
  set_all_boundary_bc(m, Bc::ZeroVelocity);
  auto mat = uniform_material(m, re, 1.0, 1.0, 1.0, 1.0);
  CoupledDgOperator op(re, m, mat, FluxParams{}, GeometryMode::Affine);
  State s = make_state(re, m);
  double t_final = 0.713;
  double last_t = -1;
  State out = integrate(s, make_rhs(op), 0.01, t_final,
                        [&](const State&, double t) { last_t = t; });
  CHECK(last_t == t_final);
  double mx = 0;
  for_each_field(out, [&](MatX& f) {
    if (f.size()) mx = std::max(mx, f.cwiseAbs().maxCoeff());
  });
  CHECK(mx == 0.0);
}

TEST_CASE("fourth-order accuracy against a dense matrix exponential") {
  auto re = build_reference_element(1);
  auto m = uniform_square_mesh(1, re, [](double, double) { return Region::Acoustic; });
  set_all_boundary_bc(m, Bc::ZeroVelocity);
  auto mat = uniform_material(m, re, 1.0, 1.0, 1.0, 1.0);
  CoupledDgOperator op(re, m, mat, FluxParams{0.5, 0.5}, GeometryMode::Affine);
  auto rhs = make_rhs(op);

  const int n = 3 * re.num_basis * m.K;
  MatX L(n, n);
  for (int j = 0; j < n; ++j) {
    VecX e = VecX::Zero(n);
    e(j) = 1.0;
    State sj = unpack(e, re, m), rj = make_state(re, m);
    rhs(sj, 0.0, rj);
    L.col(j) = pack(rj);
  }
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(-1, 1);
  VecX x0(n);
  for (int i = 0; i < n; ++i) x0(i) = uni(rng);
  const double T = 0.5;
  VecX xref = (L * T).exp() * x0;

  std::vector<double> errs;
  for (double dt : {0.1, 0.05, 0.025}) {
    State out = integrate(unpack(x0, re, m), rhs, dt, T);
    errs.push_back((pack(out) - xref).norm());
  }
  double slope = std::log2(errs[0] / errs[2]) / 2.0;
  CHECK(slope == Catch::Approx(4.0).margin(0.2));
}

TEST_CASE("energy is non-increasing with penalty fluxes") {
  auto re = build_reference_element(3);
  auto m = uniform_square_mesh(
      2, re, [](double, double y) { return y > 0 ? Region::Acoustic : Region::Elastic; });
  set_region_boundary_bc(m, Bc::ZeroVelocity, Bc::TractionPrescribed);
  double c2 = 1.3, lam = 2.0, mu = 1.0, rho = 1.1;
  auto mat = uniform_material(m, re, c2, lam, mu, rho);
  CoupledDgOperator op(re, m, mat, FluxParams{0.5, 0.5}, GeometryMode::Affine);

  Mat3 Cinv = isotropic_stiffness(lam, mu).inverse();
  auto energy = [&](const State& s) {
    double e = 0;
    for (int k = 0; k < m.K; ++k) {
      int c = m.local[k];
      double J = m.Jn(0, k);
      if (m.is_acoustic(k)) {
        e += J * (s.p.col(c).dot(re.mass * s.p.col(c)) / c2 +
                  s.u1.col(c).dot(re.mass * s.u1.col(c)) +
                  s.u2.col(c).dot(re.mass * s.u2.col(c)));
      } else {
        e += J * rho *
             (s.v1.col(c).dot(re.mass * s.v1.col(c)) + s.v2.col(c).dot(re.mass * s.v2.col(c)));
        const MatX* sig[3] = {&s.s1, &s.s2, &s.s3};
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            e += J * Cinv(a, b) * sig[a]->col(c).dot(re.mass * sig[b]->col(c));
      }
    }
    return 0.5 * e;
  };

  State s = make_state(re, m);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uni(-1, 1);
  for_each_field(s, [&](MatX& f) {
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = uni(rng);
  });
  std::vector<double> E;
  double dt = estimate_dt(m, mat, 3, 0.5);
  integrate(s, make_rhs(op), dt, 30 * dt,
            [&](const State& st, double) { E.push_back(energy(st)); });
  REQUIRE(E.size() == 31);
  for (size_t i = 1; i < E.size(); ++i) CHECK(E[i] <= E[i - 1] * (1 + 1e-10));
  CHECK(E.back() < E.front());
}

TEST_CASE("NaN guard aborts with the step index") {
  auto re = build_reference_element(1);
  auto m = uniform_square_mesh(1, re, [](double, double) { return Region::Acoustic; });
  set_all_boundary_bc(m, Bc::ZeroVelocity);
  State s = make_state(re, m);
  s.p.setConstant(1.0);
  auto bad = [](const State& st, double, State& out) {
    out = st;
    out.p.setConstant(std::numeric_limits<double>::quiet_NaN());
  };
  CHECK_THROWS_WITH(integrate(s, bad, 0.1, 1.0), Catch::Matchers::ContainsSubstring("step 1"));
}

TEST_CASE("ricker point source") {
  auto re = build_reference_element(3);
  auto m = uniform_square_mesh(
      4, re, [](double x, double y) { return (x > 0 && y > 0) ? Region::Acoustic : Region::Elastic; });
  auto mat = uniform_material(m, re, 1.0, 1.0, 1.0, 2.0);
  double f0 = 0.17, t0 = 1.0 / 0.17;
  auto src = make_ricker_source(re, m, mat, -0.02, 0.3, f0, t0);
  CHECK_FALSE(src.acoustic);

  SECTION("time factor") {
    CHECK(src.time_factor(t0) == 1.0);
    CHECK(std::abs(src.time_factor(t0 + 100)) < 1e-12);
    CHECK(std::abs(src.time_factor(t0 - 100)) < 1e-12);
    // zero-mean wavelet: the truncated integral over (0, 2 t0) equals the
    // analytic tail value 2 exp(-pi^2)/f0 (antiderivative a exp(-a^2))
    double sum = 0;
    int nt = 200000;
    double dt = 2 * t0 / nt;
    for (int i = 0; i <= nt; ++i) {
      double w = (i == 0 || i == nt) ? 0.5 : 1.0;
      sum += w * src.time_factor(i * dt) * dt;
    }
    CHECK(sum == Catch::Approx(2 * std::exp(-M_PI * M_PI) / f0).epsilon(1e-6));
    CHECK(std::abs(sum) < 1e-3);
    // over a wide symmetric window the mean vanishes
    double wide = 0;
    dt = 80.0 / nt;
    for (int i = 0; i <= nt; ++i) {
      double w = (i == 0 || i == nt) ? 0.5 : 1.0;
      wide += w * src.time_factor(t0 - 40.0 + i * dt) * dt;
    }
    CHECK(std::abs(wide) < 1e-12);
  }
  SECTION("delta load is a consistent projection") {
    // integral of the load against any polynomial g equals g(x0)/rho
    double J = m.Jn(0, src.elem);
    double rho = mat.rho_e(m.local[src.elem]);
    VecX g(re.num_basis);
    for (int i = 0; i < re.num_basis; ++i) {
      double x = m.x(i, src.elem), y = m.y(i, src.elem);
      g(i) = 0.3 + x - 2 * y + x * y;
    }
    double gx0 = 0.3 + (-0.02) - 2 * 0.3 + (-0.02) * 0.3;
    CHECK(src.load.dot(J * (re.mass * g)) == Catch::Approx(gx0 / rho).epsilon(1e-10));
  }
  SECTION("source outside the mesh") {
    CHECK_THROWS(make_ricker_source(re, m, mat, 3.0, 0.0, f0, t0));
  }
}
