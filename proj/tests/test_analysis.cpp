#include <catch2/catch_amalgamated.hpp>

#include "wadg/analysis.hpp"

using namespace wadg;

namespace {

VecX random_vec(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1, 1);
  VecX v(n);
  for (int i = 0; i < n; ++i) v(i) = uni(rng);
  return v;
}

}  // namespace

TEST_CASE("operator assembly matches the RHS") {
  auto re = build_reference_element(1);
  auto m = uniform_square_mesh(1, re, [](double, double) { return Region::Acoustic; });
  set_all_boundary_bc(m, Bc::ZeroVelocity);
  auto mat = uniform_material(m, re, 1.0, 1.0, 1.0, 1.0);
  CHECK(total_dof(re, m) == 18);
  MatX L = assemble_operator(re, m, mat, FluxParams{0.5, 0.5}, GeometryMode::Affine);
  REQUIRE(L.rows() == 18);
  CoupledDgOperator op(re, m, mat, FluxParams{0.5, 0.5}, GeometryMode::Affine);
  State out = make_state(re, m);
  for (unsigned seed = 0; seed < 5; ++seed) {
    VecX x = random_vec(18, seed);
    op.apply(unpack_state(x, re, m), 0.0, out);
    VecX y = pack_state(out);
    CHECK((L * x - y).norm() / y.norm() < 1e-11);
  }
  // determinism
  MatX L2 = assemble_operator(re, m, mat, FluxParams{0.5, 0.5}, GeometryMode::Affine);
  CHECK((L - L2).cwiseAbs().maxCoeff() == 0.0);
  // DoF cap
  CHECK_THROWS(assemble_operator(re, m, mat, FluxParams{}, GeometryMode::Affine, 10));
}

TEST_CASE("central flux operator is antisymmetric in the energy weight") {
  auto re = build_reference_element(2);
  auto m = uniform_square_mesh(
      2, re, [](double, double y) { return y > 0 ? Region::Acoustic : Region::Elastic; });
  set_region_boundary_bc(m, Bc::ZeroVelocity, Bc::TractionPrescribed);
  double c2 = 1.4, lam = 1.5, mu = 0.8, rho = 1.2;
  auto mat = uniform_material(m, re, c2, lam, mu, rho);
  MatX L = assemble_operator(re, m, mat, FluxParams{0.0, 0.0}, GeometryMode::Affine);

  // dense block energy weight in packing order p,u1,u2,v1,v2,s1,s2,s3
  const int np = re.num_basis;
  const int Ka = int(m.acoustic_elems.size()), Ke = int(m.elastic_elems.size());
  const int n = total_dof(re, m);
  MatX W = MatX::Zero(n, n);
  Mat3 Cinv = isotropic_stiffness(lam, mu).inverse();
  auto blk = [&](int field, int col) { return 0; };
  (void)blk;
  // offsets of each field block
  int off_p = 0, off_u1 = np * Ka, off_u2 = 2 * np * Ka;
  int off_v1 = 3 * np * Ka, off_v2 = off_v1 + np * Ke;
  int off_s[3] = {off_v2 + np * Ke, off_v2 + 2 * np * Ke, off_v2 + 3 * np * Ke};
  for (int a = 0; a < Ka; ++a) {
    double J = m.Jn(0, m.acoustic_elems[size_t(a)]);
    W.block(off_p + a * np, off_p + a * np, np, np) = (J / c2) * re.mass;
    W.block(off_u1 + a * np, off_u1 + a * np, np, np) = J * re.mass;
    W.block(off_u2 + a * np, off_u2 + a * np, np, np) = J * re.mass;
  }
  for (int e = 0; e < Ke; ++e) {
    double J = m.Jn(0, m.elastic_elems[size_t(e)]);
    W.block(off_v1 + e * np, off_v1 + e * np, np, np) = rho * J * re.mass;
    W.block(off_v2 + e * np, off_v2 + e * np, np, np) = rho * J * re.mass;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        W.block(off_s[i] + e * np, off_s[j] + e * np, np, np) = Cinv(i, j) * J * re.mass;
  }
  MatX A = W * L;
  double skew = (A + A.transpose()).cwiseAbs().maxCoeff();
  CHECK(skew < 1e-10 * A.cwiseAbs().maxCoeff());
}

TEST_CASE("spectra of small coupled operators") {
  SECTION("trivial 1x1") {
    MatX a(1, 1);
    a(0, 0) = -2.5;
    auto e = spectrum(a);
    REQUIRE(e.size() == 1);
    CHECK(e[0].real() == Catch::Approx(-2.5));
    CHECK(e[0].imag() == 0.0);
  }
  SECTION("random media, affine and warped, all penalties stable") {
    auto re = build_reference_element(2);
    for (bool warped : {false, true}) {
      auto m = uniform_square_mesh(
          4, re, [](double, double y) { return y > 0 ? Region::Acoustic : Region::Elastic; });
      if (warped) warp_mesh(m, re);
      set_region_boundary_bc(m, Bc::ZeroVelocity, Bc::TractionPrescribed);
      auto mat = random_material(m, re, 21, 0.5, 2.0, 0.7, 1.4);
      double rho0 = 0, rho1 = 0;
      for (double tau : {0.0, 0.5, 1.0}) {
        auto mode = warped ? GeometryMode::StrongWeak : GeometryMode::Affine;
        MatX L = assemble_operator(re, m, mat, FluxParams{tau, tau}, mode);
        auto eigs = spectrum(L);
        CHECK(max_real_part(eigs) <= 1e-10);
        if (tau == 0.0) rho0 = spectral_radius(eigs);
        if (tau == 1.0) rho1 = spectral_radius(eigs);
      }
      CHECK(rho1 / rho0 > 1.2);
      CHECK(rho1 / rho0 < 3.5);
    }
  }
}

TEST_CASE("discrete energy") {
  auto re = build_reference_element(3);
  auto m = uniform_square_mesh(
      2, re, [](double, double y) { return y > 0 ? Region::Acoustic : Region::Elastic; });
  set_region_boundary_bc(m, Bc::ZeroVelocity, Bc::TractionPrescribed);
  auto mat = random_material(m, re, 3, 0.5, 2.0, 0.7, 1.4);

  State z = make_state(re, m);
  CHECK(discrete_energy(re, m, mat, z) == 0.0);

  State s = unpack_state(random_vec(total_dof(re, m), 2), re, m);
  double e1 = discrete_energy(re, m, mat, s);
  CHECK(e1 > 0);
  State s2 = s;
  for_each_field(s2, [](MatX& f) { f *= 2.0; });
  CHECK(discrete_energy(re, m, mat, s2) == Catch::Approx(4.0 * e1).epsilon(1e-12));

  SECTION("non-increasing along a penalty-flux run") {
    CoupledDgOperator op(re, m, mat, FluxParams{0.5, 0.5}, GeometryMode::Affine);
    std::vector<double> E;
    double dt = estimate_dt(m, mat, 3, 0.5);
    integrate(s, make_rhs(op), dt, 25 * dt,
              [&](const State& st, double) { E.push_back(discrete_energy(re, m, mat, st)); });
    for (size_t i = 1; i < E.size(); ++i) CHECK(E[i] <= E[i - 1] * (1 + 1e-9));
    CHECK(E.back() < E.front());
  }
}

TEST_CASE("convergence studies reproduce the reference rates", "[slow]") {
  SECTION("scholte penalty flux N=2") {
    auto res = convergence_study(Scenario::Scholte, {2}, {8, 16, 32}, FluxParams{1.0, 1.0},
                                 GeometryMode::Affine);
    CHECK(res.slope[2] == Catch::Approx(3.0).margin(0.3));
    // reference errors at h = 1/4, 1/8, 1/16 (2x band)
    double ref[3] = {0.0159341, 0.00190554, 0.000233487};
    for (int i = 0; i < 3; ++i) {
      CHECK(res.rows[size_t(i)].error < 2 * ref[i]);
      CHECK(res.rows[size_t(i)].error > 0.5 * ref[i]);
    }
    write_convergence_csv("convergence_test.csv", res);
    std::ifstream is("convergence_test.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header == "N,h,error");
    int lines = 0;
    for (std::string l; std::getline(is, l);) ++lines;
    CHECK(lines == 3);
  }
  SECTION("snell central flux N=1 odd-even degradation") {
    auto res = convergence_study(Scenario::Snell, {1}, {8, 16, 32}, FluxParams{0.0, 0.0},
                                 GeometryMode::Affine);
    CHECK(res.slope[1] > 1.5);
    CHECK(res.slope[1] < 2.5);
  }
  SECTION("km/s scholte at T=1") {
    double err = run_interface_problem(Scenario::ScholteKm, 2, 8, FluxParams{1.0, 1.0},
                                       GeometryMode::Affine);
    // reference error at h = 1/4
    CHECK(err < 2 * 0.00490543);
    CHECK(err > 0.5 * 0.00490543);
  }
}
