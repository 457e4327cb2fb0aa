#pragma once

#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "wadg/pat.hpp"

namespace wadg {

// ---------------------------------------------------------------------------
// Run configuration: JSON file plus CLI flag overrides.

struct RunConfig {
  std::string command;  // simulate | convergence | spectra | pat
  std::string preset = "scholte";    // simulate material/scenario preset
  std::string scenario = "scholte";  // convergence scenario
  std::string flux = "penalty";      // penalty | central
  std::string mode = "coupled";      // pat: coupled | acoustic
  std::string mesh_file;
  std::string out_dir = ".";
  int N = 3;
  int n = 8;
  std::vector<int> N_list;  // convergence orders (default {N})
  std::vector<int> n_list = {8, 16, 32};
  double tau = 1.0;
  double t_final = -1;  // <= 0: preset default
  double cfl = -1;      // <= 0: preset default
  std::vector<double> snapshots;
  unsigned seed = 0;
  bool warped = false;
  int max_iter = 5;
  double band = -1;  // pat smoothing band; <= 0: two mesh widths
};

inline void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw std::runtime_error("config: top level must be an object");
  if (!j.contains("schema") || j["schema"] != 1)
    throw std::runtime_error("config: missing or unsupported schema version");
  for (auto& [key, val] : j.items()) {
    if (key == "schema") continue;
    if (key == "preset") cfg.preset = val.get<std::string>();
    else if (key == "scenario") cfg.scenario = val.get<std::string>();
    else if (key == "flux") cfg.flux = val.get<std::string>();
    else if (key == "mode") cfg.mode = val.get<std::string>();
    else if (key == "mesh_file") cfg.mesh_file = val.get<std::string>();
    else if (key == "out_dir") cfg.out_dir = val.get<std::string>();
    else if (key == "N") cfg.N = val.get<int>();
    else if (key == "n") cfg.n = val.get<int>();
    else if (key == "N_list") cfg.N_list = val.get<std::vector<int>>();
    else if (key == "n_list") cfg.n_list = val.get<std::vector<int>>();
    else if (key == "tau") cfg.tau = val.get<double>();
    else if (key == "t_final") cfg.t_final = val.get<double>();
    else if (key == "cfl") cfg.cfl = val.get<double>();
    else if (key == "snapshots") cfg.snapshots = val.get<std::vector<double>>();
    else if (key == "seed") cfg.seed = val.get<unsigned>();
    else if (key == "warped") cfg.warped = val.get<bool>();
    else if (key == "max_iter") cfg.max_iter = val.get<int>();
    else if (key == "band") cfg.band = val.get<double>();
    else throw std::runtime_error("config: unknown key '" + key + "'");
  }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("config: parse error in " + path + ": " + e.what());
  }
  apply_json(cfg, j);
}

namespace detail {

inline std::string out_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

inline FluxParams flux_params(const RunConfig& cfg) {
  if (cfg.flux == "central") return FluxParams{0.0, 0.0};
  if (cfg.flux != "penalty") throw std::runtime_error("unknown flux '" + cfg.flux + "'");
  return FluxParams{cfg.tau, cfg.tau};
}

inline Scenario scenario_by_name(const std::string& name) {
  if (name == "snell") return Scenario::Snell;
  if (name == "scholte") return Scenario::Scholte;
  if (name == "scholte-km") return Scenario::ScholteKm;
  throw std::runtime_error("unknown scenario '" + name + "'");
}

/// Region-local field expanded to Np x K with zeros in the other region.
inline MatX expand_field(const Mesh& m, int np, const MatX& f, bool acoustic) {
  MatX full = MatX::Zero(np, m.K);
  const auto& elems = acoustic ? m.acoustic_elems : m.elastic_elems;
  for (size_t i = 0; i < elems.size(); ++i) full.col(elems[i]) = f.col(Eigen::Index(i));
  return full;
}

inline void write_state_vtk(const std::string& path, const ReferenceElement& re, const Mesh& m,
                            const State& s) {
  const int np = re.num_basis;
  MatX p = expand_field(m, np, s.p, true), u1 = expand_field(m, np, s.u1, true),
       u2 = expand_field(m, np, s.u2, true), v1 = expand_field(m, np, s.v1, false),
       v2 = expand_field(m, np, s.v2, false), s1 = expand_field(m, np, s.s1, false),
       s2 = expand_field(m, np, s.s2, false), s3 = expand_field(m, np, s.s3, false);
  write_vtk(m, re, path,
            {{"p", &p},
             {"u1", &u1},
             {"u2", &u2},
             {"v1", &v1},
             {"v2", &v2},
             {"s1", &s1},
             {"s2", &s2},
             {"s3", &s3}});
}

/// Shared forward-run driver: energy trace CSV plus VTK snapshots.
template <class Rhs>
inline State run_forward(const RunConfig& cfg, const ReferenceElement& re, const Mesh& m,
                         const MaterialField& mat, State s0, Rhs&& rhs, double dt, double T) {
  std::ofstream ecsv(out_path(cfg, "energy.csv"));
  ecsv.precision(12);
  ecsv << "t,energy\n";
  std::vector<double> todo = cfg.snapshots;
  std::sort(todo.begin(), todo.end());
  size_t next = 0, snap = 0;
  return integrate(std::move(s0), rhs, dt, T, [&](const State& st, double t) {
    ecsv << t << "," << discrete_energy(re, m, mat, st) << "\n";
    while (next < todo.size() && t >= todo[next] - 0.5 * dt) {
      write_state_vtk(out_path(cfg, "snapshot_" + std::to_string(snap++) + ".vtk"), re, m, st);
      ++next;
    }
  });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands.

inline int run_spectra(const RunConfig& cfg) {
  auto re = build_reference_element(cfg.N);
  auto m = uniform_square_mesh(
      cfg.n, re, [](double, double y) { return y > 0 ? Region::Acoustic : Region::Elastic; });
  if (cfg.warped) warp_mesh(m, re);
  set_region_boundary_bc(m, Bc::ZeroVelocity, Bc::TractionPrescribed);
  auto mat = random_material(m, re, cfg.seed, 0.5, 2.0, 0.7, 1.4);
  auto mode = cfg.warped ? GeometryMode::StrongWeak : GeometryMode::Affine;
  MatX L = assemble_operator(re, m, mat, FluxParams{cfg.tau, cfg.tau}, mode);
  auto eigs = spectrum(L);
  write_spectra_csv(detail::out_path(cfg, "spectra.csv"), eigs);
  std::cout << "spectra: dof " << L.rows() << " tau " << cfg.tau << " max Re "
            << max_real_part(eigs) << " radius " << spectral_radius(eigs) << "\n";
  return 0;
}

inline int run_convergence(const RunConfig& cfg) {
  std::vector<int> Ns = cfg.N_list.empty() ? std::vector<int>{cfg.N} : cfg.N_list;
  auto mode = cfg.warped ? GeometryMode::StrongWeak : GeometryMode::Affine;
  auto res = convergence_study(detail::scenario_by_name(cfg.scenario), Ns, cfg.n_list,
                               detail::flux_params(cfg), mode, cfg.warped, cfg.cfl,
                               cfg.t_final);
  write_convergence_csv(detail::out_path(cfg, "convergence.csv"), res);
  for (int N : Ns) std::cout << "convergence: N " << N << " rate " << res.slope[N] << "\n";
  return 0;
}

inline int run_pat(const RunConfig& cfg) {
  PatConfig pc;
  pc.N = cfg.N;
  pc.n = cfg.n;
  pc.mesh_file = cfg.mesh_file;
  if (cfg.t_final > 0) pc.t_final = cfg.t_final;
  if (cfg.cfl > 0) pc.cfl = cfg.cfl;
  pc.tau = cfg.tau;
  pc.phantom.band = cfg.band > 0 ? cfg.band : 2.0 * (2.0 / cfg.n);
  auto re = build_reference_element(cfg.N);

  PhantomSpec ph = pc.phantom;
  auto truth = [ph](double x, double y) { return phantom_pressure(ph, x, y); };

  // data always comes from the true coupled physics
  PatPipeline data_pipe(re, pc);
  auto fr = data_pipe.forward_measure(data_pipe.initial_state(truth));
  write_record(detail::out_path(cfg, "record.bin"), fr.record);

  if (cfg.mode != "coupled" && cfg.mode != "acoustic")
    throw std::runtime_error("unknown pat mode '" + cfg.mode + "'");
  pc.acoustic_only = cfg.mode == "acoustic";
  PatPipeline recon(re, pc);
  auto res = recon.neumann_reconstruct(fr.record, cfg.max_iter, truth);
  write_pat_errors_csv(detail::out_path(cfg, "pat_errors.csv"), res.errors);
  detail::write_state_vtk(detail::out_path(cfg, "reconstruction.vtk"), re, recon.mesh(), res.P);
  std::cout << "pat: mode " << cfg.mode << " band " << pc.phantom.band << " kappa_est "
            << res.kappa_est << (res.diverged ? " diverged" : "") << "\n";
  for (size_t i = 0; i < res.errors.size(); ++i)
    std::cout << "pat: iteration " << i + 1 << " error " << res.errors[i] << "\n";
  return 0;
}

inline int run_simulate(const RunConfig& cfg) {
  auto re = build_reference_element(cfg.N);

  if (cfg.preset == "aniso-demo" || cfg.preset == "aniso-demo-het") {
    // demo media live on [-0.32, 0.32]^2
    Mesh m;
    if (cfg.mesh_file.empty()) {
      m = uniform_square_mesh(cfg.n, re, aniso_demo_region);
      m.vertices *= 0.32;
      m.x *= 0.32;
      m.y *= 0.32;
      compute_geometry(m, re);
      build_connectivity(m, re);
    } else {
      m = load_mesh(cfg.mesh_file, re);
    }
    set_all_boundary_bc(m, Bc::Absorbing);
    auto mat = aniso_demo_material(m, re, cfg.preset == "aniso-demo-het");
    CoupledDgOperator op(re, m, mat, FluxParams{cfg.tau, cfg.tau}, GeometryMode::Affine);
    auto src = make_ricker_source(re, m, mat, -0.02, 0.0, 0.17, 1.0 / 0.17);
    RunConfig rc = cfg;
    if (rc.snapshots.empty()) rc.snapshots = {30.0, 60.0};
    double T = cfg.t_final > 0 ? cfg.t_final
                               : *std::max_element(rc.snapshots.begin(), rc.snapshots.end());
    double dt = estimate_dt(m, mat, cfg.N, cfg.cfl > 0 ? cfg.cfl : 0.5);
    detail::run_forward(rc, re, m, mat, make_state(re, m), make_rhs(op, &src), dt, T);
    std::cout << "simulate: preset " << cfg.preset << " K " << m.K << " T " << T << "\n";
    return 0;
  }

  if (cfg.preset == "snell" || cfg.preset == "scholte" || cfg.preset == "scholte-km") {
    auto st = make_scenario(detail::scenario_by_name(cfg.preset));
    Mesh m = cfg.mesh_file.empty() ? uniform_square_mesh(cfg.n, re, st.region)
                                   : load_mesh(cfg.mesh_file, re);
    if (cfg.warped) warp_mesh(m, re);
    set_region_boundary_bc(m, Bc::DirichletPressure, Bc::TractionPrescribed);
    double c2 = st.acoustic_c2, rho = st.elastic_rho;
    Mat3 C = st.elastic_C;
    auto mat = make_material(
        m, re, [c2](double, double) { return c2; }, [C](double, double) { return C; },
        [rho](int) { return rho; });
    auto mode = cfg.warped ? GeometryMode::StrongWeak : GeometryMode::Affine;
    CoupledDgOperator op(re, m, mat, detail::flux_params(cfg), mode);
    set_exact_bc(op, st.sol);
    double T = cfg.t_final > 0 ? cfg.t_final : st.t_final;
    double dt = estimate_dt(m, mat, cfg.N, cfg.cfl > 0 ? cfg.cfl : st.cfl);
    State sT = detail::run_forward(cfg, re, m, mat, project_solution(re, m, st.sol, 0.0),
                                   make_rhs(op), dt, T);
    double err = l2_error(re, m, sT, st.sol, T);
    std::cout << "simulate: preset " << cfg.preset << " K " << m.K << " T " << T << " l2 error "
              << err << "\n";
    return 0;
  }

  if (cfg.preset == "random") {
    auto m = uniform_square_mesh(
        cfg.n, re, [](double, double y) { return y > 0 ? Region::Acoustic : Region::Elastic; });
    if (cfg.warped) warp_mesh(m, re);
    set_region_boundary_bc(m, Bc::ZeroVelocity, Bc::TractionPrescribed);
    auto mat = random_material(m, re, cfg.seed, 0.5, 2.0, 0.7, 1.4);
    auto mode = cfg.warped ? GeometryMode::StrongWeak : GeometryMode::Affine;
    CoupledDgOperator op(re, m, mat, FluxParams{cfg.tau, cfg.tau}, mode);
    State s0 = make_state(re, m);
    // gaussian pressure blob in the acoustic half
    for (size_t a = 0; a < m.acoustic_elems.size(); ++a) {
      int k = m.acoustic_elems[a];
      for (int i = 0; i < re.num_basis; ++i) {
        double x = m.x(i, k), y = m.y(i, k);
        s0.p(i, Eigen::Index(a)) = std::exp(-((x * x + (y - 0.5) * (y - 0.5))) / 0.02);
      }
    }
    double T = cfg.t_final > 0 ? cfg.t_final : 1.0;
    double dt = estimate_dt(m, mat, cfg.N, cfg.cfl > 0 ? cfg.cfl : 0.5);
    detail::run_forward(cfg, re, m, mat, std::move(s0), make_rhs(op), dt, T);
    std::cout << "simulate: preset random seed " << cfg.seed << " K " << m.K << " T " << T
              << "\n";
    return 0;
  }

  throw std::runtime_error("unknown preset '" + cfg.preset + "'");
}

inline int run_command(const RunConfig& cfg) {
  if (cfg.command == "simulate") return run_simulate(cfg);
  if (cfg.command == "convergence") return run_convergence(cfg);
  if (cfg.command == "spectra") return run_spectra(cfg);
  if (cfg.command == "pat") return run_pat(cfg);
  throw std::runtime_error("unknown command '" + cfg.command + "'");
}

}  // namespace wadg
