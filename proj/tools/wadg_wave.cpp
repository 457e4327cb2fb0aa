#include <CLI11.hpp>

#include "wadg/app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"high-order DG solver for coupled elastic-acoustic wave propagation"};
  app.require_subcommand(1);

  wadg::RunConfig cfg;
  std::string config_file;

  // Flags bind to a separate overlay; file values load first, explicit flags win.
  wadg::RunConfig flags;
  std::vector<CLI::Option*> opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "JSON config file");
    sub->add_option("--out", flags.out_dir, "output directory");
    sub->add_option("--N", flags.N, "polynomial order");
    sub->add_option("--n", flags.n, "elements per side");
    sub->add_option("--tau", flags.tau, "penalty parameter");
    sub->add_option("--cfl", flags.cfl, "CFL number (<= 0: preset default)");
    sub->add_option("--T", flags.t_final, "final time (<= 0: preset default)");
    sub->add_option("--seed", flags.seed, "RNG seed");
    sub->add_option("--mesh", flags.mesh_file, "mesh file (instead of a generated grid)");
    sub->add_flag("--warped", flags.warped, "warped curvilinear mesh");
  };

  auto* sim = app.add_subcommand("simulate", "forward simulation with snapshots");
  add_common(sim);
  sim->add_option("--preset", flags.preset,
                  "snell | scholte | scholte-km | aniso-demo | aniso-demo-het | random");
  sim->add_option("--flux", flags.flux, "penalty | central");
  sim->add_option("--snapshots", flags.snapshots, "snapshot times");

  auto* conv = app.add_subcommand("convergence", "convergence study against exact solutions");
  add_common(conv);
  conv->add_option("--scenario", flags.scenario, "snell | scholte | scholte-km");
  conv->add_option("--flux", flags.flux, "penalty | central");
  conv->add_option("--orders", flags.N_list, "polynomial orders");
  conv->add_option("--grids", flags.n_list, "elements per side, per level");

  auto* spec = app.add_subcommand("spectra", "operator eigenvalue spectra");
  add_common(spec);

  auto* pat = app.add_subcommand("pat", "photoacoustic time-reversal reconstruction");
  add_common(pat);
  pat->add_option("--mode", flags.mode, "coupled | acoustic");
  pat->add_option("--max-iter", flags.max_iter, "reconstruction iterations");
  pat->add_option("--band", flags.band, "phantom smoothing band (<= 0: two mesh widths)");

  CLI11_PARSE(app, argc, argv);

  try {
    auto* sub = app.get_subcommands().front();
    if (!config_file.empty()) wadg::load_config_file(cfg, config_file);
    for (const CLI::Option* opt : sub->get_options()) {
      if (opt->count() == 0) continue;
      const std::string name = opt->get_name();
      if (name == "--out") cfg.out_dir = flags.out_dir;
      else if (name == "--N") cfg.N = flags.N;
      else if (name == "--n") cfg.n = flags.n;
      else if (name == "--tau") cfg.tau = flags.tau;
      else if (name == "--cfl") cfg.cfl = flags.cfl;
      else if (name == "--T") cfg.t_final = flags.t_final;
      else if (name == "--seed") cfg.seed = flags.seed;
      else if (name == "--mesh") cfg.mesh_file = flags.mesh_file;
      else if (name == "--warped") cfg.warped = flags.warped;
      else if (name == "--preset") cfg.preset = flags.preset;
      else if (name == "--flux") cfg.flux = flags.flux;
      else if (name == "--scenario") cfg.scenario = flags.scenario;
      else if (name == "--mode") cfg.mode = flags.mode;
      else if (name == "--max-iter") cfg.max_iter = flags.max_iter;
      else if (name == "--band") cfg.band = flags.band;
      else if (name == "--snapshots") cfg.snapshots = flags.snapshots;
      else if (name == "--orders") cfg.N_list = flags.N_list;
      else if (name == "--grids") cfg.n_list = flags.n_list;
    }
    cfg.command = sub->get_name();
    return wadg::run_command(cfg);
  } catch (const std::exception& e) {
    std::cerr << "wadg-wave: " << e.what() << "\n";
    return 2;
  }
}
