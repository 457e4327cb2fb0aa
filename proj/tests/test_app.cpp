#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <sstream>

#include "wadg/app.hpp"

using namespace wadg;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("json config parsing") {
  RunConfig cfg;
  SECTION("valid keys applied") {
    auto j = nlohmann::json::parse(R"({"schema":1,"N":4,"n":12,"tau":0.5,
      "preset":"snell","warped":true,"snapshots":[0.5,1.0],"n_list":[4,8]})");
    apply_json(cfg, j);
    CHECK(cfg.N == 4);
    CHECK(cfg.n == 12);
    CHECK(cfg.tau == 0.5);
    CHECK(cfg.preset == "snell");
    CHECK(cfg.warped);
    CHECK(cfg.snapshots == std::vector<double>{0.5, 1.0});
    CHECK(cfg.n_list == std::vector<int>{4, 8});
  }
  SECTION("unknown key rejected") {
    auto j = nlohmann::json::parse(R"({"schema":1,"order":4})");
    CHECK_THROWS_WITH(apply_json(cfg, j), Catch::Matchers::ContainsSubstring("order"));
  }
  SECTION("missing schema rejected") {
    CHECK_THROWS(apply_json(cfg, nlohmann::json::parse(R"({"N":4})")));
    CHECK_THROWS(apply_json(cfg, nlohmann::json::parse(R"({"schema":2,"N":4})")));
  }
  SECTION("missing config file names the path") {
    CHECK_THROWS_WITH(load_config_file(cfg, "no_such_config.json"),
                      Catch::Matchers::ContainsSubstring("no_such_config.json"));
  }
}

TEST_CASE("spectra command artifacts") {
  RunConfig cfg;
  cfg.command = "spectra";
  cfg.N = 2;
  cfg.n = 2;
  cfg.tau = 1.0;
  cfg.seed = 7;
  cfg.out_dir = "app_out_spectra";
  CHECK(run_command(cfg) == 0);
  std::string csv = slurp("app_out_spectra/spectra.csv");
  CHECK(csv.rfind("re,im\n", 0) == 0);
  // one eigenvalue per DoF
  auto re = build_reference_element(2);
  auto m = uniform_square_mesh(
      2, re, [](double, double y) { return y > 0 ? Region::Acoustic : Region::Elastic; });
  CHECK(count_lines(csv) == total_dof(re, m) + 1);
  SECTION("deterministic for a fixed seed") {
    cfg.out_dir = "app_out_spectra2";
    CHECK(run_command(cfg) == 0);
    CHECK(slurp("app_out_spectra2/spectra.csv") == csv);
  }
}

TEST_CASE("convergence command artifacts") {
  RunConfig cfg;
  cfg.command = "convergence";
  cfg.scenario = "snell";
  cfg.N_list = {1};
  cfg.n_list = {4, 8};
  cfg.t_final = 0.5;
  cfg.out_dir = "app_out_conv";
  CHECK(run_command(cfg) == 0);
  std::string csv = slurp("app_out_conv/convergence.csv");
  CHECK(csv.rfind("N,h,error\n", 0) == 0);
  CHECK(count_lines(csv) == 3);
  CHECK_THROWS(run_command([&] {
    RunConfig bad = cfg;
    bad.scenario = "rayleigh";
    return bad;
  }()));
}

TEST_CASE("simulate command artifacts") {
  SECTION("random preset: energy trace and snapshot") {
    RunConfig cfg;
    cfg.command = "simulate";
    cfg.preset = "random";
    cfg.N = 2;
    cfg.n = 4;
    cfg.t_final = 0.2;
    cfg.snapshots = {0.1};
    cfg.seed = 3;
    cfg.out_dir = "app_out_random";
    CHECK(run_command(cfg) == 0);
    std::string energy = slurp("app_out_random/energy.csv");
    CHECK(energy.rfind("t,energy\n", 0) == 0);
    CHECK(count_lines(energy) > 2);
    CHECK(slurp("app_out_random/snapshot_0.vtk").rfind("# vtk", 0) == 0);
    // determinism: identical config and seed give byte-identical CSV
    cfg.out_dir = "app_out_random2";
    CHECK(run_command(cfg) == 0);
    CHECK(slurp("app_out_random2/energy.csv") == energy);
  }
  SECTION("aniso demo preset runs with its point source") {
    RunConfig cfg;
    cfg.command = "simulate";
    cfg.preset = "aniso-demo";
    cfg.N = 2;
    cfg.n = 8;
    cfg.t_final = 10.0;
    cfg.snapshots = {10.0};
    cfg.out_dir = "app_out_demo";
    CHECK(run_command(cfg) == 0);
    std::string energy = slurp("app_out_demo/energy.csv");
    CHECK(count_lines(energy) > 2);
    // the source has injected energy by T=10 (t0 = 1/f0 ~ 5.9)
    auto last = energy.rfind(',');
    CHECK(std::stod(energy.substr(last + 1)) > 0.0);
    CHECK(slurp("app_out_demo/snapshot_0.vtk").rfind("# vtk", 0) == 0);
  }
  SECTION("missing mesh file names the path") {
    RunConfig cfg;
    cfg.command = "simulate";
    cfg.preset = "scholte";
    cfg.mesh_file = "no_such.mesh";
    CHECK_THROWS_WITH(run_command(cfg), Catch::Matchers::ContainsSubstring("no_such.mesh"));
  }
  SECTION("unknown preset rejected") {
    RunConfig cfg;
    cfg.command = "simulate";
    cfg.preset = "lamb";
    CHECK_THROWS_WITH(run_command(cfg), Catch::Matchers::ContainsSubstring("lamb"));
  }
}

TEST_CASE("command line binary", "[cli]") {
  if (!std::ifstream("wadg-wave").good()) {
    SKIP("wadg-wave binary not present in the working directory");
  }
  SECTION("successful run") {
    int rc = std::system(
        "./wadg-wave simulate --preset random --N 1 --n 2 --T 0.1 --out app_cli_out "
        "> app_cli_out.log 2>&1");
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(slurp("app_cli_out/energy.csv").rfind("t,energy\n", 0) == 0);
  }
  SECTION("bad preset exits 2") {
    int rc = std::system("./wadg-wave simulate --preset bogus > /dev/null 2>&1");
    CHECK(WEXITSTATUS(rc) == 2);
  }
  SECTION("config file with flag override") {
    {
      std::ofstream os("app_cli_cfg.json");
      os << R"({"schema":1,"preset":"random","N":1,"n":2,"t_final":0.1,"seed":9})";
    }
    int rc = std::system(
        "./wadg-wave simulate --config app_cli_cfg.json --out app_cli_cfg_out "
        "> /dev/null 2>&1");
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(slurp("app_cli_cfg_out/energy.csv").rfind("t,energy\n", 0) == 0);
    // unknown key in the file is rejected
    {
      std::ofstream os("app_cli_bad.json");
      os << R"({"schema":1,"degree":4})";
    }
    rc = std::system("./wadg-wave simulate --config app_cli_bad.json > /dev/null 2>&1");
    CHECK(WEXITSTATUS(rc) == 2);
  }
}
