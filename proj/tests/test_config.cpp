#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "igabem/config.hpp"

using namespace igabem;

namespace {

std::filesystem::path write_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("config file parsing") {
  const auto path = write_file("igabem_cfg.txt",
                               "# comment\n"
                               "efie.kappa = 3.5   # trailing comment\n"
                               "\n"
                               "dipole.position = 0.1, 0.0, -0.1\n"
                               "network.hidden = 20, 30, 40\n"
                               "solver.kind = gmres\n"
                               "train.max_steps = 12345\n");
  const RunConfig cfg = load_config(path);
  CHECK(cfg.dipole.kappa == 3.5);
  CHECK(cfg.dipole.position == Eigen::Vector3d(0.1, 0.0, -0.1));
  CHECK(cfg.hidden == std::vector<int>{20, 30, 40});
  CHECK(cfg.solver == SolverKind::Gmres);
  CHECK(cfg.max_steps == 12345);
  CHECK(cfg.dataset_size == 100);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_config(write_file("igabem_bad1.txt", "no.such.key = 1\n")), ConfigError);
  CHECK_THROWS_AS(load_config(write_file("igabem_bad2.txt", "efie.kappa = abc\n")), ConfigError);
  CHECK_THROWS_AS(load_config(write_file("igabem_bad3.txt", "efie.kappa 2\n")), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/igabem.cfg"), IoError);
}

TEST_CASE("overrides and round trip") {
  RunConfig cfg;
  apply_override(cfg, "dataset.size=40");
  apply_override(cfg, "optimizer.lr = 0.002");
  apply_override(cfg, "quadrature.singular_order=12");
  CHECK(cfg.dataset_size == 40);
  CHECK(cfg.adam.lr == 0.002);
  CHECK(cfg.quadrature.singular_order == 12);
  CHECK_THROWS_AS(apply_override(cfg, "dataset.size"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "dataset.size=4.5"), ConfigError);

  cfg.dipole.kappa = 0.1 + 0.2;  // not exactly representable in short decimal
  std::string text;
  for (const auto& line : config_lines(cfg)) text += line + "\n";
  const RunConfig back = load_config(write_file("igabem_rt.txt", text));
  CHECK(config_lines(back) == config_lines(cfg));
  CHECK(back.dipole.kappa == cfg.dipole.kappa);
  CHECK(config_lines(cfg).size() == config_keys().size());
}

TEST_CASE("config hash covers numerical settings only") {
  RunConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  b.threads = 7;
  b.cache_dir = "elsewhere";
  b.output_dir = "other";
  CHECK(config_hash(a) == config_hash(b));
  b.dipole.kappa = 2.5;
  CHECK(config_hash(a) != config_hash(b));
  RunConfig c;
  c.dataset_seed = 8;
  CHECK(config_hash(a) != config_hash(c));

  const auto lines = provenance_lines(a, "solve");
  REQUIRE(lines.size() > 2);
  CHECK(lines[1] == "config_hash = " + hex(config_hash(a)));
}
