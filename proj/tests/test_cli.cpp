#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rearropt/run.hpp"

#ifndef CLI_BINARY
#error "CLI_BINARY must point at the command-line executable"
#endif

namespace fs = std::filesystem;
using rearropt::json;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CLI_BINARY) + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path write_config(const std::string& name, const json& doc) {
  const fs::path dir = fs::temp_directory_path() / "rearropt-cli-test";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream out(p);
  out << doc.dump(2);
  return p;
}

json base_config(int n) {
  json doc;
  doc["grid"] = {{"dim", 1}, {"bounds", {{0.0, 1.0}}}, {"cells_per_axis", {n}}};
  doc["kernel"] = {{"family", "pure"}, {"p", 2.0}, {"s", 0.4}, {"C", 1.0}};
  doc["weight"] = {{"generator", "binary"}, {"fraction", 0.5}, {"value", 1.0}};
  doc["solver"] = {{"tol", 1e-11}, {"max_iters", 100}, {"restarts", 3}, {"seed", 11}};
  return doc;
}

}  // namespace

TEST_CASE("eigen-solve on a uniform weight reports a positive eigenvalue") {
  json doc = base_config(12);
  doc["weight"] = {{"generator", "explicit"},
                   {"values", std::vector<double>(12, 1.0)}};
  const fs::path cfg = write_config("uniform.json", doc);
  const fs::path out = fs::temp_directory_path() / "rearropt-cli-test" / "uniform-out";
  REQUIRE(run_cli("eigen-solve --config " + cfg.string() + " --out " + out.string()) == 0);
  json summary = json::parse(slurp(out / "summary.json"));
  REQUIRE(summary["lambda"].get<double>() > 0.0);
  REQUIRE(summary["normalization_defect"].get<double>() <= 1e-10);
  REQUIRE(fs::exists(out / "trace.csv"));
  REQUIRE(fs::exists(out / "field_u.csv"));
  REQUIRE(fs::exists(out / "field_g.csv"));
}

TEST_CASE("identical runs are byte-identical") {
  const fs::path cfg = write_config("det.json", base_config(10));
  const fs::path o1 = fs::temp_directory_path() / "rearropt-cli-test" / "det1";
  const fs::path o2 = fs::temp_directory_path() / "rearropt-cli-test" / "det2";
  REQUIRE(run_cli("eig-min --config " + cfg.string() + " --out " + o1.string()) == 0);
  REQUIRE(run_cli("eig-min --config " + cfg.string() + " --out " + o2.string()) == 0);
  for (const char* f : {"trace.csv", "field_u.csv", "field_g.csv"})
    REQUIRE(slurp(o1 / f) == slurp(o2 / f));
}

TEST_CASE("eig-min with --validate cross-checks the brute force optimum") {
  const fs::path cfg = write_config("brute.json", base_config(8));
  const fs::path out = fs::temp_directory_path() / "rearropt-cli-test" / "brute-out";
  REQUIRE(run_cli("eig-min --config " + cfg.string() + " --out " + out.string() +
                  " --validate") == 0);
  json summary = json::parse(slurp(out / "summary.json"));
  REQUIRE(summary["matches_bruteforce"].get<bool>());
}

TEST_CASE("unknown config keys are rejected with every violation listed") {
  json doc = base_config(8);
  doc["grud"] = 1;                 // typo at top level
  doc["kernel"]["s"] = 2.0;        // invalid range
  doc["solver"].erase("seed");     // restarts > 0 without a seed
  try {
    rearropt::parse_config(doc, "eigen-solve");
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find("unknown key 'grud'") != std::string::npos);
    REQUIRE(msg.find("s must lie in (0, 1)") != std::string::npos);
    REQUIRE(msg.find("seed required") != std::string::npos);
  }
}

TEST_CASE("config hash is stable across runs and sensitive to content") {
  rearropt::RunConfig a = rearropt::parse_config(base_config(8), "eigen-solve");
  rearropt::RunConfig b = rearropt::parse_config(base_config(8), "eigen-solve");
  REQUIRE(rearropt::config_hash(a) == rearropt::config_hash(b));
  json doc = base_config(8);
  doc["kernel"]["s"] = 0.3;
  rearropt::RunConfig c = rearropt::parse_config(doc, "eigen-solve");
  REQUIRE(rearropt::config_hash(a) != rearropt::config_hash(c));
}

TEST_CASE("validate subcommand is deterministic") {
  const fs::path o1 = fs::temp_directory_path() / "rearropt-cli-test" / "val1";
  const fs::path o2 = fs::temp_directory_path() / "rearropt-cli-test" / "val2";
  REQUIRE(run_cli("validate --out " + o1.string() + " --seed 5") == 0);
  REQUIRE(run_cli("validate --out " + o2.string() + " --seed 5") == 0);
  REQUIRE(slurp(o1 / "validate_report.csv") == slurp(o2 / "validate_report.csv"));
  REQUIRE(slurp(o1 / "summary.json") == slurp(o2 / "summary.json"));
}

TEST_CASE("dirichlet-solve and energy-max produce finite outputs") {
  json doc = base_config(10);
  doc["reaction"] = {{"c", 0.5}, {"q", 1.5}};
  const fs::path cfg = write_config("reac.json", doc);
  const fs::path o1 = fs::temp_directory_path() / "rearropt-cli-test" / "dir-out";
  const fs::path o2 = fs::temp_directory_path() / "rearropt-cli-test" / "emax-out";
  REQUIRE(run_cli("dirichlet-solve --config " + cfg.string() + " --out " + o1.string()) == 0);
  REQUIRE(run_cli("energy-max --config " + cfg.string() + " --out " + o2.string()) == 0);
  json s1 = json::parse(slurp(o1 / "summary.json"));
  json s2 = json::parse(slurp(o2 / "summary.json"));
  REQUIRE(std::isfinite(s1["phi"].get<double>()));
  REQUIRE(s2["phi"].get<double>() >= s1["phi"].get<double>() - 1e-12);
}
