#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cfflow/pipeline.hpp"

using namespace cfflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cfflow_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunConfig z3_config(const fs::path& out) {
  RunConfig c = parse_config(R"({"group": {"orders": [3], "v": [[2]], "subgroup": [[1]]}, "depth": 4})");
  c.output_dir = out.string();
  return c;
}

}  // namespace

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config("[1]"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"target": []})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"target": [0]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"target": [1], "depth": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"target": [1], "variant": "sec6"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"target": [1], "spacer_mode": "loose"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"j({"target": [1], "xi": ["sqrt(2)"]})j"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"j({"target": [1], "xi": ["sqrt(-2)", "sqrt(3)"]})j"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"target": [1], "output": {"formats": ["xml"]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"target": [1], "probes": {"residual": "medium"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"target": [1], "probes": {"weak_limits": [{"chi": 1}]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"target": [1], "depth": "five"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({})"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/cfflow.json"), ConfigError);
}

TEST_CASE("config parsing") {
  const RunConfig c = parse_config(R"({
    "target": [1, 2], "variant": "nm", "depth": 6, "spacer_mode": "strict",
    "assignment": ["N:1", "M:1:1"], "seed": 9, "output": {"dir": "x", "formats": ["csv"]},
    "probes": {"weak_limits": [{"label": "N:1", "chi": [1], "j": 2, "max_level": 5}],
               "eigenvalue": {"from": -1, "to": 1, "step": 0.5}, "residual": "strong"}
  })");
  CHECK(c.target == std::set<long>{1, 2});
  CHECK(c.variant == Variant::NM);
  CHECK(c.depth == 6);
  CHECK(c.strict);
  CHECK(c.assignment.size() == 2);
  CHECK(c.seed == 9);
  CHECK(c.output_dir == "x");
  CHECK(c.csv);
  CHECK_FALSE(c.json);
  REQUIRE(c.probes.weak_limits.size() == 1);
  CHECK(c.probes.weak_limits[0].j == 2);
  CHECK(c.probes.weak_limits[0].max_level == 5);
  CHECK(c.probes.strong_residual);
  CHECK(lambda_grid(-1, 1, 0.5) == std::vector<double>{-1, -0.5, 0.5, 1});
  CHECK(lambda_grid(-10, 10, 0.01).size() == 2000);
}

TEST_CASE("tower dump round trip") {
  const fs::path out = scratch("dump");
  const RunConfig c = z3_config(out);
  const GroupData g = resolve_group(c);
  const TowerSchedule s = schedule_from_config(c, g);
  const CocycleTable t = build_cocycle(s);
  const std::string text = dump_tower(s, t);
  const auto [s2, t2] = load_tower(text);
  CHECK(dump_tower(s2, t2) == text);
  REQUIRE(s2.depth() == s.depth());
  for (int n = 0; n <= s.depth(); ++n) {
    CHECK(s2.h(n) == s.h(n));
    CHECK(s2.level(n).cuts == s.level(n).cuts);
    CHECK(s2.level(n).label == s.level(n).label);
  }
  for (int n = 1; n <= s.depth(); ++n) CHECK(t2.levels[static_cast<size_t>(n)].alpha == t.levels[static_cast<size_t>(n)].alpha);
  CHECK(check_conditions(t2, s2).ok());
  CHECK_THROWS(load_tower("{\"levels\": 3}"));
}

TEST_CASE("build then validate the dump") {
  const fs::path out = scratch("build");
  RunConfig c = z3_config(out);
  const CommandResult b = cmd_build(c);
  CHECK(b.exit_code == 0);
  CHECK(fs::exists(out / "schedule.json"));
  CHECK(fs::exists(out / "validation.csv"));
  const std::string first = slurp(out / "validation.json");
  c.schedule_path = (out / "schedule.json").string();
  c.output_dir = (out / "again").string();
  CHECK(cmd_validate(c).exit_code == 0);
  auto built = nlohmann::json::parse(first);
  auto checked = nlohmann::json::parse(slurp(out / "again" / "validation.json"));
  CHECK(built["command"] == "build");
  CHECK(checked["command"] == "validate");
  built.erase("command");
  checked.erase("command");
  CHECK(built == checked);
}

TEST_CASE("strict nm fails validation") {
  const fs::path out = scratch("strict");
  RunConfig c = z3_config(out);
  c.variant = Variant::NM;
  c.strict = true;
  CHECK(cmd_build(c).exit_code == 1);
  c.strict = false;
  CHECK(cmd_build(c).exit_code == 0);
}

TEST_CASE("realize writes a verified witness") {
  const fs::path out = scratch("realize");
  RunConfig c = parse_config(R"({"target": [1, 2]})");
  c.output_dir = out.string();
  CHECK(cmd_realize(c).exit_code == 0);
  const std::string text = slurp(out / "witness.json");
  CHECK(text.find("\"verified\": true") != std::string::npos);
  CHECK(text.find(kReportSchema) != std::string::npos);
}

TEST_CASE("spectra rejects bad characters and labels as config errors") {
  const fs::path out = scratch("spectra");
  RunConfig c = z3_config(out);
  c.probes.weak_limits.push_back({"N:1", {5}, 1, 0});
  CHECK_THROWS_AS(cmd_spectra(c), ConfigError);
  c.probes.weak_limits = {{"W7", {1}, 1, 0}};
  CHECK_THROWS_AS(cmd_spectra(c), ConfigError);
}

TEST_CASE("induce is deterministic per seed") {
  const fs::path out = scratch("induce");
  RunConfig c = z3_config(out / "a");
  c.induce.induction_instances = 10;
  c.induce.cross_section_instances = 4;
  c.induce.product_instances = 5;
  c.seed = 7;
  CHECK(cmd_induce(c).exit_code == 0);
  c.output_dir = (out / "b").string();
  CHECK(cmd_induce(c).exit_code == 0);
  CHECK(slurp(out / "a" / "induce.json") == slurp(out / "b" / "induce.json"));
  CHECK(slurp(out / "a" / "induce.csv") == slurp(out / "b" / "induce.csv"));
  c.seed = 8;
  c.output_dir = (out / "c").string();
  CHECK(cmd_induce(c).exit_code == 0);
  CHECK(slurp(out / "a" / "induce.json") != slurp(out / "c" / "induce.json"));
}
