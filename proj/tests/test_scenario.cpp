#include "maleo/errors.hpp"
#include "maleo/experiments.hpp"
#include "maleo/report.hpp"
#include "maleo/scenario.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace maleo;
using maleo::testing::small_config;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

bool has_issue(const ConfigError& e, const std::string& needle) {
  for (const auto& s : e.issues()) {
    if (s.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::string issues_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("maleo_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, PresetsValidate) {
  EXPECT_TRUE(paper_defaults().issues().empty());
  EXPECT_TRUE(desk_defaults().issues().empty());
  EXPECT_EQ(paper_defaults().array.n_tx, 16);
  EXPECT_EQ(desk_defaults().array.n_tx, 8);
  EXPECT_EQ(desk_defaults().sensing.sites.size(), 2u);
  EXPECT_THROW(apply_preset(paper_defaults(), "huge"), ConfigError);
}

TEST(Config, JsonRoundTripAndHash) {
  for (const ScenarioConfig& c : {paper_defaults(), desk_defaults()}) {
    const std::string text = to_json(c);
    const ScenarioConfig back = parse_config(text);
    EXPECT_EQ(to_json(back), text);
    EXPECT_EQ(config_hash(back), config_hash(c));
    EXPECT_EQ(config_hash(c), fnv1a(text));
  }
  ScenarioConfig c = desk_defaults();
  const auto h = config_hash(c);
  c.seed = 2;
  EXPECT_NE(config_hash(c), h);
}

TEST(Config, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ULL);
}

TEST(Config, MissingKeyReportsPath) {
  json j = json::parse(to_json(desk_defaults()));
  j["orbit"].erase("altitude_m");
  EXPECT_NE(issues_of(j.dump()).find("orbit.altitude_m: missing"), std::string::npos);
}

TEST(Config, UnknownKeyReportsPath) {
  json j = json::parse(to_json(desk_defaults()));
  j["array"]["n_txx"] = 3;
  EXPECT_NE(issues_of(j.dump()).find("array.n_txx: unknown key"), std::string::npos);
}

TEST(Config, CollectsEveryIssue) {
  json j = json::parse(to_json(desk_defaults()));
  j["array"]["n_tx"] = "many";
  j["power"]["noise_ce_dbm"] = "loud";
  try {
    parse_config(j.dump());
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.issues().size(), 2u);
    EXPECT_TRUE(has_issue(e, "array.n_tx"));
    EXPECT_TRUE(has_issue(e, "power.noise_ce_dbm"));
  }

  ScenarioConfig c = desk_defaults();
  c.array.n_tx = 0;
  c.orbit.slots = 0;
  const auto issues = c.issues();
  EXPECT_GE(issues.size(), 2u);
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, MalformedJsonRejected) {
  EXPECT_THROW(parse_config("{"), ConfigError);
  EXPECT_THROW(parse_config("[]"), ConfigError);
}

TEST(Config, SpacingMustFitRegion) {
  ScenarioConfig c = paper_defaults();
  c.array.d_min_m = 0.2;
  try {
    c.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(has_issue(e, "array.d_min_m"));
  }
}

TEST(Config, PerturbSitesIsSeededAndBounded) {
  const ScenarioConfig c = desk_defaults();
  EXPECT_EQ(to_json(perturb_sites(c, 0, 0.01)), to_json(c));
  const ScenarioConfig a = perturb_sites(c, 7, 0.01), b = perturb_sites(c, 7, 0.01);
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_NE(to_json(perturb_sites(c, 8, 0.01)), to_json(a));
  for (std::size_t k = 0; k < c.sensing.sites.size(); ++k) {
    EXPECT_LE(std::abs(a.sensing.sites[k].theta - c.sensing.sites[k].theta), 0.01);
    EXPECT_LE(std::abs(a.sensing.sites[k].phi - c.sensing.sites[k].phi), 0.01);
  }
}

TEST(BuildScenario, DerivedQuantities) {
  const Scenario sc = build_scenario(small_config(4, 4, 2, 4));
  ASSERT_EQ(sc.problems.size(), 4u);
  // interval_s is the whole window T = T_s / K_s shared by the M slots.
  EXPECT_NEAR(sc.interval_s, sc.period_s / 40.0, 1e-9);
  EXPECT_NEAR(sc.max_step_m, sc.config.array.v_max_mps * sc.interval_s / 4.0, 1e-12);
  EXPECT_EQ(sc.q0.size(), 4u);
  EXPECT_GE(sc.q0.min_spacing(), sc.config.array.d_min_m * (1.0 - 1e-12));
  for (const auto& p : sc.problems) {
    EXPECT_EQ(p.scene.targets.size(), 2u);
    EXPECT_EQ(p.ces.size(), sc.grid.size());
  }
}

TEST(BuildScenario, WithThreshold) {
  const Scenario sc = build_scenario(small_config(4, 4, 1, 2));
  const auto off = with_threshold(sc.problems, std::nullopt);
  for (const auto& p : off) {
    for (const auto& ce : p.ces) EXPECT_EQ(ce.threshold, 0.0);
  }
  const auto ten = with_threshold(sc.problems, 10.0);
  for (const auto& p : ten) {
    for (const auto& ce : p.ces) EXPECT_NEAR(ce.threshold, 10.0, 1e-12);
  }
}

TEST(Report, FormatNumberRoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> e(-300.0, 300.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::pow(10.0, e(rng)) * (i % 2 ? -1.0 : 1.0);
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Report, CsvLayout) {
  Table t{"demo", {"x", "y"}, {{1.0, 0.25}, {2.0, -3e-9}}};
  const std::string csv = render_csv(t, {{"seed", "1"}});
  EXPECT_EQ(csv, "# maleo " + std::string(version()) + "\n# table: demo\n# seed: 1\nx,y\n1,0.25\n2,-3e-09\n");
}

TEST(Report, SvgIsWellFormedAndDeterministic) {
  PlotSpec p;
  p.name = "demo";
  p.title = "a < b";
  p.series = {{"s", {1, 2, 3}, {1e-3, 1e-2, 1e-1}}};
  p.log_y = true;
  const std::string svg = render_svg(p);
  EXPECT_EQ(svg, render_svg(p));
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(svg.find("a < b"), std::string::npos);
}

TEST(Experiments, UnknownNameRejected) {
  const Scenario sc = build_scenario(small_config(2, 2, 1, 1));
  EXPECT_FALSE(is_experiment("nope"));
  EXPECT_THROW(run_experiment("nope", sc), std::invalid_argument);
}

TEST(Experiments, VacuousThresholdCdfIsFullySatisfied) {
  ScenarioConfig c = small_config(4, 4, 1, 1);
  c.experiment.map_samples = 9;
  const Scenario sc = build_scenario(c);
  const auto cdf = sinr_cdf(sc, {std::nullopt});
  ASSERT_EQ(cdf.size(), 1u);
  EXPECT_FALSE(cdf[0].sinr_db.empty());
  EXPECT_DOUBLE_EQ(cdf[0].satisfied_fraction, 1.0);
  EXPECT_TRUE(std::is_sorted(cdf[0].sinr_db.begin(), cdf[0].sinr_db.end()));
}

TEST(Output, WriteAuditAndTamper) {
  ScenarioConfig c = small_config(4, 4, 1, 2);
  c.solver.randomization_samples = 20;
  const Scenario sc = build_scenario(c);
  const ExperimentOutput out = run_experiment("convergence", sc);
  ASSERT_TRUE(out.failures.empty());
  const fs::path dir = scratch_dir("audit");
  write_output(out, c, dir);
  const AuditReport good = audit_directory(dir);
  EXPECT_TRUE(good.ok()) << (good.problems.empty() ? "" : good.problems.front());
  EXPECT_GT(good.records, 0);
  EXPECT_GT(good.tables, 0);

  // A config edit invalidates every CSV header hash.
  json j = json::parse(slurp(dir / "config.json"));
  j["seed"] = 99;
  std::ofstream(dir / "config.json") << j.dump(2) << "\n";
  const AuditReport bad = audit_directory(dir);
  EXPECT_FALSE(bad.ok());
  EXPECT_EQ(static_cast<int>(bad.problems.size()), good.tables);
  fs::remove_all(dir);
}

TEST(ShippedConfigs, MatchPresets) {
  const fs::path dir = fs::path(MALEO_SOURCE_DIR) / "configs";
  EXPECT_EQ(slurp(dir / "paper.json"), to_json(paper_defaults()));
  EXPECT_EQ(slurp(dir / "desk.json"), to_json(desk_defaults()));
}
