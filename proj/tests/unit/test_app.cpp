#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "app/config.hpp"
#include "app/csv.hpp"

using namespace shellsolve;
using namespace shellsolve::app;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("shellsolve_test_" + name);
}

}  // namespace

TEST(Config, Defaults) {
  const ExperimentConfig c = build_config({});
  EXPECT_EQ(c.N, 40);
  EXPECT_EQ(c.ladder, (std::vector<int>{20, 40, 80}));
  EXPECT_EQ(c.preset, "coupled-nonlinear");
  EXPECT_DOUBLE_EQ(c.solver.tol, 1e-6);
  EXPECT_EQ(c.solver.max_iter, 100);
  EXPECT_DOUBLE_EQ(c.eps, 0.01);
}

TEST(Config, UnknownKeyIsNamed) {
  try {
    build_config({{"bc.epsilonn", "0.02"}});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("epsilonn"), std::string::npos) << e.what();
  }
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(build_config({{"domain.N", "3"}}), ConfigError);
  EXPECT_THROW(build_config({{"domain.N", "forty"}}), ConfigError);
  EXPECT_THROW(build_config({{"domain.ladder", "40 20"}}), ConfigError);
  EXPECT_THROW(build_config({{"solver.method", "bfgs"}}), ConfigError);
  EXPECT_THROW(build_config({{"solver.delta", "1.5"}, {"solver.method", "picard"}}), ConfigError);
  EXPECT_THROW(build_config({{"bc.variant", "hinged"}}), ConfigError);
  EXPECT_THROW(build_config({{"bc.nu", "0.5"}, {"bc.variant", "free"}}), ConfigError);
  EXPECT_THROW(build_config({{"problem.preset", "cubic"}}), ConfigError);
  EXPECT_THROW(build_config({{"continuation.direction", "0"}}), ConfigError);
}

TEST(Config, ParsesValues) {
  const ExperimentConfig c = build_config({{"domain.N", "20"},
                                           {"domain.ladder", "10 20 40 80"},
                                           {"domain.bounds", "0 2 0 1"},
                                           {"bc.variant", "all"},
                                           {"solver.method", "dogleg"},
                                           {"solver.radius0", "0.5"},
                                           {"continuation.direction", "-1"},
                                           {"output.gnuplot", "true"}});
  EXPECT_EQ(c.N, 20);
  EXPECT_EQ(c.ladder.size(), 4u);
  EXPECT_DOUBLE_EQ(c.bounds.x_b, 2.0);
  EXPECT_EQ(c.boundary_conditions().size(), 5u);
  ASSERT_TRUE(std::holds_alternative<Dogleg>(c.solver.method));
  EXPECT_DOUBLE_EQ(std::get<Dogleg>(c.solver.method).radius0, 0.5);
  EXPECT_LT(c.continuation.dxi_bootstrap, 0.0);
  EXPECT_TRUE(c.gnuplot);
}

TEST(Config, BcParametersReachVariant) {
  const ExperimentConfig c = build_config({{"bc.variant", "cf"}, {"bc.x_c", "0.4"}, {"bc.eps", "0.02"}});
  const auto bcs = c.boundary_conditions();
  ASSERT_EQ(bcs.size(), 1u);
  ASSERT_TRUE(std::holds_alternative<ClampedFree>(bcs[0]));
  EXPECT_DOUBLE_EQ(std::get<ClampedFree>(bcs[0]).x_c, 0.4);
  EXPECT_DOUBLE_EQ(std::get<ClampedFree>(bcs[0]).eps, 0.02);
}

TEST(Config, ReadsIniFile) {
  const auto path = temp_path("cfg.ini");
  {
    std::ofstream out(path);
    out << "# comment\n[domain]\nN = 16\nladder = 8 16\n\n[solver]\nmethod = picard\ndelta = 1\n";
  }
  const KeyValues kv = read_config_file(path.string());
  EXPECT_EQ(kv.at("domain.N"), "16");
  EXPECT_EQ(kv.at("solver.method"), "picard");
  const ExperimentConfig c = build_config(kv);
  EXPECT_EQ(c.N, 16);
  EXPECT_DOUBLE_EQ(std::get<Picard>(c.solver.method).delta, 1.0);
  std::filesystem::remove(path);
  EXPECT_THROW(read_config_file(path.string()), ConfigError);
}

TEST(Config, ShippedConfigsParse) {
  for (const char* name : {"refine_nonlinear.ini", "localized_thermal.ini", "snap_through.ini"}) {
    const std::string path = std::string(SHELLSOLVE_CONFIG_DIR) + "/" + name;
    EXPECT_NO_THROW(build_config(read_config_file(path))) << path;
  }
}

TEST(Config, KnownKeysSorted) {
  const auto keys = known_keys();
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  EXPECT_NE(std::find(keys.begin(), keys.end(), "bc.eps"), keys.end());
}

TEST(Csv, Format) {
  EXPECT_EQ(fmt(0.5), "0.5");
  EXPECT_EQ(fmt(std::nan("")), "nan");
  EXPECT_EQ(fmt(std::optional<double>{}), "");
  EXPECT_EQ(fmt(std::optional<double>{2.0}), "2");
  EXPECT_EQ(quote("plain"), "plain");
  EXPECT_EQ(quote("a,b"), "\"a,b\"");
  EXPECT_EQ(quote("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Csv, WritesHeaderAndRows) {
  const auto path = temp_path("out.csv");
  write_csv(path.string(), {"fold_index", "xi_fold", "w_center_at_fold"}, {{"0", "1.5", "-0.2"}});
  EXPECT_EQ(read_file(path), "fold_index,xi_fold,w_center_at_fold\n0,1.5,-0.2\n");
  std::filesystem::remove(path);
  EXPECT_THROW(write_csv("/nonexistent-dir/x.csv", {"a"}, {}), std::runtime_error);
}
