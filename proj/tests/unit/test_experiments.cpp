#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "collideq/errors.hpp"
#include "collideq/experiments.hpp"

using namespace collideq;
using namespace collideq::experiments;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> data_rows(const std::string& csv) {
  std::vector<std::string> out;
  bool header_seen = false;
  for (const auto& l : lines_of(csv)) {
    if (l.starts_with("#")) continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    out.push_back(l);
  }
  return out;
}

std::size_t count_commas(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), ',')); }

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST(ParseValues, ScalarListAndGrid) {
  EXPECT_EQ(parse_values("0.5"), std::vector<double>{0.5});
  EXPECT_EQ(parse_values(" 1, 2 ,3 "), (std::vector<double>{1, 2, 3}));
  const auto g = parse_values("0:1:5");
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g[2], 0.5);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_EQ(parse_values("0.3:0.9:1"), std::vector<double>{0.3});
  EXPECT_THROW(parse_values(""), InvalidParameter);
  EXPECT_THROW(parse_values("1:2"), InvalidParameter);
  EXPECT_THROW(parse_values("abc"), InvalidParameter);
  EXPECT_THROW(parse_values("1:2:0"), InvalidParameter);
}

TEST(ParseSettings, AcceptsRomanAndArabic) {
  EXPECT_EQ(parse_settings("I,II"), (std::vector<Setting>{Setting::I, Setting::II}));
  EXPECT_EQ(parse_settings("2"), std::vector<Setting>{Setting::II});
  EXPECT_THROW(parse_settings("III"), InvalidParameter);
}

TEST(Commands, RoundTrip) {
  for (const auto& name : command_names()) EXPECT_EQ(to_string(parse_command(name)), name);
  EXPECT_THROW(parse_command("bogus"), InvalidParameter);
}

TEST(FormatDouble, Rendering) {
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0 / 3.0), "0.333333333333333");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(ResolveSpec, FlagsOverrideConfigOverridePreset) {
  const std::string cfg = write_temp("collideq_test_config.txt",
                                     "# comment\npreset = fig2\nbeta = 1.5\ndt = 0.2 # trailing\n");
  const ExperimentSpec s = resolve_spec(Command::steady_state, {{"config", cfg}, {"dt", "0.3"}});
  EXPECT_EQ(s.betas, std::vector<double>{1.5});
  EXPECT_EQ(s.dts, std::vector<double>{0.3});
  EXPECT_EQ(s.settings.size(), 2u);  // from the preset
  EXPECT_EQ(s.resolved.at("preset"), "fig2");
  EXPECT_EQ(s.resolved.count("config"), 0u);
  std::remove(cfg.c_str());
}

TEST(ResolveSpec, RejectsUnknownKeysAndPresets) {
  EXPECT_THROW(resolve_spec(Command::steady_state, {{"bogus", "1"}}), InvalidParameter);
  EXPECT_THROW(resolve_spec(Command::steady_state, {{"preset", "fig9"}}), InvalidParameter);
  EXPECT_THROW(resolve_spec(Command::dynamics, {{"delta_units", "deg"}}), InvalidParameter);
  EXPECT_THROW(read_config_file("/nonexistent/collideq.cfg"), Error);
}

TEST(ResolveSpec, StepsOverrideTimeSpan) {
  const ExperimentSpec s = resolve_spec(Command::dynamics, {{"steps", "7"}});
  ASSERT_TRUE(s.steps.has_value());
  EXPECT_EQ(*s.steps, 7u);
  EXPECT_EQ(s.resolved.count("t_final"), 0u);
}

TEST(RunExperiment, HeaderEchoesResolvedParameters) {
  const ExperimentSpec s = resolve_spec(Command::steady_state, {{"setting", "I"}, {"beta", "2"}, {"dt", "0.1"}, {"delta", "0"}});
  const RunResult r = run_experiment(s);
  const auto lines = lines_of(r.csv);
  ASSERT_GE(lines.size(), 4u);
  EXPECT_EQ(lines[0], "# collideq_version=0.1.0");
  EXPECT_EQ(lines[1], "# command=steady-state");
  bool saw_beta = false;
  for (const auto& l : lines) saw_beta = saw_beta || l == "# beta=2";
  EXPECT_TRUE(saw_beta);
  EXPECT_EQ(r.rows, 1u);
  EXPECT_EQ(r.flagged, 0u);
}

TEST(RunExperiment, OutputIsDeterministic) {
  const ParamMap flags{{"setting", "II"}, {"beta", "1"}, {"dt", "0.1"}, {"delta", "0.9"}, {"steps", "8"}, {"traj", "300"}};
  const ExperimentSpec s = resolve_spec(Command::trajectories, flags);
  EXPECT_EQ(run_experiment(s).csv, run_experiment(s).csv);
  const ExperimentSpec d = resolve_spec(Command::dynamics, {{"setting", "I,II"}, {"dt", "0.1,0.2"}, {"delta", "0.5"}, {"steps", "5"}});
  const RunResult rd = run_experiment(d);
  EXPECT_EQ(rd.csv, run_experiment(d).csv);
  EXPECT_EQ(rd.rows, 2u * 2u * 6u);  // two settings, two (dt, delta) pairs, steps 0..5
}

TEST(RunExperiment, PairedListsMustMatch) {
  const ExperimentSpec d = resolve_spec(Command::dynamics, {{"dt", "0.1,0.2"}, {"delta", "0.5,0.6,0.7"}, {"steps", "5"}});
  EXPECT_THROW(run_experiment(d), InvalidParameter);
}

TEST(RunExperiment, LimitScanFlagsOutOfRangeRows) {
  // r < dt0 puts 1 − dt/r below zero.
  const ExperimentSpec s = resolve_spec(Command::limit_scan, {{"r", "0.004,5"}, {"halvings", "2"}});
  const RunResult r = run_experiment(s);
  EXPECT_EQ(r.rows, 4u);
  EXPECT_EQ(r.flagged, 2u);
  const auto rows = data_rows(r.csv);
  ASSERT_EQ(rows.size(), 4u);
  const std::size_t commas = count_commas(rows.front());
  for (const auto& row : rows) EXPECT_EQ(count_commas(row), commas);
  EXPECT_TRUE(rows[0].ends_with("skipped_delta_out_of_range"));
  EXPECT_TRUE(rows[3].ends_with(",ok"));
}

TEST(RunExperiment, TrajectorySummaryLines) {
  const ExperimentSpec s = resolve_spec(Command::trajectories, {{"steps", "5"}, {"traj", "200"}, {"delta", "0.5"}, {"dt", "0.1"}});
  const RunResult r = run_experiment(s);
  EXPECT_NE(r.csv.find("# summary coverage_"), std::string::npos);
  EXPECT_EQ(r.rows, 5u * 2u);
}
