#include <hsl/cli.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace hsl;
using namespace hsl::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hsl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = hsl::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) v.push_back(l);
  return v;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> v;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');) v.push_back(f);
  return v;
}

double csv_success(const std::string& out) {
  const auto l = lines(out);
  EXPECT_EQ(l.at(0), kReportCsvHeader);
  return std::stod(fields(l.at(1)).at(4));
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("hsl_test_" + name);
}

std::string scenario(const std::string& file) { return std::string(HSL_SCENARIO_DIR) + "/" + file; }

}  // namespace

TEST(IntList, Parsing) {
  EXPECT_EQ(parse_int_list("4", "x"), std::vector<int>({4}));
  EXPECT_EQ(parse_int_list("8,4,8", "x"), std::vector<int>({4, 8}));
  EXPECT_EQ(parse_int_list("0..3", "x"), std::vector<int>({0, 1, 2, 3}));
  EXPECT_EQ(parse_int_list("1, 3..4", "x"), std::vector<int>({1, 3, 4}));
  EXPECT_THROW(parse_int_list("", "x"), InputError);
  EXPECT_THROW(parse_int_list("3..1", "x"), InputError);
  EXPECT_THROW(parse_int_list("4a", "x"), InputError);
  EXPECT_THROW(parse_single_int("4,8", "x"), InputError);
}

TEST(Run, GroverBaseline) {
  const auto r = invoke({"run", "--baseline", "grover", "--n", "4", "--tau-q", "1"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(csv_success(r.out), 1.0, 1e-12);
}

TEST(Run, ClassicalBaseline) {
  const auto r = invoke({"run", "--baseline", "classical", "--n", "8", "--tau-c", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(csv_success(r.out), 0.5, 1e-12);
}

TEST(Run, EmptyScheduleGuesses) {
  const auto r = invoke({"run", "--n", "8"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(csv_success(r.out), 1.0 / 8, 1e-12);
}

TEST(Run, WritesJsonAndCsv) {
  const auto stem = temp_path("run").string();
  const auto r = invoke({"run", "--config", scenario("hybrid_n16.json"), "--out", stem});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(read_file(stem + ".json"));
  EXPECT_EQ(j["oracle_mode"], "pseudo");
  EXPECT_TRUE(j.contains("progress"));
  EXPECT_EQ(read_file(stem + ".csv"), r.out);
  EXPECT_NEAR(csv_success(r.out), closed_form(BaselineKind::hybrid(2, 2), 16), 1e-10);

  const auto again = invoke({"run", "--config", scenario("hybrid_n16.json"), "--format", "json"});
  EXPECT_EQ(again.out, read_file(stem + ".json"));
}

TEST(Run, AllScenariosPass) {
  for (const auto& entry : std::filesystem::directory_iterator(HSL_SCENARIO_DIR)) {
    if (entry.path().extension() != ".json") continue;
    const auto r = invoke({"run", "--config", entry.path().string()});
    EXPECT_EQ(r.code, 0) << entry.path() << ": " << r.err;
  }
}

TEST(Config, ErrorsCarryLineNumbers) {
  const std::string bad_key = "{\n  \"n\": 4,\n  \"shedule\": \"C\"\n}\n";
  try {
    parse_config(bad_key);
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }

  const std::string malformed = "{\n  \"n\": 4,\n  \"schedule\": \"C\"\n  \"l0\": 1\n}\n";
  try {
    parse_config(malformed);
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }

  const std::string mismatch = "{\n  \"n\": 4,\n  \"schedule\": \"CC\",\n  \"unitaries\": [\"identity\"]\n}\n";
  try {
    build_algorithm(parse_config(mismatch), mismatch);
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }

  const std::string bad_target = "{\n  \"n\": 4,\n  \"schedule\": \"Q:3\"\n}\n";
  try {
    build_algorithm(parse_config(bad_target), bad_target);
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Config, InvalidInputExitsTwo) {
  const auto path = temp_path("bad.json");
  write_file(path.string(), "{\"n\": 1}");
  EXPECT_EQ(invoke({"run", "--config", path.string()}).code, 2);
  EXPECT_EQ(invoke({"run", "--config", "/nonexistent/hsl.json"}).code, 2);
  EXPECT_EQ(invoke({"run", "--oracle-mode", "sideways"}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({}).code, 2);
}

TEST(Config, ExplicitStatesAndMatrices) {
  const std::string text = R"({
    "n": 2,
    "initial": [[0.6, 0], [0, 0.8]],
    "schedule": "C",
    "unitaries": [{"type": "matrix", "data": [[0,0,1,0],[0,0,0,1],[1,0,0,0],[0,1,0,0]]}]
  })";
  const auto alg = build_algorithm(parse_config(text), text);
  EXPECT_NEAR(std::abs(alg.initial.amplitudes()[1]), 0.8, 1e-15);
  // The swap exchanges the two indices after the measurement.
  EXPECT_NEAR(success_finding(alg, OracleMode::UseClassical), 0.5 * (0.64 + 0.36), 1e-12);
}

TEST(Verify, DefaultsPassAndAreDeterministic) {
  const auto a = invoke({"verify", "--trials", "12", "--seed", "5"});
  const auto b = invoke({"verify", "--trials", "12", "--seed", "5"});
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(lines(a.out).size(), 1u + 24u);
  const auto j1 = invoke({"verify", "--trials", "4", "--format", "json"});
  const auto j2 = invoke({"verify", "--trials", "4", "--format", "json"});
  EXPECT_EQ(j1.out, j2.out);
  EXPECT_EQ(json::parse(j1.out).size(), 8u);
}

TEST(Verify, ExitCodes) {
  EXPECT_EQ(invoke({"verify", "--trials", "0"}).code, 2);
  EXPECT_EQ(invoke({"verify", "--n", "1"}).code, 2);
  const auto broken = invoke({"verify", "--trials", "8", "--n", "4", "--inject-broken-oracle"});
  EXPECT_EQ(broken.code, 1);
  EXPECT_NE(broken.err.find("FAIL"), std::string::npos);
}

TEST(Verify, ExitZeroIffAllPass) {
  VerifyConfig v;
  v.n_list = {4};
  v.trials = 6;
  for (bool broken : {false, true}) {
    v.broken_oracle = broken;
    bool all = true;
    for (const auto& r : verify_suite(v)) all = all && r.report.all_pass();
    std::ostringstream out, err;
    EXPECT_EQ(cmd_verify(v, "csv", "", out, err) == kOk, all);
  }
}

TEST(Sweep, HybridGrid) {
  const auto r = invoke({"sweep", "--n", "16", "--tau-c", "0..4", "--tau-q", "0..2", "--baseline", "hybrid"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 16u);
  EXPECT_EQ(l[0], "n,tau_c,tau_q,baseline,success_avg,closed_form,bound_thm_B,ratio");
  for (std::size_t i = 1; i < l.size(); ++i) {
    const auto f = fields(l[i]);
    EXPECT_LE(std::stod(f[7]), 1.0 + 1e-9) << l[i];
    EXPECT_NEAR(std::stod(f[4]), std::stod(f[5]), 1e-9) << l[i];
  }
}

TEST(Sweep, SingletonAndEmptyGrid) {
  const auto one = invoke({"sweep", "--n", "8", "--tau-q", "1", "--baseline", "grover"});
  EXPECT_EQ(one.code, 0);
  EXPECT_EQ(lines(one.out).size(), 2u);
  EXPECT_EQ(invoke({"sweep", "--n", "8", "--tau-c", "3..1"}).code, 2);
  EXPECT_EQ(invoke({"sweep"}).code, 2);
  EXPECT_EQ(invoke({"sweep", "--n", "4", "--tau-c", "4", "--tau-q", "1"}).code, 2);
}

TEST(Optimize, EmitsJson) {
  const auto r = invoke({"optimize", "--n", "4", "--tau-q", "1", "--budget", "200"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["best_success"].get<double>(), 1.0, 1e-6);
  EXPECT_NEAR(j["grover_value"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(j["schedule"], "Q:0");
  EXPECT_EQ(invoke({"optimize", "--n", "4", "--budget", "0"}).code, 2);
  EXPECT_EQ(invoke({"optimize", "--schedule", "Q:2"}).code, 2);
}

TEST(Report, Bounds) {
  const auto r = invoke({"report", "--n", "16", "--tau-c", "4", "--tau-q", "1"});
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["bounds"]["theorem2"].get<double>(), 49.0 / 16, 1e-15);
  EXPECT_TRUE(j["baselines"].contains("hybrid"));
  EXPECT_FALSE(j["baselines"].contains("grover"));
  EXPECT_EQ(invoke({"report", "--epsilon", "2"}).code, 2);
}
