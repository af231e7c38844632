#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "geq/commands.hpp"

namespace {

using geq::cli::Json;
namespace fs = std::filesystem;

const std::string kData = GEQ_DATA_DIR;

struct CliResult {
  int code = -1;
  std::string out;
  Json report;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "geq");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = geq::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  if (!r.out.empty() && r.out.front() == '{') r.report = Json::parse(r.out);
  return r;
}

std::string corpus(const std::string& name) { return kData + "/corpus/" + name + ".json"; }
std::string scene(const std::string& name) { return kData + "/scenes/" + name + ".json"; }
std::string negative(const std::string& name) { return kData + "/negative/" + name + ".json"; }

std::vector<std::string> files_in(const std::string& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(kData + "/" + dir)) out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

std::string temp_file(const std::string& name, const std::string& content = "") {
  const auto p = fs::temp_directory_path() / ("geq_cli_test_" + name);
  if (!content.empty()) std::ofstream(p) << content;
  return p.string();
}

double check_max(const Json& r, const std::string& check) { return r["checks"][check]["max"].get<double>(); }

TEST(CliCheck, CorpusPasses) {
  const auto files = files_in("corpus");
  ASSERT_GE(files.size(), 10u);
  for (const auto& f : files) {
    const auto r = cli({"check", f});
    EXPECT_EQ(r.code, 0) << f;
    EXPECT_LE(check_max(r.report, "compatibility"), 1e-9) << f;
    EXPECT_EQ(r.report["derivatives"], "exact");
  }
}

TEST(CliCheck, NegativeControlsFail) {
  for (const auto& f : files_in("negative")) {
    const auto r = cli({"check", f});
    EXPECT_EQ(r.code, 2) << f;
    EXPECT_GT(check_max(r.report, "compatibility"), 1e-6) << f;
    EXPECT_FALSE(r.report["pass"].get<bool>());
  }
}

TEST(CliCheck, ConstantMultipleReportsScalarL) {
  const auto r = cli({"check", scene("conformal")});
  ASSERT_EQ(r.code, 0);
  const double expected = std::pow(2.0, -0.25);
  const Json& l = r.report["base"]["L"];
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(l[i][k].get<double>(), i == k ? expected : 0.0, 1e-15);
  ASSERT_EQ(r.report["base"]["spectrum"].size(), 1u);
  EXPECT_EQ(r.report["base"]["spectrum"][0]["multiplicity"], 3);
}

TEST(CliCheck, ReportFields) {
  const auto r = cli({"check", corpus("lc2_simple"), "--points", "17", "--seed", "5"});
  EXPECT_EQ(r.report["command"], "check");
  EXPECT_EQ(r.report["seed"], 5);
  EXPECT_EQ(r.report["points"], 17);
  EXPECT_EQ(r.report["checks"]["compatibility"]["count"], 17);
  for (const char* key : {"max", "mean", "p50", "p90", "tolerance", "pass"})
    EXPECT_TRUE(r.report["checks"]["nijenhuis"].contains(key)) << key;
  EXPECT_TRUE(r.report["flags"].contains("sign_flip_at_base"));
}

TEST(CliCheck, ByteIdenticalReruns) {
  for (const auto& cmd : std::vector<std::vector<std::string>>{
           {"check", corpus("lc4_mixed")},
           {"split", corpus("lc3_simple"), "--groups", "0|1,2", "--points", "20"},
           {"glue", scene("line_varying"), corpus("lc2_weyl"), "--points", "20", "--trajectories", "5"},
           {"ts", corpus("lc2_varying"), "--f", "exp", "--points", "20"},
           {"oracle", corpus("lc3_mixed"), "--trajectories", "5"}}) {
    const auto a = cli(cmd);
    const auto b = cli(cmd);
    EXPECT_EQ(a.out, b.out) << cmd[0];
    EXPECT_EQ(a.code, b.code);
  }
}

TEST(CliCheck, ToleranceScaleFromEnvironment) {
  ::setenv("GEQ_TOL_SCALE", "1e-30", 1);
  const auto strict = cli({"check", corpus("lc3_simple"), "--points", "10"});
  ::setenv("GEQ_TOL_SCALE", "-1", 1);
  const auto invalid = cli({"check", corpus("lc3_simple"), "--points", "10"});
  ::unsetenv("GEQ_TOL_SCALE");
  EXPECT_EQ(strict.code, 2);
  EXPECT_DOUBLE_EQ(strict.report["checks"]["compatibility"]["tolerance"].get<double>(), 1e-39);
  EXPECT_EQ(invalid.code, 3);
}

TEST(CliScene, ValidationErrorsNamePaths) {
  struct Case {
    std::string json, code, path;
  };
  const std::vector<Case> cases = {
      {R"({"box": [[0, 1]], "g": [["1"]], "gbar": [["1"]]})", "InvalidInput", "/dim"},
      {R"({"dim": 1, "box": [[1, 0]], "g": [["1"]], "gbar": [["1"]]})", "InvalidInput", "/box/0"},
      {R"({"dim": 1, "box": [[0, 1]], "base_point": [2], "g": [["1"]], "gbar": [["1"]]})", "InvalidInput", "/base_point"},
      {R"({"dim": 2, "box": [[0, 1], [0, 1]], "g": [["1", "0"], [null, "1"]], "gbar": [["1", "x5"], [null, "1"]]})",
       "IndexOutOfRange", "/gbar/0/1"},
      {R"({"dim": 2, "box": [[0, 1], [0, 1]], "g": [["1", "0"], [null, "1 +"]], "gbar": [["1", "0"], [null, "1"]]})",
       "SyntaxError", "/g/1/1"},
      {R"({"dim": 2, "box": [[0, 1], [0, 1]], "g": [["1", "1"], [null, "1"]], "gbar": [["1", "0"], [null, "1"]]})",
       "DegenerateMetric", "/g"},
      {R"({"dim": 2, "box": [[0, 1], [0, 1]], "g": [["1", "0"]], "gbar": [["1", "0"], [null, "1"]]})", "InvalidInput",
       "/g"},
  };
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto r = cli({"check", temp_file("bad" + std::to_string(i) + ".json", cases[i].json)});
    EXPECT_EQ(r.code, 3) << cases[i].json;
    EXPECT_EQ(r.report["error"]["code"], cases[i].code) << cases[i].json;
    EXPECT_NE(r.report["error"]["message"].get<std::string>().find(cases[i].path), std::string::npos)
        << r.report["error"]["message"];
  }
}

TEST(CliScene, UpperTriangleRowsAndNumbers) {
  const auto path = temp_file("upper.json", R"({"dim": 2, "box": [[0, 1], [0, 1]], "g": [[1, 0], [2]],
                                               "gbar": [["2", "0"], [null, "4"]]})");
  const auto s = geq::cli::load_scene(path);
  EXPECT_EQ(s.g.value(s.chart.base)(1, 1), 2.0);
  EXPECT_EQ(s.gbar.value(s.chart.base)(1, 0), 0.0);
}

TEST(CliSplit, DiagonalExample) {
  const auto r = cli({"split", scene("diagonal"), "--groups", "0|1"});
  ASSERT_EQ(r.code, 0) << r.out;
  const Json& h = r.report["base"]["h"];
  EXPECT_NEAR(h[0][0].get<double>(), -1.0 / 3, 1e-14);
  EXPECT_NEAR(h[1][1].get<double>(), 1.0 / 3, 1e-14);
  EXPECT_NEAR(r.report["base"]["hbar"][1][1].get<double>(), -1.0 / 75, 1e-15);
}

TEST(CliSplit, ConjugatePairCannotBeSplit) {
  const auto bad = cli({"split", scene("conjugate_pair"), "--groups", "0|1,2"});
  EXPECT_EQ(bad.code, 3);
  EXPECT_EQ(bad.report["error"]["code"], "ConjugationViolation");
  EXPECT_TRUE(bad.report["error"]["point"].is_array());
  EXPECT_EQ(cli({"split", scene("conjugate_pair"), "--groups", "0,1|2"}).code, 0);
}

TEST(CliSplit, LeviCivitaThreeDimensional) {
  const auto r = cli({"split", corpus("lc3_simple"), "--groups", "0|1,2", "--points", "40"});
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_LE(check_max(r.report, "nabla_h_P1"), 1e-4);
  EXPECT_LE(check_max(r.report, "orthogonality"), 1e-8);
}

TEST(CliSplit, GridExport) {
  const auto path = temp_file("grid.json");
  const auto r = cli({"split", corpus("lc3_simple"), "--groups", "0|1,2", "--points", "10", "--export", path,
                      "--grid", "3"});
  ASSERT_EQ(r.code, 0);
  std::ifstream in(path);
  const Json g = Json::parse(in);
  EXPECT_EQ(g["shape"], Json::array({3, 3, 3}));
  ASSERT_EQ(g["fields"]["h"].size(), 27u);
  EXPECT_EQ(g["fields"]["P1"][0].size(), 9u);
  // First node is the lower corner; P1 there projects onto the first axis.
  EXPECT_NEAR(g["fields"]["P1"][0][0].get<double>(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(g["axes"][2][1].get<double>(), 0.0);
}

TEST(CliSplit, InvalidGroupSyntax) {
  for (const char* groups : {"0,1", "0|a", "0||1", "|1"}) {
    const auto r = cli({"split", scene("diagonal"), "--groups", groups});
    EXPECT_EQ(r.code, 3) << groups;
  }
  EXPECT_EQ(cli({"split", scene("diagonal"), "--groups", "0|7"}).code, 3);
}

TEST(CliGlue, OneDimensionalExample) {
  const auto r = cli({"glue", scene("line_a"), scene("line_b"), "--points", "20", "--trajectories", "5"});
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.report["base"]["g"], Json::parse("[[-3.0, 0.0], [0.0, 3.0]]"));
  EXPECT_EQ(r.report["base"]["gbar"], Json::parse("[[0.75, 0.0], [0.0, -0.1875]]"));
}

TEST(CliGlue, SameSceneOverlaps) {
  const auto r = cli({"glue", scene("line_a"), scene("line_a")});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.report["error"]["code"], "SpectraOverlap");
  EXPECT_EQ(r.report["error"]["point"].size(), 2u);
}

TEST(CliGlue, OneAndTwoDimensional) {
  const auto r = cli({"glue", scene("line_varying"), corpus("lc2_weyl"), "--points", "50"});
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_LE(check_max(r.report, "oracle_defect"), 1e-5);
  EXPECT_EQ(r.report["trajectories"], 20);
  for (const char* c : {"condition1", "condition2", "condition3"}) EXPECT_LE(check_max(r.report, c), 1e-5);
}

TEST(CliTs, IdentityMatchesCheck) {
  const auto check = cli({"check", corpus("lc3_mixed")});
  const auto ts = cli({"ts", corpus("lc3_mixed"), "--f", "id"});
  ASSERT_EQ(ts.code, 0);
  for (const char* key : {"base", "checks", "flags", "derivatives", "pass", "seed", "points"})
    EXPECT_EQ(check.report[key], ts.report[key]) << key;
}

TEST(CliTs, SinjukovCasePasses) {
  for (const auto& f : files_in("corpus")) {
    const auto r = cli({"ts", f, "--f", "poly:0,1", "--points", "30"});
    EXPECT_EQ(r.code, 0) << f;
    EXPECT_EQ(r.report["derivatives"], "finite_difference");
  }
}

TEST(CliTs, ReciprocalAtEigenvalue) {
  const auto r = cli({"ts", corpus("lc2_simple"), "--f", "recip:2"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.report["error"]["code"], "DomainViolation");
  EXPECT_EQ(cli({"ts", corpus("lc2_simple"), "--f", "poly:0"}).report["error"]["code"], "ZeroInImage");
  EXPECT_EQ(cli({"ts", corpus("lc2_simple"), "--f", "sqrt"}).code, 3);
  EXPECT_EQ(cli({"ts", corpus("lc2_simple"), "--f", "poly:1,x"}).code, 3);
}

TEST(CliGenerate, ReproducesCommittedCorpus) {
  for (const auto& file : files_in("lc")) {
    const auto name = fs::path(file).filename().string();
    const auto r = cli({"generate", file});
    ASSERT_EQ(r.code, 0) << file;
    std::ifstream in(kData + "/corpus/" + name);
    std::stringstream committed;
    committed << in.rdbuf();
    EXPECT_EQ(r.out, committed.str()) << name;
  }
}

TEST(CliGenerate, SpecErrors) {
  const auto collide = temp_file("collide.json", R"({"box": [[-1, 1], [-1, 1]], "simple": ["1.5 + 0.6*x0", "2"]})");
  EXPECT_EQ(cli({"generate", collide}).code, 3);
  const auto bad_k = temp_file("badk.json", R"({"box": [[-1, 1], [-1, 1]], "blocks": [{"lambda": 2, "k": 1, "metric": [["1"]]}]})");
  const auto r = cli({"generate", bad_k});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.report["error"]["message"].get<std::string>().find("/blocks/0/k"), std::string::npos);
}

TEST(CliOracle, CorpusAndNegativeControl) {
  const auto good = cli({"oracle", corpus("lc3_simple")});
  EXPECT_EQ(good.code, 0);
  EXPECT_EQ(good.report["defects"].size(), 20u);
  const auto bad = cli({"oracle", negative("unrelated2")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_GT(check_max(bad.report, "defect"), 1e-2);
}

TEST(CliUsage, ParseErrorsAndHelp) {
  EXPECT_EQ(cli({}).code, 3);
  EXPECT_EQ(cli({"frobnicate"}).code, 3);
  EXPECT_EQ(cli({"check"}).code, 3);
  EXPECT_EQ(cli({"check", scene("diagonal"), "--points", "0"}).code, 3);
  EXPECT_EQ(cli({"check", kData + "/missing.json"}).code, 3);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

int exit_status(const std::string& cmd) {
  const int raw = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

TEST(CliBinary, ExitCodes) {
  const std::string bin = GEQ_BINARY;
  EXPECT_EQ(exit_status(bin + " check " + scene("line_a") + " --points 5"), 0);
  EXPECT_EQ(exit_status(bin + " check " + negative("unrelated2") + " --points 5"), 2);
  EXPECT_EQ(exit_status(bin + " check " + kData + "/missing.json"), 3);
}

}  // namespace
