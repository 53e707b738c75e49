#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "volform/cli.hpp"

using namespace volform;
namespace fs = std::filesystem;

namespace {

struct Result
{
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "volform");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir = fs::temp_directory_path() /
          ("volform_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string write(const std::string& name, const std::string& text)
  {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p.string();
  }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  static std::string slurp(const std::string& p)
  {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string linear(const std::string& matrix) { return write("linear.json", R"({"type":"linear","matrix":)" + matrix + "}"); }

  fs::path dir;
};

const std::string kAdmissible = "[[0.3,0.5,0.7],[-0.4,-0.1,0.6],[0.2,-0.5,-0.2]]";
const std::string kZero = "[[0,0,0],[0,0,0],[0,0,0]]";

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ','))
      cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
      cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

} // namespace

TEST_F(CliTest, ClassifyIdentityPair)
{
  const Result r = run_cli({"classify", "--sigma", "1,2,3", "--Sigma", "1,2,3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("class: S1\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("tau: identity\n"), std::string::npos);
  EXPECT_NE(r.out.find("sign(tau): 1\n"), std::string::npos);
}

TEST_F(CliTest, ClassifySymplecticEulerPair)
{
  const Result r = run_cli({"classify", "--sigma", "3,2,1", "--Sigma", "1,2,3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("class: SE\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("sign(tau): -1\n"), std::string::npos);
  EXPECT_NE(r.out.find("x₃ = ∂x₂ φ(x₁,x₂,X₃)"), std::string::npos);
}

TEST_F(CliTest, ClassifyRejectsMalformedPermutation)
{
  const Result r = run_cli({"classify", "--sigma", "1,1,2", "--Sigma", "1,2,3"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("E_CONFIG: ", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("not a permutation"), std::string::npos);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST_F(CliTest, IntegrateZeroFieldStaysPut)
{
  const std::string field = linear(kZero);
  for (const auto& scheme : scheme_names()) {
    const std::string out = path(scheme + ".csv");
    const Result r = run_cli({"integrate", "--field", field, "--scheme", scheme, "--h", "0.1", "--steps", "10",
                              "--x0", "0.5,-0.25,1", "--audit-every", "1", "--out", out});
    ASSERT_EQ(r.code, 0) << scheme << ": " << r.err;
    const auto rows = csv_rows(slurp(out));
    ASSERT_EQ(rows.size(), 12u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"step", "t", "x1", "x2", "x3", "det_defect"}));
    for (std::size_t k = 1; k < rows.size(); ++k) {
      EXPECT_EQ(rows[k][2], "5.0000000000000000e-01") << scheme;
      EXPECT_EQ(rows[k][3], "-2.5000000000000000e-01") << scheme;
      EXPECT_EQ(rows[k][4], "1.0000000000000000e+00") << scheme;
      EXPECT_EQ(rows[k][5], "0.0000000000000000e+00") << scheme;
    }
  }
}

TEST_F(CliTest, IntegrateRotationStaysBounded)
{
  const std::string field = linear("[[0,-1,0],[1,0,0],[0,0,0]]");
  const std::string out = path("rot.csv");
  const Result r = run_cli({"integrate", "--field", field, "--scheme", "se-se", "--h", "0.01", "--steps", "1000",
                            "--x0", "1,0,0.5", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(slurp(out));
  ASSERT_EQ(rows.size(), 1002u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double x1 = std::stod(rows[k][2]), x2 = std::stod(rows[k][3]);
    EXPECT_LE(std::hypot(x1, x2), 1.01);
    EXPECT_EQ(std::stod(rows[k][4]), 0.5);
    if ((k - 1) % 100 == 0) {
      EXPECT_LE(std::stod(rows[k][5]), 1e-10);
    } else {
      EXPECT_EQ(rows[k][5], "");
    }
  }
}

TEST_F(CliTest, IntegrateIsDeterministic)
{
  const std::string field = write("abc.json", R"({"type":"abc","A":1,"B":0.7,"C":0.43})");
  for (const char* name : {"a.csv", "b.csv"})
    ASSERT_EQ(run_cli({"integrate", "--field", field, "--scheme", "dl-dl", "--h", "0.01", "--steps", "50",
                       "--audit-every", "10", "--out", path(name)})
                  .code,
              0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
}

TEST_F(CliTest, MissingFieldFile)
{
  const Result r = run_cli({"integrate", "--field", path("nope.json"), "--scheme", "se-se"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("E_CONFIG: "), std::string::npos);
  EXPECT_NE(r.err.find("nope.json"), std::string::npos);
}

TEST_F(CliTest, ConfigErrors)
{
  const std::string field = linear(kAdmissible);
  EXPECT_EQ(run_cli({"integrate", "--field", field, "--scheme", "leapfrog"}).code, 2);
  EXPECT_EQ(run_cli({"integrate", "--field", field, "--scheme", "se-se", "--h", "-1"}).code, 2);
  EXPECT_EQ(run_cli({"integrate", "--field", field, "--scheme", "se-se", "--x0", "1,2"}).code, 2);
  EXPECT_EQ(run_cli({"integrate", "--field", field, "--scheme", "se-se", "--steps", "0"}).code, 2);
  EXPECT_EQ(run_cli({"integrate", "--field", field}).code, 2);
  EXPECT_EQ(run_cli({"bogus"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  const std::string bad = write("bad.json", R"({"type":"torus"})");
  const Result r = run_cli({"integrate", "--field", bad, "--scheme", "se-se"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("torus"), std::string::npos);
  const std::string trace = write("trace.json", R"({"type":"linear","matrix":[[1,0,0],[0,0,0],[0,0,0]]})");
  EXPECT_EQ(run_cli({"integrate", "--field", trace, "--scheme", "se-se"}).code, 2);
  const std::string junk = write("junk.json", "{not json");
  EXPECT_EQ(run_cli({"integrate", "--field", junk, "--scheme", "se-se"}).code, 2);
}

TEST_F(CliTest, DegenerateSchemeExitsThree)
{
  // a13 = 0: S1 potentials do not exist.
  const std::string field = linear("[[0.3,0.5,0],[-0.4,-0.1,0.6],[0.2,-0.5,-0.2]]");
  const Result r = run_cli({"integrate", "--field", field, "--scheme", "s1-quispel"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.err.rfind("E_DEGENERATE: ", 0), 0u) << r.err;
}

TEST_F(CliTest, SolverErrorsMapToExitThree)
{
  const cli::Failure a = cli::failure_of(Error(ErrorCode::NewtonDivergence, "x"));
  EXPECT_EQ(a.prefix, "E_SOLVER");
  EXPECT_EQ(a.code, 3);
  EXPECT_EQ(cli::failure_of(Error(ErrorCode::TwistViolation, "x")).prefix, "E_SOLVER");
  EXPECT_EQ(cli::failure_of(Error(ErrorCode::LegendreFailure, "x")).prefix, "E_DEGENERATE");
  EXPECT_EQ(cli::failure_of(Error(ErrorCode::InvalidPermutation, "x")).code, 2);
}

TEST_F(CliTest, NewtonToleranceFromEnvironment)
{
  const std::string field = linear(kAdmissible);
  ::setenv("VOLFORM_NEWTON_TOL", "abc", 1);
  const Result r = run_cli({"integrate", "--field", field, "--scheme", "se-se", "--steps", "1"});
  ::unsetenv("VOLFORM_NEWTON_TOL");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("VOLFORM_NEWTON_TOL"), std::string::npos);
  ::setenv("VOLFORM_NEWTON_TOL", "1e-10", 1);
  EXPECT_EQ(cli::solver_config().newton_tol, 1e-10);
  ::unsetenv("VOLFORM_NEWTON_TOL");
  EXPECT_EQ(cli::solver_config().newton_tol, SolverConfig{}.newton_tol);
}

TEST_F(CliTest, QuadPotentialField)
{
  // F1 = x3^2 / 2: x2' = x3.
  const QuadForm q = 0.5 * product(AffineExpr::var(Symbol::x3), AffineExpr::var(Symbol::x3));
  nlohmann::json j{{"type", "quad-potentials"}, {"F1", q.to_flat()}};
  const std::string field = write("quad.json", j.dump());
  const Result r = run_cli({"integrate", "--field", field, "--scheme", "dl-se", "--h", "0.5", "--steps", "2",
                            "--x0", "0,0,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[3][3], "1.0000000000000000e+00");
}

TEST_F(CliTest, VolcheckPassesAndFails)
{
  const std::string field = linear(kAdmissible);
  const Result good = run_cli({"volcheck", "--field", field, "--scheme", "se-se", "--h", "0.1", "--samples", "20",
                               "--fail-above", "1e-10"});
  EXPECT_EQ(good.code, 0) << good.err;
  EXPECT_NE(good.out.find("point,x1,x2,x3,defect\n"), std::string::npos);
  const auto pos = good.out.find("max_defect=");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_LT(std::stod(good.out.substr(pos + 11)), 1e-10);

  const Result bad = run_cli({"volcheck", "--field", field, "--scheme", "euler", "--h", "0.1", "--samples", "20",
                              "--fail-above", "1e-10"});
  EXPECT_EQ(bad.code, 1);

  const Result zero = run_cli({"volcheck", "--field", linear(kZero), "--scheme", "dl-dl", "--out", path("z.csv")});
  EXPECT_EQ(zero.code, 0);
  EXPECT_EQ(zero.out, "max_defect=0.0000000000000000e+00 mean_defect=0.0000000000000000e+00\n");
  const std::string csv = slurp(path("z.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 102);
}

TEST_F(CliTest, VolcheckSeedAndBox)
{
  const std::string field = write("abc.json", R"({"type":"abc","A":1,"B":0.7,"C":0.43})");
  const Result a = run_cli({"volcheck", "--field", field, "--scheme", "se-se", "--samples", "3", "--seed", "7",
                            "--box", "2"});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto rows = csv_rows(a.out);
  const auto pts = sample_points(3, 7, 2.0);
  EXPECT_EQ(rows[1][1], format_double(pts[0][0]));
  EXPECT_EQ(rows[3][3], format_double(pts[2][2]));
}

TEST_F(CliTest, OrderSlopes)
{
  const std::string field = linear(kAdmissible);
  const std::string out = path("order.csv");
  const Result s1 = run_cli({"order", "--field", field, "--scheme", "s1-quispel", "--out", out});
  ASSERT_EQ(s1.code, 0) << s1.err;
  const double slope = std::stod(s1.out.substr(s1.out.find("slope: ") + 7));
  EXPECT_GE(slope, 0.9);
  EXPECT_LE(slope, 1.1);
  EXPECT_EQ(slurp(out).rfind("h,error,order\n", 0), 0u);

  const Result rk = run_cli({"order", "--field", field, "--scheme", "rk4", "--h0", "0.2", "--levels", "3"});
  ASSERT_EQ(rk.code, 0) << rk.err;
  EXPECT_NEAR(std::stod(rk.out.substr(rk.out.find("slope: ") + 7)), 4.0, 0.2);

  const Result one = run_cli({"order", "--field", field, "--scheme", "euler", "--levels", "1"});
  ASSERT_EQ(one.code, 0);
  const auto rows = csv_rows(one.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].back(), "");
  EXPECT_NE(one.out.find("slope: n/a"), std::string::npos);
}

TEST_F(CliTest, SolverFailureNamesStepAndPoint)
{
  const std::string field = write("abc.json", R"({"type":"abc","A":1,"B":0.7,"C":0.43})");
  const Result r = run_cli({"integrate", "--field", field, "--scheme", "dl-dl", "--h", "2", "--x0", "0.3,1.2,-0.4"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.err.rfind("E_DEGENERATE: LegendreFailure", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("at step 0, x = (2.9999999999999999e-01, "), std::string::npos) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}
