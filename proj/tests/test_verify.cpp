#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "volform/verify.hpp"

using namespace volform;

namespace {

const Mat3 kA{{{0.3, 0.5, 0.7}, {-0.4, -0.1, 0.6}, {0.2, -0.5, -0.2}}};

// Leibniz expansion over all six permutations.
double leibniz(const Mat3& M)
{
  double total = 0.0;
  for (const auto& p : all_permutations())
    total += sign(p) * M[0][p(1) - 1] * M[1][p(2) - 1] * M[2][p(3) - 1];
  return total;
}

} // namespace

TEST(Determinant, MatchesLeibnizExpansion)
{
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int t = 0; t < 100000; ++t) {
    Mat3 M;
    for (auto& row : M)
      for (double& v : row)
        v = U(rng);
    ASSERT_NEAR(det3(M), leibniz(M), 1e-12);
  }
}

TEST(Jacobian, ExactForAffineMaps)
{
  const auto f = [](const Vec3& x) { return kA * x + Vec3{1.0, -2.0, 0.5}; };
  const Mat3 J = jacobian_fd(f, {0.3, 0.1, -0.7});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      EXPECT_NEAR(J[i][j], kA[i][j], 1e-9);
}

TEST(Jacobian, NonlinearMap)
{
  const auto f = [](const Vec3& x) {
    return Vec3{std::sin(x[0]) * x[1], x[1] * x[2], std::exp(x[2])};
  };
  const Vec3 x{0.4, -0.2, 0.3};
  const Mat3 J = jacobian_fd(f, x);
  EXPECT_NEAR(J[0][0], std::cos(x[0]) * x[1], 1e-9);
  EXPECT_NEAR(J[0][1], std::sin(x[0]), 1e-9);
  EXPECT_NEAR(J[1][2], x[1], 1e-9);
  EXPECT_NEAR(J[2][2], std::exp(x[2]), 1e-9);
  EXPECT_NEAR(J[2][0], 0.0, 1e-12);
}

TEST(Expm, RotationClosedForm)
{
  const Mat3 W{{{0, -1, 0}, {1, 0, 0}, {0, 0, 0}}};
  const Mat3 E = expm3(W, 0.7);
  EXPECT_NEAR(E[0][0], std::cos(0.7), 1e-15);
  EXPECT_NEAR(E[0][1], -std::sin(0.7), 1e-15);
  EXPECT_NEAR(E[1][0], std::sin(0.7), 1e-15);
  EXPECT_NEAR(E[2][2], 1.0, 1e-15);
}

TEST(Expm, GroupPropertyAndUnitDeterminant)
{
  const Mat3 a = expm3(kA, 0.3), b = expm3(kA, 0.5), ab = expm3(kA, 0.8);
  const Mat3 prod = a * b;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      EXPECT_NEAR(prod[i][j], ab[i][j], 1e-14);
  EXPECT_NEAR(det3(ab), 1.0, 1e-14);
}

TEST(Reference, Rk4AgreesWithExponential)
{
  const Field3 f = make_linear_field(LinearField(kA));
  const Vec3 x0{0.5, -0.3, 0.8};
  Field3 nonaffine = f;
  nonaffine.affine.reset();
  const Vec3 a = reference_solution(f, x0, 1.0);
  const Vec3 b = reference_solution(nonaffine, x0, 1.0);
  EXPECT_LE(norm(a - b), 1e-10);
  EXPECT_LE(norm(a - expm3(kA, 1.0) * x0), 1e-15);
}

TEST(Reference, AffineOffsetUsesAugmentedExponential)
{
  // x' = c is solved by x0 + T c.
  Field3 f = make_linear_field(LinearField(Mat3{}));
  f.affine->c = {1.0, -2.0, 0.5};
  f.eval = [](const Vec3&) { return Vec3{1.0, -2.0, 0.5}; };
  const Vec3 r = reference_solution(f, {0.1, 0.2, 0.3}, 2.0);
  EXPECT_NEAR(r[0], 2.1, 1e-14);
  EXPECT_NEAR(r[1], -3.8, 1e-14);
  EXPECT_NEAR(r[2], 1.3, 1e-14);
}

TEST(Order, EulerAndRk4Slopes)
{
  const Field3 f = make_linear_field(LinearField(kA));
  const Vec3 x0{0.5, -0.3, 0.8};
  const std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
  const OrderReport e = observed_order("euler", f, x0, 1.0, hs);
  EXPECT_NEAR(e.slope, 1.0, 0.1);
  ASSERT_EQ(e.orders.size(), 3u);
  const OrderReport r = observed_order("rk4", f, x0, 1.0, hs);
  EXPECT_NEAR(r.slope, 4.0, 0.2);
}

TEST(Order, SlopeIsLeastSquaresFit)
{
  // Each step adds 3 h^2.
  OrderReport rep = observed_order(
      [](double h) {
        SchemeHandle s;
        s.h = h;
        s.direct = [h](const Vec3& x) { return x + Vec3{3.0 * h * h, 0.0, 0.0}; };
        return s;
      },
      {0.0, 0.0, 0.0}, 1.0, {0.5, 0.25, 0.125}, {0.0, 0.0, 0.0});
  // n = 1 / h steps of 3 h^2 give error 3 h.
  EXPECT_NEAR(rep.slope, 1.0, 1e-12);
  EXPECT_NEAR(rep.error[0], 1.5, 1e-15);
  const std::string table = order_table(rep);
  EXPECT_NE(table.find("h,error,order\n5.0000000000000000e-01,1.5000000000000000e+00,\n"), std::string::npos)
      << table;
  EXPECT_NE(table.find("slope: 1.0000000000000"), std::string::npos) << table;
}

TEST(Order, SingleLevelHasNoSlope)
{
  const Field3 f = make_linear_field(LinearField(kA));
  const OrderReport r = observed_order("euler", f, {0.5, -0.3, 0.8}, 1.0, {0.1});
  EXPECT_TRUE(std::isnan(r.slope));
  EXPECT_NE(order_table(r).find("slope: n/a"), std::string::npos);
}

TEST(Order, HorizonMustBeWholeSteps)
{
  EXPECT_EQ(steps_for(1.0, 0.025), 40);
  EXPECT_THROW(steps_for(1.0, 0.3), Error);
}

TEST(Audit, VolumePreservingAndNot)
{
  const Field3 abc = make_abc_field({1.0, 0.7, 0.43});
  const auto pts = sample_points(30, 3);
  const VolumeAudit good = volume_audit(make_scheme("se-se", abc, 0.01), pts);
  EXPECT_LE(good.max_defect, 1e-7);
  EXPECT_GT(good.fd_step, 0.0);
  const VolumeAudit bad = volume_audit(make_scheme("euler", abc, 0.1), pts);
  EXPECT_GT(bad.max_defect, 1e-4);
  EXPECT_LE(bad.mean_defect, bad.max_defect);
}

TEST(Audit, AffineSchemesUseExactMatrix)
{
  const Field3 f = make_linear_field(LinearField(kA));
  const VolumeAudit a = volume_audit(make_scheme("s1-quispel", f, 0.1), sample_points(5, 4));
  EXPECT_EQ(a.fd_step, 0.0);
  EXPECT_LE(a.max_defect, 1e-14);
}

TEST(Sampling, DeterministicFormula)
{
  const auto pts = sample_points(4, 42, 2.0);
  std::mt19937_64 rng(42);
  for (const Vec3& p : pts)
    for (double c : p)
      EXPECT_EQ(c, 2.0 * (2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0));
  EXPECT_EQ(sample_points(4, 42, 2.0), pts);
}

TEST(Format, SeventeenSignificantDigits)
{
  EXPECT_EQ(format_double(0.1), "1.0000000000000001e-01");
  EXPECT_EQ(format_double(-2.0), "-2.0000000000000000e+00");
}

TEST(Format, AuditCsv)
{
  VolumeAudit a;
  a.points = {{0.5, 0.0, -1.0}};
  a.defects = {1e-3};
  a.max_defect = a.mean_defect = 1e-3;
  EXPECT_EQ(audit_csv(a), "point,x1,x2,x3,defect\n0,5.0000000000000000e-01,0.0000000000000000e+00,"
                          "-1.0000000000000000e+00,1.0000000000000000e-03\n");
  EXPECT_EQ(audit_summary(a), "max_defect=1.0000000000000000e-03 mean_defect=1.0000000000000000e-03");
}
