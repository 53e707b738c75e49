#ifndef VOLFORM_VERIFY_HPP
#define VOLFORM_VERIFY_HPP

// Jacobians, determinant audits, reference solutions and order estimates.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "error.hpp"
#include "fields.hpp"
#include "linalg.hpp"
#include "schemes.hpp"

namespace volform {

/// Fixed 17-significant-digit scientific format.
inline std::string format_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

/// Default central-difference step cbrt(eps) (1 + |x|).
inline double default_fd_step(const Vec3& x)
{
  return std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + norm(x));
}

inline Mat3 jacobian_fd(const std::function<Vec3(const Vec3&)>& f, const Vec3& x,
                        std::optional<double> eps = std::nullopt)
{
  const double h = eps ? *eps : default_fd_step(x);
  Mat3 J{};
  for (int j = 0; j < 3; ++j) {
    Vec3 xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Vec3 d = (1.0 / (2.0 * h)) * (f(xp) - f(xm));
    for (int i = 0; i < 3; ++i)
      J[i][j] = d[i];
  }
  return J;
}

/// exp(t A) by scaling and squaring with a Pade kernel.
inline Mat3 expm3(const Mat3& A, double t = 1.0)
{
  Eigen::Matrix3d M;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      M(i, j) = t * A[i][j];
  const Eigen::Matrix3d E = M.exp();
  Mat3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      out[i][j] = E(i, j);
  return out;
}

/// Classical RK4 with n steps over [0, T].
inline Vec3 rk4_fixed(const Field3& f, const Vec3& x0, double T, long n)
{
  const double h = T / static_cast<double>(n);
  Vec3 x = x0;
  for (long k = 0; k < n; ++k)
    x = rk4_step(f, h, x);
  return x;
}

/// RK4 endpoint, halving the step until two successive results agree to 1e-10.
inline Vec3 rk4_reference(const Field3& f, const Vec3& x0, double T, long n_steps = 1000)
{
  long n = std::max(1L, n_steps);
  Vec3 coarse = rk4_fixed(f, x0, T, n);
  for (int k = 0; k < 12; ++k) {
    n *= 2;
    const Vec3 fine = rk4_fixed(f, x0, T, n);
    if (norm(fine - coarse) < 1e-10)
      return fine;
    coarse = fine;
  }
  return coarse;
}

/// Exact flow for affine fields, RK4 otherwise.
inline Vec3 reference_solution(const Field3& f, const Vec3& x0, double T)
{
  if (f.affine) {
    const auto& A = f.affine->A;
    const auto& c = f.affine->c;
    if (c == Vec3{})
      return expm3(A, T) * x0;
    // Augmented 4x4 exponential for the affine flow.
    Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j)
        M(i, j) = T * A[i][j];
      M(i, 3) = T * c[i];
    }
    const Eigen::Matrix4d E = M.exp();
    Vec3 out{};
    for (int i = 0; i < 3; ++i)
      out[i] = E(i, 0) * x0[0] + E(i, 1) * x0[1] + E(i, 2) * x0[2] + E(i, 3);
    return out;
  }
  return rk4_reference(f, x0, T);
}

struct OrderReport
{
  std::vector<double> h;
  std::vector<double> error;
  /// orders[i] compares h[i] and h[i + 1].
  std::vector<double> orders;
  /// Least-squares slope of log(error) against log(h); NaN with one level.
  double slope = std::numeric_limits<double>::quiet_NaN();
};

inline long steps_for(double T, double h)
{
  const double n = std::round(T / h);
  if (n < 1.0 || std::abs(n * h - T) > 1e-9 * std::max(1.0, T))
    throw Error(ErrorCode::InvalidConfig, "horizon T = " + format_double(T) +
                                              " is not a whole number of steps h = " + format_double(h));
  return static_cast<long>(n);
}

/// Global errors at time T for the schemes built by make(h), against `reference`.
inline OrderReport observed_order(const std::function<SchemeHandle(double)>& make, const Vec3& x0,
                                  double T, const std::vector<double>& hs, const Vec3& reference)
{
  OrderReport rep;
  for (double h : hs) {
    const SchemeHandle s = make(h);
    const long n = steps_for(T, h);
    Vec3 x = x0;
    for (long k = 0; k < n; ++k)
      x = s.step(x);
    rep.h.push_back(h);
    rep.error.push_back(norm(x - reference));
  }
  for (std::size_t i = 0; i + 1 < rep.h.size(); ++i)
    rep.orders.push_back(std::log(rep.error[i] / rep.error[i + 1]) / std::log(rep.h[i] / rep.h[i + 1]));
  if (rep.h.size() >= 2) {
    double mx = 0, my = 0;
    const double n = static_cast<double>(rep.h.size());
    for (std::size_t i = 0; i < rep.h.size(); ++i) {
      mx += std::log(rep.h[i]) / n;
      my += std::log(rep.error[i]) / n;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < rep.h.size(); ++i) {
      const double dx = std::log(rep.h[i]) - mx;
      sxy += dx * (std::log(rep.error[i]) - my);
      sxx += dx * dx;
    }
    rep.slope = sxy / sxx;
  }
  return rep;
}

inline OrderReport observed_order(const std::string& scheme, const Field3& field, const Vec3& x0,
                                  double T, const std::vector<double>& hs, const SolverConfig& cfg = {})
{
  const Vec3 ref = reference_solution(field, x0, T);
  return observed_order([&](double h) { return make_scheme(scheme, field, h, cfg); }, x0, T, hs, ref);
}

/// Text table: "h error order" per level, then "slope: v".
inline std::string order_table(const OrderReport& rep)
{
  std::ostringstream os;
  os << "h,error,order\n";
  for (std::size_t i = 0; i < rep.h.size(); ++i) {
    os << format_double(rep.h[i]) << ',' << format_double(rep.error[i]) << ',';
    if (i > 0)
      os << format_double(rep.orders[i - 1]);
    os << '\n';
  }
  os << "slope: " << (std::isnan(rep.slope) ? std::string("n/a") : format_double(rep.slope)) << '\n';
  return os.str();
}

struct VolumeAudit
{
  std::vector<Vec3> points;
  std::vector<double> defects;
  double max_defect = 0.0;
  double mean_defect = 0.0;
  /// FD step at the first point; zero when audited through the exact matrix.
  double fd_step = 0.0;
};

inline double volume_defect(const SchemeHandle& s, const Vec3& x, std::optional<double> eps = std::nullopt)
{
  if (s.affine)
    return std::abs(s.affine->det() - 1.0);
  return std::abs(det3(jacobian_fd([&](const Vec3& y) { return s.step(y); }, x, eps)) - 1.0);
}

inline VolumeAudit volume_audit(const SchemeHandle& s, const std::vector<Vec3>& points,
                                std::optional<double> eps = std::nullopt)
{
  VolumeAudit a;
  a.points = points;
  if (!s.affine && !points.empty())
    a.fd_step = eps ? *eps : default_fd_step(points.front());
  for (const Vec3& x : points) {
    const double d = volume_defect(s, x, eps);
    a.defects.push_back(d);
    a.max_defect = std::max(a.max_defect, d);
    a.mean_defect += d;
  }
  if (!points.empty())
    a.mean_defect /= static_cast<double>(points.size());
  return a;
}

/// n points uniform in [-box, box]^3 from a 64-bit Mersenne Twister,
/// u = (r >> 11) * 2^-53 for each coordinate.
inline std::vector<Vec3> sample_points(std::size_t n, std::uint64_t seed, double box = 1.0)
{
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Vec3> pts(n);
  for (Vec3& p : pts)
    for (double& c : p)
      c = box * (2.0 * uniform() - 1.0);
  return pts;
}

/// CSV "point,x1,x2,x3,defect" followed by the summary line.
inline std::string audit_csv(const VolumeAudit& a)
{
  std::ostringstream os;
  os << "point,x1,x2,x3,defect\n";
  for (std::size_t i = 0; i < a.points.size(); ++i)
    os << i << ',' << format_double(a.points[i][0]) << ',' << format_double(a.points[i][1]) << ','
       << format_double(a.points[i][2]) << ',' << format_double(a.defects[i]) << '\n';
  return os.str();
}

inline std::string audit_summary(const VolumeAudit& a)
{
  return "max_defect=" + format_double(a.max_defect) + " mean_defect=" + format_double(a.mean_defect);
}

} // namespace volform

#endif
