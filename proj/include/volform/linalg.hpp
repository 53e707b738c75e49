#ifndef VOLFORM_LINALG_HPP
#define VOLFORM_LINALG_HPP

#include <algorithm>
#include <array>
#include <cmath>

namespace volform {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double norm_inf(const Vec3& a)
{
  return std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2])});
}

inline Mat3 zero_matrix() { return Mat3{}; }

inline Mat3 identity_matrix()
{
  Mat3 m{};
  m[0][0] = m[1][1] = m[2][2] = 1.0;
  return m;
}

inline Vec3 operator*(const Mat3& m, const Vec3& v)
{
  return {dot(m[0], v), dot(m[1], v), dot(m[2], v)};
}

inline Mat3 operator*(const Mat3& a, const Mat3& b)
{
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Mat3 operator+(const Mat3& a, const Mat3& b)
{
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      c[i][j] = a[i][j] + b[i][j];
  return c;
}

inline Mat3 operator*(double s, const Mat3& a)
{
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      c[i][j] = s * a[i][j];
  return c;
}

inline Mat3 transpose(const Mat3& a)
{
  Mat3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      t[i][j] = a[j][i];
  return t;
}

inline double trace(const Mat3& a) { return a[0][0] + a[1][1] + a[2][2]; }

/// Max-abs entry norm.
inline double norm_max(const Mat3& a)
{
  double m = 0.0;
  for (const auto& row : a)
    for (double v : row)
      m = std::max(m, std::abs(v));
  return m;
}

/// Induced 1-norm (max column sum).
inline double norm_1(const Mat3& a)
{
  double m = 0.0;
  for (int j = 0; j < 3; ++j)
    m = std::max(m, std::abs(a[0][j]) + std::abs(a[1][j]) + std::abs(a[2][j]));
  return m;
}

/// Determinant by cofactor expansion along the first row.
inline double det3(const Mat3& m)
{
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
       - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
       + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline Mat3 inverse(const Mat3& m)
{
  const double d = det3(m);
  Mat3 r{};
  r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
  r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
  r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
  r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d;
  r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
  r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
  r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d;
  r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d;
  r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
  return r;
}

} // namespace volform

#endif
