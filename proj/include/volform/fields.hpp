#ifndef VOLFORM_FIELDS_HPP
#define VOLFORM_FIELDS_HPP

// Divergence-free vector fields on R^3 and their potential triples.
//
// A field is generated by potentials (F1, F2, F3) through
//   a1 = d2 F3 - d3 F2,  a2 = d3 F1 - d1 F3,  a3 = d1 F2 - d2 F1.
// Extraction fixes one potential to zero and builds the other two by line
// integrals from the origin.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "error.hpp"
#include "linalg.hpp"
#include "quadcalc.hpp"
#include "scalar_fn.hpp"

namespace volform {

struct PotentialTriple
{
  std::array<std::optional<ScalarFn>, 3> F;

  /// Potential F^i (1-based); absent potentials are zero.
  ScalarFn get(int i) const { return F[i - 1] ? *F[i - 1] : ScalarFn::zero(); }
  bool has(int i) const { return F[i - 1].has_value(); }
};

struct AffineData
{
  Mat3 A{};
  Vec3 c{};
};

struct Field3
{
  std::string name;
  std::function<Vec3(const Vec3&)> eval;
  std::function<Mat3(const Vec3&)> jac;
  std::optional<AffineData> affine;
  /// Closed-form potentials with F^missing = 0, when known.
  std::function<PotentialTriple(int missing)> potentials;

  Vec3 operator()(const Vec3& x) const { return eval(x); }
};

/// A linear field x' = A x with trace(A) = 0.
struct LinearField
{
  Mat3 A{};

  LinearField() = default;

  explicit LinearField(const Mat3& a) : A(a)
  {
    if (std::abs(trace(A)) > 1e-12 * (1.0 + norm_max(A)))
      throw Error(ErrorCode::InvalidConfig,
                  "linear field is not trace-free (trace " + std::to_string(trace(A)) + ")");
  }

  double a(int i, int j) const { return A[i - 1][j - 1]; }
};

inline Mat3 jacobian(const Field3& f, const Vec3& x)
{
  if (f.jac)
    return f.jac(x);
  Mat3 J{};
  for (int j = 0; j < 3; ++j) {
    const double h = fd_step(x[j]);
    Vec3 xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Vec3 fp = f.eval(xp), fm = f.eval(xm);
    for (int i = 0; i < 3; ++i)
      J[i][j] = (fp[i] - fm[i]) / (2.0 * h);
  }
  return J;
}

inline double divergence(const Field3& f, const Vec3& x) { return trace(jacobian(f, x)); }

/// Central-difference divergence regardless of an analytic Jacobian.
inline double divergence_fd(const Field3& f, const Vec3& x)
{
  double d = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double h = fd_step(x[j]);
    Vec3 xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    d += (f.eval(xp)[j] - f.eval(xm)[j]) / (2.0 * h);
  }
  return d;
}

// -- cyclic index helpers ---------------------------------------------------

namespace detail {

inline int next(int i) { return i % 3 + 1; }

// For the missing potential m, returns (j, k, i) = (m, m+1, m+2) cyclically:
// integration runs along x_j, F^k and F^i are built, F^j = 0.
inline std::array<int, 3> weyl_indices(int missing)
{
  if (missing < 1 || missing > 3)
    throw Error(ErrorCode::InvalidConfig, "missing potential index must be 1, 2 or 3");
  const int j = missing, k = next(j), i = next(k);
  return {j, k, i};
}

} // namespace detail

namespace detail {

inline Field3 curl_field(const PotentialTriple& p)
{
  const ScalarFn F1 = p.get(1), F2 = p.get(2), F3 = p.get(3);
  Field3 f;
  f.name = "potentials";
  f.eval = [F1, F2, F3](const Vec3& x) {
    const Vec3 g1 = F1.grad(x), g2 = F2.grad(x), g3 = F3.grad(x);
    return Vec3{g3[1] - g2[2], g1[2] - g3[0], g2[0] - g1[1]};
  };
  if (F1.hess && F2.hess && F3.hess)
    f.jac = [F1, F2, F3](const Vec3& x) {
      const Mat3 H1 = F1.hess(x), H2 = F2.hess(x), H3 = F3.hess(x);
      Mat3 J{};
      for (int m = 0; m < 3; ++m) {
        J[0][m] = H3[1][m] - H2[2][m];
        J[1][m] = H1[2][m] - H3[0][m];
        J[2][m] = H2[0][m] - H1[1][m];
      }
      return J;
    };
  if (F1.quad && F2.quad && F3.quad) {
    AffineData d;
    d.A = f.jac(Vec3{});
    d.c = f.eval(Vec3{});
    f.affine = d;
  }
  return f;
}

} // namespace detail

// -- Weyl construction for affine fields ------------------------------------

/// Exact quadratic potentials of the affine field A x + c with F^missing = 0.
inline PotentialTriple affine_potentials(const Mat3& A, const Vec3& c, int missing = 2)
{
  const auto [j, k, i] = detail::weyl_indices(missing);
  auto component = [&](int r) {
    AffineExpr e = AffineExpr::constant_expr(c[r - 1]);
    for (int l = 1; l <= 3; ++l)
      e += AffineExpr::var(old_sym(l), A[r - 1][l - 1]);
    return e;
  };
  const QuadForm Fk = antiderivative(component(i), old_sym(j));
  const QuadForm Fi = (-1.0) * antiderivative(component(k), old_sym(j)) +
                      antiderivative(substitute(component(j), old_sym(j), AffineExpr{}), old_sym(k));
  PotentialTriple p;
  p.F[k - 1] = ScalarFn::from_quad(Fk);
  p.F[i - 1] = ScalarFn::from_quad(Fi);
  return p;
}

inline PotentialTriple linear_potentials(const LinearField& L, int missing = 2)
{
  return affine_potentials(L.A, Vec3{}, missing);
}

inline Field3 make_linear_field(const LinearField& L)
{
  Field3 f;
  f.name = "linear";
  const Mat3 A = L.A;
  f.eval = [A](const Vec3& x) { return A * x; };
  f.jac = [A](const Vec3&) { return A; };
  f.affine = AffineData{A, Vec3{}};
  f.potentials = [A](int missing) { return affine_potentials(A, Vec3{}, missing); };
  return f;
}

// -- trigonometric potentials of the ABC flow --------------------------------

namespace detail {

// coef * trig(x_var) * x_poly, where trig is 1, sin or cos and poly 0 means 1.
struct TrigTerm
{
  enum Kind { One, Sin, Cos } kind;
  int var;
  int poly;
  double coef;
};

using TrigSum = std::vector<TrigTerm>;

// integral from 0 to x_j of a pure-trigonometric sum in x_j
inline TrigSum integrate_from_zero(const TrigSum& a, int j)
{
  TrigSum out;
  for (const auto& t : a) {
    if (t.poly != 0)
      throw Error(ErrorCode::InvalidConfig, "cannot integrate polynomial trig term");
    if (t.kind == TrigTerm::One || t.var != j) {
      out.push_back({t.kind, t.var, j, t.coef});
    } else if (t.kind == TrigTerm::Sin) {
      out.push_back({TrigTerm::One, 0, 0, t.coef});
      out.push_back({TrigTerm::Cos, j, 0, -t.coef});
    } else {
      out.push_back({TrigTerm::Sin, j, 0, t.coef});
    }
  }
  return out;
}

inline TrigSum set_zero(const TrigSum& a, int j)
{
  TrigSum out;
  for (const auto& t : a) {
    if (t.poly == j)
      continue;
    if (t.kind != TrigTerm::One && t.var == j) {
      if (t.kind == TrigTerm::Cos)
        out.push_back({TrigTerm::One, 0, t.poly, t.coef});
    } else {
      out.push_back(t);
    }
  }
  return out;
}

inline TrigSum negate(TrigSum a)
{
  for (auto& t : a)
    t.coef = -t.coef;
  return a;
}

inline ScalarFn to_scalar_fn(const TrigSum& terms)
{
  // f(x_var), f'(x_var), f''(x_var)
  auto parts = [](const TrigTerm& t, const Vec3& x) {
    if (t.kind == TrigTerm::One)
      return std::array<double, 3>{1.0, 0.0, 0.0};
    const double u = x[t.var - 1];
    if (t.kind == TrigTerm::Sin)
      return std::array<double, 3>{std::sin(u), std::cos(u), -std::sin(u)};
    return std::array<double, 3>{std::cos(u), -std::sin(u), -std::cos(u)};
  };
  ScalarFn f;
  f.value = [terms, parts](const Vec3& x) {
    double v = 0.0;
    for (const auto& t : terms)
      v += t.coef * parts(t, x)[0] * (t.poly ? x[t.poly - 1] : 1.0);
    return v;
  };
  f.grad = [terms, parts](const Vec3& x) {
    Vec3 g{};
    for (const auto& t : terms) {
      const auto p = parts(t, x);
      const double m = t.poly ? x[t.poly - 1] : 1.0;
      if (t.kind != TrigTerm::One)
        g[t.var - 1] += t.coef * p[1] * m;
      if (t.poly)
        g[t.poly - 1] += t.coef * p[0];
    }
    return g;
  };
  f.hess = [terms, parts](const Vec3& x) {
    Mat3 H{};
    for (const auto& t : terms) {
      const auto p = parts(t, x);
      const double m = t.poly ? x[t.poly - 1] : 1.0;
      if (t.kind != TrigTerm::One)
        H[t.var - 1][t.var - 1] += t.coef * p[2] * m;
      if (t.kind != TrigTerm::One && t.poly) {
        H[t.var - 1][t.poly - 1] += t.coef * p[1];
        H[t.poly - 1][t.var - 1] += t.coef * p[1];
      }
    }
    return H;
  };
  return f;
}

} // namespace detail

struct AbcParams
{
  double A = 1.0, B = 1.0, C = 1.0;
};

/// Closed-form potentials of the ABC flow, identical to the line-integral
/// construction of extract_potentials.
inline PotentialTriple abc_potentials(const AbcParams& p, int missing = 2)
{
  using detail::TrigTerm;
  using detail::TrigSum;
  const std::array<TrigSum, 3> a{
      TrigSum{{TrigTerm::Sin, 3, 0, p.A}, {TrigTerm::Cos, 2, 0, p.C}},
      TrigSum{{TrigTerm::Sin, 1, 0, p.B}, {TrigTerm::Cos, 3, 0, p.A}},
      TrigSum{{TrigTerm::Sin, 2, 0, p.C}, {TrigTerm::Cos, 1, 0, p.B}},
  };
  const auto [j, k, i] = detail::weyl_indices(missing);
  TrigSum Fk = detail::integrate_from_zero(a[i - 1], j);
  TrigSum Fi = detail::negate(detail::integrate_from_zero(a[k - 1], j));
  const TrigSum tail = detail::integrate_from_zero(detail::set_zero(a[j - 1], j), k);
  Fi.insert(Fi.end(), tail.begin(), tail.end());
  PotentialTriple out;
  out.F[k - 1] = detail::to_scalar_fn(Fk);
  out.F[i - 1] = detail::to_scalar_fn(Fi);
  return out;
}

/// a = (A sin x3 + C cos x2, B sin x1 + A cos x3, C sin x2 + B cos x1).
inline Field3 make_abc_field(const AbcParams& p)
{
  Field3 f;
  f.name = "abc";
  f.eval = [p](const Vec3& x) {
    return Vec3{p.A * std::sin(x[2]) + p.C * std::cos(x[1]),
                p.B * std::sin(x[0]) + p.A * std::cos(x[2]),
                p.C * std::sin(x[1]) + p.B * std::cos(x[0])};
  };
  f.jac = [p](const Vec3& x) {
    Mat3 J{};
    J[0][1] = -p.C * std::sin(x[1]);
    J[0][2] = p.A * std::cos(x[2]);
    J[1][0] = p.B * std::cos(x[0]);
    J[1][2] = -p.A * std::sin(x[2]);
    J[2][0] = -p.B * std::sin(x[0]);
    J[2][1] = p.C * std::cos(x[1]);
    return J;
  };
  if (p.A == 0.0 && p.B == 0.0 && p.C == 0.0) {
    f.affine = AffineData{};
    f.potentials = [](int missing) { return affine_potentials(Mat3{}, Vec3{}, missing); };
  } else {
    f.potentials = [p](int missing) { return abc_potentials(p, missing); };
  }
  return f;
}

/// Named test fields: "linear" takes 9 row-major matrix entries, "abc" takes A, B, C.
inline Field3 builtin(const std::string& name, std::span<const double> params)
{
  if (name == "linear") {
    if (params.size() != 9)
      throw Error(ErrorCode::InvalidConfig, "linear field needs 9 matrix entries");
    Mat3 A{};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        A[r][c] = params[3 * r + c];
    return make_linear_field(LinearField(A));
  }
  if (name == "abc") {
    if (params.size() != 3)
      throw Error(ErrorCode::InvalidConfig, "abc field needs A, B, C");
    return make_abc_field({params[0], params[1], params[2]});
  }
  throw Error(ErrorCode::UnknownField, "unknown field '" + name + "'");
}

// -- adaptive quadrature ----------------------------------------------------

/// Integral of f over [a, b] to absolute tolerance `tol` (adaptive G7-K15).
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10)
{
  if (a == b)
    return 0.0;
  auto fail = [&] {
    return Error(ErrorCode::QuadratureFailure, "quadrature did not converge on [" +
                                                   std::to_string(a) + ", " + std::to_string(b) + "]");
  };
  double err = 0.0, l1 = 0.0, value = 0.0;
  try {
    const double rel = std::max(tol / (1.0 + std::abs(b - a)), 1e-15);
    value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 40, rel, &err, &l1);
  } catch (const std::exception&) {
    throw fail();
  }
  if (!std::isfinite(value) || err > std::max(tol, 1e-14 * l1))
    throw fail();
  return value;
}

/// Potentials of a divergence-free field by line integrals from the origin,
/// with F^missing = 0 (default F2 = 0). Partials are integrated under the
/// integral sign, so every evaluation is a quadrature.
inline PotentialTriple extract_potentials(const Field3& field, int missing = 2, double tol = 1e-10)
{
  const auto [j, k, i] = detail::weyl_indices(missing);
  const int J = j - 1, K = k - 1, I = i - 1;

  // Integral from 0 to x_J of g(x with x_J = s).
  auto along = [tol](int axis, const Vec3& x, const std::function<double(const Vec3&)>& g) {
    return integrate([&](double s) { Vec3 y = x; y[axis] = s; return g(y); }, 0.0, x[axis], tol);
  };

  ScalarFn Fk;
  Fk.value = [=](const Vec3& x) {
    return along(J, x, [&](const Vec3& y) { return field.eval(y)[I]; });
  };
  Fk.grad = [=](const Vec3& x) {
    Vec3 g{};
    g[J] = field.eval(x)[I];
    for (int l : {K, I})
      g[l] = along(J, x, [&](const Vec3& y) { return jacobian(field, y)[I][l]; });
    return g;
  };

  ScalarFn Fi;
  Fi.value = [=](const Vec3& x) {
    Vec3 x0 = x;
    x0[J] = 0.0;
    return -along(J, x, [&](const Vec3& y) { return field.eval(y)[K]; }) +
           along(K, x0, [&](const Vec3& y) { return field.eval(y)[J]; });
  };
  Fi.grad = [=](const Vec3& x) {
    Vec3 x0 = x;
    x0[J] = 0.0;
    Vec3 g{};
    g[J] = -field.eval(x)[K];
    g[K] = -along(J, x, [&](const Vec3& y) { return jacobian(field, y)[K][K]; }) +
           field.eval(x0)[J];
    g[I] = -along(J, x, [&](const Vec3& y) { return jacobian(field, y)[K][I]; }) +
           along(K, x0, [&](const Vec3& y) { return jacobian(field, y)[J][I]; });
    return g;
  };

  PotentialTriple p;
  p.F[K] = std::move(Fk);
  p.F[I] = std::move(Fi);
  return p;
}

/// Potentials with F^missing = 0: closed form when the field provides them,
/// exact quadratics for affine fields, quadrature otherwise.
inline PotentialTriple potentials_for(const Field3& f, int missing)
{
  if (f.potentials)
    return f.potentials(missing);
  if (f.affine)
    return affine_potentials(f.affine->A, f.affine->c, missing);
  return extract_potentials(f, missing);
}

/// The field generated by p. Requests for a potential split that p already
/// has are answered with p itself.
inline Field3 field_from_potentials(const PotentialTriple& p)
{
  Field3 base = detail::curl_field(p);
  Field3 f = base;
  f.potentials = [p, base](int missing) {
    return p.has(missing) ? potentials_for(base, missing) : p;
  };
  return f;
}

} // namespace volform

#endif
