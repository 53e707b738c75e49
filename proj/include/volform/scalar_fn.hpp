#ifndef VOLFORM_SCALAR_FN_HPP
#define VOLFORM_SCALAR_FN_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>

#include "linalg.hpp"
#include "quadcalc.hpp"

namespace volform {

/// Central-difference step cbrt(eps) * (1 + |x|).
inline double fd_step(double x)
{
  static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  return base * (1.0 + std::abs(x));
}

/// A scalar function of three arguments with first partials and, optionally,
/// second partials. `quad` is set when the function is an exact quadratic; it
/// is expressed over the symbols x1, x2, x3 standing for arguments 1, 2, 3.
struct ScalarFn
{
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> grad;
  std::function<Mat3(const Vec3&)> hess;
  std::optional<QuadForm> quad;

  static ScalarFn zero()
  {
    ScalarFn f;
    f.value = [](const Vec3&) { return 0.0; };
    f.grad = [](const Vec3&) { return Vec3{}; };
    f.hess = [](const Vec3&) { return Mat3{}; };
    f.quad = QuadForm{};
    return f;
  }

  /// Wraps a quadratic form over x1, x2, x3.
  static ScalarFn from_quad(const QuadForm& q)
  {
    for (Symbol s : {Symbol::X1, Symbol::X2, Symbol::X3})
      if (q.depends_on(s))
        throw Error(ErrorCode::InvalidConfig, "potential depends on new coordinate " + to_string(s));
    auto lift = [](const Vec3& x) { return Vec6{x[0], x[1], x[2], 0.0, 0.0, 0.0}; };
    ScalarFn f;
    f.value = [q, lift](const Vec3& x) { return q.eval(lift(x)); };
    f.grad = [q, lift](const Vec3& x) {
      const Vec6 s = lift(x);
      return Vec3{partial(q, Symbol::x1).eval(s), partial(q, Symbol::x2).eval(s),
                  partial(q, Symbol::x3).eval(s)};
    };
    Mat3 H{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        H[i][j] = q.Q()[i][j];
    f.hess = [H](const Vec3&) { return H; };
    f.quad = q;
    return f;
  }

  /// Wraps a quadratic form over six symbols, reading argument k as slots[k].
  static ScalarFn from_quad(const QuadForm& q, const std::array<Symbol, 3>& slots)
  {
    for (Symbol s : all_symbols)
      if (q.depends_on(s) && std::find(slots.begin(), slots.end(), s) == slots.end())
        throw Error(ErrorCode::InvalidConfig, "quadratic form depends on " + to_string(s) +
                                                  " which is not an argument slot");
    Mat6 Q{};
    Vec6 b{};
    for (int i = 0; i < 3; ++i) {
      b[i] = q.b()[idx(slots[i])];
      for (int j = 0; j < 3; ++j)
        Q[i][j] = q.Q()[idx(slots[i])][idx(slots[j])];
    }
    return from_quad(QuadForm(Q, b, q.c()));
  }
};

/// Second partials, analytic when available, else central differences of grad.
inline Mat3 hessian(const ScalarFn& f, const Vec3& x)
{
  if (f.hess)
    return f.hess(x);
  Mat3 H{};
  for (int j = 0; j < 3; ++j) {
    const double h = fd_step(x[j]);
    Vec3 xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Vec3 gp = f.grad(xp), gm = f.grad(xm);
    for (int i = 0; i < 3; ++i)
      H[i][j] = (gp[i] - gm[i]) / (2.0 * h);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      H[i][j] = H[j][i] = 0.5 * (H[i][j] + H[j][i]);
  return H;
}

/// Single mixed partial d^2 f / (d arg_i d arg_j), 0-based indices.
inline double second_partial(const ScalarFn& f, const Vec3& x, int i, int j)
{
  if (f.hess)
    return f.hess(x)[i][j];
  const double h = fd_step(x[j]);
  Vec3 xp = x, xm = x;
  xp[j] += h;
  xm[j] -= h;
  return (f.grad(xp)[i] - f.grad(xm)[i]) / (2.0 * h);
}

/// Renames argument symbol x_{m+1} of q to slots[m].
inline QuadForm rename_args(const QuadForm& q, const std::array<Symbol, 3>& slots)
{
  Mat6 Q{};
  Vec6 b{};
  for (int m = 0; m < 3; ++m) {
    b[idx(slots[m])] = q.b()[m];
    for (int n = 0; n < 3; ++n)
      Q[idx(slots[m])][idx(slots[n])] = q.Q()[m][n];
  }
  return QuadForm(Q, b, q.c());
}

/// g(u, v, w) = scale * f(args permuted): argument k of g feeds argument
/// order[k] of f (0-based).
inline ScalarFn reorder(const ScalarFn& f, std::array<int, 3> order, double scale = 1.0)
{
  auto to_f = [order](const Vec3& a) {
    Vec3 x{};
    for (int k = 0; k < 3; ++k)
      x[order[k]] = a[k];
    return x;
  };
  ScalarFn g;
  g.value = [f, to_f, scale](const Vec3& a) { return scale * f.value(to_f(a)); };
  g.grad = [f, to_f, order, scale](const Vec3& a) {
    const Vec3 gf = f.grad(to_f(a));
    return Vec3{scale * gf[order[0]], scale * gf[order[1]], scale * gf[order[2]]};
  };
  if (f.hess)
    g.hess = [f, to_f, order, scale](const Vec3& a) {
      const Mat3 H = f.hess(to_f(a));
      Mat3 G{};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          G[i][j] = scale * H[order[i]][order[j]];
      return G;
    };
  if (f.quad) {
    std::array<Symbol, 3> slots{};
    // Argument order[k] of f becomes argument k of g.
    for (int k = 0; k < 3; ++k)
      slots[order[k]] = old_sym(k + 1);
    g.quad = scale * rename_args(*f.quad, slots);
  }
  return g;
}

} // namespace volform

#endif
