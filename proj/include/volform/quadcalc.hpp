#ifndef VOLFORM_QUADCALC_HPP
#define VOLFORM_QUADCALC_HPP

// Exact calculus of affine and quadratic polynomials over the six symbols
// (x1, x2, x3, X1, X2, X3): old coordinates followed by new coordinates.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "perm3.hpp"

namespace volform {

enum class Symbol : int { x1 = 1, x2, x3, X1, X2, X3 };

inline constexpr std::array<Symbol, 6> all_symbols{Symbol::x1, Symbol::x2, Symbol::x3,
                                                   Symbol::X1, Symbol::X2, Symbol::X3};

inline constexpr int idx(Symbol s) { return static_cast<int>(s) - 1; }

/// Old coordinate x_i (i in 1..3).
inline constexpr Symbol old_sym(int i) { return static_cast<Symbol>(i); }
/// New coordinate X_i (i in 1..3).
inline constexpr Symbol new_sym(int i) { return static_cast<Symbol>(i + 3); }

inline std::string to_string(Symbol s)
{
  static const char* names[] = {"x1", "x2", "x3", "X1", "X2", "X3"};
  return names[idx(s)];
}

using Vec6 = std::array<double, 6>;
using Mat6 = std::array<std::array<double, 6>, 6>;

struct AffineExpr
{
  Vec6 coeffs{};
  double constant = 0.0;

  static AffineExpr var(Symbol s, double scale = 1.0)
  {
    AffineExpr e;
    e.coeffs[idx(s)] = scale;
    return e;
  }

  static AffineExpr constant_expr(double c)
  {
    AffineExpr e;
    e.constant = c;
    return e;
  }

  double coeff(Symbol s) const { return coeffs[idx(s)]; }
  bool depends_on(Symbol s) const { return coeffs[idx(s)] != 0.0; }

  double max_abs_coeff() const
  {
    double m = 0.0;
    for (double c : coeffs)
      m = std::max(m, std::abs(c));
    return m;
  }

  double eval(const Vec6& s) const
  {
    double v = constant;
    for (int i = 0; i < 6; ++i)
      v += coeffs[i] * s[i];
    return v;
  }

  AffineExpr& operator+=(const AffineExpr& o)
  {
    for (int i = 0; i < 6; ++i)
      coeffs[i] += o.coeffs[i];
    constant += o.constant;
    return *this;
  }
  AffineExpr& operator-=(const AffineExpr& o) { return *this += (-1.0) * o; }

  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
  friend AffineExpr operator+(AffineExpr a, double c) { a.constant += c; return a; }
  friend AffineExpr operator-(AffineExpr a, double c) { a.constant -= c; return a; }
  friend AffineExpr operator*(double s, AffineExpr a)
  {
    for (double& c : a.coeffs)
      c *= s;
    a.constant *= s;
    return a;
  }
  friend AffineExpr operator/(AffineExpr a, double s) { return (1.0 / s) * a; }
};

/// q(s) = 1/2 s^T Q s + b^T s + c with Q symmetric.
class QuadForm
{
public:
  QuadForm() = default;

  QuadForm(const Mat6& Q, const Vec6& b, double c) : _Q(Q), _b(b), _c(c) { symmetrize(); }

  explicit QuadForm(const AffineExpr& e) : _b(e.coeffs), _c(e.constant) {}

  static QuadForm constant_form(double c) { return QuadForm(Mat6{}, Vec6{}, c); }

  const Mat6& Q() const { return _Q; }
  const Vec6& b() const { return _b; }
  double c() const { return _c; }

  double second(Symbol a, Symbol b) const { return _Q[idx(a)][idx(b)]; }

  bool depends_on(Symbol s) const
  {
    const int k = idx(s);
    if (_b[k] != 0.0)
      return true;
    for (int j = 0; j < 6; ++j)
      if (_Q[k][j] != 0.0)
        return true;
    return false;
  }

  double eval(const Vec6& s) const
  {
    double v = _c;
    for (int i = 0; i < 6; ++i) {
      double row = 0.0;
      for (int j = 0; j < 6; ++j)
        row += _Q[i][j] * s[j];
      v += s[i] * (0.5 * row + _b[i]);
    }
    return v;
  }

  QuadForm& operator+=(const QuadForm& o)
  {
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j)
        _Q[i][j] += o._Q[i][j];
      _b[i] += o._b[i];
    }
    _c += o._c;
    return *this;
  }
  QuadForm& operator-=(const QuadForm& o) { return *this += (-1.0) * o; }

  friend QuadForm operator+(QuadForm a, const QuadForm& b) { return a += b; }
  friend QuadForm operator-(QuadForm a, const QuadForm& b) { return a -= b; }
  friend QuadForm operator*(double s, QuadForm a)
  {
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j)
        a._Q[i][j] *= s;
      a._b[i] *= s;
    }
    a._c *= s;
    return a;
  }

  /// 21 upper-triangle entries of Q (row-major), 6 linear, 1 constant.
  std::vector<double> to_flat() const
  {
    std::vector<double> out;
    out.reserve(28);
    for (int i = 0; i < 6; ++i)
      for (int j = i; j < 6; ++j)
        out.push_back(_Q[i][j]);
    out.insert(out.end(), _b.begin(), _b.end());
    out.push_back(_c);
    return out;
  }

  static QuadForm from_flat(std::span<const double> v)
  {
    if (v.size() != 28)
      throw Error(ErrorCode::InvalidConfig,
                  "quadratic form needs 28 coefficients, got " + std::to_string(v.size()));
    Mat6 Q{};
    std::size_t n = 0;
    for (int i = 0; i < 6; ++i)
      for (int j = i; j < 6; ++j)
        Q[i][j] = Q[j][i] = v[n++];
    Vec6 b{};
    for (int i = 0; i < 6; ++i)
      b[i] = v[n++];
    return QuadForm(Q, b, v[n]);
  }

private:
  void symmetrize()
  {
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j)
        _Q[i][j] = _Q[j][i] = 0.5 * (_Q[i][j] + _Q[j][i]);
  }

  Mat6 _Q{};
  Vec6 _b{};
  double _c = 0.0;
};

/// e1 * e2 as a quadratic form.
inline QuadForm product(const AffineExpr& e1, const AffineExpr& e2)
{
  Mat6 Q{};
  Vec6 b{};
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j)
      Q[i][j] = e1.coeffs[i] * e2.coeffs[j] + e2.coeffs[i] * e1.coeffs[j];
    b[i] = e1.constant * e2.coeffs[i] + e2.constant * e1.coeffs[i];
  }
  return QuadForm(Q, b, e1.constant * e2.constant);
}

inline AffineExpr partial(const QuadForm& q, Symbol s)
{
  AffineExpr e;
  e.coeffs = q.Q()[idx(s)];
  e.constant = q.b()[idx(s)];
  return e;
}

/// Replaces every occurrence of `s` in q by e. e must not reference s.
inline QuadForm substitute(const QuadForm& q, Symbol s, const AffineExpr& e)
{
  if (e.depends_on(s))
    throw Error(ErrorCode::SelfReference, "substitution for " + to_string(s) + " references itself");
  const int k = idx(s);
  // s_new = L s + l, where L is the identity with row k replaced by e.
  Mat6 L{};
  for (int i = 0; i < 6; ++i)
    L[i][i] = 1.0;
  L[k] = e.coeffs;
  Vec6 l{};
  l[k] = e.constant;

  const Mat6& Q = q.Q();
  const Vec6& b = q.b();
  Mat6 QL{};
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      for (int m = 0; m < 6; ++m)
        QL[i][j] += Q[i][m] * L[m][j];
  Mat6 Qn{};
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      for (int m = 0; m < 6; ++m)
        Qn[i][j] += L[m][i] * QL[m][j];
  Vec6 Ql{};
  for (int i = 0; i < 6; ++i)
    for (int m = 0; m < 6; ++m)
      Ql[i] += Q[i][m] * l[m];
  Vec6 bn{};
  for (int j = 0; j < 6; ++j)
    for (int m = 0; m < 6; ++m)
      bn[j] += L[m][j] * (Ql[m] + b[m]);
  double cn = q.c();
  for (int m = 0; m < 6; ++m)
    cn += l[m] * (0.5 * Ql[m] + b[m]);
  return QuadForm(Qn, bn, cn);
}

inline AffineExpr substitute(const AffineExpr& a, Symbol s, const AffineExpr& e)
{
  if (e.depends_on(s))
    throw Error(ErrorCode::SelfReference, "substitution for " + to_string(s) + " references itself");
  const double c = a.coeff(s);
  AffineExpr out = a;
  out.coeffs[idx(s)] = 0.0;
  return out + c * e;
}

/// Default relative degeneracy threshold of solve_linear.
inline constexpr double default_degeneracy = 1e-10;

/// The affine expression for `s` that makes e vanish.
inline AffineExpr solve_linear(const AffineExpr& e, Symbol s, double rel_threshold = default_degeneracy)
{
  const double a = e.coeff(s);
  const double scale = e.max_abs_coeff();
  if (!(std::abs(a) > rel_threshold * scale) || scale == 0.0)
    throw Error(ErrorCode::DegenerateCoefficient,
                "coefficient of " + to_string(s) + " vanishes (" + std::to_string(a) + ")");
  AffineExpr rest = e;
  rest.coeffs[idx(s)] = 0.0;
  return (-1.0 / a) * rest;
}

/// A quadratic form whose partial in `s` is e; the integration constant is zero.
inline QuadForm antiderivative(const AffineExpr& e, Symbol s)
{
  const int k = idx(s);
  Mat6 Q{};
  for (int j = 0; j < 6; ++j) {
    Q[k][j] += e.coeffs[j];
    if (j != k)
      Q[j][k] += e.coeffs[j];
  }
  Vec6 b{};
  b[k] = e.constant;
  return QuadForm(Q, b, 0.0);
}

/// Expresses `target` as an affine function of `inputs` by eliminating the
/// remaining symbols from a set of affine relations (each relation == 0).
/// Pivots on the largest available coefficient.
inline AffineExpr express(std::vector<AffineExpr> relations, Symbol target,
                          std::span<const Symbol> inputs,
                          double rel_threshold = default_degeneracy)
{
  auto is_input = [&](Symbol s) { return std::find(inputs.begin(), inputs.end(), s) != inputs.end(); };
  std::vector<Symbol> eliminate;
  for (Symbol s : all_symbols)
    if (s != target && !is_input(s))
      eliminate.push_back(s);

  for (Symbol s : eliminate) {
    bool present = false;
    for (const auto& r : relations)
      present = present || r.depends_on(s);
    if (!present)
      continue;
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t i = 0; i < relations.size(); ++i) {
      const double rel = std::abs(relations[i].coeff(s)) /
                         std::max(1e-300, relations[i].max_abs_coeff());
      if (relations[i].depends_on(s) && rel > best_mag) {
        best_mag = rel;
        best = i;
      }
    }
    const AffineExpr value = solve_linear(relations[best], s, rel_threshold);
    relations.erase(relations.begin() + static_cast<std::ptrdiff_t>(best));
    for (auto& r : relations)
      r = substitute(r, s, value);
  }

  for (const auto& r : relations)
    if (r.depends_on(target))
      return solve_linear(r, target, rel_threshold);
  throw Error(ErrorCode::DegenerateCoefficient, "no relation determines " + to_string(target));
}

/// Simultaneous relabeling x_i -> x_{p(i)}, X_i -> X_{p(i)}.
inline Symbol relabel(Symbol s, const Permutation& p)
{
  const int i = idx(s);
  return i < 3 ? old_sym(p(i + 1)) : new_sym(p(i - 2));
}

inline AffineExpr relabel(const AffineExpr& e, const Permutation& p)
{
  AffineExpr out;
  out.constant = e.constant;
  for (Symbol s : all_symbols)
    out.coeffs[idx(relabel(s, p))] = e.coeff(s);
  return out;
}

inline QuadForm relabel(const QuadForm& q, const Permutation& p)
{
  Mat6 Q{};
  Vec6 b{};
  for (Symbol s : all_symbols) {
    b[idx(relabel(s, p))] = q.b()[idx(s)];
    for (Symbol t : all_symbols)
      Q[idx(relabel(s, p))][idx(relabel(t, p))] = q.second(s, t);
  }
  return QuadForm(Q, b, q.c());
}

} // namespace volform

#endif
