#ifndef VOLFORM_GENMAP_HPP
#define VOLFORM_GENMAP_HPP

// Maps generated by a pair of potentials (phi, Phi) of the one-form
//   phi(Y3, y2, y3) dy3 + Phi(Y3, Y2, y3) dY3
// in slot coordinates y = x . sigma, Y = X . Sigma. The base map solves
//   (a) d2 phi(Y3, y2, y3) = y1                       for Y3
//   (b) d3 Phi(Y3, Y2, y3) + eps d1 phi(Y3, y2, y3) = 0 for Y2
//   (c) Y1 = d2 Phi(Y3, Y2, y3)
// and is volume preserving with eps = sign(sigma^-1 Sigma).

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"
#include "perm3.hpp"
#include "quadcalc.hpp"
#include "scalar_fn.hpp"

namespace volform {

struct SolverConfig
{
  double newton_tol = 1e-12;
  int max_iter = 50;
  bool bracket_fallback = true;
  double twist_floor = 1e-12;
};

struct GeneratingFormSpec
{
  ScalarFn phi;
  ScalarFn Phi;
  int eps = -1;
  Permutation sigma;
  Permutation Sigma;
};

/// X = M x + d.
struct AffineMap3
{
  Mat3 M = identity_matrix();
  Vec3 d{};

  Vec3 apply(const Vec3& x) const { return M * x + d; }
  Vec3 operator()(const Vec3& x) const { return apply(x); }
  double det() const { return det3(M); }
};

namespace detail {

struct ScalarEquation
{
  const char* name;
  std::function<double(double)> residual;
  std::function<double(double)> slope;
  double scale;
};

inline double bracket_solve(const ScalarEquation& eq, double t0, double width, int max_iter)
{
  double a = t0 - width, b = t0 + width;
  double fa = eq.residual(a), fb = eq.residual(b);
  int n = 0;
  while (!(std::isfinite(fa) && std::isfinite(fb) && fa * fb <= 0.0)) {
    if (++n > 60)
      throw Error(ErrorCode::NewtonDivergence,
                  std::string("no root bracketed for equation ") + eq.name);
    width *= 2.0;
    a = t0 - width;
    b = t0 + width;
    fa = eq.residual(a);
    fb = eq.residual(b);
  }
  for (int k = 0; k < 200 + max_iter; ++k) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b)
      break;
    const double fm = eq.residual(m);
    if (fm == 0.0)
      return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// Newton iteration from t0, followed by one polishing step once converged.
inline double newton_solve(const ScalarEquation& eq, double t0, const SolverConfig& cfg)
{
  const double eps = std::numeric_limits<double>::epsilon();
  const double d0 = eq.slope(t0);
  if (!(std::abs(d0) > cfg.twist_floor))
    throw Error(ErrorCode::TwistViolation,
                std::string("twist condition fails for equation ") + eq.name + " (slope " +
                    std::to_string(d0) + ")");
  double t = t0;
  double first_step = 0.0;
  for (int k = 0; k < cfg.max_iter; ++k) {
    const double r = eq.residual(t);
    const double d = eq.slope(t);
    if (!std::isfinite(r) || !std::isfinite(d) || !(std::abs(d) > cfg.twist_floor))
      break;
    const double delta = -r / d;
    if (k == 0)
      first_step = delta;
    const bool converged = std::abs(r) <= cfg.newton_tol * (1.0 + eq.scale);
    t += delta;
    if (converged || std::abs(delta) <= 4.0 * eps * (1.0 + std::abs(t)))
      return t;
  }
  if (!cfg.bracket_fallback)
    throw Error(ErrorCode::NewtonDivergence,
                std::string("Newton iteration diverged for equation ") + eq.name);
  const double width = std::max(1e-3 * (1.0 + std::abs(t0)), std::abs(first_step));
  double tb = bracket_solve(eq, t0, width, cfg.max_iter);
  for (int k = 0; k < 3; ++k) {
    const double d = eq.slope(tb);
    if (!(std::abs(d) > cfg.twist_floor))
      break;
    const double next = tb - eq.residual(tb) / d;
    if (!std::isfinite(next))
      break;
    tb = next;
  }
  const double r = eq.residual(tb);
  if (!(std::abs(r) <= std::max(cfg.newton_tol, 1e-9) * (1.0 + eq.scale)))
    throw Error(ErrorCode::NewtonDivergence,
                std::string("no convergence for equation ") + eq.name);
  return tb;
}

} // namespace detail

/// The base map in slot coordinates. Y0 is the initial guess for the two
/// implicit unknowns; without one, Y = y.
inline Vec3 base_step(const GeneratingFormSpec& spec, const Vec3& y, const SolverConfig& cfg = {},
                      std::optional<Vec3> Y0 = std::nullopt)
{
  const Vec3 guess = Y0 ? *Y0 : y;
  const ScalarFn& phi = spec.phi;
  const ScalarFn& Phi = spec.Phi;

  detail::ScalarEquation ea{
      "(a) d2 phi = y1",
      [&](double Y3) { return phi.grad({Y3, y[1], y[2]})[1] - y[0]; },
      [&](double Y3) { return second_partial(phi, {Y3, y[1], y[2]}, 1, 0); },
      std::abs(y[0])};
  const double Y3 = detail::newton_solve(ea, guess[2], cfg);

  const double dphi = phi.grad({Y3, y[1], y[2]})[0];
  const double e = static_cast<double>(spec.eps);
  detail::ScalarEquation eb{
      "(b) d3 Phi + eps d1 phi = 0",
      [&](double Y2) { return Phi.grad({Y3, Y2, y[2]})[2] + e * dphi; },
      [&](double Y2) { return second_partial(Phi, {Y3, Y2, y[2]}, 2, 1); },
      std::abs(dphi)};
  const double Y2 = detail::newton_solve(eb, guess[1], cfg);

  const double Y1 = Phi.grad({Y3, Y2, y[2]})[1];
  return {Y1, Y2, Y3};
}

/// The permuted map x -> X. X0 is an initial guess for X.
inline Vec3 permuted_step(const GeneratingFormSpec& spec, const Vec3& x, const SolverConfig& cfg = {},
                          std::optional<Vec3> X0 = std::nullopt)
{
  const Vec3 y = act_vec(x, spec.sigma);
  const Vec3 Y0 = act_vec(X0 ? *X0 : x, spec.Sigma);
  const Vec3 Y = base_step(spec, y, cfg, Y0);
  return act_vec(Y, inverse(spec.Sigma));
}

/// The generating data of the inverse map: old and new roles exchanged.
inline GeneratingFormSpec adjoint(const GeneratingFormSpec& spec)
{
  GeneratingFormSpec a;
  a.phi = reorder(spec.Phi, {2, 1, 0});
  a.Phi = reorder(spec.phi, {2, 1, 0});
  a.eps = spec.eps;
  a.sigma = spec.Sigma;
  a.Sigma = spec.sigma;
  return a;
}

struct TwistReport
{
  double phi_twist = 0.0;  // d2 d1 phi
  double Phi_twist = 0.0;  // d3 d2 Phi
  bool solved = false;     // false: evaluated at the initial guess
  double floor = 0.0;

  bool ok() const { return std::abs(phi_twist) > floor && std::abs(Phi_twist) > floor; }
};

/// Both twist derivatives along the step from x; never throws on solver failure.
inline TwistReport twist_report(const GeneratingFormSpec& spec, const Vec3& x,
                                const SolverConfig& cfg = {}, std::optional<Vec3> X0 = std::nullopt)
{
  const Vec3 y = act_vec(x, spec.sigma);
  Vec3 Y = act_vec(X0 ? *X0 : x, spec.Sigma);
  TwistReport rep;
  rep.floor = cfg.twist_floor;
  try {
    Y = base_step(spec, y, cfg, Y);
    rep.solved = true;
  } catch (const Error&) {
  }
  rep.phi_twist = second_partial(spec.phi, {Y[2], y[1], y[2]}, 1, 0);
  rep.Phi_twist = second_partial(spec.Phi, {Y[2], Y[1], y[2]}, 2, 1);
  return rep;
}

/// Closed form of the map when both potentials are exact quadratics.
inline AffineMap3 assemble_affine(const GeneratingFormSpec& spec)
{
  if (!spec.phi.quad || !spec.Phi.quad)
    throw Error(ErrorCode::InvalidConfig, "assemble_affine needs quadratic potentials");
  using S = Symbol;
  // Slot coordinates stand in for x (old) and X (new).
  const QuadForm phi = rename_args(*spec.phi.quad, {S::X3, S::x2, S::x3});
  const QuadForm Phi = rename_args(*spec.Phi.quad, {S::X3, S::X2, S::x3});
  const std::vector<AffineExpr> rels{
      partial(phi, S::x2) - AffineExpr::var(S::x1),
      partial(Phi, S::x3) + static_cast<double>(spec.eps) * partial(phi, S::X3),
      AffineExpr::var(S::X1) - partial(Phi, S::X2)};
  const std::array<Symbol, 3> inputs{S::x1, S::x2, S::x3};
  Mat3 B{};
  Vec3 c{};
  for (int i = 0; i < 3; ++i) {
    const AffineExpr Yi = express(rels, new_sym(i + 1), inputs);
    for (int j = 0; j < 3; ++j)
      B[i][j] = Yi.coeff(old_sym(j + 1));
    c[i] = Yi.constant;
  }
  const Mat3 P = action_matrix(inverse(spec.Sigma));
  AffineMap3 m;
  m.M = P * B * action_matrix(spec.sigma);
  m.d = P * c;
  return m;
}

} // namespace volform

#endif
