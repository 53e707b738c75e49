#ifndef VOLFORM_SCHEMES_HPP
#define VOLFORM_SCHEMES_HPP

// Integrator factories for the five classes of generating one-forms.
//
// Every factory works with slot potentials: phi takes (Y3, y2, y3) and Phi
// takes (Y3, Y2, y3) where y = x . sigma and Y = X . Sigma (see genmap.hpp).

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "fields.hpp"
#include "genmap.hpp"
#include "linalg.hpp"
#include "perm3.hpp"
#include "quadcalc.hpp"
#include "scalar_fn.hpp"

namespace volform {

// -- scalar function helpers --------------------------------------------------

namespace detail {

inline ScalarFn sum(const ScalarFn& a, const ScalarFn& b)
{
  ScalarFn f;
  f.value = [a, b](const Vec3& x) { return a.value(x) + b.value(x); };
  f.grad = [a, b](const Vec3& x) { return a.grad(x) + b.grad(x); };
  if (a.hess && b.hess)
    f.hess = [a, b](const Vec3& x) { return a.hess(x) + b.hess(x); };
  if (a.quad && b.quad)
    f.quad = *a.quad + *b.quad;
  return f;
}

// c * arg_i * arg_j (0-based).
inline ScalarFn monomial(int i, int j, double c = 1.0)
{
  return ScalarFn::from_quad(c * product(AffineExpr::var(old_sym(i + 1)), AffineExpr::var(old_sym(j + 1))));
}

inline bool is_zero(const ScalarFn& f)
{
  if (!f.quad)
    return false;
  for (Symbol s : all_symbols) {
    if (f.quad->b()[idx(s)] != 0.0)
      return false;
    for (Symbol t : all_symbols)
      if (f.quad->second(s, t) != 0.0)
        return false;
  }
  return true;
}

inline void require_step(double h)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw Error(ErrorCode::InvalidConfig, "step size must be positive, got " + std::to_string(h));
}

} // namespace detail

// -- discrete Lagrangians -----------------------------------------------------

struct LegendreConfig
{
  double seed = 0.0;
  double tol = 1e-13;
  int max_iter = 50;
  double degeneracy = 1e-8;
};

/// Solves dF/dp(param, q, p) = v for p. F takes (param, q, p).
inline double legendre(const ScalarFn& F, double param, double q, double v,
                       const LegendreConfig& cfg = {})
{
  auto degenerate = [&](double Fpp, double p) {
    return Error(ErrorCode::LegendreFailure,
                 "Legendre transform degenerate (d2F/dp2 = " + std::to_string(Fpp) + " at p = " +
                     std::to_string(p) + ")");
  };
  if (F.quad) {
    const QuadForm& Q = *F.quad;
    const double Fpp = Q.second(Symbol::x3, Symbol::x3);
    if (!(std::abs(Fpp) > cfg.degeneracy))
      throw degenerate(Fpp, cfg.seed);
    const double rest = Q.second(Symbol::x3, Symbol::x1) * param +
                        Q.second(Symbol::x3, Symbol::x2) * q + Q.b()[idx(Symbol::x3)];
    return (v - rest) / Fpp;
  }
  const double eps = std::numeric_limits<double>::epsilon();
  double p = cfg.seed;
  for (int k = 0; k < cfg.max_iter; ++k) {
    const double r = F.grad({param, q, p})[2] - v;
    const double Fpp = second_partial(F, {param, q, p}, 2, 2);
    if (!(std::abs(Fpp) > cfg.degeneracy))
      throw degenerate(Fpp, p);
    const double delta = -r / Fpp;
    const bool converged = std::abs(r) <= cfg.tol * (1.0 + std::abs(v));
    p += delta;
    if (!std::isfinite(p))
      break;
    if (converged || std::abs(delta) <= 4.0 * eps * (1.0 + std::abs(p)))
      return p;
  }
  throw Error(ErrorCode::LegendreFailure,
              "Legendre transform did not converge for v = " + std::to_string(v));
}

/// L_d(param, q, Q) = h (p v - F(param, q, p)) with v = (Q - q)/h and p the
/// Legendre momentum, dF/dp = v. Then dL/dQ = p, dL/dq = -p - h dF/dq.
struct DiscreteLagrangian
{
  ScalarFn F;
  double h = 0.0;
  LegendreConfig legendre_cfg;

  double momentum(double param, double q, double Q) const
  {
    return legendre(F, param, q, (Q - q) / h, legendre_cfg);
  }

  ScalarFn Ld() const
  {
    if (F.quad)
      return quadratic();
    const DiscreteLagrangian self = *this;
    ScalarFn L;
    L.value = [self](const Vec3& s) {
      const double p = self.momentum(s[0], s[1], s[2]);
      const double v = (s[2] - s[1]) / self.h;
      return self.h * (p * v - self.F.value({s[0], s[1], p}));
    };
    L.grad = [self](const Vec3& s) {
      const double p = self.momentum(s[0], s[1], s[2]);
      const Vec3 g = self.F.grad({s[0], s[1], p});
      return Vec3{-self.h * g[0], -p - self.h * g[1], p};
    };
    L.hess = [self](const Vec3& s) {
      const double h = self.h;
      const double p = self.momentum(s[0], s[1], s[2]);
      const Mat3 H = hessian(self.F, {s[0], s[1], p});
      const double Hpp = H[2][2];
      const double dQ = (1.0 / h) / Hpp;
      const double dq = -(1.0 / h) / Hpp - H[2][1] / Hpp;
      const double da = -H[2][0] / Hpp;
      Mat3 out{};
      out[2][2] = dQ;
      out[2][1] = out[1][2] = dq;
      out[2][0] = out[0][2] = da;
      out[1][1] = -dq - h * (H[1][1] + H[1][2] * dq);
      out[1][0] = out[0][1] = -da - h * (H[1][0] + H[1][2] * da);
      out[0][0] = -h * (H[0][0] + H[0][2] * da);
      return out;
    };
    return L;
  }

private:
  // Closed form for quadratic F, over arguments (param, q, Q).
  ScalarFn quadratic() const
  {
    using S = Symbol;
    const QuadForm& H = *F.quad;
    const double Fpp = H.second(S::x3, S::x3);
    if (!(std::abs(Fpp) > legendre_cfg.degeneracy))
      throw Error(ErrorCode::LegendreFailure,
                  "Legendre transform degenerate (d2F/dp2 = " + std::to_string(Fpp) + ")");
    // param -> x1, q -> x2, p -> x3, Q -> X2.
    const AffineExpr v = (AffineExpr::var(S::X2) - AffineExpr::var(S::x2)) / h;
    const AffineExpr p = solve_linear(partial(H, S::x3) - v, S::x3);
    const QuadForm L = h * product(p, v) - h * substitute(H, S::x3, p);
    return ScalarFn::from_quad(L, {S::x1, S::x2, S::X2});
  }
};

// -- scheme handles -----------------------------------------------------------

struct SchemeHandle
{
  std::string name;
  std::string label;
  double h = 0.0;
  Field3 field;
  SolverConfig cfg;
  /// Closed form of the step, when the step is affine.
  std::optional<AffineMap3> affine;
  /// Generating data for a step from x, given the predicted image X0.
  std::function<GeneratingFormSpec(const Vec3& x, const Vec3& X0)> spec_at;
  /// Initial guess for the image of x.
  std::function<Vec3(const Vec3&)> predict;
  /// Explicit step, for schemes that are not generated by a one-form.
  std::function<Vec3(const Vec3&)> direct;

  Vec3 step(const Vec3& x) const
  {
    if (affine)
      return affine->apply(x);
    if (spec_at)
      return engine_step(x);
    return direct(x);
  }

  /// The step through the generating-form solver, even when a closed form exists.
  Vec3 engine_step(const Vec3& x) const
  {
    if (!spec_at)
      return affine ? affine->apply(x) : direct(x);
    const Vec3 X0 = guess(x);
    return permuted_step(spec_at(x, X0), x, cfg, X0);
  }

  /// The inverse step, through the adjoint generating data.
  Vec3 adjoint_step(const Vec3& X) const
  {
    if (!spec_at) {
      if (!affine)
        throw Error(ErrorCode::InvalidConfig, "scheme " + name + " has no inverse");
      return inverse(affine->M) * (X - affine->d);
    }
    // Backward Euler guess, sharpened by defect correction through the forward step.
    Vec3 x0 = X - h * field(X);
    for (int k = 0; k < 3; ++k) {
      try {
        x0 = x0 - (step(x0) - X);
      } catch (const Error&) {
        break;
      }
    }
    return permuted_step(adjoint(spec_at(x0, X)), X, cfg, x0);
  }

  bool has_spec() const { return static_cast<bool>(spec_at); }

  GeneratingFormSpec spec(const Vec3& x) const { return spec_at(x, guess(x)); }

  Vec3 guess(const Vec3& x) const { return predict ? predict(x) : x + h * field(x); }
};

namespace detail {

inline SchemeHandle identity_handle(std::string name, std::string label, double h, Field3 field)
{
  SchemeHandle s;
  s.name = std::move(name);
  s.label = std::move(label);
  s.h = h;
  s.field = std::move(field);
  s.affine = AffineMap3{};
  return s;
}

inline Field3 field_of(const ScalarFn& F1, const ScalarFn& F2, const ScalarFn& F3)
{
  PotentialTriple p;
  p.F = {F1, F2, F3};
  return field_from_potentials(p);
}

} // namespace detail

/// SE+SE: phi = x2 X3 + h F1(x1, x2, X3), Phi = x1 X2 + h F3(x1, X2, X3),
/// with F2 = 0.
inline GeneratingFormSpec se_se_spec(const ScalarFn& F1, const ScalarFn& F3, double h)
{
  GeneratingFormSpec s;
  s.sigma = {3, 2, 1};
  s.Sigma = {1, 2, 3};
  s.eps = -1;
  // slots: phi (X3, x2, x1), Phi (X3, X2, x1)
  s.phi = detail::sum(detail::monomial(1, 0), reorder(F1, {2, 1, 0}, h));
  s.Phi = detail::sum(detail::monomial(2, 1), reorder(F3, {2, 1, 0}, h));
  return s;
}

inline SchemeHandle make_se_se(const ScalarFn& F1, const ScalarFn& F3, double h,
                               const SolverConfig& cfg = {})
{
  detail::require_step(h);
  SchemeHandle s;
  s.name = "se-se";
  s.label = "SE+SE";
  s.h = h;
  s.cfg = cfg;
  s.field = detail::field_of(F1, ScalarFn::zero(), F3);
  const GeneratingFormSpec spec = se_se_spec(F1, F3, h);
  s.spec_at = [spec](const Vec3&, const Vec3&) { return spec; };
  if (spec.phi.quad && spec.Phi.quad)
    s.affine = assemble_affine(spec);
  return s;
}

namespace detail {

// Momentum of the first discrete Lagrangian at the start of a step:
// x3 = p + h dF1/dx2(x1, x2, p), solved by Newton from p = x3.
inline double dl_start_momentum(const ScalarFn& F1, double h, const Vec3& x)
{
  const double eps = std::numeric_limits<double>::epsilon();
  double p = x[2];
  for (int k = 0; k < 60; ++k) {
    const double r = p + h * F1.grad({x[0], x[1], p})[1] - x[2];
    const double d = 1.0 + h * second_partial(F1, {x[0], x[1], p}, 1, 2);
    const double delta = -r / d;
    p += delta;
    if (!std::isfinite(p) || std::abs(delta) <= 4.0 * eps * (1.0 + std::abs(p)))
      break;
  }
  return p;
}

inline Vec3 dl_predict(const ScalarFn& F1, const Field3& field, double h, const Vec3& x)
{
  Vec3 X = x + h * field(x);
  const double p = dl_start_momentum(F1, h, x);
  X[1] = x[1] + h * F1.grad({x[0], x[1], p})[2];
  return X;
}

// phi(X2, x2, x1) = -L_d1(x1, x2, X2), with Hamiltonian F1(x1, x2, p).
inline ScalarFn dl1_phi(const ScalarFn& F1, double h, double seed)
{
  DiscreteLagrangian L{F1, h, {}};
  L.legendre_cfg.seed = seed;
  return reorder(L.Ld(), {2, 1, 0}, -1.0);
}

} // namespace detail

/// DL+SE: phi = -L_d1(x1, x2, X2) built from F1, Phi = -x1 X3 + h F2(x1, X2, X3),
/// with F3 = 0.
inline SchemeHandle make_dl_se(const ScalarFn& F1, const ScalarFn& F2, double h,
                               const SolverConfig& cfg = {})
{
  detail::require_step(h);
  Field3 field = detail::field_of(F1, F2, ScalarFn::zero());
  if (detail::is_zero(F1) && detail::is_zero(F2))
    return detail::identity_handle("dl-se", "DL+SE", h, field);
  SchemeHandle s;
  s.name = "dl-se";
  s.label = "DL+SE";
  s.h = h;
  s.cfg = cfg;
  s.field = field;
  // slots: phi (X2, x2, x1), Phi (X2, X3, x1); in slots Phi = x1 X3 - h F2.
  const ScalarFn Phi = detail::sum(detail::monomial(2, 1), reorder(F2, {1, 2, 0}, -h));
  auto make = [F1, Phi, h](double seed) {
    GeneratingFormSpec g;
    g.sigma = {3, 2, 1};
    g.Sigma = {1, 3, 2};
    g.eps = 1;
    g.phi = detail::dl1_phi(F1, h, seed);
    g.Phi = Phi;
    return g;
  };
  if (F1.quad && F2.quad) {
    const GeneratingFormSpec spec = make(0.0);
    s.spec_at = [spec](const Vec3&, const Vec3&) { return spec; };
    s.affine = assemble_affine(spec);
    return s;
  }
  s.predict = [F1, field, h](const Vec3& x) { return detail::dl_predict(F1, field, h, x); };
  s.spec_at = [F1, h, make](const Vec3& x, const Vec3&) {
    return make(detail::dl_start_momentum(F1, h, x));
  };
  return s;
}

/// DL+DL: phi as in DL+SE, Phi = L_d2(X2, x1, X1) built from the Hamiltonian
/// H2(a, q, p) = -F2(q, a, p), with F3 = 0.
inline SchemeHandle make_dl_dl(const ScalarFn& F1, const ScalarFn& F2, double h,
                               const SolverConfig& cfg = {})
{
  detail::require_step(h);
  Field3 field = detail::field_of(F1, F2, ScalarFn::zero());
  if (detail::is_zero(F1) && detail::is_zero(F2))
    return detail::identity_handle("dl-dl", "DL+DL", h, field);
  SchemeHandle s;
  s.name = "dl-dl";
  s.label = "DL+DL";
  s.h = h;
  s.cfg = cfg;
  s.field = field;
  const ScalarFn H2 = reorder(F2, {1, 0, 2}, -1.0);
  auto make = [F1, H2, h](double seed1, double seed2) {
    GeneratingFormSpec g;
    g.sigma = {3, 2, 1};
    g.Sigma = {3, 1, 2};
    g.eps = -1;
    g.phi = detail::dl1_phi(F1, h, seed1);
    DiscreteLagrangian L2{H2, h, {}};
    L2.legendre_cfg.seed = seed2;
    // slots: Phi (X2, X1, x1) = L_d2(param X2, q x1, Q X1)
    g.Phi = reorder(L2.Ld(), {0, 2, 1});
    return g;
  };
  if (F1.quad && F2.quad) {
    const GeneratingFormSpec spec = make(0.0, 0.0);
    s.spec_at = [spec](const Vec3&, const Vec3&) { return spec; };
    s.affine = assemble_affine(spec);
    return s;
  }
  s.predict = [F1, field, h](const Vec3& x) { return detail::dl_predict(F1, field, h, x); };
  s.spec_at = [F1, h, make](const Vec3& x, const Vec3& X0) {
    return make(detail::dl_start_momentum(F1, h, x), X0[2]);
  };
  return s;
}

// -- S1 and S2 for linear fields ------------------------------------------------

enum class S1Variant { Quispel, AZ };

/// Quadratic potentials of the S1 or S2 one-form phi dx1 + Phi dX1.
/// phi is a function of (x1, x2, X1). For S1, Phi is a function of
/// (x1, X1, X2) with X3 = -dPhi/dX2; for S2, of (x1, X1, X3) with X2 = dPhi/dX3.
struct DerivedPotentials
{
  QuadForm phi;
  QuadForm Phi;
  /// x2-coefficient of the compatibility remainder, dropped from the gauge term.
  double gauge_residual = 0.0;
  /// The affine relations (each == 0) the potentials were derived from.
  std::vector<AffineExpr> relations;
};

namespace detail {

inline constexpr double denominator_floor = 1e-8;
inline constexpr double twist_floor_coeff = 1e-8;

inline void guard_denominator(const char* name, double value, double h)
{
  if (std::abs(value) < denominator_floor)
    throw Error(ErrorCode::StepTooLarge, std::string("step h = ") + std::to_string(h) +
                                             " puts denominator " + name + " at " +
                                             std::to_string(value));
}

inline void guard_twist(const char* name, double value)
{
  if (std::abs(value) < twist_floor_coeff)
    throw Error(ErrorCode::TwistDegenerate,
                std::string("twist coefficient ") + name + " vanishes (" + std::to_string(value) + ")");
}

inline AffineExpr var(Symbol s, double c = 1.0) { return AffineExpr::var(s, c); }

// phi from x3 = dphi/dx2, Phi0 from the last determining equation, then the
// gauge term C(x1, X1) from the compatibility condition.
inline DerivedPotentials run_pipeline(const std::vector<AffineExpr>& rels_phi,
                                      const std::vector<AffineExpr>& rels_last,
                                      const std::vector<AffineExpr>& rels_middle, Symbol middle,
                                      Symbol last, double sign)
{
  using S = Symbol;
  const std::array<Symbol, 3> phi_inputs{S::x1, S::x2, S::X1};
  const std::array<Symbol, 3> Phi_inputs{S::x1, S::X1, middle};
  const AffineExpr x3 = express(rels_phi, S::x3, phi_inputs);
  const QuadForm phi = antiderivative(x3, S::x2);
  const AffineExpr last_e = express(rels_last, last, Phi_inputs);
  const QuadForm Phi0 = sign * antiderivative(last_e, middle);

  const AffineExpr E = partial(phi, S::X1) - partial(Phi0, S::x1);
  const double kappa = E.coeff(middle);
  const AffineExpr T = express(rels_middle, middle, phi_inputs);
  AffineExpr R = E - kappa * (var(middle) - T);
  R.coeffs[idx(middle)] = 0.0;
  DerivedPotentials out;
  out.gauge_residual = R.coeff(S::x2);
  R.coeffs[idx(S::x2)] = 0.0;
  out.phi = phi;
  out.Phi = Phi0 + antiderivative(R, S::x1);
  return out;
}

} // namespace detail

/// Relations of the corrected semi-implicit map in the S1 orientation:
/// X1 = x1 + h a1(x1, X2, x3), X2 = x2 + h a2(x1, X2, x3) - h^2 a11 a33 (X2 - c),
/// X3 = x3 + h a3(X1, X2, x3), c = h (a21 x1 + a23 x3) / (1 - h a22).
inline std::vector<AffineExpr> quispel_relations_s1(const LinearField& L, double h)
{
  using detail::var;
  using S = Symbol;
  const auto a = [&](int i, int j) { return L.a(i, j); };
  detail::guard_denominator("1 - h a22", 1.0 - h * a(2, 2), h);
  const double cc = h * h * a(1, 1) * a(3, 3);
  const AffineExpr c = (h / (1.0 - h * a(2, 2))) * (var(S::x1, a(2, 1)) + var(S::x3, a(2, 3)));
  return {
      var(S::X1) - var(S::x1) - h * (var(S::x1, a(1, 1)) + var(S::X2, a(1, 2)) + var(S::x3, a(1, 3))),
      var(S::X2) - var(S::x2) - h * (var(S::x1, a(2, 1)) + var(S::X2, a(2, 2)) + var(S::x3, a(2, 3))) +
          cc * (var(S::X2) - c),
      var(S::X3) - var(S::x3) - h * (var(S::X1, a(3, 1)) + var(S::X2, a(3, 2)) + var(S::x3, a(3, 3)))};
}

/// The S2 orientation: X1 = x1 + h a1(x1, x2, X3), X2 = x2 + h a2(X1, x2, X3),
/// X3 = x3 + h a3(x1, x2, X3) - h^2 a11 a22 (X3 - c), c = h (a31 x1 + a32 x2) / (1 - h a33).
inline std::vector<AffineExpr> quispel_relations_s2(const LinearField& L, double h)
{
  using detail::var;
  using S = Symbol;
  const auto a = [&](int i, int j) { return L.a(i, j); };
  detail::guard_denominator("1 - h a33", 1.0 - h * a(3, 3), h);
  const double cc = h * h * a(1, 1) * a(2, 2);
  const AffineExpr c = (h / (1.0 - h * a(3, 3))) * (var(S::x1, a(3, 1)) + var(S::x2, a(3, 2)));
  return {
      var(S::X1) - var(S::x1) - h * (var(S::x1, a(1, 1)) + var(S::x2, a(1, 2)) + var(S::X3, a(1, 3))),
      var(S::X2) - var(S::x2) - h * (var(S::X1, a(2, 1)) + var(S::x2, a(2, 2)) + var(S::X3, a(2, 3))),
      var(S::X3) - var(S::x3) - h * (var(S::x1, a(3, 1)) + var(S::x2, a(3, 2)) + var(S::X3, a(3, 3))) +
          cc * (var(S::X3) - c)};
}

inline DerivedPotentials derive_s1_potentials(const LinearField& L, double h, S1Variant variant)
{
  using detail::var;
  using S = Symbol;
  detail::require_step(h);
  const auto a = [&](int i, int j) { return L.a(i, j); };
  detail::guard_twist("a13", a(1, 3));
  if (variant == S1Variant::Quispel) {
    const double k1 = 1.0 + h * h * a(1, 1) * a(3, 3) - h * a(2, 2);
    detail::guard_denominator("k1", k1, h);
    const auto rels = quispel_relations_s1(L, h);
    DerivedPotentials d = detail::run_pipeline(rels, rels, rels, S::X2, S::X3, -1.0);
    d.relations = rels;
    return d;
  }
  const double l1 = 1.0 - h * a(1, 2) / a(1, 3) * a(2, 3);
  detail::guard_denominator("l1", l1, h);
  auto euler1 = [&](Symbol second) {
    return var(S::X1) - var(S::x1, 1.0 + h * a(1, 1)) - var(second, h * a(1, 2)) - var(S::x3, h * a(1, 3));
  };
  const double r = a(1, 2) / a(1, 3);
  const AffineExpr third = var(S::X3, l1) - var(S::x3, 1.0 + h * a(3, 3)) - var(S::x1, h * a(3, 1)) -
                           var(S::X2, h * a(3, 2)) - h * r * (var(S::x1, a(2, 1)) + var(S::X2, a(2, 2)));
  const AffineExpr second = var(S::X2) - var(S::x2) -
                            h * (var(S::x1, a(2, 1)) + var(S::x2, a(2, 2)) + var(S::x3, a(2, 3)));
  DerivedPotentials d = detail::run_pipeline({euler1(S::x2)}, {euler1(S::X2), third},
                                             {euler1(S::x2), second}, S::X2, S::X3, -1.0);
  d.relations = {euler1(S::x2), second, euler1(S::X2), third};
  return d;
}

inline DerivedPotentials derive_s2_potentials(const LinearField& L, double h)
{
  using S = Symbol;
  detail::require_step(h);
  const auto a = [&](int i, int j) { return L.a(i, j); };
  detail::guard_twist("a12", a(1, 2));
  detail::guard_twist("a13", a(1, 3));
  const double m1 = 1.0 - h * a(3, 3) + h * h * a(1, 1) * a(2, 2);
  detail::guard_denominator("m1", m1, h);
  const auto rels = quispel_relations_s2(L, h);
  DerivedPotentials d = detail::run_pipeline(rels, rels, rels, S::X3, S::X2, 1.0);
  d.relations = rels;
  return d;
}

inline GeneratingFormSpec s1_spec(const DerivedPotentials& d)
{
  using S = Symbol;
  GeneratingFormSpec g;
  g.sigma = {3, 2, 1};
  g.Sigma = {3, 2, 1};
  g.eps = 1;
  g.phi = ScalarFn::from_quad(d.phi, {S::X1, S::x2, S::x1});
  g.Phi = ScalarFn::from_quad(-1.0 * d.Phi, {S::X1, S::X2, S::x1});
  return g;
}

inline GeneratingFormSpec s2_spec(const DerivedPotentials& d)
{
  using S = Symbol;
  GeneratingFormSpec g;
  g.sigma = {3, 2, 1};
  g.Sigma = {2, 3, 1};
  g.eps = -1;
  g.phi = ScalarFn::from_quad(d.phi, {S::X1, S::x2, S::x1});
  g.Phi = ScalarFn::from_quad(d.Phi, {S::X1, S::X3, S::x1});
  return g;
}

namespace detail {

inline bool is_zero(const Mat3& A)
{
  for (const auto& row : A)
    for (double v : row)
      if (v != 0.0)
        return false;
  return true;
}

inline SchemeHandle linear_handle(std::string name, std::string label, const LinearField& L, double h,
                                  const GeneratingFormSpec& spec, const SolverConfig& cfg)
{
  SchemeHandle s;
  s.name = std::move(name);
  s.label = std::move(label);
  s.h = h;
  s.cfg = cfg;
  s.field = make_linear_field(L);
  s.spec_at = [spec](const Vec3&, const Vec3&) { return spec; };
  s.affine = assemble_affine(spec);
  return s;
}

} // namespace detail

inline SchemeHandle make_s1(const LinearField& L, double h, S1Variant variant,
                            const SolverConfig& cfg = {})
{
  detail::require_step(h);
  const std::string name = variant == S1Variant::Quispel ? "s1-quispel" : "s1-az";
  if (detail::is_zero(L.A))
    return detail::identity_handle(name, "S1", h, make_linear_field(L));
  return detail::linear_handle(name, "S1", L, h, s1_spec(derive_s1_potentials(L, h, variant)), cfg);
}

inline SchemeHandle make_s2(const LinearField& L, double h, const SolverConfig& cfg = {})
{
  detail::require_step(h);
  if (detail::is_zero(L.A))
    return detail::identity_handle("s2-quispel", "S2", h, make_linear_field(L));
  return detail::linear_handle("s2-quispel", "S2", L, h, s2_spec(derive_s2_potentials(L, h)), cfg);
}

// -- semi-implicit maps ---------------------------------------------------------

enum class Orientation { S1, S2 };

/// The semi-implicit map without volume correction.
inline Vec3 semi_implicit_step(const LinearField& L, double h, const Vec3& x,
                               Orientation o = Orientation::S1)
{
  const auto a = [&](int i, int j) { return L.a(i, j); };
  if (o == Orientation::S1) {
    detail::guard_denominator("1 - h a22", 1.0 - h * a(2, 2), h);
    const double X2 = (x[1] + (h * a(2, 1) * x[0] + h * a(2, 3) * x[2])) / (1.0 - h * a(2, 2));
    const double X1 = x[0] + h * (a(1, 1) * x[0] + a(1, 2) * X2 + a(1, 3) * x[2]);
    const double X3 = x[2] + h * (a(3, 1) * X1 + a(3, 2) * X2 + a(3, 3) * x[2]);
    return {X1, X2, X3};
  }
  detail::guard_denominator("1 - h a33", 1.0 - h * a(3, 3), h);
  const double X3 = (x[2] + (h * a(3, 1) * x[0] + h * a(3, 2) * x[1])) / (1.0 - h * a(3, 3));
  const double X1 = x[0] + h * (a(1, 1) * x[0] + a(1, 2) * x[1] + a(1, 3) * X3);
  const double X2 = x[1] + h * (a(2, 1) * X1 + a(2, 2) * x[1] + a(2, 3) * X3);
  return {X1, X2, X3};
}

/// The semi-implicit map with the volume correction h^2 a11 a33 (X2 - c)
/// (S1 orientation) or h^2 a11 a22 (X3 - c) (S2 orientation).
inline Vec3 quispel_corrected_step(const LinearField& L, double h, const Vec3& x,
                                   Orientation o = Orientation::S1)
{
  const auto a = [&](int i, int j) { return L.a(i, j); };
  if (o == Orientation::S1) {
    const double den = 1.0 - h * a(2, 2);
    detail::guard_denominator("1 - h a22", den, h);
    const double cc = h * h * a(1, 1) * a(3, 3);
    const double k1 = den + cc;
    detail::guard_denominator("k1", k1, h);
    const double rhs = h * a(2, 1) * x[0] + h * a(2, 3) * x[2];
    const double X2 = (x[1] + rhs + cc * (rhs / den)) / k1;
    const double X1 = x[0] + h * (a(1, 1) * x[0] + a(1, 2) * X2 + a(1, 3) * x[2]);
    const double X3 = x[2] + h * (a(3, 1) * X1 + a(3, 2) * X2 + a(3, 3) * x[2]);
    return {X1, X2, X3};
  }
  const double den = 1.0 - h * a(3, 3);
  detail::guard_denominator("1 - h a33", den, h);
  const double cc = h * h * a(1, 1) * a(2, 2);
  const double m1 = den + cc;
  detail::guard_denominator("m1", m1, h);
  const double rhs = h * a(3, 1) * x[0] + h * a(3, 2) * x[1];
  const double X3 = (x[2] + rhs + cc * (rhs / den)) / m1;
  const double X1 = x[0] + h * (a(1, 1) * x[0] + a(1, 2) * x[1] + a(1, 3) * X3);
  const double X2 = x[1] + h * (a(2, 1) * X1 + a(2, 2) * x[1] + a(2, 3) * X3);
  return {X1, X2, X3};
}

/// Matrix and offset of a map known to be affine, from its values at 0 and e_j.
inline AffineMap3 affine_of(const std::function<Vec3(const Vec3&)>& f)
{
  AffineMap3 m;
  m.d = f(Vec3{});
  for (int j = 0; j < 3; ++j) {
    Vec3 e{};
    e[j] = 1.0;
    const Vec3 col = f(e) - m.d;
    for (int i = 0; i < 3; ++i)
      m.M[i][j] = col[i];
  }
  return m;
}

inline SchemeHandle make_quispel_corrected(const LinearField& L, double h,
                                           Orientation o = Orientation::S1)
{
  detail::require_step(h);
  SchemeHandle s;
  s.name = "quispel-corrected";
  s.label = "corrected semi-implicit";
  s.h = h;
  s.field = make_linear_field(L);
  s.direct = [L, h, o](const Vec3& x) { return quispel_corrected_step(L, h, x, o); };
  s.affine = affine_of(s.direct);
  return s;
}

// -- baselines ------------------------------------------------------------------

inline Vec3 euler_step(const Field3& f, double h, const Vec3& x) { return x + h * f(x); }

inline Vec3 rk4_step(const Field3& f, double h, const Vec3& x)
{
  const Vec3 k1 = f(x);
  const Vec3 k2 = f(x + (0.5 * h) * k1);
  const Vec3 k3 = f(x + (0.5 * h) * k2);
  const Vec3 k4 = f(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline SchemeHandle make_baseline(const std::string& name, const Field3& field, double h)
{
  detail::require_step(h);
  SchemeHandle s;
  s.name = name;
  s.label = "baseline";
  s.h = h;
  s.field = field;
  if (name == "euler")
    s.direct = [field, h](const Vec3& x) { return euler_step(field, h, x); };
  else if (name == "rk4")
    s.direct = [field, h](const Vec3& x) { return rk4_step(field, h, x); };
  else
    throw Error(ErrorCode::InvalidConfig, "unknown baseline '" + name + "'");
  if (field.affine)
    s.affine = affine_of(s.direct);
  return s;
}

// -- registry -------------------------------------------------------------------

inline const std::vector<std::string>& scheme_names()
{
  static const std::vector<std::string> names{"se-se",      "dl-se", "dl-dl",
                                              "s1-quispel", "s1-az", "s2-quispel",
                                              "quispel-corrected", "euler", "rk4"};
  return names;
}

/// The linear part of a field that must be linear (affine with zero offset).
inline LinearField require_linear(const Field3& field, const std::string& scheme)
{
  if (!field.affine)
    throw Error(ErrorCode::InvalidConfig, "scheme " + scheme + " needs a linear field");
  for (double c : field.affine->c)
    if (c != 0.0)
      throw Error(ErrorCode::InvalidConfig, "scheme " + scheme + " needs a linear field (nonzero offset)");
  return LinearField(field.affine->A);
}

inline SchemeHandle make_scheme(const std::string& name, const Field3& field, double h,
                                const SolverConfig& cfg = {})
{
  SchemeHandle s;
  if (name == "se-se") {
    const PotentialTriple p = potentials_for(field, 2);
    s = make_se_se(p.get(1), p.get(3), h, cfg);
  } else if (name == "dl-se" || name == "dl-dl") {
    const PotentialTriple p = potentials_for(field, 3);
    s = name == "dl-se" ? make_dl_se(p.get(1), p.get(2), h, cfg) : make_dl_dl(p.get(1), p.get(2), h, cfg);
  } else if (name == "s1-quispel") {
    s = make_s1(require_linear(field, name), h, S1Variant::Quispel, cfg);
  } else if (name == "s1-az") {
    s = make_s1(require_linear(field, name), h, S1Variant::AZ, cfg);
  } else if (name == "s2-quispel") {
    s = make_s2(require_linear(field, name), h, cfg);
  } else if (name == "quispel-corrected") {
    s = make_quispel_corrected(require_linear(field, name), h);
  } else if (name == "euler" || name == "rk4") {
    return make_baseline(name, field, h);
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown scheme '" + name + "'");
  }
  s.field = field;
  return s;
}

} // namespace volform

#endif
