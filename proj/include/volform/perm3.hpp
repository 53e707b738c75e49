#ifndef VOLFORM_PERM3_HPP
#define VOLFORM_PERM3_HPP

// The symmetric group S3 acting on role slots and coordinates of R^3.
//
// A permutation maps a role slot (1, 2, 3) to a coordinate index (1, 2, 3).
// The role slots of the generating equations are ordered (+, o, -).

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"

namespace volform {

class Permutation
{
public:
  Permutation() : _image{1, 2, 3} {}

  Permutation(int a, int b, int c) : _image{a, b, c}
  {
    std::array<bool, 3> seen{};
    for (int v : _image) {
      if (v < 1 || v > 3 || seen[v - 1])
        throw Error(ErrorCode::InvalidPermutation,
                    "not a permutation: " + to_string());
      seen[v - 1] = true;
    }
  }

  static Permutation identity() { return {}; }

  /// The argument reversal (1,2,3) -> (3,2,1).
  static Permutation flip() { return {3, 2, 1}; }

  /// Image of the 1-based index i.
  int operator()(int i) const { return _image[i - 1]; }

  const std::array<int, 3>& image() const { return _image; }

  bool is_identity() const { return _image == std::array<int, 3>{1, 2, 3}; }

  std::string to_string() const
  {
    std::ostringstream os;
    os << _image[0] << ',' << _image[1] << ',' << _image[2];
    return os.str();
  }

  /// Parses "a,b,c".
  static Permutation parse(const std::string& text)
  {
    std::array<int, 3> v{};
    std::istringstream is(text);
    std::string tok;
    int n = 0;
    while (std::getline(is, tok, ',')) {
      if (n == 3)
        throw Error(ErrorCode::InvalidPermutation, "not a permutation: " + text);
      try {
        std::size_t used = 0;
        v[n] = std::stoi(tok, &used);
        if (used != tok.size())
          throw std::invalid_argument(tok);
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::InvalidPermutation, "not a permutation: " + text);
      }
      ++n;
    }
    if (n != 3)
      throw Error(ErrorCode::InvalidPermutation, "not a permutation: " + text);
    try {
      return Permutation(v[0], v[1], v[2]);
    } catch (const Error&) {
      throw Error(ErrorCode::InvalidPermutation, "not a permutation: " + text);
    }
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

private:
  std::array<int, 3> _image;
};

/// (p o q)(i) = p(q(i)).
inline Permutation compose(const Permutation& p, const Permutation& q)
{
  return {p(q(1)), p(q(2)), p(q(3))};
}

inline Permutation inverse(const Permutation& p)
{
  std::array<int, 3> inv{};
  for (int i = 1; i <= 3; ++i)
    inv[p(i) - 1] = i;
  return {inv[0], inv[1], inv[2]};
}

inline int sign(const Permutation& p)
{
  int inversions = 0;
  for (int i = 1; i <= 3; ++i)
    for (int j = i + 1; j <= 3; ++j)
      if (p(i) > p(j))
        ++inversions;
  return inversions % 2 == 0 ? 1 : -1;
}

/// All six elements, in lexicographic order of their images.
inline std::array<Permutation, 6> all_permutations()
{
  return {Permutation{1, 2, 3}, Permutation{1, 3, 2}, Permutation{2, 1, 3},
          Permutation{2, 3, 1}, Permutation{3, 1, 2}, Permutation{3, 2, 1}};
}

/// (x . p)_i = x_{p(i)}.
inline Vec3 act_vec(const Vec3& x, const Permutation& p)
{
  return {x[p(1) - 1], x[p(2) - 1], x[p(3) - 1]};
}

/// Matrix R with R x = x . p.
inline Mat3 action_matrix(const Permutation& p)
{
  Mat3 r{};
  for (int i = 1; i <= 3; ++i)
    r[i - 1][p(i) - 1] = 1.0;
  return r;
}

using Map3 = std::function<Vec3(const Vec3&)>;

/// The conjugated map x -> f(x . p) . P^-1.
inline Map3 permact(const Permutation& p, const Permutation& P, Map3 f)
{
  const Permutation Pinv = inverse(P);
  return [p, Pinv, f = std::move(f)](const Vec3& x) { return act_vec(f(act_vec(x, p)), Pinv); };
}

// -- classification of (sigma, Sigma) pairs ---------------------------------

enum class PairLabel { S1, SE, DL, S2, SEDL };

inline const char* to_string(PairLabel l)
{
  switch (l) {
  case PairLabel::S1: return "S1";
  case PairLabel::SE: return "SE";
  case PairLabel::DL: return "DL";
  case PairLabel::S2: return "S2";
  case PairLabel::SEDL: return "SEDL";
  }
  return "?";
}

struct PairClass
{
  PairLabel label;
  Permutation tau;
  /// rho such that (rho sigma, rho Sigma), or (rho Sigma, rho sigma) when
  /// adjoint_flag is set, equals the canonical pair (1, canonical_tau(label)).
  Permutation relabel;
  bool adjoint_flag = false;
};

/// The label is a function of tau = sigma^-1 o Sigma alone.
inline PairLabel label_of_tau(const Permutation& tau)
{
  if (tau.is_identity())
    return PairLabel::S1;
  if (tau == Permutation{3, 2, 1})
    return PairLabel::SE;
  if (tau == Permutation{1, 3, 2})
    return PairLabel::DL;
  if (tau == Permutation{2, 1, 3})
    return PairLabel::S2;
  return PairLabel::SEDL;
}

/// Representative tau* of each class; the canonical pair is (1, tau*).
inline Permutation canonical_tau(PairLabel label)
{
  switch (label) {
  case PairLabel::S1: return {1, 2, 3};
  case PairLabel::SE: return {3, 2, 1};
  case PairLabel::DL: return {1, 3, 2};
  case PairLabel::S2: return {2, 1, 3};
  case PairLabel::SEDL: return {2, 3, 1};
  }
  return {};
}

inline PairClass classify(const Permutation& sigma, const Permutation& Sigma)
{
  const Permutation tau = compose(inverse(sigma), Sigma);
  const PairLabel label = label_of_tau(tau);
  if (tau == canonical_tau(label))
    return {label, tau, inverse(sigma), false};
  // The other rotation: pass to the adjoint pair (Sigma, sigma), whose tau is
  // the inverse rotation, then relabel.
  return {label, tau, inverse(Sigma), true};
}

struct PairEntry
{
  Permutation sigma;
  Permutation Sigma;
  PairClass cls;
};

/// All 36 pairs grouped by class label.
inline std::map<PairLabel, std::vector<PairEntry>> enumerate_classes()
{
  std::map<PairLabel, std::vector<PairEntry>> out;
  for (const auto& s : all_permutations())
    for (const auto& S : all_permutations()) {
      PairClass c = classify(s, S);
      out[c.label].push_back({s, S, c});
    }
  return out;
}

namespace detail {

inline std::string subscript(int i)
{
  static const char* digits[] = {"₀", "₁", "₂", "₃"};
  return digits[i];
}

// A coordinate symbol: lower case (old) or upper case (new).
struct Sym
{
  bool upper;
  int index;

  std::string str() const { return (upper ? "X" : "x") + subscript(index); }

  bool operator<(const Sym& o) const
  {
    return upper != o.upper ? !upper : index < o.index;
  }
};

inline std::string arglist(std::array<Sym, 3> args)
{
  std::sort(args.begin(), args.end());
  return "(" + args[0].str() + "," + args[1].str() + "," + args[2].str() + ")";
}

} // namespace detail

/// The determining, compatibility and twist conditions of the permuted
/// generating equations, written in coordinates. Arguments are listed old
/// variables first; for sign(tau) = +1 the second potential is shown with the
/// opposite sign so that the compatibility condition reads as an equality.
inline std::string render_conditions(const Permutation& sigma, const Permutation& Sigma,
                                     const std::string& phi = "φ",
                                     const std::string& Phi = "Φ")
{
  using detail::Sym;
  const PairClass cls = classify(sigma, Sigma);
  const int s = sign(cls.tau);

  const Sym xp{false, sigma(1)}, xo{false, sigma(2)}, xm{false, sigma(3)};
  const Sym Xp{true, Sigma(1)}, Xo{true, Sigma(2)}, Xm{true, Sigma(3)};
  const std::string phi_args = detail::arglist({Xm, xo, xm});
  const std::string Phi_args = detail::arglist({Xm, Xo, xm});
  const std::string minus = s > 0 ? "−" : "";

  std::ostringstream os;
  os << "generating form: λ = " << phi << phi_args << " d" << xm.str() << " + " << Phi
     << Phi_args << " d" << Xm.str() << "\n";
  os << "determining: " << xp.str() << " = ∂" << xo.str() << " " << phi << phi_args << "\n";
  os << "compatibility: ∂" << Xm.str() << " " << phi << phi_args << " = ∂" << xm.str() << " "
     << Phi << Phi_args << "\n";
  os << "determining: " << Xp.str() << " = " << minus << "∂" << Xo.str() << " " << Phi
     << Phi_args << "\n";
  os << "twist: ∂" << xo.str() << "∂" << Xm.str() << " " << phi << " ≠ 0, ∂" << xm.str() << "∂"
     << Xo.str() << " " << Phi << " ≠ 0\n";
  return os.str();
}

} // namespace volform

#endif
