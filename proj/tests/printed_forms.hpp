#ifndef VOLFORM_TESTS_PRINTED_FORMS_HPP
#define VOLFORM_TESTS_PRINTED_FORMS_HPP

// The closed-form S1 and S2 potentials as printed, transcribed term by term.
// A printed "Delta a13" is read as h a13; the "Delta t a33" denominator in the
// second S1 choice is kept as printed.

#include <cstdio>
#include <string>

#include "volform/schemes.hpp"
#include "volform/verify.hpp"

namespace printed {

using namespace volform;
using S = Symbol;

inline AffineExpr v(S s, double c = 1.0) { return AffineExpr::var(s, c); }
inline QuadForm sq(S s) { return product(v(s), v(s)); }
inline QuadForm mul(S a, S b) { return product(v(a), v(b)); }

inline DerivedPotentials s1_quispel(const LinearField& L, double h)
{
  const auto a = [&](int i, int j) { return L.a(i, j); };
  const double k1 = 1.0 + h * h * a(1, 1) * a(3, 3) - h * a(2, 2);
  const double k2 = 1.0 + h * h * a(1, 1) * a(3, 3) / (1.0 - h * a(2, 2));
  const double k3 = h * a(1, 3) * (h * a(1, 3) + k2 / k1 * h * a(1, 2) * a(2, 3));
  DerivedPotentials d;
  const AffineExpr num =
      v(S::X1) - v(S::x1) - v(S::x1, h * a(1, 1)) - v(S::x1, h * h * a(2, 1) * a(1, 2) * k2 / k1);
  const double den = h * a(1, 3) + h * h * a(2, 3) * a(1, 2) * k2 / k1;
  d.phi = (1.0 / den) * product(num, v(S::x2)) -
          (a(1, 2) / (k1 * a(1, 3) + h * a(2, 3) * a(1, 2) * k2)) * 0.5 * sq(S::x2);
  const AffineExpr lead = v(S::X1) - v(S::x1) - v(S::x1, h * a(1, 1));
  d.Phi = (-(1.0 + h * a(3, 3)) / (h * a(1, 3))) * product(lead, v(S::X2)) +
          (-h * a(3, 2) / 2.0 + a(1, 2) / (2.0 * a(1, 3)) * (1.0 + h * a(3, 3))) * sq(S::X2) -
          (h * a(3, 1)) * mul(S::X1, S::X2) -
          (1.0 / (2.0 * k3)) * (2.0 * mul(S::X1, S::x1) -
                                 ((1.0 + h * a(1, 1)) * h * a(2, 3) * k2) * sq(S::x1) +
                                 (h * h * a(1, 3) * a(2, 1) * k2) * sq(S::x1));
  return d;
}

inline DerivedPotentials s1_az(const LinearField& L, double h)
{
  const auto a = [&](int i, int j) { return L.a(i, j); };
  const double l1 = 1.0 - h * a(1, 2) / a(1, 3) * a(2, 3);
  const double r = a(1, 2) / a(1, 3);
  const AffineExpr lead = v(S::X1) - v(S::x1, 1.0 + h * a(1, 1));
  DerivedPotentials d;
  d.phi = (1.0 / (h * a(1, 3))) * product(lead, v(S::x2)) - (0.5 * r) * sq(S::x2);
  const QuadForm inner =
      (1.0 + h * a(3, 3)) * ((1.0 / (h * a(3, 3))) * product(lead, v(S::X2)) - (0.5 * r) * sq(S::X2)) +
      (h * a(3, 1)) * mul(S::x1, S::X2) + (0.5 * h * a(3, 2)) * sq(S::X2) +
      (h * r) * (a(2, 1) * mul(S::x1, S::X1) + (0.5 * a(2, 2)) * sq(S::X2));
  d.Phi = (-1.0 / l1) * inner + (h * a(2, 1) / 2.0) * sq(S::x1) +
          (h * a(2, 3) / (2.0 * h * a(1, 3))) * (2.0 * mul(S::X1, S::x1) - (1.0 + h * a(1, 1)) * sq(S::x1));
  return d;
}

inline DerivedPotentials s2_quispel(const LinearField& L, double h)
{
  const auto a = [&](int i, int j) { return L.a(i, j); };
  const double m1 = 1.0 - h * a(3, 3) + h * h * a(1, 1) * a(2, 2);
  const double m2 = 1.0 + h * h * a(1, 1) * a(2, 2) / (1.0 - h * a(3, 3));
  const AffineExpr lead = v(S::X1) - v(S::x1, 1.0 + h * a(1, 1));
  DerivedPotentials d;
  d.phi = (1.0 / (h * a(1, 3))) * product(m1 * lead - v(S::x1, h * h * a(3, 1) * a(1, 3) * m2), v(S::x2)) -
          (m1 * a(1, 2) / (2.0 * a(1, 3))) * sq(S::x2) - (h * a(3, 2) * m2 / 2.0) * sq(S::x2);
  d.Phi = ((1.0 + h * a(2, 2)) / (h * a(1, 2))) * product(lead, v(S::X3)) -
          (a(1, 3) * (1.0 + h * a(2, 2)) / (2.0 * a(1, 2))) * sq(S::X3) + (h * a(2, 1)) * mul(S::X1, S::X3) +
          (h * a(2, 3) / 2.0) * sq(S::X3) +
          (m1 / (2.0 * h * h * a(1, 2) * a(1, 3))) *
              (2.0 * mul(S::X1, S::x1) - (1.0 + h * a(1, 1)) * sq(S::x1));
  return d;
}

struct Fidelity
{
  std::string name;
  bool assembled = false;
  std::string error;
  double max_map_diff = 0.0;
  double det_defect = 0.0;
};

/// Compares the map generated by the printed potentials with the pipeline map.
inline Fidelity compare(const std::string& name, const DerivedPotentials& printed_d,
                        const DerivedPotentials& pipeline_d, bool s2, const std::vector<Vec3>& pts)
{
  Fidelity f;
  f.name = name;
  try {
    const AffineMap3 p = assemble_affine(s2 ? s2_spec(printed_d) : s1_spec(printed_d));
    const AffineMap3 q = assemble_affine(s2 ? s2_spec(pipeline_d) : s1_spec(pipeline_d));
    f.assembled = true;
    f.det_defect = std::abs(p.det() - 1.0);
    for (const Vec3& x : pts)
      f.max_map_diff = std::max(f.max_map_diff, norm(p.apply(x) - q.apply(x)));
  } catch (const Error& e) {
    f.error = e.what();
  }
  return f;
}

inline std::string describe(const Fidelity& f)
{
  if (!f.assembled)
    return f.name + ": printed potentials do not generate a map (" + f.error + ")";
  return f.name + ": max |printed - pipeline| = " + format_double(f.max_map_diff) +
         ", |det - 1| of printed map = " + format_double(f.det_defect);
}

} // namespace printed

#endif
