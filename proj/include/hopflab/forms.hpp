#pragma once

// Exterior calculus on C^2 \ {0} in the coordinate coframe.
//
// Coframe basis order: dz1, dz2, dzb1, dzb2 (bits 0..3 of a component mask);
// tangent basis order: d/dz1, d/dz2, d/dzb1, d/dzb2.  Forms may be
// inhomogeneous; components with zero coefficient are never stored.

#include <array>
#include <map>

#include "hopflab/symcalc.hpp"

namespace hopflab::sym {

enum : int { kDz1 = 0, kDz2 = 1, kDzb1 = 2, kDzb2 = 3 };

// Symbol differentiated by tangent direction i.
constexpr std::array<int, 4> kDirSym = {kZ1, kZ2, kZb1, kZb2};

class CoordForm {
 public:
  CoordForm() = default;
  explicit CoordForm(CoeffExpr scalar);          // grade-0 form
  static CoordForm basis(unsigned mask);         // e.g. basis(1<<kDz1)
  static CoordForm term(unsigned mask, CoeffExpr c);

  bool is_zero() const { return c_.empty(); }
  // Grade if homogeneous, -1 if mixed, 0 for the zero form.
  int grade() const;
  const std::map<unsigned, CoeffExpr>& comps() const { return c_; }
  CoeffExpr comp(unsigned mask) const;
  CoeffExpr scalar_part() const { return comp(0); }
  CoordForm grade_part(int g) const;

  void add(unsigned mask, const CoeffExpr& c);

  CoordForm operator-() const;
  CoordForm operator+(const CoordForm& o) const;
  CoordForm operator-(const CoordForm& o) const;
  CoordForm operator*(const CoeffExpr& s) const;
  CoordForm conj() const;
  bool operator==(const CoordForm& o) const { return c_ == o.c_; }
  std::string str() const;

 private:
  std::map<unsigned, CoeffExpr> c_;
};

CoordForm wedge(const CoordForm& a, const CoordForm& b);
// Exterior derivative; coefficients may reference opaque symbols carrying a
// t-derivative rule (t = ln r2), which contributes via the chain rule.
CoordForm ext_d(const CoordForm& a);

class VField {
 public:
  VField() = default;
  static VField basis(int dir);  // d/dz1 etc.
  static VField term(int dir, CoeffExpr c);

  bool is_zero() const { return c_.empty(); }
  const std::map<int, CoeffExpr>& comps() const { return c_; }
  CoeffExpr comp(int dir) const;
  void add(int dir, const CoeffExpr& c);

  VField operator-() const;
  VField operator+(const VField& o) const;
  VField operator-(const VField& o) const;
  VField operator*(const CoeffExpr& s) const;
  VField conj() const;
  bool operator==(const VField& o) const { return c_ == o.c_; }
  std::string str() const;

  // Directional derivative of a scalar (chain rule through t-dependent
  // opaque symbols included).
  CoeffExpr apply(const CoeffExpr& f) const;

 private:
  std::map<int, CoeffExpr> c_;
};

CoordForm interior(const VField& x, const CoordForm& a);
VField lie_bracket(const VField& x, const VField& y);
CoordForm lie_derivative(const VField& x, const CoordForm& a);  // Cartan formula

// Generalized tangent sections: vector + one-form.
struct GenSection {
  VField v;
  CoordForm xi;

  GenSection() = default;
  GenSection(VField vv, CoordForm ff) : v(std::move(vv)), xi(std::move(ff)) {}
  GenSection operator+(const GenSection& o) const { return {v + o.v, xi + o.xi}; }
  GenSection operator-(const GenSection& o) const { return {v - o.v, xi - o.xi}; }
  GenSection operator*(const CoeffExpr& s) const { return {v * s, xi * s}; }
  bool operator==(const GenSection& o) const { return v == o.v && xi == o.xi; }
};

// Dorfman bracket twisted by a closed three-form:
//   s * t = ([X,Y], L_X eta - i_Y d xi + i_X i_Y gamma).
GenSection courant(const GenSection& s, const GenSection& t, const CoordForm& gamma);
// Natural pairing <X+xi, Y+eta> = (i_X eta + i_Y xi) / 2.
CoeffExpr pairing(const GenSection& s, const GenSection& t);

}  // namespace hopflab::sym
