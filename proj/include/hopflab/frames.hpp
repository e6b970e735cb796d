#pragma once

// Invariant coframes on the Hopf surface and re-expression of coordinate
// forms over them.
//
// The two complex structures carry dual frame pairs:
//   minus:  fields X1 = z1 d/dz1 + zb2 d/dzb2, X2 = -zb2 d/dzb1 + z1 d/dz2
//           coframe a1 = (zb1 dz1 + z2 dzb2)/r2, a2 = (-z2 dzb1 + zb1 dz2)/r2
//   plus:   fields Y1 = z1 d/dz1 + z2 d/dz2,  Y2 = -zb2 d/dz1 + zb1 d/dz2
//           coframe b1 = (zb1 dz1 + zb2 dz2)/r2, b2 = (-z2 dz1 + z1 dz2)/r2
// together with their conjugates.  Frame component masks use bit order
// 0: f1, 1: f2, 2: fb1, 3: fb2.

#include "hopflab/forms.hpp"

namespace hopflab::sym {

enum class Frame { Minus, Plus };

// Frame coframe / tangent basis, index 0..1 holomorphic, 2..3 conjugate.
const CoordForm& frame_coform(Frame fr, int idx);
const VField& frame_field(Frame fr, int idx);

class FrameForm {
 public:
  explicit FrameForm(Frame fr = Frame::Minus) : fr_(fr) {}
  static FrameForm term(Frame fr, unsigned mask, CoeffExpr c);

  Frame frame() const { return fr_; }
  bool is_zero() const { return c_.empty(); }
  const std::map<unsigned, CoeffExpr>& comps() const { return c_; }
  CoeffExpr comp(unsigned mask) const;
  void add(unsigned mask, const CoeffExpr& c);

  FrameForm operator-() const;
  FrameForm operator+(const FrameForm& o) const;
  FrameForm operator-(const FrameForm& o) const;
  FrameForm operator*(const CoeffExpr& s) const;
  FrameForm conj() const;
  bool operator==(const FrameForm& o) const { return fr_ == o.fr_ && c_ == o.c_; }

  // Part of bidegree (p, q) with respect to the frame's complex structure.
  FrameForm bidegree_part(int p, int q) const;
  bool pure_bidegree(int p, int q) const;

  std::string str() const;

 private:
  Frame fr_;
  std::map<unsigned, CoeffExpr> c_;
};

FrameForm wedge(const FrameForm& a, const FrameForm& b);
FrameForm to_frame(const CoordForm& a, Frame fr);
CoordForm to_coord(const FrameForm& a);

// Dolbeault operators of the frame's complex structure: the (p+1, q) / (p, q+1)
// parts of d applied per-bidegree.
FrameForm dol(const FrameForm& a, Frame fr);
FrameForm dolbar(const FrameForm& a, Frame fr);
FrameForm dol(const CoordForm& a, Frame fr);
FrameForm dolbar(const CoordForm& a, Frame fr);

}  // namespace hopflab::sym
