#include "hopflab/forms.hpp"

#include <bit>
#include <sstream>

namespace hopflab::sym {

namespace {

// Sign of merging two disjoint ascending index sets: parity of the number of
// pairs (i in a, j in b) with i > j.
int merge_sign(unsigned a, unsigned b) {
  int inv = 0;
  for (int j = 0; j < 4; ++j)
    if (b & (1u << j)) inv += std::popcount(a & ~((1u << (j + 1)) - 1u));
  return (inv & 1) ? -1 : 1;
}

// dt = d(ln r2) as a coordinate one-form.
const CoordForm& dt_form() {
  static const CoordForm dt = [] {
    CoordForm f;
    f.add(1u << kDz1, CoeffExpr::var(kZb1).div_r2());
    f.add(1u << kDz2, CoeffExpr::var(kZb2).div_r2());
    f.add(1u << kDzb1, CoeffExpr::var(kZ1).div_r2());
    f.add(1u << kDzb2, CoeffExpr::var(kZ2).div_r2());
    return f;
  }();
  return dt;
}

// Chain-rule contribution of t-dependent opaque symbols to d(coefficient),
// as a scalar multiplying dt.
CoeffExpr t_partial(const CoeffExpr& c) {
  auto& tab = SymTab::get();
  CoeffExpr acc;
  if (!tab.has_any_tderiv()) return acc;
  std::map<int, bool> seen;
  for (auto& [m, coef] : c.num().terms()) {
    for (auto& [s, e] : m.f) {
      if (SymTab::is_coord(s) || seen.count(s)) continue;
      seen[s] = true;
      if (const Poly* dp = tab.tderiv(s))
        acc = acc + c.opaque_partial(s) * CoeffExpr(*dp);
    }
  }
  return acc;
}

}  // namespace

// ---------------------------------------------------------------------------
// CoordForm

CoordForm::CoordForm(CoeffExpr scalar) { add(0, scalar); }

CoordForm CoordForm::basis(unsigned mask) {
  CoordForm f;
  f.add(mask, CoeffExpr(1));
  return f;
}

CoordForm CoordForm::term(unsigned mask, CoeffExpr c) {
  CoordForm f;
  f.add(mask, std::move(c));
  return f;
}

int CoordForm::grade() const {
  if (c_.empty()) return 0;
  int g = std::popcount(c_.begin()->first);
  for (auto& [m, c] : c_)
    if (std::popcount(m) != g) return -1;
  return g;
}

CoeffExpr CoordForm::comp(unsigned mask) const {
  auto it = c_.find(mask);
  return it == c_.end() ? CoeffExpr() : it->second;
}

CoordForm CoordForm::grade_part(int g) const {
  CoordForm r;
  for (auto& [m, c] : c_)
    if (std::popcount(m) == g) r.add(m, c);
  return r;
}

void CoordForm::add(unsigned mask, const CoeffExpr& c) {
  if (c.is_zero()) return;
  auto it = c_.find(mask);
  if (it == c_.end()) {
    c_.emplace(mask, c);
  } else {
    it->second = it->second + c;
    if (it->second.is_zero()) c_.erase(it);
  }
}

CoordForm CoordForm::operator-() const {
  CoordForm r;
  for (auto& [m, c] : c_) r.c_.emplace(m, -c);
  return r;
}

CoordForm CoordForm::operator+(const CoordForm& o) const {
  CoordForm r = *this;
  for (auto& [m, c] : o.c_) r.add(m, c);
  return r;
}

CoordForm CoordForm::operator-(const CoordForm& o) const { return *this + (-o); }

CoordForm CoordForm::operator*(const CoeffExpr& s) const {
  CoordForm r;
  for (auto& [m, c] : c_) r.add(m, c * s);
  return r;
}

CoordForm CoordForm::conj() const {
  // Conjugation swaps dz_i <-> dzb_i (bits 0<->2, 1<->3) and conjugates
  // coefficients; swapped index sets are re-sorted, producing a sign.
  CoordForm r;
  for (auto& [m, c] : c_) {
    unsigned cm = ((m & 0x3u) << 2) | ((m & 0xCu) >> 2);
    // Sign: positions permute by the swap (0,1,2,3)->(2,3,0,1); the parity of
    // the induced permutation on the selected ascending subset.
    int idx[4], n = 0;
    for (int i = 0; i < 4; ++i)
      if (m & (1u << i)) idx[n++] = (i + 2) & 3;
    int inv = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (idx[i] > idx[j]) ++inv;
    r.add(cm, (inv & 1) ? -c.conj() : c.conj());
  }
  return r;
}

std::string CoordForm::str() const {
  if (c_.empty()) return "0";
  static const char* names[4] = {"dz1", "dz2", "dzb1", "dzb2"};
  std::ostringstream os;
  bool first = true;
  for (auto& [m, c] : c_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.str() << ")";
    for (int i = 0; i < 4; ++i)
      if (m & (1u << i)) os << "^" << names[i];
  }
  return os.str();
}

CoordForm wedge(const CoordForm& a, const CoordForm& b) {
  CoordForm r;
  for (auto& [ma, ca] : a.comps())
    for (auto& [mb, cb] : b.comps()) {
      if (ma & mb) continue;
      CoeffExpr c = ca * cb;
      r.add(ma | mb, merge_sign(ma, mb) > 0 ? c : -c);
    }
  return r;
}

CoordForm ext_d(const CoordForm& a) {
  CoordForm r;
  for (auto& [m, c] : a.comps()) {
    CoordForm dc;
    for (int dir = 0; dir < 4; ++dir)
      dc.add(1u << dir, c.coord_partial(kDirSym[dir]));
    CoeffExpr tp = t_partial(c);
    if (!tp.is_zero()) dc = dc + dt_form() * tp;
    r = r + wedge(dc, CoordForm::basis(m));
  }
  return r;
}

// ---------------------------------------------------------------------------
// VField

VField VField::basis(int dir) {
  VField v;
  v.add(dir, CoeffExpr(1));
  return v;
}

VField VField::term(int dir, CoeffExpr c) {
  VField v;
  v.add(dir, std::move(c));
  return v;
}

CoeffExpr VField::comp(int dir) const {
  auto it = c_.find(dir);
  return it == c_.end() ? CoeffExpr() : it->second;
}

void VField::add(int dir, const CoeffExpr& c) {
  if (c.is_zero()) return;
  auto it = c_.find(dir);
  if (it == c_.end()) {
    c_.emplace(dir, c);
  } else {
    it->second = it->second + c;
    if (it->second.is_zero()) c_.erase(it);
  }
}

VField VField::operator-() const {
  VField r;
  for (auto& [d, c] : c_) r.c_.emplace(d, -c);
  return r;
}

VField VField::operator+(const VField& o) const {
  VField r = *this;
  for (auto& [d, c] : o.c_) r.add(d, c);
  return r;
}

VField VField::operator-(const VField& o) const { return *this + (-o); }

VField VField::operator*(const CoeffExpr& s) const {
  VField r;
  for (auto& [d, c] : c_) r.add(d, c * s);
  return r;
}

VField VField::conj() const {
  VField r;
  for (auto& [d, c] : c_) r.add((d + 2) & 3, c.conj());
  return r;
}

std::string VField::str() const {
  if (c_.empty()) return "0";
  static const char* names[4] = {"d/dz1", "d/dz2", "d/dzb1", "d/dzb2"};
  std::ostringstream os;
  bool first = true;
  for (auto& [d, c] : c_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.str() << ")*" << names[d];
  }
  return os.str();
}

CoeffExpr VField::apply(const CoeffExpr& f) const {
  CoeffExpr acc;
  for (auto& [d, c] : c_) acc = acc + c * f.coord_partial(kDirSym[d]);
  CoeffExpr tp = t_partial(f);
  if (!tp.is_zero()) {
    // X(t) = X(r2)/r2.
    static const int r2partials[4] = {kZb1, kZb2, kZ1, kZ2};
    CoeffExpr xt;
    for (auto& [d, c] : c_) xt = xt + c * CoeffExpr::var(r2partials[d]);
    acc = acc + tp * xt.div_r2();
  }
  return acc;
}

CoordForm interior(const VField& x, const CoordForm& a) {
  CoordForm r;
  for (auto& [m, c] : a.comps()) {
    int pos = 0;
    for (int i = 0; i < 4; ++i) {
      if (!(m & (1u << i))) continue;
      CoeffExpr xc = x.comp(i);
      if (!xc.is_zero()) {
        CoeffExpr v = xc * c;
        r.add(m & ~(1u << i), (pos & 1) ? -v : v);
      }
      ++pos;
    }
  }
  return r;
}

VField lie_bracket(const VField& x, const VField& y) {
  VField r;
  for (int d = 0; d < 4; ++d) {
    CoeffExpr c = x.apply(y.comp(d)) - y.apply(x.comp(d));
    r.add(d, c);
  }
  return r;
}

CoordForm lie_derivative(const VField& x, const CoordForm& a) {
  return interior(x, ext_d(a)) + ext_d(interior(x, a));
}

GenSection courant(const GenSection& s, const GenSection& t, const CoordForm& gamma) {
  GenSection r;
  r.v = lie_bracket(s.v, t.v);
  r.xi = lie_derivative(s.v, t.xi) - interior(t.v, ext_d(s.xi)) +
         interior(s.v, interior(t.v, gamma));
  return r;
}

CoeffExpr pairing(const GenSection& s, const GenSection& t) {
  CoeffExpr a = interior(s.v, t.xi).scalar_part();
  CoeffExpr b = interior(t.v, s.xi).scalar_part();
  return (a + b) * frac(1, 2);
}

}  // namespace hopflab::sym
