#include "hopflab/frames.hpp"

#include <bit>
#include <sstream>

namespace hopflab::sym {

namespace {

int merge_sign(unsigned a, unsigned b) {
  int inv = 0;
  for (int j = 0; j < 4; ++j)
    if (b & (1u << j)) inv += std::popcount(a & ~((1u << (j + 1)) - 1u));
  return (inv & 1) ? -1 : 1;
}

CoeffExpr zv(int sym) { return CoeffExpr::var(sym); }

CoordForm coform_from_pairs(std::initializer_list<std::pair<int, CoeffExpr>> l) {
  CoordForm f;
  for (auto& [basis, c] : l) f.add(1u << basis, c.div_r2());
  return f;
}

struct FrameTables {
  // coframe[idx] in coordinates; expansion[coord basis] as FrameForm.
  CoordForm coform[2][4];
  VField field[2][4];
  FrameForm coord_in_frame[2][4];

  FrameTables() {
    auto mk = [&](Frame fr, int i) -> FrameForm& {
      return coord_in_frame[static_cast<int>(fr)][i];
    };
    int M = static_cast<int>(Frame::Minus), P = static_cast<int>(Frame::Plus);

    coform[M][0] = coform_from_pairs({{kDz1, zv(kZb1)}, {kDzb2, zv(kZ2)}});
    coform[M][1] = coform_from_pairs({{kDzb1, -zv(kZ2)}, {kDz2, zv(kZb1)}});
    coform[M][2] = coform[M][0].conj();
    coform[M][3] = coform[M][1].conj();
    coform[P][0] = coform_from_pairs({{kDz1, zv(kZb1)}, {kDz2, zv(kZb2)}});
    coform[P][1] = coform_from_pairs({{kDz1, -zv(kZ2)}, {kDz2, zv(kZ1)}});
    coform[P][2] = coform[P][0].conj();
    coform[P][3] = coform[P][1].conj();

    field[M][0] = VField::term(0, zv(kZ1)) + VField::term(3, zv(kZb2));
    field[M][1] = VField::term(2, -zv(kZb2)) + VField::term(1, zv(kZ1));
    field[M][2] = field[M][0].conj();
    field[M][3] = field[M][1].conj();
    field[P][0] = VField::term(0, zv(kZ1)) + VField::term(1, zv(kZ2));
    field[P][1] = VField::term(0, -zv(kZb2)) + VField::term(1, zv(kZb1));
    field[P][2] = field[P][0].conj();
    field[P][3] = field[P][1].conj();

    // Inverse expansions: coordinate one-forms over each frame coframe.
    // Minus: dz1 = z1 a1 - z2 ab2; dz2 = z2 ab1 + z1 a2;
    //        dzb1/dzb2 by conjugation.
    auto set = [](FrameForm& f, Frame fr,
                  std::initializer_list<std::pair<int, CoeffExpr>> l) {
      f = FrameForm(fr);
      for (auto& [idx, c] : l) f.add(1u << idx, c);
    };
    set(mk(Frame::Minus, kDz1), Frame::Minus, {{0, zv(kZ1)}, {3, -zv(kZ2)}});
    set(mk(Frame::Minus, kDz2), Frame::Minus, {{2, zv(kZ2)}, {1, zv(kZ1)}});
    set(mk(Frame::Minus, kDzb1), Frame::Minus, {{2, zv(kZb1)}, {1, -zv(kZb2)}});
    set(mk(Frame::Minus, kDzb2), Frame::Minus, {{0, zv(kZb2)}, {3, zv(kZb1)}});
    // Plus: dz1 = z1 b1 - zb2 b2; dz2 = z2 b1 + zb1 b2; conjugates.
    set(mk(Frame::Plus, kDz1), Frame::Plus, {{0, zv(kZ1)}, {1, -zv(kZb2)}});
    set(mk(Frame::Plus, kDz2), Frame::Plus, {{0, zv(kZ2)}, {1, zv(kZb1)}});
    set(mk(Frame::Plus, kDzb1), Frame::Plus, {{2, zv(kZb1)}, {3, -zv(kZ2)}});
    set(mk(Frame::Plus, kDzb2), Frame::Plus, {{2, zv(kZb2)}, {3, zv(kZ1)}});
  }
};

const FrameTables& tables() {
  static const FrameTables t;
  return t;
}

}  // namespace

const CoordForm& frame_coform(Frame fr, int idx) {
  return tables().coform[static_cast<int>(fr)][idx];
}

const VField& frame_field(Frame fr, int idx) {
  return tables().field[static_cast<int>(fr)][idx];
}

FrameForm FrameForm::term(Frame fr, unsigned mask, CoeffExpr c) {
  FrameForm f(fr);
  f.add(mask, std::move(c));
  return f;
}

CoeffExpr FrameForm::comp(unsigned mask) const {
  auto it = c_.find(mask);
  return it == c_.end() ? CoeffExpr() : it->second;
}

void FrameForm::add(unsigned mask, const CoeffExpr& c) {
  if (c.is_zero()) return;
  auto it = c_.find(mask);
  if (it == c_.end()) {
    c_.emplace(mask, c);
  } else {
    it->second = it->second + c;
    if (it->second.is_zero()) c_.erase(it);
  }
}

FrameForm FrameForm::operator-() const {
  FrameForm r(fr_);
  for (auto& [m, c] : c_) r.c_.emplace(m, -c);
  return r;
}

FrameForm FrameForm::operator+(const FrameForm& o) const {
  if (fr_ != o.fr_) throw std::domain_error("FrameForm: frame mismatch");
  FrameForm r = *this;
  for (auto& [m, c] : o.c_) r.add(m, c);
  return r;
}

FrameForm FrameForm::operator-(const FrameForm& o) const { return *this + (-o); }

FrameForm FrameForm::operator*(const CoeffExpr& s) const {
  FrameForm r(fr_);
  for (auto& [m, c] : c_) r.add(m, c * s);
  return r;
}

FrameForm FrameForm::conj() const {
  FrameForm r(fr_);
  for (auto& [m, c] : c_) {
    unsigned cm = ((m & 0x3u) << 2) | ((m & 0xCu) >> 2);
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

FrameForm FrameForm::bidegree_part(int p, int q) const {
  FrameForm r(fr_);
  for (auto& [m, c] : c_)
    if (std::popcount(m & 0x3u) == p && std::popcount(m & 0xCu) == q) r.add(m, c);
  return r;
}

bool FrameForm::pure_bidegree(int p, int q) const {
  for (auto& [m, c] : c_)
    if (std::popcount(m & 0x3u) != p || std::popcount(m & 0xCu) != q) return false;
  return true;
}

std::string FrameForm::str() const {
  if (c_.empty()) return "0";
  const bool minus = fr_ == Frame::Minus;
  const char* names[4] = {minus ? "a1" : "b1", minus ? "a2" : "b2",
                          minus ? "ab1" : "bb1", minus ? "ab2" : "bb2"};
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

FrameForm wedge(const FrameForm& a, const FrameForm& b) {
  if (a.frame() != b.frame()) throw std::domain_error("wedge: frame mismatch");
  FrameForm r(a.frame());
  for (auto& [ma, ca] : a.comps())
    for (auto& [mb, cb] : b.comps()) {
      if (ma & mb) continue;
      CoeffExpr c = ca * cb;
      r.add(ma | mb, merge_sign(ma, mb) > 0 ? c : -c);
    }
  return r;
}

FrameForm to_frame(const CoordForm& a, Frame fr) {
  const auto& tab = tables();
  FrameForm r(fr);
  for (auto& [m, c] : a.comps()) {
    FrameForm prod = FrameForm::term(fr, 0, CoeffExpr(1));
    for (int i = 0; i < 4; ++i)
      if (m & (1u << i)) prod = wedge(prod, tab.coord_in_frame[static_cast<int>(fr)][i]);
    r = r + prod * c;
  }
  return r;
}

CoordForm to_coord(const FrameForm& a) {
  const auto& tab = tables();
  CoordForm r;
  for (auto& [m, c] : a.comps()) {
    CoordForm prod(CoeffExpr(1));
    for (int i = 0; i < 4; ++i)
      if (m & (1u << i)) prod = wedge(prod, tab.coform[static_cast<int>(a.frame())][i]);
    r = r + prod * c;
  }
  return r;
}

FrameForm dol(const FrameForm& a, Frame fr) {
  FrameForm r(fr);
  for (int p = 0; p <= 2; ++p)
    for (int q = 0; q <= 2; ++q) {
      FrameForm part = a.bidegree_part(p, q);
      if (part.is_zero()) continue;
      r = r + to_frame(ext_d(to_coord(part)), fr).bidegree_part(p + 1, q);
    }
  return r;
}

FrameForm dolbar(const FrameForm& a, Frame fr) {
  FrameForm r(fr);
  for (int p = 0; p <= 2; ++p)
    for (int q = 0; q <= 2; ++q) {
      FrameForm part = a.bidegree_part(p, q);
      if (part.is_zero()) continue;
      r = r + to_frame(ext_d(to_coord(part)), fr).bidegree_part(p, q + 1);
    }
  return r;
}

FrameForm dol(const CoordForm& a, Frame fr) { return dol(to_frame(a, fr), fr); }
FrameForm dolbar(const CoordForm& a, Frame fr) { return dolbar(to_frame(a, fr), fr); }

}  // namespace hopflab::sym
