#include "hopflab/symcalc.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace hopflab::sym {

// ---------------------------------------------------------------------------
// GaussRat

std::string GaussRat::str() const {
  std::ostringstream os;
  if (im == 0) {
    os << re;
  } else if (re == 0) {
    os << im << "*i";
  } else {
    os << "(" << re << (im > 0 ? "+" : "") << im << "*i)";
  }
  return os.str();
}

namespace {

using boost::multiprecision::cpp_int;

std::optional<cpp_int> int_sqrt_exact(const cpp_int& n) {
  if (n < 0) return std::nullopt;
  cpp_int r = boost::multiprecision::sqrt(n);
  if (r * r != n) return std::nullopt;
  return r;
}

std::optional<Rat> rat_sqrt_exact(const Rat& q) {
  if (q < 0) return std::nullopt;
  auto n = int_sqrt_exact(numerator(q));
  auto d = int_sqrt_exact(denominator(q));
  if (!n || !d) return std::nullopt;
  return Rat(*n, *d);
}

}  // namespace

std::optional<GaussRat> gauss_sqrt(const GaussRat& v) {
  if (v.im == 0) {
    if (auto r = rat_sqrt_exact(v.re)) return GaussRat(*r);
    if (auto r = rat_sqrt_exact(-v.re)) return GaussRat(Rat(0), *r);
    return std::nullopt;
  }
  // (x+iy)^2 = v  =>  x^2 = (Re v + |v|)/2, y = Im v / (2x).
  auto norm = rat_sqrt_exact(v.re * v.re + v.im * v.im);
  if (!norm) return std::nullopt;
  auto x = rat_sqrt_exact((v.re + *norm) / 2);
  if (!x || *x == 0) return std::nullopt;
  return GaussRat(*x, v.im / (2 * (*x)));
}

// ---------------------------------------------------------------------------
// SymTab

SymTab::SymTab() {
  names_ = {"z1", "zb1", "z2", "zb2"};
  conj_ = {kZb1, kZ1, kZb2, kZ2};
  tderivs_.resize(4);
  pi = intern_real("pi");
  lntau = intern_real("lntau");
}

SymTab& SymTab::get() {
  static SymTab tab;
  return tab;
}

int SymTab::lookup(const std::string& name) const {
  for (size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i);
  return -1;
}

int SymTab::intern_real(const std::string& name) {
  int id = lookup(name);
  if (id >= 0) return id;
  names_.push_back(name);
  conj_.push_back(static_cast<int>(names_.size()) - 1);
  tderivs_.emplace_back();
  return static_cast<int>(names_.size()) - 1;
}

std::pair<int, int> SymTab::intern_pair(const std::string& name,
                                        const std::string& conj_name) {
  int a = lookup(name);
  if (a >= 0) return {a, conj_[a]};
  a = static_cast<int>(names_.size());
  names_.push_back(name);
  names_.push_back(conj_name);
  conj_.push_back(a + 1);
  conj_.push_back(a);
  tderivs_.emplace_back();
  tderivs_.emplace_back();
  return {a, a + 1};
}

void SymTab::set_tderiv(int id, Poly p) {
  tderivs_[id] = std::make_shared<Poly>(std::move(p));
  has_tderiv_ = true;
}

const Poly* SymTab::tderiv(int id) const {
  return tderivs_[id] ? tderivs_[id].get() : nullptr;
}

// ---------------------------------------------------------------------------
// Monomial

Monomial Monomial::var(int sym, int exp) {
  Monomial m;
  if (exp != 0) m.f.push_back({sym, exp});
  return m;
}

int Monomial::exp_of(int sym) const {
  for (auto& [s, e] : f)
    if (s == sym) return e;
  return 0;
}

Monomial Monomial::times(const Monomial& o) const {
  Monomial r;
  size_t i = 0, j = 0;
  while (i < f.size() || j < o.f.size()) {
    if (j == o.f.size() || (i < f.size() && f[i].first < o.f[j].first)) {
      r.f.push_back(f[i++]);
    } else if (i == f.size() || o.f[j].first < f[i].first) {
      r.f.push_back(o.f[j++]);
    } else {
      int e = f[i].second + o.f[j].second;
      if (e != 0) r.f.push_back({f[i].first, e});
      ++i, ++j;
    }
  }
  return r;
}

Monomial Monomial::conj() const {
  auto& tab = SymTab::get();
  Monomial r;
  for (auto& [s, e] : f) r.f.push_back({tab.conj_of(s), e});
  std::sort(r.f.begin(), r.f.end());
  return r;
}

bool Monomial::coord_free() const {
  for (auto& [s, e] : f)
    if (SymTab::is_coord(s)) return false;
  return true;
}

std::optional<Monomial> Monomial::div(const Monomial& o) const {
  Monomial inv;
  for (auto& [s, e] : o.f) inv.f.push_back({s, -e});
  Monomial r = times(inv);
  for (auto& [s, e] : r.f)
    if (SymTab::is_coord(s) && e < 0) return std::nullopt;
  return r;
}

bool Monomial::lex_less(const Monomial& a, const Monomial& b) {
  size_t i = 0, j = 0;
  while (i < a.f.size() || j < b.f.size()) {
    int sa = i < a.f.size() ? a.f[i].first : INT32_MAX;
    int sb = j < b.f.size() ? b.f[j].first : INT32_MAX;
    if (sa < sb) {
      // a has this symbol, b does not: positive exponent makes a larger.
      if (a.f[i].second != 0) return a.f[i].second < 0;
      ++i;
    } else if (sb < sa) {
      if (b.f[j].second != 0) return b.f[j].second > 0;
      ++j;
    } else {
      if (a.f[i].second != b.f[j].second) return a.f[i].second < b.f[j].second;
      ++i, ++j;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Valuation

std::complex<double> Valuation::of_symbol(int id) const {
  switch (id) {
    case kZ1: return z1;
    case kZb1: return std::conj(z1);
    case kZ2: return z2;
    case kZb2: return std::conj(z2);
    default: break;
  }
  auto it = opaque.find(id);
  if (it != opaque.end()) return it->second;
  auto& tab = SymTab::get();
  // Unvalued opaque symbols: conjugate partner may be valued.
  auto jt = opaque.find(tab.conj_of(id));
  if (jt != opaque.end()) return std::conj(jt->second);
  throw std::domain_error("Valuation: no value for symbol " + tab.name(id));
}

// ---------------------------------------------------------------------------
// Poly

Poly Poly::constant(GaussRat c) {
  Poly p;
  p.add_term(Monomial::one(), c);
  return p;
}

Poly Poly::var(int sym, int exp) {
  Poly p;
  p.add_term(Monomial::var(sym, exp), GaussRat(1));
  return p;
}

Poly Poly::r2() {
  Poly p;
  p.add_term(Monomial::var(kZ1).times(Monomial::var(kZb1)), GaussRat(1));
  p.add_term(Monomial::var(kZ2).times(Monomial::var(kZb2)), GaussRat(1));
  return p;
}

bool Poly::is_constant() const {
  return t_.empty() || (t_.size() == 1 && t_.begin()->first.is_one());
}

GaussRat Poly::constant_value() const {
  if (t_.empty()) return GaussRat(0);
  if (!is_constant()) throw std::domain_error("Poly: not a constant");
  return t_.begin()->second;
}

bool Poly::coord_free() const {
  for (auto& [m, c] : t_)
    if (!m.coord_free()) return false;
  return true;
}

void Poly::add_term(const Monomial& m, const GaussRat& c) {
  if (c.is_zero()) return;
  auto it = t_.find(m);
  if (it == t_.end()) {
    t_.emplace(m, c);
  } else {
    it->second = it->second + c;
    if (it->second.is_zero()) t_.erase(it);
  }
}

Poly Poly::operator-() const {
  Poly r;
  for (auto& [m, c] : t_) r.t_.emplace(m, -c);
  return r;
}

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  for (auto& [m, c] : o.t_) r.add_term(m, c);
  return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator*(const Poly& o) const {
  Poly r;
  for (auto& [m1, c1] : t_)
    for (auto& [m2, c2] : o.t_) r.add_term(m1.times(m2), c1 * c2);
  return r;
}

Poly Poly::scaled(const GaussRat& c) const {
  Poly r;
  if (c.is_zero()) return r;
  for (auto& [m, v] : t_) r.t_.emplace(m, v * c);
  return r;
}

Poly Poly::conj() const {
  Poly r;
  for (auto& [m, c] : t_) r.add_term(m.conj(), c.conj());
  return r;
}

Poly Poly::partial(int sym) const {
  Poly r;
  for (auto& [m, c] : t_) {
    int e = m.exp_of(sym);
    if (e == 0) continue;
    r.add_term(m.times(Monomial::var(sym, -1)), c * GaussRat(Rat(e)));
  }
  return r;
}

std::optional<Poly> Poly::div_exact(const Poly& divisor) const {
  if (divisor.is_zero()) throw std::domain_error("Poly: division by zero");
  // Single-divisor multivariate division in the lex order; exact iff every
  // leading term of the running remainder is divisible by LT(divisor).
  auto lead = [](const Poly& p) {
    auto it = p.t_.begin();
    auto best = it;
    for (++it; it != p.t_.end(); ++it)
      if (Monomial::lex_less(best->first, it->first)) best = it;
    return best;
  };
  auto dl = lead(divisor);
  Poly q, r = *this;
  while (!r.is_zero()) {
    auto rl = lead(r);
    auto m = rl->first.div(dl->first);
    if (!m) return std::nullopt;
    GaussRat c = rl->second / dl->second;
    q.add_term(*m, c);
    Poly sub;
    for (auto& [dm, dc] : divisor.t_) sub.add_term(dm.times(*m), dc * c);
    r = r - sub;
  }
  return q;
}

std::complex<double> Poly::eval(const Valuation& v) const {
  std::complex<double> acc{0.0, 0.0};
  for (auto& [m, c] : t_) {
    std::complex<double> term = c.to_complex();
    for (auto& [s, e] : m.f) {
      std::complex<double> base = v.of_symbol(s);
      term *= (e >= 0) ? std::pow(base, e) : 1.0 / std::pow(base, -e);
    }
    acc += term;
  }
  return acc;
}

std::string Poly::str() const {
  if (t_.empty()) return "0";
  auto& tab = SymTab::get();
  std::ostringstream os;
  bool first = true;
  for (auto& [m, c] : t_) {
    if (!first) os << " + ";
    first = false;
    os << c.str();
    for (auto& [s, e] : m.f) {
      os << "*" << tab.name(s);
      if (e != 1) os << "^" << e;
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// CoeffExpr

CoeffExpr CoeffExpr::r2(int pow) {
  if (pow >= 0) {
    Poly p = Poly::constant(GaussRat(1));
    for (int i = 0; i < pow; ++i) p = p * Poly::r2();
    return CoeffExpr(p);
  }
  return CoeffExpr(Poly::constant(GaussRat(1)), -pow);
}

void CoeffExpr::normalize() {
  if (num_.is_zero()) {
    k_ = 0;
    return;
  }
  static const Poly r2poly = Poly::r2();
  while (k_ > 0) {
    auto q = num_.div_exact(r2poly);
    if (!q) break;
    num_ = std::move(*q);
    --k_;
  }
}

CoeffExpr CoeffExpr::operator+(const CoeffExpr& o) const {
  int k = std::max(k_, o.k_);
  Poly a = num_, b = o.num_;
  for (int i = k_; i < k; ++i) a = a * Poly::r2();
  for (int i = o.k_; i < k; ++i) b = b * Poly::r2();
  return CoeffExpr(a + b, k);
}

CoeffExpr CoeffExpr::operator*(const CoeffExpr& o) const {
  return CoeffExpr(num_ * o.num_, k_ + o.k_);
}

CoeffExpr CoeffExpr::operator/(const CoeffExpr& o) const {
  if (o.is_zero()) throw std::domain_error("CoeffExpr: division by zero");
  if (o.num_.terms().size() != 1 || !o.num_.coord_free())
    throw std::domain_error("CoeffExpr: divisor must be a constant term times an r2 power");
  auto& [m, c] = *o.num_.terms().begin();
  Monomial minv;
  for (auto& [s, e] : m.f) minv.f.push_back({s, -e});
  Poly p;
  for (auto& [mm, cc] : num_.terms()) p.add_term(mm.times(minv), cc / c);
  return CoeffExpr(p, k_ - o.k_);
}

CoeffExpr CoeffExpr::coord_partial(int sym) const {
  if (!SymTab::is_coord(sym)) throw std::domain_error("coord_partial: opaque symbol");
  // d(P/r2^k) = (P' r2 - k P dr2/dsym) / r2^(k+1)
  Poly dnum = num_.partial(sym);
  if (k_ == 0) return CoeffExpr(dnum);
  Poly dr2 = Poly::r2().partial(sym);
  return CoeffExpr(dnum * Poly::r2() - num_.scaled(GaussRat(Rat(k_))) * dr2, k_ + 1);
}

std::complex<double> CoeffExpr::eval(const Valuation& v) const {
  std::complex<double> n = num_.eval(v);
  if (k_ == 0) return n;
  std::complex<double> r2 = v.z1 * std::conj(v.z1) + v.z2 * std::conj(v.z2);
  return n / std::pow(r2, k_);
}

std::string CoeffExpr::str() const {
  if (k_ == 0) return num_.str();
  std::ostringstream os;
  os << "(" << num_.str() << ")/r2";
  if (k_ != 1) os << "^" << k_;
  return os.str();
}

CoeffExpr frac(long p, long q) { return CoeffExpr(GaussRat(Rat(p, q))); }

}  // namespace hopflab::sym
