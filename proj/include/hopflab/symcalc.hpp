#pragma once

// Exact scalar expressions on C^2 \ {0}.
//
// A CoeffExpr is a fraction  P / r2^k  where P is a polynomial with
// Gaussian-rational coefficients in the coordinate symbols
// z1, zb1, z2, zb2 (zb* are formal conjugates) together with opaque
// constant symbols (pi, lntau, user constants), and
// r2 := z1*zb1 + z2*zb2.  Opaque symbols may carry negative exponents,
// so constants like 1/(2*pi) stay exact.  Fractions are kept normalized
// (P not divisible by r2 unless k == 0), which makes equality decidable
// by direct comparison.

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hopflab::sym {

using Rat = boost::multiprecision::cpp_rational;

// ---------------------------------------------------------------------------
// Gaussian rationals.

struct GaussRat {
  Rat re, im;

  GaussRat() = default;
  GaussRat(Rat r) : re(std::move(r)) {}
  GaussRat(long r) : re(r) {}
  GaussRat(Rat r, Rat i) : re(std::move(r)), im(std::move(i)) {}

  static GaussRat i() { return GaussRat(Rat(0), Rat(1)); }

  bool is_zero() const { return re == 0 && im == 0; }
  GaussRat conj() const { return GaussRat(re, -im); }

  GaussRat operator-() const { return GaussRat(-re, -im); }
  GaussRat operator+(const GaussRat& o) const { return GaussRat(re + o.re, im + o.im); }
  GaussRat operator-(const GaussRat& o) const { return GaussRat(re - o.re, im - o.im); }
  GaussRat operator*(const GaussRat& o) const {
    return GaussRat(re * o.re - im * o.im, re * o.im + im * o.re);
  }
  GaussRat inverse() const {
    Rat n = re * re + im * im;
    if (n == 0) throw std::domain_error("GaussRat: division by zero");
    return GaussRat(re / n, -im / n);
  }
  GaussRat operator/(const GaussRat& o) const { return *this * o.inverse(); }

  bool operator==(const GaussRat& o) const { return re == o.re && im == o.im; }
  bool operator!=(const GaussRat& o) const { return !(*this == o); }

  std::complex<double> to_complex() const {
    return {static_cast<double>(re), static_cast<double>(im)};
  }
  std::string str() const;
};

// Exact square root in Q(i), when one exists.
std::optional<GaussRat> gauss_sqrt(const GaussRat& v);

// ---------------------------------------------------------------------------
// Symbol table.  Coordinate symbols have fixed ids; opaque symbols are
// interned on demand with an explicit conjugation partner (self for real
// constants).  An opaque symbol may carry a "time derivative" rule used by
// the invariant-reduction machinery: d/dt of the symbol, as a polynomial in
// other symbols, where t = ln r2.

enum : int { kZ1 = 0, kZb1 = 1, kZ2 = 2, kZb2 = 3, kNumCoord = 4 };

class Poly;

class SymTab {
 public:
  static SymTab& get();

  int intern_real(const std::string& name);                     // conj = self
  std::pair<int, int> intern_pair(const std::string& name,
                                  const std::string& conj_name);
  int conj_of(int id) const { return conj_[id]; }
  const std::string& name(int id) const { return names_[id]; }
  int lookup(const std::string& name) const;  // -1 if absent
  static bool is_coord(int id) { return id < kNumCoord; }

  void set_tderiv(int id, Poly p);
  const Poly* tderiv(int id) const;
  bool has_any_tderiv() const { return has_tderiv_; }

  int pi;     // circle constant
  int lntau;  // log of the Hopf parameter

 private:
  SymTab();
  std::vector<std::string> names_;
  std::vector<int> conj_;
  std::vector<std::shared_ptr<Poly>> tderivs_;
  bool has_tderiv_ = false;
};

// ---------------------------------------------------------------------------
// Monomials and polynomials.

struct Monomial {
  // (symbol id, exponent), sorted by id, exponents nonzero.  Coordinate
  // exponents are kept nonnegative; opaque exponents may be negative.
  std::vector<std::pair<int, int>> f;

  static Monomial one() { return {}; }
  static Monomial var(int sym, int exp = 1);
  bool is_one() const { return f.empty(); }
  int exp_of(int sym) const;
  Monomial times(const Monomial& o) const;
  Monomial conj() const;
  bool coord_free() const;  // no coordinate symbols
  // Divide by another monomial; nullopt if a coordinate exponent would go
  // negative (opaque exponents are free to go negative).
  std::optional<Monomial> div(const Monomial& o) const;

  bool operator==(const Monomial& o) const { return f == o.f; }
  bool operator<(const Monomial& o) const { return f < o.f; }
  // Monomial order used for division: lex with z1 > zb1 > z2 > zb2 > opaque.
  static bool lex_less(const Monomial& a, const Monomial& b);
};

struct Valuation {
  std::complex<double> z1{1.0, 0.0}, z2{0.0, 0.0};
  std::map<int, std::complex<double>> opaque;
  std::complex<double> of_symbol(int id) const;
};

class Poly {
 public:
  Poly() = default;
  static Poly constant(GaussRat c);
  static Poly var(int sym, int exp = 1);
  static Poly r2();  // z1*zb1 + z2*zb2

  bool is_zero() const { return t_.empty(); }
  bool is_constant() const;
  GaussRat constant_value() const;  // requires is_constant()
  bool coord_free() const;          // no coordinate symbols in any term
  const std::map<Monomial, GaussRat>& terms() const { return t_; }

  void add_term(const Monomial& m, const GaussRat& c);

  Poly operator-() const;
  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly scaled(const GaussRat& c) const;
  Poly conj() const;

  // Partial derivative with respect to any symbol (formal, Laurent-aware).
  Poly partial(int sym) const;
  // Exact division; nullopt if not divisible.
  std::optional<Poly> div_exact(const Poly& divisor) const;

  std::complex<double> eval(const Valuation& v) const;
  bool operator==(const Poly& o) const { return t_ == o.t_; }
  std::string str() const;

 private:
  std::map<Monomial, GaussRat> t_;
};

// ---------------------------------------------------------------------------
// Normalized fractions P / r2^k.

class CoeffExpr {
 public:
  CoeffExpr() = default;
  CoeffExpr(long n) : num_(Poly::constant(GaussRat(n))) {}
  CoeffExpr(GaussRat c) : num_(Poly::constant(std::move(c))) {}
  CoeffExpr(Poly p, int r2pow = 0) : num_(std::move(p)), k_(r2pow) { normalize(); }

  static CoeffExpr var(int sym, int exp = 1) { return CoeffExpr(Poly::var(sym, exp)); }
  static CoeffExpr i() { return CoeffExpr(GaussRat::i()); }
  static CoeffExpr r2(int pow = 1);

  const Poly& num() const { return num_; }
  int r2pow() const { return k_; }

  bool is_zero() const { return num_.is_zero(); }
  bool is_constant() const { return k_ == 0 && num_.is_constant(); }
  GaussRat constant_value() const { return num_.constant_value(); }
  bool coord_free() const { return k_ == 0 && num_.coord_free(); }

  CoeffExpr operator-() const { return CoeffExpr(-num_, k_, nonorm{}); }
  CoeffExpr operator+(const CoeffExpr& o) const;
  CoeffExpr operator-(const CoeffExpr& o) const { return *this + (-o); }
  CoeffExpr operator*(const CoeffExpr& o) const;
  CoeffExpr conj() const { return CoeffExpr(num_.conj(), k_, nonorm{}); }

  // Division by an invertible coefficient: any fraction whose numerator is a
  // single term with no coordinate symbols, times an r2 power.
  CoeffExpr operator/(const CoeffExpr& o) const;
  CoeffExpr div_r2(int pow = 1) const { return CoeffExpr(num_, k_ + pow); }

  // Partial derivative with respect to a coordinate symbol (quotient rule).
  CoeffExpr coord_partial(int sym) const;
  // Partial with respect to an opaque symbol.
  CoeffExpr opaque_partial(int sym) const { return CoeffExpr(num_.partial(sym), k_, nonorm{}); }

  std::complex<double> eval(const Valuation& v) const;
  bool operator==(const CoeffExpr& o) const { return k_ == o.k_ && num_ == o.num_; }
  bool operator!=(const CoeffExpr& o) const { return !(*this == o); }
  std::string str() const;

 private:
  struct nonorm {};
  CoeffExpr(Poly p, int k, nonorm) : num_(std::move(p)), k_(k) {}
  void normalize();
  Poly num_;
  int k_ = 0;
};

// Convenience: exact rational constant p/q.
CoeffExpr frac(long p, long q);

}  // namespace hopflab::sym
