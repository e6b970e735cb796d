// Symbolic derivation of the reduced curvature operators.
//
// The Hermitian unknown is represented by opaque symbols f_ij(t) carrying
// formal t-derivative rules; the whole pipeline (Chern connection of h0 f,
// endomorphism-valued dbar, omega-contraction) runs through the exterior
// calculus.  The derivation must close: every contracted coefficient has to
// come out free of coordinates, leaving polynomial tables in the symbols of
// f, f', f'' and f^{-1} that the numeric layer evaluates per grid node.

#include <cmath>
#include <complex>
#include <stdexcept>

#include "hopflab/hesolver.hpp"

namespace hopflab::hesolver {

using bundles::CMat;
using bundles::FormMat;
using sym::CoeffExpr;
using sym::CoordForm;
using sym::Frame;
using sym::FrameForm;
using sym::GaussRat;
using sym::Monomial;
using sym::Poly;
using sym::Rat;
using sym::SymTab;
using sym::Valuation;

namespace {

// Fundamental two-form and volume of one side, expressed over its own frame.
FrameForm frame_omega(Frame fr) {
  auto& tab = SymTab::get();
  CoeffExpr half_i_over_pi =
      CoeffExpr(Poly::var(tab.pi, -1)) * CoeffExpr(GaussRat(Rat(0), Rat(1, 2)));
  FrameForm f1 = FrameForm::term(fr, 1u << 0, CoeffExpr(1));
  FrameForm f2 = FrameForm::term(fr, 1u << 1, CoeffExpr(1));
  FrameForm fb1 = FrameForm::term(fr, 1u << 2, CoeffExpr(1));
  FrameForm fb2 = FrameForm::term(fr, 1u << 3, CoeffExpr(1));
  return (wedge(f1, fb1) + wedge(f2, fb2)) * half_i_over_pi;
}

// i Lambda of a two-form over the frame: i (eta ^ omega) / vol.
CoeffExpr i_lambda(const FrameForm& eta, Frame fr) {
  FrameForm om = frame_omega(fr);
  FrameForm vol = wedge(om, om) * sym::frac(1, 2);
  CoeffExpr num = wedge(eta, om).comp(0xF);
  CoeffExpr den = vol.comp(0xF);
  if (num.is_zero()) return CoeffExpr();
  return CoeffExpr::i() * (num / den);
}

struct SymbolSet {
  int rank;
  // ids[k][i*rank+j]: symbol of the (i, j) entry of the k-th t-derivative of
  // f for k in 0..3, and of f^{-1} for k = 4.
  std::vector<int> ids[5];
};

std::string entry_name(const char* base, int k, int i, int j) {
  return std::string(base) + std::to_string(k) + "_" + std::to_string(i) +
         std::to_string(j);
}

// Intern the Hermitian symbol family for the given rank and install the
// t-derivative rules (chain for f, dW = -W F' W for the inverse).
SymbolSet make_symbols(int r) {
  auto& tab = SymTab::get();
  SymbolSet s;
  s.rank = r;
  for (int k = 0; k < 5; ++k) s.ids[k].assign(r * r, -1);
  auto intern_herm = [&](const char* base, int k, std::vector<int>& out) {
    for (int i = 0; i < r; ++i) out[i * r + i] = tab.intern_real(entry_name(base, k, i, i));
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j) {
        auto [a, b] =
            tab.intern_pair(entry_name(base, k, i, j), entry_name(base, k, j, i));
        out[i * r + j] = a;
        out[j * r + i] = b;
      }
  };
  for (int k = 0; k < 4; ++k) intern_herm("rf", k, s.ids[k]);
  intern_herm("rw", 0, s.ids[4]);
  for (int k = 0; k < 3; ++k)
    for (int e = 0; e < r * r; ++e)
      tab.set_tderiv(s.ids[k][e], Poly::var(s.ids[k + 1][e]));
  // d/dt f^{-1} = -f^{-1} f' f^{-1}.
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      Poly rule;
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
          rule = rule - Poly::var(s.ids[4][i * r + a]) *
                            Poly::var(s.ids[1][a * r + b]) *
                            Poly::var(s.ids[4][b * r + j]);
      tab.set_tderiv(s.ids[4][i * r + j], rule);
    }
  return s;
}

std::vector<CoeffExpr> symbol_matrix(const SymbolSet& s, int k) {
  std::vector<CoeffExpr> m(s.rank * s.rank);
  for (int e = 0; e < s.rank * s.rank; ++e) m[e] = CoeffExpr::var(s.ids[k][e]);
  return m;
}

std::vector<CoeffExpr> cmat_to_coeff(const CMat& c, bool adjoint) {
  std::vector<CoeffExpr> m(c.n * c.n);
  for (int i = 0; i < c.n; ++i)
    for (int j = 0; j < c.n; ++j)
      m[i * c.n + j] = CoeffExpr(adjoint ? c.at(j, i).conj() : c.at(i, j));
  return m;
}

std::vector<CoeffExpr> mat_mul(int r, const std::vector<CoeffExpr>& x,
                               const std::vector<CoeffExpr>& y) {
  std::vector<CoeffExpr> out(r * r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      CoeffExpr acc;
      for (int k = 0; k < r; ++k) acc = acc + x[i * r + k] * y[k * r + j];
      out[i * r + j] = acc;
    }
  return out;
}

std::vector<CoeffExpr> mat_sub(const std::vector<CoeffExpr>& x,
                               const std::vector<CoeffExpr>& y) {
  std::vector<CoeffExpr> out(x.size());
  for (size_t e = 0; e < x.size(); ++e) out[e] = x[e] - y[e];
  return out;
}

// Evaluate the numeric value of pi^e times a Gaussian rational.
std::complex<double> numeric_const(const GaussRat& c, int pi_exp) {
  return c.to_complex() * std::pow(M_PI, pi_exp);
}

}  // namespace

struct ReducedOperatorBuilder {
  static void derive_side(ReducedOperator& op, const BundleStructure& s,
                          int side, const SymbolSet& syms) {
    const int r = s.rank;
    Frame fr = side == 0 ? Frame::Plus : Frame::Minus;
    const CMat& c = side == 0 ? s.cplus : s.cminus;
    auto F0 = symbol_matrix(syms, 0);
    auto W = symbol_matrix(syms, 4);
    auto Cm = cmat_to_coeff(c, false);
    auto Cd = cmat_to_coeff(c, true);

    FrameForm leg1 = FrameForm::term(fr, 1u << 0, CoeffExpr(1));
    FrameForm legb1 = FrameForm::term(fr, 1u << 2, CoeffExpr(1));

    // (1,0)-part of the h0-Chern covariant derivative of f:
    //   D'f = del f - [C^dagger, f] leg1   (entrywise del via the calculus).
    auto bracket = mat_sub(mat_mul(r, Cd, F0), mat_mul(r, F0, Cd));
    std::vector<FrameForm> dprime(r * r, FrameForm(fr));
    for (int e = 0; e < r * r; ++e)
      dprime[e] = sym::dol(CoordForm(F0[e]), fr) - leg1 * bracket[e];

    // g = f^{-1} D'f, then the End-valued dbar:
    //   dbar g + A ^ g - g ^ A with A = C legb1.
    std::vector<FrameForm> g(r * r, FrameForm(fr));
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        FrameForm acc(fr);
        for (int k = 0; k < r; ++k) acc = acc + dprime[k * r + j] * W[i * r + k];
        g[i * r + j] = acc;
      }
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        // End-valued dbar on a one-form: dbar g + A ^ g + g ^ A (the graded
        // commutator picks up the sign of the form degree).
        FrameForm curv = sym::dolbar(g[i * r + j], fr);
        for (int k = 0; k < r; ++k) {
          curv = curv + wedge(legb1, g[k * r + j]) * Cm[i * r + k];
          curv = curv + wedge(g[i * r + k], legb1) * Cm[k * r + j];
        }
        CoeffExpr val = i_lambda(curv, fr);
        compile_entry(op, side, i * r + j, val, syms);
      }
  }

  static void compile_entry(ReducedOperator& op, int side, int entry,
                            const CoeffExpr& val, const SymbolSet& syms) {
    auto& tab = SymTab::get();
    if (!val.coord_free())
      throw std::logic_error(
          "reduced operator: contraction did not close to coordinate-free "
          "coefficients");
    const int r = syms.rank;
    auto slot_of = [&](int id) {
      for (int k = 0; k < 5; ++k)
        for (int e = 0; e < r * r; ++e)
          if (syms.ids[k][e] == id) {
            if (k == 3)
              throw std::logic_error(
                  "reduced operator: third derivative leaked into the tables");
            return (k == 4 ? 3 : k) * r * r + e;
          }
      throw std::logic_error("reduced operator: unexpected symbol " +
                             tab.name(id));
    };
    for (const auto& [mono, coef] : val.num().terms()) {
      ReducedOperator::CTerm term;
      int pi_exp = 0;
      for (const auto& [id, exp] : mono.f) {
        if (id == tab.pi) {
          pi_exp = exp;
          continue;
        }
        term.powers.emplace_back(slot_of(id), exp);
      }
      term.c = numeric_const(coef, pi_exp);
      op.table_[side][entry].push_back(std::move(term));
    }
  }
};

ReducedOperator ReducedOperator::derive(const BundleStructure& s,
                                        const Geometry&) {
  if (s.rank < 1 || s.rank > 4)
    throw std::invalid_argument("reduced operator: rank out of range");
  ReducedOperator op;
  op.rank_ = s.rank;
  SymbolSet syms = make_symbols(s.rank);
  ReducedOperatorBuilder::derive_side(op, s, 0, syms);
  ReducedOperatorBuilder::derive_side(op, s, 1, syms);
  return op;
}

Eigen::MatrixXcd ReducedOperator::apply_side(int side,
                                             const Eigen::MatrixXcd& f,
                                             const Eigen::MatrixXcd& fp,
                                             const Eigen::MatrixXcd& fpp) const {
  const int r = rank_;
  Eigen::MatrixXcd w = f.inverse();
  std::vector<std::complex<double>> slots(4 * r * r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      slots[0 * r * r + i * r + j] = f(i, j);
      slots[1 * r * r + i * r + j] = fp(i, j);
      slots[2 * r * r + i * r + j] = fpp(i, j);
      slots[3 * r * r + i * r + j] = w(i, j);
    }
  Eigen::MatrixXcd out(r, r);
  for (int e = 0; e < r * r; ++e) {
    std::complex<double> acc = 0;
    for (const auto& term : table_[side][e]) {
      std::complex<double> prod = term.c;
      for (auto [slot, exp] : term.powers)
        for (int q = 0; q < exp; ++q) prod *= slots[slot];
      acc += prod;
    }
    out(e / r, e % r) = acc;
  }
  return out;
}

Eigen::MatrixXcd ReducedOperator::apply(double alpha, const Eigen::MatrixXcd& f,
                                        const Eigen::MatrixXcd& fp,
                                        const Eigen::MatrixXcd& fpp) const {
  return alpha * apply_side(0, f, fp, fpp) +
         (1 - alpha) * apply_side(1, f, fp, fpp);
}

int ReducedOperator::term_count(int side) const {
  int n = 0;
  for (int e = 0; e < rank_ * rank_; ++e)
    n += static_cast<int>(table_[side][e].size());
  return n;
}

// ---------------------------------------------------------------------------
// Scalar conformal operator.

ScalarOperator ScalarOperator::derive(const Geometry&) {
  auto& tab = SymTab::get();
  int u0 = tab.intern_real("ru0"), u1 = tab.intern_real("ru1"),
      u2 = tab.intern_real("ru2"), u3 = tab.intern_real("ru3");
  tab.set_tderiv(u0, Poly::var(u1));
  tab.set_tderiv(u1, Poly::var(u2));
  tab.set_tderiv(u2, Poly::var(u3));

  ScalarOperator op{};
  double upp[2];
  double up[2];
  for (int side = 0; side < 2; ++side) {
    Frame fr = side == 0 ? Frame::Plus : Frame::Minus;
    FrameForm du = sym::dol(CoordForm(CoeffExpr::var(u0)), fr);
    CoeffExpr val = i_lambda(sym::dolbar(du, fr), fr);
    if (!val.coord_free())
      throw std::logic_error("scalar operator: contraction did not close");
    // The result must be exactly linear: val = a u'' + b u'.
    CoeffExpr a = val.opaque_partial(u2);
    CoeffExpr b = val.opaque_partial(u1);
    if (!a.num().coord_free() || !b.num().coord_free())
      throw std::logic_error("scalar operator: nonlinear reduction");
    CoeffExpr rem = val - a * CoeffExpr::var(u2) - b * CoeffExpr::var(u1);
    if (!rem.is_zero())
      throw std::logic_error("scalar operator: unexpected lower-order terms");
    auto eval_const = [&](const CoeffExpr& c) {
      Valuation v;
      v.opaque[tab.pi] = M_PI;
      std::complex<double> z = c.eval(v);
      if (std::abs(z.imag()) > 1e-14)
        throw std::logic_error("scalar operator: non-real coefficient");
      return z.real();
    };
    upp[side] = eval_const(a);
    up[side] = eval_const(b);
  }
  if (std::abs(upp[0] - upp[1]) > 1e-13)
    throw std::logic_error("scalar operator: principal symbols disagree");
  op.coeff_upp = upp[0];
  op.coeff_up_plus = up[0];
  op.coeff_up_minus = up[1];
  return op;
}

Eigen::MatrixXd ScalarOperator::matrix(double alpha,
                                       const SpectralGrid& grid) const {
  return coeff_upp * grid.d2 + coeff_up(alpha) * grid.d1;
}

// ---------------------------------------------------------------------------
// Background mean curvature.

MeanCurvature background_mean_curvature(const BundleStructure& s,
                                        const Geometry& g) {
  auto& tab = SymTab::get();
  MeanCurvature mc;
  auto h0 = bundles::HermitianBackground::ident(s.rank);
  Valuation v;
  v.opaque[tab.pi] = M_PI;
  for (int side = 0; side < 2; ++side) {
    Frame fr = side == 0 ? Frame::Plus : Frame::Minus;
    FormMat f = bundles::chern_curvature(s, h0, fr);
    Eigen::MatrixXcd k(s.rank, s.rank);
    for (int i = 0; i < s.rank; ++i)
      for (int j = 0; j < s.rank; ++j) {
        CoeffExpr val = i_lambda(sym::to_frame(f.at(i, j), fr), fr);
        if (!val.coord_free())
          throw std::logic_error("mean curvature: contraction did not close");
        k(i, j) = val.eval(v);
      }
    (side == 0 ? mc.k_plus : mc.k_minus) = k;
  }
  (void)g;
  return mc;
}

double MeanCurvature::lambda(double alpha) const {
  std::complex<double> tr = k_alpha(alpha).trace();
  return tr.real() / static_cast<double>(k_plus.rows());
}

Eigen::MatrixXcd MeanCurvature::k0(double alpha) const {
  Eigen::MatrixXcd k = k_alpha(alpha);
  return k - lambda(alpha) * Eigen::MatrixXcd::Identity(k.rows(), k.cols());
}

}  // namespace hopflab::hesolver
