#pragma once

// Holomorphic structure pairs on trivial rank-1 and rank-2 bundles over the
// Hopf surface: Chern connections and curvatures, plus/minus degrees,
// alpha-slopes, commutation-defect computation, and stability arithmetic.
//
// Every structure in scope is invariant: the (0,1) connection matrices are
// constant multiples of the first conjugate coframe leg (bb1 on the plus
// side, ab1 on the minus side).  Degrees are extracted exactly as the
// volume-form coefficient of tr F wedge omega, normalized so that the
// pullback line bundles of degree m have degree m on their own side.

#include <complex>
#include <optional>
#include <vector>

#include "hopflab/hopf.hpp"

namespace hopflab::bundles {

using sym::CoeffExpr;
using sym::CoordForm;
using sym::Frame;
using sym::GaussRat;
using sym::Rat;

// ---------------------------------------------------------------------------
// Small exact matrices.

struct CMat {
  int n = 0;
  std::vector<GaussRat> a;  // row-major

  CMat() = default;
  explicit CMat(int size) : n(size), a(size * size) {}
  static CMat ident(int n);

  GaussRat& at(int i, int j) { return a[i * n + j]; }
  const GaussRat& at(int i, int j) const { return a[i * n + j]; }

  bool is_zero() const;
  bool is_hermitian() const;
  GaussRat trace() const;

  CMat operator+(const CMat& o) const;
  CMat operator-(const CMat& o) const;
  CMat operator*(const CMat& o) const;
  CMat scaled(const GaussRat& c) const;
  CMat adjoint() const;  // conjugate transpose
};

CMat commutator(const CMat& x, const CMat& y);

// Matrices of forms (curvatures, connection matrices).
struct FormMat {
  int n = 0;
  std::vector<CoordForm> a;

  FormMat() = default;
  explicit FormMat(int size) : n(size), a(size * size) {}

  CoordForm& at(int i, int j) { return a[i * n + j]; }
  const CoordForm& at(int i, int j) const { return a[i * n + j]; }

  bool is_zero() const;
  CoordForm trace() const;
  FormMat operator+(const FormMat& o) const;
  FormMat operator-(const FormMat& o) const;
  FormMat adjoint() const;  // entrywise conj + transpose
};

FormMat wedge(const FormMat& x, const FormMat& y);
FormMat ext_d(const FormMat& x);

// ---------------------------------------------------------------------------
// Structures and backgrounds.

// dbar_+ e_j = sum_i (cplus)_ij bb1 (x) e_i, and likewise with ab1 on the
// minus side.  `exact` records whether the entries are exact data (integer
// powers of the Hopf parameter) rather than dyadic images of floating input.
struct BundleStructure {
  int rank = 1;
  CMat cplus, cminus;
  bool exact = true;
};

// eta = tau^m: the degree-m pullback bundle on the plus side (coefficient
// m/2 exactly), and degree -m on the minus side.
BundleStructure line_bundle_taupow(int m);
// General eta != 0 for a fixed tau > 1: coefficient ln(eta)/(2 ln tau) with
// the floating value embedded exactly as a dyadic rational.  Purely
// unimodular eta yields exactly vanishing degrees.
BundleStructure line_bundle(std::complex<double> eta, double tau);

BundleStructure tensor(const BundleStructure& x, const BundleStructure& y);  // rank 1 only
BundleStructure dual(const BundleStructure& x);                              // rank 1 only

// Rank-2 families.
//
// crossed_pair: plus side diagonal in {e1, e2} with coefficients eta, xi;
// minus side diagonal in {e1+e2, e1-e2} with coefficients a, b.  Requires
// eta != xi and a != b (the families' argument needs distinct lines).
BundleStructure crossed_pair(const GaussRat& eta, const GaussRat& xi,
                             const GaussRat& a, const GaussRat& b);
// triangular_pair: upper-triangular on both sides with connection matrices
// -(m_plus/2) N and -(m_minus/2) N for N = [[0,1],[0,1]]; its sub-line e1 is
// flat on both sides and the quotient line has degrees (-m_plus, m_minus).
// Requires m_plus > 0 and m_minus >= 2.
BundleStructure triangular_pair(int m_plus, int m_minus);

// Constant positive Hermitian background metric in the trivial frame.
struct HermitianBackground {
  CMat h;
  static HermitianBackground ident(int rank);
};

// ---------------------------------------------------------------------------
// Connections, curvature, degree.

// The (0,1) connection matrix as coordinate forms.
FormMat connection_form(const BundleStructure& s, Frame fr);
// Square of the (0,1) operator; exactly zero for every structure in scope.
FormMat dbar_squared(const BundleStructure& s, Frame fr);
// Curvature of the Chern connection of the given side with respect to h.
FormMat chern_curvature(const BundleStructure& s, const HermitianBackground& h,
                        Frame fr);

struct DegreeResult {
  Rat deg_plus, deg_minus;
  bool exact = true;  // inherited from the structure
  Rat alpha_degree(const Rat& alpha) const;
  Rat alpha_slope(const Rat& alpha) const;  // alpha_degree / rank
  int rank = 1;
  double deg_plus_f() const { return static_cast<double>(deg_plus); }
  double deg_minus_f() const { return static_cast<double>(deg_minus); }
};

// Exact ratio of coefficients, allowing r2-power rebalancing; nullopt when
// the division is not exact.  Used by the degree extraction here and by the
// curvature-contraction reductions in the solver layer.
std::optional<CoeffExpr> exact_ratio(const CoeffExpr& a, const CoeffExpr& b);

// Exact degree extraction: the volume coefficient of tr F wedge omega times
// i/(2 pi).  Throws std::domain_error when the ratio is not constant (such
// data needs quadrature, which the solver layer provides).
DegreeResult degree(const BundleStructure& s,
                    const HermitianBackground& h, const hopf::Geometry& g);
DegreeResult degree(const BundleStructure& s, const hopf::Geometry& g);
// Degree of an explicitly given curvature matrix (same extraction).
Rat degree_of_curvature(const FormMat& f, Frame fr, const hopf::Geometry& g);

// Independent numeric oracle: Gauss-Legendre quadrature of the defining
// ratio of integrals over the fundamental annulus 1 <= |z| <= tau.
double quadrature_degree(std::complex<double> eta, double tau, Frame fr,
                         const hopf::Geometry& g);

// ---------------------------------------------------------------------------
// Commutation defect.
//
// The mixed second-order defect of the two holomorphic structures, taken
// directionally over the anti-holomorphic frame fields of each side and
// corrected by the Bismut connections (which annihilate those frames).  For
// the structures in scope it reduces to the commutator of the two connection
// matrices, sitting on the (first leg, first leg) grid slot.
struct DefectResult {
  // grid[j][k]: defect along (plus anti-holomorphic field j, minus
  // anti-holomorphic field k), entries constant exact scalars.
  CMat grid[2][2];
  // Two-form packaging sum_jk grid[j][k] bb_{j+1} ^ ab_{k+1} (the
  // tensor-to-form identification fixes the wedge ordering with this sign).
  FormMat packaged;
  bool is_zero() const;
};

DefectResult commutation_defect(const BundleStructure& s, const hopf::Geometry& g);

// ---------------------------------------------------------------------------
// Stability arithmetic.

// Certified two-line window families: a structure pair whose only
// destabilizing candidate is a fixed sub-line with known degrees.  alpha0 is
// the exact verdict threshold; stability holds strictly below it.
struct StabilityWindow {
  Rat alpha0;
  Rat degp_V, degm_V;      // degrees of the rank-2 total space
  Rat degp_sub, degm_sub;  // degrees of the distinguished sub-line
  Rat mu_V(const Rat& alpha) const;
  Rat mu_sub(const Rat& alpha) const;
  bool stable(const Rat& alpha) const;  // strict slope inequality
};

// Extension family: total degrees (-m_plus, m_minus), flat sub-line.
// Threshold m_minus / (m_plus + m_minus).  m_plus > 0, m_minus >= 2.
StabilityWindow extension_window(int m_plus, int m_minus);
// Bounded family: competing sub-line degrees certified to be at most
// (deg_plus_L, m_minus) with deg_plus_L < 0, m_minus > 0 and total degree
// zero.  Threshold m_minus / (m_minus - deg_plus_L).
StabilityWindow bounded_window(int deg_plus_L, int m_minus);

struct ScanRow {
  double alpha;
  double mu_V, mu_sub;
  bool stable;
};
std::vector<ScanRow> alpha_scan(const StabilityWindow& w, double lo, double hi,
                                double step);
// First adjacent pair of rows where the verdict flips, if any.
std::optional<std::pair<double, double>> verdict_flip_bracket(
    const std::vector<ScanRow>& rows);

// ---------------------------------------------------------------------------
// Constant sub-line scan.

struct SubLine {
  std::complex<double> v[2];        // spanning vector, normalized
  std::complex<double> eigenvalue;  // connection eigenvalue on the line
  bool exact = false;
  GaussRat v_exact[2], eigen_exact;  // meaningful when exact
  bool whole_space = false;          // scalar matrix: every line invariant
};

// Invariant lines of a constant 2x2 connection matrix (exact eigenlines when
// the discriminant is a perfect square in Q(i), floating otherwise).
std::vector<SubLine> invariant_lines(const CMat& c);

struct SublineScan {
  std::vector<SubLine> plus, minus;
  // Lines invariant on both sides, with their (plus, minus) degree pairs.
  struct Common {
    SubLine line;
    double deg_plus, deg_minus;
  };
  std::vector<Common> common;
  bool stable_for_all_alpha() const { return common.empty(); }
  // Verdict at a given alpha: every common line has slope strictly below
  // the total-space slope.
  bool stable(double alpha, const DegreeResult& total) const;
};

SublineScan constant_subline_scan(const BundleStructure& s,
                                  const hopf::Geometry& g);

}  // namespace hopflab::bundles
