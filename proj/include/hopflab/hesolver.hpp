#pragma once

// Spectral continuity-method solver for the weighted Hermite-Einstein
// equation on invariant bundle structures.
//
// Invariance reduces the equation to a periodic ODE system in t = ln r2 with
// period 2 ln tau.  The reduction is *derived*, not hardcoded: opaque
// symbols f_ij(t) with formal t-derivative rules are pushed through the
// exterior calculus (Chern connection, curvature, omega-contraction) and the
// resulting coordinate-free polynomial tables are compiled into fast numeric
// evaluators.  The continuity path solves
//   L_eps(f) = K0 + alpha N_plus(f) + (1 - alpha) N_minus(f) + eps log f = 0
// by damped Newton over a Fourier collocation grid, with a decreasing eps
// schedule; divergence of max |log f| signals instability and feeds the
// destabilizing-projector extraction.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hopflab/bundles.hpp"

namespace hopflab::hesolver {

using bundles::BundleStructure;
using hopf::Geometry;

// ---------------------------------------------------------------------------
// Fourier collocation grid (even n), period T: equispaced nodes with dense
// trigonometric differentiation matrices.

struct SpectralGrid {
  int n = 0;
  double period = 0;
  std::vector<double> t;   // nodes j * period / n
  Eigen::MatrixXd d1, d2;  // first/second derivative matrices

  static SpectralGrid make(int n, double period);
  // Value of the band-limited interpolant of nodal data at arbitrary t.
  double interp(const Eigen::VectorXd& values, double at) const;
};

// Periodic matrix field sampled on the grid nodes.
struct InvariantField {
  int rank = 0;
  std::vector<Eigen::MatrixXcd> v;  // one rank x rank matrix per node

  static InvariantField constant(const Eigen::MatrixXcd& m, int n);
  int nodes() const { return static_cast<int>(v.size()); }
  double max_abs() const;
  double herm_defect() const;  // sup anti-Hermitian part
  // sup over nodes of the largest |eigenvalue| of log of the node value
  // (requires positive Hermitian values).
  double log_sup() const;
  double mean_logdet() const;
  bool positive(double tol = 0.0) const;
};

// ---------------------------------------------------------------------------
// Derived reduced operators.

class ReducedOperator {
 public:
  // Symbolically derive N_plus / N_minus for the given structure.  Throws if
  // the contraction fails to close into coordinate-free coefficients.
  static ReducedOperator derive(const BundleStructure& s, const Geometry& g);

  int rank() const { return rank_; }

  // N_side evaluated at one node from f, f' and f'' (f positive Hermitian).
  Eigen::MatrixXcd apply_side(int side,  // 0 = plus, 1 = minus
                              const Eigen::MatrixXcd& f,
                              const Eigen::MatrixXcd& fp,
                              const Eigen::MatrixXcd& fpp) const;
  Eigen::MatrixXcd apply(double alpha, const Eigen::MatrixXcd& f,
                         const Eigen::MatrixXcd& fp,
                         const Eigen::MatrixXcd& fpp) const;

  // Number of polynomial terms in the derived tables (diagnostic).
  int term_count(int side) const;

 private:
  struct CTerm {
    std::complex<double> c;
    std::vector<std::pair<int, int>> powers;  // (value slot, exponent)
  };
  // slots: f [0, r^2), f' [r^2, 2 r^2), f'' [2 r^2, 3 r^2), inv f [3 r^2, ..)
  int rank_ = 0;
  std::vector<CTerm> table_[2][/*entries*/ 16];
  friend struct ReducedOperatorBuilder;
};

// Scalar conformal operator P^alpha u = a u'' + b(alpha) u', derived the same
// way; acts on real-valued log-conformal factors.
struct ScalarOperator {
  double coeff_upp;         // coefficient of u''
  double coeff_up_plus;     // u' coefficient of the plus side
  double coeff_up_minus;    // u' coefficient of the minus side
  double coeff_up(double alpha) const {
    return alpha * coeff_up_plus + (1 - alpha) * coeff_up_minus;
  }
  static ScalarOperator derive(const Geometry& g);
  // Dense collocation matrix of alpha P_plus + (1-alpha) P_minus.
  Eigen::MatrixXd matrix(double alpha, const SpectralGrid& grid) const;
};

// Background mean curvature of the trivial metric: K_side = i Lambda_side of
// the Chern curvature, exact and constant for the structures in scope.
struct MeanCurvature {
  Eigen::MatrixXcd k_plus, k_minus;
  Eigen::MatrixXcd k_alpha(double alpha) const {
    return alpha * k_plus + (1 - alpha) * k_minus;
  }
  // Einstein constant: tr K_alpha / rank (constant background).
  double lambda(double alpha) const;
  // Traceless part K_alpha - lambda Id.
  Eigen::MatrixXcd k0(double alpha) const;
};
MeanCurvature background_mean_curvature(const BundleStructure& s,
                                        const Geometry& g);

// ---------------------------------------------------------------------------
// Scalar solve: conformal factor k with K(e^k h0) constant for a line
// bundle whose background mean curvature profile is k0(t).

struct LineSolveResult {
  Eigen::VectorXd k;       // mean-zero nodal solution
  double lambda;           // Einstein constant (mean of k0)
  double residual_sup;     // sup |P k - (lambda - k0)| on the grid
  double sigma_small;      // smallest singular value of P (kernel direction)
  double sigma_next;       // second smallest (kernel must be 1-dimensional)
};
LineSolveResult solve_line_he(const Eigen::VectorXd& k0, double alpha,
                              const ScalarOperator& op,
                              const SpectralGrid& grid);

// ---------------------------------------------------------------------------
// Continuity method.

struct SolverConfig {
  double alpha = 0.5;
  double tau = 2.0;  // Hopf parameter; the reduction period is 2 ln tau
  int grid_n = 64;
  double eps0 = 1.0;
  double eps_ratio = 0.7;
  double eps_min = 1e-4;
  double newton_tol = 1e-10;
  double newton_stall_tol = 1e-8;  // acceptance when the linearization stalls
  int newton_max_iters = 60;
  double blowup_cap = 20.0;  // on sup |log f|
  bool polish = true;        // final eps -> 0 Newton stage on convergence
};

struct TraceStep {
  double eps;
  int newton_iters;
  double residual;   // sup norm of the symmetrized defect at acceptance
  double m_eps;      // sup |log f|
  double logdet;     // mean log det f
  bool accepted;
  bool growth_bound_ok;  // m_eps <= m_K / eps
};

struct ContinuityTrace {
  std::vector<TraceStep> steps;
  bool converged = false;  // reached eps_min
  bool blowup = false;
  std::string failure;  // set when neither converged nor clean blow-up

  double alpha = 0;
  double period = 0;  // reduction period 2 ln tau of the collocation grid
  double lambda = 0;
  double m_k = 0;  // sup |K_alpha - lambda Id| eigenvalue bound
  Eigen::MatrixXcd k0;
  InvariantField f_final;     // last accepted solution
  double final_he_residual;   // sup |K_alpha^h - lambda Id| after polish
  double logdet_drift;        // drift of mean log det along the path
  double certificate_residual;  // independent FD evaluation, doubled grid
};

ContinuityTrace newton_continuation(const BundleStructure& s,
                                    const SolverConfig& cfg, const Geometry& g);

// Pointwise defect L_eps(f) on the grid (for external checks; the returned
// field is the raw, unsymmetrized defect).
InvariantField l_epsilon(const InvariantField& f, double eps, double alpha,
                         const ReducedOperator& op, const MeanCurvature& mc,
                         const SpectralGrid& grid);

// One Newton solve at fixed eps, warm-started from f (used by perturbation
// tests).  Returns the solution field; iters/residual reported through out
// parameters when non-null.
InvariantField newton_at_eps(const InvariantField& f, double eps,
                             const SolverConfig& cfg, const ReducedOperator& op,
                             const MeanCurvature& mc, const SpectralGrid& grid,
                             int* iters = nullptr, double* residual = nullptr,
                             bool* ok = nullptr);

// ---------------------------------------------------------------------------
// Destabilizer extraction from a blow-up trace.

struct DestabilizerReport {
  InvariantField pi;          // extracted projector field
  int rank = 0;               // rounded trace
  double idempotency;         // sup |pi^2 - pi|
  double hermiticity;         // sup |pi - pi*|
  double weak_holo_plus;      // sup |(Id - pi) dbar_+ pi|
  double weak_holo_minus;     // sup |(Id - pi) dbar_- pi|
  double mu_alpha_total;      // alpha-slope of the full bundle
  double mu_alpha_sub;        // Chern-Weil alpha-slope of the pi-subsheaf
  bool destabilizing;         // mu_alpha_sub >= mu_alpha_total - tol
  // Principal direction of a rank-1 projector (unit vector), else empty.
  Eigen::VectorXcd direction;
};

DestabilizerReport destabilizer_extract(const ContinuityTrace& trace,
                                        const BundleStructure& s,
                                        const Geometry& g,
                                        double cutoff_ratio = 0.5);

}  // namespace hopflab::hesolver
