// Fourier collocation and the damped-Newton continuity path.

#include <cmath>
#include <stdexcept>

#include "hopflab/hesolver.hpp"

namespace hopflab::hesolver {

// ---------------------------------------------------------------------------
// Spectral grid.

SpectralGrid SpectralGrid::make(int n, double period) {
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("spectral grid: n must be even and >= 4");
  if (!(period > 0)) throw std::invalid_argument("spectral grid: bad period");
  SpectralGrid g;
  g.n = n;
  g.period = period;
  g.t.resize(n);
  for (int j = 0; j < n; ++j) g.t[j] = period * j / n;
  const double s = 2.0 * M_PI / period;
  g.d1 = Eigen::MatrixXd::Zero(n, n);
  g.d2 = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        g.d2(i, j) = -s * s * (n * n / 12.0 + 1.0 / 6.0);
        continue;
      }
      int k = i - j;
      double sign = (k % 2 == 0) ? 1.0 : -1.0;
      double ang = k * M_PI / n;
      g.d1(i, j) = s * 0.5 * sign / std::tan(ang);
      double si = std::sin(ang);
      g.d2(i, j) = -s * s * sign / (2.0 * si * si);
    }
  return g;
}

double SpectralGrid::interp(const Eigen::VectorXd& values, double at) const {
  // Even-n band-limited cardinal: S(t) = sin(n pi t / T) / (n tan(pi t / T)).
  double acc = 0;
  for (int j = 0; j < n; ++j) {
    double dt = at - t[j];
    double u = M_PI * dt / period;
    double su = std::sin(u);
    double card;
    if (std::abs(su) < 1e-13)
      card = std::cos(n * u) / std::cos(u);  // limit at grid coincidence
    else
      card = std::sin(n * u) / (n * std::tan(u));
    acc += values[j] * card;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Invariant fields.

InvariantField InvariantField::constant(const Eigen::MatrixXcd& m, int n) {
  InvariantField f;
  f.rank = static_cast<int>(m.rows());
  f.v.assign(n, m);
  return f;
}

double InvariantField::max_abs() const {
  double m = 0;
  for (const auto& x : v) m = std::max(m, x.cwiseAbs().maxCoeff());
  return m;
}

double InvariantField::herm_defect() const {
  double m = 0;
  for (const auto& x : v)
    m = std::max(m, (x - x.adjoint().eval()).cwiseAbs().maxCoeff());
  return m;
}

double InvariantField::log_sup() const {
  double m = 0;
  for (const auto& x : v) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(x);
    for (int i = 0; i < rank; ++i) {
      double ev = es.eigenvalues()[i];
      if (!(ev > 0)) throw std::domain_error("log_sup: non-positive field");
      m = std::max(m, std::abs(std::log(ev)));
    }
  }
  return m;
}

double InvariantField::mean_logdet() const {
  double acc = 0;
  for (const auto& x : v) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(x);
    for (int i = 0; i < rank; ++i) acc += std::log(es.eigenvalues()[i]);
  }
  return acc / static_cast<double>(v.size());
}

bool InvariantField::positive(double tol) const {
  for (const auto& x : v) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(x);
    if (es.eigenvalues().minCoeff() <= tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Scalar solve.

LineSolveResult solve_line_he(const Eigen::VectorXd& k0, double alpha,
                              const ScalarOperator& op,
                              const SpectralGrid& grid) {
  const int n = grid.n;
  if (k0.size() != n) throw std::invalid_argument("solve_line_he: size");
  Eigen::MatrixXd p = op.matrix(alpha, grid);
  LineSolveResult out;
  out.lambda = k0.mean();
  Eigen::VectorXd rhs = Eigen::VectorXd::Constant(n, out.lambda) - k0;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      p, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  out.sigma_small = sv[n - 1];
  out.sigma_next = sv[n - 2];
  // Min-norm solution with the one-dimensional kernel (constants) removed.
  Eigen::VectorXd coef = svd.matrixU().transpose() * rhs;
  for (int i = 0; i < n; ++i)
    coef[i] = (sv[i] > 1e-10 * sv[0]) ? coef[i] / sv[i] : 0.0;
  out.k = svd.matrixV() * coef;
  out.k.array() -= out.k.mean();
  out.residual_sup = (p * out.k - rhs).cwiseAbs().maxCoeff();
  return out;
}

// ---------------------------------------------------------------------------
// Field helpers.

namespace {

Eigen::MatrixXcd herm_log(const Eigen::MatrixXcd& f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f);
  const int r = static_cast<int>(f.rows());
  Eigen::VectorXd lg(r);
  for (int i = 0; i < r; ++i) {
    double ev = es.eigenvalues()[i];
    if (!(ev > 0)) throw std::domain_error("matrix log: non-positive");
    lg[i] = std::log(ev);
  }
  return es.eigenvectors() * lg.asDiagonal() *
         es.eigenvectors().adjoint();
}

struct Problem {
  const ReducedOperator* op;
  Eigen::MatrixXcd k0;
  const SpectralGrid* grid;
  double alpha;
  int rank;
};

// Real coordinates of a Hermitian matrix: diagonal, then (re, im) above.
void herm_to_vec(const Eigen::MatrixXcd& m, double* out) {
  const int r = static_cast<int>(m.rows());
  int p = 0;
  for (int i = 0; i < r; ++i) out[p++] = m(i, i).real();
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) {
      out[p++] = m(i, j).real();
      out[p++] = m(i, j).imag();
    }
}

Eigen::MatrixXcd vec_to_herm(const double* in, int r) {
  Eigen::MatrixXcd m(r, r);
  int p = 0;
  for (int i = 0; i < r; ++i) m(i, i) = in[p++];
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) {
      double re = in[p++], im = in[p++];
      m(i, j) = std::complex<double>(re, im);
      m(j, i) = std::complex<double>(re, -im);
    }
  return m;
}

Eigen::VectorXd pack(const InvariantField& f) {
  const int r = f.rank, rr = r * r;
  Eigen::VectorXd x(f.nodes() * rr);
  for (int j = 0; j < f.nodes(); ++j) herm_to_vec(f.v[j], x.data() + j * rr);
  return x;
}

InvariantField unpack(const Eigen::VectorXd& x, int r, int n) {
  InvariantField f;
  f.rank = r;
  f.v.resize(n);
  for (int j = 0; j < n; ++j) f.v[j] = vec_to_herm(x.data() + j * r * r, r);
  return f;
}

void spectral_derivatives(const InvariantField& f, const SpectralGrid& g,
                          std::vector<Eigen::MatrixXcd>& fp,
                          std::vector<Eigen::MatrixXcd>& fpp) {
  const int n = g.n, r = f.rank;
  fp.assign(n, Eigen::MatrixXcd::Zero(r, r));
  fpp.assign(n, Eigen::MatrixXcd::Zero(r, r));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      fp[j] += g.d1(j, k) * f.v[k];
      fpp[j] += g.d2(j, k) * f.v[k];
    }
}

// Symmetrized defect per node.  f L_eps(f) is Hermitian for the structures
// in scope, so L itself is f^{-1} times a Hermitian matrix; with f positive
// the Hermitian part of L vanishes exactly when L does (a Sylvester
// argument), and the log term provides a natural barrier against the
// degenerate f -> 0 root.
bool residual_field(const Problem& pb, const InvariantField& f, double eps,
                    std::vector<Eigen::MatrixXcd>& out) {
  const int n = pb.grid->n, r = pb.rank;
  std::vector<Eigen::MatrixXcd> fp, fpp;
  spectral_derivatives(f, *pb.grid, fp, fpp);
  out.assign(n, Eigen::MatrixXcd::Zero(r, r));
  for (int j = 0; j < n; ++j) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f.v[j]);
    if (es.eigenvalues().minCoeff() <= 0) return false;
    Eigen::MatrixXcd l = pb.k0 + pb.op->apply(pb.alpha, f.v[j], fp[j], fpp[j]);
    if (eps != 0.0) l += eps * herm_log(f.v[j]);
    out[j] = 0.5 * (l + l.adjoint().eval());
  }
  return true;
}

bool residual_vec(const Problem& pb, const Eigen::VectorXd& x, double eps,
                  Eigen::VectorXd& res) {
  const int n = pb.grid->n, rr = pb.rank * pb.rank;
  InvariantField f = unpack(x, pb.rank, n);
  std::vector<Eigen::MatrixXcd> rf;
  if (!residual_field(pb, f, eps, rf)) return false;
  res.resize(n * rr);
  for (int j = 0; j < n; ++j) herm_to_vec(rf[j], res.data() + j * rr);
  return true;
}

}  // namespace

InvariantField l_epsilon(const InvariantField& f, double eps, double alpha,
                         const ReducedOperator& op, const MeanCurvature& mc,
                         const SpectralGrid& grid) {
  const int n = grid.n, r = f.rank;
  std::vector<Eigen::MatrixXcd> fp, fpp;
  spectral_derivatives(f, grid, fp, fpp);
  InvariantField out;
  out.rank = r;
  out.v.resize(n);
  Eigen::MatrixXcd k0 = mc.k0(alpha);
  for (int j = 0; j < n; ++j) {
    out.v[j] = k0 + op.apply(alpha, f.v[j], fp[j], fpp[j]);
    if (eps != 0.0) out.v[j] += eps * herm_log(f.v[j]);
  }
  return out;
}

InvariantField newton_at_eps(const InvariantField& f0, double eps,
                             const SolverConfig& cfg, const ReducedOperator& op,
                             const MeanCurvature& mc, const SpectralGrid& grid,
                             int* iters, double* residual, bool* ok) {
  Problem pb{&op, mc.k0(cfg.alpha), &grid, cfg.alpha, f0.rank};
  const int n = grid.n, rr = pb.rank * pb.rank, dim = n * rr;
  Eigen::VectorXd x = pack(f0);
  Eigen::VectorXd res(dim), res2(dim), colp(dim), colm(dim);
  bool good = residual_vec(pb, x, eps, res);
  double rn = good ? res.cwiseAbs().maxCoeff() : 1e300;
  int it = 0;
  bool success = false;
  std::vector<double> history;
  for (; it < cfg.newton_max_iters && good; ++it) {
    if (rn <= cfg.newton_tol) {
      success = true;
      break;
    }
    // Stagnation: well above the stall tolerance and barely improving.
    history.push_back(rn);
    if (it >= 12 && rn > 1e-6 && rn > 0.3 * history[it - 6]) break;
    // Central-difference Jacobian in the Hermitian coordinates.
    Eigen::MatrixXd jac(dim, dim);
    double base_scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    double h = 1e-6 * base_scale;
    for (int c = 0; c < dim; ++c) {
      double save = x[c];
      x[c] = save + h;
      bool okp = residual_vec(pb, x, eps, colp);
      x[c] = save - h;
      bool okm = residual_vec(pb, x, eps, colm);
      x[c] = save;
      if (okp && okm) {
        jac.col(c) = (colp - colm) / (2 * h);
      } else if (okp) {
        jac.col(c) = (colp - res) / h;
      } else if (okm) {
        jac.col(c) = (res - colm) / h;
      } else {
        good = false;
        break;
      }
    }
    if (!good) break;
    // At eps = 0 the linearization has the global-rescaling kernel; take the
    // minimum-norm least-squares step there.
    Eigen::VectorXd dx;
    if (eps == 0.0) {
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
      cod.setThreshold(1e-10);
      cod.compute(jac);
      dx = cod.solve(-res);
    } else {
      dx = jac.partialPivLu().solve(-res);
    }
    if (!dx.allFinite()) {
      good = false;
      break;
    }
    // Damped line search (squared two-norm merit) with a positivity guard.
    double merit = res.squaredNorm();
    double s = 1.0;
    bool stepped = false;
    for (int back = 0; back < 40; ++back, s *= 0.5) {
      Eigen::VectorXd xs = x + s * dx;
      if (!residual_vec(pb, xs, eps, res2)) continue;
      double rn2 = res2.cwiseAbs().maxCoeff();
      if (res2.squaredNorm() <= (1.0 - 1e-4 * s) * merit ||
          rn2 <= cfg.newton_tol) {
        x = xs;
        res = res2;
        rn = rn2;
        stepped = true;
        break;
      }
    }
    if (!stepped) break;
  }
  // Accept a stalled iteration whose residual is already far below the
  // curvature scale (the linearization degenerates along the continuity
  // path's kernel directions near polystable limits).
  if (rn <= cfg.newton_tol || rn <= cfg.newton_stall_tol) success = true;
  if (iters) *iters = it;
  if (residual) *residual = rn;
  if (ok) *ok = success;
  return unpack(x, pb.rank, n);
}

// ---------------------------------------------------------------------------
// Continuity path.

namespace {

// Independent residual certificate: trigonometric resample to a doubled
// grid, fourth-order periodic finite differences, derived-table evaluation.
double fd_certificate(const InvariantField& f, double eps, double alpha,
                      const ReducedOperator& op, const Eigen::MatrixXcd& k0,
                      const SpectralGrid& grid) {
  const int n = grid.n, m = 2 * n, r = f.rank;
  const double T = grid.period, h = T / m;
  // Resample each real coordinate of the field.
  std::vector<Eigen::MatrixXcd> fine(m, Eigen::MatrixXcd::Zero(r, r));
  const int rr = r * r;
  Eigen::MatrixXd coords(n, rr);
  {
    std::vector<double> row(rr);
    for (int j = 0; j < n; ++j) {
      herm_to_vec(f.v[j], row.data());
      for (int e = 0; e < rr; ++e) coords(j, e) = row[e];
    }
  }
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd c(rr);
    for (int e = 0; e < rr; ++e) c[e] = grid.interp(coords.col(e), h * j);
    fine[j] = vec_to_herm(c.data(), r);
  }
  double worst = 0;
  for (int j = 0; j < m; ++j) {
    auto at = [&](int k) -> const Eigen::MatrixXcd& {
      return fine[((j + k) % m + m) % m];
    };
    Eigen::MatrixXcd fp =
        (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12.0 * h);
    Eigen::MatrixXcd fpp =
        (-(at(2) + at(-2)) + 16.0 * (at(1) + at(-1)) - 30.0 * at(0)) /
        (12.0 * h * h);
    Eigen::MatrixXcd l = k0 + op.apply(alpha, at(0), fp, fpp);
    if (eps != 0.0) l += eps * herm_log(at(0));
    worst = std::max(worst, l.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

ContinuityTrace newton_continuation(const BundleStructure& s,
                                    const SolverConfig& cfg,
                                    const Geometry& g) {
  if (!(cfg.alpha > 0 && cfg.alpha < 1))
    throw std::invalid_argument("continuity: alpha must lie in (0, 1)");
  ContinuityTrace tr;
  tr.alpha = cfg.alpha;
  ReducedOperator op = ReducedOperator::derive(s, g);
  MeanCurvature mc = background_mean_curvature(s, g);
  tr.lambda = mc.lambda(cfg.alpha);
  tr.k0 = mc.k0(cfg.alpha);
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(tr.k0);
    tr.m_k = es.eigenvalues().cwiseAbs().maxCoeff();
  }
  // Reduction period: t advances by 2 ln tau across the fundamental annulus.
  const double period = 2.0 * std::log(cfg.tau);
  tr.period = period;
  SpectralGrid grid = SpectralGrid::make(cfg.grid_n, period);

  InvariantField f = InvariantField::constant(
      Eigen::MatrixXcd::Identity(s.rank, s.rank), grid.n);
  double logdet0 = 0;
  bool have_logdet0 = false;
  double eps = cfg.eps0;
  double eps_prev = -1;  // last accepted value
  double eps_last = cfg.eps0;
  int refinements = 0;
  int total_failures = 0;
  const int kMaxSteps = 300;
  while (static_cast<int>(tr.steps.size()) < kMaxSteps) {
    int iters = 0;
    double rn = 0;
    bool ok = false;
    InvariantField next = newton_at_eps(f, eps, cfg, op, mc, grid, &iters, &rn, &ok);
    TraceStep step{eps, iters, rn, 0, 0, ok, true};
    if (ok) {
      step.m_eps = next.log_sup();
      step.logdet = next.mean_logdet();
      step.growth_bound_ok = step.m_eps <= tr.m_k / eps + 1e-9;
      if (!have_logdet0) {
        logdet0 = step.logdet;
        have_logdet0 = true;
      }
      tr.logdet_drift =
          std::max(tr.logdet_drift, std::abs(step.logdet - logdet0));
      f = next;
      eps_prev = eps;
      eps_last = eps;
      tr.steps.push_back(step);
      if (step.m_eps > cfg.blowup_cap) {
        tr.blowup = true;
        break;
      }
      if (eps <= cfg.eps_min * (1 + 1e-12)) {
        tr.converged = true;
        break;
      }
      eps = std::max(eps * cfg.eps_ratio, cfg.eps_min);
      refinements = 0;
      continue;
    }
    step.accepted = false;
    tr.steps.push_back(step);
    if (eps_prev < 0) {
      tr.failure = "first continuity step failed to converge";
      break;
    }
    // Refine toward the last success: blow-up paths stiffen gradually, so
    // log-bisection keeps the warm start usable and drives m_eps upward
    // until the cap or the refinement budget decides that the branch ends.
    ++total_failures;
    if (++refinements > 3 || total_failures > 12 ||
        eps_prev / eps < 1.0 + 1e-3) {
      tr.blowup = true;
      break;
    }
    eps = std::sqrt(eps * eps_prev);
  }
  if (!tr.converged && !tr.blowup && tr.failure.empty())
    tr.failure = "schedule ended without convergence or blow-up";

  double eps_report = tr.blowup ? eps_last : cfg.eps_min;
  if (tr.converged && cfg.polish) {
    // Remove the regularization: a short exact solve at eps = 0, warm-started.
    int iters = 0;
    double rn = 0;
    bool ok = false;
    InvariantField pol = newton_at_eps(f, 0.0, cfg, op, mc, grid, &iters, &rn, &ok);
    if (ok && pol.positive()) {
      f = pol;
      eps_report = 0.0;
    }
  }
  tr.f_final = f;
  // Final weighted Hermite-Einstein defect (no regularization term).
  InvariantField defect = l_epsilon(f, 0.0, cfg.alpha, op, mc, grid);
  tr.final_he_residual = defect.max_abs();
  tr.certificate_residual =
      fd_certificate(f, eps_report, cfg.alpha, op, tr.k0, grid);
  return tr;
}

}  // namespace hopflab::hesolver
