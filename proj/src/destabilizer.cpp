// Destabilizing-projector extraction from a diverging continuity path.
//
// Along a blow-up the metric eigenvalues separate into a large and a small
// group; the spectral projector onto the small group converges to a weakly
// holomorphic projector whose image carries alpha-slope at least that of the
// whole bundle.  The slope of the extracted subsheaf is evaluated by the
// curvature formula for projections: the trace of the background mean
// curvature against pi, minus the (1,0) second-fundamental-form energies of
// the two sides.

#include <cmath>

#include "hopflab/hesolver.hpp"

namespace hopflab::hesolver {

using bundles::CMat;

namespace {

Eigen::MatrixXcd cmat_to_eigen(const CMat& c) {
  Eigen::MatrixXcd m(c.n, c.n);
  for (int i = 0; i < c.n; ++i)
    for (int j = 0; j < c.n; ++j) m(i, j) = c.at(i, j).to_complex();
  return m;
}

}  // namespace

DestabilizerReport destabilizer_extract(const ContinuityTrace& trace,
                                        const BundleStructure& s,
                                        const Geometry& g,
                                        double cutoff_ratio) {
  const InvariantField& f = trace.f_final;
  const int n = f.nodes(), r = f.rank;
  DestabilizerReport rep;
  rep.pi.rank = r;
  rep.pi.v.resize(n);

  // Global eigenvalue ceiling, then a per-node spectral cutoff.
  double top = 0;
  for (const auto& x : f.v) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(x);
    top = std::max(top, es.eigenvalues().maxCoeff());
  }
  double cut = cutoff_ratio * top;
  double tr_acc = 0;
  for (int j = 0; j < n; ++j) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f.v[j]);
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(r, r);
    for (int i = 0; i < r; ++i)
      if (es.eigenvalues()[i] <= cut)
        p += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    rep.pi.v[j] = p;
    tr_acc += p.trace().real();
  }
  rep.rank = static_cast<int>(std::lround(tr_acc / n));

  rep.idempotency = 0;
  rep.hermiticity = rep.pi.herm_defect();
  for (const auto& p : rep.pi.v)
    rep.idempotency = std::max(
        rep.idempotency, (p * p - p).cwiseAbs().maxCoeff());

  // Spectral t-derivative of the projector field on the solver's own grid.
  SpectralGrid gr = SpectralGrid::make(n, trace.period);

  Eigen::MatrixXcd cp = cmat_to_eigen(s.cplus);
  Eigen::MatrixXcd cm = cmat_to_eigen(s.cminus);
  std::vector<Eigen::MatrixXcd> dp(n, Eigen::MatrixXcd::Zero(r, r));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) dp[j] += gr.d1(j, k) * rep.pi.v[k];

  rep.weak_holo_plus = rep.weak_holo_minus = 0;
  Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(r, r);
  for (int j = 0; j < n; ++j) {
    const Eigen::MatrixXcd& p = rep.pi.v[j];
    Eigen::MatrixXcd dplus = (id - p) * (dp[j] + cp * p - p * cp);
    Eigen::MatrixXcd dminus = (id - p) * (dp[j] + cm * p - p * cm);
    rep.weak_holo_plus = std::max(rep.weak_holo_plus, dplus.norm());
    rep.weak_holo_minus = std::max(rep.weak_holo_minus, dminus.norm());
  }

  // Slopes.  mu_alpha(V) = lambda / (2 pi); the subsheaf slope adds the
  // mean of tr(K0 pi) minus the second-fundamental-form energies.
  const double alpha = trace.alpha;
  rep.mu_alpha_total = trace.lambda / (2.0 * M_PI);
  double acc = 0;
  Eigen::MatrixXcd cpd = cp.adjoint(), cmd = cm.adjoint();
  for (int j = 0; j < n; ++j) {
    const Eigen::MatrixXcd& p = rep.pi.v[j];
    double t0 = (trace.k0 * p).trace().real();
    double ep = (dp[j] - (cpd * p - p * cpd)).squaredNorm();
    double em = (dp[j] - (cmd * p - p * cmd)).squaredNorm();
    acc += t0 - alpha * 2.0 * M_PI * ep - (1 - alpha) * 2.0 * M_PI * em;
  }
  acc /= n;
  int rk = std::max(rep.rank, 1);
  rep.mu_alpha_sub = rep.mu_alpha_total + acc / (2.0 * M_PI * rk);
  rep.destabilizing = rep.mu_alpha_sub >= rep.mu_alpha_total - 1e-3;

  if (rep.rank == 1) {
    Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(r, r);
    for (const auto& p : rep.pi.v) mean += p;
    mean /= n;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mean);
    rep.direction = es.eigenvectors().col(r - 1);
  }
  (void)g;
  return rep;
}

}  // namespace hopflab::hesolver
