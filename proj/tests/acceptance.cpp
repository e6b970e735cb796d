// Acceptance gate: one pass/fail line per criterion, exit 0 iff all pass.
//
//   1. exact structural-identity suite (symbolic-zero witnesses, < 30 s)
//   2. line-bundle degree reproduction + quadrature cross-check
//   3. stability thresholds, grid bracket, commutation defects
//   4. scalar Hermite-Einstein solve on random profiles
//   5. continuity method, stable side (convergence with certificates)
//   6. continuity method, unstable side (blow-up + destabilizer)
//   7. randomized exact property suites (>= 200 cases per law)

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "hopflab/bundles.hpp"
#include "hopflab/hesolver.hpp"
#include "hopflab/hopf.hpp"

using namespace hopflab;
using namespace hopflab::sym;
namespace bnd = hopflab::bundles;
namespace hes = hopflab::hesolver;

namespace {

int g_failures = 0;

void report(int criterion, const char* what, bool pass, double seconds,
            const std::string& detail) {
  std::printf("criterion %d (%s): %s  [%.1fs]%s%s\n", criterion, what,
              pass ? "PASS" : "FAIL", seconds,
              detail.empty() ? "" : "  ", detail.c_str());
  if (!pass) ++g_failures;
}

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

struct Rng {
  std::mt19937 g{20260826};
  int uniform(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(g);
  }
  double real(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
  }
  GaussRat coeff() { return GaussRat(Rat(uniform(-3, 3)), Rat(uniform(-2, 2))); }
  CoeffExpr scalar() {
    Poly p;
    int nt = uniform(1, 3);
    for (int t = 0; t < nt; ++t) {
      Monomial m;
      for (int s = 0; s < kNumCoord; ++s) {
        int e = uniform(0, 2);
        if (e) m = m.times(Monomial::var(s, e));
      }
      p.add_term(m, coeff());
    }
    return CoeffExpr(p, uniform(0, 1));
  }
  CoordForm form(int grade) {
    CoordForm f;
    int n = uniform(1, 2);
    for (int t = 0; t < n; ++t) {
      unsigned mask = 0;
      while (std::popcount(mask) != grade) mask = uniform(0, 15);
      f.add(mask, scalar());
    }
    return f;
  }
  CoordForm mixed_form() { return form(uniform(0, 2)) + form(uniform(0, 2)); }
  VField vfield() {
    VField v;
    int n = uniform(1, 2);
    for (int t = 0; t < n; ++t) v.add(uniform(0, 3), scalar());
    return v;
  }
  GenSection section() { return GenSection(vfield(), form(1)); }
  // Random positive Hermitian constant metric (diagonally dominant).
  bnd::HermitianBackground background(int rank) {
    bnd::CMat h(rank);
    for (int i = 0; i < rank; ++i) h.at(i, i) = GaussRat(uniform(3, 7));
    for (int i = 0; i < rank; ++i)
      for (int j = i + 1; j < rank; ++j) {
        GaussRat c(Rat(uniform(-1, 1), 2), Rat(uniform(-1, 1), 2));
        h.at(i, j) = c;
        h.at(j, i) = c.conj();
      }
    return bnd::HermitianBackground{h};
  }
};

const hopf::Geometry& geom() {
  static hopf::Geometry g;
  return g;
}

// ---------------------------------------------------------------------------

void criterion_1() {
  Timer tm;
  auto rep = hopf::verify_all(geom());
  bool pass = rep.all_pass() && !rep.checks.empty();
  std::string detail;
  for (const auto& c : rep.checks)
    if (!c.pass) detail += "failed: " + c.name + "; ";
  double sec = tm.seconds();
  if (sec >= 30.0) {
    pass = false;
    detail += "over the 30 s budget";
  }
  if (pass)
    detail = std::to_string(rep.checks.size()) + " identities, all exact";
  report(1, "exact identity suite", pass, sec, detail);
}

void criterion_2() {
  Timer tm;
  bool pass = true;
  std::string detail;
  for (int m = -3; m <= 3; ++m) {
    auto d = bnd::degree(bnd::line_bundle_taupow(m), geom());
    if (!(d.deg_plus == Rat(m) && d.deg_minus == Rat(-m) && d.exact)) {
      pass = false;
      detail += "taupow " + std::to_string(m) + " wrong; ";
    }
  }
  double quad =
      bnd::quadrature_degree({2.0, 0.0}, 2.0, Frame::Plus, geom());
  if (!(std::abs(quad - 1.0) <= 1e-6)) {
    pass = false;
    detail += "quadrature deg+ = " + std::to_string(quad) + "; ";
  }
  if (pass) detail = "deg = (m, -m) exact for |m| <= 3; quadrature to 1e-6";
  report(2, "degree reproduction", pass, tm.seconds(), detail);
}

void criterion_3() {
  Timer tm;
  bool pass = true;
  std::string detail;
  auto we = bnd::extension_window(1, 2);
  auto wb = bnd::bounded_window(-1, 2);
  if (we.alpha0 != Rat(2, 3)) pass = false, detail += "extension alpha0; ";
  if (wb.alpha0 != Rat(2, 3)) pass = false, detail += "bounded alpha0; ";
  for (const auto& w : {we, wb}) {
    auto rows = bnd::alpha_scan(w, 1e-4, 1.0 - 1e-4, 1e-4);
    auto br = bnd::verdict_flip_bracket(rows);
    if (!br || !(br->first <= 2.0 / 3.0 && 2.0 / 3.0 <= br->second)) {
      pass = false;
      detail += "grid bracket misses 2/3; ";
    }
  }
  if (!bnd::commutation_defect(bnd::triangular_pair(1, 2), geom()).is_zero()) {
    pass = false;
    detail += "triangular defect nonzero; ";
  }
  if (bnd::commutation_defect(
          bnd::crossed_pair(GaussRat(1), GaussRat(2), GaussRat(3), GaussRat(5)),
          geom())
          .is_zero()) {
    pass = false;
    detail += "crossed defect vanished; ";
  }
  if (pass)
    detail = "alpha0 = 2/3 exactly (both windows), bracketed at step 1e-4; "
             "defects as expected";
  report(3, "stability thresholds", pass, tm.seconds(), detail);
}

void criterion_4() {
  Timer tm;
  bool pass = true;
  std::string detail;
  Rng rng;
  const int n = 64;
  const double period = 2.0 * std::log(2.0);
  auto grid = hes::SpectralGrid::make(n, period);
  auto op = hes::ScalarOperator::derive(geom());
  double worst_res = 0, worst_sigma = 1e9;
  for (int trial = 0; trial < 3; ++trial) {
    double alpha = rng.real(0.1, 0.9);
    Eigen::VectorXd k0(n);
    double c0 = rng.real(-1, 1);
    double a[3], b[3];
    for (int j = 0; j < 3; ++j) a[j] = rng.real(-1, 1), b[j] = rng.real(-1, 1);
    for (int i = 0; i < n; ++i) {
      double u = 2.0 * M_PI * grid.t[i] / period;
      k0[i] = c0;
      for (int j = 0; j < 3; ++j)
        k0[i] += a[j] * std::cos((j + 1) * u) + b[j] * std::sin((j + 1) * u);
    }
    auto r = hes::solve_line_he(k0, alpha, op, grid);
    worst_res = std::max(worst_res, r.residual_sup);
    worst_sigma = std::min(worst_sigma, r.sigma_next);
    if (!(r.residual_sup <= 1e-8)) pass = false, detail += "residual; ";
    if (!(r.sigma_small <= 1e-8 * r.sigma_next))
      pass = false, detail += "kernel not 1-dim; ";
    if (!(r.sigma_next >= 1e-3)) pass = false, detail += "sigma2 small; ";
  }
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "3 random profiles at N=64: sup-residual <= %.1e, sigma2 >= "
                "%.1e",
                worst_res, worst_sigma);
  if (pass) detail = buf;
  report(4, "scalar solve", pass, tm.seconds(), detail);
}

void criterion_5() {
  Timer tm;
  bool pass = true;
  std::string detail;
  hes::SolverConfig cfg;
  cfg.alpha = 0.4;
  auto s =
      bnd::crossed_pair(GaussRat(1), GaussRat(2), GaussRat(3), GaussRat(5));
  auto tr = hes::newton_continuation(s, cfg, geom());
  if (!tr.converged) pass = false, detail += "did not reach eps_min; ";
  double m_max = 0;
  for (const auto& st : tr.steps) {
    m_max = std::max(m_max, st.m_eps);
    if (!st.accepted) pass = false, detail += "rejected step; ";
    if (!st.growth_bound_ok)
      pass = false, detail += "growth bound violated; ";
  }
  if (!(m_max <= 5.0)) pass = false, detail += "m_eps over 5; ";
  if (!(tr.final_he_residual <= 1e-4))
    pass = false, detail += "final residual; ";
  if (!(tr.logdet_drift <= 1e-6)) pass = false, detail += "logdet drift; ";
  double sec = tm.seconds();
  if (sec >= 120.0) pass = false, detail += "over the 2 min budget; ";
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "converged, m_eps <= %.3f, final residual %.1e, logdet "
                "drift %.1e, growth bound at every step",
                m_max, tr.final_he_residual, tr.logdet_drift);
  if (pass) detail = buf;
  report(5, "continuity, stable side", pass, sec, detail);
}

void criterion_6() {
  Timer tm;
  bool pass = true;
  std::string detail;
  hes::SolverConfig cfg;
  cfg.alpha = 0.8;
  auto s = bnd::triangular_pair(1, 2);
  auto tr = hes::newton_continuation(s, cfg, geom());
  if (!tr.blowup) {
    report(6, "continuity, unstable side", false, tm.seconds(),
           "no blow-up flag");
    return;
  }
  auto d = hes::destabilizer_extract(tr, s, geom());
  if (!(d.idempotency <= 1e-6)) pass = false, detail += "idempotency; ";
  if (!(d.hermiticity <= 1e-6)) pass = false, detail += "hermiticity; ";
  if (d.rank != 1) pass = false, detail += "rank != 1; ";
  if (!(d.weak_holo_plus <= 1e-2 && d.weak_holo_minus <= 1e-2))
    pass = false, detail += "weak holomorphy; ";
  double angle = d.direction.size() == 2
                     ? std::atan2(std::abs(d.direction[1]),
                                  std::abs(d.direction[0]))
                     : M_PI;
  if (!(angle <= 0.1)) pass = false, detail += "direction off e1; ";
  if (!(d.mu_alpha_sub >= d.mu_alpha_total - 1e-3))
    pass = false, detail += "sub-slope not destabilizing; ";
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "blow-up; rank-1 projector, defects (%.1e, %.1e), weak-holo "
                "(%.1e, %.1e), %.1e rad from e1, mu_sub %.3f >= mu_total %.3f",
                d.idempotency, d.hermiticity, d.weak_holo_plus,
                d.weak_holo_minus, angle, d.mu_alpha_sub, d.mu_alpha_total);
  if (pass) detail = buf;
  report(6, "continuity, unstable side", pass, tm.seconds(), detail);
}

void criterion_7() {
  Timer tm;
  bool pass = true;
  std::string detail;
  Rng rng;
  const int kCases = 200;

  // d^2 = 0 and the graded Leibniz rule.
  for (int c = 0; c < kCases && pass; ++c) {
    int ga = rng.uniform(0, 2);
    CoordForm a = rng.form(ga), b = rng.form(rng.uniform(0, 2));
    if (!ext_d(ext_d(a)).is_zero()) pass = false, detail += "d^2; ";
    CoordForm rhs = wedge(ext_d(a), b) +
                    (ga % 2 ? -wedge(a, ext_d(b)) : wedge(a, ext_d(b)));
    if (!(ext_d(wedge(a, b)) == rhs)) pass = false, detail += "Leibniz; ";
  }
  // Cartan-calculus law: (L_x w)(y) = x(w(y)) - w([x, y]).
  for (int c = 0; c < kCases && pass; ++c) {
    VField x = rng.vfield(), y = rng.vfield();
    CoordForm w = rng.form(1);
    CoeffExpr lhs = interior(y, lie_derivative(x, w)).scalar_part();
    CoeffExpr rhs = x.apply(interior(y, w).scalar_part()) -
                    interior(lie_bracket(x, y), w).scalar_part();
    if (!(lhs == rhs)) pass = false, detail += "Cartan; ";
  }
  // Twisted-bracket symmetrization is an exact differential.
  for (int c = 0; c < kCases && pass; ++c) {
    GenSection s = rng.section(), t = rng.section();
    CoordForm gamma = rng.form(3);
    GenSection sym = courant(s, t, gamma) + courant(t, s, gamma);
    if (!sym.v.is_zero() ||
        !(sym.xi == ext_d(CoordForm(pairing(s, t))) * CoeffExpr(2)))
      pass = false, detail += "bracket symmetrization; ";
  }
  // Frame round trip on both sides.
  for (int c = 0; c < kCases && pass; ++c) {
    CoordForm a = rng.mixed_form();
    for (auto fr : {Frame::Minus, Frame::Plus})
      if (!(to_coord(to_frame(a, fr)) == a))
        pass = false, detail += "frame round trip; ";
  }
  // Degree arithmetic: tensor additivity and duality, exact.
  for (int c = 0; c < kCases && pass; ++c) {
    int m = rng.uniform(-4, 4), n = rng.uniform(-4, 4);
    auto dm = bnd::degree(bnd::line_bundle_taupow(m), geom());
    auto dn = bnd::degree(bnd::line_bundle_taupow(n), geom());
    auto dt = bnd::degree(
        bnd::tensor(bnd::line_bundle_taupow(m), bnd::line_bundle_taupow(n)),
        geom());
    auto dd = bnd::degree(bnd::dual(bnd::line_bundle_taupow(m)), geom());
    if (!(dt.deg_plus == dm.deg_plus + dn.deg_plus &&
          dt.deg_minus == dm.deg_minus + dn.deg_minus &&
          dd.deg_plus == -dm.deg_plus && dd.deg_minus == -dm.deg_minus))
      pass = false, detail += "tensor/duality; ";
  }
  // Metric independence of the degree.
  {
    std::vector<bnd::BundleStructure> all = {
        bnd::line_bundle_taupow(2),
        bnd::crossed_pair(GaussRat(1), GaussRat(2), GaussRat(3), GaussRat(5)),
        bnd::triangular_pair(1, 2)};
    for (const auto& s : all) {
      auto base = bnd::degree(s, geom());
      for (int c = 0; c < 10 && pass; ++c) {
        auto d = bnd::degree(s, rng.background(s.rank), geom());
        if (!(d.deg_plus == base.deg_plus && d.deg_minus == base.deg_minus))
          pass = false, detail += "metric dependence; ";
      }
    }
  }
  // Affine slope and a single verdict flip.
  {
    auto w = bnd::extension_window(1, 2);
    for (int c = 0; c < kCases && pass; ++c) {
      Rat a(rng.uniform(1, 99), 100);
      Rat expect = (a * w.degp_V + (Rat(1) - a) * w.degm_V) / 2;
      if (!(w.mu_V(a) == expect)) pass = false, detail += "slope affine; ";
    }
    auto rows = bnd::alpha_scan(w, 1e-3, 1.0 - 1e-3, 1e-3);
    int flips = 0;
    for (size_t i = 1; i < rows.size(); ++i)
      flips += rows[i].stable != rows[i - 1].stable;
    if (flips != 1) pass = false, detail += "verdict flips != 1; ";
  }
  if (pass) detail = "all randomized laws exact at >= 200 cases each";
  report(7, "property suites", pass, tm.seconds(), detail);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  if (g_failures == 0) {
    std::printf("all 7 criteria pass\n");
    return 0;
  }
  std::printf("%d criteria failing\n", g_failures);
  return 1;
}
