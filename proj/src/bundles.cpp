#include "hopflab/bundles.hpp"

#include <cmath>
#include <stdexcept>

namespace hopflab::bundles {

using sym::CoordForm;
using sym::Frame;
using sym::GaussRat;
using sym::Poly;
using sym::SymTab;
using sym::Valuation;
using sym::VField;

// ---------------------------------------------------------------------------
// CMat.

CMat CMat::ident(int n) {
  CMat m(n);
  for (int i = 0; i < n; ++i) m.at(i, i) = GaussRat(1);
  return m;
}

bool CMat::is_zero() const {
  for (const auto& x : a)
    if (!x.is_zero()) return false;
  return true;
}

bool CMat::is_hermitian() const {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (at(i, j) != at(j, i).conj()) return false;
  return true;
}

GaussRat CMat::trace() const {
  GaussRat t;
  for (int i = 0; i < n; ++i) t = t + at(i, i);
  return t;
}

CMat CMat::operator+(const CMat& o) const {
  CMat r(n);
  for (size_t i = 0; i < a.size(); ++i) r.a[i] = a[i] + o.a[i];
  return r;
}

CMat CMat::operator-(const CMat& o) const {
  CMat r(n);
  for (size_t i = 0; i < a.size(); ++i) r.a[i] = a[i] - o.a[i];
  return r;
}

CMat CMat::operator*(const CMat& o) const {
  CMat r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      GaussRat s;
      for (int k = 0; k < n; ++k) s = s + at(i, k) * o.at(k, j);
      r.at(i, j) = s;
    }
  return r;
}

CMat CMat::scaled(const GaussRat& c) const {
  CMat r(n);
  for (size_t i = 0; i < a.size(); ++i) r.a[i] = a[i] * c;
  return r;
}

CMat CMat::adjoint() const {
  CMat r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r.at(i, j) = at(j, i).conj();
  return r;
}

CMat commutator(const CMat& x, const CMat& y) { return x * y - y * x; }

// ---------------------------------------------------------------------------
// FormMat.

bool FormMat::is_zero() const {
  for (const auto& x : a)
    if (!x.is_zero()) return false;
  return true;
}

CoordForm FormMat::trace() const {
  CoordForm t;
  for (int i = 0; i < n; ++i) t = t + at(i, i);
  return t;
}

FormMat FormMat::operator+(const FormMat& o) const {
  FormMat r(n);
  for (size_t i = 0; i < a.size(); ++i) r.a[i] = a[i] + o.a[i];
  return r;
}

FormMat FormMat::operator-(const FormMat& o) const {
  FormMat r(n);
  for (size_t i = 0; i < a.size(); ++i) r.a[i] = a[i] - o.a[i];
  return r;
}

FormMat FormMat::adjoint() const {
  FormMat r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r.at(i, j) = at(j, i).conj();
  return r;
}

FormMat wedge(const FormMat& x, const FormMat& y) {
  FormMat r(x.n);
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < x.n; ++j) {
      CoordForm s;
      for (int k = 0; k < x.n; ++k) s = s + wedge(x.at(i, k), y.at(k, j));
      r.at(i, j) = s;
    }
  return r;
}

FormMat ext_d(const FormMat& x) {
  FormMat r(x.n);
  for (size_t i = 0; i < x.a.size(); ++i) r.a[i] = sym::ext_d(x.a[i]);
  return r;
}

// ---------------------------------------------------------------------------
// Exact scalars from floating input.

static sym::Rat rat_of_double(double d) {
  if (d == 0.0) return sym::Rat(0);
  if (!std::isfinite(d)) throw std::invalid_argument("non-finite scalar");
  int e = 0;
  double m = std::frexp(d, &e);
  auto mi = static_cast<long long>(std::ldexp(m, 53));
  e -= 53;
  boost::multiprecision::cpp_int num(mi), den(1);
  if (e >= 0)
    num <<= e;
  else
    den <<= -e;
  return sym::Rat(num, den);
}

// ---------------------------------------------------------------------------
// Constructors.

BundleStructure line_bundle_taupow(int m) {
  BundleStructure s;
  s.rank = 1;
  s.cplus = CMat(1);
  s.cminus = CMat(1);
  GaussRat c(sym::Rat(m) / 2);
  s.cplus.at(0, 0) = c;
  s.cminus.at(0, 0) = c;
  s.exact = true;
  return s;
}

BundleStructure line_bundle(std::complex<double> eta, double tau) {
  if (eta == std::complex<double>(0.0, 0.0))
    throw std::invalid_argument("line bundle parameter must be nonzero");
  if (!(tau > 1.0)) throw std::invalid_argument("tau must exceed 1");
  double lt = std::log(tau);
  GaussRat c(rat_of_double(std::log(std::abs(eta)) / (2.0 * lt)),
             rat_of_double(std::arg(eta) / (2.0 * lt)));
  BundleStructure s;
  s.rank = 1;
  s.cplus = CMat(1);
  s.cminus = CMat(1);
  s.cplus.at(0, 0) = c;
  s.cminus.at(0, 0) = c;
  s.exact = false;
  return s;
}

BundleStructure tensor(const BundleStructure& x, const BundleStructure& y) {
  if (x.rank != 1 || y.rank != 1)
    throw std::invalid_argument("tensor product implemented for rank 1 only");
  BundleStructure s;
  s.rank = 1;
  s.cplus = x.cplus + y.cplus;
  s.cminus = x.cminus + y.cminus;
  s.exact = x.exact && y.exact;
  return s;
}

BundleStructure dual(const BundleStructure& x) {
  if (x.rank != 1)
    throw std::invalid_argument("dual implemented for rank 1 only");
  BundleStructure s;
  s.rank = 1;
  s.cplus = x.cplus.scaled(GaussRat(-1));
  s.cminus = x.cminus.scaled(GaussRat(-1));
  s.exact = x.exact;
  return s;
}

BundleStructure crossed_pair(const GaussRat& eta, const GaussRat& xi,
                             const GaussRat& a, const GaussRat& b) {
  if (eta == xi || a == b)
    throw std::invalid_argument(
        "crossed family requires distinct coefficients on each side");
  BundleStructure s;
  s.rank = 2;
  s.cplus = CMat(2);
  s.cplus.at(0, 0) = eta;
  s.cplus.at(1, 1) = xi;
  // Diagonal a, b in the frame {e1+e2, e1-e2}, written in {e1, e2}.
  GaussRat half(sym::Rat(1, 2));
  s.cminus = CMat(2);
  s.cminus.at(0, 0) = (a + b) * half;
  s.cminus.at(0, 1) = (a - b) * half;
  s.cminus.at(1, 0) = (a - b) * half;
  s.cminus.at(1, 1) = (a + b) * half;
  s.exact = true;
  return s;
}

BundleStructure triangular_pair(int m_plus, int m_minus) {
  if (m_plus <= 0) throw std::invalid_argument("m_plus must be positive");
  if (m_minus < 2) throw std::invalid_argument("m_minus must be at least 2");
  BundleStructure s;
  s.rank = 2;
  s.cplus = CMat(2);
  s.cminus = CMat(2);
  GaussRat cp(sym::Rat(-m_plus, 2)), cm(sym::Rat(-m_minus, 2));
  s.cplus.at(0, 1) = cp;
  s.cplus.at(1, 1) = cp;
  s.cminus.at(0, 1) = cm;
  s.cminus.at(1, 1) = cm;
  s.exact = true;
  return s;
}

HermitianBackground HermitianBackground::ident(int rank) {
  return HermitianBackground{CMat::ident(rank)};
}

// ---------------------------------------------------------------------------
// Connection, curvature.

static const CMat& side_matrix(const BundleStructure& s, Frame fr) {
  return fr == Frame::Plus ? s.cplus : s.cminus;
}

static FormMat scalar_times_form(const CMat& c, const CoordForm& f) {
  FormMat r(c.n);
  for (int i = 0; i < c.n; ++i)
    for (int j = 0; j < c.n; ++j) r.at(i, j) = f * CoeffExpr(c.at(i, j));
  return r;
}

FormMat connection_form(const BundleStructure& s, Frame fr) {
  return scalar_times_form(side_matrix(s, fr), sym::frame_coform(fr, 2));
}

FormMat dbar_squared(const BundleStructure& s, Frame fr) {
  FormMat a = connection_form(s, fr);
  FormMat dbar_a(a.n);
  for (size_t i = 0; i < a.a.size(); ++i)
    dbar_a.a[i] = sym::to_coord(sym::dolbar(a.a[i], fr));
  return dbar_a + wedge(a, a);
}

static CMat exact_inverse(const CMat& h) {
  if (h.n == 1) {
    if (h.at(0, 0).is_zero()) throw std::domain_error("singular background metric");
    CMat r(1);
    r.at(0, 0) = h.at(0, 0).inverse();
    return r;
  }
  if (h.n == 2) {
    GaussRat det = h.at(0, 0) * h.at(1, 1) - h.at(0, 1) * h.at(1, 0);
    if (det.is_zero()) throw std::domain_error("singular background metric");
    GaussRat di = det.inverse();
    CMat r(2);
    r.at(0, 0) = h.at(1, 1) * di;
    r.at(0, 1) = -h.at(0, 1) * di;
    r.at(1, 0) = -h.at(1, 0) * di;
    r.at(1, 1) = h.at(0, 0) * di;
    return r;
  }
  throw std::invalid_argument("rank above 2 not supported");
}

static void require_positive_hermitian(const CMat& h) {
  if (!h.is_hermitian())
    throw std::domain_error("background metric must be Hermitian");
  if (!(h.at(0, 0).re > 0))
    throw std::domain_error("background metric must be positive");
  if (h.n == 2) {
    GaussRat det = h.at(0, 0) * h.at(1, 1) - h.at(0, 1) * h.at(1, 0);
    if (!(det.re > 0))
      throw std::domain_error("background metric must be positive");
  }
}

FormMat chern_curvature(const BundleStructure& s, const HermitianBackground& hb,
                        Frame fr) {
  if (hb.h.n != s.rank)
    throw std::invalid_argument("background size mismatch");
  require_positive_hermitian(hb.h);
  const CMat& c = side_matrix(s, fr);
  // Connection matrix of the metric-compatible connection with prescribed
  // (0,1)-part: theta = A - h^{-1} C* h (holomorphic leg), for constant h.
  CMat hc = exact_inverse(hb.h) * c.adjoint() * hb.h;
  FormMat theta = connection_form(s, fr) +
                  scalar_times_form(hc.scaled(GaussRat(-1)),
                                    sym::frame_coform(fr, 0));
  return ext_d(theta) + wedge(theta, theta);
}

// ---------------------------------------------------------------------------
// Degrees.

// Exact division of normalized fractions, allowing r2-power rebalancing.
static std::optional<CoeffExpr> div_coeff(const CoeffExpr& a, const CoeffExpr& b) {
  if (b.is_zero()) return std::nullopt;
  if (a.is_zero()) return CoeffExpr();
  Poly an = a.num();
  for (int extra = 0; extra <= 6; ++extra) {
    if (auto q = an.div_exact(b.num())) {
      int k = a.r2pow() + extra - b.r2pow();
      if (k >= 0) return CoeffExpr(*q, k);
      Poly p = *q;
      for (int i = 0; i < -k; ++i) p = p * Poly::r2();
      return CoeffExpr(p, 0);
    }
    an = an * Poly::r2();
  }
  return std::nullopt;
}

std::optional<CoeffExpr> exact_ratio(const CoeffExpr& a, const CoeffExpr& b) {
  return div_coeff(a, b);
}

Rat degree_of_curvature(const FormMat& f, Frame fr, const hopf::Geometry& g) {
  constexpr unsigned kTop = 0xF;
  CoordForm top = wedge(f.trace(), g.omega(fr));
  CoeffExpr num = top.comp(kTop);
  CoeffExpr den = g.vol().comp(kTop);
  auto ratio = div_coeff(num, den);
  CoeffExpr deg;
  if (ratio) deg = CoeffExpr::i() * g.inv_two_pi() * (*ratio);
  if (!ratio || !deg.is_constant())
    throw std::domain_error(
        "curvature density is not a constant multiple of the volume form; "
        "use the quadrature path");
  GaussRat v = deg.constant_value();
  if (!(v.im == 0))
    throw std::domain_error("degree came out non-real");
  return v.re;
}

DegreeResult degree(const BundleStructure& s, const HermitianBackground& h,
                    const hopf::Geometry& g) {
  DegreeResult r;
  r.rank = s.rank;
  r.exact = s.exact;
  r.deg_plus = degree_of_curvature(chern_curvature(s, h, Frame::Plus),
                                   Frame::Plus, g);
  r.deg_minus = degree_of_curvature(chern_curvature(s, h, Frame::Minus),
                                    Frame::Minus, g);
  return r;
}

DegreeResult degree(const BundleStructure& s, const hopf::Geometry& g) {
  return degree(s, HermitianBackground::ident(s.rank), g);
}

Rat DegreeResult::alpha_degree(const Rat& alpha) const {
  return alpha * deg_plus + (Rat(1) - alpha) * deg_minus;
}

Rat DegreeResult::alpha_slope(const Rat& alpha) const {
  return alpha_degree(alpha) / rank;
}

// ---------------------------------------------------------------------------
// Quadrature oracle.

static void legendre_nodes(int n, double a, double b, std::vector<double>& x,
                           std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p0 = 0, p1 = 0;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2 * k + 1) * t * p1 - k * p2) / (k + 1);
      }
      double dp = n * (t * p0 - p1) / (t * t - 1.0);
      double dt = p0 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    p0 = 1.0;
    p1 = 0.0;
    for (int k = 0; k < n; ++k) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2 * k + 1) * t * p1 - k * p2) / (k + 1);
    }
    double dp = n * (t * p0 - p1) / (t * t - 1.0);
    x[i] = 0.5 * (a + b) + 0.5 * (b - a) * t;
    w[i] = (b - a) / ((1.0 - t * t) * dp * dp);
  }
}

double quadrature_degree(std::complex<double> eta, double tau, Frame fr,
                         const hopf::Geometry& g) {
  BundleStructure s = line_bundle(eta, tau);
  FormMat f = chern_curvature(s, HermitianBackground::ident(1), fr);
  constexpr unsigned kTop = 0xF;
  CoeffExpr num = wedge(f.trace(), g.omega(fr)).comp(kTop);
  CoeffExpr den = g.vol().comp(kTop);

  Valuation val;
  auto& tab = SymTab::get();
  val.opaque[tab.pi] = M_PI;
  val.opaque[tab.lntau] = std::log(tau);

  constexpr int kNr = 24, kNt = 24, kNp = 8;
  std::vector<double> xr, wr, xt, wt;
  legendre_nodes(kNr, 1.0, tau, xr, wr);
  legendre_nodes(kNt, 0.0, M_PI / 2.0, xt, wt);
  const double wp = 2.0 * M_PI / kNp;

  std::complex<double> inum(0.0), iden(0.0);
  for (int ir = 0; ir < kNr; ++ir)
    for (int it = 0; it < kNt; ++it) {
      double rho = xr[ir], th = xt[it];
      double jac = wr[ir] * wt[it] * wp * wp * rho * rho * rho *
                   std::cos(th) * std::sin(th);
      for (int i1 = 0; i1 < kNp; ++i1)
        for (int i2 = 0; i2 < kNp; ++i2) {
          double p1 = wp * i1, p2 = wp * i2;
          val.z1 = std::polar(rho * std::cos(th), p1);
          val.z2 = std::polar(rho * std::sin(th), p2);
          inum += jac * num.eval(val);
          iden += jac * den.eval(val);
        }
    }
  // The coordinate top form equals 4 dx1 dy1 dx2 dy2; the factor cancels in
  // the ratio.
  std::complex<double> deg =
      std::complex<double>(0.0, 1.0) / (2.0 * M_PI) * inum / iden;
  return deg.real();
}

// ---------------------------------------------------------------------------
// Commutation defect.

namespace {

using Sec = std::vector<CoeffExpr>;

Sec cov_deriv(const VField& x, const Sec& u, const CoordForm& leg,
              const CMat& c) {
  CoeffExpr lx = sym::interior(x, leg).scalar_part();
  Sec r(u.size());
  for (size_t i = 0; i < u.size(); ++i) {
    CoeffExpr conn;
    for (size_t j = 0; j < u.size(); ++j)
      conn = conn + CoeffExpr(c.at(static_cast<int>(i), static_cast<int>(j))) * u[j];
    r[i] = x.apply(u[i]) + lx * conn;
  }
  return r;
}

}  // namespace

DefectResult commutation_defect(const BundleStructure& s,
                                const hopf::Geometry& g) {
  const int r = s.rank;
  const CoordForm& legp = g.betab(0);   // plus-side (0,1) leg
  const CoordForm& legm = g.alphab(0);  // minus-side (0,1) leg
  DefectResult out;
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      const VField& x = g.Yb(j);  // plus anti-holomorphic direction
      const VField& y = g.Xb(k);  // minus anti-holomorphic direction
      VField nmxy = g.bismut(x, y, -1);
      VField npyx = g.bismut(y, x, +1);
      CMat m(r);
      for (int col = 0; col < r; ++col) {
        Sec e(r, CoeffExpr());
        e[col] = CoeffExpr(1);
        Sec t1 = cov_deriv(x, cov_deriv(y, e, legm, s.cminus), legp, s.cplus);
        Sec t2 = cov_deriv(nmxy, e, legm, s.cminus);
        Sec t3 = cov_deriv(y, cov_deriv(x, e, legp, s.cplus), legm, s.cminus);
        Sec t4 = cov_deriv(npyx, e, legp, s.cplus);
        for (int row = 0; row < r; ++row) {
          CoeffExpr d = t1[row] - t2[row] - t3[row] + t4[row];
          if (!d.is_constant() && !d.is_zero())
            throw std::logic_error(
                "commutation defect failed to reduce to constants: " + d.str());
          m.at(row, col) = d.is_zero() ? GaussRat() : d.constant_value();
        }
      }
      out.grid[j][k] = m;
    }
  out.packaged = FormMat(r);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      CoordForm two = wedge(g.betab(j), g.alphab(k));
      for (int i = 0; i < r; ++i)
        for (int l = 0; l < r; ++l)
          out.packaged.at(i, l) =
              out.packaged.at(i, l) + two * CoeffExpr(out.grid[j][k].at(i, l));
    }
  return out;
}

bool DefectResult::is_zero() const {
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k)
      if (!grid[j][k].is_zero()) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Stability windows.

Rat StabilityWindow::mu_V(const Rat& alpha) const {
  return (alpha * degp_V + (Rat(1) - alpha) * degm_V) / 2;
}

Rat StabilityWindow::mu_sub(const Rat& alpha) const {
  return alpha * degp_sub + (Rat(1) - alpha) * degm_sub;
}

bool StabilityWindow::stable(const Rat& alpha) const {
  return mu_sub(alpha) < mu_V(alpha);
}

StabilityWindow extension_window(int m_plus, int m_minus) {
  if (m_plus <= 0) throw std::invalid_argument("m_plus must be positive");
  if (m_minus < 2) throw std::invalid_argument("m_minus must be at least 2");
  StabilityWindow w;
  w.degp_V = -m_plus;
  w.degm_V = m_minus;
  w.degp_sub = 0;
  w.degm_sub = 0;
  w.alpha0 = Rat(m_minus, m_plus + m_minus);
  return w;
}

StabilityWindow bounded_window(int deg_plus_L, int m_minus) {
  if (deg_plus_L >= 0)
    throw std::invalid_argument("deg_plus_L must be negative");
  if (m_minus <= 0) throw std::invalid_argument("m_minus must be positive");
  StabilityWindow w;
  w.degp_V = 0;
  w.degm_V = 0;
  w.degp_sub = deg_plus_L;
  w.degm_sub = m_minus;
  w.alpha0 = Rat(m_minus, m_minus - deg_plus_L);
  return w;
}

std::vector<ScanRow> alpha_scan(const StabilityWindow& w, double lo, double hi,
                                double step) {
  if (!(lo > 0.0 && hi < 1.0 && lo <= hi && step > 0.0))
    throw std::invalid_argument("scan grid must lie inside (0, 1)");
  double dpV = static_cast<double>(w.degp_V), dmV = static_cast<double>(w.degm_V);
  double dpS = static_cast<double>(w.degp_sub),
         dmS = static_cast<double>(w.degm_sub);
  std::vector<ScanRow> rows;
  for (long i = 0;; ++i) {
    double a = lo + step * static_cast<double>(i);
    if (a > hi + step * 0.5) break;
    ScanRow r;
    r.alpha = a;
    r.mu_V = (a * dpV + (1.0 - a) * dmV) / 2.0;
    r.mu_sub = a * dpS + (1.0 - a) * dmS;
    r.stable = r.mu_sub < r.mu_V;
    rows.push_back(r);
  }
  return rows;
}

std::optional<std::pair<double, double>> verdict_flip_bracket(
    const std::vector<ScanRow>& rows) {
  for (size_t i = 1; i < rows.size(); ++i)
    if (rows[i].stable != rows[i - 1].stable)
      return std::make_pair(rows[i - 1].alpha, rows[i].alpha);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Constant sub-line scan.

namespace {

SubLine make_exact_line(const GaussRat& v0, const GaussRat& v1,
                        const GaussRat& ev) {
  SubLine l;
  l.exact = true;
  l.v_exact[0] = v0;
  l.v_exact[1] = v1;
  l.eigen_exact = ev;
  std::complex<double> a = v0.to_complex(), b = v1.to_complex();
  double nrm = std::sqrt(std::norm(a) + std::norm(b));
  l.v[0] = a / nrm;
  l.v[1] = b / nrm;
  l.eigenvalue = ev.to_complex();
  return l;
}

SubLine make_numeric_line(std::complex<double> v0, std::complex<double> v1,
                          std::complex<double> ev) {
  SubLine l;
  l.exact = false;
  double nrm = std::sqrt(std::norm(v0) + std::norm(v1));
  l.v[0] = v0 / nrm;
  l.v[1] = v1 / nrm;
  l.eigenvalue = ev;
  return l;
}

bool same_line(const SubLine& a, const SubLine& b) {
  if (a.whole_space || b.whole_space) return true;
  if (a.exact && b.exact)
    return (a.v_exact[0] * b.v_exact[1] - a.v_exact[1] * b.v_exact[0]).is_zero();
  std::complex<double> cr = a.v[0] * b.v[1] - a.v[1] * b.v[0];
  return std::abs(cr) < 1e-9;
}

}  // namespace

std::vector<SubLine> invariant_lines(const CMat& c) {
  if (c.n != 2)
    throw std::invalid_argument("line scan implemented for rank 2 only");
  const GaussRat &a = c.at(0, 0), &b = c.at(0, 1), &d = c.at(1, 0),
                 &e = c.at(1, 1);
  std::vector<SubLine> lines;
  if (b.is_zero() && d.is_zero() && a == e) {
    SubLine l;
    l.whole_space = true;
    l.exact = true;
    l.eigen_exact = a;
    l.eigenvalue = a.to_complex();
    l.v[0] = 1.0;
    l.v[1] = 0.0;
    l.v_exact[0] = GaussRat(1);
    lines.push_back(l);
    return lines;
  }
  GaussRat tr = a + e;
  GaussRat disc = (a - e) * (a - e) + GaussRat(4) * b * d;
  GaussRat half(sym::Rat(1, 2));
  auto push_exact = [&](const GaussRat& lam) {
    GaussRat v0, v1;
    if (!b.is_zero()) {
      v0 = b;
      v1 = lam - a;
    } else if (!d.is_zero()) {
      v0 = lam - e;
      v1 = d;
    } else {
      // Diagonal with distinct entries.
      if (lam == a) {
        v0 = GaussRat(1);
      } else {
        v1 = GaussRat(1);
      }
    }
    SubLine l = make_exact_line(v0, v1, lam);
    for (const auto& o : lines)
      if (same_line(l, o)) return;
    lines.push_back(l);
  };
  if (auto sq = sym::gauss_sqrt(disc)) {
    push_exact((tr + *sq) * half);
    push_exact((tr - *sq) * half);
    return lines;
  }
  // Irrational eigenvalues: floating fallback.
  std::complex<double> ac = a.to_complex(), bc = b.to_complex(),
                       dc = d.to_complex(), ec = e.to_complex();
  std::complex<double> trc = ac + ec;
  std::complex<double> sq = std::sqrt((ac - ec) * (ac - ec) + 4.0 * bc * dc);
  for (std::complex<double> lam : {0.5 * (trc + sq), 0.5 * (trc - sq)}) {
    SubLine l = std::abs(bc) > 1e-14
                    ? make_numeric_line(bc, lam - ac, lam)
                    : (std::abs(dc) > 1e-14
                           ? make_numeric_line(lam - ec, dc, lam)
                           : make_numeric_line(std::abs(lam - ac) < 1e-12 ? 1.0
                                                                          : 0.0,
                                               std::abs(lam - ac) < 1e-12 ? 0.0
                                                                          : 1.0,
                                               lam));
    bool dup = false;
    for (const auto& o : lines) dup = dup || same_line(l, o);
    if (!dup) lines.push_back(l);
  }
  return lines;
}

SublineScan constant_subline_scan(const BundleStructure& s,
                                  const hopf::Geometry& g) {
  (void)g;
  if (s.rank != 2)
    throw std::invalid_argument("sub-line scan applies to rank-2 structures");
  SublineScan scan;
  scan.plus = invariant_lines(s.cplus);
  scan.minus = invariant_lines(s.cminus);
  auto add_common = [&](const SubLine& lp, const SubLine& lm) {
    SublineScan::Common c;
    c.line = lp.whole_space ? lm : lp;
    // Degree of the invariant line on each side from the connection
    // eigenvalue: plus side 2 Re, minus side -2 Re.
    c.deg_plus = 2.0 * lp.eigenvalue.real();
    c.deg_minus = -2.0 * lm.eigenvalue.real();
    scan.common.push_back(c);
  };
  for (const auto& lp : scan.plus)
    for (const auto& lm : scan.minus)
      if (same_line(lp, lm)) add_common(lp, lm);
  return scan;
}

bool SublineScan::stable(double alpha, const DegreeResult& total) const {
  double muV = (alpha * total.deg_plus_f() + (1.0 - alpha) * total.deg_minus_f()) /
               total.rank;
  for (const auto& c : common) {
    double mu = alpha * c.deg_plus + (1.0 - alpha) * c.deg_minus;
    if (!(mu < muV)) return false;
  }
  return true;
}

}  // namespace hopflab::bundles
