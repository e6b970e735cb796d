#include "hopflab/hopf.hpp"

#include <Eigen/Dense>

namespace hopflab::hopf {

using namespace sym;

void VerificationReport::add(std::string name, bool pass, std::string witness) {
  checks.push_back({std::move(name), pass, pass ? "" : std::move(witness)});
}

void VerificationReport::merge(const VerificationReport& o) {
  checks.insert(checks.end(), o.checks.begin(), o.checks.end());
}

bool VerificationReport::all_pass() const { return failures() == 0; }

int VerificationReport::failures() const {
  int n = 0;
  for (auto& c : checks)
    if (!c.pass) ++n;
  return n;
}

// ---------------------------------------------------------------------------

Geometry::Geometry() {
  for (int i = 0; i < 4; ++i) {
    x_[i] = frame_field(Frame::Minus, i);
    y_[i] = frame_field(Frame::Plus, i);
    al_[i] = frame_coform(Frame::Minus, i);
    be_[i] = frame_coform(Frame::Plus, i);
  }
  CoeffExpr c = CoeffExpr::i() * inv_two_pi();
  omega_m_ = (wedge(al_[0], al_[2]) + wedge(al_[1], al_[3])) * c;
  omega_p_ = (wedge(be_[0], be_[2]) + wedge(be_[1], be_[3])) * c;
  gamma_ = wedge(be_[2] - be_[0], wedge(be_[1], be_[3])) * inv_two_pi();
}

CoeffExpr Geometry::inv_two_pi() const {
  return CoeffExpr(Poly::var(SymTab::get().pi, -1)) * frac(1, 2);
}

CoordForm Geometry::vol() const { return wedge(omega_m_, omega_m_) * frac(1, 2); }

CoordForm Geometry::gflat(const VField& v) const {
  auto c = [&](const CoordForm& w) { return interior(v, w).scalar_part(); };
  CoordForm r = al_[2] * c(al_[0]) + al_[3] * c(al_[1]) + al_[0] * c(al_[2]) +
                al_[1] * c(al_[3]);
  return r * inv_two_pi();
}

VField Geometry::gsharp(const CoordForm& w) const {
  auto c = [&](const VField& u) { return interior(u, w).scalar_part(); };
  VField r = x_[2] * c(x_[0]) + x_[3] * c(x_[1]) + x_[0] * c(x_[2]) + x_[1] * c(x_[3]);
  CoeffExpr two_pi = CoeffExpr(Poly::var(SymTab::get().pi)) * CoeffExpr(2);
  return r * two_pi;
}

VField Geometry::omega_inv(const CoordForm& xi, Frame fr) const {
  // i_V omega = (i/2pi) sum_j [f_j(V) fb_j - fb_j(V) f_j]; invert on the
  // frame expansion of xi.
  const VField* f = fr == Frame::Minus ? x_ : y_;
  const CoordForm* w = fr == Frame::Minus ? al_ : be_;
  CoeffExpr two_pi_over_i =
      CoeffExpr(Poly::var(SymTab::get().pi)) * CoeffExpr(2) / CoeffExpr::i();
  VField r;
  for (int j = 0; j < 2; ++j) {
    CoeffExpr p = interior(f[j + 2], xi).scalar_part();  // fb_j component
    CoeffExpr q = interior(f[j], xi).scalar_part();      // f_j component
    r = r + f[j] * (p * two_pi_over_i) - f[j + 2] * (q * two_pi_over_i);
  }
  return r;
}

GenSection Geometry::c_project(const GenSection& s, int sign) const {
  CoeffExpr sg(sign);
  VField u = (s.v + gsharp(s.xi) * sg) * frac(1, 2);
  return GenSection(u, gflat(u) * sg);
}

VField Geometry::bismut(const VField& x, const VField& y, int sign) const {
  CoeffExpr sg(sign);
  GenSection a(x, gflat(x) * -sg);
  GenSection b(y, gflat(y) * sg);
  return c_project(courant(a, b, gamma_), sign).v;
}

CoordForm Geometry::bismut_form(const VField& x, const CoordForm& w, int sign) const {
  CoordForm r;
  for (int i = 0; i < 4; ++i) {
    CoeffExpr v = x.apply(interior(x_[i], w).scalar_part()) -
                  interior(bismut(x, x_[i], sign), w).scalar_part();
    r = r + al_[i] * v;
  }
  return r;
}

VField Geometry::cplx(const VField& v, Frame fr) const {
  const VField* f = fr == Frame::Minus ? x_ : y_;
  const CoordForm* w = fr == Frame::Minus ? al_ : be_;
  auto c = [&](int i) { return interior(v, w[i]).scalar_part(); };
  CoeffExpr i = CoeffExpr::i();
  return (f[0] * c(0) + f[1] * c(1)) * i - (f[2] * c(2) + f[3] * c(3)) * i;
}

CoordForm Geometry::cplx_t(const CoordForm& w, Frame fr) const {
  FrameForm f = to_frame(w, fr);
  FrameForm r(fr);
  for (auto& [m, c] : f.comps()) {
    int p = std::popcount(m & 0x3u), q = std::popcount(m & 0xCu);
    CoeffExpr mult(1);
    for (int k = 0; k < p; ++k) mult = mult * CoeffExpr::i();
    for (int k = 0; k < q; ++k) mult = mult * (-CoeffExpr::i());
    r.add(m, c * mult);
  }
  return to_coord(r);
}

GenSection Geometry::gk(const GenSection& s, int sign) const {
  CoeffExpr sg(sign), half = frac(1, 2);
  VField v = (cplx(s.v, Frame::Plus) + cplx(s.v, Frame::Minus) * sg -
              omega_inv(s.xi, Frame::Plus) + omega_inv(s.xi, Frame::Minus) * sg) *
             half;
  CoordForm xi = (interior(s.v, omega_p_) - interior(s.v, omega_m_) * sg -
                  cplx_t(s.xi, Frame::Plus) - cplx_t(s.xi, Frame::Minus) * sg) *
                 half;
  return GenSection(std::move(v), std::move(xi));
}

// ---------------------------------------------------------------------------
// Verification suites.

namespace {

FrameForm fterm(Frame fr, unsigned mask, CoeffExpr c) {
  return FrameForm::term(fr, mask, std::move(c));
}

void check_eq(VerificationReport& rep, const std::string& name, const FrameForm& got,
              const FrameForm& want) {
  bool ok = got == want;
  rep.add(name, ok, ok ? "" : (got - want).str());
}

void check_eq(VerificationReport& rep, const std::string& name, const CoordForm& got,
              const CoordForm& want) {
  bool ok = got == want;
  rep.add(name, ok, ok ? "" : (got - want).str());
}

void check_zero(VerificationReport& rep, const std::string& name, const CoordForm& got) {
  rep.add(name, got.is_zero(), got.is_zero() ? "" : got.str());
}

void check_zero(VerificationReport& rep, const std::string& name, const VField& got) {
  rep.add(name, got.is_zero(), got.is_zero() ? "" : got.str());
}

unsigned M(int a, int b) { return (1u << a) | (1u << b); }

}  // namespace

VerificationReport verify_frames(const Geometry& g, const std::string& corrupt) {
  VerificationReport rep;
  const Frame MI = Frame::Minus, PL = Frame::Plus;
  CoeffExpr one(1);

  // Structure-equation table: name, actual, expected.
  struct Row {
    std::string name;
    FrameForm got, want;
  };
  std::vector<Row> rows;
  auto row = [&](std::string name, FrameForm got, FrameForm want) {
    rows.push_back({std::move(name), std::move(got), std::move(want)});
  };

  CoordForm r2form{CoeffExpr::r2()};
  row("dol_minus_r2", dol(r2form, MI), fterm(MI, 1u << 0, CoeffExpr::r2()));
  row("dol_plus_r2", dol(r2form, PL), fterm(PL, 1u << 0, CoeffExpr::r2()));

  row("dol_minus_alpha1", dol(g.alpha(0), MI), FrameForm(MI));
  row("dol_minus_alpha2", dol(g.alpha(1), MI), fterm(MI, M(0, 1), -one));
  row("dbar_minus_alpha1", dolbar(g.alpha(0), MI), fterm(MI, M(1, 3), one));
  row("dbar_minus_alpha2", dolbar(g.alpha(1), MI), fterm(MI, M(1, 2), -one));

  row("dol_plus_beta1", dol(g.beta(0), PL), FrameForm(PL));
  row("dol_plus_beta2", dol(g.beta(1), PL), fterm(PL, M(0, 1), one));
  row("dbar_plus_beta1", dolbar(g.beta(0), PL), fterm(PL, M(1, 3), -one));
  row("dbar_plus_beta2", dolbar(g.beta(1), PL), fterm(PL, M(1, 2), one));

  // Full exterior derivatives recombine the pieces.
  row("d_alpha1", to_frame(ext_d(g.alpha(0)), MI), fterm(MI, M(1, 3), one));
  row("d_alpha2", to_frame(ext_d(g.alpha(1)), MI),
      fterm(MI, M(0, 1), -one) + fterm(MI, M(1, 2), -one));

  for (auto& r : rows) {
    FrameForm want = r.want;
    if (r.name == corrupt)
      want = want + fterm(want.frame(), M(2, 3), CoeffExpr(GaussRat(Rat(1, 7))));
    check_eq(rep, r.name, r.got, want);
  }

  // Anti-holomorphy of the invariant coordinate combinations.
  CoordForm zb1r2{CoeffExpr::var(kZb1).div_r2()};
  CoordForm z2r2{CoeffExpr::var(kZ2).div_r2()};
  check_zero(rep, "dbar_minus_zb1_over_r2", to_coord(dolbar(zb1r2, MI)));
  check_zero(rep, "dbar_minus_z2_over_r2", to_coord(dolbar(z2r2, MI)));

  // Coordinate coframe expansions over the invariant frames.
  CoeffExpr z1 = CoeffExpr::var(kZ1), z2 = CoeffExpr::var(kZ2);
  check_eq(rep, "expand_dz1_minus", CoordForm::basis(1u << kDz1),
           g.alpha(0) * z1 - g.alphab(1) * z2);
  check_eq(rep, "expand_dz2_minus", CoordForm::basis(1u << kDz2),
           g.alphab(0) * z2 + g.alpha(1) * z1);
  check_eq(rep, "expand_dz1_plus", CoordForm::basis(1u << kDz1),
           g.beta(0) * z1 - g.beta(1) * CoeffExpr::var(kZb2));
  check_eq(rep, "expand_dz2_plus", CoordForm::basis(1u << kDz2),
           g.beta(0) * z2 + g.beta(1) * CoeffExpr::var(kZb1));

  // Frame/coframe duality.
  for (auto fr : {MI, PL})
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        CoeffExpr v = interior(frame_field(fr, j), frame_coform(fr, i)).scalar_part();
        bool ok = v == (i == j ? CoeffExpr(1) : CoeffExpr());
        if (!ok)
          rep.add("frame_duality", false, frame_coform(fr, i).str());
      }
  rep.add("frame_duality", true);
  return rep;
}

VerificationReport verify_hermitian_pair(const Geometry& g) {
  VerificationReport rep;
  const Frame MI = Frame::Minus, PL = Frame::Plus;

  // omega_+- is the fundamental form of (g, I_+-): omega(U, V) = g(I U, V).
  for (auto fr : {MI, PL}) {
    bool ok = true;
    for (int i = 0; i < 4 && ok; ++i)
      for (int j = 0; j < 4 && ok; ++j) {
        const VField &u = frame_field(fr, i), &v = frame_field(fr, j);
        CoeffExpr lhs = interior(v, interior(u, g.omega(fr))).scalar_part();
        CoeffExpr rhs = interior(v, g.gflat(g.cplx(u, fr))).scalar_part();
        ok = lhs == rhs;
      }
    rep.add(fr == MI ? "omega_minus_from_metric" : "omega_plus_from_metric", ok);
  }
  rep.add("omega_minus_type_11", to_frame(g.omega(MI), MI).pure_bidegree(1, 1));
  rep.add("omega_plus_type_11", to_frame(g.omega(PL), PL).pure_bidegree(1, 1));

  // d^c omega = i (dbar - dol) omega; torsion identities.
  auto dc = [&](Frame fr) {
    FrameForm w = to_frame(g.omega(fr), fr);
    return to_coord(dolbar(w, fr) - dol(w, fr)) * CoeffExpr::i();
  };
  check_eq(rep, "dc_minus_omega_is_minus_gamma", dc(MI), -g.gamma());
  check_eq(rep, "dc_plus_omega_is_gamma", dc(PL), g.gamma());
  CoordForm gamma_minus_frame =
      wedge(g.alphab(0) - g.alpha(0), wedge(g.alpha(1), g.alphab(1))) *
      g.inv_two_pi();
  check_eq(rep, "gamma_same_in_both_frames", gamma_minus_frame, g.gamma());
  check_zero(rep, "gamma_closed", ext_d(g.gamma()));
  check_zero(rep, "gauduchon_minus", ext_d(dc(MI)));
  check_zero(rep, "gauduchon_plus", ext_d(dc(PL)));

  check_eq(rep, "volume_forms_agree", wedge(g.omega(MI), g.omega(MI)),
           wedge(g.omega(PL), g.omega(PL)));

  // Orientation: vol = c * dz1^dz2^dzb1^dzb2 with c = 1/4 * (real positive)
  // times the Euclidean volume at any point.
  Valuation pt;
  pt.z1 = {1.0, 0.0};
  pt.z2 = {0.0, 0.0};
  pt.opaque[SymTab::get().pi] = {3.14159265358979323846, 0.0};
  auto volc = g.vol().comp(0xF).eval(pt);
  rep.add("volume_positive", std::abs(volc.imag()) < 1e-15 && volc.real() > 0.0,
          "vol coefficient " + std::to_string(volc.real()));
  return rep;
}

VerificationReport verify_gk(const Geometry& g) {
  VerificationReport rep;

  // Basis of generalized sections: coordinate vectors and coordinate forms.
  std::vector<GenSection> basis;
  for (int d = 0; d < 4; ++d) basis.emplace_back(VField::basis(d), CoordForm());
  for (int d = 0; d < 4; ++d) basis.emplace_back(VField(), CoordForm::basis(1u << d));

  auto J = [&](const GenSection& s) { return g.gk(s, +1); };
  auto Jp = [&](const GenSection& s) { return g.gk(s, -1); };

  bool sq = true, comm = true, orth = true;
  for (auto& s : basis) {
    GenSection ms = GenSection(-s.v, -s.xi);
    if (!(J(J(s)) == ms)) sq = false;
    if (!(Jp(Jp(s)) == ms)) sq = false;
    if (!(J(Jp(s)) == Jp(J(s)))) comm = false;
  }
  rep.add("gk_squares_to_minus_one", sq);
  rep.add("gk_pair_commutes", comm);

  for (auto& s : basis)
    for (auto& t : basis) {
      if (!(pairing(J(s), J(t)) == pairing(s, t))) orth = false;
      if (!(pairing(Jp(s), Jp(t)) == pairing(s, t))) orth = false;
    }
  rep.add("gk_pairing_orthogonal", orth);

  // G = -J J' is positive: Hermitian matrix <G s_j, conj(s_k)> at a point.
  Valuation pt;
  pt.z1 = {1.0, 0.0};
  pt.z2 = {0.0, 0.0};
  pt.opaque[SymTab::get().pi] = {3.14159265358979323846, 0.0};
  Eigen::MatrixXcd m(8, 8);
  for (int a = 0; a < 8; ++a) {
    GenSection Gs = J(Jp(basis[a]));
    Gs = GenSection(-Gs.v, -Gs.xi);
    for (int b = 0; b < 8; ++b) {
      GenSection bc(basis[b].v.conj(), basis[b].xi.conj());
      m(b, a) = pairing(Gs, bc).eval(pt);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es((m + m.adjoint()) / 2.0);
  double lmin = es.eigenvalues().minCoeff();
  double herm = (m - m.adjoint()).norm();
  rep.add("gk_metric_positive", herm < 1e-12 && lmin > 1e-6,
          "min eigenvalue " + std::to_string(lmin));
  return rep;
}

VerificationReport verify_bismut(const Geometry& g) {
  VerificationReport rep;

  // gflat sends each frame field to the conjugate coframe leg (both frames
  // describe the same metric).
  bool gf = true;
  for (int j = 0; j < 2; ++j) {
    if (!(g.gflat(g.X(j)) == g.alphab(j) * g.inv_two_pi())) gf = false;
    if (!(g.gflat(g.Y(j)) == g.betab(j) * g.inv_two_pi())) gf = false;
    if (!(g.gflat(g.Xb(j)) == g.alpha(j) * g.inv_two_pi())) gf = false;
    if (!(g.gflat(g.Yb(j)) == g.beta(j) * g.inv_two_pi())) gf = false;
  }
  rep.add("gflat_frame_values", gf);

  // Musical maps invert each other on the coordinate bases.
  bool mus = true;
  for (int d = 0; d < 4; ++d) {
    if (!(g.gsharp(g.gflat(VField::basis(d))) == VField::basis(d))) mus = false;
    VField w = g.gsharp(CoordForm::basis(1u << d));
    if (!(g.gflat(w) == CoordForm::basis(1u << d))) mus = false;
  }
  rep.add("musical_maps_inverse", mus);

  // Generators of the isotropic graphs l_-+: X_j - g(X_j), Y_j + g(Y_j);
  // they live entirely in C_- / C_+.
  std::vector<GenSection> lm, lp;
  for (int i = 0; i < 4; ++i) {
    const VField& xv = i < 2 ? g.X(i) : g.Xb(i - 2);
    const VField& yv = i < 2 ? g.Y(i) : g.Yb(i - 2);
    lm.emplace_back(xv, -g.gflat(xv));
    lp.emplace_back(yv, g.gflat(yv));
  }
  bool iso = true;
  for (auto& s : lm) {
    GenSection p = g.c_project(s, +1);
    if (!(p.v.is_zero() && p.xi.is_zero())) iso = false;
    if (!(g.c_project(s, -1) == s)) iso = false;
  }
  for (auto& s : lp) {
    GenSection p = g.c_project(s, -1);
    if (!(p.v.is_zero() && p.xi.is_zero())) iso = false;
    if (!(g.c_project(s, +1) == s)) iso = false;
  }
  rep.add("graph_generators_in_c_pm", iso);

  // All mutual Dorfman brackets between the two generator families vanish.
  bool br = true;
  std::string wit;
  for (auto& a : lm)
    for (auto& b : lp) {
      GenSection u = courant(a, b, g.gamma());
      GenSection w = courant(b, a, g.gamma());
      if (!(u.v.is_zero() && u.xi.is_zero() && w.v.is_zero() && w.xi.is_zero())) {
        br = false;
        if (wit.empty()) wit = u.xi.str();
      }
    }
  rep.add("cross_brackets_vanish", br, wit);

  // The explicit one-form identity behind the first vanishing bracket.
  check_zero(rep, "dual_leg_identity",
             ext_d(g.alphab(0) * g.inv_two_pi()) - interior(g.X(0), g.gamma()));

  // Bismut-parallel frames: nabla^- kills the minus family, nabla^+ the plus
  // family, in all complexified directions.
  bool flat = true;
  for (int d = 0; d < 4; ++d) {
    const VField& dir = frame_field(Frame::Minus, d);
    for (int i = 0; i < 4; ++i) {
      const VField& xv = i < 2 ? g.X(i) : g.Xb(i - 2);
      const VField& yv = i < 2 ? g.Y(i) : g.Yb(i - 2);
      if (!g.bismut(dir, xv, -1).is_zero()) flat = false;
      if (!g.bismut(dir, yv, +1).is_zero()) flat = false;
    }
  }
  rep.add("bismut_parallel_frames", flat);

  bool cflat = true;
  for (int d = 0; d < 4; ++d) {
    const VField& dir = frame_field(Frame::Minus, d);
    for (int i = 0; i < 4; ++i) {
      if (!g.bismut_form(dir, frame_coform(Frame::Minus, i), -1).is_zero()) cflat = false;
      if (!g.bismut_form(dir, frame_coform(Frame::Plus, i), +1).is_zero()) cflat = false;
    }
  }
  rep.add("bismut_parallel_coframes", cflat);

  // Cross flatness used by the commutation theory: for the first coframe leg
  // (the one every invariant bundle structure is built on), the
  // anti-holomorphic part of nabla^+ of ab1 along minus (0,1)-directions
  // vanishes, and symmetrically for nabla^- of bb1.  The second legs are
  // genuinely not cross-flat, which is why bundle connections live on leg 1.
  bool dbar_flat = true;
  for (int k = 0; k < 2; ++k) {
    CoordForm a = g.bismut_form(g.Xb(k), g.alphab(0), +1);
    if (!to_frame(a, Frame::Minus).bidegree_part(0, 1).is_zero()) dbar_flat = false;
    CoordForm b = g.bismut_form(g.Yb(k), g.betab(0), -1);
    if (!to_frame(b, Frame::Plus).bidegree_part(0, 1).is_zero()) dbar_flat = false;
  }
  rep.add("cross_coframe_first_leg_flat", dbar_flat);

  return rep;
}

VerificationReport verify_all(const Geometry& g, const std::string& corrupt) {
  VerificationReport rep = verify_frames(g, corrupt);
  rep.merge(verify_hermitian_pair(g));
  rep.merge(verify_gk(g));
  rep.merge(verify_bismut(g));
  return rep;
}

}  // namespace hopflab::hopf
