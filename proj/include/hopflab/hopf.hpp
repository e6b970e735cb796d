#pragma once

// The standard Hopf surface as a bi-Hermitian / generalized Kahler pair,
// with an exact verification suite for every structural identity the rest
// of the library depends on.
//
// Both complex structures share the round metric; the shared torsion
// three-form gamma twists the Dorfman bracket, and the Bismut connections
// of the two structures make the opposite frames parallel.

#include "hopflab/frames.hpp"

namespace hopflab::hopf {

using sym::CoeffExpr;
using sym::CoordForm;
using sym::Frame;
using sym::FrameForm;
using sym::GenSection;
using sym::VField;

struct Check {
  std::string name;
  bool pass = false;
  std::string witness;  // stringified mismatch, empty when passing
};

struct VerificationReport {
  std::vector<Check> checks;
  void add(std::string name, bool pass, std::string witness = "");
  void merge(const VerificationReport& o);
  bool all_pass() const;
  int failures() const;
};

class Geometry {
 public:
  Geometry();

  // Frame fields and coframes, i in {0, 1}.
  const VField& X(int i) const { return x_[i]; }
  const VField& Xb(int i) const { return x_[i + 2]; }
  const VField& Y(int i) const { return y_[i]; }
  const VField& Yb(int i) const { return y_[i + 2]; }
  const CoordForm& alpha(int i) const { return al_[i]; }
  const CoordForm& alphab(int i) const { return al_[i + 2]; }
  const CoordForm& beta(int i) const { return be_[i]; }
  const CoordForm& betab(int i) const { return be_[i + 2]; }

  const CoordForm& omega(Frame fr) const {
    return fr == Frame::Minus ? omega_m_ : omega_p_;
  }
  const CoordForm& gamma() const { return gamma_; }
  CoordForm vol() const;  // omega^2 / 2 (either side; they agree)

  CoeffExpr inv_two_pi() const;  // 1/(2 pi), exact

  // Metric musical maps (the shared round metric).
  CoordForm gflat(const VField& v) const;
  VField gsharp(const CoordForm& w) const;

  // Inverse of v -> i_v omega_fr on one-forms.
  VField omega_inv(const CoordForm& xi, Frame fr) const;

  // Projection of a generalized section onto C_+ (sign=+1) / C_- (sign=-1),
  // the graphs of +-g.
  GenSection c_project(const GenSection& s, int sign) const;

  // Bismut connections: nabla^+ (sign=+1) and nabla^- (sign=-1) on vector
  // fields, via the twisted Dorfman bracket, and the induced connection on
  // one-forms.
  VField bismut(const VField& x, const VField& y, int sign) const;
  CoordForm bismut_form(const VField& x, const CoordForm& w, int sign) const;

  // Complex structure endomorphisms and their transposes.
  VField cplx(const VField& v, Frame fr) const;           // I_+/- v
  CoordForm cplx_t(const CoordForm& w, Frame fr) const;   // w . I_+/-

  // Generalized complex structures of the reconstruction: sign=+1 gives J,
  // sign=-1 gives J'.
  GenSection gk(const GenSection& s, int sign) const;

 private:
  VField x_[4], y_[4];
  CoordForm al_[4], be_[4];
  CoordForm omega_m_, omega_p_, gamma_;
};

// Exact identity suites.  `corrupt` (frames suite only) names a structure
// equation whose expected value is deliberately perturbed, to exercise the
// failure path end to end.
VerificationReport verify_frames(const Geometry& g, const std::string& corrupt = "");
VerificationReport verify_hermitian_pair(const Geometry& g);
VerificationReport verify_gk(const Geometry& g);
VerificationReport verify_bismut(const Geometry& g);
VerificationReport verify_all(const Geometry& g, const std::string& corrupt = "");

}  // namespace hopflab::hopf
