// C interface: JSON requests in, JSON results out, status codes shared with
// the CLI exit codes.

#include "hopflab.h"

#include <cmath>
#include <complex>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hopflab/bundles.hpp"
#include "hopflab/hesolver.hpp"
#include "hopflab/hopf.hpp"

using nlohmann::json;
namespace bnd = hopflab::bundles;
namespace hes = hopflab::hesolver;
using hopflab::sym::GaussRat;
using hopflab::sym::Rat;

struct hopflab_ctx {
  hopflab::hopf::Geometry geometry;
  std::string last_error;
};

namespace {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

json parse_request(const char* request_json) {
  if (request_json == nullptr) return json::object();
  json j = json::parse(request_json, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw config_error("request is not valid JSON");
  if (!j.is_object()) throw config_error("request must be a JSON object");
  return j;
}

double require_number(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number())
    throw config_error(std::string("missing numeric field '") + key + "'");
  return j[key].get<double>();
}

long require_int(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw config_error(std::string("missing integer field '") + key + "'");
  return j[key].get<long>();
}

double number_or(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw config_error(std::string("field '") + key + "' must be numeric");
  return j[key].get<double>();
}

double require_alpha(const json& j) {
  double alpha = require_number(j, "alpha");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw config_error("alpha must lie strictly in (0, 1)");
  return alpha;
}

double require_tau(const json& j, double fallback = 0.0) {
  double tau = fallback > 0 ? number_or(j, "tau", fallback)
                            : require_number(j, "tau");
  if (!(tau > 1.0)) throw config_error("tau must exceed 1");
  return tau;
}

json rat_json(const Rat& r) {
  std::ostringstream num, den;
  num << boost::multiprecision::numerator(r);
  den << boost::multiprecision::denominator(r);
  return json{{"num", num.str()},
              {"den", den.str()},
              {"value", static_cast<double>(r)}};
}

hes::SolverConfig solver_config(const json& req, double alpha, double tau) {
  hes::SolverConfig cfg;
  cfg.alpha = alpha;
  cfg.tau = tau;
  if (req.contains("solver")) {
    const json& s = req["solver"];
    if (!s.is_object()) throw config_error("'solver' must be an object");
    cfg.grid_n = static_cast<int>(number_or(s, "N", cfg.grid_n));
    cfg.eps0 = number_or(s, "eps0", cfg.eps0);
    cfg.eps_ratio = number_or(s, "ratio", cfg.eps_ratio);
    cfg.eps_min = number_or(s, "eps_min", cfg.eps_min);
    cfg.newton_tol = number_or(s, "newton_tol", cfg.newton_tol);
    cfg.blowup_cap = number_or(s, "blowup_cap", cfg.blowup_cap);
  }
  if (cfg.grid_n < 8 || cfg.grid_n % 2 != 0)
    throw config_error("solver.N must be an even integer >= 8");
  if (!(cfg.eps0 > 0 && cfg.eps_min > 0 && cfg.eps_min <= cfg.eps0))
    throw config_error("need 0 < eps_min <= eps0");
  if (!(cfg.eps_ratio > 0 && cfg.eps_ratio < 1))
    throw config_error("solver.ratio must lie in (0, 1)");
  return cfg;
}

bnd::BundleStructure rank2_family(const json& req) {
  if (!req.contains("family") || !req["family"].is_string())
    throw config_error("missing string field 'family'");
  std::string family = req["family"].get<std::string>();
  if (family == "crossed") {
    GaussRat eta{require_int(req, "eta")}, xi{require_int(req, "xi")};
    GaussRat a{require_int(req, "a")}, b{require_int(req, "b")};
    if (eta == xi || a == b)
      throw config_error("crossed family needs eta != xi and a != b");
    return bnd::crossed_pair(eta, xi, a, b);
  }
  if (family == "triangular") {
    long mp = require_int(req, "m_plus"), mm = require_int(req, "m_minus");
    if (mp <= 0 || mm < 2)
      throw config_error("triangular family needs m_plus > 0, m_minus >= 2");
    return bnd::triangular_pair(static_cast<int>(mp), static_cast<int>(mm));
  }
  throw config_error("unknown rank-2 family '" + family +
                     "' (expected crossed or triangular)");
}

json field_json(const hes::InvariantField& f) {
  json nodes = json::array();
  for (const auto& m : f.v) {
    json rows = json::array();
    for (int i = 0; i < f.rank; ++i) {
      json row = json::array();
      for (int j = 0; j < f.rank; ++j)
        row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
      rows.push_back(std::move(row));
    }
    nodes.push_back(std::move(rows));
  }
  return json{{"rank", f.rank}, {"nodes", std::move(nodes)}};
}

using op_body = json (*)(hopflab_ctx*, const json&);

hopflab_status run_op(hopflab_ctx* ctx, const char* request_json, char** out,
                      op_body body) {
  if (ctx == nullptr) return HOPFLAB_ERR_CONFIG;
  if (out == nullptr) {
    ctx->last_error = "output parameter is null";
    return HOPFLAB_ERR_CONFIG;
  }
  *out = nullptr;
  ctx->last_error.clear();
  try {
    json req = parse_request(request_json);
    json result = body(ctx, req);
    hopflab_status st = HOPFLAB_OK;
    if (result.contains("_status")) {
      st = static_cast<hopflab_status>(result["_status"].get<int>());
      result.erase("_status");
    }
    result["schema"] = 1;
    *out = dup_string(result.dump(2));
    if (*out == nullptr) {
      ctx->last_error = "out of memory";
      return HOPFLAB_ERR_INTERNAL;
    }
    return st;
  } catch (const config_error& e) {
    ctx->last_error = e.what();
    return HOPFLAB_ERR_CONFIG;
  } catch (const std::exception& e) {
    ctx->last_error = e.what();
    return HOPFLAB_ERR_INTERNAL;
  }
}

json op_verify(hopflab_ctx* ctx, const json& req) {
  std::string corrupt;
  if (req.contains("corrupt")) {
    if (!req["corrupt"].is_string())
      throw config_error("'corrupt' must be a string");
    corrupt = req["corrupt"].get<std::string>();
  }
  auto report = hopflab::hopf::verify_all(ctx->geometry, corrupt);
  json checks = json::array();
  for (const auto& c : report.checks)
    checks.push_back(json{{"check_name", c.name},
                          {"status", c.pass ? "pass" : "fail"},
                          {"witness_text", c.witness}});
  json result{{"all_pass", report.all_pass()},
              {"failures", report.failures()},
              {"checks", std::move(checks)}};
  if (!report.all_pass()) result["_status"] = HOPFLAB_ERR_VERIFY;
  return result;
}

json op_degree(hopflab_ctx* ctx, const json& req) {
  double alpha = require_alpha(req);
  double tau = require_tau(req);
  bnd::BundleStructure s;
  std::complex<double> eta;
  if (req.contains("taupow")) {
    long m = require_int(req, "taupow");
    s = bnd::line_bundle_taupow(static_cast<int>(m));
    eta = std::pow(tau, static_cast<double>(m));
  } else if (req.contains("eta")) {
    const json& e = req["eta"];
    if (e.is_object() && e.contains("re")) {
      eta = {require_number(e, "re"), number_or(e, "im", 0.0)};
    } else if (e.is_object() && e.contains("r")) {
      double r = require_number(e, "r"), th = number_or(e, "theta", 0.0);
      eta = std::polar(r, th);
    } else {
      throw config_error("'eta' must be {re, im} or {r, theta}");
    }
    if (std::abs(eta) <= 0.0) throw config_error("eta must be nonzero");
    s = bnd::line_bundle(eta, tau);
  } else {
    throw config_error("need 'taupow' or 'eta'");
  }
  auto d = bnd::degree(s, ctx->geometry);
  double quad = bnd::quadrature_degree(eta, tau, hopflab::sym::Frame::Plus,
                                       ctx->geometry);
  Rat ar(static_cast<long>(std::llround(alpha * 1000000)), 1000000L);
  return json{{"deg_plus", d.deg_plus_f()},
              {"deg_minus", d.deg_minus_f()},
              {"alpha_degree", static_cast<double>(d.alpha_degree(ar))},
              {"exact", d.exact},
              {"quadrature_deg_plus", quad}};
}

json op_stability(hopflab_ctx*, const json& req) {
  if (!req.contains("family") || !req["family"].is_string())
    throw config_error("missing string field 'family'");
  std::string family = req["family"].get<std::string>();
  bnd::StabilityWindow w;
  if (family == "extension") {
    long mp = require_int(req, "m_plus"), mm = require_int(req, "m_minus");
    if (mp <= 0 || mm < 2)
      throw config_error("extension family needs m_plus > 0, m_minus >= 2");
    w = bnd::extension_window(static_cast<int>(mp), static_cast<int>(mm));
  } else if (family == "bounded") {
    long dl = require_int(req, "deg_plus_l"), mm = require_int(req, "m_minus");
    if (dl >= 0 || mm <= 0)
      throw config_error("bounded family needs deg_plus_l < 0, m_minus > 0");
    w = bnd::bounded_window(static_cast<int>(dl), static_cast<int>(mm));
  } else {
    throw config_error("unknown window family '" + family +
                       "' (expected extension or bounded)");
  }
  json result{{"alpha0", rat_json(w.alpha0)},
              {"deg_total", json::array({static_cast<double>(w.degp_V),
                                         static_cast<double>(w.degm_V)})},
              {"deg_sub", json::array({static_cast<double>(w.degp_sub),
                                       static_cast<double>(w.degm_sub)})}};
  if (req.contains("alpha_grid")) {
    const json& g = req["alpha_grid"];
    double lo = require_number(g, "lo"), hi = require_number(g, "hi");
    double step = require_number(g, "step");
    if (!(0 < lo && lo <= hi && hi < 1 && step > 0))
      throw config_error("alpha_grid needs 0 < lo <= hi < 1 and step > 0");
    auto rows = bnd::alpha_scan(w, lo, hi, step);
    json scan = json::array();
    for (const auto& r : rows)
      scan.push_back(json{{"alpha", r.alpha},
                          {"mu_total", r.mu_V},
                          {"mu_sub", r.mu_sub},
                          {"stable", r.stable}});
    result["scan"] = std::move(scan);
    auto flip = bnd::verdict_flip_bracket(rows);
    result["flip_bracket"] =
        flip ? json::array({flip->first, flip->second}) : json();
  }
  return result;
}

json op_he_solve(hopflab_ctx* ctx, const json& req) {
  double alpha = require_alpha(req);
  double tau = require_tau(req, 2.0);
  int n = static_cast<int>(number_or(req, "grid_n", 64));
  if (n < 8 || n % 2 != 0)
    throw config_error("grid_n must be an even integer >= 8");
  if (!req.contains("k0") || !req["k0"].is_array() ||
      static_cast<int>(req["k0"].size()) != n)
    throw config_error("'k0' must be an array of grid_n node values");
  Eigen::VectorXd k0(n);
  for (int i = 0; i < n; ++i) {
    if (!req["k0"][i].is_number())
      throw config_error("'k0' entries must be numeric");
    k0[i] = req["k0"][i].get<double>();
  }
  auto grid = hes::SpectralGrid::make(n, 2.0 * std::log(tau));
  auto op = hes::ScalarOperator::derive(ctx->geometry);
  auto r = hes::solve_line_he(k0, alpha, op, grid);
  json kj = json::array();
  for (int i = 0; i < n; ++i) kj.push_back(r.k[i]);
  return json{{"lambda", r.lambda},
              {"residual_sup", r.residual_sup},
              {"sigma_small", r.sigma_small},
              {"sigma_next", r.sigma_next},
              {"k", std::move(kj)}};
}

json op_continuity(hopflab_ctx* ctx, const json& req) {
  double alpha = require_alpha(req);
  double tau = require_tau(req, 2.0);
  auto s = rank2_family(req);
  auto cfg = solver_config(req, alpha, tau);
  auto tr = hes::newton_continuation(s, cfg, ctx->geometry);

  json steps = json::array();
  for (const auto& st : tr.steps)
    steps.push_back(json{{"eps", st.eps},
                         {"newton_iters", st.newton_iters},
                         {"residual", st.residual},
                         {"m_eps", st.m_eps},
                         {"logdet", st.logdet},
                         {"accepted", st.accepted},
                         {"growth_bound_ok", st.growth_bound_ok}});
  json result{{"converged", tr.converged},
              {"blowup", tr.blowup},
              {"failure", tr.failure},
              {"alpha", tr.alpha},
              {"lambda", tr.lambda},
              {"m_k", tr.m_k},
              // The solver works within the invariant ansatz; possible
              // symmetry breaking of the true metric is out of scope.
              {"invariant_ansatz", true},
              {"steps", std::move(steps)}};
  if (tr.converged) {
    result["final_he_residual"] = tr.final_he_residual;
    result["logdet_drift"] = tr.logdet_drift;
    result["certificate_residual"] = tr.certificate_residual;
  }
  if (tr.blowup) {
    auto d = hes::destabilizer_extract(tr, s, ctx->geometry);
    json dir = json::array();
    for (int i = 0; i < d.direction.size(); ++i)
      dir.push_back(json::array({d.direction[i].real(),
                                 d.direction[i].imag()}));
    result["destabilizer"] =
        json{{"rank", d.rank},
             {"idempotency", d.idempotency},
             {"hermiticity", d.hermiticity},
             {"weak_holo_plus", d.weak_holo_plus},
             {"weak_holo_minus", d.weak_holo_minus},
             {"mu_alpha_total", d.mu_alpha_total},
             {"mu_alpha_sub", d.mu_alpha_sub},
             {"destabilizing", d.destabilizing},
             {"direction", std::move(dir)},
             {"projector", field_json(d.pi)}};
  }
  if (!tr.converged && !tr.blowup) result["_status"] = HOPFLAB_ERR_NO_CONVERGENCE;
  return result;
}

}  // namespace

extern "C" {

hopflab_ctx* hopflab_ctx_new(void) {
  try {
    return new hopflab_ctx{};
  } catch (...) {
    return nullptr;
  }
}

void hopflab_ctx_free(hopflab_ctx* ctx) { delete ctx; }

const char* hopflab_last_error(const hopflab_ctx* ctx) {
  return ctx == nullptr ? "null context" : ctx->last_error.c_str();
}

void hopflab_free(char* s) { std::free(s); }

hopflab_status hopflab_verify(hopflab_ctx* ctx, const char* request_json,
                              char** out) {
  return run_op(ctx, request_json, out, op_verify);
}

hopflab_status hopflab_degree(hopflab_ctx* ctx, const char* request_json,
                              char** out) {
  return run_op(ctx, request_json, out, op_degree);
}

hopflab_status hopflab_stability(hopflab_ctx* ctx, const char* request_json,
                                 char** out) {
  return run_op(ctx, request_json, out, op_stability);
}

hopflab_status hopflab_he_solve(hopflab_ctx* ctx, const char* request_json,
                                char** out) {
  return run_op(ctx, request_json, out, op_he_solve);
}

hopflab_status hopflab_continuity(hopflab_ctx* ctx, const char* request_json,
                                  char** out) {
  return run_op(ctx, request_json, out, op_continuity);
}

}  // extern "C"
