// hopf-lab: batch front-end for the Hopf-surface bundle laboratory.
//
// Subcommands: verify, degree, stability, he-solve, continuity.  Reports go
// to stdout or --out as JSON (schema 1) or CSV.  Exit codes: 0 ok,
// 1 verification failure, 2 bad configuration, 3 solver non-convergence,
// 4 internal error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hopflab.h"

using nlohmann::json;

namespace {

struct Output {
  std::string path;    // empty = stdout
  std::string format;  // "json" or "csv"
};

int emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << "\n";
    return 0;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << "cannot open output file: " << path << "\n";
    return 2;
  }
  f << text << "\n";
  return 0;
}

std::string csv_cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  return v.dump();
}

// Rows of uniform objects -> CSV with a header row.
std::string rows_to_csv(const json& rows) {
  std::ostringstream out;
  if (!rows.is_array() || rows.empty()) return "";
  bool first = true;
  for (auto it = rows[0].begin(); it != rows[0].end(); ++it) {
    if (!first) out << ",";
    out << it.key();
    first = false;
  }
  out << "\n";
  for (const auto& row : rows) {
    first = true;
    for (auto it = row.begin(); it != row.end(); ++it) {
      if (!first) out << ",";
      out << csv_cell(it.value());
      first = false;
    }
    out << "\n";
  }
  return out.str();
}

// η accepted as "re,im" or "r@theta" (polar, radians); "t^m" selects the
// exact integer-power family.
bool parse_eta(const std::string& text, json& req) {
  if (text.size() > 2 && text[0] == 't' && text[1] == '^') {
    try {
      size_t used = 0;
      int m = std::stoi(text.substr(2), &used);
      if (used != text.size() - 2) return false;
      req["taupow"] = m;
      return true;
    } catch (...) {
      return false;
    }
  }
  auto split = [&](char sep, const char* a, const char* b) -> bool {
    auto pos = text.find(sep);
    if (pos == std::string::npos) return false;
    try {
      size_t ua = 0, ub = 0;
      double x = std::stod(text.substr(0, pos), &ua);
      double y = std::stod(text.substr(pos + 1), &ub);
      if (ua != pos || ub != text.size() - pos - 1) return false;
      req["eta"] = json{{a, x}, {b, y}};
      return true;
    } catch (...) {
      return false;
    }
  };
  if (text.find('@') != std::string::npos) return split('@', "r", "theta");
  return split(',', "re", "im");
}

struct AlphaGrid {
  double lo = 0, hi = 0, step = 0;
  bool set = false;
};

bool parse_alpha_grid(const std::string& text, AlphaGrid& g) {
  std::istringstream in(text);
  char c1 = 0, c2 = 0;
  if (!(in >> g.lo >> c1 >> g.hi >> c2 >> g.step) || c1 != ':' || c2 != ':')
    return false;
  if (!in.eof()) return false;
  g.set = true;
  return true;
}

struct Call {
  hopflab_status status = HOPFLAB_ERR_INTERNAL;
  json body;
  std::string error;
};

Call run(hopflab_status (*op)(hopflab_ctx*, const char*, char**),
         const json& req) {
  Call r;
  hopflab_ctx* ctx = hopflab_ctx_new();
  if (ctx == nullptr) {
    r.error = "cannot allocate context";
    return r;
  }
  char* out = nullptr;
  r.status = op(ctx, req.dump().c_str(), &out);
  if (out != nullptr) {
    r.body = json::parse(out, nullptr, false);
    hopflab_free(out);
  }
  r.error = hopflab_last_error(ctx);
  hopflab_ctx_free(ctx);
  return r;
}

int finish(const Call& r, const Output& o,
           std::string (*to_csv)(const json&) = nullptr) {
  if (r.body.is_discarded() || r.body.is_null()) {
    std::cerr << "error: " << (r.error.empty() ? "no result" : r.error)
              << "\n";
    return static_cast<int>(r.status);
  }
  std::string text = o.format == "csv" && to_csv != nullptr ? to_csv(r.body)
                                                            : r.body.dump(2);
  int ec = emit(text, o.path);
  if (ec != 0) return ec;
  return static_cast<int>(r.status);
}

std::string verify_csv(const json& body) { return rows_to_csv(body["checks"]); }

std::string degree_csv(const json& body) {
  json row = body;
  row.erase("schema");
  return rows_to_csv(json::array({row}));
}

std::string stability_csv(const json& body) {
  std::ostringstream out;
  out << "# alpha0 = " << body["alpha0"]["num"].get<std::string>() << "/"
      << body["alpha0"]["den"].get<std::string>() << "\n";
  if (body.contains("scan")) out << rows_to_csv(body["scan"]);
  return out.str();
}

std::string he_solve_csv(const json& body) {
  json rows = json::array();
  for (size_t i = 0; i < body["k"].size(); ++i)
    rows.push_back(json{{"node", i}, {"k", body["k"][i]}});
  std::ostringstream out;
  out << "# lambda = " << body["lambda"].dump()
      << ", residual_sup = " << body["residual_sup"].dump() << "\n"
      << rows_to_csv(rows);
  return out.str();
}

std::string continuity_csv(const json& body) {
  json rows = json::array();
  for (const auto& s : body["steps"])
    rows.push_back(json{{"eps", s["eps"]},
                        {"residual", s["residual"]},
                        {"m_eps", s["m_eps"]},
                        {"logdet", s["logdet"]}});
  std::ostringstream out;
  out << "# converged = " << body["converged"].dump()
      << ", blowup = " << body["blowup"].dump() << "\n"
      << rows_to_csv(rows);
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bundle laboratory on the standard Hopf surface"};
  app.require_subcommand(1);

  Output out;
  double tau = 2.0;
  std::optional<double> alpha;
  std::string alpha_grid_text, eta_text, family;
  int m_plus = 1, m_minus = 2, deg_plus_l = -1;
  long eta_i = 1, xi_i = 2, a_i = 3, b_i = 5;
  int grid_n = 64;
  double eps0 = 1.0, eps_ratio = 0.7, eps_min = 1e-4;
  std::string corrupt;

  auto add_output = [&](CLI::App* cmd) {
    cmd->add_option("--out", out.path, "Output file (default: stdout)");
    cmd->add_option("--format", out.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->default_val("json");
  };

  auto* verify = app.add_subcommand(
      "verify", "Run the exact structural-identity suite");
  add_output(verify);
  verify
      ->add_option("--corrupt-check", corrupt,
                   "Perturb the named structure equation (negative control)")
      ->group("");  // hidden test hook

  auto* degree = app.add_subcommand(
      "degree", "Plus/minus degrees of a line bundle");
  add_output(degree);
  degree->add_option("--tau", tau, "Surface parameter, > 1")->default_val(2.0);
  degree->add_option("--alpha", alpha, "Weight in (0,1)")->default_val(0.5);
  degree
      ->add_option("--eta", eta_text,
                   "Multiplier: t^<int> (exact power of tau), re,im or "
                   "r@theta")
      ->required();

  auto* stability = app.add_subcommand(
      "stability", "Stability window and alpha-scan for two-line families");
  add_output(stability);
  stability->add_option("--family", family, "extension or bounded")
      ->required()
      ->check(CLI::IsMember({"extension", "bounded"}));
  stability->add_option("--m-plus", m_plus, "Extension family: m_plus > 0");
  stability->add_option("--m-minus", m_minus, "m_minus (both families)");
  stability->add_option("--deg-plus-l", deg_plus_l,
                        "Bounded family: sub-line plus-degree bound, < 0");
  stability->add_option("--alpha-grid", alpha_grid_text,
                        "Scan grid lo:hi:step inside (0,1)");

  auto* he_solve = app.add_subcommand(
      "he-solve", "Scalar Hermite-Einstein solve for a line-bundle profile");
  add_output(he_solve);
  he_solve->add_option("--tau", tau)->default_val(2.0);
  he_solve->add_option("--alpha", alpha, "Weight in (0,1)")->required();
  he_solve->add_option("--grid-n", grid_n, "Even collocation size")
      ->default_val(64);
  std::vector<double> k0_values;
  he_solve
      ->add_option("--k0", k0_values,
                   "Mean-curvature profile at the grid nodes "
                   "(grid-n comma-separated values)")
      ->required()
      ->delimiter(',');

  auto* continuity = app.add_subcommand(
      "continuity", "Newton continuation for a rank-2 structure");
  add_output(continuity);
  continuity->add_option("--tau", tau)->default_val(2.0);
  continuity->add_option("--alpha", alpha, "Weight in (0,1)")->required();
  continuity->add_option("--family", family, "crossed or triangular")
      ->required()
      ->check(CLI::IsMember({"crossed", "triangular"}));
  continuity->add_option("--m-plus", m_plus, "Triangular: m_plus > 0");
  continuity->add_option("--m-minus", m_minus, "Triangular: m_minus >= 2");
  continuity->add_option("--eta", eta_i, "Crossed: first plus-side power");
  continuity->add_option("--xi", xi_i, "Crossed: second plus-side power");
  continuity->add_option("--a", a_i, "Crossed: first minus-side power");
  continuity->add_option("--b", b_i, "Crossed: second minus-side power");
  continuity->add_option("--grid-n", grid_n, "Even collocation size")
      ->default_val(64);
  continuity->add_option("--eps0", eps0, "Initial regularization")
      ->default_val(1.0);
  continuity->add_option("--eps-ratio", eps_ratio, "Schedule ratio in (0,1)")
      ->default_val(0.7);
  continuity->add_option("--eps-min", eps_min, "Target regularization")
      ->default_val(1e-4);

  CLI11_PARSE(app, argc, argv);

  if (verify->parsed()) {
    json req = json::object();
    if (!corrupt.empty()) req["corrupt"] = corrupt;
    return finish(run(hopflab_verify, req), out, verify_csv);
  }

  if (degree->parsed()) {
    json req{{"tau", tau}, {"alpha", alpha.value_or(0.5)}};
    if (!parse_eta(eta_text, req)) {
      std::cerr << "cannot parse --eta '" << eta_text
                << "' (expected t^<int>, re,im or r@theta)\n";
      return 2;
    }
    return finish(run(hopflab_degree, req), out, degree_csv);
  }

  if (stability->parsed()) {
    json req{{"family", family}, {"m_minus", m_minus}};
    if (family == "extension") req["m_plus"] = m_plus;
    if (family == "bounded") req["deg_plus_l"] = deg_plus_l;
    if (!alpha_grid_text.empty()) {
      AlphaGrid g;
      if (!parse_alpha_grid(alpha_grid_text, g)) {
        std::cerr << "cannot parse --alpha-grid '" << alpha_grid_text
                  << "' (expected lo:hi:step)\n";
        return 2;
      }
      req["alpha_grid"] = json{{"lo", g.lo}, {"hi", g.hi}, {"step", g.step}};
    }
    return finish(run(hopflab_stability, req), out, stability_csv);
  }

  if (he_solve->parsed()) {
    json req{{"alpha", *alpha},
             {"tau", tau},
             {"grid_n", grid_n},
             {"k0", k0_values}};
    return finish(run(hopflab_he_solve, req), out, he_solve_csv);
  }

  if (continuity->parsed()) {
    json req{{"family", family},
             {"alpha", *alpha},
             {"tau", tau},
             {"solver", {{"N", grid_n},
                         {"eps0", eps0},
                         {"ratio", eps_ratio},
                         {"eps_min", eps_min}}}};
    if (family == "triangular") {
      req["m_plus"] = m_plus;
      req["m_minus"] = m_minus;
    } else {
      req["eta"] = eta_i;
      req["xi"] = xi_i;
      req["a"] = a_i;
      req["b"] = b_i;
    }
    return finish(run(hopflab_continuity, req), out, continuity_csv);
  }

  return 2;
}
