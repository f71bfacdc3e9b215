#include "gtrs/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gtrs::io {

namespace {

Eigen::MatrixXd matrix_from_flat(const json& arr, int n, const char* name) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != n * n) {
    throw InvalidInput(std::string("problem file: ") + name + " must be a flat row-major array of n*n numbers");
  }
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      M(i, j) = arr[i * n + j].get<double>();
    }
  }
  return M;
}

Eigen::VectorXd vector_from_flat(const json& arr, int n, const char* name) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != n) {
    throw InvalidInput(std::string("problem file: ") + name + " must be an array of n numbers");
  }
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = arr[i].get<double>();
  return v;
}

json flat(const Eigen::MatrixXd& M) {
  json arr = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = 0; j < M.cols(); ++j) arr.push_back(M(i, j));
  }
  return arr;
}

json flat(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

GtrsProblem problem_from_json(const json& j, double* f_offset) {
  GtrsProblem p;
  if (!j.contains("n")) throw InvalidInput("problem file: missing field n");
  int n = j["n"].get<int>();
  if (n < 0) throw InvalidInput("problem file: n must be nonnegative");
  std::string kind = j.value("kind", "ineq");
  if (kind == "ineq") {
    p.kind = ConstraintKind::Inequality;
  } else if (kind == "eq") {
    p.kind = ConstraintKind::Equality;
  } else if (kind == "interval") {
    p.kind = ConstraintKind::Interval;
  } else {
    throw InvalidInput("problem file: unknown kind '" + kind + "'");
  }
  p.D = matrix_from_flat(j.at("D"), n, "D");
  p.A = matrix_from_flat(j.at("A"), n, "A");
  p.e = j.contains("e") ? vector_from_flat(j["e"], n, "e")
                        : Eigen::VectorXd::Zero(n);
  p.b = j.contains("b") ? vector_from_flat(j["b"], n, "b")
                        : Eigen::VectorXd::Zero(n);
  if (p.kind == ConstraintKind::Interval) {
    p.c1 = j.at("c1").get<double>();
    p.c2 = j.at("c2").get<double>();
  } else {
    p.c = j.value("c", 0.0);
  }
  if (f_offset) *f_offset = j.value("v", 0.0);
  return p;
}

json problem_to_json(const GtrsProblem& p, double f_offset) {
  json j;
  j["n"] = p.dim();
  j["kind"] = to_string(p.kind);
  j["D"] = flat(p.D);
  j["A"] = flat(p.A);
  j["e"] = flat(p.e);
  j["b"] = flat(p.b);
  if (p.kind == ConstraintKind::Interval) {
    j["c1"] = p.c1;
    j["c2"] = p.c2;
  } else {
    j["c"] = p.c;
  }
  if (f_offset != 0.0) j["v"] = f_offset;
  return j;
}

GtrsProblem load_problem(const std::string& path, double* f_offset) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open problem file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& ex) {
    throw InvalidInput("problem file " + path + ": " + ex.what());
  }
  return problem_from_json(j, f_offset);
}

void apply_tolerances(const json& j, Options& opt) {
  if (!j.contains("tol")) return;
  const json& t = j["tol"];
  opt.tol_eig = t.value("eig", opt.tol_eig);
  opt.tol_sym = t.value("sym", opt.tol_sym);
  opt.tol_cluster = t.value("cluster", opt.tol_cluster);
  opt.tol_dual = t.value("dual", opt.tol_dual);
  opt.tol_rank = t.value("rank", opt.tol_rank);
  opt.tol_zero = t.value("zero", opt.tol_zero);
}

namespace {

json certificate_json(const SolveCertificate& cert) {
  json c;
  if (cert.has_nu) {
    c["nu"] = cert.nu;
    if (cert.nu_lo != 0.0 || cert.nu_hi != 0.0) {
      c["nu_lo"] = cert.nu_lo;
      c["nu_hi"] = cert.nu_hi;
    }
    if (std::isfinite(cert.dual_domain_lo)) {
      c["dual_domain_lo"] = cert.dual_domain_lo;
    }
    if (std::isfinite(cert.dual_domain_hi)) {
      c["dual_domain_hi"] = cert.dual_domain_hi;
    }
    c["dual_iterations"] = cert.dual_iterations;
    c["dual_active"] = cert.dual_active;
  }
  json blocks = json::array();
  for (const auto& b : cert.blocks) {
    json jb;
    jb["type"] = b.type;
    jb["size"] = b.size;
    if (b.type == "scalar") {
      jb["alpha"] = b.alpha;
      jb["delta"] = b.delta;
    } else if (b.type == "coupled") {
      jb["tau"] = b.tau;
      jb["kappa"] = b.kappa;
    }
    blocks.push_back(jb);
  }
  c["blocks"] = blocks;
  json cls;
  cls["verdict"] = cert.classification.unbounded ? "unbounded" : "possibly_bounded";
  cls["reasons"] = cert.classification.reasons;
  cls["case_tags"] = cert.classification.case_tags;
  c["classification"] = cls;
  json as;
  as["feasible"] = cert.assumptions.feasible;
  as["two_side_slater"] = cert.assumptions.two_side_slater;
  as["a_is_zero"] = cert.assumptions.a_is_zero;
  as["degenerate_equality"] = cert.assumptions.degenerate_equality;
  as["action"] = cert.assumptions.action.empty() ? "none" : cert.assumptions.action;
  c["assumptions"] = as;
  c["warnings"] = cert.warnings;
  return c;
}

}  // namespace

json report_from_solution(const Solution& sol, const Options& opt) {
  json r;
  r["status"] = to_string(sol.status);
  if (std::isfinite(sol.value)) r["value"] = sol.value;
  if (sol.has_point()) r["x"] = flat(sol.x);
  if (sol.status == SolveStatus::FiniteUnattained && sol.epsilon_solution) {
    r["epsilon"] = opt.eps;
    r["x_epsilon"] = flat(sol.epsilon_solution(opt.eps));
  }
  r["certificate"] = certificate_json(sol.certificate);
  return r;
}

json report_from_classification(const ClassifyOutput& out) {
  json r;
  r["status"] = out.classification.unbounded ? "unbounded" : "possibly_bounded";
  r["reasons"] = out.classification.reasons;
  r["case_tags"] = out.classification.case_tags;
  json blocks = json::array();
  for (const auto& b : out.blocks) {
    json jb;
    jb["type"] = b.type;
    jb["size"] = b.size;
    if (b.type == "scalar") {
      jb["alpha"] = b.alpha;
      jb["delta"] = b.delta;
    } else if (b.type == "coupled") {
      jb["tau"] = b.tau;
      jb["kappa"] = b.kappa;
    }
    blocks.push_back(jb);
  }
  r["blocks"] = blocks;
  r["warnings"] = out.warnings;
  return r;
}

json report_from_slemma(const slemma::SLemmaVerdict& verdict) {
  json r;
  r["holds"] = verdict.holds;
  r["min_value"] = verdict.min_value;
  if (verdict.multiplier) r["multiplier"] = *verdict.multiplier;
  if (verdict.witness) r["witness"] = flat(*verdict.witness);
  return r;
}

std::string export_socp(const reformulate::SocpProblem& sp) {
  std::ostringstream out;
  out << "gtrs-socp 1\n";
  out << "kind " << to_string(sp.kind) << "\n";
  out << "l " << sp.l << "\n";
  out << "pairs " << sp.pairs() << "\n";
  out << "obj const " << format_double(sp.c0) << "\n";
  out << "obj offset " << format_double(sp.obj_offset) << "\n";
  for (int i = 0; i < sp.l; ++i) {
    out << "obj x " << i << " " << format_double(sp.e[i]) << "\n";
  }
  for (int i = 0; i < sp.l; ++i) {
    out << "obj y " << i << " " << format_double(sp.delta[i]) << "\n";
  }
  for (int j = 0; j < sp.pairs(); ++j) {
    out << "obj z " << j << " " << format_double(sp.zeta[j]) << "\n";
  }
  if (sp.kind == ConstraintKind::Interval) {
    out << "lin lower " << format_double(sp.c1) << "\n";
    out << "lin upper " << format_double(sp.c2) << "\n";
  } else {
    out << "lin const " << format_double(sp.c) << "\n";
  }
  for (int i = 0; i < sp.l; ++i) {
    out << "lin x " << i << " " << format_double(sp.b[i]) << "\n";
  }
  for (int i = 0; i < sp.l; ++i) {
    out << "lin y " << i << " " << format_double(sp.alpha[i]) << "\n";
  }
  for (int j = 0; j < sp.pairs(); ++j) {
    out << "lin z " << j << " 1\n";
  }
  for (int i = 0; i < sp.l; ++i) {
    out << "cone rq " << i << "\n";
  }
  return out.str();
}

reformulate::SocpProblem import_socp(const std::string& text) {
  reformulate::SocpProblem sp;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "gtrs-socp 1") {
    throw InvalidInput("import_socp: bad header");
  }
  int pairs = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "kind") {
      std::string k;
      ls >> k;
      if (k == "ineq") sp.kind = ConstraintKind::Inequality;
      else if (k == "eq") sp.kind = ConstraintKind::Equality;
      else if (k == "interval") sp.kind = ConstraintKind::Interval;
      else throw InvalidInput("import_socp: unknown kind " + k);
    } else if (tok == "l") {
      ls >> sp.l;
      sp.alpha.assign(sp.l, 0.0);
      sp.delta.assign(sp.l, 0.0);
      sp.b.assign(sp.l, 0.0);
      sp.e.assign(sp.l, 0.0);
    } else if (tok == "pairs") {
      ls >> pairs;
      sp.zeta.assign(pairs, 0.0);
    } else if (tok == "obj" || tok == "lin") {
      std::string what;
      ls >> what;
      if (what == "const") {
        double v;
        ls >> v;
        (tok == "obj" ? sp.c0 : sp.c) = v;
      } else if (what == "offset") {
        ls >> sp.obj_offset;
      } else if (what == "lower") {
        ls >> sp.c1;
      } else if (what == "upper") {
        ls >> sp.c2;
      } else {
        int idx;
        double v;
        ls >> idx >> v;
        if (what == "x") (tok == "obj" ? sp.e : sp.b).at(idx) = v;
        else if (what == "y") (tok == "obj" ? sp.delta : sp.alpha).at(idx) = v;
        else if (what == "z") {
          if (tok == "obj") sp.zeta.at(idx) = v;
          // constraint z coefficients are identically one
        } else {
          throw InvalidInput("import_socp: unknown row '" + line + "'");
        }
      }
    } else if (tok == "cone") {
      // rotated cone rows are implied by l
    } else {
      throw InvalidInput("import_socp: unknown row '" + line + "'");
    }
  }
  return sp;
}

}  // namespace gtrs::io
