#pragma once

#include <json.hpp>
#include <string>

#include "gtrs/config.hpp"
#include "gtrs/problem.hpp"
#include "gtrs/reformulate.hpp"
#include "gtrs/slemma.hpp"
#include "gtrs/solver.hpp"

namespace gtrs::io {

using json = nlohmann::ordered_json;

/// Problem file schema: n, kind ("ineq"|"eq"|"interval"), row-major dense D
/// and A, vectors e and b, constant c (or c1/c2), optional objective offset v
/// (used by the s-lemma), optional tolerance overrides under "tol".
GtrsProblem problem_from_json(const json& j, double* f_offset = nullptr);
json problem_to_json(const GtrsProblem& p, double f_offset = 0.0);
GtrsProblem load_problem(const std::string& path, double* f_offset = nullptr);

/// Applies the file's optional "tol" overrides onto opt.
void apply_tolerances(const json& j, Options& opt);

json report_from_solution(const Solution& sol, const Options& opt);
json report_from_classification(const ClassifyOutput& out);
json report_from_slemma(const slemma::SLemmaVerdict& verdict);

/// Line-oriented conic form: one row per coefficient and per cone
/// constraint, doubles printed with 17 significant digits (exact double
/// round-trip).
std::string export_socp(const reformulate::SocpProblem& sp);
reformulate::SocpProblem import_socp(const std::string& text);

std::string format_double(double v);

}  // namespace gtrs::io
