#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "gtrs/io.hpp"
#include "gtrs/oracle.hpp"
#include "gtrs/slemma.hpp"
#include "gtrs/solver.hpp"

namespace {

bool log_enabled() {
  const char* env = std::getenv("GTRS_LOG");
  return env && *env && std::string(env) != "0";
}

void log_line(const std::string& msg) {
  if (log_enabled()) std::cerr << "[gtrs] " << msg << "\n";
}

struct CliConfig {
  gtrs::Options opt;
  bool timings = false;
  std::string out_path;
  int parallel = 1;
  gtrs::oracle::OracleConfig oracle_cfg;
};

gtrs::io::json run_one(const std::string& command, const std::string& path,
                       const CliConfig& cfg) {
  using gtrs::io::json;
  double f_offset = 0.0;
  std::ifstream in(path);
  if (!in) throw gtrs::InvalidInput("cannot open problem file: " + path);
  json jfile;
  in >> jfile;
  gtrs::Options opt = cfg.opt;
  gtrs::io::apply_tolerances(jfile, opt);
  gtrs::GtrsProblem p = gtrs::io::problem_from_json(jfile, &f_offset);

  auto started = std::chrono::steady_clock::now();
  json report;
  report["input"] = path;
  if (command == "solve") {
    gtrs::Solution sol = gtrs::solve(p, opt);
    report.update(gtrs::io::report_from_solution(sol, opt));
  } else if (command == "classify") {
    auto out = gtrs::classify_problem(p, opt);
    report.update(gtrs::io::report_from_classification(out));
  } else if (command == "canonical") {
    auto outcome = gtrs::canonical::canonicalize(p.A, p.D, opt);
    if (const auto* diag = std::get_if<gtrs::canonical::EarlyDiagnostic>(&outcome)) {
      report["status"] = "unbounded_structure";
      json items = json::array();
      for (const auto& item : diag->items) {
        json ji;
        ji["kind"] = gtrs::canonical::to_string(item.kind);
        ji["size"] = item.size;
        items.push_back(ji);
      }
      report["diagnostics"] = items;
    } else {
      const auto& cf = std::get<gtrs::canonical::CanonicalForm>(outcome);
      report["status"] = "canonical";
      json blocks = json::array();
      for (const auto& b : cf.blocks) {
        json jb;
        if (const auto* sb = std::get_if<gtrs::canonical::ScalarBlock>(&b)) {
          jb["type"] = "scalar";
          jb["alpha"] = sb->alpha;
          jb["delta"] = sb->delta;
        } else if (const auto* cb = std::get_if<gtrs::canonical::CoupledBlock>(&b)) {
          jb["type"] = "coupled";
          jb["tau"] = cb->tau;
          jb["kappa"] = cb->kappa;
        } else {
          jb["type"] = "zero";
        }
        blocks.push_back(jb);
      }
      report["blocks"] = blocks;
      report["zero_count"] = cf.zero_count;
      json s = json::array();
      for (int i = 0; i < cf.S.rows(); ++i) {
        for (int j = 0; j < cf.S.cols(); ++j) s.push_back(cf.S(i, j));
      }
      report["S"] = s;
      report["residual_a"] = cf.residual_a;
      report["residual_d"] = cf.residual_d;
      report["cond_s"] = cf.cond_s;
      report["warnings"] = cf.warnings;
    }
  } else if (command == "slemma") {
    gtrs::slemma::SLemmaQuery q;
    q.D = p.D;
    q.e = p.e;
    q.v = f_offset;
    q.A = p.A;
    q.b = p.b;
    q.c = p.c;
    q.c1 = p.c1;
    q.c2 = p.c2;
    q.kind = p.kind;
    try {
      auto verdict = gtrs::slemma::s_lemma(q, opt);
      report["status"] = "decided";
      report.update(gtrs::io::report_from_slemma(verdict));
    } catch (const gtrs::NotApplicable& ex) {
      report["status"] = "not_applicable";
      report["reason"] = ex.what();
    }
  } else if (command == "oracle") {
    auto cfg2 = cfg.oracle_cfg;
    cfg2.seed = opt.seed;
    auto res = gtrs::oracle::brute_force_min(p, cfg2);
    if (res.argmin.size() > 0) {
      report["value"] = res.value;
      json arg = json::array();
      for (int i = 0; i < res.argmin.size(); ++i) arg.push_back(res.argmin[i]);
      report["argmin"] = arg;
    } else {
      report["value"] = nullptr;
    }
    report["steepest_found"] = res.steepest_found;
    report["coverage"] = res.coverage;
  } else if (command == "export") {
    try {
      auto sp = gtrs::conic_form(p, opt);
      report["status"] = "exported";
      report["socp"] = gtrs::io::export_socp(sp);
    } catch (const gtrs::NumericalFailure& ex) {
      report["status"] = "unbounded";
      report["reason"] = ex.what();
    }
  } else {
    throw gtrs::InvalidInput("unknown command: " + command);
  }
  if (cfg.timings) {
    auto elapsed = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    report["timings"] = {{"total_ms", elapsed}};
  }
  return report;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solver suite for quadratic programs with one quadratic "
               "constraint (inequality, equality or interval)"};
  app.require_subcommand(1);

  CliConfig cfg;
  std::vector<std::string> files;
  app.add_option("--eps", cfg.opt.eps, "epsilon-solution budget");
  app.add_option("--tol-eig", cfg.opt.tol_eig, "eigen tolerance");
  app.add_option("--tol-cluster", cfg.opt.tol_cluster, "eigenvalue clustering tolerance");
  app.add_option("--tol-dual", cfg.opt.tol_dual, "dual multiplier tolerance");
  app.add_option("--seed", cfg.opt.seed, "seed for randomized probes");
  app.add_option("--out", cfg.out_path, "write the report to this path");
  app.add_option("--parallel", cfg.parallel, "process input files in parallel");
  app.add_flag("--timings", cfg.timings, "include timings in reports");

  std::string cmd_name;
  for (const char* name : {"solve", "classify", "canonical", "slemma", "export"}) {
    auto* sub = app.add_subcommand(name);
    sub->fallthrough();  // global flags may follow the subcommand
    sub->add_option("files", files, "problem files (JSON)")->required();
    sub->callback([&cmd_name, name] { cmd_name = name; });
  }
  {
    auto* sub = app.add_subcommand("oracle");
    sub->fallthrough();
    sub->add_option("files", files, "problem files (JSON)")->required();
    sub->add_option("--radius", cfg.oracle_cfg.radius, "grid box half-width");
    sub->add_option("--resolution", cfg.oracle_cfg.resolution, "grid points per axis");
    sub->add_option("--rounds", cfg.oracle_cfg.refinement_rounds, "refinement rounds");
    sub->callback([&cmd_name] { cmd_name = "oracle"; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<gtrs::io::json> reports(files.size());
    if (cfg.parallel > 1 && files.size() > 1) {
      std::vector<std::future<gtrs::io::json>> futures;
      for (const auto& f : files) {
        futures.push_back(std::async(std::launch::async, run_one, cmd_name, f,
                                     std::cref(cfg)));
      }
      for (size_t i = 0; i < futures.size(); ++i) reports[i] = futures[i].get();
    } else {
      for (size_t i = 0; i < files.size(); ++i) {
        log_line("processing " + files[i]);
        reports[i] = run_one(cmd_name, files[i], cfg);
      }
    }
    gtrs::io::json out;
    if (reports.size() == 1) {
      out = reports[0];
    } else {
      out = gtrs::io::json::array();
      for (auto& r : reports) out.push_back(std::move(r));
    }
    std::string text = out.dump(2);
    text += "\n";
    if (!cfg.out_path.empty()) {
      std::ofstream os(cfg.out_path);
      if (!os) throw gtrs::InvalidInput("cannot write to " + cfg.out_path);
      os << text;
    } else {
      std::cout << text;
    }
    return 0;
  } catch (const gtrs::InvalidInput& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "internal error: " << ex.what() << "\n";
    return 3;
  }
}
