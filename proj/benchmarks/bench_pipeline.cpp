#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <random>

#include "gtrs/canonical.hpp"
#include "gtrs/dual.hpp"
#include "gtrs/solver.hpp"

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  MatrixXd G(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) G(i, j) = gauss(rng);
  }
  Eigen::HouseholderQR<MatrixXd> qr(G);
  return qr.householderQ() * MatrixXd::Identity(n, n);
}

gtrs::GtrsProblem random_instance(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatrixXd Q = random_orthogonal(n, rng);
  VectorXd alpha(n), delta(n);
  for (int i = 0; i < n; ++i) {
    alpha[i] = u(rng) > 0 ? 1.0 : -1.0;
    delta[i] = 0.3 + std::abs(u(rng)) - alpha[i] * 0.7;
  }
  gtrs::GtrsProblem p;
  p.A = Q.transpose() * MatrixXd(alpha.asDiagonal()) * Q;
  p.D = Q.transpose() * MatrixXd(delta.asDiagonal()) * Q;
  p.e = VectorXd::NullaryExpr(n, [&](int) { return 0.3 * u(rng); });
  p.b = VectorXd::NullaryExpr(n, [&](int) { return 0.3 * u(rng); });
  p.c = -1.0;
  p.kind = gtrs::ConstraintKind::Inequality;
  return p;
}

void BM_canonicalize(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  auto p = random_instance(n, 7);
  for (auto _ : state) {
    auto cf = gtrs::canonical::canonicalize(p.A, p.D);
    benchmark::DoNotOptimize(cf);
  }
}
BENCHMARK(BM_canonicalize)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

void BM_solve(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  auto p = random_instance(n, 11);
  for (auto _ : state) {
    auto sol = gtrs::solve(p);
    benchmark::DoNotOptimize(sol);
  }
}
BENCHMARK(BM_solve)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

void BM_dual_maximize(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  gtrs::dual::DualSpec spec;
  for (int i = 0; i < n; ++i) {
    double a = u(rng) > 0 ? 1.0 : -1.0;
    spec.alpha.push_back(a);
    spec.delta.push_back(1.0 + std::abs(u(rng)) - 0.4 * a);
    spec.b.push_back(0.3 * u(rng));
    spec.e.push_back(0.3 * u(rng));
  }
  spec.c = -1.0;
  for (auto _ : state) {
    auto res = gtrs::dual::maximize_dual(spec);
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_dual_maximize)->Arg(8)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
