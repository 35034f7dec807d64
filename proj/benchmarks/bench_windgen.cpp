#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include <windgen/analysis.hpp>
#include <windgen/regions.hpp>
#include <windgen/simulator.hpp>
#include <windgen/skewt.hpp>
#include <windgen/synthetic.hpp>
#include <windgen/var_model.hpp>

namespace windgen {
namespace {

SkewTParamsDP bench_dp(int d) {
	SkewTParamsDP dp;
	dp.xi = Eigen::VectorXd::Zero(d);
	dp.omega = Eigen::MatrixXd::Constant(d, d, 0.5) + 0.5 * Eigen::MatrixXd::Identity(d, d);
	dp.alpha = Eigen::VectorXd::LinSpaced(d, -1.0, 2.0);
	dp.nu = 9.0;
	return dp;
}

void BM_SkewTLogPdf(benchmark::State& state) {
	const int d = static_cast<int>(state.range(0));
	const SkewTDensity f(bench_dp(d));
	const Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(d, -0.5, 0.8);
	for (auto _ : state) {
		benchmark::DoNotOptimize(f.log_pdf(z));
	}
}
BENCHMARK(BM_SkewTLogPdf)->Arg(1)->Arg(4)->Arg(9);

void BM_SkewTSample(benchmark::State& state) {
	const int d = static_cast<int>(state.range(0));
	SkewTSampler sampler(bench_dp(d));
	Rng rng(1);
	Eigen::VectorXd out(d);
	for (auto _ : state) {
		sampler.draw(rng, out);
		benchmark::DoNotOptimize(out.data());
	}
	state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SkewTSample)->Arg(1)->Arg(4)->Arg(9);

void BM_CpToDp(benchmark::State& state) {
	const int d = static_cast<int>(state.range(0));
	const auto cp = dp_moments(bench_dp(d));
	for (auto _ : state) {
		benchmark::DoNotOptimize(cp_to_dp(cp));
	}
}
BENCHMARK(BM_CpToDp)->Arg(2)->Arg(6)->Unit(benchmark::kMicrosecond);

void BM_Simulate(benchmark::State& state) {
	const auto truth = make_truth({});
	SimulateOptions so;
	so.n_realizations = 1;
	so.n_years = static_cast<int>(state.range(0));
	so.burn_in_days = 1000;
	for (auto _ : state) {
		benchmark::DoNotOptimize(simulate(truth.bundle, so));
	}
	state.SetItemsProcessed(state.iterations() * (so.n_years * days_per_year + so.burn_in_days));
}
BENCHMARK(BM_Simulate)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_FitVar(benchmark::State& state) {
	const auto truth = make_truth({});
	SimulateOptions so;
	so.n_realizations = 3;
	so.n_years = static_cast<int>(state.range(0));
	const auto w = simulate_standardized(truth.bundle, so);
	const auto restr = build_restrictions(*truth.bundle.meta, StencilScheme::Stencil);
	const auto est = state.range(1) == 0 ? Estimator::OLS : Estimator::GLS;
	for (auto _ : state) {
		benchmark::DoNotOptimize(fit_var(w, restr, est));
	}
}
BENCHMARK(BM_FitVar)->Args({10, 0})->Args({10, 1})->Args({50, 0})->Unit(benchmark::kMillisecond);

void BM_WardClustering(benchmark::State& state) {
	const int n = static_cast<int>(state.range(0));
	std::mt19937_64 rng(3);
	std::normal_distribution<double> z;
	Eigen::MatrixXd features(n, 8);
	for (int i = 0; i < n; ++i) {
		for (int j = 0; j < 8; ++j) features(i, j) = z(rng);
	}
	for (auto _ : state) {
		benchmark::DoNotOptimize(ward_clustering(features, 9));
	}
}
BENCHMARK(BM_WardClustering)->Arg(25)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_Acf(benchmark::State& state) {
	std::mt19937_64 rng(5);
	std::normal_distribution<double> z;
	std::vector<double> x(static_cast<std::size_t>(state.range(0)));
	for (auto& v : x) v = z(rng);
	for (auto _ : state) {
		benchmark::DoNotOptimize(acf(x, 30));
	}
}
BENCHMARK(BM_Acf)->Arg(days_per_year)->Arg(50 * days_per_year);

}  // namespace
}  // namespace windgen

BENCHMARK_MAIN();
