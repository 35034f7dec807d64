#include <cmath>

#include <gtest/gtest.h>

#include <windgen/bundle_io.hpp>
#include <windgen/errors.hpp>
#include <windgen/synthetic.hpp>

#include "test_helpers.hpp"

namespace windgen {
namespace {

using windgen::testing::read_text;
using windgen::testing::TempDir;
using windgen::testing::write_text;

SyntheticTruth small_truth() {
	SyntheticTruthOptions o;
	o.nx = 4;
	o.ny = 3;
	return make_truth(o);
}

TEST(BundleIo, FnvReferenceVectors) {
	EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
	EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
	EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
	EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
	TempDir dir;
	write_text(dir / "f.txt", "foobar");
	EXPECT_EQ(fnv1a64_file(dir / "f.txt"), 0x85944171f73967e8ULL);
	EXPECT_THROW(fnv1a64_file(dir / "missing.txt"), DataError);
}

TEST(BundleIo, SeasonalRoundTripIsExact) {
	const auto truth = small_truth();
	const auto& m = truth.bundle.seasonal;
	const auto back = seasonal_from_json(Json::parse(seasonal_to_json(m).dump()), m.n_points());
	ASSERT_EQ(back.n_points(), m.n_points());
	EXPECT_EQ(back.n_harmonics, m.n_harmonics);
	for (int i = 0; i < m.n_points(); ++i) {
		EXPECT_EQ(back.mean_coefs[i], m.mean_coefs[i]);
		EXPECT_EQ(back.sd_coefs[i], m.sd_coefs[i]);
	}
	EXPECT_THROW(seasonal_from_json(seasonal_to_json(m), m.n_points() + 1), DataError);
}

TEST(BundleIo, VarRoundTripKeepsRestrictionPattern) {
	const auto truth = small_truth();
	const auto back = var_from_json(Json::parse(var_to_json(truth.var).dump()), 12);
	EXPECT_EQ(back.a1, truth.var.a1);
	EXPECT_EQ(back.a2, truth.var.a2);
	EXPECT_EQ(back.restrictions.entries, truth.var.restrictions.entries);
	EXPECT_EQ(back.scheme, truth.var.scheme);
	EXPECT_EQ(back.stable, truth.var.stable);
	EXPECT_THROW(var_from_json(var_to_json(truth.var), 13), DataError);
	Json bad = var_to_json(truth.var);
	bad["coefficients"][0]["matrix"] = "A3";
	EXPECT_THROW(var_from_json(bad, 12), DataError);
}

TEST(BundleIo, PartitionAndRegionsRoundTrip) {
	const auto truth = small_truth();
	const auto& p = truth.bundle.partition;
	const auto pb = partition_from_json(Json::parse(partition_to_json(p).dump()), 12);
	EXPECT_EQ(pb.assignment, p.assignment);
	EXPECT_EQ(pb.n_clusters, p.n_clusters);
	EXPECT_THROW(partition_from_json(partition_to_json(p), 11), DataError);

	const auto rb = regions_from_json(Json::parse(regions_to_json(truth.bundle.regions).dump()));
	ASSERT_EQ(rb.size(), truth.bundle.regions.size());
	for (std::size_t k = 0; k < rb.size(); ++k) {
		const auto& a = truth.bundle.regions[k];
		EXPECT_EQ(rb[k].id, a.id);
		EXPECT_EQ(rb[k].members, a.members);
		EXPECT_EQ(rb[k].dp.xi, a.dp.xi);
		EXPECT_EQ(rb[k].dp.alpha, a.dp.alpha);
		EXPECT_EQ(rb[k].dp.nu, a.dp.nu);
		EXPECT_EQ(rb[k].matern_phi, a.matern_phi);
		// The scale matrix is stored as a lower triangle and symmetrized.
		EXPECT_TRUE(rb[k].dp.omega.isApprox(a.dp.omega, 1e-15));
		EXPECT_EQ(rb[k].dp.omega, rb[k].dp.omega.transpose());
	}
}

TEST(BundleIo, SavedBundleSimulatesIdentically) {
	const auto truth = small_truth();
	TempDir dir;
	save_bundle(dir.path(), truth.bundle, truth.var);
	for (const char* f : {bundle_files::grid, bundle_files::seasonal, bundle_files::var,
	                      bundle_files::partition, bundle_files::skewt}) {
		EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
	}
	const auto loaded = load_bundle(dir.path(), InnovationFamily::SkewT, truth.bundle.master_seed);
	SimulateOptions opts;
	opts.n_realizations = 2;
	opts.n_years = 1;
	opts.burn_in_days = 50;
	const auto a = simulate(truth.bundle, opts);
	const auto b = simulate(loaded.bundle, opts);
	EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
	// Saving the loaded bundle reproduces the files byte for byte.
	TempDir again;
	save_bundle(again.path(), loaded.bundle, loaded.var);
	for (const char* f : {bundle_files::seasonal, bundle_files::var, bundle_files::partition,
	                      bundle_files::skewt}) {
		EXPECT_EQ(read_text(dir / f), read_text(again / f)) << f;
	}
}

TEST(BundleIo, LoadRejectsMissingOrUnstable) {
	auto truth = small_truth();
	TempDir dir;
	save_bundle(dir.path(), truth.bundle, truth.var);
	std::filesystem::remove(dir / bundle_files::skewt);
	EXPECT_THROW(load_bundle(dir.path(), InnovationFamily::SkewT, 1), DataError);

	TempDir unstable;
	truth.bundle.a1 *= 2.0;
	truth.var.a1 = truth.bundle.a1;
	save_bundle(unstable.path(), truth.bundle, truth.var);
	EXPECT_THROW(load_bundle(unstable.path(), InnovationFamily::SkewT, 1), NumericalError);
}

TEST(BundleIo, MalformedJsonIsADataError) {
	TempDir dir;
	write_text(dir / "x.json", "{ not json");
	EXPECT_THROW(read_json(dir / "x.json"), DataError);
	EXPECT_THROW(read_json(dir / "absent.json"), DataError);
}

TEST(SyntheticTruth, HasRequestedStructure) {
	const auto truth = make_truth(SyntheticTruthOptions{});
	const auto& b = truth.bundle;
	EXPECT_NEAR(check_stability(b.a1, b.a2).max_modulus, 0.8, 1e-9);
	EXPECT_EQ(b.partition.sizes(), (std::vector<int>{9, 6, 6, 4}));
	EXPECT_NO_THROW(b.validate());
	const double deltas[] = {0.85, 0.8, 0.85, 0.9};
	for (const auto& r : b.regions) {
		const auto cp = dp_moments(r.dp);
		EXPECT_LT(cp.mu.cwiseAbs().maxCoeff(), 1e-12);
		const Eigen::MatrixXd target = matern_matrix(distance_matrix(*b.meta, r.members), 150.0);
		EXPECT_LT((cp.sigma - target).cwiseAbs().maxCoeff(), 1e-10);
		const double g1 = st_skewness(deltas[r.id - 1], 12.0);
		for (Eigen::Index i = 0; i < cp.gamma1.size(); ++i) EXPECT_NEAR(cp.gamma1[i], g1, 1e-10);
	}
	for (int i = 0; i < 25; ++i) {
		for (int doy : {1, 100, 200, 300}) EXPECT_GT(b.seasonal.sd(i, doy), 0.0);
	}
}

TEST(SyntheticTruth, GaussianVariantIsOneIndependentRegion) {
	SyntheticTruthOptions o;
	o.skewed = false;
	const auto truth = make_truth(o);
	ASSERT_EQ(truth.bundle.regions.size(), 1u);
	const auto cov = st_covariance(truth.bundle.regions[0].dp);
	EXPECT_TRUE(cov.isApprox(Eigen::MatrixXd::Identity(25, 25), 1e-5));
	EXPECT_EQ(truth.bundle.regions[0].dp.alpha.cwiseAbs().maxCoeff(), 0.0);
}

}  // namespace
}  // namespace windgen
