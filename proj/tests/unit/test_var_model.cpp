#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <windgen/errors.hpp>
#include <windgen/stats.hpp>
#include <windgen/synthetic.hpp>
#include <windgen/var_model.hpp>

namespace windgen {
namespace {

/// Direct recursion W_t = A1 W_{t-1} + A2 W_{t-2} + e_t with iid N(0,1)
/// innovations and a discarded warm-up.
EnsembleSeries simulate_var(std::shared_ptr<const GridMeta> meta, const Eigen::MatrixXd& a1,
                            const Eigen::MatrixXd& a2, int members, int days, std::uint64_t seed) {
	// The calendar needs whole years; callers slice by n_days.
	const int years = (days + 364) / 365;
	EnsembleSeries s(meta, {1, years}, members, Scale::Standardized);
	const auto n = static_cast<Eigen::Index>(meta->size());
	std::mt19937_64 g(seed);
	std::normal_distribution<double> z;
	for (int r = 0; r < members; ++r) {
		Eigen::VectorXd w1 = Eigen::VectorXd::Zero(n);
		Eigen::VectorXd w2 = Eigen::VectorXd::Zero(n);
		Eigen::VectorXd e(n);
		for (int t = -500; t < s.n_days(); ++t) {
			for (Eigen::Index i = 0; i < n; ++i) e[i] = z(g);
			const Eigen::VectorXd w = a1 * w1 + a2 * w2 + e;
			w2 = w1;
			w1 = w;
			if (t >= 0) {
				for (Eigen::Index i = 0; i < n; ++i) s.at(r, t, static_cast<int>(i)) = w[i];
			}
		}
	}
	return s;
}

int degree_sum(const GridMeta& meta) {
	int s = 0;
	for (const auto& nb : meta.neighbors) s += static_cast<int>(nb.size());
	return s;
}

TEST(VarModel, RestrictionCounts) {
	const auto single = make_lattice(1, 1, 0.0, 0.0, 1.0);
	EXPECT_EQ(build_restrictions(single).size(), 2u);

	const auto grid = make_lattice(3, 3, 0.0, 0.0, 1.0);
	// Degrees by hand: 4 corners x 2 + 4 edges x 3 + centre 4 = 24.
	EXPECT_EQ(degree_sum(grid), 24);
	EXPECT_EQ(build_restrictions(grid).size(), 42u);
	EXPECT_EQ(build_restrictions(grid, StencilScheme::Dense).size(), 2u * 9 * 9);
	EXPECT_EQ(build_restrictions(grid, StencilScheme::Diagonal).size(), 18u);
}

TEST(VarModel, RestrictionStructure) {
	std::vector<GridPoint> pts;
	for (int row = 0; row < 6; ++row)
		for (int col = 0; col < 7; ++col)
			if ((row * 3 + col * 5) % 7 != 0) pts.push_back({static_cast<int>(pts.size()), 1.0 * row, 1.0 * col, 0.0});
	const auto meta = GridMeta::from_points(pts, 1.0);
	const auto r = build_restrictions(meta);
	const int n = static_cast<int>(meta.size());
	EXPECT_EQ(static_cast<int>(r.size()), n + degree_sum(meta) + n);
	for (int i = 0; i < n; ++i) {
		EXPECT_TRUE(r.allows(Lag::A1, i, i));
		EXPECT_TRUE(r.allows(Lag::A2, i, i));
		for (const auto& nb : meta.neighbors[i]) {
			EXPECT_TRUE(r.allows(Lag::A1, i, nb.id));
			EXPECT_FALSE(r.allows(Lag::A2, i, nb.id));
		}
	}
	for (const auto& e : r.entries) {
		if (e.lag == Lag::A2) EXPECT_EQ(e.row, e.col);
	}
}

struct Truth {
	std::shared_ptr<const GridMeta> meta;
	Eigen::MatrixXd a1;
	Eigen::MatrixXd a2;
};

Truth stencil_truth(int nx, int ny) {
	Truth t;
	t.meta = std::make_shared<const GridMeta>(make_lattice(nx, ny, 20.0, 40.0, 1.0));
	const auto n = static_cast<Eigen::Index>(t.meta->size());
	t.a2 = -0.1 * Eigen::MatrixXd::Identity(n, n);
	t.a1 = scale_to_radius(stencil_pattern(*t.meta), t.a2, 0.8);
	return t;
}

TEST(VarModel, RecoversStencilTruth) {
	const auto truth = stencil_truth(3, 3);
	EXPECT_NEAR(check_stability(truth.a1, truth.a2).max_modulus, 0.8, 1e-9);
	const auto s = simulate_var(truth.meta, truth.a1, truth.a2, 3, 20075, 1);
	const auto restr = build_restrictions(*truth.meta);
	const auto m = fit_var(s, restr);
	EXPECT_EQ(m.estimator, Estimator::OLS);
	EXPECT_LT((m.a1 - truth.a1).cwiseAbs().maxCoeff(), 0.02);
	EXPECT_LT((m.a2 - truth.a2).cwiseAbs().maxCoeff(), 0.02);
	EXPECT_TRUE(m.stable);
	EXPECT_EQ(m.residuals.rows(), 3 * (s.n_days() - 2));
	// Zero pattern is exact.
	for (int i = 0; i < 9; ++i) {
		for (int j = 0; j < 9; ++j) {
			if (!restr.allows(Lag::A1, i, j)) EXPECT_EQ(m.a1(i, j), 0.0);
			if (!restr.allows(Lag::A2, i, j)) EXPECT_EQ(m.a2(i, j), 0.0);
		}
	}
}

TEST(VarModel, GlsRecoversTruthToo) {
	const auto truth = stencil_truth(3, 3);
	const auto s = simulate_var(truth.meta, truth.a1, truth.a2, 3, 10220, 2);
	const auto m = fit_var(s, build_restrictions(*truth.meta), Estimator::GLS);
	EXPECT_EQ(m.estimator, Estimator::GLS);
	EXPECT_LT((m.a1 - truth.a1).cwiseAbs().maxCoeff(), 0.03);
	EXPECT_LT((m.a2 - truth.a2).cwiseAbs().maxCoeff(), 0.03);
}

TEST(VarModel, WhiteNoiseNull) {
	auto meta = std::make_shared<const GridMeta>(make_lattice(5, 5, 0.0, 0.0, 1.0));
	const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(25, 25);
	const auto s = simulate_var(meta, zero, zero, 3, 20075, 3);
	const auto m = fit_var(s, build_restrictions(*meta));
	EXPECT_LT(m.a1.cwiseAbs().maxCoeff(), 0.02);
	EXPECT_LT(m.a2.cwiseAbs().maxCoeff(), 0.02);
	// About 1% of 130 coefficients exceed the two-sided 1% critical value.
	int exceed = 0;
	int significant = 0;
	for (const auto& c : m.significance) {
		if (std::abs(c.t_stat) > 2.5758293035489) ++exceed;
		if (c.significant) ++significant;
		EXPECT_GT(c.std_error, 0.0);
	}
	EXPECT_LE(exceed, 6);
	EXPECT_LE(significant, 2);
}

TEST(VarModel, ScalarAr2MatchesNormalEquations) {
	auto meta = std::make_shared<const GridMeta>(make_lattice(1, 1, 0.0, 0.0, 1.0));
	Eigen::MatrixXd a1(1, 1), a2(1, 1);
	a1 << 0.5;
	a2 << 0.3;
	const auto s = simulate_var(meta, a1, a2, 1, 100375, 4);
	const auto m = fit_var(s, build_restrictions(*meta));

	// Yule-Walker equations from the lagged sample moments, solved by Cramer's rule.
	const auto w = s.point_series(0, 0);
	double s11 = 0, s12 = 0, s22 = 0, s01 = 0, s02 = 0;
	for (std::size_t t = 2; t < w.size(); ++t) {
		s11 += w[t - 1] * w[t - 1];
		s12 += w[t - 1] * w[t - 2];
		s22 += w[t - 2] * w[t - 2];
		s01 += w[t] * w[t - 1];
		s02 += w[t] * w[t - 2];
	}
	const double det = s11 * s22 - s12 * s12;
	const double phi1 = (s01 * s22 - s02 * s12) / det;
	const double phi2 = (s11 * s02 - s12 * s01) / det;
	EXPECT_NEAR(m.a1(0, 0), phi1, 1e-6);
	EXPECT_NEAR(m.a2(0, 0), phi2, 1e-6);

	// Autocovariance-based Yule-Walker agrees up to O(1/T) end effects.
	const double mu = stats::mean(w);
	auto gamma = [&](int k) {
		double c = 0;
		for (std::size_t t = k; t < w.size(); ++t) c += (w[t] - mu) * (w[t - k] - mu);
		return c / static_cast<double>(w.size());
	};
	const double r1 = gamma(1) / gamma(0);
	const double r2 = gamma(2) / gamma(0);
	EXPECT_NEAR(m.a1(0, 0), r1 * (1 - r2) / (1 - r1 * r1), 2e-3);
	EXPECT_NEAR(m.a2(0, 0), (r2 - r1 * r1) / (1 - r1 * r1), 2e-3);
	EXPECT_NEAR(m.a1(0, 0), 0.5, 0.02);
	EXPECT_NEAR(m.a2(0, 0), 0.3, 0.02);
}

TEST(VarModel, StabilityExamples) {
	const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(3, 3);
	auto r = check_stability(z, z);
	EXPECT_EQ(r.max_modulus, 0.0);
	EXPECT_TRUE(r.stable);

	r = check_stability(1.1 * Eigen::MatrixXd::Identity(3, 3), z);
	EXPECT_NEAR(r.max_modulus, 1.1, 1e-12);
	EXPECT_FALSE(r.stable);

	Eigen::MatrixXd a1(1, 1), a2(1, 1);
	a1 << 0.5;
	a2 << 0.3;
	// Largest root of lambda^2 - 0.5 lambda - 0.3.
	const double root = (0.5 + std::sqrt(0.25 + 4 * 0.3)) / 2;
	r = check_stability(a1, a2);
	EXPECT_NEAR(r.max_modulus, root, 1e-12);
	EXPECT_NEAR(root, 0.8520797, 1e-6);
	EXPECT_TRUE(r.stable);

	const auto c = companion_matrix(a1, a2);
	EXPECT_EQ(c.rows(), 2);
	EXPECT_EQ(c(1, 0), 1.0);
	EXPECT_EQ(c(1, 1), 0.0);
}

TEST(VarModel, OlsResidualsOrthogonalToRegressors) {
	const auto truth = stencil_truth(3, 3);
	const auto s = simulate_var(truth.meta, truth.a1, truth.a2, 2, 3650, 5);
	const auto restr = build_restrictions(*truth.meta);
	const auto m = fit_var(s, restr);
	const int len = s.n_days() - 2;
	for (const auto& e : restr.entries) {
		double dot = 0, ee = 0, zz = 0;
		for (int r = 0; r < 2; ++r) {
			for (int t = 0; t < len; ++t) {
				const double res = m.residuals(r * len + t, e.row);
				const double z = s.at(r, t + 2 - static_cast<int>(e.lag), e.col);
				dot += res * z;
				ee += res * res;
				zz += z * z;
			}
		}
		EXPECT_LT(std::abs(dot) / std::sqrt(ee * zz), 1e-8) << entry_name(e);
	}
}

TEST(VarModel, ErrorShrinksWithSampleSize) {
	const auto truth = stencil_truth(3, 3);
	const auto restr = build_restrictions(*truth.meta);
	auto rms_error = [&](int days, int reps) {
		double ss = 0;
		int count = 0;
		for (int k = 0; k < reps; ++k) {
			const auto m = fit_var(simulate_var(truth.meta, truth.a1, truth.a2, 1, days, 100 + k + days), restr);
			for (const auto& e : restr.entries) {
				const double d = (e.lag == Lag::A1 ? m.a1 - truth.a1 : m.a2 - truth.a2)(e.row, e.col);
				ss += d * d;
				++count;
			}
		}
		return std::sqrt(ss / count);
	};
	const double small = rms_error(1825, 4);
	const double large = rms_error(29200, 4);
	// 16x more data: error ratio near 4.
	EXPECT_GT(small / large, 2.5);
	EXPECT_LT(small / large, 6.5);
}

TEST(VarModel, GlsWithIdentityEqualsOls) {
	const auto truth = stencil_truth(3, 3);
	const auto s = simulate_var(truth.meta, truth.a1, truth.a2, 2, 730, 6);
	const auto restr = build_restrictions(*truth.meta);
	const auto mom = lagged_moments(s);
	const Eigen::VectorXd ols = restricted_ols(mom, restr);
	const Eigen::VectorXd gls = restricted_gls(mom, restr, Eigen::MatrixXd::Identity(9, 9));
	EXPECT_LT((ols - gls).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(VarModel, SingularSystemNamesColumns) {
	// Two identical series make the dense design rank deficient.
	auto meta = std::make_shared<const GridMeta>(make_lattice(2, 1, 0.0, 0.0, 1.0));
	EnsembleSeries s(meta, {1, 1}, 1, Scale::Standardized);
	std::mt19937_64 g(1);
	std::normal_distribution<double> z;
	for (int t = 0; t < s.n_days(); ++t) s.at(0, t, 0) = s.at(0, t, 1) = z(g);
	try {
		fit_var(s, build_restrictions(*meta, StencilScheme::Dense));
		FAIL() << "expected a singular system";
	} catch (const NumericalError& e) {
		EXPECT_NE(std::string(e.what()).find("deficient columns: A"), std::string::npos) << e.what();
	}
}

TEST(VarModel, InputChecks) {
	auto meta = std::make_shared<const GridMeta>(make_lattice(2, 1, 0.0, 0.0, 1.0));
	EnsembleSeries s(meta, {1, 1}, 1, Scale::Standardized);
	std::mt19937_64 g(1);
	std::normal_distribution<double> z;
	for (double& v : s.values()) v = z(g);
	const auto restr = build_restrictions(*meta);
	s.at(0, 10, 1) = std::nan("");
	EXPECT_THROW(fit_var(s, restr), DataError);
	s.at(0, 10, 1) = 0.0;
	s.set_scale(Scale::Raw);
	EXPECT_THROW(fit_var(s, restr), ConfigError);
}

TEST(VarModel, BenjaminiHochberg) {
	const std::vector<double> p{0.042, 0.001, 0.205, 0.039, 0.008, 0.06, 0.041, 0.074};
	const auto rej = benjamini_hochberg(p, 0.05);
	const std::vector<bool> expected{false, true, false, false, true, false, false, false};
	EXPECT_EQ(rej, expected);
}

TEST(VarModel, ResidualMoments) {
	std::mt19937_64 g(12);
	std::normal_distribution<double> z;
	Eigen::MatrixXd e(60000, 3);
	for (Eigen::Index k = 0; k < e.rows(); ++k) {
		e(k, 0) = z(g);
		e(k, 1) = z(g);
		e(k, 2) = -2.0 * e(k, 1);
	}
	const auto rm = residual_moments(e);
	for (int i = 0; i < 3; ++i) {
		EXPECT_LT(std::abs(rm.skewness[i]), 0.05);
		EXPECT_LT(std::abs(rm.excess_kurtosis[i]), 0.1);
	}
	EXPECT_NEAR(rm.correlation(1, 2), -1.0, 1e-12);
	EXPECT_LT(std::abs(rm.correlation(0, 1)), 0.02);
}

}  // namespace
}  // namespace windgen
