#include "windgen/skewt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include "windgen/errors.hpp"
#include "windgen/stats.hpp"

namespace windgen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd to_correlation(const Eigen::MatrixXd& m) {
	const Eigen::VectorXd inv = m.diagonal().cwiseSqrt().cwiseInverse();
	Eigen::MatrixXd c = inv.asDiagonal() * m * inv.asDiagonal();
	c.diagonal().setOnes();
	return c;
}

Eigen::LLT<Eigen::MatrixXd> spd_factor(const Eigen::MatrixXd& m, const char* what) {
	Eigen::LLT<Eigen::MatrixXd> llt(m);
	if (llt.info() != Eigen::Success || !m.isApprox(m.transpose(), 1e-10)) {
		throw NumericalError(std::string(what) + " is not symmetric positive definite");
	}
	return llt;
}

}  // namespace

Eigen::VectorXd SkewTParamsDP::scales() const { return omega.diagonal().cwiseSqrt(); }

Eigen::MatrixXd SkewTParamsDP::correlation() const { return to_correlation(omega); }

void SkewTParamsDP::validate() const {
	const auto d = xi.size();
	if (d == 0 || omega.rows() != d || omega.cols() != d || alpha.size() != d) {
		throw ConfigError("skew-t parameters have inconsistent dimensions");
	}
	if (!(nu > 0.0)) {
		throw ConfigError("skew-t degrees of freedom must be positive");
	}
	if (!xi.allFinite() || !alpha.allFinite() || !omega.allFinite()) {
		throw ConfigError("non-finite skew-t parameter");
	}
	spd_factor(omega, "skew-t scale matrix");
}

double b_nu(double nu) {
	if (!(nu > 1.0)) {
		throw NumericalError("b_nu requires nu > 1 (the mean does not exist)");
	}
	return std::sqrt(nu / std::numbers::pi) *
	       boost::math::tgamma_delta_ratio(0.5 * (nu - 1.0), 0.5);
}

Eigen::VectorXd delta_from_alpha(const Eigen::MatrixXd& corr, const Eigen::VectorXd& alpha) {
	const Eigen::VectorXd oa = corr * alpha;
	return oa / std::sqrt(1.0 + alpha.dot(oa));
}

Eigen::VectorXd alpha_from_delta(const Eigen::MatrixXd& corr, const Eigen::VectorXd& delta) {
	const auto llt = spd_factor(corr, "skew-t correlation matrix");
	const Eigen::VectorXd od = llt.solve(delta);
	const double q = delta.dot(od);
	if (!(q < 1.0)) {
		throw NumericalError("delta lies outside the admissible region (delta' Obar^-1 delta >= 1)");
	}
	return od / std::sqrt(1.0 - q);
}

double st_skewness(double delta, double nu) {
	if (!(nu > 3.0)) {
		throw NumericalError("skewness requires nu > 3");
	}
	const double m = b_nu(nu) * delta;
	const double s2 = nu / (nu - 2.0) - m * m;
	const double mu3 = m * (nu * (3.0 - delta * delta) / (nu - 3.0) - 3.0 * nu / (nu - 2.0) +
	                        2.0 * m * m);
	return mu3 / std::pow(s2, 1.5);
}

double st_excess_kurtosis(double delta, double nu) {
	if (!(nu > 4.0)) {
		throw NumericalError("kurtosis undefined for nu <= 4");
	}
	const double m = b_nu(nu) * delta;
	const double m2 = m * m;
	const double ez2 = nu / (nu - 2.0);
	const double ez3 = m * nu * (3.0 - delta * delta) / (nu - 3.0);
	const double ez4 = 3.0 * nu * nu / ((nu - 2.0) * (nu - 4.0));
	const double s2 = ez2 - m2;
	const double mu4 = ez4 - 4.0 * m * ez3 + 6.0 * m2 * ez2 - 3.0 * m2 * m2;
	return mu4 / (s2 * s2) - 3.0;
}

double st_mardia_kurtosis(int d, double nu, double beta0_sq) {
	if (!(nu > 4.0)) {
		throw NumericalError("kurtosis undefined for nu <= 4");
	}
	const double dd = d;
	const double b = b_nu(nu);
	return 2.0 * dd * (dd + 2.0) / (nu - 4.0) +
	       4.0 * (dd + 2.0) / ((nu - 3.0) * (nu - 4.0)) * beta0_sq +
	       2.0 *
	           (2.0 * nu / ((nu - 3.0) * b * b) -
	            (3.0 * (nu - 3.0) * (nu - 3.0) - 6.0) / ((nu - 3.0) * (nu - 4.0))) *
	           beta0_sq * beta0_sq;
}

Eigen::VectorXd st_mean(const SkewTParamsDP& dp) {
	dp.validate();
	const Eigen::VectorXd delta = delta_from_alpha(dp.correlation(), dp.alpha);
	return dp.xi + dp.scales().cwiseProduct(b_nu(dp.nu) * delta);
}

Eigen::MatrixXd st_covariance(const SkewTParamsDP& dp) {
	dp.validate();
	if (!(dp.nu > 2.0)) {
		throw NumericalError("covariance requires nu > 2");
	}
	const Eigen::VectorXd delta = delta_from_alpha(dp.correlation(), dp.alpha);
	const Eigen::VectorXd mu0 = dp.scales().cwiseProduct(b_nu(dp.nu) * delta);
	return dp.nu / (dp.nu - 2.0) * dp.omega - mu0 * mu0.transpose();
}

SkewTParamsCP dp_moments(const SkewTParamsDP& dp) {
	dp.validate();
	if (!(dp.nu > 4.0)) {
		throw NumericalError("kurtosis undefined for nu <= 4");
	}
	const Eigen::VectorXd w = dp.scales();
	const Eigen::VectorXd delta = delta_from_alpha(dp.correlation(), dp.alpha);
	const Eigen::VectorXd mu0 = w.cwiseProduct(b_nu(dp.nu) * delta);
	SkewTParamsCP cp;
	cp.mu = dp.xi + mu0;
	cp.sigma = dp.nu / (dp.nu - 2.0) * dp.omega - mu0 * mu0.transpose();
	cp.gamma1.resize(delta.size());
	for (Eigen::Index i = 0; i < delta.size(); ++i) {
		cp.gamma1[i] = st_skewness(delta[i], dp.nu);
	}
	const auto llt = spd_factor(cp.sigma, "skew-t covariance");
	cp.gamma2m = st_mardia_kurtosis(dp.dim(), dp.nu, mu0.dot(llt.solve(mu0)));
	return cp;
}

SkewTParamsDP dp_from_delta(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                            const Eigen::VectorXd& delta, double nu) {
	if (!(nu > 2.0)) {
		throw NumericalError("covariance requires nu > 2");
	}
	const Eigen::VectorXd muz = b_nu(nu) * delta;
	const double ez2 = nu / (nu - 2.0);
	const Eigen::VectorXd w =
	    (sigma.diagonal().array() / (ez2 - muz.array().square())).sqrt().matrix();
	const Eigen::VectorXd winv = w.cwiseInverse();
	Eigen::MatrixXd corr = (winv.asDiagonal() * sigma * winv.asDiagonal() +
	                        muz * muz.transpose()) /
	                       ez2;
	corr = 0.5 * (corr + corr.transpose());
	corr.diagonal().setOnes();
	SkewTParamsDP dp;
	spd_factor(corr, "implied Omega");
	dp.alpha = alpha_from_delta(corr, delta);
	dp.omega = w.asDiagonal() * corr * w.asDiagonal();
	dp.xi = mu - w.cwiseProduct(muz);
	dp.nu = nu;
	return dp;
}

namespace {

/// Moment map (atanh delta, log(nu - 4)) -> (gamma1, gamma2m) for a fixed
/// correlation structure.
class MomentMap {
public:
	MomentMap(const Eigen::MatrixXd& corr, double max_nu)
	    : corr_(corr), llt_(spd_factor(corr, "CP correlation")), d_(corr.rows()),
	      max_log_nu_(std::log(max_nu - 4.0)) {}

	Eigen::Index dim() const { return d_; }

	static Eigen::VectorXd delta_of(const Eigen::VectorXd& theta) {
		return theta.head(theta.size() - 1).array().tanh().matrix();
	}
	static double nu_of(const Eigen::VectorXd& theta) {
		return 4.0 + std::exp(theta[theta.size() - 1]);
	}

	Eigen::VectorXd clamp(Eigen::VectorXd theta) const {
		for (Eigen::Index i = 0; i < d_; ++i) theta[i] = std::clamp(theta[i], -8.0, 8.0);
		theta[d_] = std::clamp(theta[d_], std::log(1e-3), max_log_nu_);
		return theta;
	}

	/// Gradient with components pushing against an active bound removed.
	Eigen::VectorXd projected(const Eigen::VectorXd& theta, Eigen::VectorXd g) const {
		for (Eigen::Index i = 0; i <= d_; ++i) {
			const double lo = i < d_ ? -8.0 : std::log(1e-3);
			const double hi = i < d_ ? 8.0 : max_log_nu_;
			if ((theta[i] >= hi && g[i] < 0.0) || (theta[i] <= lo && g[i] > 0.0)) g[i] = 0.0;
		}
		return g;
	}

	Eigen::VectorXd eval(const Eigen::VectorXd& theta) const {
		const Eigen::VectorXd delta = delta_of(theta);
		const double nu = nu_of(theta);
		Eigen::VectorXd out(d_ + 1);
		for (Eigen::Index i = 0; i < d_; ++i) out[i] = st_skewness(delta[i], nu);
		const Eigen::VectorXd muz = b_nu(nu) * delta;
		const Eigen::VectorXd s = (nu / (nu - 2.0) - muz.array().square()).sqrt().matrix();
		const Eigen::VectorXd y = llt_.matrixL().solve(muz.cwiseQuotient(s));
		out[d_] = st_mardia_kurtosis(static_cast<int>(d_), nu, y.squaredNorm());
		return out;
	}

	/// Whether (delta, nu) yields a valid DP for this correlation structure.
	bool feasible(const Eigen::VectorXd& theta) const {
		const Eigen::VectorXd delta = delta_of(theta);
		const double nu = nu_of(theta);
		const Eigen::VectorXd muz = b_nu(nu) * delta;
		const double ez2 = nu / (nu - 2.0);
		const Eigen::VectorXd s = (ez2 - muz.array().square()).sqrt().matrix();
		Eigen::MatrixXd obar = (s.asDiagonal() * corr_ * s.asDiagonal() + muz * muz.transpose()) / ez2;
		Eigen::LLT<Eigen::MatrixXd> llt(obar);
		if (llt.info() != Eigen::Success) return false;
		return delta.dot(llt.solve(delta)) < 1.0 - 1e-12;
	}

private:
	Eigen::MatrixXd corr_;
	Eigen::LLT<Eigen::MatrixXd> llt_;
	Eigen::Index d_;
	double max_log_nu_;
};

struct LmOutcome {
	Eigen::VectorXd theta;
	double f = kInf;
	int iterations = 0;
	bool hit_cap = false;
};

/// Half the Hessian of the squared distance, by central differences.
Eigen::MatrixXd half_hessian(const MomentMap& map, const Eigen::VectorXd& target,
                             const Eigen::VectorXd& theta) {
	const Eigen::Index p = theta.size();
	const auto f = [&](const Eigen::VectorXd& t) { return (map.eval(t) - target).squaredNorm(); };
	Eigen::MatrixXd h(p, p);
	const double f0 = f(theta);
	for (Eigen::Index i = 0; i < p; ++i) {
		const double hi = 1e-4 * std::max(1.0, std::abs(theta[i]));
		for (Eigen::Index j = i; j < p; ++j) {
			const double hj = 1e-4 * std::max(1.0, std::abs(theta[j]));
			Eigen::VectorXd t = theta;
			double v = 0.0;
			if (i == j) {
				t[i] += hi;
				v = f(t);
				t[i] -= 2.0 * hi;
				v = (v + f(t) - 2.0 * f0) / (hi * hi);
			} else {
				t[i] += hi;
				t[j] += hj;
				v += f(t);
				t[j] -= 2.0 * hj;
				v -= f(t);
				t[i] -= 2.0 * hi;
				v += f(t);
				t[j] += 2.0 * hj;
				v -= f(t);
				v /= 4.0 * hi * hj;
			}
			h(i, j) = h(j, i) = 0.5 * v;
		}
	}
	return h;
}

LmOutcome levenberg_marquardt(const MomentMap& map, const Eigen::VectorXd& target,
                              Eigen::VectorXd theta, int max_iter) {
	const Eigen::Index p = theta.size();
	LmOutcome out;
	Eigen::VectorXd r = map.eval(theta) - target;
	double f = r.squaredNorm();
	double lambda = 1e-3;
	// Objective values of recent iterations for the stall test.
	std::vector<double> history;
	int it = 0;
	for (; it < max_iter; ++it) {
		if (f < 1e-26) break;
		Eigen::MatrixXd jac(r.size(), p);
		for (Eigen::Index k = 0; k < p; ++k) {
			const double h = 1e-6 * std::max(1.0, std::abs(theta[k]));
			Eigen::VectorXd tp = theta;
			Eigen::VectorXd tm = theta;
			tp[k] += h;
			tm[k] -= h;
			jac.col(k) = (map.eval(tp) - map.eval(tm)) / (2.0 * h);
		}
		const Eigen::MatrixXd jtj = jac.transpose() * jac;
		const Eigen::VectorXd g = jac.transpose() * r;
		if (map.projected(theta, g).lpNorm<Eigen::Infinity>() < 1e-12) break;
		// Gauss-Newton crawls when the target is out of reach; a residual
		// that stays large switches to the full finite-difference Hessian.
		const Eigen::MatrixXd hess = f > 1e-8 ? half_hessian(map, target, theta) : jtj;
		bool improved = false;
		while (lambda < 1e12) {
			Eigen::MatrixXd a = hess;
			a.diagonal().array() += lambda * (jtj.diagonal().array() + 1e-12);
			const Eigen::VectorXd step = a.ldlt().solve(-g);
			if (!step.allFinite() || step.dot(g) >= 0.0) {
				lambda *= 4.0;
				continue;
			}
			const Eigen::VectorXd cand = map.clamp(theta + step);
			if ((cand - theta).norm() < 1e-15 * (1.0 + theta.norm())) {
				lambda = 1e12;
				break;
			}
			if (map.feasible(cand)) {
				const Eigen::VectorXd rc = map.eval(cand) - target;
				const double fc = rc.squaredNorm();
				if (fc < f) {
					theta = cand;
					r = rc;
					f = fc;
					lambda = std::max(lambda / 3.0, 1e-12);
					improved = true;
					break;
				}
			}
			lambda *= 4.0;
		}
		if (!improved) break;
		history.push_back(f);
		constexpr std::size_t window = 20;
		if (history.size() > window && f > history[history.size() - 1 - window] * (1.0 - 1e-4)) {
			break;
		}
	}
	out.theta = theta;
	out.f = f;
	out.iterations = it;
	out.hit_cap = it >= max_iter && f >= 1e-26;
	return out;
}

/// Solves st_skewness(delta, nu) = target by bisection, clamped to +-0.999.
double invert_skewness(double target, double nu) {
	double lo = -0.999;
	double hi = 0.999;
	if (target <= st_skewness(lo, nu)) return lo;
	if (target >= st_skewness(hi, nu)) return hi;
	for (int k = 0; k < 80; ++k) {
		const double mid = 0.5 * (lo + hi);
		(st_skewness(mid, nu) < target ? lo : hi) = mid;
	}
	return 0.5 * (lo + hi);
}

}  // namespace

CpToDpResult cp_to_dp(const SkewTParamsCP& cp, const CpToDpOptions& opts) {
	const Eigen::Index d = cp.mu.size();
	if (d == 0 || cp.sigma.rows() != d || cp.sigma.cols() != d || cp.gamma1.size() != d) {
		throw ConfigError("centered parameters have inconsistent dimensions");
	}
	spd_factor(cp.sigma, "CP covariance");
	const MomentMap map(to_correlation(cp.sigma), opts.max_nu);
	Eigen::VectorXd target(d + 1);
	target.head(d) = cp.gamma1;
	target[d] = cp.gamma2m;

	const double nu_sym = 4.0 + 2.0 * d * (d + 2.0) / std::max(cp.gamma2m, 1e-9);
	const double nu0 = std::clamp(nu_sym, 4.05, opts.max_nu);
	const double starts[] = {nu0, 4.0 + (nu0 - 4.0) / 4.0, 30.0};

	LmOutcome best;
	bool capped = false;
	for (double nu_start : starts) {
		Eigen::VectorXd theta(d + 1);
		theta[d] = std::log(nu_start - 4.0);
		for (Eigen::Index i = 0; i < d; ++i) {
			theta[i] = std::atanh(invert_skewness(cp.gamma1[i], nu_start));
		}
		theta = map.clamp(theta);
		for (int k = 0; k < 200 && !map.feasible(theta); ++k) {
			theta.head(d) *= 0.9;
		}
		if (!map.feasible(theta)) {
			theta.head(d).setZero();
		}
		auto run = levenberg_marquardt(map, target, theta, opts.max_iterations);
		if (run.f < best.f) {
			capped = run.hit_cap;
			best = std::move(run);
		}
		if (best.f < opts.tol) break;
	}
	if (capped && !(best.f < opts.tol)) {
		const Eigen::VectorXd delta = MomentMap::delta_of(best.theta);
		throw NumericalError("CP->DP inversion hit the iteration cap; best squared distance " +
		                     std::to_string(best.f) + " at nu = " +
		                     std::to_string(MomentMap::nu_of(best.theta)));
	}
	CpToDpResult res;
	res.delta = MomentMap::delta_of(best.theta);
	const double nu = MomentMap::nu_of(best.theta);
	res.dp = dp_from_delta(cp.mu, cp.sigma, res.delta, nu);
	res.distance = best.f;
	res.iterations = best.iterations;
	res.converged = best.f < opts.tol;
	return res;
}

SkewTDensity::SkewTDensity(SkewTParamsDP dp) : dp_(std::move(dp)) {
	dp_.validate();
	llt_ = spd_factor(dp_.omega, "skew-t scale matrix");
	inv_scales_ = dp_.scales().cwiseInverse();
	const double d = dp_.dim();
	const double logdet = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
	log_norm_ = std::lgamma(0.5 * (dp_.nu + d)) - std::lgamma(0.5 * dp_.nu) -
	            0.5 * d * std::log(dp_.nu * std::numbers::pi) - 0.5 * logdet;
}

double SkewTDensity::log_pdf(const Eigen::VectorXd& z) const {
	const double d = dp_.dim();
	const Eigen::VectorXd x = z - dp_.xi;
	if (!x.allFinite()) return -kInf;
	const double q = llt_.matrixL().solve(x).squaredNorm();
	if (!std::isfinite(q)) return -kInf;
	const double log_t = log_norm_ - 0.5 * (dp_.nu + d) * std::log1p(q / dp_.nu);
	const double arg =
	    dp_.alpha.dot(x.cwiseProduct(inv_scales_)) * std::sqrt((dp_.nu + d) / (dp_.nu + q));
	const boost::math::students_t_distribution<double> tdist(dp_.nu + d);
	const double cdf = arg < 0.0 ? boost::math::cdf(boost::math::complement(tdist, -arg))
	                             : boost::math::cdf(tdist, arg);
	return std::log(2.0) + log_t + std::log(cdf);
}

double SkewTDensity::pdf(const Eigen::VectorXd& z) const { return std::exp(log_pdf(z)); }

double density(const Eigen::VectorXd& z, const SkewTParamsDP& dp) {
	return SkewTDensity(dp).pdf(z);
}

SkewTSampler::SkewTSampler(const SkewTParamsDP& dp) : nu_(dp.nu) {
	dp.validate();
	xi_ = dp.xi;
	scales_ = dp.scales();
	const Eigen::MatrixXd corr = dp.correlation();
	const Eigen::VectorXd delta = delta_from_alpha(corr, dp.alpha);
	const Eigen::Index d = delta.size();
	Eigen::MatrixXd aug(d + 1, d + 1);
	aug(0, 0) = 1.0;
	aug.block(0, 1, 1, d) = delta.transpose();
	aug.block(1, 0, d, 1) = delta;
	aug.bottomRightCorner(d, d) = corr;
	chol_ = spd_factor(aug, "skew-normal augmented correlation").matrixL();
	work_.resize(d + 1);
	gamma_ = std::gamma_distribution<double>(0.5 * nu_, 2.0);
}

void SkewTSampler::draw(Rng& rng, Eigen::Ref<Eigen::VectorXd> out) {
	for (Eigen::Index k = 0; k < work_.size(); ++k) work_[k] = normal_(rng);
	const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>() * work_;
	const double sign = v[0] > 0.0 ? 1.0 : -1.0;
	const double scale = sign / std::sqrt(gamma_(rng) / nu_);
	out = xi_ + scales_.cwiseProduct(v.tail(v.size() - 1)) * scale;
}

void SkewTSampler::reset() {
	normal_.reset();
	gamma_.reset();
}

Eigen::MatrixXd sample(const SkewTParamsDP& dp, int n, Rng& rng) {
	SkewTSampler sampler(dp);
	Eigen::MatrixXd out(n, dp.dim());
	Eigen::VectorXd row(dp.dim());
	for (int k = 0; k < n; ++k) {
		sampler.draw(rng, row);
		out.row(k) = row.transpose();
	}
	return out;
}

double matern_correlation(double h, double phi, double kappa) {
	if (!(phi > 0.0) || !(kappa > 0.0)) {
		throw ConfigError("Matern range and smoothness must be positive");
	}
	if (h <= 0.0) return 1.0;
	const double x = h / phi;
	if (kappa == 1.5) return (1.0 + x) * std::exp(-x);
	if (kappa == 0.5) return std::exp(-x);
	if (x > 700.0) return 0.0;
	return std::pow(2.0, 1.0 - kappa) / std::tgamma(kappa) * std::pow(x, kappa) *
	       boost::math::cyl_bessel_k(kappa, x);
}

Eigen::MatrixXd matern_matrix(const Eigen::MatrixXd& distances, double phi, double kappa) {
	Eigen::MatrixXd m(distances.rows(), distances.cols());
	for (Eigen::Index i = 0; i < m.rows(); ++i) {
		for (Eigen::Index j = 0; j < m.cols(); ++j) {
			m(i, j) = matern_correlation(distances(i, j), phi, kappa);
		}
	}
	return m;
}

double fit_matern(const Eigen::MatrixXd& corr, const Eigen::MatrixXd& distances, double kappa) {
	const Eigen::Index d = distances.rows();
	if (distances.cols() != d || corr.rows() != d || corr.cols() != d) {
		throw ConfigError("Matern fit: matrix dimensions disagree");
	}
	if (!distances.isApprox(distances.transpose()) || distances.diagonal().cwiseAbs().maxCoeff() > 0.0) {
		throw ConfigError("Matern fit: distances must be symmetric with zero diagonal");
	}
	double h_min = kInf;
	double h_max = 0.0;
	for (Eigen::Index i = 0; i < d; ++i) {
		for (Eigen::Index j = i + 1; j < d; ++j) {
			if (distances(i, j) > 0.0) {
				h_min = std::min(h_min, distances(i, j));
				h_max = std::max(h_max, distances(i, j));
			}
		}
	}
	if (!(h_max > 0.0)) {
		throw DataError("Matern fit: all distances are zero");
	}
	auto loss = [&](double log_phi) {
		const double phi = std::exp(log_phi);
		double s = 0.0;
		for (Eigen::Index i = 0; i < d; ++i) {
			for (Eigen::Index j = i + 1; j < d; ++j) {
				const double e = corr(i, j) - matern_correlation(distances(i, j), phi, kappa);
				s += e * e;
			}
		}
		return s;
	};
	const double lo = std::log(h_min / 100.0);
	const double hi = std::log(h_max * 100.0);
	constexpr int grid = 200;
	int best_k = 0;
	double best = kInf;
	for (int k = 0; k <= grid; ++k) {
		const double v = loss(lo + (hi - lo) * k / grid);
		if (v < best) {
			best = v;
			best_k = k;
		}
	}
	const double a = lo + (hi - lo) * std::max(best_k - 1, 0) / grid;
	const double b = lo + (hi - lo) * std::min(best_k + 1, grid) / grid;
	const auto [arg, val] = boost::math::tools::brent_find_minima(loss, a, b, 52);
	return std::exp(arg);
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
	constexpr double earth_radius_km = 6371.0;
	constexpr double rad = std::numbers::pi / 180.0;
	const double dlat = (lat2 - lat1) * rad;
	const double dlon = (lon2 - lon1) * rad;
	const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
	                 std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlon / 2) *
	                     std::sin(dlon / 2);
	return 2.0 * earth_radius_km * std::asin(std::min(1.0, std::sqrt(a)));
}

Eigen::MatrixXd distance_matrix(const GridMeta& meta, std::span<const int> ids) {
	const auto d = static_cast<Eigen::Index>(ids.size());
	Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
	for (Eigen::Index i = 0; i < d; ++i) {
		for (Eigen::Index j = i + 1; j < d; ++j) {
			const auto& p = meta.points.at(static_cast<std::size_t>(ids[i]));
			const auto& q = meta.points.at(static_cast<std::size_t>(ids[j]));
			out(i, j) = out(j, i) = haversine_km(p.lat, p.lon, q.lat, q.lon);
		}
	}
	return out;
}

namespace {

struct ImpliedFit {
	CpToDpResult cp;
	double mse1 = kInf;
	double mse2 = kInf;
};

ImpliedFit fit_with_kurtosis(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& g1,
                             const Eigen::VectorXd& g2, double gamma2m,
                             const CpToDpOptions& opts) {
	SkewTParamsCP cp;
	cp.mu = Eigen::VectorXd::Zero(sigma.rows());
	cp.sigma = sigma;
	cp.gamma1 = g1;
	cp.gamma2m = gamma2m;
	ImpliedFit f;
	f.cp = cp_to_dp(cp, opts);
	const double nu = f.cp.dp.nu;
	double s1 = 0.0;
	double s2 = 0.0;
	for (Eigen::Index i = 0; i < g1.size(); ++i) {
		const double e1 = st_skewness(f.cp.delta[i], nu) - g1[i];
		const double e2 = st_excess_kurtosis(f.cp.delta[i], nu) - g2[i];
		s1 += e1 * e1;
		s2 += e2 * e2;
	}
	f.mse1 = s1 / static_cast<double>(g1.size());
	f.mse2 = s2 / static_cast<double>(g1.size());
	return f;
}

}  // namespace

RegionSkewT fit_region(int id, const Eigen::MatrixXd& residuals, std::span<const int> members,
                       const GridMeta& meta, const RegionFitOptions& opts) {
	const auto d = residuals.cols();
	if (d < 2) {
		throw DataError("region " + std::to_string(id) + " has fewer than 2 gridpoints");
	}
	if (static_cast<Eigen::Index>(members.size()) != d) {
		throw ConfigError("region member list does not match the residual columns");
	}
	RegionSkewT region;
	region.id = id;
	region.members.assign(members.begin(), members.end());
	region.matern_kappa = opts.kappa;

	const Eigen::MatrixXd cov = stats::covariance(residuals);
	region.residual_sd = cov.diagonal().cwiseSqrt();
	const Eigen::MatrixXd corr = to_correlation(cov);
	region.matern_phi = fit_matern(corr, distance_matrix(meta, members), opts.kappa);
	const Eigen::MatrixXd sigma =
	    matern_matrix(distance_matrix(meta, members), region.matern_phi, opts.kappa);

	region.sample_gamma1 = stats::column_skewness(residuals);
	region.sample_gamma2 = stats::column_excess_kurtosis(residuals);
	const double g2m_sample = stats::mardia_kurtosis(residuals);

	ImpliedFit fit =
	    fit_with_kurtosis(sigma, region.sample_gamma1, region.sample_gamma2, g2m_sample, opts.cp);
	double g2m_used = g2m_sample;
	bool replaced = false;

	if (fit.mse1 > opts.gamma1_mse_threshold) {
		// Replace the sample Mardia kurtosis by the value whose implied
		// marginals best match the sample skewness and kurtosis.
		auto objective = [&](double log_g) {
			try {
				const auto f = fit_with_kurtosis(sigma, region.sample_gamma1, region.sample_gamma2,
				                                 std::exp(log_g), opts.cp);
				return f.mse1 + f.mse2;
			} catch (const Error&) {
				return kInf;
			}
		};
		const double lo = std::log(1e-3);
		const double hi = std::log(std::max(20.0, 4.0 * std::abs(g2m_sample)));
		constexpr int grid = 30;
		int best_k = -1;
		double best = fit.mse1 + fit.mse2;
		for (int k = 0; k <= grid; ++k) {
			const double v = objective(lo + (hi - lo) * k / grid);
			if (v < best) {
				best = v;
				best_k = k;
			}
		}
		if (best_k >= 0) {
			const double a = lo + (hi - lo) * std::max(best_k - 1, 0) / grid;
			const double b = lo + (hi - lo) * std::min(best_k + 1, grid) / grid;
			const auto [arg, val] = boost::math::tools::brent_find_minima(objective, a, b, 30);
			g2m_used = std::exp(val <= best ? arg : lo + (hi - lo) * best_k / grid);
			fit = fit_with_kurtosis(sigma, region.sample_gamma1, region.sample_gamma2, g2m_used,
			                        opts.cp);
			replaced = true;
		}
	}

	region.dp = fit.cp.dp;
	region.diagnostics.cp_distance = fit.cp.distance;
	region.diagnostics.converged = fit.cp.converged;
	region.diagnostics.mse_gamma1 = fit.mse1;
	region.diagnostics.mse_gamma2 = fit.mse2;
	region.diagnostics.gamma2m_sample = g2m_sample;
	region.diagnostics.gamma2m_used = g2m_used;
	region.diagnostics.gamma2m_replaced = replaced;
	return region;
}

}  // namespace windgen
