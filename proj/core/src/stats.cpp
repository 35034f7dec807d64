#include "windgen/stats.hpp"

#include <algorithm>
#include <cmath>

#include "windgen/errors.hpp"

namespace windgen::stats {

double mean(std::span<const double> x) {
	if (x.empty()) {
		throw DataError("mean of empty sample");
	}
	double s = 0.0;
	for (double v : x) s += v;
	return s / static_cast<double>(x.size());
}

namespace {

struct CentralMoments {
	double m2 = 0.0;
	double m3 = 0.0;
	double m4 = 0.0;
};

CentralMoments central_moments(std::span<const double> x) {
	const double mu = mean(x);
	CentralMoments m;
	for (double v : x) {
		const double c = v - mu;
		const double c2 = c * c;
		m.m2 += c2;
		m.m3 += c2 * c;
		m.m4 += c2 * c2;
	}
	const double n = static_cast<double>(x.size());
	m.m2 /= n;
	m.m3 /= n;
	m.m4 /= n;
	if (!(m.m2 > 0.0)) {
		throw DataError("sample has zero variance");
	}
	return m;
}

}  // namespace

double skewness(std::span<const double> x) {
	const auto m = central_moments(x);
	return m.m3 / std::pow(m.m2, 1.5);
}

double excess_kurtosis(std::span<const double> x) {
	const auto m = central_moments(x);
	return m.m4 / (m.m2 * m.m2) - 3.0;
}

Eigen::VectorXd column_skewness(const Eigen::MatrixXd& x) {
	Eigen::VectorXd out(x.cols());
	std::vector<double> col(static_cast<std::size_t>(x.rows()));
	for (Eigen::Index j = 0; j < x.cols(); ++j) {
		Eigen::Map<Eigen::VectorXd>(col.data(), x.rows()) = x.col(j);
		out[j] = skewness(col);
	}
	return out;
}

Eigen::VectorXd column_excess_kurtosis(const Eigen::MatrixXd& x) {
	Eigen::VectorXd out(x.cols());
	std::vector<double> col(static_cast<std::size_t>(x.rows()));
	for (Eigen::Index j = 0; j < x.cols(); ++j) {
		Eigen::Map<Eigen::VectorXd>(col.data(), x.rows()) = x.col(j);
		out[j] = excess_kurtosis(col);
	}
	return out;
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x) {
	if (x.rows() == 0) {
		throw DataError("covariance of empty sample");
	}
	const Eigen::RowVectorXd mu = x.colwise().mean();
	const Eigen::MatrixXd c = x.rowwise() - mu;
	return (c.transpose() * c) / static_cast<double>(x.rows());
}

Eigen::MatrixXd correlation(const Eigen::MatrixXd& x) {
	Eigen::MatrixXd s = covariance(x);
	const Eigen::VectorXd sd = s.diagonal().cwiseSqrt();
	if ((sd.array() <= 0.0).any()) {
		throw DataError("correlation of a constant column");
	}
	Eigen::MatrixXd r = sd.cwiseInverse().asDiagonal() * s * sd.cwiseInverse().asDiagonal();
	r.diagonal().setOnes();
	return r;
}

double mardia_kurtosis(const Eigen::MatrixXd& x) {
	const double d = static_cast<double>(x.cols());
	const Eigen::RowVectorXd mu = x.colwise().mean();
	const Eigen::MatrixXd c = x.rowwise() - mu;
	const Eigen::MatrixXd s = (c.transpose() * c) / static_cast<double>(x.rows());
	Eigen::LLT<Eigen::MatrixXd> llt(s);
	if (llt.info() != Eigen::Success) {
		throw NumericalError("sample covariance is not positive definite");
	}
	// Rows of L^{-1} c^T give whitened observations.
	const Eigen::MatrixXd w = llt.matrixL().solve(c.transpose());
	const Eigen::VectorXd m = w.colwise().squaredNorm().transpose();
	return m.array().square().mean() - d * (d + 2.0);
}

double quantile_sorted(std::span<const double> sorted, double p) {
	if (sorted.empty()) {
		throw DataError("quantile of empty sample");
	}
	if (p <= 0.0) return sorted.front();
	if (p >= 1.0) return sorted.back();
	const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
	const auto lo = static_cast<std::size_t>(std::floor(h));
	const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
	return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> quantiles(std::vector<double> x, std::span<const double> probs) {
	std::sort(x.begin(), x.end());
	std::vector<double> out;
	out.reserve(probs.size());
	for (double p : probs) {
		out.push_back(quantile_sorted(x, p));
	}
	return out;
}

double median(std::vector<double> x) {
	const double p = 0.5;
	return quantiles(std::move(x), std::span<const double>(&p, 1)).front();
}

}  // namespace windgen::stats
