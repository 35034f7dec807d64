#include "windgen/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "windgen/errors.hpp"
#include "windgen/stats.hpp"

namespace windgen {

std::vector<double> acf(std::span<const double> x, int max_lag) {
	const auto n = static_cast<int>(x.size());
	if (max_lag < 0 || 2 * max_lag >= n) {
		throw ConfigError("ACF lag " + std::to_string(max_lag) + " must be below T/2 = " +
		                  std::to_string(n / 2.0));
	}
	const double mu = stats::mean(x);
	double c0 = 0.0;
	for (double v : x) c0 += (v - mu) * (v - mu);
	if (!(c0 > 0.0)) {
		throw DataError("ACF of a constant series");
	}
	std::vector<double> out(static_cast<std::size_t>(max_lag) + 1);
	out[0] = 1.0;
	for (int k = 1; k <= max_lag; ++k) {
		double c = 0.0;
		for (int t = 0; t + k < n; ++t) c += (x[t] - mu) * (x[t + k] - mu);
		out[k] = c / c0;
	}
	return out;
}

namespace {

void check_point(const EnsembleSeries& s, int point) {
	if (point < 0 || point >= s.n_points()) {
		throw ConfigError("point " + std::to_string(point) + " is not on the grid");
	}
}

}  // namespace

AcfEnvelope ensemble_acf(const EnsembleSeries& series, int point, int max_lag) {
	check_point(series, point);
	if (series.n_realizations() < 1) {
		throw DataError("ensemble ACF needs at least one realization");
	}
	AcfEnvelope env;
	const auto len = static_cast<std::size_t>(max_lag) + 1;
	env.mean.assign(len, 0.0);
	env.min.assign(len, std::numeric_limits<double>::infinity());
	env.max.assign(len, -std::numeric_limits<double>::infinity());
	for (int r = 0; r < series.n_realizations(); ++r) {
		const auto a = acf(series.point_series(r, point), max_lag);
		for (std::size_t k = 0; k < len; ++k) {
			env.mean[k] += a[k];
			env.min[k] = std::min(env.min[k], a[k]);
			env.max[k] = std::max(env.max[k], a[k]);
		}
	}
	for (double& v : env.mean) v /= series.n_realizations();
	return env;
}

std::vector<double> default_qq_probs() {
	std::vector<double> p;
	for (int k = 1; k <= 199; ++k) p.push_back(0.005 * k);
	return p;
}

namespace {

std::vector<double> mean_quantiles(const EnsembleSeries& s, int point,
                                   std::span<const double> probs) {
	check_point(s, point);
	if (s.n_realizations() < 1 || s.n_days() < 1) {
		throw DataError("quantiles of an empty ensemble");
	}
	std::vector<double> acc(probs.size(), 0.0);
	for (int r = 0; r < s.n_realizations(); ++r) {
		const auto q = stats::quantiles(s.point_series(r, point), probs);
		for (std::size_t k = 0; k < q.size(); ++k) acc[k] += q[k];
	}
	for (double& v : acc) v /= s.n_realizations();
	return acc;
}

}  // namespace

std::vector<QqPair> qq_table(const EnsembleSeries& ref, const EnsembleSeries& sim, int point,
                             std::span<const double> probs) {
	const auto rq = mean_quantiles(ref, point, probs);
	const auto sq = mean_quantiles(sim, point, probs);
	std::vector<QqPair> out;
	out.reserve(probs.size());
	for (std::size_t k = 0; k < probs.size(); ++k) out.push_back({probs[k], rq[k], sq[k]});
	return out;
}

Side parse_side(const std::string& name) {
	if (name == "above") return Side::Above;
	if (name == "below") return Side::Below;
	throw ConfigError("excursion side must be 'above' or 'below'");
}

std::string side_name(Side s) { return s == Side::Above ? "above" : "below"; }

long ExcursionHistogram::total_runs() const {
	long n = 0;
	for (const auto& [len, count] : counts) n += count;
	return n;
}

double ExcursionHistogram::mean_duration() const {
	long runs = 0;
	long days = 0;
	for (const auto& [len, count] : counts) {
		runs += count;
		days += static_cast<long>(len) * count;
	}
	return runs > 0 ? static_cast<double>(days) / static_cast<double>(runs) : 0.0;
}

ExcursionHistogram excursions(std::span<const double> x, double threshold, Side side) {
	if (!std::isfinite(threshold)) {
		throw ConfigError("excursion threshold must be finite");
	}
	ExcursionHistogram h;
	const auto n = x.size();
	auto on_side = [&](double v) { return side == Side::Above ? v > threshold : v < threshold; };
	std::size_t t = 0;
	while (t < n) {
		if (!on_side(x[t])) {
			++t;
			continue;
		}
		const std::size_t start = t;
		while (t < n && on_side(x[t])) ++t;
		const auto len = static_cast<long>(t - start);
		if (start == 0 || t == n) {
			++h.censored_runs;
			h.censored_days += len;
		} else {
			++h.counts[static_cast<int>(len)];
		}
	}
	return h;
}

ExcursionHistogram excursions(const EnsembleSeries& series, int point, double threshold,
                              Side side) {
	check_point(series, point);
	ExcursionHistogram total;
	for (int r = 0; r < series.n_realizations(); ++r) {
		const auto h = excursions(series.point_series(r, point), threshold, side);
		for (const auto& [len, count] : h.counts) total.counts[len] += count;
		total.censored_runs += h.censored_runs;
		total.censored_days += h.censored_days;
	}
	return total;
}

void WpdConfig::validate() const {
	if (!(hub_height > 0.0) || !(ref_height > 0.0)) {
		throw ConfigError("WPD heights must be positive");
	}
	if (!(exponent > 0.0)) {
		throw ConfigError("power-law exponent must be positive");
	}
	if (!(rho > 0.0)) {
		throw ConfigError("air density must be positive");
	}
}

double WpdConfig::extrapolation_factor() const { return std::pow(hub_height / ref_height, exponent); }

double wind_power_density(double w, const WpdConfig& cfg) {
	const double hub = std::max(w, 0.0) * cfg.extrapolation_factor();
	return 0.5 * cfg.rho * hub * hub * hub;
}

EnsembleSeries wpd_daily(const EnsembleSeries& series, const WpdConfig& cfg) {
	cfg.validate();
	if (series.scale() != Scale::Raw) {
		throw ConfigError("WPD needs a raw (m/s) series");
	}
	EnsembleSeries out = series;
	const double factor = cfg.extrapolation_factor();
	for (double& v : out.values()) {
		const double hub = std::max(v, 0.0) * factor;
		v = 0.5 * cfg.rho * hub * hub * hub;
	}
	return out;
}

int SeasonDef::n_days() const {
	int n = 0;
	for (const auto& [a, b] : ranges) n += b - a + 1;
	return n;
}

bool SeasonDef::contains(int day_of_year) const {
	return std::any_of(ranges.begin(), ranges.end(), [&](const auto& r) {
		return day_of_year >= r.first && day_of_year <= r.second;
	});
}

void SeasonDef::validate() const {
	if (ranges.empty()) {
		throw ConfigError("season '" + name + "' has no day ranges");
	}
	for (std::size_t k = 0; k < ranges.size(); ++k) {
		const auto [a, b] = ranges[k];
		if (a < 1 || b > days_per_year || a > b) {
			throw ConfigError("season '" + name + "' has an invalid day range");
		}
		for (std::size_t j = 0; j < k; ++j) {
			if (a <= ranges[j].second && ranges[j].first <= b) {
				throw ConfigError("season '" + name + "' has overlapping day ranges");
			}
		}
	}
}

SeasonDef SeasonDef::mam() { return {"MAM", {{60, 151}}}; }
SeasonDef SeasonDef::jja() { return {"JJA", {{152, 243}}}; }
SeasonDef SeasonDef::son() { return {"SON", {{244, 334}}}; }
SeasonDef SeasonDef::djf() { return {"DJF", {{1, 59}, {335, 365}}}; }

SeasonDef SeasonDef::by_name(const std::string& name) {
	if (name == "MAM") return mam();
	if (name == "JJA") return jja();
	if (name == "SON") return son();
	if (name == "DJF") return djf();
	throw ConfigError("unknown season '" + name + "'");
}

Summary summarize(std::vector<double> values) {
	if (values.empty()) {
		throw DataError("summary of an empty sample");
	}
	static constexpr double probs[] = {0.0, 0.05, 0.5, 0.95, 1.0};
	const auto q = stats::quantiles(std::move(values), probs);
	return {q[2], q[0], q[4], q[1], q[3]};
}

std::vector<PointSeasonalStats> seasonal_wpd_stats(const EnsembleSeries& wpd,
                                                   const SeasonDef& season, YearWindow window) {
	season.validate();
	const auto& cal = wpd.calendar();
	if (window.first_year < cal.start_year ||
	    window.last_year > cal.start_year + cal.n_years - 1 || window.n_years() < 1) {
		throw ConfigError("year window " + std::to_string(window.first_year) + "-" +
		                  std::to_string(window.last_year) + " lies outside the calendar");
	}
	if (window.n_years() < 2) {
		throw ConfigError("across-year SD needs a window of at least 2 years");
	}
	if (wpd.n_realizations() < 1) {
		throw DataError("seasonal statistics need at least one realization");
	}
	const int first = window.first_year - cal.start_year;
	const int n_years = window.n_years();
	const int n_season = season.n_days();
	std::vector<int> season_days;
	for (int d = 1; d <= days_per_year; ++d) {
		if (season.contains(d)) season_days.push_back(d - 1);
	}

	std::vector<PointSeasonalStats> out(static_cast<std::size_t>(wpd.n_points()));
	for (int i = 0; i < wpd.n_points(); ++i) {
		auto& ps = out[i];
		for (int r = 0; r < wpd.n_realizations(); ++r) {
			std::vector<double> means(static_cast<std::size_t>(n_years));
			for (int y = 0; y < n_years; ++y) {
				double s = 0.0;
				const int base = (first + y) * days_per_year;
				for (int d : season_days) s += wpd.at(r, base + d, i);
				means[y] = s / n_season;
			}
			const double mu = stats::mean(means);
			double ss = 0.0;
			for (double m : means) ss += (m - mu) * (m - mu);
			ps.sd.push_back(std::sqrt(ss / (n_years - 1)));
			ps.mean.push_back(mu);
			static constexpr double tails[] = {0.05, 0.95};
			const auto q = stats::quantiles(means, tails);
			ps.q05.push_back(q[0]);
			ps.q95.push_back(q[1]);
			ps.yearly_means.push_back(std::move(means));
		}
		ps.sd_summary = summarize(ps.sd);
		ps.mean_summary = summarize(ps.mean);
	}
	return out;
}

}  // namespace windgen
