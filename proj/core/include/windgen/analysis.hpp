#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "windgen/grid_data.hpp"

namespace windgen {

/// Biased sample autocorrelation at lags 0..max_lag; max_lag < T/2.
std::vector<double> acf(std::span<const double> x, int max_lag);

struct AcfEnvelope {
	std::vector<double> mean;
	std::vector<double> min;
	std::vector<double> max;
};

/// Per-lag mean, minimum and maximum of the realizations' ACFs at one point.
AcfEnvelope ensemble_acf(const EnsembleSeries& series, int point, int max_lag);

/// 0.5%, 1%, ..., 99.5%.
std::vector<double> default_qq_probs();

struct QqPair {
	double prob;
	double ref_q;
	double sim_q;
};

/// Empirical quantiles per realization, averaged within each ensemble.
std::vector<QqPair> qq_table(const EnsembleSeries& ref, const EnsembleSeries& sim, int point,
                             std::span<const double> probs);

enum class Side { Above, Below };

Side parse_side(const std::string& name);
std::string side_name(Side s);

struct ExcursionHistogram {
	/// Duration (days) -> number of complete runs.
	std::map<int, long> counts;
	/// Runs touching either end of a series; excluded from `counts`.
	long censored_runs = 0;
	long censored_days = 0;

	long total_runs() const;
	double mean_duration() const;
};

/// Maximal runs strictly above (below) the threshold.
ExcursionHistogram excursions(std::span<const double> x, double threshold, Side side);
/// Sum of the per-realization histograms at one point.
ExcursionHistogram excursions(const EnsembleSeries& series, int point, double threshold,
                              Side side);

enum class NegativeSpeedPolicy { ClampZero };

struct WpdConfig {
	double rho = 1.225;        // kg/m^3
	double hub_height = 80.0;  // m
	double ref_height = 10.0;  // m
	double exponent = 1.0 / 7.0;
	NegativeSpeedPolicy negative_policy = NegativeSpeedPolicy::ClampZero;

	void validate() const;
	/// (hub_height / ref_height)^exponent.
	double extrapolation_factor() const;
};

/// 0.5 rho w_hub^3 with w_hub = max(w, 0) (z / z_r)^a, in W/m^2.
double wind_power_density(double w, const WpdConfig& cfg);
EnsembleSeries wpd_daily(const EnsembleSeries& series, const WpdConfig& cfg);

/// Set of day-of-year ranges (inclusive) on the 365-day calendar.
struct SeasonDef {
	std::string name;
	std::vector<std::pair<int, int>> ranges;

	int n_days() const;
	bool contains(int day_of_year) const;
	void validate() const;

	static SeasonDef mam();
	static SeasonDef jja();
	static SeasonDef son();
	/// January, February and December of the same calendar year.
	static SeasonDef djf();
	static SeasonDef by_name(const std::string& name);
};

/// Inclusive range of calendar years.
struct YearWindow {
	int first_year;
	int last_year;

	int n_years() const noexcept { return last_year - first_year + 1; }
};

struct Summary {
	double median = 0.0;
	double min = 0.0;
	double max = 0.0;
	double q05 = 0.0;
	double q95 = 0.0;
};

Summary summarize(std::vector<double> values);

struct PointSeasonalStats {
	/// [realization][year] seasonal mean.
	std::vector<std::vector<double>> yearly_means;
	/// Per realization: across-year SD (n-1), mean, 5% and 95% quantiles.
	std::vector<double> sd;
	std::vector<double> mean;
	std::vector<double> q05;
	std::vector<double> q95;
	/// Across-realization summaries.
	Summary sd_summary;
	Summary mean_summary;
};

/// Seasonal means per year, their spread across the window's years, and the
/// spread of that across realizations; one entry per gridpoint.
std::vector<PointSeasonalStats> seasonal_wpd_stats(const EnsembleSeries& wpd,
                                                   const SeasonDef& season, YearWindow window);

}  // namespace windgen
