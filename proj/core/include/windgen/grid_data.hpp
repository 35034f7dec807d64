#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace windgen {

inline constexpr int days_per_year = 365;

struct GridPoint {
	int id = 0;
	double lat = 0.0;   // degrees
	double lon = 0.0;   // degrees
	double elev = 0.0;  // meters, carried as metadata only
};

enum class Direction { North, South, East, West };

Direction opposite(Direction d) noexcept;
char direction_code(Direction d) noexcept;

struct Neighbor {
	Direction dir;
	int id;

	friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

using NeighborMap = std::vector<std::vector<Neighbor>>;

/// Links points lying exactly one lattice step apart along a single axis.
/// Neighbors of each point are ordered N, S, E, W.
NeighborMap build_neighbors(std::span<const GridPoint> points, double spacing,
                            double tol);

/// Spatial support of a gridded ensemble.
///
/// Points may be an irregular subset of a regular lat/lon lattice; the
/// neighbor topology is recovered from coordinates rather than indices.
struct GridMeta {
	std::vector<GridPoint> points;
	double grid_spacing = 1.0;
	NeighborMap neighbors;

	std::size_t size() const noexcept { return points.size(); }

	/// Builds the neighbor map and checks every invariant.
	static GridMeta from_points(std::vector<GridPoint> points, double spacing,
	                            double tol = -1.0);

	/// Throws DataError if ids are not 0..N-1 or the neighbor map is not
	/// symmetric.
	void validate() const;
};

/// Smallest positive coordinate step found along either axis.
double infer_spacing(std::span<const GridPoint> points);

/// Regular nx-by-ny lattice; ids run west to east, then south to north.
GridMeta make_lattice(int nx, int ny, double lat0, double lon0,
                      double spacing);

/// 365-day calendar without leap years.
struct Calendar365 {
	int start_year = 1;
	int n_years = 0;

	int days() const noexcept { return days_per_year * n_years; }

	/// 1-based day of year of global 0-based day index t.
	static int day_of_year(std::size_t t) noexcept {
		return static_cast<int>(t % days_per_year) + 1;
	}
	/// 0-based year offset of global day index t.
	static int year_index(std::size_t t) noexcept {
		return static_cast<int>(t / days_per_year);
	}

	friend bool operator==(const Calendar365&, const Calendar365&) = default;
};

enum class Scale { Raw, Standardized };

/// R x T x N array of daily values, point index fastest.
class EnsembleSeries {
public:
	EnsembleSeries() = default;
	EnsembleSeries(std::shared_ptr<const GridMeta> meta, Calendar365 calendar,
	               int n_realizations, Scale scale = Scale::Raw);

	const GridMeta& meta() const { return *meta_; }
	const std::shared_ptr<const GridMeta>& meta_ptr() const { return meta_; }
	const Calendar365& calendar() const noexcept { return calendar_; }
	int n_realizations() const noexcept { return n_realizations_; }
	int n_days() const noexcept { return calendar_.days(); }
	int n_points() const noexcept { return n_points_; }
	Scale scale() const noexcept { return scale_; }
	void set_scale(Scale s) noexcept { scale_ = s; }

	double& at(int r, int t, int i) { return values_[index(r, t, i)]; }
	double at(int r, int t, int i) const { return values_[index(r, t, i)]; }

	/// All N values of realization r on day t.
	std::span<double> day(int r, int t) {
		return {values_.data() + index(r, t, 0), static_cast<std::size_t>(n_points_)};
	}
	std::span<const double> day(int r, int t) const {
		return {values_.data() + index(r, t, 0), static_cast<std::size_t>(n_points_)};
	}

	/// Copy of the time series of point i in realization r.
	std::vector<double> point_series(int r, int i) const;

	std::span<const double> values() const noexcept { return values_; }
	std::span<double> values() noexcept { return values_; }

	/// New series holding the listed realizations, in the given order.
	EnsembleSeries select_realizations(std::span<const int> members) const;

private:
	std::size_t index(int r, int t, int i) const noexcept {
		return (static_cast<std::size_t>(r) * static_cast<std::size_t>(calendar_.days()) +
		        static_cast<std::size_t>(t)) * static_cast<std::size_t>(n_points_) +
		       static_cast<std::size_t>(i);
	}

	std::shared_ptr<const GridMeta> meta_;
	Calendar365 calendar_;
	int n_realizations_ = 0;
	int n_points_ = 0;
	Scale scale_ = Scale::Raw;
	std::vector<double> values_;
};

struct LoadOptions {
	int start_year = 1;
	/// Simulated series may legitimately contain negative speeds.
	bool allow_negative = false;
	/// Grid spacing in degrees; inferred from coordinates when <= 0.
	double spacing = 0.0;
};

GridMeta load_grid(const std::filesystem::path& path, double spacing = 0.0);
void save_grid(const std::filesystem::path& path, const GridMeta& meta);

/// Reads `series.csv` (realization,t,point_id,value) against `grid.csv`.
EnsembleSeries load_series(const std::filesystem::path& path,
                           const std::filesystem::path& meta_path,
                           const LoadOptions& opts = {});
EnsembleSeries load_series(const std::filesystem::path& path,
                           std::shared_ptr<const GridMeta> meta,
                           const LoadOptions& opts = {});
void save_series(const std::filesystem::path& path, const EnsembleSeries& series);

/// Shortest decimal text with 9 significant digits.
std::string format_value(double v);

}  // namespace windgen
