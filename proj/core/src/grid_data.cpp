#include "windgen/grid_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

#include "windgen/errors.hpp"

namespace windgen {

Direction opposite(Direction d) noexcept {
	switch (d) {
	case Direction::North: return Direction::South;
	case Direction::South: return Direction::North;
	case Direction::East: return Direction::West;
	case Direction::West: return Direction::East;
	}
	return d;
}

char direction_code(Direction d) noexcept {
	switch (d) {
	case Direction::North: return 'N';
	case Direction::South: return 'S';
	case Direction::East: return 'E';
	case Direction::West: return 'W';
	}
	return '?';
}

NeighborMap build_neighbors(std::span<const GridPoint> points, double spacing,
                            double tol) {
	if (!(spacing > 0.0)) {
		throw ConfigError("grid spacing must be positive");
	}
	if (!(tol >= 0.0) || tol >= spacing / 2) {
		throw ConfigError("neighbor tolerance must lie in [0, spacing/2)");
	}
	const std::size_t n = points.size();
	NeighborMap out(n);
	if (n == 0) {
		return out;
	}
	double lat0 = points[0].lat;
	double lon0 = points[0].lon;
	for (const auto& p : points) {
		lat0 = std::min(lat0, p.lat);
		lon0 = std::min(lon0, p.lon);
	}
	// Bucket by nearest lattice node; an off-lattice point still lands in a
	// bucket and is checked against the tolerance below.
	std::map<std::pair<long, long>, std::size_t> cell;
	auto key_of = [&](double lat, double lon) {
		return std::pair<long, long>{std::lround((lat - lat0) / spacing),
		                             std::lround((lon - lon0) / spacing)};
	};
	for (std::size_t k = 0; k < n; ++k) {
		auto [it, inserted] = cell.emplace(key_of(points[k].lat, points[k].lon), k);
		if (!inserted) {
			const auto& q = points[it->second];
			if (std::abs(q.lat - points[k].lat) <= tol &&
			    std::abs(q.lon - points[k].lon) <= tol) {
				throw DataError("duplicate coordinates for points " +
				                std::to_string(q.id) + " and " +
				                std::to_string(points[k].id));
			}
			throw DataError("points " + std::to_string(q.id) + " and " +
			                std::to_string(points[k].id) +
			                " map to the same lattice node");
		}
	}
	struct Step {
		Direction dir;
		long dlat;
		long dlon;
	};
	constexpr Step steps[] = {{Direction::North, 1, 0},
	                          {Direction::South, -1, 0},
	                          {Direction::East, 0, 1},
	                          {Direction::West, 0, -1}};
	for (std::size_t k = 0; k < n; ++k) {
		const auto key = key_of(points[k].lat, points[k].lon);
		for (const auto& s : steps) {
			auto it = cell.find({key.first + s.dlat, key.second + s.dlon});
			if (it == cell.end()) {
				continue;
			}
			const auto& q = points[it->second];
			const double dlat = q.lat - points[k].lat;
			const double dlon = q.lon - points[k].lon;
			if (std::abs(std::abs(dlat) - spacing * std::abs(s.dlat)) <= tol &&
			    std::abs(std::abs(dlon) - spacing * std::abs(s.dlon)) <= tol) {
				out[k].push_back({s.dir, static_cast<int>(it->second)});
			}
		}
	}
	return out;
}

GridMeta GridMeta::from_points(std::vector<GridPoint> points, double spacing,
                               double tol) {
	GridMeta meta;
	if (spacing <= 0.0) {
		spacing = infer_spacing(points);
	}
	if (tol < 0.0) {
		tol = 0.01 * spacing;
	}
	std::sort(points.begin(), points.end(),
	          [](const GridPoint& a, const GridPoint& b) { return a.id < b.id; });
	meta.points = std::move(points);
	meta.grid_spacing = spacing;
	meta.neighbors = build_neighbors(meta.points, spacing, tol);
	meta.validate();
	return meta;
}

void GridMeta::validate() const {
	const int n = static_cast<int>(points.size());
	for (int k = 0; k < n; ++k) {
		if (points[k].id != k) {
			throw DataError("grid ids must be 0..N-1 without gaps or duplicates");
		}
	}
	if (neighbors.size() != points.size()) {
		throw DataError("neighbor map size does not match point count");
	}
	for (int k = 0; k < n; ++k) {
		if (neighbors[k].size() > 4) {
			throw DataError("point " + std::to_string(k) + " has more than 4 neighbors");
		}
		for (const auto& nb : neighbors[k]) {
			if (nb.id < 0 || nb.id >= n || nb.id == k) {
				throw DataError("invalid neighbor id for point " + std::to_string(k));
			}
			const auto& back = neighbors[nb.id];
			const Neighbor mirror{opposite(nb.dir), k};
			if (std::find(back.begin(), back.end(), mirror) == back.end()) {
				throw DataError("neighbor relation between " + std::to_string(k) +
				                " and " + std::to_string(nb.id) + " is not symmetric");
			}
		}
	}
}

double infer_spacing(std::span<const GridPoint> points) {
	auto min_step = [&](auto coord) {
		std::vector<double> v;
		for (const auto& p : points) {
			v.push_back(coord(p));
		}
		std::sort(v.begin(), v.end());
		double best = 0.0;
		for (std::size_t k = 1; k < v.size(); ++k) {
			const double d = v[k] - v[k - 1];
			if (d > 1e-9 && (best == 0.0 || d < best)) {
				best = d;
			}
		}
		return best;
	};
	const double a = min_step([](const GridPoint& p) { return p.lat; });
	const double b = min_step([](const GridPoint& p) { return p.lon; });
	if (a == 0.0 && b == 0.0) {
		return 1.0;
	}
	if (a == 0.0) return b;
	if (b == 0.0) return a;
	return std::min(a, b);
}

GridMeta make_lattice(int nx, int ny, double lat0, double lon0, double spacing) {
	std::vector<GridPoint> pts;
	pts.reserve(static_cast<std::size_t>(nx) * ny);
	for (int row = 0; row < ny; ++row) {
		for (int col = 0; col < nx; ++col) {
			pts.push_back({row * nx + col, lat0 + row * spacing, lon0 + col * spacing, 0.0});
		}
	}
	return GridMeta::from_points(std::move(pts), spacing);
}

EnsembleSeries::EnsembleSeries(std::shared_ptr<const GridMeta> meta,
                               Calendar365 calendar, int n_realizations,
                               Scale scale)
    : meta_(std::move(meta)),
      calendar_(calendar),
      n_realizations_(n_realizations),
      n_points_(static_cast<int>(meta_->size())),
      scale_(scale),
      values_(static_cast<std::size_t>(n_realizations) * calendar.days() *
                  meta_->size(),
              0.0) {
	if (n_realizations < 0 || calendar.n_years < 0) {
		throw ConfigError("negative ensemble dimensions");
	}
}

std::vector<double> EnsembleSeries::point_series(int r, int i) const {
	std::vector<double> out(static_cast<std::size_t>(n_days()));
	for (int t = 0; t < n_days(); ++t) {
		out[t] = at(r, t, i);
	}
	return out;
}

EnsembleSeries EnsembleSeries::select_realizations(std::span<const int> members) const {
	EnsembleSeries out(meta_, calendar_, static_cast<int>(members.size()), scale_);
	const std::size_t block = static_cast<std::size_t>(n_days()) * n_points_;
	for (std::size_t k = 0; k < members.size(); ++k) {
		const int r = members[k];
		if (r < 0 || r >= n_realizations_) {
			throw ConfigError("realization " + std::to_string(r) + " out of range");
		}
		std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(r * block), block,
		            out.values_.begin() + static_cast<std::ptrdiff_t>(k * block));
	}
	return out;
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
	std::vector<std::string_view> out;
	std::size_t start = 0;
	while (true) {
		const auto pos = line.find(',', start);
		out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
		if (pos == std::string_view::npos) {
			break;
		}
		start = pos + 1;
	}
	for (auto& f : out) {
		while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
		while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) {
			f.remove_suffix(1);
		}
	}
	return out;
}

std::string row_context(const std::filesystem::path& path, std::size_t row) {
	return path.string() + ":" + std::to_string(row) + ": ";
}

template <class T>
T parse_field(std::string_view s, const std::filesystem::path& path, std::size_t row,
              const char* what) {
	T value{};
	const auto* end = s.data() + s.size();
	const char* first = s.data();
	if (!s.empty() && s.front() == '+') {
		++first;
	}
	auto [ptr, ec] = std::from_chars(first, end, value);
	if (ec != std::errc{} || ptr != end || s.empty()) {
		throw DataError(row_context(path, row) + "cannot parse " + what + " '" +
		                std::string(s) + "'");
	}
	return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
	std::ifstream in(path);
	if (!in) {
		throw DataError("cannot open " + path.string());
	}
	return in;
}

void expect_header(std::istream& in, const std::filesystem::path& path,
                   std::string_view expected) {
	std::string line;
	if (!std::getline(in, line)) {
		throw DataError(path.string() + ": empty file");
	}
	if (!line.empty() && line.back() == '\r') {
		line.pop_back();
	}
	if (line != expected) {
		throw DataError(path.string() + ":1: expected header '" + std::string(expected) +
		                "', got '" + line + "'");
	}
}

}  // namespace

std::string format_value(double v) {
	char buf[64];
	auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
	return std::string(buf, ptr);
}

GridMeta load_grid(const std::filesystem::path& path, double spacing) {
	auto in = open_input(path);
	expect_header(in, path, "id,lat,lon,elev");
	std::vector<GridPoint> pts;
	std::string line;
	std::size_t row = 1;
	while (std::getline(in, line)) {
		++row;
		if (line.empty() || line == "\r") {
			continue;
		}
		const auto f = split_csv(line);
		if (f.size() != 4) {
			throw DataError(row_context(path, row) + "expected 4 fields");
		}
		GridPoint p;
		p.id = parse_field<int>(f[0], path, row, "id");
		p.lat = parse_field<double>(f[1], path, row, "lat");
		p.lon = parse_field<double>(f[2], path, row, "lon");
		p.elev = parse_field<double>(f[3], path, row, "elev");
		if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || !std::isfinite(p.elev)) {
			throw DataError(row_context(path, row) + "non-finite coordinate");
		}
		pts.push_back(p);
	}
	if (pts.empty()) {
		throw DataError(path.string() + ": no grid points");
	}
	return GridMeta::from_points(std::move(pts), spacing);
}

void save_grid(const std::filesystem::path& path, const GridMeta& meta) {
	std::ofstream out(path);
	if (!out) {
		throw DataError("cannot write " + path.string());
	}
	out << "id,lat,lon,elev\n";
	for (const auto& p : meta.points) {
		out << p.id << ',' << format_value(p.lat) << ',' << format_value(p.lon) << ','
		    << format_value(p.elev) << '\n';
	}
}

EnsembleSeries load_series(const std::filesystem::path& path,
                           const std::filesystem::path& meta_path,
                           const LoadOptions& opts) {
	return load_series(path, std::make_shared<const GridMeta>(load_grid(meta_path, opts.spacing)),
	                   opts);
}

EnsembleSeries load_series(const std::filesystem::path& path,
                           std::shared_ptr<const GridMeta> meta,
                           const LoadOptions& opts) {
	struct Row {
		int r;
		int t;
		int i;
		double v;
	};
	auto in = open_input(path);
	expect_header(in, path, "realization,t,point_id,value");
	const int n_points = static_cast<int>(meta->size());
	std::vector<Row> rows;
	int max_r = -1;
	int max_t = -1;
	std::string line;
	std::size_t row = 1;
	while (std::getline(in, line)) {
		++row;
		if (line.empty() || line == "\r") {
			continue;
		}
		const auto f = split_csv(line);
		if (f.size() != 4) {
			throw DataError(row_context(path, row) + "expected 4 fields");
		}
		Row rec{parse_field<int>(f[0], path, row, "realization"),
		        parse_field<int>(f[1], path, row, "t"),
		        parse_field<int>(f[2], path, row, "point_id"),
		        parse_field<double>(f[3], path, row, "value")};
		if (rec.r < 0 || rec.t < 0) {
			throw DataError(row_context(path, row) + "negative index");
		}
		if (rec.i < 0 || rec.i >= n_points) {
			throw DataError(row_context(path, row) + "point_id " + std::to_string(rec.i) +
			                " not on grid");
		}
		if (!std::isfinite(rec.v)) {
			throw DataError(row_context(path, row) + "non-finite value");
		}
		if (!opts.allow_negative && rec.v < 0.0) {
			throw DataError(row_context(path, row) + "negative wind speed");
		}
		max_r = std::max(max_r, rec.r);
		max_t = std::max(max_t, rec.t);
		rows.push_back(rec);
	}
	const int n_days = max_t + 1;
	if (rows.empty() || n_days % days_per_year != 0) {
		throw DataError(path.string() + ": expected 365 days per year, series has " +
		                std::to_string(std::max(n_days, 0)) + " days");
	}
	Calendar365 cal{opts.start_year, n_days / days_per_year};
	EnsembleSeries out(std::move(meta), cal, max_r + 1, Scale::Raw);
	const std::size_t expected = static_cast<std::size_t>(max_r + 1) * n_days * n_points;
	if (rows.size() != expected) {
		throw DataError(path.string() + ": dimension mismatch, expected " +
		                std::to_string(expected) + " rows, got " + std::to_string(rows.size()));
	}
	std::vector<bool> seen(expected, false);
	for (std::size_t k = 0; k < rows.size(); ++k) {
		const auto& rec = rows[k];
		const std::size_t idx =
		    (static_cast<std::size_t>(rec.r) * n_days + rec.t) * n_points + rec.i;
		if (seen[idx]) {
			throw DataError(row_context(path, k + 2) + "duplicate entry (" +
			                std::to_string(rec.r) + "," + std::to_string(rec.t) + "," +
			                std::to_string(rec.i) + ")");
		}
		seen[idx] = true;
		out.at(rec.r, rec.t, rec.i) = rec.v;
	}
	return out;
}

void save_series(const std::filesystem::path& path, const EnsembleSeries& series) {
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw DataError("cannot write " + path.string());
	}
	out << "realization,t,point_id,value\n";
	std::string buf;
	buf.reserve(1 << 20);
	for (int r = 0; r < series.n_realizations(); ++r) {
		for (int t = 0; t < series.n_days(); ++t) {
			for (int i = 0; i < series.n_points(); ++i) {
				buf += std::to_string(r);
				buf += ',';
				buf += std::to_string(t);
				buf += ',';
				buf += std::to_string(i);
				buf += ',';
				buf += format_value(series.at(r, t, i));
				buf += '\n';
			}
			if (buf.size() > (1 << 20) - 4096) {
				out << buf;
				buf.clear();
			}
		}
	}
	out << buf;
}

}  // namespace windgen
