#include "windgen/bundle_io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <tuple>

#include "windgen/errors.hpp"

namespace windgen {

namespace fs = std::filesystem;

Json read_json(const fs::path& path) {
	std::ifstream in(path);
	if (!in) {
		throw DataError("cannot open " + path.string());
	}
	try {
		return Json::parse(in);
	} catch (const Json::exception& e) {
		throw DataError(path.string() + ": " + e.what());
	}
}

void write_json(const fs::path& path, const Json& j) {
	std::ofstream out(path);
	if (!out) {
		throw DataError("cannot write " + path.string());
	}
	out << j.dump(2) << '\n';
}

std::uint64_t fnv1a64(std::string_view bytes) {
	std::uint64_t h = 0xcbf29ce484222325ULL;
	for (unsigned char c : bytes) {
		h ^= c;
		h *= 0x100000001b3ULL;
	}
	return h;
}

std::uint64_t fnv1a64_file(const fs::path& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw DataError("cannot open " + path.string());
	}
	const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
	return fnv1a64(bytes);
}

std::string hex64(std::uint64_t h) {
	std::ostringstream os;
	os << std::hex << std::setw(16) << std::setfill('0') << h;
	return os.str();
}

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const Json& j, const char* what) {
	try {
		const auto v = j.get<std::vector<double>>();
		return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
	} catch (const Json::exception&) {
		throw DataError(std::string("field '") + what + "' must be an array of numbers");
	}
}

template <class T>
T field(const Json& j, const char* key) {
	if (!j.is_object() || !j.contains(key)) {
		throw DataError(std::string("missing field '") + key + "'");
	}
	try {
		return j.at(key).get<T>();
	} catch (const Json::exception&) {
		throw DataError(std::string("field '") + key + "' has the wrong type");
	}
}

const Json& sub(const Json& j, const char* key) {
	if (!j.is_object() || !j.contains(key)) {
		throw DataError(std::string("missing field '") + key + "'");
	}
	return j.at(key);
}

}  // namespace

Json seasonal_to_json(const SeasonalModel& model) {
	Json arr = Json::array();
	for (int i = 0; i < model.n_points(); ++i) {
		arr.push_back({{"id", i},
		               {"mean_coefs", to_vec(model.mean_coefs[i])},
		               {"sd_coefs", to_vec(model.sd_coefs[i])}});
	}
	return arr;
}

SeasonalModel seasonal_from_json(const Json& j, int n_points) {
	if (!j.is_array() || static_cast<int>(j.size()) != n_points) {
		throw DataError("seasonal model must list " + std::to_string(n_points) + " gridpoints");
	}
	SeasonalModel m;
	m.mean_coefs.resize(n_points);
	m.sd_coefs.resize(n_points);
	std::vector<bool> seen(n_points, false);
	int width = -1;
	for (const auto& e : j) {
		const int id = field<int>(e, "id");
		if (id < 0 || id >= n_points || seen[id]) {
			throw DataError("seasonal model has a bad or repeated id " + std::to_string(id));
		}
		seen[id] = true;
		m.mean_coefs[id] = from_vec(sub(e, "mean_coefs"), "mean_coefs");
		m.sd_coefs[id] = from_vec(sub(e, "sd_coefs"), "sd_coefs");
		const auto w = static_cast<int>(m.mean_coefs[id].size());
		if (w % 2 != 1 || m.sd_coefs[id].size() != w || (width >= 0 && w != width)) {
			throw DataError("seasonal coefficient vectors must share one odd length");
		}
		width = w;
	}
	m.n_harmonics = (width - 1) / 2;
	return m;
}

Json var_to_json(const VarCoefficients& var) {
	Json coefs = Json::array();
	for (const auto& e : var.restrictions.entries) {
		const auto& mat = e.lag == Lag::A1 ? var.a1 : var.a2;
		coefs.push_back({{"matrix", e.lag == Lag::A1 ? "A1" : "A2"},
		                 {"i", e.row},
		                 {"j", e.col},
		                 {"value", mat(e.row, e.col)}});
	}
	return {{"estimator", var.estimator},
	        {"scheme", var.scheme},
	        {"n_points", var.restrictions.n_points},
	        {"max_modulus", var.max_modulus},
	        {"stable", var.stable},
	        {"coefficients", coefs}};
}

VarCoefficients var_from_json(const Json& j, int n_points) {
	VarCoefficients v;
	v.estimator = field<std::string>(j, "estimator");
	v.scheme = field<std::string>(j, "scheme");
	v.max_modulus = field<double>(j, "max_modulus");
	v.stable = field<bool>(j, "stable");
	if (field<int>(j, "n_points") != n_points) {
		throw DataError("var.json was fitted on a different grid");
	}
	v.a1 = Eigen::MatrixXd::Zero(n_points, n_points);
	v.a2 = Eigen::MatrixXd::Zero(n_points, n_points);
	v.restrictions.n_points = n_points;
	for (const auto& c : sub(j, "coefficients")) {
		const auto name = field<std::string>(c, "matrix");
		if (name != "A1" && name != "A2") {
			throw DataError("coefficient matrix must be A1 or A2, got '" + name + "'");
		}
		const int i = field<int>(c, "i");
		const int col = field<int>(c, "j");
		if (i < 0 || i >= n_points || col < 0 || col >= n_points) {
			throw DataError("coefficient index out of range");
		}
		const Lag lag = name == "A1" ? Lag::A1 : Lag::A2;
		(lag == Lag::A1 ? v.a1 : v.a2)(i, col) = field<double>(c, "value");
		v.restrictions.entries.push_back({lag, i, col});
	}
	std::sort(v.restrictions.entries.begin(), v.restrictions.entries.end(),
	          [](const RestrictionEntry& a, const RestrictionEntry& b) {
		          return std::tuple(a.row, static_cast<int>(a.lag), a.col) <
		                 std::tuple(b.row, static_cast<int>(b.lag), b.col);
	          });
	return v;
}

Json partition_to_json(const Partition& p) {
	return {{"n_clusters", p.n_clusters}, {"assignment", p.assignment}};
}

Partition partition_from_json(const Json& j, int n_points) {
	Partition p;
	p.n_clusters = field<int>(j, "n_clusters");
	p.assignment = field<std::vector<int>>(j, "assignment");
	p.validate(n_points);
	return p;
}

Json region_to_json(const RegionSkewT& r) {
	const auto d = r.dp.dim();
	std::vector<double> lower;
	for (int i = 0; i < d; ++i) {
		for (int k = 0; k <= i; ++k) lower.push_back(r.dp.omega(i, k));
	}
	const auto& g = r.diagnostics;
	return {{"id", r.id},
	        {"members", r.members},
	        {"xi", to_vec(r.dp.xi)},
	        {"Omega", lower},
	        {"alpha", to_vec(r.dp.alpha)},
	        {"nu", r.dp.nu},
	        {"phi", r.matern_phi},
	        {"kappa", r.matern_kappa},
	        {"residual_sd", to_vec(r.residual_sd)},
	        {"sample_gamma1", to_vec(r.sample_gamma1)},
	        {"sample_gamma2", to_vec(r.sample_gamma2)},
	        {"diagnostics",
	         {{"cp_distance", g.cp_distance},
	          {"converged", g.converged},
	          {"mse_gamma1", g.mse_gamma1},
	          {"mse_gamma2", g.mse_gamma2},
	          {"gamma2m_sample", g.gamma2m_sample},
	          {"gamma2m_used", g.gamma2m_used},
	          {"gamma2m_replaced", g.gamma2m_replaced}}}};
}

RegionSkewT region_from_json(const Json& j) {
	RegionSkewT r;
	r.id = field<int>(j, "id");
	r.members = field<std::vector<int>>(j, "members");
	r.dp.xi = from_vec(sub(j, "xi"), "xi");
	r.dp.alpha = from_vec(sub(j, "alpha"), "alpha");
	r.dp.nu = field<double>(j, "nu");
	const auto d = static_cast<int>(r.members.size());
	const auto lower = field<std::vector<double>>(j, "Omega");
	if (static_cast<int>(lower.size()) != d * (d + 1) / 2) {
		throw DataError("region " + std::to_string(r.id) + ": Omega lower triangle has " +
		                std::to_string(lower.size()) + " entries for d = " + std::to_string(d));
	}
	r.dp.omega.resize(d, d);
	std::size_t k = 0;
	for (int i = 0; i < d; ++i) {
		for (int c = 0; c <= i; ++c) r.dp.omega(i, c) = r.dp.omega(c, i) = lower[k++];
	}
	r.dp.validate();
	r.matern_phi = field<double>(j, "phi");
	r.matern_kappa = field<double>(j, "kappa");
	r.residual_sd = j.contains("residual_sd") ? from_vec(j.at("residual_sd"), "residual_sd")
	                                          : Eigen::VectorXd::Ones(d);
	if (r.residual_sd.size() != d) {
		throw DataError("region " + std::to_string(r.id) + ": residual_sd has the wrong length");
	}
	if (j.contains("sample_gamma1")) r.sample_gamma1 = from_vec(j.at("sample_gamma1"), "sample_gamma1");
	if (j.contains("sample_gamma2")) r.sample_gamma2 = from_vec(j.at("sample_gamma2"), "sample_gamma2");
	if (j.contains("diagnostics")) {
		const auto& g = j.at("diagnostics");
		r.diagnostics.cp_distance = g.value("cp_distance", 0.0);
		r.diagnostics.converged = g.value("converged", false);
		r.diagnostics.mse_gamma1 = g.value("mse_gamma1", 0.0);
		r.diagnostics.mse_gamma2 = g.value("mse_gamma2", 0.0);
		r.diagnostics.gamma2m_sample = g.value("gamma2m_sample", 0.0);
		r.diagnostics.gamma2m_used = g.value("gamma2m_used", 0.0);
		r.diagnostics.gamma2m_replaced = g.value("gamma2m_replaced", false);
	}
	return r;
}

Json regions_to_json(const std::vector<RegionSkewT>& regions) {
	Json arr = Json::array();
	for (const auto& r : regions) arr.push_back(region_to_json(r));
	return arr;
}

std::vector<RegionSkewT> regions_from_json(const Json& j) {
	if (!j.is_array()) {
		throw DataError("skewt.json must be an array of regions");
	}
	std::vector<RegionSkewT> out;
	for (const auto& e : j) out.push_back(region_from_json(e));
	return out;
}

void save_bundle(const fs::path& dir, const GeneratorBundle& bundle, const VarCoefficients& var) {
	fs::create_directories(dir);
	save_grid(dir / bundle_files::grid, *bundle.meta);
	write_json(dir / bundle_files::seasonal, seasonal_to_json(bundle.seasonal));
	write_json(dir / bundle_files::var, var_to_json(var));
	write_json(dir / bundle_files::partition, partition_to_json(bundle.partition));
	write_json(dir / bundle_files::skewt, regions_to_json(bundle.regions));
}

LoadedBundle load_bundle(const fs::path& dir, InnovationFamily family, std::uint64_t master_seed) {
	for (const char* name : {bundle_files::grid, bundle_files::seasonal, bundle_files::var,
	                         bundle_files::partition, bundle_files::skewt}) {
		if (!fs::exists(dir / name)) {
			throw DataError("bundle file missing: " + (dir / name).string());
		}
	}
	LoadedBundle out;
	auto meta = std::make_shared<const GridMeta>(load_grid(dir / bundle_files::grid));
	const auto n = static_cast<int>(meta->size());
	auto& b = out.bundle;
	b.meta = meta;
	b.seasonal = seasonal_from_json(read_json(dir / bundle_files::seasonal), n);
	out.var = var_from_json(read_json(dir / bundle_files::var), n);
	b.a1 = out.var.a1;
	b.a2 = out.var.a2;
	b.partition = partition_from_json(read_json(dir / bundle_files::partition), n);
	b.regions = regions_from_json(read_json(dir / bundle_files::skewt));
	b.family = family;
	b.master_seed = master_seed;
	b.validate();
	return out;
}

}  // namespace windgen
