#include "config.hpp"

#include <algorithm>

#include <windgen/errors.hpp>

namespace windgen::cli {

namespace fs = std::filesystem;

Json default_config() {
	return Json::parse(R"({
  "paths": {"grid": "", "series": "", "bundle": "", "reference": "", "simulated": "",
            "partition": "", "out": "."},
  "data": {"start_year": 1, "allow_negative": false, "input_scale": "raw"},
  "seasonal": {"n_harmonics": 5, "sd_floor": 0.001},
  "var": {"scheme": "stencil", "estimator": "ols", "fdr": 0.01},
  "regions": {"n_clusters": 9, "feature_mode": "corr"},
  "skewt": {"kappa": 1.5, "gamma1_mse_threshold": 0.05},
  "training_members": [],
  "simulate": {"n_realizations": 30, "n_years": 1, "burn_in": 1000, "seed": 0,
               "family": "skew-t", "start_year": 1},
  "validate": {"points": [0], "max_lag": 30, "thresholds": [], "probs": []},
  "wpd": {"rho": 1.225, "hub_height": 80.0, "ref_height": 10.0, "exponent": 0.14285714285714285,
          "seasons": ["MAM", "JJA"], "first_year": null, "last_year": null},
  "synth": {"kind": "generator", "n_members": 3, "n_years": 50, "nx": 5, "ny": 5,
            "burn_in": 1000, "spectral_radius": 0.8, "nu": 12.0, "phi": 150.0,
            "delta": [0.85, 0.8, 0.85, 0.9]}
})");
}

namespace {

std::vector<std::string> split_key(const std::string& key) {
	std::vector<std::string> parts;
	std::size_t start = 0;
	while (true) {
		const auto dot = key.find('.', start);
		parts.push_back(key.substr(start, dot - start));
		if (dot == std::string::npos) break;
		start = dot + 1;
	}
	for (const auto& p : parts) {
		if (p.empty()) throw ConfigError("malformed config key '" + key + "'");
	}
	return parts;
}

/// Rejects keys absent from the defaults; null defaults accept any value.
void check_known(const Json& value, const Json& reference, const std::string& prefix) {
	if (!value.is_object() || !reference.is_object()) return;
	for (const auto& [k, v] : value.items()) {
		const auto name = prefix.empty() ? k : prefix + "." + k;
		if (!reference.contains(k)) {
			throw ConfigError("unknown config key '" + name + "'");
		}
		check_known(v, reference.at(k), name);
	}
}

Json& locate(Json& cfg, const std::string& key) {
	const auto parts = split_key(key);
	const Json defaults = default_config();
	const Json* ref = &defaults;
	Json* node = &cfg;
	for (const auto& p : parts) {
		if (!ref->is_object() || !ref->contains(p)) {
			throw ConfigError("unknown config key '" + key + "'");
		}
		ref = &ref->at(p);
		node = &(*node)[p];
	}
	return *node;
}

void fill_defaults(Json& cfg, const Json& defaults) {
	for (const auto& [k, v] : defaults.items()) {
		if (!cfg.contains(k)) {
			cfg[k] = v;
		} else if (v.is_object()) {
			fill_defaults(cfg[k], v);
		}
	}
}

}  // namespace

void apply_override(Json& cfg, const std::string& assignment) {
	const auto eq = assignment.find('=');
	if (eq == std::string::npos || eq == 0) {
		throw ConfigError("--set expects key=value, got '" + assignment + "'");
	}
	const auto key = assignment.substr(0, eq);
	const auto text = assignment.substr(eq + 1);
	Json value = Json::parse(text, nullptr, false);
	if (value.is_discarded()) value = text;
	locate(cfg, key) = std::move(value);
}

Json assemble_config(const std::optional<fs::path>& file, const std::vector<std::string>& overrides,
                     const std::optional<std::uint64_t>& seed,
                     const std::optional<std::string>& out) {
	Json cfg = default_config();
	if (file) {
		const Json user = read_json(*file);
		if (!user.is_object()) {
			throw ConfigError(file->string() + ": config must be a JSON object");
		}
		check_known(user, cfg, "");
		cfg.merge_patch(user);
		fill_defaults(cfg, default_config());
	}
	for (const auto& o : overrides) apply_override(cfg, o);
	if (seed) cfg["simulate"]["seed"] = *seed;
	if (out) cfg["paths"]["out"] = *out;
	return cfg;
}

namespace {

template <class T>
T get(const Json& cfg, const char* section, const char* key) {
	const Json& node = section ? cfg.at(section).at(key) : cfg.at(key);
	try {
		return node.get<T>();
	} catch (const Json::exception&) {
		throw ConfigError(std::string("config key '") + (section ? std::string(section) + "." : "") +
		                  key + "' has the wrong type");
	}
}

void require(bool ok, const std::string& what) {
	if (!ok) throw ConfigError(what);
}

SeasonDef parse_season(const Json& j) {
	if (j.is_string()) return SeasonDef::by_name(j.get<std::string>());
	if (!j.is_object() || !j.contains("name") || !j.contains("ranges")) {
		throw ConfigError("a season is a name or {name, ranges: [[first, last], ...]}");
	}
	SeasonDef s;
	try {
		s.name = j.at("name").get<std::string>();
		for (const auto& r : j.at("ranges")) {
			s.ranges.emplace_back(r.at(0).get<int>(), r.at(1).get<int>());
		}
	} catch (const Json::exception&) {
		throw ConfigError("malformed custom season definition");
	}
	s.validate();
	return s;
}

}  // namespace

RunConfig parse_config(const Json& cfg) {
	check_known(cfg, default_config(), "");
	RunConfig c;
	c.paths.grid = get<std::string>(cfg, "paths", "grid");
	c.paths.series = get<std::string>(cfg, "paths", "series");
	c.paths.bundle = get<std::string>(cfg, "paths", "bundle");
	c.paths.reference = get<std::string>(cfg, "paths", "reference");
	c.paths.simulated = get<std::string>(cfg, "paths", "simulated");
	c.paths.partition = get<std::string>(cfg, "paths", "partition");
	c.paths.out = get<std::string>(cfg, "paths", "out");

	c.start_year = get<int>(cfg, "data", "start_year");
	c.allow_negative = get<bool>(cfg, "data", "allow_negative");
	const auto scale = get<std::string>(cfg, "data", "input_scale");
	require(scale == "raw" || scale == "standardized",
	        "data.input_scale must be 'raw' or 'standardized'");
	c.input_scale = scale == "raw" ? InputScale::Raw : InputScale::Standardized;

	c.n_harmonics = get<int>(cfg, "seasonal", "n_harmonics");
	require(c.n_harmonics >= 0 && c.n_harmonics <= 182, "seasonal.n_harmonics must be in 0..182");
	c.sd_floor = get<double>(cfg, "seasonal", "sd_floor");
	require(c.sd_floor > 0.0, "seasonal.sd_floor must be positive");

	c.scheme = parse_scheme(get<std::string>(cfg, "var", "scheme"));
	c.estimator = parse_estimator(get<std::string>(cfg, "var", "estimator"));
	c.fdr = get<double>(cfg, "var", "fdr");
	require(c.fdr > 0.0 && c.fdr < 1.0, "var.fdr must be in (0, 1)");

	c.n_clusters = get<int>(cfg, "regions", "n_clusters");
	require(c.n_clusters >= 1, "regions.n_clusters must be at least 1");
	c.feature_mode = parse_feature_mode(get<std::string>(cfg, "regions", "feature_mode"));

	c.kappa = get<double>(cfg, "skewt", "kappa");
	require(c.kappa > 0.0, "skewt.kappa must be positive");
	c.gamma1_mse_threshold = get<double>(cfg, "skewt", "gamma1_mse_threshold");
	require(c.gamma1_mse_threshold >= 0.0, "skewt.gamma1_mse_threshold must be nonnegative");

	c.training_members = get<std::vector<int>>(cfg, nullptr, "training_members");
	for (int m : c.training_members) require(m >= 0, "training_members must be nonnegative ids");

	c.n_realizations = get<int>(cfg, "simulate", "n_realizations");
	require(c.n_realizations >= 0, "simulate.n_realizations must be nonnegative");
	c.n_years = get<int>(cfg, "simulate", "n_years");
	require(c.n_years >= 1, "simulate.n_years must be at least 1");
	c.burn_in = get<int>(cfg, "simulate", "burn_in");
	require(c.burn_in >= 0, "simulate.burn_in must be nonnegative");
	c.seed = get<std::uint64_t>(cfg, "simulate", "seed");
	c.family = parse_family(get<std::string>(cfg, "simulate", "family"));
	c.sim_start_year = get<int>(cfg, "simulate", "start_year");

	c.points = get<std::vector<int>>(cfg, "validate", "points");
	c.max_lag = get<int>(cfg, "validate", "max_lag");
	require(c.max_lag >= 0, "validate.max_lag must be nonnegative");
	for (const auto& t : cfg.at("validate").at("thresholds")) {
		try {
			c.thresholds.push_back(
			    {t.at("value").get<double>(), parse_side(t.at("side").get<std::string>())});
		} catch (const Json::exception&) {
			throw ConfigError("validate.thresholds entries are {value, side}");
		}
	}
	c.probs = get<std::vector<double>>(cfg, "validate", "probs");
	if (c.probs.empty()) c.probs = default_qq_probs();
	for (double p : c.probs) require(p >= 0.0 && p <= 1.0, "validate.probs must lie in [0, 1]");

	c.wpd.rho = get<double>(cfg, "wpd", "rho");
	c.wpd.hub_height = get<double>(cfg, "wpd", "hub_height");
	c.wpd.ref_height = get<double>(cfg, "wpd", "ref_height");
	c.wpd.exponent = get<double>(cfg, "wpd", "exponent");
	c.wpd.validate();
	for (const auto& s : cfg.at("wpd").at("seasons")) c.seasons.push_back(parse_season(s));
	require(!c.seasons.empty(), "wpd.seasons must not be empty");
	if (!cfg.at("wpd").at("first_year").is_null()) c.first_year = get<int>(cfg, "wpd", "first_year");
	if (!cfg.at("wpd").at("last_year").is_null()) c.last_year = get<int>(cfg, "wpd", "last_year");

	c.synth_kind = get<std::string>(cfg, "synth", "kind");
	require(c.synth_kind == "generator" || c.synth_kind == "var" || c.synth_kind == "unstable",
	        "synth.kind must be 'generator', 'var' or 'unstable'");
	c.synth_members = get<int>(cfg, "synth", "n_members");
	require(c.synth_members >= 1, "synth.n_members must be at least 1");
	c.synth_years = get<int>(cfg, "synth", "n_years");
	require(c.synth_years >= 1, "synth.n_years must be at least 1");
	c.synth_nx = get<int>(cfg, "synth", "nx");
	c.synth_ny = get<int>(cfg, "synth", "ny");
	require(c.synth_nx >= 1 && c.synth_ny >= 1, "synth.nx and synth.ny must be at least 1");
	c.synth_burn_in = get<int>(cfg, "synth", "burn_in");
	require(c.synth_burn_in >= 0, "synth.burn_in must be nonnegative");
	c.synth_radius = get<double>(cfg, "synth", "spectral_radius");
	c.synth_nu = get<double>(cfg, "synth", "nu");
	require(c.synth_nu > 4.0, "synth.nu must exceed 4");
	c.synth_phi = get<double>(cfg, "synth", "phi");
	require(c.synth_phi > 0.0, "synth.phi must be positive");
	c.synth_delta = get<std::vector<double>>(cfg, "synth", "delta");
	require(!c.synth_delta.empty(), "synth.delta must not be empty");
	for (double d : c.synth_delta) require(d > -1.0 && d < 1.0, "synth.delta entries must lie in (-1, 1)");
	return c;
}

}  // namespace windgen::cli
