#include "commands.hpp"

#include <fstream>
#include <set>

#include <CLI11.hpp>

#include <windgen/errors.hpp>
#include <windgen/seasonal.hpp>
#include <windgen/skewt.hpp>
#include <windgen/stats.hpp>
#include <windgen/synthetic.hpp>

namespace windgen::cli {

namespace fs = std::filesystem;

namespace {

template <class F>
decltype(auto) stage(const char* name, F&& f) {
	const auto wrap = [name](const std::exception& e) { return std::string("stage '") + name + "': " + e.what(); };
	try {
		return f();
	} catch (const ConfigError& e) {
		throw ConfigError(wrap(e));
	} catch (const DataError& e) {
		throw DataError(wrap(e));
	} catch (const NumericalError& e) {
		throw NumericalError(wrap(e));
	} catch (const fs::filesystem_error& e) {
		throw DataError(wrap(e));
	}
}

const fs::path& require_path(const fs::path& p, const char* key) {
	if (p.empty()) {
		throw ConfigError(std::string("config key 'paths.") + key + "' is required");
	}
	if (!fs::exists(p)) {
		throw ConfigError(std::string("paths.") + key + " does not exist: " + p.string());
	}
	return p;
}

std::shared_ptr<const GridMeta> read_grid(const RunConfig& cfg) {
	return std::make_shared<const GridMeta>(load_grid(require_path(cfg.paths.grid, "grid")));
}

std::ofstream open_csv(const fs::path& path, const char* header) {
	std::ofstream out(path);
	if (!out) {
		throw DataError("cannot write " + path.string());
	}
	out << header << '\n';
	return out;
}

std::vector<int> training_set(const RunConfig& cfg, int n_members) {
	if (cfg.training_members.empty()) {
		std::vector<int> all(static_cast<std::size_t>(n_members));
		for (int r = 0; r < n_members; ++r) all[r] = r;
		return all;
	}
	std::set<int> seen;
	for (int m : cfg.training_members) {
		if (m < 0 || m >= n_members) {
			throw ConfigError("training member " + std::to_string(m) + " is outside 0.." +
			                  std::to_string(n_members - 1));
		}
		if (!seen.insert(m).second) {
			throw ConfigError("training member " + std::to_string(m) + " is listed twice");
		}
	}
	return cfg.training_members;
}

Json significance_json(const VarModel& model) {
	Json rows = Json::array();
	for (const auto& c : model.significance) {
		rows.push_back({{"matrix", c.entry.lag == Lag::A1 ? "A1" : "A2"},
		                {"i", c.entry.row},
		                {"j", c.entry.col},
		                {"value", c.value},
		                {"std_error", c.std_error},
		                {"t_stat", c.t_stat},
		                {"p_value", c.p_value},
		                {"significant", c.significant}});
	}
	return rows;
}

}  // namespace

void cmd_fit(const RunConfig& cfg, std::ostream& log) {
	const auto meta = stage("load", [&] { return read_grid(cfg); });
	const auto series = stage("load", [&] {
		LoadOptions lo;
		lo.start_year = cfg.start_year;
		lo.allow_negative = cfg.allow_negative || cfg.input_scale == InputScale::Standardized;
		return load_series(require_path(cfg.paths.series, "series"), meta, lo);
	});
	const auto members = training_set(cfg, series.n_realizations());
	const auto train = series.select_realizations(members);
	const auto n = static_cast<int>(meta->size());

	const auto seasonal = stage("seasonal", [&] {
		if (cfg.input_scale == InputScale::Standardized) {
			return SeasonalModel::identity(n, cfg.n_harmonics);
		}
		return fit_seasonal(train, {cfg.n_harmonics, cfg.sd_floor});
	});
	const auto standardized = stage("standardize", [&] { return standardize(train, seasonal); });
	const auto restr = build_restrictions(*meta, cfg.scheme);
	const auto model = stage("var", [&] { return fit_var(standardized, restr, cfg.estimator, cfg.fdr); });
	if (!model.stable) {
		log << "warning: fitted VAR is unstable (max modulus " << model.max_modulus << ")\n";
	}

	const auto partition = stage("regions", [&] {
		if (!cfg.paths.partition.empty()) {
			return partition_from_json(read_json(require_path(cfg.paths.partition, "partition")), n);
		}
		if (cfg.n_clusters > n) {
			throw ConfigError("regions.n_clusters = " + std::to_string(cfg.n_clusters) + " exceeds " +
			                  std::to_string(n) + " gridpoints");
		}
		return cluster_ward(build_features(model.residuals, cfg.feature_mode, *meta), cfg.n_clusters);
	});

	RegionFitOptions ro;
	ro.kappa = cfg.kappa;
	ro.gamma1_mse_threshold = cfg.gamma1_mse_threshold;
	std::vector<RegionSkewT> regions;
	for (int c = 1; c <= partition.n_clusters; ++c) {
		regions.push_back(stage("skewt", [&] {
			const auto ids = partition.members(c);
			Eigen::MatrixXd cols(model.residuals.rows(), static_cast<Eigen::Index>(ids.size()));
			for (std::size_t k = 0; k < ids.size(); ++k) cols.col(k) = model.residuals.col(ids[k]);
			return fit_region(c, cols, ids, *meta, ro);
		}));
	}

	GeneratorBundle bundle;
	bundle.meta = meta;
	bundle.seasonal = seasonal;
	bundle.a1 = model.a1;
	bundle.a2 = model.a2;
	bundle.partition = partition;
	bundle.regions = regions;
	VarCoefficients var{model.a1,
	                    model.a2,
	                    model.restrictions,
	                    estimator_name(model.estimator),
	                    scheme_name(cfg.scheme),
	                    model.max_modulus,
	                    model.stable};
	stage("write", [&] { save_bundle(cfg.paths.out, bundle, var); });

	Json region_rows = Json::array();
	const auto components = contiguity_components(partition, *meta);
	for (const auto& r : regions) {
		const auto& g = r.diagnostics;
		region_rows.push_back({{"id", r.id},
		                       {"size", r.members.size()},
		                       {"contiguous_components", components[r.id - 1]},
		                       {"phi_km", r.matern_phi},
		                       {"nu", r.dp.nu},
		                       {"cp_distance", g.cp_distance},
		                       {"converged", g.converged},
		                       {"mse_gamma1", g.mse_gamma1},
		                       {"mse_gamma2", g.mse_gamma2},
		                       {"gamma2m_sample", g.gamma2m_sample},
		                       {"gamma2m_used", g.gamma2m_used},
		                       {"gamma2m_replaced", g.gamma2m_replaced}});
	}
	const Json report = {{"n_points", n},
	                     {"n_members", series.n_realizations()},
	                     {"training_members", members},
	                     {"n_days", series.n_days()},
	                     {"input_scale", cfg.input_scale == InputScale::Raw ? "raw" : "standardized"},
	                     {"n_harmonics", seasonal.n_harmonics},
	                     {"estimator", estimator_name(model.estimator)},
	                     {"scheme", scheme_name(cfg.scheme)},
	                     {"n_coefficients", restr.size()},
	                     {"max_modulus", model.max_modulus},
	                     {"stable", model.stable},
	                     {"fdr_level", cfg.fdr},
	                     {"significance", significance_json(model)},
	                     {"n_clusters", partition.n_clusters},
	                     {"feature_mode", feature_mode_name(cfg.feature_mode)},
	                     {"regions", region_rows}};
	stage("write", [&] { write_json(cfg.paths.out / bundle_files::fit_report, report); });
	log << "fit: " << n << " points, " << members.size() << " training members, max modulus "
	    << model.max_modulus << (model.stable ? " (stable)" : " (UNSTABLE)") << ", "
	    << partition.n_clusters << " regions -> " << cfg.paths.out.string() << '\n';
}

void cmd_simulate(const RunConfig& cfg, std::ostream& log) {
	const auto& dir = require_path(cfg.paths.bundle, "bundle");
	const auto loaded = stage("load", [&] { return load_bundle(dir, cfg.family, cfg.seed); });
	SimulateOptions so;
	so.n_realizations = cfg.n_realizations;
	so.n_years = cfg.n_years;
	so.burn_in_days = cfg.burn_in;
	so.start_year = cfg.sim_start_year;
	const auto sim = stage("simulate", [&] { return simulate(loaded.bundle, so); });

	Json hashes = Json::object();
	for (const char* name : {bundle_files::grid, bundle_files::seasonal, bundle_files::var,
	                         bundle_files::partition, bundle_files::skewt}) {
		hashes[name] = "fnv1a64:" + hex64(fnv1a64_file(dir / name));
	}
	stage("write", [&] {
		fs::create_directories(cfg.paths.out);
		save_series(cfg.paths.out / "series.csv", sim);
		save_grid(cfg.paths.out / bundle_files::grid, *loaded.bundle.meta);
		write_json(cfg.paths.out / bundle_files::manifest,
		           {{"seed", cfg.seed},
		            {"family", family_name(cfg.family)},
		            {"burn_in", cfg.burn_in},
		            {"n_realizations", cfg.n_realizations},
		            {"n_years", cfg.n_years},
		            {"start_year", cfg.sim_start_year},
		            {"seed_rule", "stream seed = seed XOR splitmix64(splitmix64(region) + realization)"},
		            {"bundle", hashes}});
	});
	log << "simulate: " << cfg.n_realizations << " realizations x " << cfg.n_years
	    << " years -> " << cfg.paths.out.string() << '\n';
}

void cmd_validate(const RunConfig& cfg, std::ostream& log) {
	const auto meta = stage("load", [&] { return read_grid(cfg); });
	LoadOptions lo;
	lo.allow_negative = true;
	lo.start_year = cfg.start_year;
	const auto ref = stage("load", [&] { return load_series(require_path(cfg.paths.reference, "reference"), meta, lo); });
	lo.start_year = cfg.sim_start_year;
	const auto sim = stage("load", [&] { return load_series(require_path(cfg.paths.simulated, "simulated"), meta, lo); });
	const auto n = static_cast<int>(meta->size());
	for (int p : cfg.points) {
		if (p < 0 || p >= n) {
			throw ConfigError("point id " + std::to_string(p) + " is not on the grid");
		}
	}

	stage("validate", [&] {
		fs::create_directories(cfg.paths.out);
		auto acf_out = open_csv(cfg.paths.out / "acf.csv", "point,lag,stat,value");
		auto qq_out = open_csv(cfg.paths.out / "qq.csv", "point,prob,ref_q,sim_q");
		auto exc_out = open_csv(cfg.paths.out / "excursions.csv",
		                        "ensemble,point,threshold,side,duration,count");
		for (int p : cfg.points) {
			for (const auto& [name, s] : {std::pair{"ref", &ref}, std::pair{"sim", &sim}}) {
				const auto env = ensemble_acf(*s, p, cfg.max_lag);
				for (int k = 0; k <= cfg.max_lag; ++k) {
					acf_out << p << ',' << k << ',' << name << "_mean," << format_value(env.mean[k]) << '\n'
					        << p << ',' << k << ',' << name << "_min," << format_value(env.min[k]) << '\n'
					        << p << ',' << k << ',' << name << "_max," << format_value(env.max[k]) << '\n';
				}
				for (const auto& th : cfg.thresholds) {
					const auto h = excursions(*s, p, th.value, th.side);
					const auto prefix = std::string(name) + ',' + std::to_string(p) + ',' +
					                    format_value(th.value) + ',' + side_name(th.side) + ',';
					for (const auto& [len, count] : h.counts) exc_out << prefix << len << ',' << count << '\n';
					exc_out << prefix << "censored," << h.censored_runs << '\n';
				}
			}
			for (const auto& q : qq_table(ref, sim, p, cfg.probs)) {
				qq_out << p << ',' << format_value(q.prob) << ',' << format_value(q.ref_q) << ','
				       << format_value(q.sim_q) << '\n';
			}
		}
	});
	log << "validate: " << cfg.points.size() << " points -> " << cfg.paths.out.string() << '\n';
}

void cmd_wpd(const RunConfig& cfg, std::ostream& log) {
	const auto meta = stage("load", [&] { return read_grid(cfg); });
	LoadOptions lo;
	lo.allow_negative = true;
	lo.start_year = cfg.start_year;
	const auto series = stage("load", [&] { return load_series(require_path(cfg.paths.series, "series"), meta, lo); });
	const auto& cal = series.calendar();
	const YearWindow window{cfg.first_year.value_or(cal.start_year),
	                        cfg.last_year.value_or(cal.start_year + cal.n_years - 1)};
	const auto wpd = stage("wpd", [&] { return wpd_daily(series, cfg.wpd); });

	Json seasons = Json::array();
	stage("wpd", [&] {
		fs::create_directories(cfg.paths.out);
		auto out = open_csv(cfg.paths.out / "wpd_stats.csv", "season,point,stat,median,min,max,q05,q95");
		for (const auto& season : cfg.seasons) {
			const auto stats = seasonal_wpd_stats(wpd, season, window);
			for (std::size_t i = 0; i < stats.size(); ++i) {
				for (const auto& [stat, s] : {std::pair{"sd", &stats[i].sd_summary},
				                              std::pair{"mean", &stats[i].mean_summary}}) {
					out << season.name << ',' << i << ',' << stat << ',' << format_value(s->median) << ','
					    << format_value(s->min) << ',' << format_value(s->max) << ','
					    << format_value(s->q05) << ',' << format_value(s->q95) << '\n';
				}
			}
			seasons.push_back({{"name", season.name}, {"n_days", season.n_days()}, {"ranges", season.ranges}});
		}
		write_json(cfg.paths.out / "wpd_meta.json",
		           {{"seasons", seasons},
		            {"first_year", window.first_year},
		            {"last_year", window.last_year},
		            {"n_realizations", series.n_realizations()},
		            {"rho", cfg.wpd.rho},
		            {"hub_height", cfg.wpd.hub_height},
		            {"ref_height", cfg.wpd.ref_height},
		            {"exponent", cfg.wpd.exponent},
		            {"extrapolation_factor", cfg.wpd.extrapolation_factor()},
		            {"negative_speed_policy", "clamp_zero"}});
	});
	log << "wpd: " << cfg.seasons.size() << " seasons, years " << window.first_year << '-'
	    << window.last_year << " -> " << cfg.paths.out.string() << '\n';
}

void cmd_synth(const RunConfig& cfg, std::ostream& log) {
	fs::create_directories(cfg.paths.out);
	if (cfg.synth_kind == "unstable") {
		// Explosive AR(1) on the residual scale: W_t = 1.01 W_{t-1} + e_t.
		const int days = cfg.synth_years * days_per_year;
		// Longer explosive runs make the lagged regressors collinear.
		if (days > 3 * days_per_year) {
			throw ConfigError("synth.kind 'unstable' supports at most 3 years");
		}
		auto meta = std::make_shared<const GridMeta>(make_lattice(cfg.synth_nx, cfg.synth_ny, 20.0, 40.0, 1.0));
		EnsembleSeries s(meta, {cfg.start_year, cfg.synth_years}, cfg.synth_members, Scale::Standardized);
		for (int r = 0; r < cfg.synth_members; ++r) {
			Rng rng(stream_seed(cfg.seed, 0, static_cast<std::uint64_t>(r)));
			std::normal_distribution<double> z;
			for (int i = 0; i < s.n_points(); ++i) {
				double w = 0.0;
				for (int t = 0; t < days; ++t) s.at(r, t, i) = w = 1.01 * w + z(rng);
			}
		}
		save_grid(cfg.paths.out / bundle_files::grid, *meta);
		save_series(cfg.paths.out / "series.csv", s);
		log << "synth: unstable AR(1) dataset -> " << cfg.paths.out.string() << '\n';
		return;
	}
	SyntheticTruthOptions opts;
	opts.nx = cfg.synth_nx;
	opts.ny = cfg.synth_ny;
	opts.spectral_radius = cfg.synth_radius;
	opts.nu = cfg.synth_nu;
	opts.matern_phi_km = cfg.synth_phi;
	opts.region_delta = cfg.synth_delta;
	opts.seed = cfg.seed;
	opts.skewed = cfg.synth_kind == "generator";
	opts.family = opts.skewed ? InnovationFamily::SkewT : InnovationFamily::Gaussian;
	const auto truth = stage("synth", [&] { return make_truth(opts); });
	SimulateOptions so;
	so.n_realizations = cfg.synth_members;
	so.n_years = cfg.synth_years;
	so.burn_in_days = cfg.synth_burn_in;
	so.start_year = cfg.start_year;
	const auto series = stage("synth", [&] { return simulate(truth.bundle, so); });
	stage("write", [&] {
		save_grid(cfg.paths.out / bundle_files::grid, *truth.bundle.meta);
		save_series(cfg.paths.out / "series.csv", series);
		save_bundle(cfg.paths.out / "truth", truth.bundle, truth.var);
	});
	log << "synth: " << cfg.synth_kind << " dataset, " << cfg.synth_members << " members x "
	    << cfg.synth_years << " years -> " << cfg.paths.out.string() << '\n';
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
	CLI::App app{"Stochastic daily wind generator: fit, simulate, validate, wpd, synth"};
	app.require_subcommand(1);

	std::string config_file;
	std::vector<std::string> overrides;
	std::uint64_t seed = 0;
	std::string out_dir;
	const std::vector<std::pair<const char*, const char*>> commands = {
	    {"fit", "Fit the generator to a gridded ensemble"},
	    {"simulate", "Simulate realizations from a fitted bundle"},
	    {"validate", "ACF, QQ and excursion diagnostics"},
	    {"wpd", "Seasonal wind power density statistics"},
	    {"synth", "Generate a known-truth synthetic dataset"}};
	std::vector<CLI::App*> subs;
	std::vector<CLI::Option*> seed_opts;
	std::vector<CLI::Option*> out_opts;
	for (const auto& [name, help] : commands) {
		auto* sub = app.add_subcommand(name, help);
		sub->add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile);
		seed_opts.push_back(sub->add_option("--seed", seed, "Master seed"));
		out_opts.push_back(sub->add_option("--out", out_dir, "Output directory"));
		sub->add_option("--set", overrides, "Override a config key: key=value")->allow_extra_args(false);
		subs.push_back(sub);
	}

	std::vector<std::string> argv(args.rbegin(), args.rend());
	try {
		app.parse(argv);
	} catch (const CLI::ParseError& e) {
		const int code = app.exit(e, out, err);
		return code == 0 ? exit_ok : exit_usage;
	}

	try {
		std::optional<std::uint64_t> seed_flag;
		std::optional<std::string> out_flag;
		for (std::size_t k = 0; k < subs.size(); ++k) {
			if (!subs[k]->parsed()) continue;
			if (seed_opts[k]->count() > 0) seed_flag = seed;
			if (out_opts[k]->count() > 0) out_flag = out_dir;
		}
		std::optional<fs::path> file;
		if (!config_file.empty()) file = config_file;
		const auto cfg = parse_config(assemble_config(file, overrides, seed_flag, out_flag));
		const std::string cmd = app.get_subcommands().front()->get_name();
		if (cmd == "fit") cmd_fit(cfg, out);
		else if (cmd == "simulate") cmd_simulate(cfg, out);
		else if (cmd == "validate") cmd_validate(cfg, out);
		else if (cmd == "wpd") cmd_wpd(cfg, out);
		else cmd_synth(cfg, out);
		return exit_ok;
	} catch (const ConfigError& e) {
		err << "config error: " << e.what() << '\n';
		return exit_config;
	} catch (const DataError& e) {
		err << "data error: " << e.what() << '\n';
		return exit_config;
	} catch (const NumericalError& e) {
		err << "numerical error: " << e.what() << '\n';
		return exit_numerical;
	} catch (const fs::filesystem_error& e) {
		err << "file error: " << e.what() << '\n';
		return exit_config;
	}
}

}  // namespace windgen::cli
