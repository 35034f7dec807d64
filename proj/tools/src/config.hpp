#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <windgen/analysis.hpp>
#include <windgen/bundle_io.hpp>
#include <windgen/regions.hpp>
#include <windgen/simulator.hpp>
#include <windgen/var_model.hpp>

namespace windgen::cli {

/// Built-in defaults for every recognized key.
Json default_config();

/// Sets a dotted key; the value is parsed as JSON when possible, else kept
/// as a string. Unknown keys are rejected.
void apply_override(Json& cfg, const std::string& assignment);

/// defaults <- file <- --set overrides <- dedicated flags.
Json assemble_config(const std::optional<std::filesystem::path>& file,
                     const std::vector<std::string>& overrides,
                     const std::optional<std::uint64_t>& seed,
                     const std::optional<std::string>& out);

struct ThresholdSpec {
	double value;
	Side side;
};

enum class InputScale { Raw, Standardized };

struct RunConfig {
	struct Paths {
		std::filesystem::path grid;
		std::filesystem::path series;
		std::filesystem::path bundle;
		std::filesystem::path reference;
		std::filesystem::path simulated;
		std::filesystem::path partition;
		std::filesystem::path out;
	} paths;

	int start_year = 1;
	bool allow_negative = false;
	InputScale input_scale = InputScale::Raw;

	int n_harmonics = 5;
	double sd_floor = 1e-3;

	StencilScheme scheme = StencilScheme::Stencil;
	Estimator estimator = Estimator::OLS;
	double fdr = 0.01;

	int n_clusters = 9;
	FeatureMode feature_mode = FeatureMode::Correlation;

	double kappa = 1.5;
	double gamma1_mse_threshold = 0.05;

	/// Empty means every member.
	std::vector<int> training_members;

	int n_realizations = 30;
	int n_years = 1;
	int burn_in = 1000;
	std::uint64_t seed = 0;
	InnovationFamily family = InnovationFamily::SkewT;
	int sim_start_year = 1;

	std::vector<int> points;
	int max_lag = 30;
	std::vector<ThresholdSpec> thresholds;
	std::vector<double> probs;

	WpdConfig wpd;
	std::vector<SeasonDef> seasons;
	std::optional<int> first_year;
	std::optional<int> last_year;

	std::string synth_kind = "generator";
	int synth_members = 3;
	int synth_years = 50;
	int synth_nx = 5;
	int synth_ny = 5;
	int synth_burn_in = 1000;
	double synth_radius = 0.8;
	double synth_nu = 12.0;
	double synth_phi = 150.0;
	std::vector<double> synth_delta{0.85, 0.8, 0.85, 0.9};
};

/// Typed view of an assembled config; throws ConfigError on bad values.
RunConfig parse_config(const Json& cfg);

}  // namespace windgen::cli
