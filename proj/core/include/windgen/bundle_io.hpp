#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "windgen/regions.hpp"
#include "windgen/seasonal.hpp"
#include "windgen/simulator.hpp"
#include "windgen/skewt.hpp"
#include "windgen/var_model.hpp"

namespace windgen {

using Json = nlohmann::json;

/// File names inside a bundle directory.
namespace bundle_files {
inline constexpr const char* grid = "grid.csv";
inline constexpr const char* seasonal = "seasonal.json";
inline constexpr const char* var = "var.json";
inline constexpr const char* partition = "partition.json";
inline constexpr const char* skewt = "skewt.json";
inline constexpr const char* fit_report = "fit_report.json";
inline constexpr const char* manifest = "manifest.json";
}  // namespace bundle_files

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t h);

Json seasonal_to_json(const SeasonalModel& model);
SeasonalModel seasonal_from_json(const Json& j, int n_points);

/// VAR coefficients as stored on disk.
struct VarCoefficients {
	Eigen::MatrixXd a1;
	Eigen::MatrixXd a2;
	Restrictions restrictions;
	std::string estimator;
	std::string scheme;
	double max_modulus = 0.0;
	bool stable = false;
};

/// Every allowed entry is written, zeros included, so the restriction
/// pattern survives a round trip.
Json var_to_json(const VarCoefficients& var);
VarCoefficients var_from_json(const Json& j, int n_points);

Json partition_to_json(const Partition& p);
Partition partition_from_json(const Json& j, int n_points);

Json region_to_json(const RegionSkewT& r);
RegionSkewT region_from_json(const Json& j);
Json regions_to_json(const std::vector<RegionSkewT>& regions);
std::vector<RegionSkewT> regions_from_json(const Json& j);

/// Writes grid.csv, seasonal.json, var.json, partition.json and skewt.json.
void save_bundle(const std::filesystem::path& dir, const GeneratorBundle& bundle,
                 const VarCoefficients& var);

struct LoadedBundle {
	GeneratorBundle bundle;
	VarCoefficients var;
};

/// Reads the files written by save_bundle and validates the result.
LoadedBundle load_bundle(const std::filesystem::path& dir, InnovationFamily family,
                         std::uint64_t master_seed);

}  // namespace windgen
