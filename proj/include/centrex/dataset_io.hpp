#pragma once

#include <filesystem>
#include <string>

#include "centrex/datagen.hpp"

namespace centrex {

/// Path of the metadata sidecar that accompanies a dataset CSV.
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

/// Writes `csv` (header z1..zm,label; one row per datum) and its sidecar
/// (scenario, seed, A, Sigma, true centroids). Numbers keep 17 significant
/// digits, so load_dataset() returns the data bit for bit.
void save_dataset(const Dataset& ds, const std::filesystem::path& csv);

/// Reads a dataset written by save_dataset(). Malformed input raises
/// DataError naming the file and line; unreadable files raise IoError.
Dataset load_dataset(const std::filesystem::path& csv);

std::string scenario_to_json_text(const ScenarioConfig& cfg);
/// Accepts a scenario object or an experiment config with a "scenario" member.
/// Missing fields take their defaults except m, sigma, n and seed, which are required.
ScenarioConfig scenario_from_json_text(const std::string& text);

/// %.17g formatting used by every CSV writer.
std::string format_real(double x);

}  // namespace centrex
