#pragma once

#include <string>

#include "factorcov/identification.hpp"
#include "factorcov/simulation.hpp"
#include "factorcov_cli/cli.hpp"
#include "json.hpp"

namespace factorcov::cli {

using nlohmann::json;

json to_json(const ExperimentReport& r);
json to_json(const IdentificationSweep& s);
void write_json(const std::string& path, const json& j);

void write_points_csv(const std::string& path, const ExperimentReport& r);
void write_points_csv(const std::string& path, const IdentificationSweep& s);

/// "report.json" -> "report.csv".
std::string points_csv_path(const std::string& report_path);

}  // namespace factorcov::cli
