#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmpflow/sim.hpp"

namespace rmpflow {

using nlohmann::json;

// CSV writer printing doubles with 17 significant digits so repeated runs
// produce byte-identical files.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    void row(const std::vector<double>& values);
    void row(const std::vector<std::string>& cells);

    static std::string format(double v);

private:
    std::ofstream out_;
    size_t columns_;
};

// Trajectory CSV with header t,q0..qn,qd0..qdn,V,K,mindist.
void writeTrajectoryCsv(const std::filesystem::path& path, const Trajectory& traj);

json runMetricsJson(const RunMetrics& m);

void writeJson(const std::filesystem::path& path, const json& doc);
json readJson(const std::filesystem::path& path);

// Structural validation against the subset of JSON Schema used by the shipped
// schema files (type / required / properties / items). Throws ConfigError on
// the first violation, naming the offending path.
void validateAgainstSchema(const json& doc, const json& schema, const std::string& path = "$");

}  // namespace rmpflow
