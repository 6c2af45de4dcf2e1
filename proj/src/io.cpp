#include "rmpflow/io.hpp"

#include <cmath>
#include <cstdio>

namespace rmpflow {

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : columns_(header.size()) {
    std::filesystem::create_directories(path.parent_path());
    out_.open(path);
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    for (size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
}

std::string CsvWriter::format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != columns_) throw std::logic_error("CSV row width mismatch");
    for (size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format(values[i]);
    out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::logic_error("CSV row width mismatch");
    for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
}

void writeTrajectoryCsv(const std::filesystem::path& path, const Trajectory& traj) {
    const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().q.size());
    std::vector<std::string> header{"t"};
    for (int i = 0; i < n; ++i) header.push_back("q" + std::to_string(i));
    for (int i = 0; i < n; ++i) header.push_back("qd" + std::to_string(i));
    header.insert(header.end(), {"V", "K", "mindist"});

    CsvWriter csv(path, header);
    std::vector<double> row(header.size());
    for (size_t s = 0; s < traj.size(); ++s) {
        size_t c = 0;
        row[c++] = traj.states[s].t;
        for (int i = 0; i < n; ++i) row[c++] = traj.states[s].q(i);
        for (int i = 0; i < n; ++i) row[c++] = traj.states[s].qd(i);
        row[c++] = traj.lyapunov[s];
        row[c++] = traj.kinetic[s];
        row[c++] = traj.obstacle_dist[s].size() > 0 ? traj.obstacle_dist[s].minCoeff()
                                                    : std::nan("");
        csv.row(row);
    }
}

json runMetricsJson(const RunMetrics& m) {
    return json{{"time_to_goal", m.time_to_goal},
                {"path_length", m.path_length},
                {"goal_distance", m.goal_distance},
                {"collision_intensity", m.collision_intensity},
                {"collided", m.collided}};
}

void writeJson(const std::filesystem::path& path, const json& doc) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << doc.dump(2) << "\n";
}

json readJson(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("JSON parse error in " + path.string() + ": " + e.what());
    }
}

namespace {

bool typeMatches(const json& doc, const std::string& type) {
    if (type == "object") return doc.is_object();
    if (type == "array") return doc.is_array();
    if (type == "string") return doc.is_string();
    if (type == "number") return doc.is_number();
    if (type == "integer") return doc.is_number_integer();
    if (type == "boolean") return doc.is_boolean();
    return false;
}

}  // namespace

void validateAgainstSchema(const json& doc, const json& schema, const std::string& path) {
    if (schema.contains("type")) {
        const std::string type = schema["type"];
        if (!typeMatches(doc, type))
            throw ConfigError(path + ": expected " + type + ", got " + std::string(doc.type_name()));
    }
    if (schema.contains("required"))
        for (const auto& key : schema["required"])
            if (!doc.contains(key.get<std::string>()))
                throw ConfigError(path + ": missing required key '" + key.get<std::string>() + "'");
    if (schema.contains("properties") && doc.is_object())
        for (const auto& [key, sub] : schema["properties"].items())
            if (doc.contains(key)) validateAgainstSchema(doc.at(key), sub, path + "." + key);
    if (schema.contains("items") && doc.is_array())
        for (size_t i = 0; i < doc.size(); ++i)
            validateAgainstSchema(doc[i], schema["items"], path + "[" + std::to_string(i) + "]");
}

}  // namespace rmpflow
