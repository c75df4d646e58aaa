#pragma once

#include "quadsim/core/vec3.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace quadsim::sim {

/// Line-delimited JSON log kept in memory; written to disk by the caller.
class Telemetry {
public:
    void append(const nlohmann::json& record) { lines_.push_back(record.dump()); }
    const std::vector<std::string>& lines() const { return lines_; }
    std::vector<std::string> take() { return std::move(lines_); }

private:
    std::vector<std::string> lines_;
};

/// Throws std::runtime_error if the file cannot be written or read.
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);
std::vector<std::string> read_lines(const std::filesystem::path& path);

inline nlohmann::json json_vec(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

}  // namespace quadsim::sim
