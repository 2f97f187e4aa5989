#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

namespace pianolm::cli {

namespace fs = std::filesystem;

/// "<stage>-<YYYYmmdd-HHMMSS>-<first 8 hex digits of digest>".
std::string run_dir_name(const std::string& stage, std::uint64_t digest);

/// Most recent run directory of a stage, optionally restricted to a digest.
std::optional<fs::path> latest_run(const fs::path& work_dir, const std::string& stage,
                                   std::optional<std::uint64_t> digest = std::nullopt);

/// Creates `override` if given, else a fresh timestamped run directory.
fs::path make_run_dir(const fs::path& work_dir, const std::string& stage, std::uint64_t digest,
                      const std::string& override_dir);

nlohmann::ordered_json read_json(const fs::path& path);
void write_json(const fs::path& path, const nlohmann::ordered_json& j);
void write_text(const fs::path& path, const std::string& text);

/// Resolves a stage input: an explicit directory, or the latest run of `stage`.
fs::path locate_run(const std::string& explicit_dir, const fs::path& work_dir, const std::string& stage);

}  // namespace pianolm::cli
