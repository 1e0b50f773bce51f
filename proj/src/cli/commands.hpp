#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace vt::cli {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 0;
  LogLevel log_level = LogLevel::kWarn;
};

const Globals& globals();

void log(LogLevel level, const std::string& msg);

// Files in `dir` with the given extension, sorted by name.
std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir, const std::string& ext);
// Writes `j` to `path` (pretty-printed, trailing newline).
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);
// Resolved configuration copy: resolved_config.json inside an output
// directory, or <file>.config.json next to an output file.
void write_resolved_config(const std::filesystem::path& output, bool output_is_dir, nlohmann::json options);

void add_data_commands(CLI::App& app);
void add_model_commands(CLI::App& app);
void add_eval_commands(CLI::App& app);

}  // namespace vt::cli
