#include "vt/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>

#include "commands.hpp"
#include "vt/error.hpp"
#include "vt/io.hpp"
#include "vt/parallel.hpp"

namespace vt::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

Globals g_globals;

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kStructural: return "structural";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kNumeric: return "numeric";
  }
  return "unknown";
}

int report(const char* kind, const std::string& code, const std::string& message, int exit_code) {
  json j{{"error", kind}, {"message", message}, {"exit_code", exit_code}};
  if (!code.empty()) j["code"] = code;
  std::cerr << j.dump() << std::endl;
  return exit_code;
}

}  // namespace

const Globals& globals() { return g_globals; }

void log(LogLevel level, const std::string& msg) {
  static const char* kNames[] = {"error", "warn", "info", "debug"};
  if (level <= g_globals.log_level) std::cerr << "[" << kNames[static_cast<int>(level)] << "] " << msg << "\n";
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw StructuralError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name == "resolved_config.json" || name.ends_with(".config.json")) continue;
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  io::write_file_bytes(path, j.dump(2) + "\n");
}

json read_json(const fs::path& path) {
  try {
    return json::parse(io::read_file_bytes(path));
  } catch (const json::parse_error& e) {
    throw FormatError("json", path.string() + ": invalid JSON: " + e.what());
  }
}

void write_resolved_config(const fs::path& output, bool output_is_dir, json options) {
  options["seed"] = g_globals.seed;
  options["threads"] = thread_count();
  const fs::path path = output_is_dir ? output / "resolved_config.json" : fs::path(output.string() + ".config.json");
  write_json(path, options);
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char* const* argv) {
  g_globals = Globals{};
  CLI::App app{"Acoustic-to-articulatory inversion toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string level = "warn";
  app.add_option("--seed", g_globals.seed, "Random seed")->each([](const std::string&) { g_globals.seed_given = true; });
  app.add_option("--threads", g_globals.threads, "Worker threads (0 = all cores)");
  app.add_option("--log-level", level, "error|warn|info|debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
  app.parse_complete_callback([&] {
    static const std::map<std::string, LogLevel> kLevels = {
        {"error", LogLevel::kError}, {"warn", LogLevel::kWarn}, {"info", LogLevel::kInfo}, {"debug", LogLevel::kDebug}};
    g_globals.log_level = kLevels.at(level);
    set_thread_count(g_globals.threads);
  });
  add_data_commands(app);
  add_model_commands(app);
  add_eval_commands(app);

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::Success& e) {
    std::ostringstream out, err;
    const int code = app.exit(e, out, err);
    std::cout << out.str();
    return code;
  } catch (const CLI::ParseError& e) {
    return report("usage", "", e.what(), 1);
  } catch (const Error& e) {
    const auto* fe = dynamic_cast<const FormatError*>(&e);
    return report(kind_name(e.kind()), fe ? fe->code() : "", e.what(), exit_code_for(e.kind()));
  } catch (const std::filesystem::filesystem_error& e) {
    return report("structural", "io", e.what(), 2);
  } catch (const std::exception& e) {
    return report("internal", "", e.what(), 2);
  }
}

}  // namespace vt::cli
