#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace polariton::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitConvergence = 3;
inline constexpr int kExitCapacity = 4;

/// Flat key/value configuration of one run. Keys mirror ModelParams fields
/// plus solver, grid and scan options; every value is kept as text so the
/// manifest can echo it verbatim.
class RunConfig {
 public:
  std::string subcommand;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  /// Sets `key` only when absent.
  void set_default(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string text(const std::string& key) const;
  double number(const std::string& key) const;
  int integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::optional<int> optional_integer(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

/// Parses `key = value` lines; '#' starts a comment. A file ending in .json is
/// read as a run manifest (its "subcommand" and "config" entries).
RunConfig load_config(const std::filesystem::path& path);

/// Applies a `key=value` override; ConfigError when malformed.
void apply_override(RunConfig& config, const std::string& assignment);

/// Fills every default for the subcommand.
void resolve_defaults(RunConfig& config);

/// Runs a fully resolved configuration, writing CSVs and a manifest into
/// config "out_dir". Returns the process exit code.
int execute(const RunConfig& config);

/// Entry point behind the `polariton` executable.
int run(int argc, char** argv);

}  // namespace polariton::cli
