#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cutscore/error.hpp"
#include "cutscore/frame.hpp"
#include "cutscore/mood.hpp"
#include "cutscore/planner.hpp"
#include "cutscore/scene_detect.hpp"

namespace cutscore {

inline constexpr std::string_view kVersion = "0.4.0";
inline constexpr std::uint64_t kDefaultSeed = 20190;

enum class OutputMode { kMidi, kLoops };

// Every field maps to one key of the config file; flags use the same names
// with dashes (planner_mode -> --planner-mode).
struct PipelineConfig {
  std::optional<SourceDescriptor> source;
  DetectorConfig detector;
  std::string mood = "inspire";
  Complexity complexity = Complexity::kSimple;
  PlannerMode planner_mode = PlannerMode::kGlobal;
  std::uint64_t rng_seed = kDefaultSeed;
  std::optional<std::filesystem::path> detections;
  std::optional<std::filesystem::path> melody;
  std::filesystem::path instrument_map;  // empty: <data_dir>/instruments.json
  std::filesystem::path data_dir;        // empty: default_data_dir()
  std::string render_template;
  std::string mux_template;
  std::filesystem::path soundfont;
  std::optional<std::filesystem::path> video;  // container the soundtrack is muxed into
  std::filesystem::path output_dir = "out";
  OutputMode mode = OutputMode::kMidi;
  std::optional<std::filesystem::path> stems;  // loop-mode manifest
  bool debug_score = false;

  std::filesystem::path resolved_data_dir() const;
  std::filesystem::path resolved_instrument_map() const;
};

// Applies one `key = value` setting. Throws kInvalidConfig on unknown keys
// or bad values.
void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value);
std::vector<std::string> config_keys();

// [pipeline] block of the INI dialect; a parse failure is kInvalidConfig.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);
// Canonical form: every key in config_keys() order, defaults included.
std::string config_to_ini(const PipelineConfig& config);
// FNV-1a 64 over config_to_ini().
std::uint64_t config_hash(const PipelineConfig& config);

// CUTSCORE_OUT_DIR, when set, replaces output_dir.
void apply_environment(PipelineConfig& config);

// 0 ok, 2 source, 3 plan, 4 compose, 5 external tool, 6 config, 1 other I/O.
int exit_code_for(ErrorCode code);

struct StageRecord {
  std::string name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double ms = 0.0;
};

struct RunManifest {
  std::string version{kVersion};
  std::string config_hash;  // 16 hex digits
  std::string mode;
  std::vector<StageRecord> stages;
  std::map<std::string, std::string> tool_versions;

  std::string to_json() const;
};

// Writes through a temporary file in the same directory and renames it.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

// Replaces {in}, {out}, {soundfont} (and {video}, {audio} for muxing)
// verbatim; unknown braces are left alone.
std::string substitute_template(std::string_view tmpl,
                                const std::map<std::string, std::string>& values);

struct ToolResult {
  int exit_status = 0;
  std::string output;  // stdout and stderr
};
ToolResult run_shell(const std::string& command);

// Each command returns the file it wrote; an empty `out` selects the
// default name in output_dir. Progress lines go to `log` when non-null.
std::filesystem::path cmd_analyze(const PipelineConfig& config, std::filesystem::path out = {},
                                  std::ostream* log = nullptr);
std::filesystem::path cmd_plan(const PipelineConfig& config, const std::filesystem::path& scenes_json,
                               std::filesystem::path out = {}, std::ostream* log = nullptr);
std::filesystem::path cmd_compose(const PipelineConfig& config, const std::filesystem::path& plan_ini,
                                  std::filesystem::path out = {}, std::ostream* log = nullptr);
std::filesystem::path cmd_render(const PipelineConfig& config, const std::filesystem::path& midi,
                                 std::filesystem::path out = {}, std::ostream* log = nullptr);
std::filesystem::path cmd_mux(const PipelineConfig& config, const std::filesystem::path& audio,
                              std::filesystem::path out = {}, std::ostream* log = nullptr);
std::filesystem::path cmd_mix_loops(const PipelineConfig& config,
                                    const std::filesystem::path& scenes_json,
                                    std::filesystem::path out = {}, std::ostream* log = nullptr);

// analyze -> plan -> compose (or mix-loops) -> render -> mux; render and
// mux run only when their templates are set. Writes run.json.
RunManifest cmd_run(const PipelineConfig& config, std::ostream* log = nullptr);

}  // namespace cutscore
