#include "cutscore/pipeline.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "cutscore/composer.hpp"
#include "cutscore/energy.hpp"
#include "cutscore/ini.hpp"
#include "cutscore/loop_sequencer.hpp"
#include "cutscore/midi.hpp"

namespace cutscore {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad_config(const std::string& what) {
  throw Error(ErrorCode::kInvalidConfig, what);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    bad_config(std::string(key) + ": '" + std::string(value) + "' is not a valid number");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "yes" || value == "1" || value == "on") return true;
  if (value == "false" || value == "no" || value == "0" || value == "off") return false;
  bad_config(std::string(key) + ": expected true or false, got '" + std::string(value) + "'");
}

Fps parse_fps(std::string_view value) {
  const auto slash = value.find('/');
  Fps fps;
  fps.num = parse_number<std::uint32_t>("source_fps", value.substr(0, slash));
  fps.den = slash == std::string_view::npos
                ? 1
                : parse_number<std::uint32_t>("source_fps", value.substr(slash + 1));
  if (fps.num == 0 || fps.den == 0) bad_config("source_fps must be positive");
  return fps;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

RawStreamSource& raw_source(PipelineConfig& c) {
  if (!c.source || !std::holds_alternative<RawStreamSource>(*c.source)) c.source = RawStreamSource{};
  return std::get<RawStreamSource>(*c.source);
}

ImageSequenceSource& image_source(PipelineConfig& c) {
  if (!c.source || !std::holds_alternative<ImageSequenceSource>(*c.source)) {
    c.source = ImageSequenceSource{};
  }
  return std::get<ImageSequenceSource>(*c.source);
}

struct Key {
  const char* name;
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

std::string opt_path(const std::optional<fs::path>& p) { return p ? p->string() : ""; }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"source_stream",
       [](PipelineConfig& c, std::string_view v) { raw_source(c).stream = v; },
       [](const PipelineConfig& c) {
         const auto* s = c.source ? std::get_if<RawStreamSource>(&*c.source) : nullptr;
         return s ? s->stream.string() : "";
       }},
      {"source_header",
       [](PipelineConfig& c, std::string_view v) { raw_source(c).header = v; },
       [](const PipelineConfig& c) {
         const auto* s = c.source ? std::get_if<RawStreamSource>(&*c.source) : nullptr;
         return s ? s->header.string() : "";
       }},
      {"source_images",
       [](PipelineConfig& c, std::string_view v) { image_source(c).directory = v; },
       [](const PipelineConfig& c) {
         const auto* s = c.source ? std::get_if<ImageSequenceSource>(&*c.source) : nullptr;
         return s ? s->directory.string() : "";
       }},
      {"source_fps",
       [](PipelineConfig& c, std::string_view v) { image_source(c).fps = parse_fps(v); },
       [](const PipelineConfig& c) {
         const auto* s = c.source ? std::get_if<ImageSequenceSource>(&*c.source) : nullptr;
         return s ? std::to_string(s->fps.num) + "/" + std::to_string(s->fps.den) : "";
       }},
      {"fade_threshold",
       [](PipelineConfig& c, std::string_view v) {
         c.detector.fade_threshold = parse_number<double>("fade_threshold", v);
       },
       [](const PipelineConfig& c) { return format_double(c.detector.fade_threshold); }},
      {"cut_threshold",
       [](PipelineConfig& c, std::string_view v) {
         c.detector.cut_threshold = parse_number<double>("cut_threshold", v);
       },
       [](const PipelineConfig& c) { return format_double(c.detector.cut_threshold); }},
      {"min_scene_frames",
       [](PipelineConfig& c, std::string_view v) {
         c.detector.min_scene_frames = parse_number<std::uint32_t>("min_scene_frames", v);
       },
       [](const PipelineConfig& c) { return std::to_string(c.detector.min_scene_frames); }},
      {"merge_tolerance",
       [](PipelineConfig& c, std::string_view v) {
         c.detector.merge_tolerance_s = parse_number<double>("merge_tolerance", v);
       },
       [](const PipelineConfig& c) { return format_double(c.detector.merge_tolerance_s); }},
      {"mood", [](PipelineConfig& c, std::string_view v) { c.mood = v; },
       [](const PipelineConfig& c) { return c.mood; }},
      {"complexity",
       [](PipelineConfig& c, std::string_view v) {
         try {
           c.complexity = parse_complexity(v);
         } catch (const Error& e) {
           bad_config(e.what());
         }
       },
       [](const PipelineConfig& c) { return std::string(to_string(c.complexity)); }},
      {"planner_mode",
       [](PipelineConfig& c, std::string_view v) {
         try {
           c.planner_mode = parse_planner_mode(v);
         } catch (const Error& e) {
           bad_config(e.what());
         }
       },
       [](const PipelineConfig& c) { return std::string(to_string(c.planner_mode)); }},
      {"seed",
       [](PipelineConfig& c, std::string_view v) {
         c.rng_seed = parse_number<std::uint64_t>("seed", v);
       },
       [](const PipelineConfig& c) { return std::to_string(c.rng_seed); }},
      {"detections", [](PipelineConfig& c, std::string_view v) { c.detections = fs::path(v); },
       [](const PipelineConfig& c) { return opt_path(c.detections); }},
      {"melody", [](PipelineConfig& c, std::string_view v) { c.melody = fs::path(v); },
       [](const PipelineConfig& c) { return opt_path(c.melody); }},
      {"instrument_map", [](PipelineConfig& c, std::string_view v) { c.instrument_map = v; },
       [](const PipelineConfig& c) { return c.instrument_map.string(); }},
      {"data_dir", [](PipelineConfig& c, std::string_view v) { c.data_dir = v; },
       [](const PipelineConfig& c) { return c.data_dir.string(); }},
      {"render_template", [](PipelineConfig& c, std::string_view v) { c.render_template = v; },
       [](const PipelineConfig& c) { return c.render_template; }},
      {"mux_template", [](PipelineConfig& c, std::string_view v) { c.mux_template = v; },
       [](const PipelineConfig& c) { return c.mux_template; }},
      {"soundfont", [](PipelineConfig& c, std::string_view v) { c.soundfont = v; },
       [](const PipelineConfig& c) { return c.soundfont.string(); }},
      {"video", [](PipelineConfig& c, std::string_view v) { c.video = fs::path(v); },
       [](const PipelineConfig& c) { return opt_path(c.video); }},
      {"output_dir", [](PipelineConfig& c, std::string_view v) { c.output_dir = v; },
       [](const PipelineConfig& c) { return c.output_dir.string(); }},
      {"mode",
       [](PipelineConfig& c, std::string_view v) {
         if (v == "midi") {
           c.mode = OutputMode::kMidi;
         } else if (v == "loops") {
           c.mode = OutputMode::kLoops;
         } else {
           bad_config("mode: expected midi or loops, got '" + std::string(v) + "'");
         }
       },
       [](const PipelineConfig& c) {
         return std::string(c.mode == OutputMode::kMidi ? "midi" : "loops");
       }},
      {"stems", [](PipelineConfig& c, std::string_view v) { c.stems = fs::path(v); },
       [](const PipelineConfig& c) { return opt_path(c.stems); }},
      {"debug_score",
       [](PipelineConfig& c, std::string_view v) { c.debug_score = parse_bool("debug_score", v); },
       [](const PipelineConfig& c) { return std::string(c.debug_score ? "true" : "false"); }},
  };
  return table;
}

std::string read_text(const fs::path& path, ErrorCode missing) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(missing, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

fs::path default_out(const PipelineConfig& config, fs::path out, std::string_view name) {
  if (out.empty()) out = config.output_dir / name;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  return out;
}

void require_file(const std::optional<fs::path>& p, std::string_view what) {
  if (p && !fs::is_regular_file(*p)) bad_config(std::string(what) + " " + p->string() + " does not exist");
}

std::string tail(const std::string& s, std::size_t n) {
  return s.size() <= n ? s : "..." + s.substr(s.size() - n);
}

void run_template(std::string_view stage, const std::string& tmpl,
                  const std::map<std::string, std::string>& values, const fs::path& out,
                  std::ostream* log) {
  if (tmpl.empty()) {
    throw Error(ErrorCode::kMissingTemplate, std::string(stage) + "_template is not configured");
  }
  const std::string command = substitute_template(tmpl, values);
  if (log) *log << stage << ": " << command << "\n";
  std::error_code ec;
  fs::remove(out, ec);
  const ToolResult r = run_shell(command);
  if (r.exit_status != 0) {
    throw Error(ErrorCode::kExternalTool, std::string(stage) + " command exited with status " +
                                              std::to_string(r.exit_status) + ":\n" +
                                              tail(r.output, 4000));
  }
  if (!fs::is_regular_file(out) || fs::file_size(out) == 0) {
    throw Error(ErrorCode::kExternalTool, std::string(stage) + " command succeeded but " +
                                              out.string() + " is missing or empty:\n" +
                                              tail(r.output, 4000));
  }
}

std::string program_of(const std::string& tmpl) {
  std::istringstream in(tmpl);
  std::string first;
  in >> first;
  return first;
}

}  // namespace

fs::path PipelineConfig::resolved_data_dir() const {
  return data_dir.empty() ? default_data_dir() : data_dir;
}

fs::path PipelineConfig::resolved_instrument_map() const {
  return instrument_map.empty() ? resolved_data_dir() / "instruments.json" : instrument_map;
}

void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value) {
  for (const Key& k : keys()) {
    if (key == k.name) {
      k.set(config, value);
      return;
    }
  }
  bad_config("unknown setting '" + std::string(key) + "'");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Key& k : keys()) out.emplace_back(k.name);
  return out;
}

PipelineConfig parse_config(std::string_view text) {
  ini::Document doc;
  try {
    doc = ini::parse(text);
  } catch (const Error& e) {
    bad_config(std::string("config: ") + e.what());
  }
  PipelineConfig config;
  for (const ini::Block& block : doc.blocks) {
    if (!block.name.empty() && block.name != "pipeline") {
      bad_config("config line " + std::to_string(block.line) + ": unknown block [" + block.name + "]");
    }
    for (const ini::Entry& e : block.entries) {
      if (e.value.empty()) continue;  // unset
      try {
        apply_setting(config, e.key, e.value);
      } catch (const Error& err) {
        bad_config("config line " + std::to_string(e.line) + ": " + err.what());
      }
    }
  }
  return config;
}

PipelineConfig load_config(const fs::path& path) {
  return parse_config(read_text(path, ErrorCode::kInvalidConfig));
}

std::string config_to_ini(const PipelineConfig& config) {
  std::string out = "[pipeline]\n";
  for (const Key& k : keys()) {
    out += k.name;
    const std::string v = k.get(config);
    out += v.empty() ? " =\n" : " = " + v + "\n";
  }
  return out;
}

std::uint64_t config_hash(const PipelineConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : config_to_ini(config)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void apply_environment(PipelineConfig& config) {
  if (const char* dir = std::getenv("CUTSCORE_OUT_DIR"); dir != nullptr && *dir != '\0') {
    config.output_dir = dir;
  }
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSourceNotFound:
    case ErrorCode::kMalformedSource:
    case ErrorCode::kIncompatibleFrames:
    case ErrorCode::kEmptyVideo:
      return 2;
    case ErrorCode::kEmptyInput:
    case ErrorCode::kIncompleteDetections:
    case ErrorCode::kMalformedDetections:
    case ErrorCode::kNoConsistentTempo:
    case ErrorCode::kUnplannableSection:
    case ErrorCode::kParseError:
    case ErrorCode::kInconsistentPlan:
      return 3;
    case ErrorCode::kEmptyMelody:
    case ErrorCode::kMissingInstrument:
    case ErrorCode::kInvalidEvent:
    case ErrorCode::kMalformedMidi:
    case ErrorCode::kUnsupportedFormat:
    case ErrorCode::kStemMismatch:
    case ErrorCode::kMalformedWav:
      return 4;
    case ErrorCode::kExternalTool:
      return 5;
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kMissingTemplate:
      return 6;
    case ErrorCode::kIo:
      return 1;
  }
  return 1;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json doc;
  doc["version"] = version;
  doc["config_hash"] = config_hash;
  doc["mode"] = mode;
  auto stage_list = nlohmann::ordered_json::array();
  for (const StageRecord& s : stages) {
    stage_list.push_back({{"name", s.name}, {"inputs", s.inputs}, {"outputs", s.outputs},
                          {"ms", std::round(s.ms * 1000.0) / 1000.0}});
  }
  doc["stages"] = std::move(stage_list);
  doc["tool_versions"] = tool_versions;
  return doc.dump(2) + "\n";
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string substitute_template(std::string_view tmpl,
                                const std::map<std::string, std::string>& values) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        const auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

ToolResult run_shell(const std::string& command) {
  ToolResult result;
  const std::string full = "{ " + command + "\n} 2>&1";
  FILE* pipe = popen(full.c_str(), "r");
  if (pipe == nullptr) throw Error(ErrorCode::kExternalTool, "cannot start: " + command);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) result.output.append(buf.data(), n);
  const int status = pclose(pipe);
  if (status == -1) {
    result.exit_status = -1;
  } else if (WIFEXITED(status)) {
    result.exit_status = WEXITSTATUS(status);
  } else {
    result.exit_status = 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  }
  return result;
}

fs::path cmd_analyze(const PipelineConfig& config, fs::path out, std::ostream* log) {
  if (!config.source) bad_config("no video source configured (source_stream or source_images)");
  config.detector.validate();
  std::unique_ptr<FrameSource> source = open_frame_source(*config.source);
  const Fps fps = source->spec().fps;
  const std::vector<FrameStats> stats = compute_stats(*source);
  SceneList list;
  list.fps = fps;
  list.total_frames = stats.size();
  list.scenes = detect_scenes(stats, fps, config.detector);
  out = default_out(config, std::move(out), "scenes.json");
  write_file_atomic(out, scenes_to_json(list));
  if (log) *log << "analyze: " << stats.size() << " frames, " << list.scenes.size() << " scenes -> " << out.string() << "\n";
  return out;
}

namespace {

SceneList load_scenes(const fs::path& path) {
  return parse_scenes_json(read_text(path, ErrorCode::kParseError));
}

}  // namespace

fs::path cmd_plan(const PipelineConfig& config, const fs::path& scenes_json, fs::path out,
                  std::ostream* log) {
  require_file(config.detections, "detections file");
  const SceneList list = load_scenes(scenes_json);
  const MoodConfig mood = load_mood_preset(config.resolved_data_dir() / "moods", config.mood);

  std::vector<Energy> energies(list.scenes.size(), Energy::kMedium);
  if (config.detections) {
    const std::map<std::uint32_t, Energy> labels =
        classify_energy(load_detections(*config.detections, list));
    for (std::size_t i = 0; i < list.scenes.size(); ++i) energies[i] = labels.at(list.scenes[i].id);
  }

  PlannerOptions options;
  options.complexity = config.complexity;
  options.rng_seed = config.rng_seed;
  options.mode = config.planner_mode;
  options.tolerance_s = fit_tolerance(list.fps);
  const PlanResult result = plan_composition(list.scenes, energies, mood, options);

  out = default_out(config, std::move(out), "plan.ini");
  write_file_atomic(out, plan_to_ini(result.plan));
  if (log) {
    *log << "plan: " << result.plan.sections.size() << " sections, mood " << mood.name
         << ", tempo mode " << to_string(result.mode_used) << " -> " << out.string() << "\n";
  }
  return out;
}

fs::path cmd_compose(const PipelineConfig& config, const fs::path& plan_ini, fs::path out,
                     std::ostream* log) {
  require_file(config.melody, "melody file");
  CompositionPlan plan = parse_ini(read_text(plan_ini, ErrorCode::kParseError));
  const MoodConfig mood = load_mood_preset(config.resolved_data_dir() / "moods", plan.mood);
  resolve_duration_ranges(plan, mood);
  const InstrumentMap imap = InstrumentMap::load(config.resolved_instrument_map());

  Motif motif;
  if (config.melody) motif = load_seed_melody(read_smf_file(*config.melody), mood.phrase_length_bars);

  const Score score = compose_score(plan, mood, motif);
  const std::vector<std::uint8_t> bytes = write_smf(score, imap);
  out = default_out(config, std::move(out), "soundtrack.mid");
  write_bytes(out, bytes);
  if (config.debug_score) {
    fs::path dbg = out;
    dbg.replace_extension(".score.json");
    write_file_atomic(dbg, score_debug_json(score));
  }
  if (log) {
    *log << "compose: " << score.total_ticks() << " ticks, " << std::fixed << std::setprecision(3)
         << score.duration_seconds() << " s -> " << out.string() << "\n";
    log->unsetf(std::ios::floatfield);
  }
  return out;
}

fs::path cmd_render(const PipelineConfig& config, const fs::path& midi, fs::path out,
                    std::ostream* log) {
  if (!fs::is_regular_file(midi)) bad_config("render input " + midi.string() + " does not exist");
  out = default_out(config, std::move(out), "soundtrack.wav");
  run_template("render", config.render_template,
               {{"in", midi.string()}, {"out", out.string()}, {"soundfont", config.soundfont.string()}},
               out, log);
  return out;
}

fs::path cmd_mux(const PipelineConfig& config, const fs::path& audio, fs::path out,
                 std::ostream* log) {
  if (!config.video) bad_config("mux needs a video to attach the soundtrack to");
  require_file(config.video, "video");
  if (!fs::is_regular_file(audio)) bad_config("mux input " + audio.string() + " does not exist");
  if (out.empty()) {
    out = config.output_dir / (config.video->stem().string() + "_scored" + config.video->extension().string());
  }
  out = default_out(config, std::move(out), "");
  run_template("mux", config.mux_template,
               {{"in", audio.string()},
                {"audio", audio.string()},
                {"video", config.video->string()},
                {"out", out.string()},
                {"soundfont", config.soundfont.string()}},
               out, log);
  return out;
}

fs::path cmd_mix_loops(const PipelineConfig& config, const fs::path& scenes_json, fs::path out,
                       std::ostream* log) {
  if (!config.stems) bad_config("loop mode needs a stem manifest (stems)");
  require_file(config.stems, "stem manifest");
  const SceneList list = load_scenes(scenes_json);
  const std::vector<Stem> stems = load_stem_manifest(*config.stems);
  const LayerSchedule schedule = build_layer_schedule(list.scenes, stems);
  const PcmAudio mix = mix_stems(schedule, list.scenes, stems);
  out = default_out(config, std::move(out), "soundtrack.wav");
  write_bytes(out, encode_wav(mix));
  if (log) {
    *log << "mix-loops: " << list.scenes.size() << " scenes, " << stems.size() << " stems, "
         << mix.frames() << " sample frames -> " << out.string() << "\n";
  }
  return out;
}

RunManifest cmd_run(const PipelineConfig& config, std::ostream* log) {
  using Clock = std::chrono::steady_clock;
  RunManifest manifest;
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << config_hash(config);
  manifest.config_hash = hash.str();
  manifest.mode = config.mode == OutputMode::kMidi ? "midi" : "loops";
  manifest.tool_versions["cutscore"] = std::string(kVersion);
  manifest.tool_versions["simd"] = std::string(kernels::active_kernels().name);

  const auto stage = [&](std::string name, std::vector<std::string> inputs, auto&& fn) {
    const auto t0 = Clock::now();
    const fs::path produced = fn();
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    manifest.stages.push_back({std::move(name), std::move(inputs), {produced.string()}, ms});
    return produced;
  };

  std::string source_name;
  if (config.source) {
    std::visit([&](const auto& s) {
      using T = std::decay_t<decltype(s)>;
      if constexpr (std::is_same_v<T, RawStreamSource>) {
        source_name = s.stream.string();
      } else {
        source_name = s.directory.string();
      }
    }, *config.source);
  }

  const fs::path scenes = stage("analyze", {source_name}, [&] { return cmd_analyze(config, {}, log); });
  fs::path audio;
  if (config.mode == OutputMode::kLoops) {
    audio = stage("mix-loops", {scenes.string(), opt_path(config.stems)},
                  [&] { return cmd_mix_loops(config, scenes, {}, log); });
  } else {
    std::vector<std::string> plan_inputs{scenes.string()};
    if (config.detections) plan_inputs.push_back(config.detections->string());
    const fs::path plan = stage("plan", plan_inputs, [&] { return cmd_plan(config, scenes, {}, log); });
    std::vector<std::string> compose_inputs{plan.string()};
    if (config.melody) compose_inputs.push_back(config.melody->string());
    const fs::path midi = stage("compose", compose_inputs, [&] { return cmd_compose(config, plan, {}, log); });
    if (!config.render_template.empty()) {
      audio = stage("render", {midi.string()}, [&] { return cmd_render(config, midi, {}, log); });
      const std::string prog = program_of(config.render_template);
      const ToolResult v = run_shell(prog + " --version");
      if (v.exit_status == 0) manifest.tool_versions[prog] = tail(v.output.substr(0, v.output.find('\n')), 200);
    }
  }
  if (!audio.empty() && !config.mux_template.empty() && config.video) {
    stage("mux", {config.video->string(), audio.string()}, [&] { return cmd_mux(config, audio, {}, log); });
    const std::string prog = program_of(config.mux_template);
    const ToolResult v = run_shell(prog + " --version");
    if (v.exit_status == 0) manifest.tool_versions[prog] = tail(v.output.substr(0, v.output.find('\n')), 200);
  }

  fs::create_directories(config.output_dir);
  write_file_atomic(config.output_dir / "run.json", manifest.to_json());
  if (log) *log << "run: manifest -> " << (config.output_dir / "run.json").string() << "\n";
  return manifest;
}

}  // namespace cutscore
