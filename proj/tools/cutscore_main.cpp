// cutscore: scene-synchronized soundtrack compiler.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cutscore/error.hpp"
#include "cutscore/mood.hpp"
#include "cutscore/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using cutscore::PipelineConfig;

std::string flag_name(const std::string& key) {
  std::string out = "--";
  for (char c : key) out += c == '_' ? '-' : c;
  return out;
}

const std::map<std::string, std::string>& key_help() {
  static const std::map<std::string, std::string> help = {
      {"source_stream", "raw RGB24 frame stream (.rgb24, header in <name>.hdr)"},
      {"source_header", "stream header file when not next to the stream"},
      {"source_images", "directory of numbered binary PPM frames"},
      {"source_fps", "frame rate of an image sequence, N or N/D"},
      {"fade_threshold", "mean intensity below which a frame counts as black (default 12)"},
      {"cut_threshold", "HSV content change that counts as a hard cut (default 30)"},
      {"min_scene_frames", "shortest scene in frames (default 15)"},
      {"merge_tolerance", "seconds within which boundaries merge (default 0.1)"},
      {"mood", "mood preset name"},
      {"complexity", "simple | semi-complex | complex"},
      {"planner_mode", "global | per-scene-energy"},
      {"seed", "random seed"},
      {"detections", "object detections JSON"},
      {"melody", "seed melody MIDI file"},
      {"instrument_map", "layer -> GM program/channel JSON"},
      {"data_dir", "directory holding moods/ and instruments.json"},
      {"render_template", "MIDI -> audio command with {in} {out} {soundfont}"},
      {"mux_template", "audio + video command with {video} {audio} {out}"},
      {"soundfont", "soundfont passed to the render template"},
      {"video", "video file the soundtrack is attached to"},
      {"output_dir", "output directory (CUTSCORE_OUT_DIR overrides the config file)"},
      {"mode", "midi | loops"},
      {"stems", "loop-mode stem manifest JSON"},
      {"debug_score", "also write per-section note lists as JSON"},
  };
  return help;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compile a picture-synchronized soundtrack from a silent video."};
  app.set_version_flag("--version", std::string(cutscore::kVersion));
  app.require_subcommand(1);
  // Settings may follow the subcommand name.
  app.fallthrough();

  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> keys = cutscore::config_keys();
  app.add_option("-c,--config", config_path, "config file ([pipeline] block, key = value)");
  for (const std::string& key : keys) {
    const auto it = key_help().find(key);
    app.add_option_function<std::string>(
           flag_name(key), [key, &overrides](const std::string& v) { overrides[key] = v; },
           it == key_help().end() ? key : it->second)
        ->group("Settings");
  }
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress progress output");

  std::string output;
  std::string input;
  const auto with_io = [&](CLI::App* sub, const char* input_help) {
    sub->add_option("-o,--output", output, "output file");
    if (input_help != nullptr) sub->add_option("input", input, input_help);
    return sub;
  };
  CLI::App* analyze = with_io(app.add_subcommand("analyze", "detect scenes -> scenes.json"), nullptr);
  CLI::App* plan = with_io(app.add_subcommand("plan", "scenes.json -> plan.ini"),
                           "scene list (default <output_dir>/scenes.json)");
  CLI::App* compose = with_io(app.add_subcommand("compose", "plan.ini -> soundtrack.mid"),
                              "plan file (default <output_dir>/plan.ini)");
  CLI::App* render = with_io(app.add_subcommand("render", "soundtrack.mid -> soundtrack.wav"),
                             "MIDI file (default <output_dir>/soundtrack.mid)");
  CLI::App* mux = with_io(app.add_subcommand("mux", "attach soundtrack.wav to the video"),
                          "audio file (default <output_dir>/soundtrack.wav)");
  CLI::App* run = app.add_subcommand("run", "every stage, then run.json");
  bool loops = false;
  run->add_flag("--loops", loops, "loop-stem mode instead of the composer");
  CLI::App* mix = with_io(app.add_subcommand("mix-loops", "scenes.json + stems -> soundtrack.wav"),
                          "scene list (default <output_dir>/scenes.json)");
  CLI::App* moods = app.add_subcommand("moods", "list mood presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 6;
  }

  std::ostream* log = quiet ? nullptr : &std::cerr;
  try {
    PipelineConfig config = config_path.empty() ? PipelineConfig{} : cutscore::load_config(config_path);
    cutscore::apply_environment(config);
    for (const auto& [key, value] : overrides) cutscore::apply_setting(config, key, value);
    if (loops) config.mode = cutscore::OutputMode::kLoops;

    const auto in_or = [&](const char* name) {
      return input.empty() ? config.output_dir / name : fs::path(input);
    };
    fs::path written;
    if (*analyze) {
      written = cutscore::cmd_analyze(config, output, log);
    } else if (*plan) {
      written = cutscore::cmd_plan(config, in_or("scenes.json"), output, log);
    } else if (*compose) {
      written = cutscore::cmd_compose(config, in_or("plan.ini"), output, log);
    } else if (*render) {
      written = cutscore::cmd_render(config, in_or("soundtrack.mid"), output, log);
    } else if (*mux) {
      written = cutscore::cmd_mux(config, in_or("soundtrack.wav"), output, log);
    } else if (*mix) {
      written = cutscore::cmd_mix_loops(config, in_or("scenes.json"), output, log);
    } else if (*run) {
      cutscore::cmd_run(config, log);
    } else if (*moods) {
      for (const std::string& name : cutscore::list_mood_presets(config.resolved_data_dir() / "moods")) {
        std::cout << name << "\n";
      }
    }
    if (!written.empty()) std::cout << written.string() << "\n";
  } catch (const cutscore::Error& e) {
    std::cerr << "cutscore: " << e.what() << "\n";
    return cutscore::exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "cutscore: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
