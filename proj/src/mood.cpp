#include "cutscore/mood.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cutscore/error.hpp"

#ifndef CUTSCORE_DEFAULT_DATA_DIR
#define CUTSCORE_DEFAULT_DATA_DIR "data"
#endif

namespace cutscore {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Energy e) {
  switch (e) {
    case Energy::kLow: return "low";
    case Energy::kMedium: return "medium";
    case Energy::kHigh: return "high";
  }
  return "?";
}

Energy parse_energy(std::string_view text) {
  if (text == "low") return Energy::kLow;
  if (text == "medium") return Energy::kMedium;
  if (text == "high") return Energy::kHigh;
  throw Error(ErrorCode::kParseError, "unknown energy '" + std::string(text) + "'");
}

std::string_view to_string(Complexity c) {
  switch (c) {
    case Complexity::kSimple: return "simple";
    case Complexity::kSemiComplex: return "semi-complex";
    case Complexity::kComplex: return "complex";
  }
  return "?";
}

Complexity parse_complexity(std::string_view text) {
  if (text == "simple") return Complexity::kSimple;
  if (text == "semi-complex") return Complexity::kSemiComplex;
  if (text == "complex") return Complexity::kComplex;
  throw Error(ErrorCode::kParseError, "unknown complexity '" + std::string(text) + "'");
}

std::string to_string(const TimeSignature& ts) {
  return std::to_string(ts.beats) + "/" + std::to_string(ts.unit);
}

TimeSignature parse_time_signature(std::string_view text) {
  const auto slash = text.find('/');
  const auto bad = [&] {
    return Error(ErrorCode::kParseError, "bad time signature '" + std::string(text) + "'");
  };
  if (slash == std::string_view::npos) throw bad();
  const auto number = [&](std::string_view part) {
    if (part.empty() || part.size() > 3) throw bad();
    int v = 0;
    for (char c : part) {
      if (!std::isdigit(static_cast<unsigned char>(c))) throw bad();
      v = v * 10 + (c - '0');
    }
    return v;
  };
  TimeSignature ts{number(text.substr(0, slash)), number(text.substr(slash + 1))};
  if (ts.beats < 2 || ts.beats > 12 || (ts.unit != 2 && ts.unit != 4 && ts.unit != 8)) {
    throw bad();
  }
  return ts;
}

std::string_view to_string(RhythmDensity d) {
  switch (d) {
    case RhythmDensity::kSparse: return "sparse";
    case RhythmDensity::kMedium: return "medium";
    case RhythmDensity::kDense: return "dense";
  }
  return "?";
}

const std::array<int, 7>& Scale::intervals() const {
  static const std::array<int, 7> kMajor{0, 2, 4, 5, 7, 9, 11};
  static const std::array<int, 7> kMinor{0, 2, 3, 5, 7, 8, 10};
  static const std::array<int, 7> kDorian{0, 2, 3, 5, 7, 9, 10};
  static const std::array<int, 7> kMixolydian{0, 2, 4, 5, 7, 9, 10};
  static const std::array<int, 7> kLydian{0, 2, 4, 6, 7, 9, 11};
  static const std::array<int, 7> kPhrygian{0, 1, 3, 5, 7, 8, 10};
  static const std::array<int, 7> kHarmonicMinor{0, 2, 3, 5, 7, 8, 11};
  switch (mode) {
    case ScaleMode::kMajor: return kMajor;
    case ScaleMode::kMinor: return kMinor;
    case ScaleMode::kDorian: return kDorian;
    case ScaleMode::kMixolydian: return kMixolydian;
    case ScaleMode::kLydian: return kLydian;
    case ScaleMode::kPhrygian: return kPhrygian;
    case ScaleMode::kHarmonicMinor: return kHarmonicMinor;
  }
  return kMajor;
}

bool Scale::contains(int pitch) const {
  const int pc = ((pitch - tonic) % 12 + 12) % 12;
  const auto& iv = intervals();
  return std::find(iv.begin(), iv.end(), pc) != iv.end();
}

int Scale::degree_pitch(int degree, int octave_base) const {
  const int octave = degree >= 0 ? degree / 7 : -((-degree + 6) / 7);
  const int step = degree - 7 * octave;
  return octave_base + tonic + 12 * octave + intervals()[static_cast<std::size_t>(step)];
}

void MoodConfig::validate() const {
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kInvalidConfig, "mood '" + name + "': " + what);
  };
  if (name.empty()) fail("name is empty");
  if (tempo_range.lo < 1 || tempo_range.lo > tempo_range.hi) fail("tempo range must satisfy 1 <= min <= max");
  if (time_signatures.empty()) fail("no time signatures");
  for (const auto& ts : time_signatures) {
    if (ts.beats < 2 || ts.beats > 12 || (ts.unit != 2 && ts.unit != 4 && ts.unit != 8)) {
      fail("time signature " + to_string(ts) + " outside the supported set");
    }
  }
  if (phrase_length_bars < 1) fail("phrase_length_bars must be positive");
  if (instrument_layers.empty()) fail("no instrument layers");

  std::set<int> ranks;
  std::set<std::string> labels;
  for (const auto& l : instrument_layers) {
    if (l.label.empty()) fail("layer with empty label");
    if (!labels.insert(l.label).second) fail("duplicate layer label " + l.label);
    if (l.activation_rank < 1 || !ranks.insert(l.activation_rank).second) {
      fail("activation ranks must be unique and >= 1");
    }
    if (l.register_lo < 0 || l.register_hi > 127 || l.register_hi - l.register_lo < 11) {
      fail("layer " + l.label + " register must span at least an octave inside 0..127");
    }
  }
  if (!std::is_sorted(instrument_layers.begin(), instrument_layers.end(),
                      [](const LayerDef& a, const LayerDef& b) {
                        return a.activation_rank < b.activation_rank;
                      })) {
    fail("layers must be ordered by activation rank");
  }

  for (Energy e : {Energy::kLow, Energy::kMedium, Energy::kHigh}) {
    const auto it = layers_per_energy.find(e);
    if (it == layers_per_energy.end()) fail("missing layer range for " + std::string(to_string(e)));
    if (it->second.min < 1 || it->second.min > it->second.max || it->second.max > total_layers()) {
      fail("layer range for " + std::string(to_string(e)) + " must satisfy 1 <= min <= max <= layers");
    }
  }
  if (!(layers_per_energy.at(Energy::kLow).max <= layers_per_energy.at(Energy::kMedium).max &&
        layers_per_energy.at(Energy::kMedium).max <= layers_per_energy.at(Energy::kHigh).max)) {
    fail("layer maxima must not decrease with energy");
  }

  for (Complexity c : {Complexity::kSimple, Complexity::kSemiComplex, Complexity::kComplex}) {
    const auto it = progressions.find(c);
    if (it == progressions.end() || it->second.empty()) {
      fail("missing progressions for " + std::string(to_string(c)));
    }
    for (const auto& prog : it->second) {
      if (prog.empty()) fail("empty progression");
      for (int d : prog) {
        if (d < 0 || d > 6) fail("progression degrees must be 0..6");
      }
    }
  }
}

namespace {

int parse_pitch_class(const std::string& key) {
  static const std::map<std::string, int> kNames{
      {"C", 0},  {"C#", 1}, {"Db", 1},  {"D", 2},   {"D#", 3}, {"Eb", 3},
      {"E", 4},  {"F", 5},  {"F#", 6},  {"Gb", 6},  {"G", 7},  {"G#", 8},
      {"Ab", 8}, {"A", 9},  {"A#", 10}, {"Bb", 10}, {"B", 11}};
  const auto it = kNames.find(key);
  if (it == kNames.end()) throw Error(ErrorCode::kInvalidConfig, "unknown key '" + key + "'");
  return it->second;
}

ScaleMode parse_mode(const std::string& mode) {
  static const std::map<std::string, ScaleMode> kModes{
      {"major", ScaleMode::kMajor},           {"minor", ScaleMode::kMinor},
      {"dorian", ScaleMode::kDorian},         {"mixolydian", ScaleMode::kMixolydian},
      {"lydian", ScaleMode::kLydian},         {"phrygian", ScaleMode::kPhrygian},
      {"harmonic-minor", ScaleMode::kHarmonicMinor}};
  const auto it = kModes.find(mode);
  if (it == kModes.end()) throw Error(ErrorCode::kInvalidConfig, "unknown mode '" + mode + "'");
  return it->second;
}

RhythmDensity parse_density(const std::string& d) {
  if (d == "sparse") return RhythmDensity::kSparse;
  if (d == "medium") return RhythmDensity::kMedium;
  if (d == "dense") return RhythmDensity::kDense;
  throw Error(ErrorCode::kInvalidConfig, "unknown rhythm density '" + d + "'");
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

MoodConfig parse_mood_json(std::string_view text) {
  MoodConfig mood;
  try {
    const json doc = json::parse(text);
    mood.name = doc.at("name").get<std::string>();
    const auto& tr = doc.at("tempo_range");
    mood.tempo_range = {tr.at(0).get<int>(), tr.at(1).get<int>()};
    for (const auto& ts : doc.at("time_signatures")) {
      try {
        mood.time_signatures.push_back(parse_time_signature(ts.get<std::string>()));
      } catch (const Error& e) {
        throw Error(ErrorCode::kInvalidConfig, e.what());
      }
    }
    mood.phrase_length_bars = doc.value("phrase_length_bars", 4);
    for (const auto& [key, range] : doc.at("layers_per_energy").items()) {
      Energy e;
      try {
        e = parse_energy(key);
      } catch (const Error& err) {
        throw Error(ErrorCode::kInvalidConfig, err.what());
      }
      mood.layers_per_energy[e] = {range.at(0).get<int>(), range.at(1).get<int>()};
    }
    const auto& scale = doc.at("scale");
    mood.scale = {parse_pitch_class(scale.at("key").get<std::string>()),
                  parse_mode(scale.at("mode").get<std::string>())};
    for (const auto& [key, progs] : doc.at("progressions").items()) {
      Complexity c;
      try {
        c = parse_complexity(key);
      } catch (const Error& err) {
        throw Error(ErrorCode::kInvalidConfig, err.what());
      }
      mood.progressions[c] = progs.get<std::vector<std::vector<int>>>();
    }
    for (const auto& layer : doc.at("instrument_layers")) {
      LayerDef def;
      def.label = layer.at("label").get<std::string>();
      def.activation_rank = layer.at("activation_rank").get<int>();
      def.register_lo = layer.at("register").at(0).get<int>();
      def.register_hi = layer.at("register").at(1).get<int>();
      def.density = parse_density(layer.at("rhythm_density").get<std::string>());
      mood.instrument_layers.push_back(std::move(def));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("mood document: ") + e.what());
  }
  std::stable_sort(mood.instrument_layers.begin(), mood.instrument_layers.end(),
                   [](const LayerDef& a, const LayerDef& b) {
                     return a.activation_rank < b.activation_rank;
                   });
  mood.validate();
  return mood;
}

MoodConfig load_mood(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "cannot open mood file " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_mood_json(ss.str());
}

MoodConfig load_mood_preset(const fs::path& dir, std::string_view name) {
  const std::string want = lower(name);
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".json" && lower(entry.path().stem().string()) == want) {
        return load_mood(entry.path());
      }
    }
  }
  throw Error(ErrorCode::kInvalidConfig,
              "no mood preset '" + std::string(name) + "' in " + dir.string());
}

std::vector<std::string> list_mood_presets(const fs::path& dir) {
  std::vector<std::string> names;
  if (!fs::is_directory(dir)) return names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

fs::path default_data_dir() {
  if (const char* env = std::getenv("CUTSCORE_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return CUTSCORE_DEFAULT_DATA_DIR;
}

}  // namespace cutscore
