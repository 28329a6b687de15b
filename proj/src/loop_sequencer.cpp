#include "cutscore/loop_sequencer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include <nlohmann/json.hpp>

#include "cutscore/error.hpp"
#include "cutscore/kernels.hpp"

namespace cutscore {

std::vector<int> LayerSchedule::counts() const {
  std::vector<int> out;
  out.reserve(active.size());
  for (const auto& a : active) out.push_back(static_cast<int>(a.size()));
  return out;
}

int ramp_count(std::size_t scene_index, std::size_t scene_count, std::size_t stem_count) {
  const std::size_t from_edge = std::min(scene_index, scene_count - 1 - scene_index);
  return static_cast<int>(std::clamp<std::size_t>(1 + from_edge, 1, std::max<std::size_t>(1, stem_count)));
}

namespace {

std::vector<const Stem*> by_rank(std::span<const Stem> stems) {
  std::vector<const Stem*> order;
  for (const Stem& s : stems) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](const Stem* a, const Stem* b) {
    return a->activation_rank < b->activation_rank;
  });
  return order;
}

std::int64_t sample_frame_at(double seconds, int rate) {
  return std::llround(seconds * rate);
}

}  // namespace

LayerSchedule build_layer_schedule(std::span<const Scene> scenes, std::span<const Stem> stems) {
  LayerSchedule schedule;
  if (scenes.empty() || stems.empty()) return schedule;
  const std::vector<const Stem*> order = by_rank(stems);
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const int n = ramp_count(i, scenes.size(), stems.size());
    std::vector<std::string> active;
    for (int k = 0; k < n; ++k) active.push_back(order[static_cast<std::size_t>(k)]->label);
    schedule.active.push_back(std::move(active));
  }
  return schedule;
}

void check_stems(std::span<const Stem> stems) {
  std::set<std::string> labels;
  for (const Stem& s : stems) {
    if (s.audio.samples.empty()) {
      throw Error(ErrorCode::kStemMismatch, "stem '" + s.label + "' has no samples");
    }
    if (s.audio.sample_rate != stems.front().audio.sample_rate ||
        s.audio.channels != stems.front().audio.channels) {
      throw Error(ErrorCode::kStemMismatch,
                  "stem '" + s.label + "' is " + std::to_string(s.audio.sample_rate) + " Hz/" +
                      std::to_string(s.audio.channels) + " ch but '" + stems.front().label +
                      "' is " + std::to_string(stems.front().audio.sample_rate) + " Hz/" +
                      std::to_string(stems.front().audio.channels) + " ch");
    }
    if (!labels.insert(s.label).second) {
      throw Error(ErrorCode::kStemMismatch, "duplicate stem label '" + s.label + "'");
    }
  }
}

PcmAudio mix_stems(const LayerSchedule& schedule, std::span<const Scene> scenes,
                   std::span<const Stem> stems) {
  if (stems.empty()) throw Error(ErrorCode::kStemMismatch, "no stems");
  check_stems(stems);
  if (schedule.active.size() != scenes.size()) {
    throw Error(ErrorCode::kStemMismatch, "schedule covers " + std::to_string(schedule.active.size()) +
                                              " scenes but there are " + std::to_string(scenes.size()));
  }
  PcmAudio out;
  out.sample_rate = stems.front().audio.sample_rate;
  out.channels = stems.front().audio.channels;
  if (scenes.empty()) return out;

  const auto ch = static_cast<std::size_t>(out.channels);
  const std::int64_t total_frames = sample_frame_at(scenes.back().end_s, out.sample_rate);
  std::vector<std::int32_t> acc(static_cast<std::size_t>(total_frames) * ch, 0);
  const kernels::KernelTable& k = kernels::active_kernels();

  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const std::int64_t begin = sample_frame_at(scenes[i].start_s, out.sample_rate);
    const std::int64_t end = std::min(total_frames, sample_frame_at(scenes[i].end_s, out.sample_rate));
    for (const std::string& label : schedule.active[i]) {
      const auto it = std::find_if(stems.begin(), stems.end(),
                                   [&](const Stem& s) { return s.label == label; });
      if (it == stems.end()) throw Error(ErrorCode::kStemMismatch, "unknown stem '" + label + "'");
      const std::vector<std::int16_t>& src = it->audio.samples;
      for (std::int64_t at = begin; at < end;) {
        const std::size_t n = std::min<std::size_t>(src.size() / ch, static_cast<std::size_t>(end - at));
        k.accumulate_i16(src.data(), acc.data() + static_cast<std::size_t>(at) * ch, n * ch);
        at += static_cast<std::int64_t>(n);
      }
    }
  }

  const std::int64_t peak = k.peak_abs_i32(acc.data(), acc.size());
  out.samples.resize(acc.size(), 0);
  if (peak == 0) return out;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    // Round half away from zero; |result| <= kMinusOneDbfsPeak.
    const std::int64_t num = static_cast<std::int64_t>(acc[i]) * kMinusOneDbfsPeak;
    const std::int64_t q = (2 * (num < 0 ? -num : num) + peak) / (2 * peak);
    out.samples[i] = static_cast<std::int16_t>(num < 0 ? -q : q);
  }
  return out;
}

std::vector<Stem> load_stem_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "cannot open stem manifest " + manifest.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, "stem manifest: " + std::string(e.what()));
  }
  if (!doc.is_object() || !doc.contains("stems") || !doc["stems"].is_array()) {
    throw Error(ErrorCode::kInvalidConfig, "stem manifest needs a \"stems\" array");
  }
  std::vector<Stem> stems;
  std::set<int> ranks;
  for (const auto& entry : doc["stems"]) {
    if (!entry.is_object() || !entry.contains("label") || !entry["label"].is_string() ||
        !entry.contains("path") || !entry["path"].is_string()) {
      throw Error(ErrorCode::kInvalidConfig, "every stem needs a string label and path");
    }
    Stem s;
    s.label = entry["label"].get<std::string>();
    s.activation_rank = static_cast<int>(stems.size()) + 1;
    if (entry.contains("activation_rank")) {
      if (!entry["activation_rank"].is_number_integer() || entry["activation_rank"].get<int>() < 1) {
        throw Error(ErrorCode::kInvalidConfig, "stem '" + s.label + "' activation_rank must be >= 1");
      }
      s.activation_rank = entry["activation_rank"].get<int>();
    }
    if (!ranks.insert(s.activation_rank).second) {
      throw Error(ErrorCode::kInvalidConfig,
                  "activation_rank " + std::to_string(s.activation_rank) + " is used twice");
    }
    std::filesystem::path p = entry["path"].get<std::string>();
    if (p.is_relative()) p = manifest.parent_path() / p;
    s.audio = read_wav_file(p);
    stems.push_back(std::move(s));
  }
  if (stems.empty()) throw Error(ErrorCode::kInvalidConfig, "stem manifest lists no stems");
  check_stems(stems);
  return stems;
}

}  // namespace cutscore
