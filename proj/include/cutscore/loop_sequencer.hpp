#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cutscore/scene_detect.hpp"
#include "cutscore/wav.hpp"

namespace cutscore {

struct Stem {
  std::string label;
  PcmAudio audio;
  int activation_rank = 1;
};

// Active stem labels per scene, in activation order.
struct LayerSchedule {
  std::vector<std::vector<std::string>> active;

  std::vector<int> counts() const;
};

// Peak target: floor(32767 * 10^(-1/20)).
inline constexpr std::int32_t kMinusOneDbfsPeak = 29203;

// Count for scene i of n: 1 + min(i, n - 1 - i), capped at the stem count.
// Rises by one per scene to the middle scene (or middle pair) and falls
// symmetrically.
int ramp_count(std::size_t scene_index, std::size_t scene_count, std::size_t stem_count);

// Stems enter in activation_rank order and leave in reverse.
LayerSchedule build_layer_schedule(std::span<const Scene> scenes, std::span<const Stem> stems);

// Throws kStemMismatch when stems disagree on rate or channel count or one
// is empty.
void check_stems(std::span<const Stem> stems);

// Each active stem restarts at its first sample at every scene start and
// loops until the scene ends; sums accumulate in 32 bits and the result is
// scaled so its peak sits at -1 dBFS. Scene boundaries and the total length
// are rounded to the nearest sample frame.
PcmAudio mix_stems(const LayerSchedule& schedule, std::span<const Scene> scenes,
                   std::span<const Stem> stems);

// {"stems": [{"label": "...", "path": "...", "activation_rank": 1}, ...]}
// Relative paths resolve against the manifest's directory.
std::vector<Stem> load_stem_manifest(const std::filesystem::path& manifest);

}  // namespace cutscore
