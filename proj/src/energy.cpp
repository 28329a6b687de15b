#include "cutscore/energy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cutscore/error.hpp"

namespace cutscore {

using nlohmann::json;

std::string_view to_string(Direction d) { return d == Direction::kUp ? "up" : "down"; }

std::string_view to_string(Slope s) {
  switch (s) {
    case Slope::kStay: return "stay";
    case Slope::kGradual: return "gradual";
    case Slope::kSteep: return "steep";
  }
  return "?";
}

Direction parse_direction(std::string_view text) {
  if (text == "up") return Direction::kUp;
  if (text == "down") return Direction::kDown;
  throw Error(ErrorCode::kParseError, "unknown direction '" + std::string(text) + "'");
}

Slope parse_slope(std::string_view text) {
  if (text == "stay") return Slope::kStay;
  if (text == "gradual") return Slope::kGradual;
  if (text == "steep") return Slope::kSteep;
  throw Error(ErrorCode::kParseError, "unknown slope '" + std::string(text) + "'");
}

SceneCounts parse_detections(std::string_view text, const SceneList& scenes) {
  const auto malformed = [](const std::string& what) {
    return Error(ErrorCode::kMalformedDetections, what);
  };
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw malformed(std::string("detections document: ") + e.what());
  }

  SceneCounts counts;
  try {
    if (doc.contains("per_scene")) {
      for (const auto& [key, value] : doc.at("per_scene").items()) {
        std::size_t used = 0;
        unsigned long id = 0;
        try {
          id = std::stoul(key, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != key.size() || key.empty()) throw malformed("bad scene id '" + key + "'");
        if (id >= scenes.scenes.size()) throw malformed("unknown scene id " + key);
        const double c = value.get<double>();
        if (!(c >= 0.0) || !std::isfinite(c)) throw malformed("negative count for scene " + key);
        counts[static_cast<std::uint32_t>(id)] = c;
      }
    } else if (doc.contains("per_frame")) {
      std::map<std::uint32_t, std::pair<double, std::uint64_t>> sums;
      for (const auto& rec : doc.at("per_frame")) {
        const auto frame = rec.at("frame").get<std::int64_t>();
        const double c = rec.at("count").get<double>();
        if (frame < 0 || static_cast<std::uint64_t>(frame) >= scenes.total_frames) {
          throw malformed("frame " + std::to_string(frame) + " outside the video");
        }
        if (!(c >= 0.0) || !std::isfinite(c)) {
          throw malformed("negative count at frame " + std::to_string(frame));
        }
        const auto it = std::upper_bound(
            scenes.scenes.begin(), scenes.scenes.end(), static_cast<std::uint64_t>(frame),
            [](std::uint64_t f, const Scene& s) { return f < s.end_frame; });
        auto& [sum, n] = sums[it->id];
        sum += c;
        ++n;
      }
      for (const auto& [id, acc] : sums) {
        counts[id] = std::floor(acc.first / static_cast<double>(acc.second) + 0.5);
      }
    } else {
      throw malformed("expected a per_scene or per_frame object");
    }
  } catch (const json::exception& e) {
    throw malformed(std::string("detections document: ") + e.what());
  }

  for (const Scene& s : scenes.scenes) {
    if (!counts.contains(s.id)) {
      throw Error(ErrorCode::kIncompleteDetections,
                  "no detections for scene " + std::to_string(s.id));
    }
  }
  return counts;
}

SceneCounts load_detections(const std::filesystem::path& path, const SceneList& scenes) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMalformedDetections, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_detections(ss.str(), scenes);
}

namespace {

bool all_integral(std::span<const double> counts) {
  return std::all_of(counts.begin(), counts.end(), [](double c) {
    return c >= 0.0 && c <= 2147483647.0 && std::floor(c) == c;
  });
}

// With n values, S = sum, Q = sum of squares and t = n*c - S:
//   c <  mean - std  <=>  t < 0 and t^2 >  n*Q - S^2
//   c >= mean + std  <=>  t >= 0 and t^2 >= n*Q - S^2
std::vector<Energy> classify_exact(std::span<const double> counts) {
  using I = __int128;
  const I n = static_cast<I>(counts.size());
  I sum = 0;
  I sum_sq = 0;
  for (double c : counts) {
    const I v = static_cast<I>(c);
    sum += v;
    sum_sq += v * v;
  }
  const I spread = n * sum_sq - sum * sum;  // n^2 * variance
  std::vector<Energy> out;
  out.reserve(counts.size());
  for (double c : counts) {
    const I t = n * static_cast<I>(c) - sum;
    if (t < 0 && t * t > spread) {
      out.push_back(Energy::kLow);
    } else if (t >= 0 && t * t >= spread) {
      out.push_back(Energy::kHigh);
    } else {
      out.push_back(Energy::kMedium);
    }
  }
  return out;
}

std::vector<Energy> classify_real(std::span<const double> counts) {
  long double sum = 0;
  for (double c : counts) sum += c;
  const long double mean = sum / static_cast<long double>(counts.size());
  long double var = 0;
  for (double c : counts) var += (c - mean) * (c - mean);
  const long double sd = std::sqrt(var / static_cast<long double>(counts.size()));
  std::vector<Energy> out;
  out.reserve(counts.size());
  for (double c : counts) {
    if (c < mean - sd) {
      out.push_back(Energy::kLow);
    } else if (c >= mean + sd) {
      out.push_back(Energy::kHigh);
    } else {
      out.push_back(Energy::kMedium);
    }
  }
  return out;
}

}  // namespace

std::vector<Energy> classify_energy(std::span<const double> counts) {
  if (counts.empty()) throw Error(ErrorCode::kEmptyInput, "no scene counts to classify");
  for (double c : counts) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw Error(ErrorCode::kMalformedDetections, "counts must be finite and non-negative");
    }
  }
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  if (*lo == *hi) return std::vector<Energy>(counts.size(), Energy::kMedium);
  return all_integral(counts) ? classify_exact(counts) : classify_real(counts);
}

std::map<std::uint32_t, Energy> classify_energy(const SceneCounts& counts) {
  std::vector<double> values;
  values.reserve(counts.size());
  for (const auto& [id, c] : counts) values.push_back(c);
  const std::vector<Energy> labels = classify_energy(values);
  std::map<std::uint32_t, Energy> out;
  std::size_t i = 0;
  for (const auto& [id, c] : counts) out[id] = labels[i++];
  return out;
}

TempoRange assign_tempo_band(Energy label, const TempoRange& mood_range) {
  const int width = mood_range.hi - mood_range.lo;
  const int cut1 = mood_range.lo + width / 3;
  const int cut2 = mood_range.lo + (2 * width) / 3;
  switch (label) {
    case Energy::kLow: return {mood_range.lo, cut1};
    case Energy::kMedium: return {cut1, cut2};
    case Energy::kHigh: return {cut2, mood_range.hi};
  }
  return mood_range;
}

DirectionSlope direction_slope_for(Energy current, Energy next) {
  switch (rank(next) - rank(current)) {
    case 1: return {Direction::kUp, Slope::kGradual};
    case 2: return {Direction::kUp, Slope::kSteep};
    case -1: return {Direction::kDown, Slope::kGradual};
    case -2: return {Direction::kDown, Slope::kSteep};
    default: return {Direction::kUp, Slope::kStay};
  }
}

std::vector<DirectionSlope> choose_direction_slope(std::span<const Energy> labels) {
  if (labels.empty()) throw Error(ErrorCode::kEmptyInput, "no energy labels");
  std::vector<DirectionSlope> out;
  out.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Energy next = i + 1 < labels.size() ? labels[i + 1] : labels[i];
    out.push_back(direction_slope_for(labels[i], next));
  }
  return out;
}

}  // namespace cutscore
