#include "cutscore/planner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "cutscore/error.hpp"
#include "cutscore/ini.hpp"
#include "cutscore/rng.hpp"

namespace cutscore {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::kIntro: return "intro";
    case Role::kVerse: return "verse";
    case Role::kChorus: return "chorus";
    case Role::kCoda: return "coda";
  }
  return "?";
}

Role parse_role(std::string_view text) {
  if (text == "intro") return Role::kIntro;
  if (text == "verse") return Role::kVerse;
  if (text == "chorus") return Role::kChorus;
  if (text == "coda") return Role::kCoda;
  throw Error(ErrorCode::kParseError, "unknown role '" + std::string(text) + "'");
}

std::string_view to_string(PlannerMode m) {
  return m == PlannerMode::kGlobal ? "global" : "per-scene-energy";
}

PlannerMode parse_planner_mode(std::string_view text) {
  if (text == "global") return PlannerMode::kGlobal;
  if (text == "per-scene-energy") return PlannerMode::kPerSceneEnergy;
  throw Error(ErrorCode::kInvalidConfig, "unknown planner mode '" + std::string(text) + "'");
}

double phrase_seconds(int phrase_bars, const TimeSignature& ts, double bpm) {
  return phrase_bars * ts.bar_seconds(bpm);
}

double fit_tolerance(const Fps& fps) {
  return std::min(kMaxFitTolerance, 0.5 * fps.frame_period_s());
}

double SectionSpec::realized_duration_s(int phrase_bars) const {
  return phrases * phrase_seconds(phrase_bars, time_signature, tempo);
}

std::vector<DraftSection> sections_from_scenes(std::span<const Scene> scenes) {
  if (scenes.empty()) throw Error(ErrorCode::kEmptyInput, "no scenes to map to sections");
  std::vector<DraftSection> out;
  out.reserve(scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    Role role;
    if (i == 0) {
      role = Role::kIntro;
    } else if (i + 1 == scenes.size()) {
      role = Role::kCoda;
    } else {
      role = (i % 2 == 1) ? Role::kVerse : Role::kChorus;
    }
    out.push_back({static_cast<std::uint32_t>(i), scenes[i].duration_s(), role});
  }
  return out;
}

namespace {

constexpr std::uint64_t kGlobalTempoStream = ~std::uint64_t{0};

std::vector<TimeSignature> sorted_signatures(const MoodConfig& mood) {
  std::vector<TimeSignature> sigs = mood.time_signatures;
  std::sort(sigs.begin(), sigs.end());
  sigs.erase(std::unique(sigs.begin(), sigs.end()), sigs.end());
  return sigs;
}

}  // namespace

std::vector<Fit> enumerate_fits(double duration_s, const MoodConfig& mood, double tolerance_s) {
  std::vector<Fit> fits;
  if (!(duration_s > 0.0)) return fits;
  const std::vector<TimeSignature> sigs = sorted_signatures(mood);
  for (int tempo = mood.tempo_range.lo; tempo <= mood.tempo_range.hi; ++tempo) {
    for (const TimeSignature& ts : sigs) {
      const double phrase = phrase_seconds(mood.phrase_length_bars, ts, tempo);
      const double p = std::round(duration_s / phrase);
      if (p < 1.0) continue;
      if (std::abs(p * phrase - duration_s) <= tolerance_s) {
        fits.push_back({tempo, ts, static_cast<int>(p)});
      }
    }
  }
  return fits;
}

std::vector<std::vector<Fit>> harmonize_tempo(std::span<const std::vector<Fit>> per_section_fits,
                                              PlannerMode mode, std::span<const Energy> energies,
                                              const MoodConfig& mood) {
  std::vector<std::vector<Fit>> out;
  out.reserve(per_section_fits.size());
  if (mode == PlannerMode::kGlobal) {
    std::set<int> shared;
    for (std::size_t i = 0; i < per_section_fits.size(); ++i) {
      std::set<int> tempos;
      for (const Fit& f : per_section_fits[i]) tempos.insert(f.tempo);
      if (i == 0) {
        shared = std::move(tempos);
      } else {
        std::set<int> next;
        std::set_intersection(shared.begin(), shared.end(), tempos.begin(), tempos.end(),
                              std::inserter(next, next.begin()));
        shared = std::move(next);
      }
    }
    if (shared.empty() && !per_section_fits.empty()) {
      throw Error(ErrorCode::kNoConsistentTempo,
                  "no tempo fits every section exactly; try per-scene-energy mode");
    }
    for (const auto& fits : per_section_fits) {
      std::vector<Fit> kept;
      std::copy_if(fits.begin(), fits.end(), std::back_inserter(kept),
                   [&](const Fit& f) { return shared.contains(f.tempo); });
      out.push_back(std::move(kept));
    }
    return out;
  }

  if (energies.size() != per_section_fits.size()) {
    throw Error(ErrorCode::kInconsistentPlan, "one energy label per section is required");
  }
  for (std::size_t i = 0; i < per_section_fits.size(); ++i) {
    const TempoRange band = assign_tempo_band(energies[i], mood);
    std::vector<Fit> kept;
    std::copy_if(per_section_fits[i].begin(), per_section_fits[i].end(), std::back_inserter(kept),
                 [&](const Fit& f) { return band.contains(f.tempo); });
    out.push_back(kept.empty() ? per_section_fits[i] : std::move(kept));
  }
  return out;
}

CompositionPlan finalize_plan(std::span<const DraftSection> sections,
                              std::span<const std::vector<Fit>> candidates,
                              std::span<const Energy> energies,
                              std::span<const DirectionSlope> direction_slopes,
                              const MoodConfig& mood, Complexity complexity,
                              std::uint64_t rng_seed) {
  if (candidates.size() != sections.size() || energies.size() != sections.size() ||
      direction_slopes.size() != sections.size()) {
    throw Error(ErrorCode::kInconsistentPlan, "per-section inputs differ in length");
  }
  CompositionPlan plan;
  plan.mood = mood.name;
  plan.complexity = complexity;
  plan.rng_seed = rng_seed;
  plan.phrase_bars = mood.phrase_length_bars;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    const DraftSection& draft = sections[i];
    if (candidates[i].empty()) {
      std::ostringstream msg;
      msg << "section " << draft.section_id << " (" << draft.duration_s
          << " s) has no whole-phrase tempo/meter fit in mood '" << mood.name << "'";
      throw Error(ErrorCode::kUnplannableSection, msg.str());
    }
    Rng rng = Rng::for_stream(rng_seed, draft.section_id);
    const Fit& pick = candidates[i][rng.below(candidates[i].size())];
    SectionSpec spec;
    spec.section_id = draft.section_id;
    spec.time_signature = pick.time_signature;
    spec.tempo = pick.tempo;
    spec.energy = energies[i];
    spec.duration_s = draft.duration_s;
    spec.phrases = pick.phrases;
    spec.direction = direction_slopes[i].direction;
    spec.slope = direction_slopes[i].slope;
    plan.sections.push_back(spec);
    plan.roles.push_back(draft.role);
    plan.total_duration_s += draft.duration_s;
  }
  return plan;
}

PlanResult plan_composition(std::span<const Scene> scenes, std::span<const Energy> energies,
                            const MoodConfig& mood, const PlannerOptions& options) {
  const std::vector<DraftSection> drafts = sections_from_scenes(scenes);
  if (energies.size() != drafts.size()) {
    throw Error(ErrorCode::kInconsistentPlan, "one energy label per scene is required");
  }
  std::vector<std::vector<Fit>> fits;
  fits.reserve(drafts.size());
  for (const DraftSection& d : drafts) {
    fits.push_back(enumerate_fits(d.duration_s, mood, options.tolerance_s));
    if (fits.back().empty()) {
      std::ostringstream msg;
      msg << "section " << d.section_id << " (" << d.duration_s
          << " s) has no whole-phrase tempo/meter fit within " << options.tolerance_s * 1000.0
          << " ms in mood '" << mood.name << "'";
      throw Error(ErrorCode::kUnplannableSection, msg.str());
    }
  }

  PlanResult result;
  result.mode_used = options.mode;
  std::vector<std::vector<Fit>> candidates;
  try {
    candidates = harmonize_tempo(fits, options.mode, energies, mood);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoConsistentTempo || !options.fallback_to_energy_mode) throw;
    result.mode_used = PlannerMode::kPerSceneEnergy;
    candidates = harmonize_tempo(fits, PlannerMode::kPerSceneEnergy, energies, mood);
  }
  if (result.mode_used == PlannerMode::kGlobal) {
    // One tempo for the whole piece, drawn on its own stream so the
    // per-section draws stay keyed by section id.
    std::set<int> shared;
    for (const Fit& f : candidates.front()) shared.insert(f.tempo);
    Rng rng = Rng::for_stream(options.rng_seed, kGlobalTempoStream);
    const int tempo = *std::next(shared.begin(), static_cast<std::ptrdiff_t>(rng.below(shared.size())));
    for (auto& c : candidates) {
      std::erase_if(c, [&](const Fit& f) { return f.tempo != tempo; });
    }
  }
  const std::vector<DirectionSlope> ds = choose_direction_slope(energies);
  result.plan = finalize_plan(drafts, candidates, energies, ds, mood, options.complexity,
                              options.rng_seed);
  return result;
}

void validate_plan(const CompositionPlan& plan) {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInconsistentPlan, what);
  };
  if (plan.sections.empty()) fail("plan has no sections");
  if (plan.roles.size() != plan.sections.size()) fail("one role per section is required");
  if (plan.phrase_bars < 1) fail("phrase_bars must be positive");
  if (plan.roles.front() != Role::kIntro) fail("first section must be the intro");
  if (plan.sections.size() > 1 && plan.roles.back() != Role::kCoda) {
    fail("last section must be the coda");
  }
  double sum = 0.0;
  bool ranged = false;
  for (std::size_t i = 0; i < plan.sections.size(); ++i) {
    const SectionSpec& s = plan.sections[i];
    if (s.section_id != i) fail("section ids must be consecutive from 0");
    if (s.duration_range) {
      ranged = true;
      continue;
    }
    if (!(s.duration_s > 0.0)) fail("section " + std::to_string(i) + " has no duration");
    if (s.tempo < 1 || s.phrases < 1) {
      fail("section " + std::to_string(i) + " needs a positive tempo and phrase count");
    }
    if (std::abs(s.realized_duration_s(plan.phrase_bars) - s.duration_s) >
        kMaxFitTolerance + 1e-9) {
      fail("section " + std::to_string(i) +
           " duration does not match its tempo, time signature and phrase count");
    }
    sum += s.duration_s;
  }
  if (!ranged &&
      std::abs(sum - plan.total_duration_s) >
          kMaxFitTolerance * static_cast<double>(plan.sections.size()) + 1e-9) {
    fail("section durations do not add up to the composition duration");
  }
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string plan_to_ini(const CompositionPlan& plan) {
  std::ostringstream out;
  out << "[composition]\n";
  out << "duration = " << format_double(plan.total_duration_s) << "\n";
  out << "mood = " << plan.mood << "\n";
  out << "complexity = " << to_string(plan.complexity) << "\n";
  out << "seed = " << plan.rng_seed << "\n";
  out << "phrase_bars = " << plan.phrase_bars << "\n";
  for (std::size_t i = 0; i < plan.sections.size(); ++i) {
    const SectionSpec& s = plan.sections[i];
    out << "\n[section" << s.section_id << "]\n";
    if (i < plan.roles.size()) out << "role = " << to_string(plan.roles[i]) << "\n";
    out << "time_sig = " << to_string(s.time_signature) << "\n";
    out << "tempo = " << s.tempo << "\n";
    out << "energy = " << to_string(s.energy) << "\n";
    if (s.duration_range) {
      out << "duration = " << format_double(s.duration_range->first) << " to "
          << format_double(s.duration_range->second) << "\n";
    } else {
      out << "duration = " << format_double(s.duration_s) << "\n";
    }
    out << "phrases = " << s.phrases << "\n";
    out << "direction = " << to_string(s.direction) << "\n";
    out << "slope = " << to_string(s.slope) << "\n";
  }
  return out.str();
}

namespace {

[[noreturn]] void line_error(int line, const std::string& what) {
  throw Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(const ini::Entry& e) {
  T value{};
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    line_error(e.line, "bad numeric value for '" + e.key + "': " + e.value);
  }
  return value;
}

// Re-throws vocabulary errors with the offending line attached.
template <typename F>
auto with_line(const ini::Entry& e, F&& parse) {
  try {
    return parse(e.value);
  } catch (const Error& err) {
    const std::string what = err.what();
    line_error(e.line, what.substr(what.find(": ") + 2));
  }
}

}  // namespace

CompositionPlan parse_ini(std::string_view text) {
  const ini::Document doc = ini::parse(text);
  CompositionPlan plan;
  if (doc.blocks.empty() || doc.blocks.front().name != "composition") {
    line_error(doc.blocks.empty() ? 1 : std::max(doc.blocks.front().line, 1),
               "plan must start with a [composition] block");
  }

  const ini::Block& global = doc.blocks.front();
  std::set<std::string> seen;
  for (const ini::Entry& e : global.entries) {
    seen.insert(e.key);
    if (e.key == "duration") {
      plan.total_duration_s = parse_number<double>(e);
    } else if (e.key == "mood") {
      if (e.value.empty()) line_error(e.line, "empty mood");
      plan.mood = e.value;
    } else if (e.key == "complexity") {
      plan.complexity = with_line(e, [](const std::string& v) { return parse_complexity(v); });
    } else if (e.key == "seed") {
      plan.rng_seed = parse_number<std::uint64_t>(e);
    } else if (e.key == "phrase_bars") {
      plan.phrase_bars = parse_number<int>(e);
      if (plan.phrase_bars < 1) line_error(e.line, "phrase_bars must be positive");
    } else {
      line_error(e.line, "unknown key '" + e.key + "' in [composition]");
    }
  }
  for (const char* required : {"duration", "mood", "complexity"}) {
    if (!seen.contains(required)) {
      line_error(global.line, std::string("[composition] is missing '") + required + "'");
    }
  }

  std::vector<bool> has_role;
  for (std::size_t b = 1; b < doc.blocks.size(); ++b) {
    const ini::Block& block = doc.blocks[b];
    const std::string expected = "section" + std::to_string(b - 1);
    if (block.name.rfind("section", 0) != 0) {
      line_error(block.line, "unknown block [" + block.name + "]");
    }
    if (block.name != expected) {
      line_error(block.line, "section ids must be consecutive from 0: expected [" + expected +
                                 "], found [" + block.name + "]");
    }
    SectionSpec s;
    s.section_id = static_cast<std::uint32_t>(b - 1);
    Role role = Role::kVerse;
    bool role_given = false;
    std::set<std::string> keys;
    for (const ini::Entry& e : block.entries) {
      keys.insert(e.key);
      if (e.key == "role") {
        role = with_line(e, [](const std::string& v) { return parse_role(v); });
        role_given = true;
      } else if (e.key == "time_sig") {
        s.time_signature =
            with_line(e, [](const std::string& v) { return parse_time_signature(v); });
      } else if (e.key == "tempo") {
        s.tempo = parse_number<int>(e);
        if (s.tempo < 1) line_error(e.line, "tempo must be positive");
      } else if (e.key == "energy") {
        s.energy = with_line(e, [](const std::string& v) { return parse_energy(v); });
      } else if (e.key == "duration") {
        const auto to = e.value.find(" to ");
        if (to == std::string::npos) {
          s.duration_s = parse_number<double>(e);
          if (!(s.duration_s > 0.0)) line_error(e.line, "duration must be positive");
        } else {
          ini::Entry lo = e;
          ini::Entry hi = e;
          lo.value = e.value.substr(0, to);
          hi.value = e.value.substr(to + 4);
          const auto trim = [](std::string& v) {
            while (!v.empty() && v.back() == ' ') v.pop_back();
            while (!v.empty() && v.front() == ' ') v.erase(v.begin());
          };
          trim(lo.value);
          trim(hi.value);
          const double a = parse_number<double>(lo);
          const double z = parse_number<double>(hi);
          if (!(a > 0.0) || !(a <= z)) line_error(e.line, "duration range must satisfy 0 < a <= b");
          s.duration_range = std::make_pair(a, z);
        }
      } else if (e.key == "phrases") {
        s.phrases = parse_number<int>(e);
        if (s.phrases < 1) line_error(e.line, "phrases must be positive");
      } else if (e.key == "direction") {
        s.direction = with_line(e, [](const std::string& v) { return parse_direction(v); });
      } else if (e.key == "slope") {
        s.slope = with_line(e, [](const std::string& v) { return parse_slope(v); });
      } else {
        line_error(e.line, "unknown key '" + e.key + "' in [" + block.name + "]");
      }
    }
    std::vector<std::string> required{"energy", "duration", "direction", "slope"};
    if (!s.duration_range) {
      required.insert(required.end(), {"time_sig", "tempo", "phrases"});
    }
    for (const std::string& key : required) {
      if (!keys.contains(key)) {
        line_error(block.line, "[" + block.name + "] is missing '" + key + "'");
      }
    }
    plan.sections.push_back(s);
    plan.roles.push_back(role);
    has_role.push_back(role_given);
  }
  if (plan.sections.empty()) line_error(global.line, "plan has no [section0] block");

  // Roles default to their structural position.
  const std::size_t n = plan.sections.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (has_role[i]) continue;
    if (i == 0) {
      plan.roles[i] = Role::kIntro;
    } else if (i + 1 == n) {
      plan.roles[i] = Role::kCoda;
    } else {
      plan.roles[i] = i % 2 == 1 ? Role::kVerse : Role::kChorus;
    }
  }

  try {
    validate_plan(plan);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  return plan;
}

void resolve_duration_ranges(CompositionPlan& plan, const MoodConfig& mood) {
  const std::vector<TimeSignature> sigs = sorted_signatures(mood);
  bool changed = false;
  for (SectionSpec& s : plan.sections) {
    if (!s.duration_range) continue;
    const auto [lo, hi] = *s.duration_range;
    std::vector<Fit> options;
    for (int tempo = mood.tempo_range.lo; tempo <= mood.tempo_range.hi; ++tempo) {
      if (s.tempo > 0 && tempo != s.tempo) continue;
      for (const TimeSignature& ts : sigs) {
        const double phrase = phrase_seconds(plan.phrase_bars, ts, tempo);
        for (int p = std::max(1, static_cast<int>(std::ceil(lo / phrase)));
             p * phrase <= hi + 1e-9; ++p) {
          if (p * phrase >= lo - 1e-9) options.push_back({tempo, ts, p});
        }
      }
    }
    if (options.empty()) {
      std::ostringstream msg;
      msg << "section " << s.section_id << " has no whole-phrase fit in " << lo << " to " << hi
          << " s";
      throw Error(ErrorCode::kUnplannableSection, msg.str());
    }
    Rng rng = Rng::for_stream(plan.rng_seed, s.section_id);
    const Fit& pick = options[rng.below(options.size())];
    s.tempo = pick.tempo;
    s.time_signature = pick.time_signature;
    s.phrases = pick.phrases;
    s.duration_s = s.realized_duration_s(plan.phrase_bars);
    s.duration_range.reset();
    changed = true;
  }
  if (changed) {
    plan.total_duration_s = 0.0;
    for (const SectionSpec& s : plan.sections) plan.total_duration_s += s.duration_s;
  }
  validate_plan(plan);
}

}  // namespace cutscore
