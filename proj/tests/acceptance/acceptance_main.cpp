// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "cutscore/composer.hpp"
#include "cutscore/energy.hpp"
#include "cutscore/error.hpp"
#include "cutscore/frame.hpp"
#include "cutscore/loop_sequencer.hpp"
#include "cutscore/midi.hpp"
#include "cutscore/pipeline.hpp"
#include "cutscore/planner.hpp"
#include "cutscore/scene_detect.hpp"
#include "fixtures.hpp"

namespace {

using namespace cutscore;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure; later checks still run for the summary.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      ++failures_;
      if (first_.empty()) first_ = what;
    }
  }
  bool ok() const { return failures_ == 0; }
  std::string failure() const { return first_ + (failures_ > 1 ? " (+" + std::to_string(failures_ - 1) + " more)" : ""); }

 private:
  int failures_ = 0;
  std::string first_;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<MoodConfig> all_moods() {
  const fs::path dir = fs::path(CUTSCORE_TEST_DATA_DIR) / "moods";
  std::vector<MoodConfig> out;
  for (const std::string& name : list_mood_presets(dir)) out.push_back(load_mood_preset(dir, name));
  return out;
}

std::vector<Scene> scenes_from_frames(const std::vector<std::uint64_t>& lengths, Fps fps) {
  std::vector<Scene> out;
  std::uint64_t at = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    Scene s;
    s.id = static_cast<std::uint32_t>(i);
    s.start_frame = at;
    s.end_frame = at + lengths[i];
    s.start_s = static_cast<double>(s.start_frame) * fps.den / fps.num;
    s.end_s = static_cast<double>(s.end_frame) * fps.den / fps.num;
    at = s.end_frame;
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome detector_fidelity() {
  Checker c;
  std::mt19937_64 rng(640360);
  const FrameSpec spec{640, 360, {30, 1}};
  const DetectorConfig config;  // fade 12, cut 30
  std::size_t truth_boundaries = 0;
  std::size_t found = 0;
  std::size_t false_pos = 0;
  double worst_per_300 = 0;
  double min_cut_delta = 1e9;

  testing::TempDir dir;
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<testing::Shot> shots = testing::random_shots(rng, 6, 35, 60, 0.5);
    for (auto& s : shots) s.black_frames = 5 + static_cast<std::uint32_t>(rng() % 4);
    const testing::SyntheticVideo video(spec, shots);
    const testing::VideoTruth& truth = video.truth();

    // Timed through the raw-stream reader, the path the CLI uses.
    const fs::path stream = video.write_raw(dir.path(), "v" + std::to_string(trial));
    const auto t0 = Clock::now();
    auto source = open_frame_source(RawStreamSource{stream, {}});
    const std::vector<FrameStats> stats = compute_stats(*source);
    const std::vector<Scene> scenes = detect_scenes(stats, spec.fps, config);
    const double elapsed = seconds_since(t0);
    fs::remove(stream);
    worst_per_300 = std::max(worst_per_300, elapsed * 300.0 / static_cast<double>(stats.size()));

    c.expect(detect_cuts(stats, config) == truth.cuts, "cut indices differ in trial " + std::to_string(trial));
    c.expect(detect_fades(stats, config) == truth.fades, "fade intervals differ in trial " + std::to_string(trial));
    for (std::uint64_t f : truth.cuts) min_cut_delta = std::min(min_cut_delta, *stats[f].hsv_delta);
    for (const FadeInterval& f : truth.fades) c.expect(f.end_frame - f.start_frame >= 5, "fixture fade shorter than 5 frames");

    std::set<std::uint64_t> want(truth.boundaries.begin(), truth.boundaries.end());
    std::set<std::uint64_t> got;
    for (std::size_t i = 1; i < scenes.size(); ++i) got.insert(scenes[i].start_frame);
    truth_boundaries += want.size();
    for (auto b : want) found += got.count(b);
    for (auto b : got) false_pos += want.count(b) == 0 ? 1 : 0;
  }
  c.expect(min_cut_delta >= 60, "a fixture cut has HSV delta below 60");
  c.expect(found == truth_boundaries, "recall below 100%");
  c.expect(false_pos == 0, "false positives");
  c.expect(worst_per_300 < 5.0, "over 5 s per 300 frames");
  std::string detail = "recall " + std::to_string(found) + "/" + std::to_string(truth_boundaries) +
                       ", false positives " + std::to_string(false_pos) + ", min cut delta " +
                       fmt(min_cut_delta, 1) + ", " + fmt(worst_per_300) + " s per 300 frames at 640x360";
  return {c.ok(), c.ok() ? detail : c.failure() + "; " + detail};
}

// ---------------------------------------------------------------------------

std::vector<Fit> brute_force_fits(double duration, const MoodConfig& mood, double tol) {
  std::set<TimeSignature> sigs(mood.time_signatures.begin(), mood.time_signatures.end());
  std::vector<Fit> out;
  for (int t = mood.tempo_range.lo; t <= mood.tempo_range.hi; ++t) {
    for (const TimeSignature& ts : sigs) {
      const long double phrase =
          static_cast<long double>(mood.phrase_length_bars) * ts.beats * 4.0L / ts.unit * 60.0L / t;
      for (int p = 1; p * phrase <= duration + phrase; ++p) {
        if (std::fabs(static_cast<long double>(p) * phrase - duration) <= tol) out.push_back({t, ts, p});
      }
    }
  }
  return out;
}

Outcome solver_correctness() {
  Checker c;
  const std::vector<MoodConfig> moods = all_moods();
  std::mt19937_64 rng(200);
  std::size_t fits_seen = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const MoodConfig& mood = moods[rng() % moods.size()];
    double duration = 5 + std::uniform_real_distribution<double>(0, 115)(rng);
    if (trial % 2 == 0) {
      // Snap to a whole frame so most instances have fits.
      duration = std::round(duration * 30) / 30;
    }
    const auto got = enumerate_fits(duration, mood, kMaxFitTolerance);
    fits_seen += got.size();
    c.expect(got == brute_force_fits(duration, mood, kMaxFitTolerance),
             "fit list differs for " + fmt(duration, 4) + " s, mood " + mood.name);
  }

  // Realized durations and residuals on planned scene lists.
  const Fps fps{30, 1};
  const double frame = 1.0 / 30;
  int planned = 0;
  int over_frame = 0;
  double worst_section = 0;
  double worst_total = 0;
  for (int trial = 0; trial < 4000 && planned < 200; ++trial) {
    const MoodConfig& mood = moods[rng() % moods.size()];
    std::vector<std::uint64_t> lengths(1 + rng() % 6);
    for (auto& l : lengths) l = 30 * (5 + rng() % 40);
    const auto scenes = scenes_from_frames(lengths, fps);
    std::vector<Energy> energies;
    for (std::size_t i = 0; i < scenes.size(); ++i) energies.push_back(static_cast<Energy>(1 + rng() % 3));
    PlannerOptions opt;
    opt.rng_seed = rng();
    opt.mode = trial % 2 ? PlannerMode::kGlobal : PlannerMode::kPerSceneEnergy;
    opt.tolerance_s = fit_tolerance(fps);
    CompositionPlan plan;
    try {
      plan = plan_composition(scenes, energies, mood, opt).plan;
    } catch (const Error&) {
      continue;
    }
    ++planned;
    double total = 0;
    for (std::size_t i = 0; i < plan.sections.size(); ++i) {
      const double r = plan.sections[i].realized_duration_s(plan.phrase_bars) - scenes[i].duration_s();
      worst_section = std::max(worst_section, std::abs(r));
      total += r;
    }
    worst_total = std::max(worst_total, std::abs(total));
    if (std::abs(total) > frame) ++over_frame;
  }
  c.expect(fits_seen > 0, "no instance produced any fit");
  c.expect(planned >= 100, "fewer than 100 plannable scene lists");
  c.expect(worst_section <= kMaxFitTolerance + 1e-9, "a section misses its target by over 10 ms");
  c.expect(over_frame == 0, std::to_string(over_frame) + "/" + std::to_string(planned) +
                                " plans exceed a one-frame total residual");
  const std::string detail = "200/200 instances match brute force (" + std::to_string(fits_seen) +
                             " fits); " + std::to_string(planned) + " plans, worst section residual " +
                             fmt(worst_section * 1000, 2) + " ms, worst total residual " +
                             fmt(worst_total * 1000, 2) + " ms (frame " + fmt(frame * 1000, 2) + " ms)";
  return {c.ok(), c.ok() ? detail : c.failure() + "; " + detail};
}

// ---------------------------------------------------------------------------

// Exact integer labelling: with d = n*x - S and V = n*Q - S^2 (n^2 times the
// variance), x < mean - sd iff d < 0 and d^2 > V; x >= mean + sd iff d >= 0
// and d^2 >= V.
std::vector<Energy> exact_labels(const std::vector<std::int64_t>& x) {
  const auto n = static_cast<__int128>(x.size());
  __int128 s = 0;
  __int128 q = 0;
  for (auto v : x) {
    s += v;
    q += static_cast<__int128>(v) * v;
  }
  const __int128 var = n * q - s * s;
  std::vector<Energy> out;
  for (auto v : x) {
    const __int128 d = n * v - s;
    if (var == 0) {
      out.push_back(Energy::kMedium);
    } else if (d < 0 && d * d > var) {
      out.push_back(Energy::kLow);
    } else if (d >= 0 && d * d >= var) {
      out.push_back(Energy::kHigh);
    } else {
      out.push_back(Energy::kMedium);
    }
  }
  return out;
}

Outcome energy_classification() {
  Checker c;
  std::mt19937_64 rng(1000);
  int degenerate = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::int64_t> x;
    if (trial % 10 == 0) {
      x.assign(1 + rng() % 20, static_cast<std::int64_t>(rng() % 50));  // all equal
      ++degenerate;
    } else if (trial % 10 == 1) {
      x.assign(1, static_cast<std::int64_t>(rng() % 50));  // single element
      ++degenerate;
    } else {
      x.resize(2 + rng() % 60);
      const std::int64_t span = 1 + static_cast<std::int64_t>(rng() % 1000);
      for (auto& v : x) v = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(span));
    }
    std::vector<double> counts(x.begin(), x.end());
    const std::vector<Energy> got = classify_energy(counts);
    c.expect(got == exact_labels(x), "labels differ in vector " + std::to_string(trial));

    const double a = static_cast<double>(1 + rng() % 12);
    const double b = static_cast<double>(rng() % 500);
    std::vector<double> scaled;
    for (double v : counts) scaled.push_back(a * v + b);
    std::multiset<Energy> m1(got.begin(), got.end());
    const std::vector<Energy> after = classify_energy(scaled);
    c.expect(m1 == std::multiset<Energy>(after.begin(), after.end()),
             "affine rescaling changed labels in vector " + std::to_string(trial));
  }
  const std::string detail = "1000/1000 vectors match the exact mean/sd oracle (" +
                             std::to_string(degenerate) + " degenerate), affine rescaling invariant";
  return {c.ok(), c.ok() ? detail : c.failure()};
}

// ---------------------------------------------------------------------------

Outcome direction_slope_table() {
  Checker c;
  const Energy levels[] = {Energy::kLow, Energy::kMedium, Energy::kHigh};
  // Written out by hand, indexed by next - current + 2.
  const DirectionSlope table[] = {{Direction::kDown, Slope::kSteep},
                                  {Direction::kDown, Slope::kGradual},
                                  {Direction::kUp, Slope::kStay},
                                  {Direction::kUp, Slope::kGradual},
                                  {Direction::kUp, Slope::kSteep}};
  int pairs = 0;
  for (Energy cur : levels) {
    for (Energy next : levels) {
      const DirectionSlope want = table[rank(next) - rank(cur) + 2];
      c.expect(direction_slope_for(cur, next) == want, "pair " + std::string(to_string(cur)) + "->" +
                                                           std::string(to_string(next)));
      const std::vector<Energy> two{cur, next};
      const auto seq = choose_direction_slope(two);
      c.expect(seq[0] == want, "sequence head for pair");
      c.expect(seq[1] == (DirectionSlope{Direction::kUp, Slope::kStay}), "final scene not (up, stay)");
      ++pairs;
    }
    const std::vector<Energy> one{cur};
    c.expect(choose_direction_slope(one)[0] == (DirectionSlope{Direction::kUp, Slope::kStay}),
             "single scene not (up, stay)");
  }
  return {c.ok(), c.ok() ? std::to_string(pairs) + "/9 pairs plus the final-scene rule match" : c.failure()};
}

// ---------------------------------------------------------------------------

std::vector<CompositionPlan> random_plans(std::mt19937_64& rng, const std::vector<MoodConfig>& moods,
                                          int count) {
  std::vector<CompositionPlan> out;
  while (static_cast<int>(out.size()) < count) {
    const MoodConfig& mood = moods[rng() % moods.size()];
    std::vector<std::uint64_t> lengths(1 + rng() % 5);
    for (auto& l : lengths) l = 30 * (4 + rng() % 30);
    const auto scenes = scenes_from_frames(lengths, {30, 1});
    std::vector<Energy> e;
    for (std::size_t i = 0; i < scenes.size(); ++i) e.push_back(static_cast<Energy>(1 + rng() % 3));
    PlannerOptions opt;
    opt.rng_seed = rng();
    opt.complexity = static_cast<Complexity>(rng() % 3);
    opt.mode = PlannerMode::kPerSceneEnergy;
    try {
      out.push_back(plan_composition(scenes, e, mood, opt).plan);
    } catch (const Error&) {
    }
  }
  return out;
}

Outcome midi_integrity() {
  Checker c;
  std::mt19937_64 rng(100);
  const std::vector<MoodConfig> moods = all_moods();
  const InstrumentMap imap = InstrumentMap::load(fs::path(CUTSCORE_TEST_DATA_DIR) / "instruments.json");
  std::size_t notes = 0;
  double worst_ticks = 0;
  int index = 0;
  for (const CompositionPlan& plan : random_plans(rng, moods, 100)) {
    const std::string tag = "plan " + std::to_string(index++);
    const MoodConfig* mood = nullptr;
    for (const auto& m : moods) {
      if (m.name == plan.mood) mood = &m;
    }
    const Score score = compose_score(plan, *mood, {});
    const auto bytes = write_smf(score, imap);
    c.expect(bytes == write_smf(compose_score(plan, *mood, {}), imap), tag + " not byte-deterministic");
    const MidiDocument doc = read_smf(bytes);
    c.expect(doc == score_to_document(score, imap), tag + " document changed through bytes");

    std::vector<std::pair<std::int64_t, std::uint32_t>> tempos;
    for (const MidiEvent& e : doc.tracks[0].events) {
      if (e.kind == MidiEvent::Kind::kMeta && e.meta_type == midi_meta::kTempo) {
        tempos.emplace_back(e.tick, (e.data[0] << 16) | (e.data[1] << 8) | e.data[2]);
      }
    }
    c.expect(tempos.size() == plan.sections.size(), tag + " tempo meta count");
    for (std::size_t i = 0; i < std::min(tempos.size(), plan.sections.size()); ++i) {
      c.expect(tempos[i].first == score.sections[i].start_tick, tag + " tempo meta not at section start");
      c.expect(tempos[i].second == static_cast<std::uint32_t>(std::llround(60e6 / plan.sections[i].tempo)),
               tag + " tempo value");
    }

    for (std::size_t li = 0; li < score.layer_labels.size(); ++li) {
      std::vector<DecodedNote> want;
      const int ch = imap.lookup(score.layer_labels[li]).channel;
      for (const SectionScore& s : score.sections) {
        for (const NoteEvent& e : s.layers[li].events) {
          want.push_back({s.start_tick + e.start_tick, e.duration_ticks, e.pitch, e.velocity, ch});
        }
      }
      std::stable_sort(want.begin(), want.end(), [](const DecodedNote& a, const DecodedNote& b) {
        return std::tie(a.tick, a.pitch) < std::tie(b.tick, b.pitch);
      });
      notes += want.size();
      c.expect(li + 1 < doc.tracks.size() && extract_notes(doc.tracks[li + 1]) == want,
               tag + " notes differ on " + score.layer_labels[li]);
    }

    // One tick at the final section's tempo.
    const double tick_s = 60.0 / plan.sections.back().tempo / kPpqn;
    const double err = std::abs(decoded_duration_seconds(doc) - plan.total_duration_s);
    worst_ticks = std::max(worst_ticks, err / tick_s);
    c.expect(err <= tick_s, tag + " duration off by more than one tick");
  }
  const std::string detail = "100 plans, " + std::to_string(notes) +
                             " notes round-tripped, worst duration error " + fmt(worst_ticks, 3) + " ticks";
  return {c.ok(), c.ok() ? detail : c.failure() + "; " + detail};
}

// ---------------------------------------------------------------------------

Outcome loop_schedule() {
  Checker c;
  for (std::size_t n = 1; n <= 50; ++n) {
    for (std::size_t k = 1; k <= 8; ++k) {
      std::vector<Scene> scenes = scenes_from_frames(std::vector<std::uint64_t>(n, 30), {30, 1});
      std::vector<Stem> stems;
      for (std::size_t i = 0; i < k; ++i) {
        Stem s;
        s.label = "s" + std::to_string(i);
        s.activation_rank = static_cast<int>(i + 1);
        s.audio.samples = {1, 1};
        stems.push_back(s);
      }
      const std::vector<int> counts = build_layer_schedule(scenes, stems).counts();
      const std::string tag = std::to_string(n) + " scenes x " + std::to_string(k) + " stems";
      // Peak scenes: the middle one, or the middle pair.
      const std::size_t m0 = (n - 1) / 2;
      const std::size_t m1 = n / 2;
      const int peak = counts[m0];
      c.expect(counts[m1] == peak, tag + ": middle pair differs");
      c.expect(peak == static_cast<int>(std::min(k, m0 + 1)), tag + ": wrong peak");
      for (std::size_t i = 0; i < n; ++i) {
        c.expect(counts[i] <= peak && counts[i] >= 1, tag + ": out of range");
        if (i < m0) c.expect(counts[i] <= counts[i + 1], tag + ": not rising");
        if (i >= m1 && i + 1 < n) c.expect(counts[i] >= counts[i + 1], tag + ": not falling");
      }
    }
  }

  // Mixed output on fixtures.
  std::mt19937_64 rng(6);
  std::int32_t worst_peak = 0;
  int mixes = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int rate = trial % 2 ? 44100 : 8000;
    const int ch = 1 + trial % 2;
    std::vector<Stem> stems(1 + rng() % 4);
    for (std::size_t i = 0; i < stems.size(); ++i) {
      stems[i].label = "l" + std::to_string(i);
      stems[i].activation_rank = static_cast<int>(i + 1);
      stems[i].audio.sample_rate = rate;
      stems[i].audio.channels = ch;
      stems[i].audio.samples.resize((100 + rng() % 5000) * static_cast<std::size_t>(ch));
      for (auto& x : stems[i].audio.samples) x = static_cast<std::int16_t>(static_cast<int>(rng() % 20001) - 10000);
    }
    std::vector<std::uint64_t> lengths(1 + rng() % 6);
    for (auto& l : lengths) l = 10 + rng() % 90;
    const Fps fps{30000, 1001};
    const auto scenes = scenes_from_frames(lengths, fps);
    const PcmAudio mix = mix_stems(build_layer_schedule(scenes, stems), scenes, stems);
    const PcmAudio back = read_wav(encode_wav(mix));
    const auto want_frames = static_cast<std::size_t>(std::llround(scenes.back().end_s * rate));
    c.expect(back.frames() == want_frames, "mix length " + std::to_string(back.frames()) + " != " +
                                               std::to_string(want_frames));
    std::int32_t peak = 0;
    for (auto x : back.samples) peak = std::max<std::int32_t>(peak, std::abs(static_cast<std::int32_t>(x)));
    c.expect(peak == kMinusOneDbfsPeak, "mix peak " + std::to_string(peak));
    worst_peak = std::max(worst_peak, peak);
    ++mixes;
  }
  const double dbfs = 20 * std::log10(worst_peak / 32767.0);
  const std::string detail = "400 (scenes, stems) shapes unimodal with middle peak; " + std::to_string(mixes) +
                             " mixes exact length, peak " + std::to_string(worst_peak) + " (" +
                             fmt(dbfs, 3) + " dBFS)";
  return {c.ok(), c.ok() ? detail : c.failure() + "; " + detail};
}

// ---------------------------------------------------------------------------

Outcome end_to_end() {
  Checker c;
  testing::TempDir dir;
  const FrameSpec spec{320, 180, {30, 1}};
  const testing::SyntheticVideo video(spec, {{480, testing::palette_color(0)},
                                             {240, testing::palette_color(1)},
                                             {720, testing::palette_color(2)},
                                             {360, testing::palette_color(3)}});
  PipelineConfig config;
  config.source = RawStreamSource{video.write_raw(dir.path(), "sixty"), {}};
  config.data_dir = CUTSCORE_TEST_DATA_DIR;
  config.output_dir = dir / "out";

  const auto t0 = Clock::now();
  const fs::path scenes = cmd_analyze(config);
  const fs::path plan = cmd_plan(config, scenes);
  const fs::path midi = cmd_compose(config, plan);
  const double elapsed = seconds_since(t0);

  const SceneList list = parse_scenes_json(slurp(scenes));
  c.expect(list.scenes.size() == 4, "expected 4 scenes, got " + std::to_string(list.scenes.size()));
  const double dur = decoded_duration_seconds(read_smf_file(midi));
  c.expect(std::abs(dur - 60.0) < 0.05, "soundtrack lasts " + fmt(dur) + " s");
  c.expect(elapsed < 60.0, "took " + fmt(elapsed) + " s");
  const std::string detail = "60 s 320x180 fixture, " + std::to_string(list.scenes.size()) +
                             " scenes, analyze+plan+compose " + fmt(elapsed, 2) + " s (limit 60, target 10" +
                             (elapsed < 10.0 ? ", met)" : ", missed)") + ", soundtrack " + fmt(dur) + " s";
  return {c.ok(), c.ok() ? detail : c.failure() + "; " + detail};
}

// ---------------------------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CUTSCORE_CLI_PATH) + " -q " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome interchange_stability() {
  Checker c;
  std::mt19937_64 rng(8);
  int scene_cases = 0;
  int plan_cases = 0;

  // Scene lists from detector fixtures at several rates.
  const DetectorConfig config;
  for (const Fps fps : {Fps{30, 1}, Fps{24000, 1001}, Fps{25, 1}, Fps{30000, 1001}, Fps{60, 1}}) {
    for (int trial = 0; trial < 10; ++trial) {
      const testing::SyntheticVideo video({32, 18, fps}, testing::random_shots(rng, 1 + rng() % 7, 20, 80, 0.4));
      testing::SyntheticSource source(video);
      const auto stats = compute_stats(source);
      const SceneList list{fps, stats.size(), detect_scenes(stats, fps, config)};
      const std::string text = scenes_to_json(list);
      const SceneList back = parse_scenes_json(text);
      c.expect(back == list, "scene list changed through JSON");
      c.expect(scenes_to_json(back) == text, "scene JSON not a fixed point");
      ++scene_cases;
    }
  }

  const std::vector<MoodConfig> moods = all_moods();
  for (const CompositionPlan& plan : random_plans(rng, moods, 60)) {
    const std::string text = plan_to_ini(plan);
    const CompositionPlan back = parse_ini(text);
    c.expect(back == plan, "plan changed through INI");
    c.expect(plan_to_ini(back) == text, "plan INI not a fixed point");
    ++plan_cases;
  }

  // Documented exit codes.
  testing::TempDir dir;
  const auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream(dir / name, std::ios::binary) << body;
    return (dir / name).string();
  };
  const std::string common = std::string(" --data-dir ") + CUTSCORE_TEST_DATA_DIR + " --output-dir " +
                             (dir / "out").string();
  struct Case {
    std::string name;
    std::string args;
    int want;
  };
  const std::vector<Case> cases = {
      {"missing source", "analyze --source-stream " + (dir / "none.rgb24").string(), 2},
      {"truncated stream",
       "analyze --source-stream " + write("t.rgb24", "abc") + " --source-header " +
           write("t.hdr", "width=4 height=4 fps_num=30 fps_den=1\n"),
       2},
      {"malformed scenes.json", "plan " + write("bad.json", "{\"fps\": "), 3},
      {"scenes.json with a gap",
       "plan " + write("gap.json", R"({"fps": "30/1", "total_frames": 60, "scenes": [{"id": 0, "start_frame": 0, "end_frame": 20}, {"id": 1, "start_frame": 30, "end_frame": 60}]})"),
       3},
      {"malformed plan.ini", "compose " + write("bad.ini", "[composition]\nduration = soon\n"), 3},
      {"bad config value", "analyze --cut-threshold high", 6},
      {"unknown config key", "analyze -c " + write("c.ini", "[pipeline]\nswing = 1\n"), 6},
      {"render without template", "render " + write("x.mid", "x"), 6},
      {"failing render tool", "render --render-template 'exit 4' " + (dir / "x.mid").string(), 5},
  };
  std::string codes;
  for (const Case& k : cases) {
    const int got = run_cli(k.args + common);
    c.expect(got == k.want, k.name + " exited " + std::to_string(got) + ", want " + std::to_string(k.want));
    codes += (codes.empty() ? "" : " ") + std::to_string(got);
  }

  // A plan that parses but carries a malformed seed melody stops at compose.
  std::string good_plan;
  {
    const testing::SyntheticVideo video({32, 18, {30, 1}}, {{300, testing::palette_color(0)}, {300, testing::palette_color(1)}});
    const std::string stream = video.write_raw(dir.path(), "ok").string();
    const int a = run_cli("analyze --source-stream " + stream + common);
    const int p = run_cli("plan" + common + " " + (dir / "out/scenes.json").string());
    c.expect(a == 0 && p == 0, "analyze/plan on a valid fixture failed");
    const int m = run_cli("compose --melody " + write("m.mid", "MThd junk") + common + " " +
                          (dir / "out/plan.ini").string());
    c.expect(m == 4, "malformed melody exited " + std::to_string(m) + ", want 4");
    codes += " " + std::to_string(m);
  }

  const std::string detail = std::to_string(scene_cases) + " scene lists and " + std::to_string(plan_cases) +
                             " plans round-trip exactly; exit codes " + codes;
  return {c.ok(), c.ok() ? detail : c.failure() + "; " + detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"detector fidelity", detector_fidelity},
      {"solver correctness", solver_correctness},
      {"energy classification", energy_classification},
      {"direction/slope table", direction_slope_table},
      {"MIDI integrity", midi_integrity},
      {"loop schedule", loop_schedule},
      {"end-to-end performance", end_to_end},
      {"interchange stability", interchange_stability},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("[%s] %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
