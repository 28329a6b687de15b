#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cutscore {

struct Score;

// One decoded track event at an absolute tick.
struct MidiEvent {
  enum class Kind { kChannel, kMeta, kSysEx };

  std::int64_t tick = 0;
  Kind kind = Kind::kChannel;
  std::uint8_t status = 0;     // channel status byte, 0xFF for meta, 0xF0/0xF7 for sysex
  std::uint8_t meta_type = 0;  // meta only
  std::vector<std::uint8_t> data;  // channel data bytes, or meta/sysex payload

  friend bool operator==(const MidiEvent&, const MidiEvent&) = default;
};

struct MidiTrack {
  std::vector<MidiEvent> events;

  friend bool operator==(const MidiTrack&, const MidiTrack&) = default;
};

struct MidiDocument {
  int format = 1;
  int ppqn = 480;
  std::vector<MidiTrack> tracks;

  friend bool operator==(const MidiDocument&, const MidiDocument&) = default;
};

namespace midi_meta {
inline constexpr std::uint8_t kTrackName = 0x03;
inline constexpr std::uint8_t kEndOfTrack = 0x2F;
inline constexpr std::uint8_t kTempo = 0x51;
inline constexpr std::uint8_t kTimeSignature = 0x58;
}  // namespace midi_meta

// Parses SMF format 0 or 1 with running status and variable-length deltas;
// unknown meta events and unknown chunk types are skipped. Throws
// kMalformedMidi (with the byte offset) or kUnsupportedFormat.
MidiDocument read_smf(std::span<const std::uint8_t> bytes);
MidiDocument read_smf_file(const std::filesystem::path& path);

// Serializes a document. Events within a track must be sorted by tick.
std::vector<std::uint8_t> encode_smf(const MidiDocument& doc, bool running_status = true);

struct InstrumentAssignment {
  int program = 0;  // GM1, 0-based
  int channel = 0;  // 0-15; 9 is percussion

  friend bool operator==(const InstrumentAssignment&, const InstrumentAssignment&) = default;
};

class InstrumentMap {
 public:
  InstrumentMap() = default;
  explicit InstrumentMap(std::map<std::string, InstrumentAssignment> entries);

  // JSON object: {"label": {"program": p, "channel": c}, ...}
  static InstrumentMap parse_json(std::string_view text);
  static InstrumentMap load(const std::filesystem::path& path);

  // Throws kMissingInstrument for unknown labels.
  InstrumentAssignment lookup(std::string_view label) const;
  bool contains(std::string_view label) const;
  const std::map<std::string, InstrumentAssignment, std::less<>>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, InstrumentAssignment, std::less<>> entries_;
};

InstrumentAssignment map_instrument(const InstrumentMap& imap, std::string_view label);

// SMF type 1 at 480 PPQN: track 0 carries tempo and time-signature meta at
// every section start, tracks 1..k one per score layer with its program
// change. Output bytes depend only on (score, imap).
MidiDocument score_to_document(const Score& score, const InstrumentMap& imap);
std::vector<std::uint8_t> write_smf(const Score& score, const InstrumentMap& imap);

struct DecodedNote {
  std::int64_t tick = 0;
  std::int64_t duration = 0;
  int pitch = 0;
  int velocity = 0;
  int channel = 0;

  friend bool operator==(const DecodedNote&, const DecodedNote&) = default;
};

// Pairs note-on/note-off (velocity-0 note-on counts as off) first-in
// first-out per (channel, pitch); sorted by (tick, pitch).
std::vector<DecodedNote> extract_notes(const MidiTrack& track);

// Seconds up to the last end-of-track tick, integrating tempo meta events
// (500000 us/quarter before the first one).
double decoded_duration_seconds(const MidiDocument& doc);

}  // namespace cutscore
