#include "cutscore/midi.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>
#include <tuple>

#include <nlohmann/json.hpp>

#include "cutscore/composer.hpp"
#include "cutscore/error.hpp"

namespace cutscore {

namespace {

[[noreturn]] void malformed(std::size_t offset, const std::string& what) {
  throw Error(ErrorCode::kMalformedMidi, what + " at byte " + std::to_string(offset));
}

class Reader {
 public:
  // `base` is the absolute file offset of bytes[0], used in diagnostics.
  explicit Reader(std::span<const std::uint8_t> bytes, std::size_t base = 0)
      : bytes_(bytes), base_(base) {}

  std::size_t pos() const { return pos_; }
  std::size_t abs() const { return base_ + pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint8_t u8() {
    if (pos_ >= bytes_.size()) malformed(abs(), "unexpected end of data");
    return bytes_[pos_++];
  }
  std::uint8_t peek() const {
    if (pos_ >= bytes_.size()) malformed(abs(), "unexpected end of data");
    return bytes_[pos_];
  }
  std::uint32_t be(int n) {
    std::uint32_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | u8();
    return v;
  }
  std::uint32_t vlq() {
    const std::size_t start = abs();
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint8_t b = u8();
      v = (v << 7) | (b & 0x7F);
      if ((b & 0x80) == 0) return v;
    }
    malformed(start, "variable-length quantity longer than 4 bytes");
  }
  std::vector<std::uint8_t> take(std::size_t n) {
    if (n > remaining()) malformed(abs(), "data runs past the end of its chunk");
    std::vector<std::uint8_t> out(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }
  void skip(std::size_t n) {
    if (n > remaining()) malformed(abs(), "chunk runs past the end of the file");
    pos_ += n;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t base_ = 0;
  std::size_t pos_ = 0;
};

int channel_data_bytes(std::uint8_t status) {
  const std::uint8_t kind = status & 0xF0;
  return (kind == 0xC0 || kind == 0xD0) ? 1 : 2;
}

MidiTrack read_track(std::span<const std::uint8_t> chunk, std::size_t base) {
  Reader r(chunk, base);
  MidiTrack track;
  std::int64_t tick = 0;
  std::uint8_t running = 0;
  while (r.remaining() > 0) {
    tick += r.vlq();
    MidiEvent ev;
    ev.tick = tick;
    std::uint8_t status = r.peek();
    if (status & 0x80) {
      r.u8();
    } else {
      if (running == 0) malformed(r.abs(), "data byte without running status");
      status = running;
    }
    if (status == 0xFF) {
      running = 0;
      ev.kind = MidiEvent::Kind::kMeta;
      ev.status = status;
      ev.meta_type = r.u8();
      ev.data = r.take(r.vlq());
      const bool end = ev.meta_type == midi_meta::kEndOfTrack;
      track.events.push_back(std::move(ev));
      if (end) break;
    } else if (status == 0xF0 || status == 0xF7) {
      running = 0;
      ev.kind = MidiEvent::Kind::kSysEx;
      ev.status = status;
      ev.data = r.take(r.vlq());
      track.events.push_back(std::move(ev));
    } else if (status >= 0xF1) {
      malformed(r.abs() - 1, "system message inside a track");
    } else {
      running = status;
      ev.kind = MidiEvent::Kind::kChannel;
      ev.status = status;
      for (int i = 0; i < channel_data_bytes(status); ++i) {
        const std::uint8_t d = r.u8();
        if (d & 0x80) malformed(r.abs() - 1, "status byte where data was expected");
        ev.data.push_back(d);
      }
      track.events.push_back(std::move(ev));
    }
  }
  if (track.events.empty() || track.events.back().kind != MidiEvent::Kind::kMeta ||
      track.events.back().meta_type != midi_meta::kEndOfTrack) {
    malformed(base + chunk.size(), "track has no end-of-track event");
  }
  return track;
}

void put_be(std::vector<std::uint8_t>& out, std::uint32_t v, int n) {
  for (int i = n - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_vlq(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::uint8_t buf[5];
  int n = 0;
  buf[n++] = v & 0x7F;
  while ((v >>= 7) != 0) buf[n++] = static_cast<std::uint8_t>(0x80 | (v & 0x7F));
  while (n > 0) out.push_back(buf[--n]);
}

MidiEvent meta(std::int64_t tick, std::uint8_t type, std::vector<std::uint8_t> data) {
  MidiEvent ev;
  ev.tick = tick;
  ev.kind = MidiEvent::Kind::kMeta;
  ev.status = 0xFF;
  ev.meta_type = type;
  ev.data = std::move(data);
  return ev;
}

MidiEvent channel(std::int64_t tick, std::uint8_t status, std::vector<std::uint8_t> data) {
  MidiEvent ev;
  ev.tick = tick;
  ev.kind = MidiEvent::Kind::kChannel;
  ev.status = status;
  ev.data = std::move(data);
  return ev;
}

std::uint8_t log2_unit(int unit) {
  std::uint8_t p = 0;
  while ((1 << p) < unit) ++p;
  return p;
}

}  // namespace

MidiDocument read_smf(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (bytes.size() < 14) malformed(bytes.size(), "file too short for an SMF header");
  const auto id = r.take(4);
  if (std::string(id.begin(), id.end()) != "MThd") malformed(0, "missing MThd header");
  const std::uint32_t header_len = r.be(4);
  if (header_len < 6) malformed(4, "header chunk shorter than 6 bytes");
  MidiDocument doc;
  doc.format = static_cast<int>(r.be(2));
  const std::uint32_t ntracks = r.be(2);
  const std::uint32_t division = r.be(2);
  r.skip(header_len - 6);
  if (doc.format == 2) throw Error(ErrorCode::kUnsupportedFormat, "SMF format 2 is not supported");
  if (doc.format > 2) {
    throw Error(ErrorCode::kUnsupportedFormat, "unknown SMF format " + std::to_string(doc.format));
  }
  if (division & 0x8000) {
    throw Error(ErrorCode::kUnsupportedFormat, "SMPTE time division is not supported");
  }
  if (division == 0) malformed(12, "zero ticks per quarter note");
  doc.ppqn = static_cast<int>(division);

  while (r.remaining() > 0) {
    const std::size_t chunk_start = r.pos();
    if (r.remaining() < 8) malformed(chunk_start, "truncated chunk header");
    const auto type = r.take(4);
    const std::uint32_t len = r.be(4);
    if (len > r.remaining()) malformed(chunk_start, "chunk length exceeds file size");
    const std::size_t body = r.pos();
    r.skip(len);
    if (std::string(type.begin(), type.end()) != "MTrk") continue;
    doc.tracks.push_back(read_track(bytes.subspan(body, len), body));
  }
  if (doc.tracks.size() != ntracks) {
    malformed(bytes.size(), "header declares " + std::to_string(ntracks) + " tracks but " +
                                std::to_string(doc.tracks.size()) + " were found");
  }
  return doc;
}

MidiDocument read_smf_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kSourceNotFound, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return read_smf(bytes);
}

std::vector<std::uint8_t> encode_smf(const MidiDocument& doc, bool running_status) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'M', 'T', 'h', 'd'});
  put_be(out, 6, 4);
  put_be(out, static_cast<std::uint32_t>(doc.format), 2);
  put_be(out, static_cast<std::uint32_t>(doc.tracks.size()), 2);
  put_be(out, static_cast<std::uint32_t>(doc.ppqn), 2);
  for (const MidiTrack& track : doc.tracks) {
    std::vector<std::uint8_t> body;
    std::int64_t tick = 0;
    std::uint8_t running = 0;
    for (const MidiEvent& ev : track.events) {
      put_vlq(body, static_cast<std::uint32_t>(ev.tick - tick));
      tick = ev.tick;
      switch (ev.kind) {
        case MidiEvent::Kind::kMeta:
          body.push_back(0xFF);
          body.push_back(ev.meta_type);
          put_vlq(body, static_cast<std::uint32_t>(ev.data.size()));
          running = 0;
          break;
        case MidiEvent::Kind::kSysEx:
          body.push_back(ev.status);
          put_vlq(body, static_cast<std::uint32_t>(ev.data.size()));
          running = 0;
          break;
        case MidiEvent::Kind::kChannel:
          if (!running_status || ev.status != running) body.push_back(ev.status);
          running = ev.status;
          break;
      }
      body.insert(body.end(), ev.data.begin(), ev.data.end());
    }
    out.insert(out.end(), {'M', 'T', 'r', 'k'});
    put_be(out, static_cast<std::uint32_t>(body.size()), 4);
    out.insert(out.end(), body.begin(), body.end());
  }
  return out;
}

InstrumentMap::InstrumentMap(std::map<std::string, InstrumentAssignment> entries) {
  for (auto& [label, a] : entries) {
    if (a.program < 0 || a.program > 127) {
      throw Error(ErrorCode::kInvalidConfig,
                  "instrument '" + label + "' has program " + std::to_string(a.program));
    }
    if (a.channel < 0 || a.channel > 15) {
      throw Error(ErrorCode::kInvalidConfig,
                  "instrument '" + label + "' has channel " + std::to_string(a.channel));
    }
    if (is_percussion_label(label) && a.channel != 9) {
      throw Error(ErrorCode::kInvalidConfig, "percussion layer '" + label + "' must use channel 9");
    }
    entries_.emplace(label, a);
  }
}

InstrumentMap InstrumentMap::parse_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("instrument map: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kInvalidConfig, "instrument map must be an object");
  std::map<std::string, InstrumentAssignment> entries;
  for (const auto& [label, value] : doc.items()) {
    if (!value.is_object() || !value.contains("program") || !value["program"].is_number_integer()) {
      throw Error(ErrorCode::kInvalidConfig, "instrument '" + label + "' needs an integer program");
    }
    InstrumentAssignment a;
    a.program = value["program"].get<int>();
    a.channel = is_percussion_label(label) ? 9 : 0;
    if (value.contains("channel")) {
      if (!value["channel"].is_number_integer()) {
        throw Error(ErrorCode::kInvalidConfig, "instrument '" + label + "' channel must be an integer");
      }
      a.channel = value["channel"].get<int>();
    }
    entries.emplace(label, a);
  }
  return InstrumentMap(std::move(entries));
}

InstrumentMap InstrumentMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "cannot open instrument map " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_json(text);
}

InstrumentAssignment InstrumentMap::lookup(std::string_view label) const {
  const auto it = entries_.find(label);
  if (it == entries_.end()) {
    throw Error(ErrorCode::kMissingInstrument, "no instrument mapped for layer '" + std::string(label) + "'");
  }
  return it->second;
}

bool InstrumentMap::contains(std::string_view label) const {
  return entries_.find(label) != entries_.end();
}

InstrumentAssignment map_instrument(const InstrumentMap& imap, std::string_view label) {
  return imap.lookup(label);
}

MidiDocument score_to_document(const Score& score, const InstrumentMap& imap) {
  MidiDocument doc;
  doc.format = 1;
  doc.ppqn = kPpqn;
  const std::int64_t end = score.total_ticks();

  MidiTrack conductor;
  for (std::size_t i = 0; i < score.tempo_map.size(); ++i) {
    const TempoChange& t = score.tempo_map[i];
    const std::uint32_t us = microseconds_per_quarter(t.bpm);
    conductor.events.push_back(meta(t.tick, midi_meta::kTempo,
                                    {static_cast<std::uint8_t>(us >> 16),
                                     static_cast<std::uint8_t>(us >> 8),
                                     static_cast<std::uint8_t>(us)}));
    if (i < score.meter_map.size()) {
      const MeterChange& m = score.meter_map[i];
      conductor.events.push_back(meta(m.tick, midi_meta::kTimeSignature,
                                      {static_cast<std::uint8_t>(m.time_signature.beats),
                                       log2_unit(m.time_signature.unit),
                                       static_cast<std::uint8_t>(96 / m.time_signature.unit), 8}));
    }
  }
  conductor.events.push_back(meta(end, midi_meta::kEndOfTrack, {}));
  doc.tracks.push_back(std::move(conductor));

  // Melodic layers share a channel only if the map says so; reject that.
  std::map<int, std::string> channel_owner;
  for (const std::string& label : score.layer_labels) {
    const InstrumentAssignment a = imap.lookup(label);
    if (a.channel == 9) continue;
    const auto [it, inserted] = channel_owner.emplace(a.channel, label);
    if (!inserted) {
      throw Error(ErrorCode::kInvalidConfig, "layers '" + it->second + "' and '" + label +
                                                 "' both map to channel " + std::to_string(a.channel));
    }
  }

  for (std::size_t layer = 0; layer < score.layer_labels.size(); ++layer) {
    const std::string& label = score.layer_labels[layer];
    const InstrumentAssignment a = imap.lookup(label);
    const auto ch = static_cast<std::uint8_t>(a.channel);
    MidiTrack track;
    track.events.push_back(meta(0, midi_meta::kTrackName,
                                std::vector<std::uint8_t>(label.begin(), label.end())));
    if (a.channel != 9) {
      track.events.push_back(channel(0, static_cast<std::uint8_t>(0xC0 | ch),
                                     {static_cast<std::uint8_t>(a.program)}));
    }
    // (tick, is_on, pitch, velocity); offs sort before ons at equal ticks.
    std::vector<std::tuple<std::int64_t, int, int, int>> edges;
    for (const SectionScore& s : score.sections) {
      if (layer >= s.layers.size()) continue;
      for (const NoteEvent& e : s.layers[layer].events) {
        if (e.pitch < 0 || e.pitch > 127 || e.velocity < 1 || e.velocity > 127 ||
            e.duration_ticks <= 0 || e.start_tick < 0) {
          throw Error(ErrorCode::kInvalidEvent,
                      "layer '" + label + "' section " + std::to_string(s.section_id) +
                          ": pitch " + std::to_string(e.pitch) + " velocity " +
                          std::to_string(e.velocity));
        }
        const std::int64_t on = s.start_tick + e.start_tick;
        edges.emplace_back(on, 1, e.pitch, e.velocity);
        edges.emplace_back(on + e.duration_ticks, 0, e.pitch, 0);
      }
    }
    std::stable_sort(edges.begin(), edges.end(), [](const auto& x, const auto& y) {
      return std::tie(std::get<0>(x), std::get<1>(x), std::get<2>(x)) <
             std::tie(std::get<0>(y), std::get<1>(y), std::get<2>(y));
    });
    for (const auto& [tick, on, pitch, velocity] : edges) {
      track.events.push_back(channel(tick, static_cast<std::uint8_t>((on ? 0x90 : 0x80) | ch),
                                     {static_cast<std::uint8_t>(pitch),
                                      static_cast<std::uint8_t>(on ? velocity : 0x40)}));
    }
    track.events.push_back(meta(end, midi_meta::kEndOfTrack, {}));
    doc.tracks.push_back(std::move(track));
  }
  return doc;
}

std::vector<std::uint8_t> write_smf(const Score& score, const InstrumentMap& imap) {
  return encode_smf(score_to_document(score, imap));
}

std::vector<DecodedNote> extract_notes(const MidiTrack& track) {
  std::map<std::pair<int, int>, std::vector<std::pair<std::int64_t, int>>> open;
  std::map<std::pair<int, int>, std::size_t> head;
  std::vector<DecodedNote> notes;
  for (const MidiEvent& ev : track.events) {
    if (ev.kind != MidiEvent::Kind::kChannel || ev.data.size() < 2) continue;
    const int kind = ev.status & 0xF0;
    const int ch = ev.status & 0x0F;
    const std::pair<int, int> key{ch, ev.data[0]};
    const bool on = kind == 0x90 && ev.data[1] > 0;
    const bool off = kind == 0x80 || (kind == 0x90 && ev.data[1] == 0);
    if (on) {
      open[key].emplace_back(ev.tick, ev.data[1]);
    } else if (off) {
      auto it = open.find(key);
      if (it == open.end() || head[key] >= it->second.size()) continue;  // stray note-off
      const auto [start, velocity] = it->second[head[key]++];
      notes.push_back({start, ev.tick - start, ev.data[0], velocity, ch});
    }
  }
  std::stable_sort(notes.begin(), notes.end(), [](const DecodedNote& a, const DecodedNote& b) {
    return std::tie(a.tick, a.pitch) < std::tie(b.tick, b.pitch);
  });
  return notes;
}

double decoded_duration_seconds(const MidiDocument& doc) {
  std::vector<std::pair<std::int64_t, std::uint32_t>> tempos;
  std::int64_t end = 0;
  for (const MidiTrack& t : doc.tracks) {
    for (const MidiEvent& ev : t.events) {
      if (ev.kind != MidiEvent::Kind::kMeta) continue;
      if (ev.meta_type == midi_meta::kTempo && ev.data.size() == 3) {
        tempos.emplace_back(ev.tick, (std::uint32_t{ev.data[0]} << 16) |
                                         (std::uint32_t{ev.data[1]} << 8) | ev.data[2]);
      }
      if (ev.meta_type == midi_meta::kEndOfTrack) end = std::max(end, ev.tick);
    }
  }
  std::stable_sort(tempos.begin(), tempos.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  double seconds = 0.0;
  std::int64_t at = 0;
  double us = 500000.0;
  for (const auto& [tick, value] : tempos) {
    if (tick >= end) break;
    seconds += static_cast<double>(tick - at) * us / (1e6 * doc.ppqn);
    at = tick;
    us = value;
  }
  return seconds + static_cast<double>(end - at) * us / (1e6 * doc.ppqn);
}

}  // namespace cutscore
