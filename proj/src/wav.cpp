#include "cutscore/wav.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "cutscore/error.hpp"

namespace cutscore {

namespace {

std::uint32_t le(std::span<const std::uint8_t> b, std::size_t at, int n) {
  std::uint32_t v = 0;
  for (int i = n - 1; i >= 0; --i) v = (v << 8) | b[at + static_cast<std::size_t>(i)];
  return v;
}

void put_le(std::vector<std::uint8_t>& out, std::uint32_t v, int n) {
  for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kMalformedWav, what); }

}  // namespace

PcmAudio read_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    bad("not a RIFF/WAVE file");
  }
  PcmAudio audio;
  bool have_fmt = false;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::size_t len = le(bytes, pos + 4, 4);
    const std::size_t body = pos + 8;
    if (len > bytes.size() - body) bad("chunk at byte " + std::to_string(pos) + " is truncated");
    if (tag_is(bytes, pos, "fmt ")) {
      if (len < 16) bad("fmt chunk too short");
      std::uint32_t format = le(bytes, body, 2);
      if (format == 0xFFFE && len >= 26) format = le(bytes, body + 24, 2);  // extensible
      if (format != 1) bad("only PCM data is supported (format " + std::to_string(format) + ")");
      audio.channels = static_cast<int>(le(bytes, body + 2, 2));
      audio.sample_rate = static_cast<int>(le(bytes, body + 4, 4));
      const std::uint32_t bits = le(bytes, body + 14, 2);
      if (bits != 16) bad("only 16-bit samples are supported (got " + std::to_string(bits) + ")");
      if (audio.channels < 1 || audio.channels > 2) {
        bad("only mono or stereo is supported (got " + std::to_string(audio.channels) + " channels)");
      }
      if (audio.sample_rate <= 0) bad("sample rate must be positive");
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (!have_fmt) bad("data chunk before fmt chunk");
      const std::size_t frame_bytes = 2 * static_cast<std::size_t>(audio.channels);
      const std::size_t usable = len - len % frame_bytes;
      audio.samples.resize(usable / 2);
      for (std::size_t i = 0; i < audio.samples.size(); ++i) {
        audio.samples[i] = static_cast<std::int16_t>(le(bytes, body + 2 * i, 2));
      }
      have_data = true;
    }
    pos = body + len + (len & 1);
  }
  if (!have_fmt) bad("missing fmt chunk");
  if (!have_data) bad("missing data chunk");
  return audio;
}

PcmAudio read_wav_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kSourceNotFound, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return read_wav(bytes);
}

std::vector<std::uint8_t> encode_wav(const PcmAudio& audio) {
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  const auto block_align = static_cast<std::uint32_t>(audio.channels * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_le(out, 36 + data_bytes, 4);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_le(out, 16, 4);
  put_le(out, 1, 2);
  put_le(out, static_cast<std::uint32_t>(audio.channels), 2);
  put_le(out, static_cast<std::uint32_t>(audio.sample_rate), 4);
  put_le(out, static_cast<std::uint32_t>(audio.sample_rate) * block_align, 4);
  put_le(out, block_align, 2);
  put_le(out, 16, 2);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_le(out, data_bytes, 4);
  for (std::int16_t s : audio.samples) put_le(out, static_cast<std::uint16_t>(s), 2);
  return out;
}

void write_wav_file(const std::filesystem::path& path, const PcmAudio& audio) {
  const std::vector<std::uint8_t> bytes = encode_wav(audio);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

}  // namespace cutscore
