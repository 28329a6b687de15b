#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace cutscore {

// 16-bit PCM, interleaved.
struct PcmAudio {
  int sample_rate = 44100;
  int channels = 2;
  std::vector<std::int16_t> samples;

  std::size_t frames() const { return channels > 0 ? samples.size() / channels : 0; }
  double duration_s() const { return static_cast<double>(frames()) / sample_rate; }

  friend bool operator==(const PcmAudio&, const PcmAudio&) = default;
};

// RIFF/WAVE with a PCM (or extensible PCM) fmt chunk, 16 bits, 1 or 2
// channels. Unknown chunks are skipped. Throws kMalformedWav.
PcmAudio read_wav(std::span<const std::uint8_t> bytes);
PcmAudio read_wav_file(const std::filesystem::path& path);

// Canonical 44-byte header followed by the data chunk.
std::vector<std::uint8_t> encode_wav(const PcmAudio& audio);
void write_wav_file(const std::filesystem::path& path, const PcmAudio& audio);

}  // namespace cutscore
