#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cutscore/kernels.hpp"

namespace cutscore {

// Frames per second as an exact rational.
struct Fps {
  std::uint32_t num = 30;
  std::uint32_t den = 1;

  double frame_period_s() const { return static_cast<double>(den) / num; }
  double seconds_at(std::uint64_t frame) const {
    return static_cast<double>(frame) * den / num;
  }

  friend bool operator==(const Fps&, const Fps&) = default;
};

struct FrameSpec {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  Fps fps;

  std::size_t pixel_count() const { return std::size_t{width} * height; }
  std::size_t frame_bytes() const { return 3 * pixel_count(); }

  // Throws kMalformedSource on zero dimensions or a zero rate term.
  void validate() const;

  friend bool operator==(const FrameSpec&, const FrameSpec&) = default;
};

// Interleaved RGB24, row-major.
struct Frame {
  std::uint64_t index = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;

  std::size_t pixel_count() const { return std::size_t{width} * height; }
};

inline double timestamp(const Frame& frame, const Fps& fps) {
  return fps.seconds_at(frame.index);
}

struct FrameStats {
  std::uint64_t index = 0;
  double avg_intensity = 0.0;           // mean of (R+G+B)/3, in [0,255]
  std::optional<double> hsv_delta;      // absent for frame 0
};

// Single-pass, single-consumer frame iterator.
class FrameSource {
 public:
  virtual ~FrameSource() = default;

  virtual const FrameSpec& spec() const = 0;
  // Known up front for raw streams and image sequences.
  virtual std::uint64_t frame_count() const = 0;
  // std::nullopt once exhausted.
  virtual std::optional<Frame> next() = 0;
};

struct RawStreamSource {
  std::filesystem::path stream;   // <name>.rgb24
  std::filesystem::path header;   // empty -> <name>.hdr next to the stream
};

struct ImageSequenceSource {
  std::filesystem::path directory;  // zero-padded numbered binary PPM files
  Fps fps;
};

using SourceDescriptor = std::variant<RawStreamSource, ImageSequenceSource>;

std::unique_ptr<FrameSource> open_frame_source(const SourceDescriptor& descriptor);

// Sidecar header: "width=W height=H fps_num=N fps_den=D" (any whitespace).
FrameSpec parse_stream_header(const std::string& text);
std::string format_stream_header(const FrameSpec& spec);

double compute_intensity(const Frame& frame);
double compute_intensity(std::span<const std::uint8_t> rgb);

struct Rgb {
  std::uint8_t r, g, b;
};
kernels::Hsv8 rgb_to_hsv(Rgb pixel);

// Mean over H, S, V of the per-channel mean absolute change; throws
// kIncompatibleFrames when the dimensions differ.
double content_delta(const Frame& prev, const Frame& curr);

// Streaming statistics: keeps the previous frame's HSV planes so each frame
// is converted once.
class StatsAnalyzer {
 public:
  explicit StatsAnalyzer(const FrameSpec& spec,
                         const kernels::KernelTable& k = kernels::active_kernels());

  FrameStats push(const Frame& frame);

 private:
  FrameSpec spec_;
  const kernels::KernelTable* k_;
  std::vector<std::uint8_t> prev_;  // planar H|S|V
  std::vector<std::uint8_t> curr_;
  bool have_prev_ = false;
};

std::vector<FrameStats> compute_stats(FrameSource& source);

}  // namespace cutscore
