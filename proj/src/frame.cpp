#include "cutscore/frame.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "cutscore/error.hpp"

namespace cutscore {

namespace fs = std::filesystem;

void FrameSpec::validate() const {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::kMalformedSource, "frame dimensions must be positive");
  }
  if (fps.num == 0 || fps.den == 0) {
    throw Error(ErrorCode::kMalformedSource, "fps numerator and denominator must be positive");
  }
}

FrameSpec parse_stream_header(const std::string& text) {
  FrameSpec spec;
  spec.fps = {0, 0};
  bool seen[4] = {false, false, false, false};
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kMalformedSource, "header token without '=': " + token);
    }
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    std::uint64_t parsed = 0;
    try {
      std::size_t used = 0;
      parsed = std::stoull(value, &used);
      if (used != value.size() || parsed > 0xffffffffull) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kMalformedSource, "bad header value for " + key + ": " + value);
    }
    const auto v = static_cast<std::uint32_t>(parsed);
    if (key == "width") {
      spec.width = v, seen[0] = true;
    } else if (key == "height") {
      spec.height = v, seen[1] = true;
    } else if (key == "fps_num") {
      spec.fps.num = v, seen[2] = true;
    } else if (key == "fps_den") {
      spec.fps.den = v, seen[3] = true;
    } else {
      throw Error(ErrorCode::kMalformedSource, "unknown header key: " + key);
    }
  }
  if (!std::all_of(std::begin(seen), std::end(seen), [](bool b) { return b; })) {
    throw Error(ErrorCode::kMalformedSource,
                "header must define width, height, fps_num and fps_den");
  }
  spec.validate();
  return spec;
}

std::string format_stream_header(const FrameSpec& spec) {
  std::ostringstream out;
  out << "width=" << spec.width << " height=" << spec.height << " fps_num=" << spec.fps.num
      << " fps_den=" << spec.fps.den << "\n";
  return out.str();
}

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kSourceNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class RawStream final : public FrameSource {
 public:
  RawStream(const fs::path& stream, FrameSpec spec) : spec_(spec), in_(stream, std::ios::binary) {
    if (!in_) throw Error(ErrorCode::kSourceNotFound, "cannot open " + stream.string());
    std::error_code ec;
    const auto bytes = fs::file_size(stream, ec);
    if (ec) throw Error(ErrorCode::kSourceNotFound, "cannot stat " + stream.string());
    const std::size_t frame_bytes = spec_.frame_bytes();
    if (bytes % frame_bytes != 0) {
      throw Error(ErrorCode::kMalformedSource,
                  "stream length " + std::to_string(bytes) + " is not a multiple of " +
                      std::to_string(frame_bytes) + " bytes per frame");
    }
    count_ = bytes / frame_bytes;
  }

  const FrameSpec& spec() const override { return spec_; }
  std::uint64_t frame_count() const override { return count_; }

  std::optional<Frame> next() override {
    if (next_index_ >= count_) return std::nullopt;
    Frame frame{next_index_, spec_.width, spec_.height,
                std::vector<std::uint8_t>(spec_.frame_bytes())};
    in_.read(reinterpret_cast<char*>(frame.pixels.data()),
             static_cast<std::streamsize>(frame.pixels.size()));
    if (in_.gcount() != static_cast<std::streamsize>(frame.pixels.size())) {
      throw Error(ErrorCode::kMalformedSource,
                  "short read at frame " + std::to_string(next_index_));
    }
    ++next_index_;
    return frame;
  }

 private:
  FrameSpec spec_;
  std::ifstream in_;
  std::uint64_t count_ = 0;
  std::uint64_t next_index_ = 0;
};

// Binary PPM (P6, maxval 255).
struct PpmImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> rgb;
};

PpmImage read_ppm(const fs::path& path) {
  const std::string data = read_text(path);
  std::size_t pos = 0;
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kMalformedSource, path.string() + ": " + what);
  };
  const auto skip_space = [&] {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  const auto read_uint = [&]() -> std::uint32_t {
    skip_space();
    std::uint64_t v = 0;
    const std::size_t start = pos;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) {
      v = v * 10 + static_cast<std::uint64_t>(data[pos] - '0');
      if (v > 0xffffffffull) fail("header value overflow");
      ++pos;
    }
    if (pos == start) fail("expected a number in header");
    return static_cast<std::uint32_t>(v);
  };

  if (data.compare(0, 2, "P6") != 0) fail("not a binary PPM (P6)");
  pos = 2;
  PpmImage img;
  img.width = read_uint();
  img.height = read_uint();
  const std::uint32_t maxval = read_uint();
  if (maxval != 255) fail("only maxval 255 is supported");
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos]))) {
    fail("missing separator before pixel data");
  }
  ++pos;
  const std::size_t need = std::size_t{3} * img.width * img.height;
  if (img.width == 0 || img.height == 0) fail("zero dimensions");
  if (data.size() - pos != need) fail("pixel data length mismatch");
  img.rgb.assign(data.begin() + static_cast<std::ptrdiff_t>(pos), data.end());
  return img;
}

class ImageSequence final : public FrameSource {
 public:
  ImageSequence(std::vector<fs::path> files, Fps fps) : files_(std::move(files)) {
    const PpmImage first = read_ppm(files_.front());
    spec_ = {first.width, first.height, fps};
    spec_.validate();
    pending_ = first.rgb;
  }

  const FrameSpec& spec() const override { return spec_; }
  std::uint64_t frame_count() const override { return files_.size(); }

  std::optional<Frame> next() override {
    if (next_index_ >= files_.size()) return std::nullopt;
    std::vector<std::uint8_t> rgb;
    if (next_index_ == 0) {
      rgb = std::move(pending_);
    } else {
      PpmImage img = read_ppm(files_[next_index_]);
      if (img.width != spec_.width || img.height != spec_.height) {
        throw Error(ErrorCode::kMalformedSource,
                    files_[next_index_].string() + ": dimensions differ from first frame");
      }
      rgb = std::move(img.rgb);
    }
    Frame frame{next_index_, spec_.width, spec_.height, std::move(rgb)};
    ++next_index_;
    return frame;
  }

 private:
  std::vector<fs::path> files_;
  FrameSpec spec_;
  std::vector<std::uint8_t> pending_;
  std::uint64_t next_index_ = 0;
};

std::unique_ptr<FrameSource> open_raw(const RawStreamSource& d) {
  if (!fs::is_regular_file(d.stream)) {
    throw Error(ErrorCode::kSourceNotFound, "no stream file " + d.stream.string());
  }
  fs::path header = d.header;
  if (header.empty()) header = fs::path(d.stream).replace_extension(".hdr");
  if (!fs::is_regular_file(header)) {
    throw Error(ErrorCode::kSourceNotFound, "no sidecar header " + header.string());
  }
  return std::make_unique<RawStream>(d.stream, parse_stream_header(read_text(header)));
}

std::unique_ptr<FrameSource> open_sequence(const ImageSequenceSource& d) {
  if (!fs::is_directory(d.directory)) {
    throw Error(ErrorCode::kSourceNotFound, "no directory " + d.directory.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(d.directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) {
    throw Error(ErrorCode::kSourceNotFound, "no .ppm frames in " + d.directory.string());
  }
  // Zero-padded numbering makes lexicographic order the frame order.
  std::sort(files.begin(), files.end());
  FrameSpec probe{1, 1, d.fps};
  probe.validate();
  return std::make_unique<ImageSequence>(std::move(files), d.fps);
}

}  // namespace

std::unique_ptr<FrameSource> open_frame_source(const SourceDescriptor& descriptor) {
  return std::visit(
      [](const auto& d) -> std::unique_ptr<FrameSource> {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, RawStreamSource>) {
          return open_raw(d);
        } else {
          return open_sequence(d);
        }
      },
      descriptor);
}

double compute_intensity(std::span<const std::uint8_t> rgb) {
  if (rgb.empty()) return 0.0;
  const std::uint64_t total = kernels::active_kernels().sum_bytes(rgb.data(), rgb.size());
  return static_cast<double>(total) / static_cast<double>(rgb.size());
}

double compute_intensity(const Frame& frame) { return compute_intensity(frame.pixels); }

kernels::Hsv8 rgb_to_hsv(Rgb pixel) { return kernels::rgb_to_hsv8(pixel.r, pixel.g, pixel.b); }

namespace {

double delta_from_sums(const kernels::HsvSums& sums, std::size_t pixels) {
  if (pixels == 0) return 0.0;
  const double n = static_cast<double>(pixels);
  const double h = static_cast<double>(sums.hue) / n;
  const double s = static_cast<double>(sums.sat) / n;
  const double v = static_cast<double>(sums.val) / n;
  return (h + s + v) / 3.0;
}

void check_frame(const Frame& f) {
  if (f.pixels.size() != 3 * f.pixel_count()) {
    throw Error(ErrorCode::kIncompatibleFrames,
                "frame " + std::to_string(f.index) + " buffer does not match its dimensions");
  }
}

}  // namespace

double content_delta(const Frame& prev, const Frame& curr) {
  check_frame(prev);
  check_frame(curr);
  if (prev.width != curr.width || prev.height != curr.height) {
    throw Error(ErrorCode::kIncompatibleFrames, "frame dimensions differ");
  }
  const auto& k = kernels::active_kernels();
  const std::size_t n = curr.pixel_count();
  std::vector<std::uint8_t> planes(6 * n);
  std::uint8_t* a = planes.data();
  std::uint8_t* b = a + 3 * n;
  k.rgb_to_hsv_planes(prev.pixels.data(), n, a, a + n, a + 2 * n);
  k.rgb_to_hsv_planes(curr.pixels.data(), n, b, b + n, b + 2 * n);
  return delta_from_sums(k.hsv_diff_sums(a, a + n, a + 2 * n, b, b + n, b + 2 * n, n), n);
}

StatsAnalyzer::StatsAnalyzer(const FrameSpec& spec, const kernels::KernelTable& k)
    : spec_(spec), k_(&k), prev_(3 * spec.pixel_count()), curr_(3 * spec.pixel_count()) {}

FrameStats StatsAnalyzer::push(const Frame& frame) {
  check_frame(frame);
  if (frame.width != spec_.width || frame.height != spec_.height) {
    throw Error(ErrorCode::kIncompatibleFrames, "frame dimensions differ from the stream");
  }
  const std::size_t n = spec_.pixel_count();
  FrameStats stats;
  stats.index = frame.index;
  stats.avg_intensity = static_cast<double>(k_->sum_bytes(frame.pixels.data(), 3 * n)) /
                        static_cast<double>(3 * n);
  std::uint8_t* c = curr_.data();
  k_->rgb_to_hsv_planes(frame.pixels.data(), n, c, c + n, c + 2 * n);
  if (have_prev_) {
    const std::uint8_t* p = prev_.data();
    stats.hsv_delta =
        delta_from_sums(k_->hsv_diff_sums(p, p + n, p + 2 * n, c, c + n, c + 2 * n, n), n);
  }
  std::swap(prev_, curr_);
  have_prev_ = true;
  return stats;
}

std::vector<FrameStats> compute_stats(FrameSource& source) {
  StatsAnalyzer analyzer(source.spec());
  std::vector<FrameStats> out;
  out.reserve(source.frame_count());
  while (auto frame = source.next()) out.push_back(analyzer.push(*frame));
  return out;
}

}  // namespace cutscore
