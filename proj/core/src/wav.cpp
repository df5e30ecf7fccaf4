#include "markbench/wav.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>

#include "markbench/errors.hpp"

namespace markbench {
namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  [[nodiscard]] std::size_t remaining() const { return bytes_.size() - pos_; }
  [[nodiscard]] std::size_t position() const { return pos_; }

  std::uint16_t u16() {
    require(2);
    const std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 4;
    return v;
  }
  std::string fourcc() {
    require(4);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return s;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    require(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  void skip(std::size_t n) { pos_ += std::min(n, remaining()); }

 private:
  void require(std::size_t n) const {
    if (remaining() < n) throw FormatError("unexpected end of RIFF header");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

FmtChunk parse_fmt(std::span<const std::uint8_t> body) {
  if (body.size() < 16) throw FormatError("fmt chunk shorter than 16 bytes");
  ByteReader r(body);
  FmtChunk fmt;
  fmt.format = r.u16();
  fmt.channels = r.u16();
  fmt.sample_rate = r.u32();
  r.u32();  // byte rate
  fmt.block_align = r.u16();
  fmt.bits = r.u16();
  if (fmt.format == kFormatExtensible) {
    if (body.size() < 40) throw FormatError("fmt chunk: WAVE_FORMAT_EXTENSIBLE body shorter than 40 bytes");
    r.u16();  // cbSize
    r.u16();  // valid bits
    r.u32();  // channel mask
    fmt.format = r.u16();  // first two bytes of the subformat GUID
  }
  if (fmt.channels == 0) throw FormatError("fmt chunk: zero channels");
  if (fmt.sample_rate == 0) throw FormatError("fmt chunk: zero sample rate");
  const bool pcm = fmt.format == kFormatPcm && (fmt.bits == 16 || fmt.bits == 24);
  const bool flt = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!pcm && !flt) {
    throw UnsupportedFormatError("unsupported WAV encoding: format tag " + std::to_string(fmt.format) +
                                 ", " + std::to_string(fmt.bits) + " bits");
  }
  if (fmt.block_align != fmt.channels * (fmt.bits / 8)) {
    throw FormatError("fmt chunk: block align " + std::to_string(fmt.block_align) +
                      " inconsistent with channels and bit depth");
  }
  return fmt;
}

double decode_sample(const std::uint8_t* p, const FmtChunk& fmt) {
  switch (fmt.bits) {
    case 16: {
      const auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      return v / 32768.0;
    }
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default: {
      std::uint32_t u = p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
      return std::bit_cast<float>(u);
    }
  }
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

std::int32_t quantize_pcm(float sample, int bits) {
  const double full = std::ldexp(1.0, bits - 1);
  const double max_code = full - 1.0;
  double scaled = static_cast<double>(sample) * full;
  if (!(scaled > -full)) scaled = -full;  // also maps NaN to the negative rail
  if (scaled > max_code) scaled = max_code;
  // std::round is half away from zero.
  return static_cast<std::int32_t>(std::round(scaled));
}

}  // namespace

WavEncoding parse_wav_encoding(std::string_view name) {
  if (name == "pcm16") return WavEncoding::pcm16;
  if (name == "pcm24") return WavEncoding::pcm24;
  if (name == "float32") return WavEncoding::float32;
  throw ParameterError("unknown WAV encoding '" + std::string(name) + "'");
}

std::string_view to_string(WavEncoding encoding) {
  switch (encoding) {
    case WavEncoding::pcm16: return "pcm16";
    case WavEncoding::pcm24: return "pcm24";
    case WavEncoding::float32: return "float32";
  }
  return "?";
}

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.remaining() < 12) throw FormatError("RIFF header: file shorter than 12 bytes");
  if (r.fourcc() != "RIFF") throw FormatError("RIFF header: missing 'RIFF' tag");
  r.u32();  // RIFF size; readers tolerate inconsistent values
  if (r.fourcc() != "WAVE") throw FormatError("RIFF header: form type is not 'WAVE'");

  std::optional<FmtChunk> fmt;
  while (r.remaining() >= 8) {
    const std::string id = r.fourcc();
    const std::uint32_t size = r.u32();
    if (id == "fmt ") {
      if (size > r.remaining()) throw FormatError("fmt chunk: declared size exceeds file");
      fmt = parse_fmt(r.take(size));
      if (size & 1u) r.skip(1);
    } else if (id == "data") {
      if (!fmt) throw FormatError("data chunk: appears before fmt chunk");
      if (size > r.remaining()) {
        throw TruncationError("data chunk: declares " + std::to_string(size) + " bytes but only " +
                              std::to_string(r.remaining()) + " remain");
      }
      if (size % fmt->block_align != 0) {
        throw TruncationError("data chunk: size " + std::to_string(size) +
                              " is not a multiple of the block align");
      }
      auto data = r.take(size);
      const std::size_t frames = size / fmt->block_align;
      const std::size_t width = fmt->bits / 8;
      std::vector<float> mono(frames);
      for (std::size_t f = 0; f < frames; ++f) {
        const std::uint8_t* frame = data.data() + f * fmt->block_align;
        if (fmt->channels == 1) {
          mono[f] = static_cast<float>(decode_sample(frame, *fmt));
          continue;
        }
        double acc = 0.0;
        for (std::size_t c = 0; c < fmt->channels; ++c) acc += decode_sample(frame + c * width, *fmt);
        mono[f] = static_cast<float>(acc / fmt->channels);
      }
      for (float& s : mono) {
        if (!std::isfinite(s)) throw FormatError("data chunk: non-finite float sample");
      }
      return AudioBuffer(std::move(mono), static_cast<int>(fmt->sample_rate));
    } else {
      if (size > r.remaining()) throw FormatError("'" + id + "' chunk: declared size exceeds file");
      r.skip(size + (size & 1u));
    }
  }
  if (!fmt) throw FormatError("fmt chunk: missing");
  throw FormatError("data chunk: missing");
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const TruncationError& e) {
    throw TruncationError(path.string() + ": " + e.what());
  } catch (const UnsupportedFormatError& e) {
    throw UnsupportedFormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer, WavEncoding encoding) {
  const std::uint16_t bits = encoding == WavEncoding::pcm16 ? 16 : encoding == WavEncoding::pcm24 ? 24 : 32;
  const std::uint16_t width = bits / 8;
  const bool is_float = encoding == WavEncoding::float32;
  const auto data_size = static_cast<std::uint32_t>(buffer.size() * width);
  const std::uint32_t fmt_size = is_float ? 18 : 16;
  const std::uint32_t fact_size = is_float ? 12 : 0;
  const std::uint32_t riff_size = 4 + (8 + fmt_size) + fact_size + (8 + data_size) + (data_size & 1u);

  std::vector<std::uint8_t> out;
  out.reserve(riff_size + 8);
  put_tag(out, "RIFF");
  put_u32(out, riff_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, fmt_size);
  put_u16(out, is_float ? kFormatFloat : kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate()));
  put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate()) * width);
  put_u16(out, width);
  put_u16(out, bits);
  if (is_float) {
    put_u16(out, 0);  // cbSize
    put_tag(out, "fact");
    put_u32(out, 4);
    put_u32(out, static_cast<std::uint32_t>(buffer.size()));
  }
  put_tag(out, "data");
  put_u32(out, data_size);
  for (float s : buffer.samples()) {
    if (is_float) {
      put_u32(out, std::bit_cast<std::uint32_t>(s));
    } else {
      const auto code = static_cast<std::uint32_t>(quantize_pcm(s, bits));
      for (int i = 0; i < width; ++i) out.push_back(static_cast<std::uint8_t>((code >> (8 * i)) & 0xFF));
    }
  }
  if (data_size & 1u) out.push_back(0);
  return out;
}

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path, WavEncoding encoding) {
  const auto bytes = encode_wav(buffer, encoding);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace markbench
