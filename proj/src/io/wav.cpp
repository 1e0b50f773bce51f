#include <algorithm>
#include <cmath>
#include <fstream>

#include "bytes.hpp"
#include "vt/error.hpp"
#include "vt/io.hpp"

namespace vt::io {

using detail::load_le;
using detail::store_le;

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("unreadable", "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("unwritable", "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

std::vector<double> decode_wav_mono16k(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE") {
    throw FormatError("not_wav", "not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::string_view data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    std::string_view id = bytes.substr(pos, 4);
    auto size = load_le<std::uint32_t>(bytes.data() + pos + 4);
    std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Some writers leave a bogus size on the final data chunk; do not guess.
      throw FormatError("truncated", "WAV chunk '" + std::string(id) + "' exceeds file size");
    }
    if (id == "fmt ") {
      if (size < 16) throw FormatError("bad_fmt", "WAV fmt chunk too short");
      format = load_le<std::uint16_t>(bytes.data() + body);
      channels = load_le<std::uint16_t>(bytes.data() + body + 2);
      rate = load_le<std::uint32_t>(bytes.data() + body + 4);
      bits = load_le<std::uint16_t>(bytes.data() + body + 14);
      if (format == kFormatExtensible && size >= 40) {
        format = load_le<std::uint16_t>(bytes.data() + body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data = bytes.substr(body, size);
      have_data = true;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt || !have_data) throw FormatError("bad_wav", "WAV file lacks fmt or data chunk");
  if (channels != 1) {
    throw FormatError("channels", "expected mono audio, found " + std::to_string(channels) + " channels");
  }
  if (rate != static_cast<std::uint32_t>(kAudioRateHz)) {
    throw FormatError("sample_rate", "expected 16000 Hz audio, found " + std::to_string(rate) + " Hz");
  }

  const std::size_t width = bits / 8;
  const bool ok = (format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32)) ||
                  (format == kFormatFloat && bits == 32);
  if (!ok) {
    throw FormatError("encoding", "unsupported WAV encoding: format " + std::to_string(format) + ", " +
                                      std::to_string(bits) + " bits");
  }
  if (data.size() % width != 0) throw FormatError("truncated", "WAV data is not a whole number of samples");

  std::vector<double> out(data.size() / width);
  const char* p = data.data();
  for (std::size_t i = 0; i < out.size(); ++i, p += width) {
    if (format == kFormatFloat) {
      float f = load_le<float>(p);
      if (!std::isfinite(f)) throw FormatError("non_finite", "non-finite float sample");
      out[i] = f;
    } else if (bits == 16) {
      out[i] = load_le<std::int16_t>(p) / 32768.0;
    } else if (bits == 24) {
      auto b0 = static_cast<std::uint8_t>(p[0]);
      auto b1 = static_cast<std::uint8_t>(p[1]);
      auto b2 = static_cast<std::uint8_t>(p[2]);
      std::int32_t v = static_cast<std::int32_t>((std::uint32_t{b2} << 24) | (std::uint32_t{b1} << 16) |
                                                 (std::uint32_t{b0} << 8)) >>
                       8;
      out[i] = v / 8388608.0;
    } else {
      out[i] = load_le<std::int32_t>(p) / 2147483648.0;
    }
  }
  return out;
}

std::vector<double> read_wav_mono16k(const std::filesystem::path& path) {
  try {
    return decode_wav_mono16k(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(e.code(), path.string() + ": " + e.what());
  }
}

std::string encode_wav_pcm16(std::span<const double> samples, int sample_rate) {
  std::string out;
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  out.reserve(44 + data_bytes);
  out += "RIFF";
  store_le<std::uint32_t>(out, 36 + data_bytes);
  out += "WAVEfmt ";
  store_le<std::uint32_t>(out, 16);
  store_le<std::uint16_t>(out, kFormatPcm);
  store_le<std::uint16_t>(out, 1);
  store_le<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate));
  store_le<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate) * 2);
  store_le<std::uint16_t>(out, 2);
  store_le<std::uint16_t>(out, 16);
  out += "data";
  store_le<std::uint32_t>(out, data_bytes);
  for (double s : samples) {
    double q = std::nearbyint(s * 32768.0);
    q = std::clamp(q, -32768.0, 32767.0);
    store_le<std::int16_t>(out, static_cast<std::int16_t>(q));
  }
  return out;
}

void write_wav_pcm16(const std::filesystem::path& path, std::span<const double> samples, int sample_rate) {
  write_file_bytes(path, encode_wav_pcm16(samples, sample_rate));
}

}  // namespace vt::io
