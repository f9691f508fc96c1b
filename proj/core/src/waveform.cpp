#include "dgmo/waveform.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "dgmo/errors.hpp"

namespace dgmo {
namespace {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(const std::vector<char>& buf, std::size_t off) {
  T v;
  std::memcpy(&v, buf.data() + off, sizeof(T));
  return v;
}

template <typename T>
void write_le(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return buf;
}

struct WavFormat {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

Waveform decode_wav(const std::vector<char>& buf, const std::string& name) {
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(name + ": not a RIFF/WAVE file");
  }
  WavFormat fmt;
  bool have_fmt = false;
  const char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t off = 12;
  while (off + 8 <= buf.size()) {
    const std::string id(buf.data() + off, 4);
    const auto size = read_le<std::uint32_t>(buf, off + 4);
    const std::size_t body = off + 8;
    const std::size_t avail = buf.size() - body;
    if (id == "fmt ") {
      if (size < 16 || avail < 16) throw FormatError(name + ": short fmt chunk");
      fmt.format = read_le<std::uint16_t>(buf, body);
      fmt.channels = read_le<std::uint16_t>(buf, body + 2);
      fmt.sample_rate = read_le<std::uint32_t>(buf, body + 4);
      fmt.bits = read_le<std::uint16_t>(buf, body + 14);
      if (fmt.format == kFormatExtensible) {
        if (size < 40 || avail < 40) throw FormatError(name + ": short extensible fmt chunk");
        // First two bytes of the SubFormat GUID carry the actual format tag.
        fmt.format = read_le<std::uint16_t>(buf, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data = buf.data() + body;
      data_size = std::min<std::size_t>(size, avail);
      break;
    }
    off = body + size + (size & 1u);
  }
  if (!have_fmt) throw FormatError(name + ": missing fmt chunk");
  if (data == nullptr) throw FormatError(name + ": missing data chunk");
  if (fmt.channels == 0 || fmt.sample_rate == 0) throw FormatError(name + ": bad fmt values");

  const bool pcm16 = fmt.format == kFormatPcm && fmt.bits == 16;
  const bool f32 = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!pcm16 && !f32) {
    throw FormatError(name + ": unsupported encoding (format " + std::to_string(fmt.format) +
                      ", " + std::to_string(fmt.bits) + " bits); need PCM16 or float32");
  }

  const std::size_t bytes = fmt.bits / 8;
  const std::size_t frames = data_size / (bytes * fmt.channels);
  Waveform w;
  w.sample_rate = static_cast<int>(fmt.sample_rate);
  w.samples.assign(frames, 0.0);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      const char* p = data + (i * fmt.channels + c) * bytes;
      if (pcm16) {
        std::int16_t s;
        std::memcpy(&s, p, 2);
        acc += s / 32768.0;
      } else {
        float s;
        std::memcpy(&s, p, 4);
        acc += s;
      }
    }
    w.samples[i] = acc / fmt.channels;
  }
  return w;
}

}  // namespace

void Waveform::validate() const {
  if (sample_rate <= 0) throw ContractError("waveform sample_rate must be positive");
  if (!(gain_applied > 0.0) || !std::isfinite(gain_applied)) {
    throw ContractError("waveform gain_applied must be positive and finite");
  }
  for (double s : samples) {
    if (!std::isfinite(s)) throw ContractError("waveform contains a non-finite sample");
  }
}

Waveform load_waveform(const std::filesystem::path& path, int target_sr) {
  if (target_sr <= 0) throw ConfigError("target sample rate must be positive");
  Waveform w = decode_wav(slurp(path), path.string());
  w.validate();
  if (w.sample_rate != target_sr) w = resample_linear(w, target_sr);
  return w;
}

void save_waveform(const std::filesystem::path& path, const Waveform& w, WavEncoding encoding) {
  w.validate();
  const bool pcm16 = encoding == WavEncoding::pcm16;
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.samples.size() * (bits / 8));

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot create " + path.string());
  os.write("RIFF", 4);
  write_le<std::uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  write_le<std::uint32_t>(os, 16);
  write_le<std::uint16_t>(os, pcm16 ? kFormatPcm : kFormatFloat);
  write_le<std::uint16_t>(os, 1);
  write_le<std::uint32_t>(os, static_cast<std::uint32_t>(w.sample_rate));
  write_le<std::uint32_t>(os, static_cast<std::uint32_t>(w.sample_rate) * (bits / 8));
  write_le<std::uint16_t>(os, bits / 8);
  write_le<std::uint16_t>(os, bits);
  os.write("data", 4);
  write_le<std::uint32_t>(os, data_bytes);
  for (double s : w.samples) {
    if (pcm16) {
      const double clipped = std::clamp(s, -1.0, 1.0);
      write_le<std::int16_t>(os, static_cast<std::int16_t>(std::lround(std::min(clipped * 32768.0, 32767.0))));
    } else {
      write_le<float>(os, static_cast<float>(s));
    }
  }
  if (!os) throw IoError("write failed: " + path.string());
}

Waveform resample_linear(const Waveform& w, int target_sr) {
  if (target_sr <= 0) throw ConfigError("target sample rate must be positive");
  if (w.sample_rate == target_sr || w.empty()) {
    Waveform out = w;
    out.sample_rate = target_sr;
    return out;
  }
  const double ratio = static_cast<double>(w.sample_rate) / target_sr;
  const auto n_out = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(static_cast<double>(w.size()) / ratio)));
  Waveform out;
  out.sample_rate = target_sr;
  out.gain_applied = w.gain_applied;
  out.samples.resize(n_out);
  const std::size_t last = w.size() - 1;
  for (std::size_t j = 0; j < n_out; ++j) {
    const double pos = j * ratio;
    const auto i = static_cast<std::size_t>(pos);
    if (i >= last) {
      out.samples[j] = w.samples[last];
      continue;
    }
    const double frac = pos - static_cast<double>(i);
    out.samples[j] = w.samples[i] + frac * (w.samples[i + 1] - w.samples[i]);
  }
  return out;
}

std::size_t centered_pad_offset(std::size_t original_len, std::size_t padded_len) {
  return original_len >= padded_len ? 0 : (padded_len - original_len) / 2;
}

Waveform pad_and_normalize(const Waveform& w, double duration_s, double peak) {
  if (w.empty()) throw ContractError("pad_and_normalize: empty waveform");
  if (!(duration_s > 0.0) || !(peak > 0.0)) throw ConfigError("pad_and_normalize: duration and peak must be positive");
  w.validate();
  const auto target = static_cast<std::size_t>(std::llround(duration_s * w.sample_rate));

  Waveform out;
  out.sample_rate = w.sample_rate;
  out.gain_applied = w.gain_applied;
  out.samples.assign(target, 0.0);
  if (w.size() >= target) {
    std::copy_n(w.samples.begin(), target, out.samples.begin());
  } else {
    std::copy(w.samples.begin(), w.samples.end(),
              out.samples.begin() + static_cast<std::ptrdiff_t>(centered_pad_offset(w.size(), target)));
  }

  const double current = peak_abs(out.samples);
  if (current > 0.0) {
    const double scale = peak / current;
    // Rounding can leave the peak an ulp away from target; treat that as done.
    if (std::abs(scale - 1.0) > 4 * std::numeric_limits<double>::epsilon()) {
      for (double& s : out.samples) s *= scale;
      out.gain_applied *= scale;
    }
  }
  return out;
}

Waveform strip_padding(const Waveform& padded, std::size_t original_len) {
  Waveform out;
  out.sample_rate = padded.sample_rate;
  out.gain_applied = padded.gain_applied;
  out.samples.assign(original_len, 0.0);
  const std::size_t off = centered_pad_offset(original_len, padded.size());
  const std::size_t n = std::min(original_len, padded.size() - std::min(off, padded.size()));
  std::copy_n(padded.samples.begin() + static_cast<std::ptrdiff_t>(off), n, out.samples.begin());
  return out;
}

Waveform undo_gain(const Waveform& w) {
  Waveform out = w;
  if (w.gain_applied != 1.0) {
    for (double& s : out.samples) s /= w.gain_applied;
  }
  out.gain_applied = 1.0;
  return out;
}

double energy(const std::vector<double>& samples) {
  double e = 0.0;
  for (double s : samples) e += s * s;
  return e;
}

double peak_abs(const std::vector<double>& samples) {
  double p = 0.0;
  for (double s : samples) p = std::max(p, std::abs(s));
  return p;
}

}  // namespace dgmo
