#include "dgmo/refio.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "dgmo/errors.hpp"

namespace dgmo {
namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'D', 'G', 'M', '1'};
constexpr std::uint32_t kMaxHeaderBytes = 1u << 20;

static_assert(std::endian::native == std::endian::little, "DGM1 I/O assumes a little-endian host");

const char* to_string(MelScale s) { return s == MelScale::htk ? "htk" : "slaney"; }
const char* to_string(FilterNorm n) { return n == FilterNorm::none ? "none" : "slaney_area"; }
const char* to_string(MelDomain d) { return d == MelDomain::log ? "log" : "linear"; }
const char* to_string(Dgm1Kind k) { return k == Dgm1Kind::mask ? "mask" : "reference_set"; }
const char* to_string(RefOrigin o) {
  switch (o) {
    case RefOrigin::diffusion: return "diffusion";
    case RefOrigin::oracle: return "oracle";
    case RefOrigin::file: return "file";
  }
  return "file";
}

template <typename E>
E parse_enum(const json& j, const char* key, std::initializer_list<std::pair<const char*, E>> options) {
  const auto s = j.at(key).get<std::string>();
  for (const auto& [name, value] : options) {
    if (s == name) return value;
  }
  throw FormatError(std::string("DGM1 header: unknown ") + key + " '" + s + "'");
}

json header_to_json(const RefFileHeader& h) {
  const auto& m = h.mel_config;
  const auto& s = h.stft_config;
  return json{
      {"version", h.version},
      {"kind", to_string(h.kind)},
      {"count", h.count},
      {"shape", {h.rows, h.cols}},
      {"dtype", "f32le"},
      {"sample_rate", h.sample_rate},
      {"domain", to_string(m.loss_domain)},
      {"mel_config",
       {{"n_mels", m.n_mels},
        {"f_min", m.f_min},
        {"f_max", m.resolved_f_max(h.sample_rate)},
        {"mel_scale", to_string(m.mel_scale)},
        {"filter_norm", to_string(m.filter_norm)},
        {"log_floor", m.log_floor}}},
      {"stft_config",
       {{"fft_size", s.fft_size},
        {"win_length", s.win_length},
        {"hop_length", s.hop_length},
        {"window", "hann"},
        {"center", s.center}}},
      {"provenance",
       {{"query", h.provenance.query},
        {"backend_id", h.provenance.backend_id},
        {"noising_ratio", h.provenance.noising_ratio},
        {"ddim_steps", h.provenance.ddim_steps},
        {"created_by", to_string(h.provenance.created_by)}}},
  };
}

RefFileHeader header_from_json(const json& j) {
  RefFileHeader h;
  h.version = j.at("version").get<int>();
  if (h.version != kDgm1Version) {
    throw VersionError("DGM1 header: unsupported version " + std::to_string(h.version));
  }
  h.kind = parse_enum<Dgm1Kind>(j, "kind", {{"reference_set", Dgm1Kind::reference_set}, {"mask", Dgm1Kind::mask}});
  if (j.at("dtype").get<std::string>() != "f32le") throw FormatError("DGM1 header: dtype must be f32le");
  h.count = j.at("count").get<std::size_t>();
  const auto& shape = j.at("shape");
  if (!shape.is_array() || shape.size() != 2) throw FormatError("DGM1 header: shape must be [rows, cols]");
  h.rows = shape.at(0).get<std::size_t>();
  h.cols = shape.at(1).get<std::size_t>();
  if (h.rows == 0 || h.cols == 0 || h.count == 0) throw FormatError("DGM1 header: shape and count must be positive");
  h.sample_rate = j.at("sample_rate").get<int>();

  const auto& m = j.at("mel_config");
  h.mel_config.n_mels = m.at("n_mels").get<int>();
  h.mel_config.f_min = m.at("f_min").get<double>();
  h.mel_config.f_max = m.at("f_max").get<double>();
  h.mel_config.mel_scale = parse_enum<MelScale>(m, "mel_scale", {{"htk", MelScale::htk}, {"slaney", MelScale::slaney}});
  h.mel_config.filter_norm =
      parse_enum<FilterNorm>(m, "filter_norm", {{"none", FilterNorm::none}, {"slaney_area", FilterNorm::slaney_area}});
  h.mel_config.log_floor = m.at("log_floor").get<double>();
  h.mel_config.loss_domain = parse_enum<MelDomain>(j, "domain", {{"log", MelDomain::log}, {"linear", MelDomain::linear}});

  const auto& s = j.at("stft_config");
  h.stft_config.fft_size = s.at("fft_size").get<int>();
  h.stft_config.win_length = s.at("win_length").get<int>();
  h.stft_config.hop_length = s.at("hop_length").get<int>();
  parse_enum<WindowKind>(s, "window", {{"hann", WindowKind::hann}});
  h.stft_config.center = s.at("center").get<bool>();

  if (j.contains("provenance")) {
    const auto& p = j.at("provenance");
    h.provenance.query = p.value("query", std::string{});
    h.provenance.backend_id = p.value("backend_id", std::string{});
    h.provenance.noising_ratio = p.value("noising_ratio", 0.0);
    h.provenance.ddim_steps = p.value("ddim_steps", 0);
    if (p.contains("created_by")) {
      h.provenance.created_by = parse_enum<RefOrigin>(
          p, "created_by",
          {{"diffusion", RefOrigin::diffusion}, {"oracle", RefOrigin::oracle}, {"file", RefOrigin::file}});
    }
  }
  return h;
}

struct RawFile {
  RefFileHeader header;
  std::vector<float> payload;
};

RawFile read_raw(const std::filesystem::path& path, bool with_payload) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto name = path.string();
  if (buf.size() < 8 || std::memcmp(buf.data(), kMagic, 4) != 0) throw FormatError(name + ": bad magic, not a DGM1 file");
  std::uint32_t header_len;
  std::memcpy(&header_len, buf.data() + 4, 4);
  if (header_len > kMaxHeaderBytes || 8 + static_cast<std::size_t>(header_len) > buf.size()) {
    throw CorruptionError(name + ": header length " + std::to_string(header_len) + " exceeds file size");
  }
  json j;
  try {
    j = json::parse(buf.begin() + 8, buf.begin() + 8 + header_len);
  } catch (const json::exception& e) {
    throw CorruptionError(name + ": header is not valid JSON: " + e.what());
  }
  RawFile raw;
  try {
    raw.header = header_from_json(j);
  } catch (const json::exception& e) {
    throw FormatError(name + ": " + e.what());
  }
  const auto& h = raw.header;
  const std::size_t values = h.count * h.rows * h.cols;
  const std::size_t payload_bytes = buf.size() - 8 - header_len;
  if (payload_bytes != values * sizeof(float)) {
    throw CorruptionError(name + ": payload is " + std::to_string(payload_bytes) + " bytes, header declares " +
                          std::to_string(h.count) + " x " + std::to_string(h.rows) + " x " + std::to_string(h.cols) +
                          " f32 = " + std::to_string(values * sizeof(float)) + " bytes");
  }
  if (with_payload) {
    raw.payload.resize(values);
    std::memcpy(raw.payload.data(), buf.data() + 8 + header_len, payload_bytes);
  }
  return raw;
}

void write_raw(const RefFileHeader& h, const std::vector<const RealMatrix*>& mats, const std::filesystem::path& path) {
  const std::string header = header_to_json(h).dump();
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot create " + tmp.string());
    os.write(kMagic, 4);
    const auto len = static_cast<std::uint32_t>(header.size());
    os.write(reinterpret_cast<const char*>(&len), 4);
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    std::vector<float> row;
    for (const RealMatrix* m : mats) {
      row.resize(m->size());
      const auto src = m->flat();
      for (std::size_t i = 0; i < src.size(); ++i) row[i] = static_cast<float>(src[i]);
      os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    os.flush();
    if (!os) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace

void write_refset(const ReferenceSet& refs, const std::filesystem::path& path) {
  refs.validate();
  RefFileHeader h;
  h.kind = Dgm1Kind::reference_set;
  h.count = refs.count();
  h.rows = refs.n_mels();
  h.cols = refs.frames();
  h.mel_config = refs.mel_config.resolved(refs.sample_rate);
  h.stft_config = refs.stft_config;
  h.sample_rate = refs.sample_rate;
  h.provenance = refs.provenance;
  std::vector<const RealMatrix*> mats;
  for (const auto& m : refs.mels) mats.push_back(&m.values);
  write_raw(h, mats, path);
}

RefFileHeader read_dgm1_header(const std::filesystem::path& path) { return read_raw(path, false).header; }

ReferenceSet read_refset(const std::filesystem::path& path) {
  RawFile raw = read_raw(path, true);
  const auto& h = raw.header;
  if (h.kind != Dgm1Kind::reference_set) throw FormatError(path.string() + ": DGM1 file holds a mask, not references");
  if (h.rows != static_cast<std::size_t>(h.mel_config.n_mels)) {
    throw CorruptionError(path.string() + ": shape rows disagree with mel_config.n_mels");
  }
  ReferenceSet refs;
  refs.mel_config = h.mel_config;
  refs.stft_config = h.stft_config;
  refs.sample_rate = h.sample_rate;
  refs.provenance = h.provenance;
  const std::size_t cells = h.rows * h.cols;
  for (std::size_t i = 0; i < h.count; ++i) {
    MelSpectrogram mel;
    mel.domain = h.mel_config.loss_domain;
    mel.config = h.mel_config;
    mel.values = RealMatrix(h.rows, h.cols);
    auto dst = mel.values.flat();
    for (std::size_t c = 0; c < cells; ++c) dst[c] = raw.payload[i * cells + c];
    refs.mels.push_back(std::move(mel));
  }
  try {
    refs.validate();
  } catch (const ContractError& e) {
    throw CorruptionError(path.string() + ": " + e.what());
  }
  return refs;
}

void write_mask(const Mask& m, const StftConfig& stft, int sample_rate, const std::filesystem::path& path) {
  RefFileHeader h;
  h.kind = Dgm1Kind::mask;
  h.count = 1;
  h.rows = m.rows();
  h.cols = m.cols();
  h.mel_config.loss_domain = MelDomain::linear;
  h.stft_config = stft;
  h.sample_rate = sample_rate;
  const RealMatrix values = m.values();
  write_raw(h, {&values}, path);
}

RealMatrix read_mask_values(const std::filesystem::path& path) {
  RawFile raw = read_raw(path, true);
  const auto& h = raw.header;
  if (h.kind != Dgm1Kind::mask || h.count != 1) throw FormatError(path.string() + ": not a DGM1 mask file");
  RealMatrix out(h.rows, h.cols);
  auto dst = out.flat();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = raw.payload[i];
  return out;
}

void quantize_f32(ReferenceSet& refs) {
  for (auto& m : refs.mels) {
    for (double& v : m.values.flat()) v = static_cast<float>(v);
  }
}

ReferenceSet oracle_refs(const Waveform& target, const MelConfig& mcfg, const StftConfig& scfg, int n,
                         double jitter_db, std::uint64_t seed) {
  if (n < 1) throw ConfigError("oracle_refs: n must be >= 1");
  if (!(jitter_db >= 0.0)) throw ConfigError("oracle_refs: jitter_db must be >= 0");
  const MelConfig mel_cfg = mcfg.resolved(target.sample_rate);
  const MelFilterbank fb(mel_cfg, scfg, target.sample_rate);
  const auto [mag, phase] = magphase(stft(target, scfg));
  const MelSpectrogram clean = apply_mel(mag, fb, MelDomain::linear);

  ReferenceSet refs;
  refs.mel_config = mel_cfg;
  refs.stft_config = scfg;
  refs.sample_rate = target.sample_rate;
  refs.provenance.backend_id = "oracle";
  refs.provenance.created_by = RefOrigin::oracle;

  // Amplitude dB -> natural-log standard deviation.
  const double sigma = jitter_db * std::log(10.0) / 20.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    MelSpectrogram mel = clean;
    if (sigma > 0.0) {
      for (double& v : mel.values.flat()) v *= std::exp(sigma * normal(rng));
    }
    if (mel_cfg.loss_domain == MelDomain::log) to_log_domain(mel.values, mel_cfg.log_floor);
    mel.domain = mel_cfg.loss_domain;
    mel.config = mel_cfg;
    refs.mels.push_back(std::move(mel));
  }
  quantize_f32(refs);
  return refs;
}

std::string query_slug(std::string_view query) {
  std::string out;
  bool pending = false;
  for (unsigned char c : query) {
    if (std::isalnum(c)) {
      if (pending && !out.empty()) out.push_back('_');
      pending = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else {
      pending = true;
    }
  }
  return out.empty() ? "query" : out;
}

std::filesystem::path reference_path(const std::filesystem::path& refs_dir, std::string_view mixture_id,
                                     std::string_view query) {
  return refs_dir / std::string(mixture_id) / (query_slug(query) + ".dgm1");
}

}  // namespace dgmo
