#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "dgmo/errors.hpp"
#include "dgmo/refio.hpp"
#include "oracles.hpp"

namespace dgmo {
namespace {

namespace fs = std::filesystem;

ReferenceSet random_set(std::size_t n, std::size_t n_mels, std::size_t frames, std::uint64_t seed,
                        MelDomain domain = MelDomain::log) {
  ReferenceSet refs;
  refs.mel_config.n_mels = static_cast<int>(n_mels);
  refs.mel_config.loss_domain = domain;
  refs.mel_config = refs.mel_config.resolved(16000);
  refs.provenance = {"a barking dog", "unit", 0.7, 25, RefOrigin::diffusion};
  for (std::size_t i = 0; i < n; ++i) {
    MelSpectrogram m{RealMatrix(n_mels, frames), domain, refs.mel_config};
    const auto noise = testing::seeded_noise(m.values.size(), seed + i);
    for (std::size_t c = 0; c < noise.size(); ++c) m.values.flat()[c] = static_cast<float>(noise[c]);
    refs.mels.push_back(std::move(m));
  }
  return refs;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream(p, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

class RefioTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("dgmo_refio_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(RefioTest, FullSizeRoundTripIsBitwise) {
  const auto refs = random_set(4, 256, 1025, 1);
  const auto path = dir_ / "refs.dgm1";
  write_refset(refs, path);
  EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
  const auto back = read_refset(path);
  ASSERT_EQ(back.count(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(back.mels[i].values, refs.mels[i].values);
  EXPECT_EQ(back.mel_config, refs.mel_config);
  EXPECT_EQ(back.stft_config, refs.stft_config);
  EXPECT_EQ(back.sample_rate, 16000);
  EXPECT_EQ(back.provenance, refs.provenance);
  EXPECT_EQ(back.domain(), MelDomain::log);
}

TEST_F(RefioTest, LayoutIsMagicLengthJsonPayload) {
  const auto path = dir_ / "refs.dgm1";
  write_refset(random_set(2, 8, 5, 3, MelDomain::linear), path);
  const auto bytes = slurp(path);
  ASSERT_GE(bytes.size(), 8u);
  EXPECT_EQ(std::string(bytes.data(), 4), "DGM1");
  std::uint32_t len = 0;
  std::memcpy(&len, bytes.data() + 4, 4);
  const auto header = nlohmann::json::parse(std::string(bytes.data() + 8, len));
  EXPECT_EQ(header.at("version"), 1);
  EXPECT_EQ(header.at("kind"), "reference_set");
  EXPECT_EQ(header.at("count"), 2);
  EXPECT_EQ(header.at("shape"), nlohmann::json::array({8, 5}));
  EXPECT_EQ(header.at("dtype"), "f32le");
  EXPECT_EQ(header.at("domain"), "linear");
  EXPECT_EQ(header.at("mel_config").at("f_max"), 8000.0);
  EXPECT_EQ(header.at("stft_config").at("hop_length"), 160);
  EXPECT_EQ(header.at("provenance").at("query"), "a barking dog");
  EXPECT_EQ(bytes.size(), 8u + len + 2 * 8 * 5 * sizeof(float));

  const auto h = read_dgm1_header(path);
  EXPECT_EQ(h.count, 2u);
  EXPECT_EQ(h.rows, 8u);
  EXPECT_EQ(h.cols, 5u);
}

TEST_F(RefioTest, TruncatedPayloadIsCorruption) {
  const auto path = dir_ / "refs.dgm1";
  write_refset(random_set(1, 4, 4, 5), path);
  auto bytes = slurp(path);
  bytes.resize(bytes.size() - 3);
  dump(path, bytes);
  EXPECT_THROW(read_refset(path), CorruptionError);
  bytes.resize(10);
  dump(path, bytes);
  EXPECT_THROW(read_refset(path), CorruptionError);
}

TEST_F(RefioTest, BadMagicIsFormatErrorNotCorruption) {
  const auto path = dir_ / "refs.dgm1";
  write_refset(random_set(1, 4, 4, 5), path);
  auto bytes = slurp(path);
  bytes[3] = '2';
  dump(path, bytes);
  try {
    read_refset(path);
    FAIL() << "expected FormatError";
  } catch (const CorruptionError&) {
    FAIL() << "bad magic reported as corruption";
  } catch (const FormatError&) {
  }
}

TEST_F(RefioTest, UnknownVersionIsVersionError) {
  const auto path = dir_ / "refs.dgm1";
  write_refset(random_set(1, 4, 4, 5), path);
  const auto bytes = slurp(path);
  std::uint32_t len = 0;
  std::memcpy(&len, bytes.data() + 4, 4);
  auto header = nlohmann::json::parse(std::string(bytes.data() + 8, len));
  header["version"] = 2;
  const auto text = header.dump();
  std::vector<char> out(bytes.begin(), bytes.begin() + 4);
  const auto new_len = static_cast<std::uint32_t>(text.size());
  out.insert(out.end(), reinterpret_cast<const char*>(&new_len), reinterpret_cast<const char*>(&new_len) + 4);
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), bytes.begin() + 8 + len, bytes.end());
  dump(path, out);
  EXPECT_THROW(read_refset(path), VersionError);
}

TEST_F(RefioTest, MissingFileIsIoError) { EXPECT_THROW(read_refset(dir_ / "nope.dgm1"), IoError); }

TEST_F(RefioTest, RandomizedRoundTrips) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 1 + seed % 4, mels = 1 + (seed * 7) % 40, frames = 1 + (seed * 13) % 50;
    const auto refs = random_set(n, mels, frames, seed * 31, seed % 2 ? MelDomain::log : MelDomain::linear);
    const auto path = dir_ / "r.dgm1";
    write_refset(refs, path);
    const auto back = read_refset(path);
    ASSERT_EQ(back.count(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(back.mels[i].values, refs.mels[i].values);
    EXPECT_EQ(back.domain(), refs.domain());
  }
}

TEST_F(RefioTest, MaskRoundTrip) {
  Mask m(1025, 3);
  for (std::size_t i = 0; i < m.logits().size(); ++i) m.logits().flat()[i] = std::sin(0.01 * i) * 8.0;
  const auto path = dir_ / "mask.dgm1";
  write_mask(m, StftConfig{}, 16000, path);
  const auto values = read_mask_values(path);
  const auto expect = m.values();
  ASSERT_TRUE(values.same_shape(expect));
  for (std::size_t i = 0; i < values.size(); ++i) EXPECT_EQ(values.flat()[i], static_cast<float>(expect.flat()[i]));
  EXPECT_EQ(read_dgm1_header(path).kind, Dgm1Kind::mask);
  EXPECT_THROW(read_refset(path), FormatError);
}

TEST(OracleRefs, WithoutJitterEqualsQuantizedMel) {
  const Waveform target{testing::seeded_noise(8000, 2, 0.1)};
  const auto refs = oracle_refs(target, MelConfig{}, StftConfig{}, 3, 0.0, 0);
  const MelFilterbank fb(MelConfig{}, StftConfig{}, 16000);
  const auto [mag, phase] = magphase(stft(target, StftConfig{}));
  const auto mel = apply_mel(mag, fb, MelDomain::log);
  ASSERT_EQ(refs.count(), 3u);
  EXPECT_EQ(refs.provenance.created_by, RefOrigin::oracle);
  for (const auto& r : refs.mels) {
    for (std::size_t i = 0; i < r.values.size(); ++i)
      EXPECT_EQ(r.values.flat()[i], static_cast<double>(static_cast<float>(mel.values.flat()[i])));
  }
}

TEST(OracleRefs, JitterIsBoundedSeededAndIndependent) {
  const Waveform target{testing::seeded_noise(8000, 2, 0.1)};
  MelConfig lin;
  lin.loss_domain = MelDomain::linear;
  const double jitter_db = 1.0;
  const double sigma = jitter_db * std::log(10.0) / 20.0;
  const auto clean = oracle_refs(target, lin, StftConfig{}, 1, 0.0, 0);
  const auto a = oracle_refs(target, lin, StftConfig{}, 2, jitter_db, 9);
  const auto b = oracle_refs(target, lin, StftConfig{}, 2, jitter_db, 9);
  const auto c = oracle_refs(target, lin, StftConfig{}, 2, jitter_db, 10);
  EXPECT_EQ(a.mels[0].values, b.mels[0].values);
  EXPECT_NE(a.mels[0].values, c.mels[0].values);
  EXPECT_NE(a.mels[0].values, a.mels[1].values);
  double sum = 0.0, sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < clean.mels[0].values.size(); ++i) {
    const double base = clean.mels[0].values.flat()[i];
    if (base < 1e-3) continue;
    const double ratio = std::log(a.mels[0].values.flat()[i] / base);
    EXPECT_LE(std::abs(ratio), 5.0 * sigma + 1e-6);
    sum += ratio;
    sq += ratio * ratio;
    ++count;
  }
  ASSERT_GT(count, 1000u);
  const double mean = sum / count;
  EXPECT_NEAR(std::sqrt(sq / count - mean * mean), sigma, 0.1 * sigma);
  EXPECT_THROW(oracle_refs(target, lin, StftConfig{}, 0, 0.0, 0), ConfigError);
}

TEST(Paths, QuerySlugAndReferencePath) {
  EXPECT_EQ(query_slug("A Dog  Barking!"), "a_dog_barking");
  EXPECT_EQ(query_slug("  --piano-- "), "piano");
  EXPECT_EQ(query_slug("!!!"), "query");
  EXPECT_EQ(reference_path("/refs", "mix01", "Female Speech"), fs::path("/refs/mix01/female_speech.dgm1"));
}

}  // namespace
}  // namespace dgmo
