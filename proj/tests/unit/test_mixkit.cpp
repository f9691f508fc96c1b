#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "dgmo/errors.hpp"
#include "dgmo/metrics.hpp"
#include "dgmo/mixkit.hpp"
#include "dgmo/stft.hpp"
#include "oracles.hpp"

namespace dgmo {
namespace {

namespace fs = std::filesystem;

Waveform noise(std::size_t n, std::uint64_t seed, double stddev = 0.1) {
  return Waveform{testing::seeded_noise(n, seed, stddev)};
}

double snr_db(const Mixture& m) {
  return 10.0 * std::log10(energy(m.target.samples) / energy(m.background.samples));
}

TEST(MixAtSnr, EqualEnergyAtZeroDbNeedsNoScaling) {
  Waveform t{{1.0, 0.0, -1.0, 0.0}};
  Waveform b{{0.0, 1.0, 0.0, -1.0}};
  const auto m = mix_at_snr({t, b, 0.0});
  EXPECT_EQ(m.background_scale, 1.0);
  EXPECT_EQ(m.mixture.samples, (std::vector<double>{1.0, 1.0, -1.0, -1.0}));
}

TEST(MixAtSnr, QuarterEnergyBackgroundIsDoubled) {
  Waveform t{{1.0, 0.0, -1.0, 0.0}};
  Waveform b{{0.0, 0.5, 0.0, -0.5}};
  const auto m = mix_at_snr({t, b, 0.0});
  EXPECT_DOUBLE_EQ(m.background_scale, 2.0);
}

TEST(MixAtSnr, HitsRequestedSnrAndSumsExactly) {
  for (double snr : {-10.0, -3.0, 0.0, 5.0, 20.0}) {
    const auto m = mix_at_snr({noise(3000, 1), noise(3000, 2, 0.7), snr});
    EXPECT_NEAR(snr_db(m), snr, 1e-9);
    for (std::size_t i = 0; i < m.mixture.size(); ++i) {
      EXPECT_EQ(m.mixture.samples[i], m.target.samples[i] + m.background.samples[i]);
    }
  }
}

TEST(MixAtSnr, PadsShorterStem) {
  const auto m = mix_at_snr({noise(100, 1), noise(60, 2), 0.0});
  EXPECT_EQ(m.mixture.size(), 100u);
  EXPECT_EQ(m.background.size(), 100u);
  EXPECT_EQ(m.background.samples[80], 0.0);
}

TEST(MixAtSnr, RejectsDegenerateInputs) {
  EXPECT_THROW(mix_at_snr({noise(10, 1), Waveform{std::vector<double>(10, 0.0)}, 0.0}), DomainError);
  EXPECT_THROW(mix_at_snr({Waveform{std::vector<double>(10, 0.0)}, noise(10, 1), 0.0}), DomainError);
  EXPECT_THROW(mix_at_snr({noise(10, 1), noise(10, 2), INFINITY}), ContractError);
  EXPECT_THROW(mix_at_snr({noise(10, 1), noise(10, 2), NAN}), ContractError);
  Waveform other_rate = noise(10, 3);
  other_rate.sample_rate = 8000;
  EXPECT_THROW(mix_at_snr({noise(10, 1), other_rate, 0.0}), ContractError);
}

TEST(ClipNormalize, LeavesInRangeSignalsAlone) {
  Waveform w{{0.8, -0.5, 0.1}};
  const auto out = clip_normalize(w);
  EXPECT_EQ(out.samples, w.samples);
  EXPECT_EQ(out.gain_applied, 1.0);
}

TEST(ClipNormalize, RescalesOverRangePeakAndIsIdempotent) {
  Waveform w{{1.8, -0.9, 0.3}};
  const auto out = clip_normalize(w);
  EXPECT_DOUBLE_EQ(out.samples[0], 0.9);
  EXPECT_DOUBLE_EQ(out.samples[1], -0.45);
  EXPECT_DOUBLE_EQ(out.gain_applied, 0.5);
  const auto again = clip_normalize(out);
  EXPECT_EQ(again.samples, out.samples);
}

TEST(ClipNormalize, MixtureKeepsStemsConsistent) {
  const auto m = mix_at_snr({noise(2000, 4, 1.0), noise(2000, 5, 1.0), 0.0});
  ASSERT_GT(peak_abs(m.mixture.samples), 1.0);
  const auto c = clip_normalize(m);
  EXPECT_NEAR(peak_abs(c.mixture.samples), 0.9, 1e-15);
  for (std::size_t i = 0; i < c.mixture.size(); ++i) {
    EXPECT_EQ(c.mixture.samples[i], c.target.samples[i] + c.background.samples[i]);
  }
  EXPECT_NEAR(snr_db(c), 0.0, 1e-9);
}

TEST(RmsDbfs, ScalesToLevel) {
  const auto w = scale_to_rms_dbfs(noise(1000, 6), -26.0);
  EXPECT_NEAR(rms_dbfs(w), -26.0, 1e-9);
  EXPECT_THROW(rms_dbfs(Waveform{std::vector<double>(4, 0.0)}), DomainError);
}

TEST(SynthSource, BandNoiseStaysInBand) {
  const auto w = synth_source(SourceKind::band_noise, {0.0, 2000.0}, 1.0, 16000, 3);
  ASSERT_EQ(w.size(), 16000u);
  EXPECT_NEAR(std::sqrt(energy(w.samples) / w.size()), 0.1, 1e-12);
  const auto spec = testing::direct_dft(w.samples, w.size() / 2 + 1);
  double in_band = 0.0, total = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double e = std::norm(spec[k]);
    total += e;
    if (k * 16000.0 / w.size() <= 2000.0) in_band += e;
  }
  EXPECT_GT(in_band / total, 0.99);
}

TEST(SynthSource, AllKindsAreSeededAndNormalized) {
  for (auto kind : {SourceKind::band_noise, SourceKind::tone_stack, SourceKind::chirp}) {
    const auto a = synth_source(kind, {500.0, 3000.0}, 0.5, 16000, 11);
    const auto b = synth_source(kind, {500.0, 3000.0}, 0.5, 16000, 11);
    const auto c = synth_source(kind, {500.0, 3000.0}, 0.5, 16000, 12);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_NE(a.samples, c.samples);
    EXPECT_NEAR(std::sqrt(energy(a.samples) / a.size()), 0.1, 1e-12);
  }
  EXPECT_THROW(synth_source(SourceKind::chirp, {3000.0, 500.0}, 0.5, 16000, 1), ConfigError);
  EXPECT_THROW(synth_source(SourceKind::chirp, {0.0, 9000.0}, 0.5, 16000, 1), ConfigError);
}

TEST(SynthSource, DisjointBandsAreSeparableByIdealRatioMask) {
  const auto t = synth_source(SourceKind::band_noise, {0.0, 2000.0}, 2.0, 16000, 1);
  const auto b = synth_source(SourceKind::band_noise, {4000.0, 8000.0}, 2.0, 16000, 2);
  const auto m = mix_at_snr({t, b, 0.0});
  const StftConfig cfg;
  const auto [mix_mag, mix_phase] = magphase(stft(m.mixture, cfg));
  const auto [t_mag, t_phase] = magphase(stft(m.target, cfg));
  const auto [b_mag, b_phase] = magphase(stft(m.background, cfg));
  const auto irm = testing::ideal_ratio_mask(t_mag.values, b_mag.values);
  MagnitudeSpectrogram masked = mix_mag;
  for (std::size_t i = 0; i < irm.size(); ++i) masked.values.flat()[i] *= irm.flat()[i];
  const auto est = istft(masked, mix_phase, cfg, m.mixture.size());
  EXPECT_GT(si_sdr(est, m.target), 20.0);
}

class ManifestTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("dgmo_manifest_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_ / "stems");
    save_waveform(dir_ / "stems" / "t.wav", synth_source(SourceKind::tone_stack, {200.0, 1500.0}, 0.5, 16000, 1));
    save_waveform(dir_ / "stems" / "b.wav", synth_source(SourceKind::band_noise, {3000.0, 7000.0}, 0.4, 16000, 2));
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& text) {
    const auto p = dir_ / "manifest.json";
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

TEST_F(ManifestTest, ParsesRowsAndResolvesRelativePaths) {
  const auto rows = read_manifest(write(R"([
    {"id": "a", "target": "stems/t.wav", "background": "stems/b.wav", "snr_db": 5, "query": "a dog", "seed": 7},
    {"id": "b", "target": "stems/t.wav", "background": "stems/b.wav", "rms_dbfs": [-30, -20]}
  ])"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].target, dir_ / "stems/t.wav");
  EXPECT_EQ(rows[0].snr_db, 5.0);
  EXPECT_EQ(rows[0].query, "a dog");
  EXPECT_EQ(rows[0].seed, 7u);
  EXPECT_FALSE(rows[0].rms_dbfs);
  ASSERT_TRUE(rows[1].rms_dbfs);
  EXPECT_EQ(rows[1].rms_dbfs->first, -30.0);
}

TEST_F(ManifestTest, RejectsMalformedManifests) {
  EXPECT_THROW(read_manifest(write(R"([{"id": "a", "target": "t", "background": "b"},
                                       {"id": "a", "target": "t", "background": "b"}])")),
               FormatError);
  EXPECT_THROW(read_manifest(write(R"([{"id": "a", "target": "t"}])")), FormatError);
  EXPECT_THROW(read_manifest(write(R"([{"id": "../x", "target": "t", "background": "b"}])")), FormatError);
  EXPECT_THROW(read_manifest(write(R"({"id": "a"})")), FormatError);
  EXPECT_THROW(read_manifest(write("not json")), FormatError);
  EXPECT_THROW(read_manifest(dir_ / "missing.json"), IoError);
  EXPECT_TRUE(read_manifest(write("[]")).empty());
}

TEST_F(ManifestTest, MaterializeWritesStemsAndMeta) {
  const auto rows = read_manifest(write(R"([
    {"id": "row1", "target": "stems/t.wav", "background": "stems/b.wav", "snr_db": 3, "query": "tones", "seed": 4,
     "rms_dbfs": [-25, -20]}
  ])"));
  materialize_row(rows[0], dir_ / "out");
  const auto row_dir = dir_ / "out" / "row1";
  const auto mix = load_waveform(row_dir / "mixture.wav");
  const auto t = load_waveform(row_dir / "target.wav");
  const auto b = load_waveform(row_dir / "background.wav");
  ASSERT_EQ(mix.size(), 8000u);
  ASSERT_EQ(b.size(), 8000u);
  for (std::size_t i = 0; i < mix.size(); ++i) EXPECT_NEAR(mix.samples[i], t.samples[i] + b.samples[i], 1e-7);
  EXPECT_NEAR(10.0 * std::log10(energy(t.samples) / energy(b.samples)), 3.0, 1e-4);
  EXPECT_LE(peak_abs(mix.samples), 1.0);

  std::ifstream in(row_dir / "meta.json");
  const auto meta = nlohmann::json::parse(in);
  EXPECT_EQ(meta.at("query"), "tones");
  EXPECT_EQ(meta.at("samples"), 8000);
  const double level = meta.at("target_rms_dbfs");
  EXPECT_GE(level, -25.0);
  EXPECT_LE(level, -20.0);
}

}  // namespace
}  // namespace dgmo
