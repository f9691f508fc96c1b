#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dgmo/errors.hpp"
#include "dgmo/providers.hpp"
#include "dgmo/refio.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace dgmo {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

class ProviderTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("dgmo_providers_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ::setenv("FAKE_REFGEN_LOG", (dir_ / "calls.log").c_str(), 1);
    ::unsetenv("FAKE_REFGEN_FAIL");
  }
  void TearDown() override {
    ::unsetenv("FAKE_REFGEN_LOG");
    ::unsetenv("FAKE_REFGEN_FAIL");
    fs::remove_all(dir_);
  }

  ExecProviderConfig exec_config() const {
    ExecProviderConfig cfg;
    cfg.executable = DGMO_FAKE_REFGEN;
    cfg.query = "a dog barking";
    cfg.work_dir = dir_ / "work";
    return cfg;
  }

  fs::path dir_;
};

TEST_F(ProviderTest, FixedProviderReturnsSameSet) {
  const auto refs = oracle_refs(Waveform{testing::seeded_noise(4000, 1, 0.1)}, MelConfig{}, StftConfig{}, 2, 0.0, 0);
  FixedProvider p(refs);
  const Waveform est{std::vector<double>(4000, 0.0)};
  EXPECT_EQ(p.references({est, 1, 2, 0}).mels[1].values, refs.mels[1].values);
  EXPECT_EQ(p.references({est, 2, 2, 0}).mels[1].values, refs.mels[1].values);
}

TEST_F(ProviderTest, FileProviderReadsOnceAndServesEveryIteration) {
  const auto refs = oracle_refs(Waveform{testing::seeded_noise(4000, 1, 0.1)}, MelConfig{}, StftConfig{}, 2, 0.0, 0);
  const auto path = dir_ / "refs.dgm1";
  write_refset(refs, path);
  FileProvider p(path);
  const Waveform est{std::vector<double>(4000, 0.0)};
  const auto first = p.references({est, 1, 2, 0});
  fs::remove(path);
  const auto second = p.references({est, 2, 2, 0});
  EXPECT_EQ(first.mels[0].values, refs.mels[0].values);
  EXPECT_EQ(second.mels[0].values, refs.mels[0].values);
}

TEST_F(ProviderTest, FileProviderMissingFileIsIoError) {
  FileProvider p(dir_ / "absent.dgm1");
  const Waveform est{std::vector<double>(10, 0.0)};
  EXPECT_THROW(p.references({est, 1, 1, 0}), IoError);
}

TEST_F(ProviderTest, OracleProviderUsesRequestSizeAndSeed) {
  OracleProvider p(Waveform{testing::seeded_noise(4000, 1, 0.1)}, MelConfig{}, StftConfig{}, 1.0);
  const Waveform est{std::vector<double>(4000, 0.0)};
  const auto a = p.references({est, 1, 3, 5});
  const auto b = p.references({est, 2, 3, 5});
  ASSERT_EQ(a.count(), 3u);
  EXPECT_EQ(a.mels[2].values, b.mels[2].values);
  EXPECT_EQ(a.provenance.created_by, RefOrigin::oracle);
}

TEST_F(ProviderTest, ExecProviderFollowsArgumentContract) {
  ExecProvider p(exec_config());
  const Waveform est{testing::seeded_noise(16000, 3, 0.1)};
  const auto refs = p.references({est, 1, 3, 0});
  EXPECT_EQ(refs.count(), 3u);
  EXPECT_EQ(refs.n_mels(), 64u);
  EXPECT_EQ(refs.frames(), StftConfig{}.frames(16000));
  EXPECT_EQ(refs.provenance.created_by, RefOrigin::diffusion);
  EXPECT_EQ(refs.provenance.query, "a dog barking");
  EXPECT_EQ(refs.provenance.ddim_steps, 25);
  EXPECT_DOUBLE_EQ(refs.provenance.noising_ratio, 0.7);
  EXPECT_TRUE(fs::exists(dir_ / "work" / "iter1_input.wav"));

  const auto calls = read_lines(dir_ / "calls.log");
  ASSERT_EQ(calls.size(), 1u);
  const std::string expected = "--mixture " + (dir_ / "work" / "iter1_input.wav").string() +
                               " --query a dog barking --n 3 --ratio 0.69999999999999996 --steps 25"
                               " --mode ddim_inversion --out " +
                               (dir_ / "work" / "iter1_refs.dgm1").string();
  EXPECT_EQ(calls[0], expected);
}

TEST_F(ProviderTest, ExecProviderDrivesEveryIteration) {
  const auto problem = testing::disjoint_band_problem(0.5, 1);
  ExecProvider p(exec_config());
  OptimizerConfig cfg;
  cfg.iterations = 3;
  cfg.epochs_per_iteration = 5;
  cfg.n_refs = 2;
  const auto result = optimize_mask(problem.mag, problem.phase, p, cfg);
  EXPECT_EQ(result.loss_trace.size(), 3u);
  EXPECT_EQ(read_lines(dir_ / "calls.log").size(), 3u);
  for (int i = 1; i <= 3; ++i) EXPECT_TRUE(fs::exists(dir_ / "work" / ("iter" + std::to_string(i) + "_input.wav")));
  // The generator's 64-mel header defines the loss space.
  EXPECT_EQ(result.last_references.n_mels(), 64u);
}

TEST_F(ProviderTest, ExecProviderNonzeroExitIsProviderError) {
  ::setenv("FAKE_REFGEN_FAIL", "1", 1);
  ExecProvider p(exec_config());
  const Waveform est{testing::seeded_noise(4000, 3, 0.1)};
  try {
    p.references({est, 1, 2, 0});
    FAIL() << "expected ProviderError";
  } catch (const ProviderError& e) {
    EXPECT_NE(std::string(e.what()).find("status 3"), std::string::npos);
  }
}

TEST_F(ProviderTest, ExecProviderMissingExecutableIsConfigError) {
  auto cfg = exec_config();
  cfg.executable = dir_ / "no-such-refgen";
  EXPECT_THROW(ExecProvider{cfg}, ConfigError);
  cfg.executable.clear();
  EXPECT_THROW(ExecProvider{cfg}, ConfigError);
}

TEST_F(ProviderTest, ExecProviderNonExecutableFileIsProviderError) {
  auto cfg = exec_config();
  cfg.executable = dir_ / "plain.txt";
  std::ofstream(cfg.executable) << "not a program\n";
  fs::permissions(cfg.executable, fs::perms::owner_read | fs::perms::owner_write);
  ExecProvider p(cfg);
  const Waveform est{testing::seeded_noise(4000, 3, 0.1)};
  EXPECT_THROW(p.references({est, 1, 2, 0}), ProviderError);
}

}  // namespace
}  // namespace dgmo
