#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "pulsal/error.hpp"
#include "pulsal/signal.hpp"

using namespace pulsal;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "pulsal_signal_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(SignalSource, Constant) {
  const auto s = SignalSource::constant(2.5, 3.0);
  EXPECT_EQ(s.duration(), 3.0);
  EXPECT_EQ(s(0.0), 2.5);
  EXPECT_EQ(s(2.9), 2.5);
  EXPECT_FALSE(s.is_sampled());
}

TEST(SignalSource, Sinusoid) {
  const auto s = SignalSource::sinusoid(10.0, 12.0, 0.0, 1.0);
  EXPECT_NEAR(s(1.0 / 48.0), 10.0, 1e-12);
  EXPECT_NEAR(s(1.0 / 24.0), 0.0, 1e-12);
}

TEST(SignalSource, SampledInterpolatesLinearly) {
  const auto s = SignalSource::sampled({0.0, 1.0, 3.0}, 10.0);
  EXPECT_DOUBLE_EQ(s.duration(), 0.3);
  EXPECT_DOUBLE_EQ(s(0.05), 0.5);
  EXPECT_DOUBLE_EQ(s(0.15), 2.0);
  EXPECT_DOUBLE_EQ(s(0.29), 3.0);  // held past the last sample
  EXPECT_DOUBLE_EQ(*s.sample_period(), 0.1);
}

TEST(SignalSource, ParseSpecs) {
  EXPECT_EQ(SignalSource::parse("constant:1", 2.0)(0.3), 1.0);
  const auto s = SignalSource::parse("sine:13,12", 0.25);
  EXPECT_NEAR(s(1.0 / 48.0), 13.0, 1e-12);
  const auto p = SignalSource::parse("sine:1,1,1.5707963267948966", 1.0);
  EXPECT_NEAR(p(0.0), 1.0, 1e-12);
  EXPECT_THROW(SignalSource::parse("square:1", 1.0), ParseError);
  EXPECT_THROW(SignalSource::parse("constant", 1.0), ParseError);
  EXPECT_THROW(SignalSource::parse("constant:x", 1.0), ParseError);
  EXPECT_THROW(SignalSource::parse("constant:1", 0.0), InvalidArgument);
}

TEST(SignalSource, RejectsBadConstruction) {
  EXPECT_THROW(SignalSource::sampled({}, 10.0), InvalidArgument);
  EXPECT_THROW(SignalSource::sampled({1.0}, 0.0), InvalidArgument);
}

TEST(Ingest, CsvThousandSamplesAtOneKilohertz) {
  const auto path = temp_path("uniform.csv");
  {
    std::ofstream out(path);
    out << "time,value\n";
    for (int i = 0; i < 1000; ++i) out << i * 1e-3 << ',' << std::sin(2 * std::numbers::pi * 5 * i * 1e-3) << '\n';
  }
  const auto s = ingest_signal(path, SignalFileFormat::csv);
  EXPECT_TRUE(s.is_sampled());
  EXPECT_NEAR(s.duration(), 1.0, 1e-12);
  EXPECT_NEAR(*s.sample_period(), 1e-3, 1e-15);
}

TEST(Ingest, CsvWithoutHeader) {
  const auto path = temp_path("noheader.csv");
  {
    std::ofstream out(path);
    out << "0,1\n0.5,2\n1.0,3\n";
  }
  const auto s = ingest_signal(path, SignalFileFormat::csv);
  EXPECT_NEAR(s.duration(), 1.5, 1e-12);
  EXPECT_DOUBLE_EQ(s(0.25), 1.5);
}

TEST(Ingest, CsvJitteredTimestampsAreRejected) {
  const auto path = temp_path("jitter.csv");
  {
    std::ofstream out(path);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> jitter(-2e-5, 2e-5);
    out << "time,value\n";
    for (int i = 0; i < 100; ++i) out << i * 1e-3 + (i ? jitter(rng) : 0.0) << ",1\n";
  }
  try {
    ingest_signal(path, SignalFileFormat::csv);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "non_uniform_sampling");
    EXPECT_NE(std::string(e.what()).find("non-uniform sampling"), std::string::npos);
  }
}

TEST(Ingest, CsvGarbageIsParseError) {
  const auto path = temp_path("garbage.csv");
  {
    std::ofstream out(path);
    out << "time,value\n0,1\nzero,one\n";
  }
  EXPECT_THROW(ingest_signal(path, SignalFileFormat::csv), ParseError);
}

TEST(Ingest, Wav16ScaledByFullScale) {
  const auto path = temp_path("tone.wav");
  std::vector<double> volts;
  for (int i = 0; i < 4410; ++i) volts.push_back(2.0 * std::sin(2 * std::numbers::pi * 440 * i / 44100.0));
  write_wav16(path, volts, 44100, 5.0);
  IngestOptions o;
  o.full_scale_volts = 5.0;
  const auto s = ingest_signal(path, SignalFileFormat::wav, o);
  EXPECT_NEAR(s.duration(), 0.1, 1e-12);
  EXPECT_NEAR(*s.sample_period(), 1.0 / 44100.0, 1e-15);
  double worst = 0.0;
  for (int i = 0; i < 4410; ++i) worst = std::max(worst, std::abs(s(i / 44100.0) - volts[i]));
  EXPECT_LT(worst, 5.0 / 32767.0);
}

TEST(Ingest, WavNeedsFullScale) {
  const auto path = temp_path("needs_scale.wav");
  write_wav16(path, {0.0, 0.5, 1.0}, 8000, 1.0);
  EXPECT_THROW(ingest_signal(path, SignalFileFormat::wav), InvalidArgument);
}

TEST(Ingest, WavRejectsNonRiff) {
  const auto path = temp_path("fake.wav");
  {
    std::ofstream out(path, std::ios::binary);
    out << "definitely not a wave file";
  }
  IngestOptions o;
  o.full_scale_volts = 1.0;
  EXPECT_THROW(ingest_signal(path, SignalFileFormat::wav, o), ParseError);
}

TEST(Ingest, MissingFileIsIoError) {
  try {
    ingest_signal(temp_path("absent.csv"), SignalFileFormat::csv);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "io");
  }
}

TEST(Ingest, FormatForPath) {
  EXPECT_EQ(signal_format_for_path("x.wav"), SignalFileFormat::wav);
  EXPECT_EQ(signal_format_for_path("x.WAV"), SignalFileFormat::wav);
  EXPECT_EQ(signal_format_for_path("x.csv"), SignalFileFormat::csv);
}
