#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "mawsync/corpus.hpp"
#include "mawsync/wav.hpp"

using namespace mawsync;

namespace {

std::vector<std::uint8_t>
with_fmt_field (std::vector<std::uint8_t> bytes, std::size_t offset, std::uint16_t value)
{
  bytes[20 + offset] = static_cast<std::uint8_t> (value & 0xff);
  bytes[21 + offset] = static_cast<std::uint8_t> (value >> 8);
  return bytes;
}

}  // namespace

TEST (Wav, FileRoundTripIsBitExact)
{
  const AudioClip clip = quantize_to_pcm16 (synth_clip (Style::blues, 2, 1.0));
  const auto path = std::filesystem::temp_directory_path() / "mawsync_test_roundtrip.wav";
  write_wav (path.string(), clip);
  const AudioClip back = read_wav (path.string());
  std::filesystem::remove (path);
  EXPECT_EQ (back.sample_rate, 44100);
  EXPECT_EQ (back.samples, clip.samples);
}

TEST (Wav, ExtremesSurvive)
{
  const std::vector<std::int16_t> pcm { -32768, -1, 0, 1, 32767 };
  int rate = 0;
  EXPECT_EQ (parse_wav_pcm16 (encode_wav_pcm16 (pcm, 8000), rate), pcm);
  EXPECT_EQ (rate, 8000);
}

TEST (Wav, SkipsUnknownChunks)
{
  auto bytes = encode_wav_pcm16 ({ 5, -5 }, 44100);
  const std::vector<std::uint8_t> extra { 'L', 'I', 'S', 'T', 3, 0, 0, 0, 'a', 'b', 'c', 0 };
  bytes.insert (bytes.begin() + 36, extra.begin(), extra.end());
  int rate = 0;
  EXPECT_EQ (parse_wav_pcm16 (bytes, rate), (std::vector<std::int16_t> { 5, -5 }));
}

TEST (Wav, RejectsUnsupportedFormats)
{
  const auto good = encode_wav_pcm16 ({ 1, 2, 3 }, 44100);
  int rate = 0;
  EXPECT_THROW (parse_wav_pcm16 (with_fmt_field (good, 0, 3), rate), FormatError);   // float
  EXPECT_THROW (parse_wav_pcm16 (with_fmt_field (good, 2, 2), rate), FormatError);   // stereo
  EXPECT_THROW (parse_wav_pcm16 (with_fmt_field (good, 14, 8), rate), FormatError);  // 8 bit
  EXPECT_THROW (parse_wav_pcm16 ({ 'R', 'I', 'F', 'F' }, rate), FormatError);
  auto truncated = good;
  truncated.resize (truncated.size() - 2);
  EXPECT_THROW (parse_wav_pcm16 (truncated, rate), FormatError);
  std::vector<std::uint8_t> no_data (good.begin(), good.begin() + 36);
  EXPECT_THROW (parse_wav_pcm16 (no_data, rate), FormatError);
  EXPECT_THROW (read_wav ("/nonexistent/mawsync.wav"), FormatError);
}
