#pragma once

// RIFF/WAVE reader and writer for 16-bit PCM mono, little endian.
// Samples map p -> p / 32768 on read and back with round-half-away + clamp on
// write, so a read/write cycle reproduces the sample payload bit for bit.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "core_signal.hpp"

namespace mawsync {

class FormatError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

namespace wav_detail {

inline std::uint32_t
get_u32 (const std::uint8_t* p)
{
  return std::uint32_t (p[0]) | (std::uint32_t (p[1]) << 8) | (std::uint32_t (p[2]) << 16) | (std::uint32_t (p[3]) << 24);
}

inline std::uint16_t
get_u16 (const std::uint8_t* p)
{
  return std::uint16_t (p[0] | (p[1] << 8));
}

inline void
put_u32 (std::vector<std::uint8_t>& out, std::uint32_t v)
{
  for (int i = 0; i < 4; i++)
    out.push_back (std::uint8_t (v >> (8 * i)));
}

inline void
put_u16 (std::vector<std::uint8_t>& out, std::uint16_t v)
{
  out.push_back (std::uint8_t (v));
  out.push_back (std::uint8_t (v >> 8));
}

inline void
put_tag (std::vector<std::uint8_t>& out, const char* tag)
{
  out.insert (out.end(), tag, tag + 4);
}

}  // namespace wav_detail

inline std::vector<std::int16_t>
parse_wav_pcm16 (const std::vector<std::uint8_t>& bytes, int& sample_rate)
{
  using namespace wav_detail;
  if (bytes.size() < 12 || std::memcmp (bytes.data(), "RIFF", 4) != 0 || std::memcmp (bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError ("not a RIFF/WAVE file");

  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size())
    {
      const std::uint8_t* chunk = bytes.data() + pos;
      const std::uint32_t len = get_u32 (chunk + 4);
      const std::size_t body = pos + 8;
      if (body + len > bytes.size())
        throw FormatError ("truncated chunk in WAV file");

      if (std::memcmp (chunk, "fmt ", 4) == 0)
        {
          if (len < 16)
            throw FormatError ("fmt chunk too short");
          const std::uint8_t* f = bytes.data() + body;
          const std::uint16_t format = get_u16 (f);
          const std::uint16_t channels = get_u16 (f + 2);
          const std::uint32_t rate = get_u32 (f + 4);
          const std::uint16_t bits = get_u16 (f + 14);
          if (format != 1)
            throw FormatError ("unsupported WAV format tag " + std::to_string (format) + " (only PCM = 1)");
          if (channels != 1)
            throw FormatError ("only mono WAV files are supported (file has " + std::to_string (channels) + " channels)");
          if (bits != 16)
            throw FormatError ("only 16 bit WAV files are supported (file has " + std::to_string (bits) + " bits)");
          if (rate == 0)
            throw FormatError ("WAV sample rate is zero");
          sample_rate = static_cast<int> (rate);
          have_fmt = true;
        }
      else if (std::memcmp (chunk, "data", 4) == 0)
        {
          if (!have_fmt)
            throw FormatError ("WAV data chunk before fmt chunk");
          std::vector<std::int16_t> pcm (len / 2);
          for (std::size_t i = 0; i < pcm.size(); i++)
            pcm[i] = static_cast<std::int16_t> (get_u16 (bytes.data() + body + 2 * i));
          return pcm;
        }
      pos = body + len + (len & 1);
    }
  throw FormatError ("WAV file has no data chunk");
}

inline std::vector<std::uint8_t>
encode_wav_pcm16 (const std::vector<std::int16_t>& pcm, int sample_rate)
{
  using namespace wav_detail;
  const std::uint32_t data_len = static_cast<std::uint32_t> (pcm.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve (44 + data_len);
  put_tag (out, "RIFF");
  put_u32 (out, 36 + data_len);
  put_tag (out, "WAVE");
  put_tag (out, "fmt ");
  put_u32 (out, 16);
  put_u16 (out, 1);  // PCM
  put_u16 (out, 1);  // mono
  put_u32 (out, static_cast<std::uint32_t> (sample_rate));
  put_u32 (out, static_cast<std::uint32_t> (sample_rate) * 2);
  put_u16 (out, 2);
  put_u16 (out, 16);
  put_tag (out, "data");
  put_u32 (out, data_len);
  for (std::int16_t s : pcm)
    put_u16 (out, static_cast<std::uint16_t> (s));
  return out;
}

inline AudioClip
read_wav (const std::string& path)
{
  std::ifstream in (path, std::ios::binary);
  if (!in)
    throw FormatError ("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes ((std::istreambuf_iterator<char> (in)), std::istreambuf_iterator<char>());
  int rate = 0;
  const auto pcm = parse_wav_pcm16 (bytes, rate);
  std::vector<double> samples (pcm.size());
  for (std::size_t i = 0; i < pcm.size(); i++)
    samples[i] = pcm16_to_sample (pcm[i]);
  return AudioClip (std::move (samples), rate);
}

inline void
write_wav (const std::string& path, const AudioClip& clip)
{
  std::vector<std::int16_t> pcm (clip.size());
  for (std::size_t i = 0; i < clip.size(); i++)
    pcm[i] = sample_to_pcm16 (clip.samples[i]);
  const auto bytes = encode_wav_pcm16 (pcm, clip.sample_rate);
  std::ofstream out (path, std::ios::binary);
  if (!out)
    throw FormatError ("cannot write '" + path + "'");
  out.write (reinterpret_cast<const char*> (bytes.data()), static_cast<std::streamsize> (bytes.size()));
  if (!out)
    throw FormatError ("write to '" + path + "' failed");
}

}  // namespace mawsync
