#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <numbers>
#include <regex>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "mawsync/wav.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun
{
  int status = -1;
  std::string out;
};

CliRun
cli (const std::string& args)
{
  const std::string cmd = std::string ("'") + MAWSYNC_CLI_PATH + "' " + args + " 2>&1";
  CliRun r;
  std::unique_ptr<FILE, int (*) (FILE*)> pipe (popen (cmd.c_str(), "r"), pclose);
  if (!pipe)
    return r;
  std::array<char, 512> buf;
  while (std::fgets (buf.data(), buf.size(), pipe.get()))
    r.out += buf.data();
  const int raw = pclose (pipe.release());
  r.status = WIFEXITED (raw) ? WEXITSTATUS (raw) : -1;
  return r;
}

double
field (const std::string& text, const std::string& key)
{
  std::smatch m;
  if (!std::regex_search (text, m, std::regex ("(^|\\n)" + key + " = ([-0-9.e]+)")))
    return std::nan ("");
  return std::stod (m[2]);
}

class TempDir
{
public:
  TempDir() : path_ (fs::temp_directory_path() / ("mawsync_cli_" + std::to_string (::getpid())))
  {
    fs::create_directories (path_);
  }
  ~TempDir() { fs::remove_all (path_); }
  std::string operator/ (const std::string& name) const { return (path_ / name).string(); }

private:
  fs::path path_;
};

}  // namespace

TEST (Cli, SynthEmbedDetectRoundTrip)
{
  TempDir dir;
  ASSERT_EQ (cli ("synth --style pop --seed 3 --seconds 8 --out " + dir / "clip.wav").status, 0);

  const CliRun embed = cli ("embed --in " + dir / "clip.wav" + " --out " + dir / "marked.wav" +
                            " --a 26 --b 40 --strength 0.016 --payload hex:C3A5 --mode EC");
  ASSERT_EQ (embed.status, 0) << embed.out;
  EXPECT_NE (embed.out.find ("codes_embedded = "), std::string::npos);

  const CliRun det = cli ("detect --in " + dir / "marked.wav" + " --a 26 --b 40 --strength 0.016 --payload hex:C3A5");
  ASSERT_EQ (det.status, 0) << det.out;
  EXPECT_GE (field (det.out, "syncs"), 0.9 * field (embed.out, "codes_embedded"));
  EXPECT_LE (field (det.out, "payload_ber"), 0.05);

  const CliRun clean = cli ("detect --in " + dir / "clip.wav" + " --a 26 --b 40 --strength 0.016");
  ASSERT_EQ (clean.status, 0) << clean.out;
  EXPECT_EQ (field (clean.out, "syncs"), 0.0);
}

TEST (Cli, AttackAndParams)
{
  TempDir dir;
  ASSERT_EQ (cli ("synth --style blues --seed 1 --seconds 2 --out " + dir / "clip.wav").status, 0);
  const CliRun atk = cli ("attack --in " + dir / "clip.wav" + " --out " + dir / "att.wav" + " --spec jitter:1000:seed=1");
  ASSERT_EQ (atk.status, 0) << atk.out;
  EXPECT_NE (atk.out.find ("samples = 88112"), std::string::npos) << atk.out;

  const CliRun prm = cli ("params --in " + dir / "clip.wav");
  ASSERT_EQ (prm.status, 0) << prm.out;
  EXPECT_NE (prm.out.find ("num = L / z_m10 = "), std::string::npos);
  EXPECT_NE (prm.out.find ("s = "), std::string::npos);
}

TEST (Cli, BadArgumentsFail)
{
  TempDir dir;
  EXPECT_NE (cli ("").status, 0);
  EXPECT_NE (cli ("frobnicate").status, 0);
  EXPECT_NE (cli ("detect --in " + dir / "missing.wav" + " --a 26 --b 40 --strength 0.016").status, 0);
  EXPECT_NE (cli ("detect --in x.wav").status, 0);
  ASSERT_EQ (cli ("synth --seconds 1 --out " + dir / "clip.wav").status, 0);
  const CliRun half = cli ("embed --in " + dir / "clip.wav" + " --out " + dir / "m.wav" + " --a 26");
  EXPECT_EQ (half.status, 2);
  EXPECT_NE (half.out.find ("go together"), std::string::npos);
  EXPECT_EQ (cli ("attack --in " + dir / "clip.wav" + " --out " + dir / "a.wav" + " --spec awgn:30").status, 2);
}

TEST (Cli, ParamsOnSine)
{
  TempDir dir;
  std::vector<double> x (44100);
  for (std::size_t i = 0; i < x.size(); i++)
    x[i] = 0.5 * std::sin (2 * std::numbers::pi * 1000 * static_cast<double> (i) / 44100 + 0.3);
  mawsync::write_wav (dir / "sine.wav", mawsync::AudioClip (std::move (x), 44100));
  const CliRun prm = cli ("params --in " + dir / "sine.wav");
  ASSERT_EQ (prm.status, 0) << prm.out;
  EXPECT_NEAR (field (prm.out, "num = L / z_m10"), 22.0, 0.5) << prm.out;
  EXPECT_EQ (field (prm.out, "b"), 19.0);
  EXPECT_EQ (field (prm.out, "a"), 12.0);
}
