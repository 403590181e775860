#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string output;  // stdout and stderr together
};

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "varflow_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result run(const std::string& args) {
  const auto log = workdir() / "last_output.txt";
  const std::string cmd = "cd '" + workdir().string() + "' && '" VARFLOW_CLI "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json small_config() {
  json c = json::parse(slurp(VARFLOW_SOURCE_DIR "/configs/toy.json"));
  c["corpus"]["utterances"] = 8;
  c["train"]["batch_size"] = 2;
  c["train"]["checkpoint_every"] = 2;
  return c;
}

void write_config(const std::string& name, const json& c) { std::ofstream(workdir() / name) << c.dump(2); }

// Shared prepared cache and a 6-step checkpoint.
class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    write_config("small.json", small_config());
    const auto prep = run("prepare --config small.json --out work");
    ASSERT_EQ(prep.code, 0) << prep.output;
    const auto train = run("train --config small.json --data work/cache --out run --steps 6 --quiet");
    ASSERT_EQ(train.code, 0) << train.output;
  }
};

}  // namespace

TEST_F(CliPipeline, PrepareAndTrainRecordProvenance) {
  const auto prep = json::parse(slurp(workdir() / "work" / "run.json"));
  EXPECT_EQ(prep["accepted"], 8);
  EXPECT_EQ(prep["config_sha256"].get<std::string>().size(), 64u);
  EXPECT_TRUE(prep.contains("seed"));

  const auto meta = json::parse(slurp(workdir() / "run" / "run.json"));
  EXPECT_EQ(meta["steps"], 6);
  EXPECT_EQ(meta["seed"], small_config()["train"]["seed"]);
  EXPECT_EQ(meta["checkpoint_sha256"].get<std::string>().size(), 64u);
  // --steps changes the effective config but not the file it came from.
  EXPECT_EQ(meta["config_file_sha256"], prep["config_file_sha256"]);
  EXPECT_NE(meta["config_sha256"], prep["config_sha256"]);

  std::ifstream metrics(workdir() / "run" / "metrics.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(metrics, line)) {
    const auto rec = json::parse(line);
    for (const char* key : {"step", "lr", "melspec", "duration", "pitch", "energy", "total", "alpha"})
      EXPECT_TRUE(rec.contains(key)) << key;
    ++lines;
  }
  EXPECT_EQ(lines, 6);
}

TEST_F(CliPipeline, ZeroShiftMatchesPlainSynthesis) {
  ASSERT_EQ(run("synth --checkpoint run/checkpoint.vfck --text abcd --seed 4 --out s.npy").code, 0);
  ASSERT_EQ(run("control --checkpoint run/checkpoint.vfck --text abcd --seed 4 --lambda 0 --out c.npy").code, 0);
  const auto a = slurp(workdir() / "s.npy"), b = slurp(workdir() / "c.npy");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, b);

  ASSERT_EQ(run("control --checkpoint run/checkpoint.vfck --text abcd --seed 4 --lambda 2 --out up.npy").code, 0);
  EXPECT_NE(slurp(workdir() / "up.npy"), a);
  const auto meta = json::parse(slurp(workdir() / "up.npy.json"));
  EXPECT_EQ(meta["lambda"], 2.0);
  EXPECT_EQ(meta["mode"], "flow");
  EXPECT_TRUE(meta.contains("checkpoint_sha256"));
}

TEST_F(CliPipeline, SynthWritesWaveform) {
  const auto r = run("synth --checkpoint run/checkpoint.vfck --phoneme-ids 0,1,2 --out w.npy --wav w.wav");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(slurp(workdir() / "w.wav").substr(0, 4), "RIFF");
  EXPECT_EQ(slurp(workdir() / "w.npy").substr(1, 5), "NUMPY");
}

TEST_F(CliPipeline, FfeTableHasShiftGrid) {
  const auto r = run("eval-ffe --checkpoint run/checkpoint.vfck --data work/cache --utterances 2 --out ffe.json");
  ASSERT_EQ(r.code, 0) << r.output;
  for (const char* col : {"lambda=-6", "lambda=-4", "lambda=-2", "lambda=+2", "lambda=+4", "lambda=+6", "lambda=0"})
    EXPECT_NE(r.output.find(col), std::string::npos) << col;
  const auto report = json::parse(slurp(workdir() / "ffe.json"))["report"];
  EXPECT_EQ(report["rows"].size(), 7u);
}

TEST_F(CliPipeline, DiversityDumpPlots) {
  ASSERT_EQ(run("diversity --checkpoint run/checkpoint.vfck --text abc --n 3 --sigmas 0.0,0.667 --out div.tsv").code,
            0);
  const auto r = run("plot --contours div.tsv --out div.svg");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto svg = slurp(workdir() / "div.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("<path"), std::string::npos);
  EXPECT_NE(svg.find("sigma = 0.667"), std::string::npos);
}

TEST_F(CliPipeline, ResumeContinuesBitExactly) {
  ASSERT_EQ(run("train --config small.json --data work/cache --out part --steps 3 --quiet").code, 0);
  const auto r = run("train --config small.json --data work/cache --out part --steps 6 --quiet "
                     "--resume part/checkpoint.vfck");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(slurp(workdir() / "part" / "metrics.jsonl"), slurp(workdir() / "run" / "metrics.jsonl"));
  EXPECT_EQ(slurp(workdir() / "part" / "checkpoint.vfck"), slurp(workdir() / "run" / "checkpoint.vfck"));
}

TEST_F(CliPipeline, RejectsIncompatibleRequests) {
  auto r = run("control --checkpoint run/checkpoint.vfck --text ab --lambda 1 --mode mse --out x.npy");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("mode"), std::string::npos);

  r = run("synth --checkpoint run/checkpoint.vfck --phoneme-ids 0,99 --out x.npy");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("99"), std::string::npos);

  auto other = small_config();
  other["model"]["d_model"] = 16;
  write_config("other.json", other);
  r = run("train --config other.json --data work/cache --out other --resume run/checkpoint.vfck --quiet");
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, ConfigErrorsNameTheKey) {
  auto c = small_config();
  c["train"]["warmup"] = 10;
  write_config("unknown.json", c);
  auto r = run("prepare --config unknown.json --out nowhere");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("train.warmup"), std::string::npos) << r.output;

  c = small_config();
  c["train"].erase("alpha");
  write_config("noalpha.json", c);
  r = run("prepare --config noalpha.json --out nowhere");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("train.alpha"), std::string::npos) << r.output;
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("synth --text ab").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, DivergenceExitsThreeAndKeepsCheckpoint) {
  auto c = small_config();
  c["train"]["lr_scale"] = 1e8;
  c["train"]["grad_clip"] = 1e30;
  c["train"]["checkpoint_every"] = 1;
  write_config("boom.json", c);
  ASSERT_EQ(run("prepare --config boom.json --out boomdata").code, 0);
  const auto r = run("train --config boom.json --data boomdata/cache --out boom --steps 200 --quiet");
  EXPECT_EQ(r.code, 3) << r.output;
  EXPECT_NE(r.output.find("diverged"), std::string::npos);
  EXPECT_TRUE(fs::exists(workdir() / "boom" / "checkpoint.vfck"));
}
