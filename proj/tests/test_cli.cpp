#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fdrsky/io/pfm.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using namespace fdrsky;

namespace {

const char* kBin = FDRSKY_BIN;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run(const std::string& args, const fs::path& dir) {
  fs::path out = dir / "stdout.txt";
  fs::path err = dir / "stderr.txt";
  std::string cmd = std::string(kBin) + " " + args + " >" + out.string() + " 2>" +
                    err.string();
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(status);
  auto read_all = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  r.out = read_all(out);
  r.err = read_all(err);
  return r;
}

fs::path sandbox(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "fdrsky_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

std::string value_of(const std::string& key, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  }
  return "";
}

}  // namespace

TEST_CASE("info reports key=value lines") {
  auto dir = sandbox("info");
  fs::path sky = dir / "sky.pfm";
  io::write_pfm(sky, testsupport::gradient_sky(EnvFormat::SkyAngular, 64, 64));

  RunResult r = run("info " + sky.string(), dir);
  REQUIRE(r.exit_code == 0);
  CHECK(value_of("format", r.out) == "skyangular");
  CHECK(value_of("width", r.out) == "64");
  CHECK(value_of("height", r.out) == "64");
  CHECK(!value_of("ev", r.out).empty());
  CHECK(!value_of("ii", r.out).empty());
}

TEST_CASE("exit codes") {
  auto dir = sandbox("exitcodes");
  SECTION("usage error is 1") {
    CHECK(run("definitely-not-a-command", dir).exit_code == 1);
    CHECK(run("info", dir).exit_code == 1);  // missing required argument
  }
  SECTION("unknown subcommand suggests the nearest one") {
    RunResult r = run("inof", dir);
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("did you mean 'info'") != std::string::npos);
  }
  SECTION("data error is 2") {
    CHECK(run("info " + (dir / "missing.pfm").string(), dir).exit_code == 2);
  }
  SECTION("help exits cleanly") {
    RunResult r = run("--help", dir);
    CHECK(r.exit_code == 0);
    for (const char* name : {"info", "convert", "boost", "dataset-scan", "mean-skydome"})
      CHECK(r.out.find(name) != std::string::npos);
  }
}

TEST_CASE("tonemap and untonemap round trip through files") {
  auto dir = sandbox("tonemap");
  fs::path sky = dir / "sky.pfm";
  RadianceImage img = testsupport::gradient_sky(EnvFormat::SkyAngular, 64, 64);
  io::write_pfm(sky, img);

  REQUIRE(run("tonemap " + sky.string() + " -o " + (dir / "tm.pfm").string() +
                  " --op mulawlog2 --mu 5000",
              dir)
              .exit_code == 0);
  REQUIRE(run("untonemap " + (dir / "tm.pfm").string() + " -o " + (dir / "back.pfm").string() +
                  " --op mulawlog2 --mu 5000",
              dir)
              .exit_code == 0);
  RadianceImage back = io::read_pfm(dir / "back.pfm");
  for (size_t i = 0; i < img.pixels.size(); ++i)
    CHECK(back.pixels[i] == Catch::Approx(img.pixels[i]).margin(1e-3));
}

TEST_CASE("tonemap profile emits a CSV") {
  auto dir = sandbox("profile");
  RunResult r = run("tonemap --profile -o - --op mulawlog2 --delta 0.01 "
                    "--intensities 1,256,32768",
                    dir);
  REQUIRE(r.exit_code == 0);
  std::stringstream ss(r.out);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "intensity,delta");
  int rows = 0;
  while (std::getline(ss, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("sensitivity sweep CSV has one row per threshold") {
  auto dir = sandbox("sensitivity");
  fs::path sky = dir / "sky.pfm";
  testsupport::FdrSkySpec spec;
  spec.size = 128;
  spec.sun_x = 40;
  spec.sun_y = 32;
  spec.plateau_x = 80;
  spec.plateau_y = 80;
  io::write_pfm(sky, testsupport::fdr_sky(spec));

  fs::path csv = dir / "out.csv";
  RunResult r = run("sensitivity " + sky.string() +
                        " --thresholds 15,13,11,9,7 --metrics psnr2,ssim,ev,ii -o " +
                        csv.string(),
                    dir);
  REQUIRE(r.exit_code == 0);
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("threshold,", 0) == 0);
  CHECK(line.find("psnr2_hdr") != std::string::npos);
  CHECK(line.find("ssim_cldr") != std::string::npos);
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("convert output is re-ingestible") {
  auto dir = sandbox("convert");
  fs::path ll = dir / "sky.pfm";
  io::write_pfm(ll, testsupport::gradient_sky(EnvFormat::LatLong, 128, 64));
  REQUIRE(run("convert " + ll.string() + " -o " + (dir / "sa.pfm").string() +
                  " --to skyangular",
              dir)
              .exit_code == 0);
  RunResult r = run("info " + (dir / "sa.pfm").string(), dir);
  REQUIRE(r.exit_code == 0);
  CHECK(value_of("format", r.out) == "skyangular");
  CHECK(value_of("width", r.out) == "64");
}

TEST_CASE("resize honours the requested method") {
  auto dir = sandbox("resize");
  fs::path sky = dir / "sky.pfm";
  io::write_pfm(sky, testsupport::gradient_sky(EnvFormat::SkyAngular, 64, 64));
  REQUIRE(run("resize " + sky.string() + " -o " + (dir / "small.pfm").string() +
                  " --width 32 --height 32 --method area",
              dir)
              .exit_code == 0);
  CHECK(io::read_pfm(dir / "small.pfm").width == 32);
  CHECK(run("resize " + sky.string() + " -o " + (dir / "bad.pfm").string() +
                " --width 24 --height 24 --method area",
            dir)
            .exit_code == 2);
}

TEST_CASE("segment and label write masks and labels") {
  auto dir = sandbox("segment");
  fs::path sky = dir / "sky.pfm";
  io::write_pfm(sky, testsupport::gradient_sky(EnvFormat::SkyAngular, 64, 64));
  std::string sun = " --sun-elevation 45 --sun-azimuth 90";

  REQUIRE(run("segment " + sky.string() + " -o " + (dir / "m_").string() + sun, dir)
              .exit_code == 0);
  for (const char* cls : {"sun", "cloud", "skydome", "border"})
    CHECK(fs::exists(dir / ("m_" + std::string(cls) + ".pbm")));

  RunResult r = run("label " + sky.string() + " -o " + (dir / "label.pfm").string() +
                        " --type continuous --seed 7 --config-out " +
                        (dir / "cfg.json").string() + sun,
                    dir);
  REQUIRE(r.exit_code == 0);
  CHECK(value_of("seed", r.out) == "7");
  CHECK(fs::exists(dir / "label.pfm"));
  CHECK(fs::exists(dir / "cfg.json"));
  auto cfg = slurp(dir / "cfg.json");
  CHECK(std::string(cfg.begin(), cfg.end()).find("\"perlin_seed\": 7") != std::string::npos);
}

TEST_CASE("metrics report and match-exposure") {
  auto dir = sandbox("metrics");
  fs::path a = dir / "a.pfm";
  fs::path b = dir / "b.pfm";
  RadianceImage img = testsupport::gradient_sky(EnvFormat::SkyAngular, 64, 64);
  io::write_pfm(a, img);
  RadianceImage half = img;
  for (float& v : half.pixels) v *= 0.5f;
  io::write_pfm(b, half);

  RunResult r = run("metrics " + a.string() + " " + b.string() +
                        " --metrics l1,ev,ii --spaces hdr -o -",
                    dir);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("l1_hdr") != std::string::npos);
  CHECK(r.out.find("ev_real") != std::string::npos);

  RunResult m = run("match-exposure " + a.string() + " " + b.string() + " -o " +
                        (dir / "scaled.pfm").string(),
                    dir);
  REQUIRE(m.exit_code == 0);
  CHECK(value_of("alpha", m.out) == "2");
}

TEST_CASE("boost presets") {
  auto dir = sandbox("boost");
  fs::path a = dir / "20200101_120000.pfm";
  fs::path b = dir / "20200101_130000.pfm";
  io::write_pfm(a, testsupport::uniform_sky(EnvFormat::SkyAngular, 32, 32, 0.25f));
  io::write_pfm(b, testsupport::uniform_sky(EnvFormat::SkyAngular, 32, 32, 0.75f));

  REQUIRE(run("boost " + a.string() + " " + b.string() + " --preset paper -o " +
                  (dir / "out").string(),
              dir)
              .exit_code == 0);
  CHECK(fs::exists(dir / "out" / "20200101_120000_boost.pfm"));
  CHECK(fs::exists(dir / "out" / "20200101_130000_boost.pfm"));

  CHECK(run("boost " + a.string() + " --preset nonsense -o " + (dir / "x.pfm").string(), dir)
            .exit_code == 1);
}

TEST_CASE("dataset subcommands") {
  auto dir = sandbox("dataset");
  fs::path data = dir / "data";
  fs::create_directories(data);
  for (const char* stem :
       {"20160607_120000", "20160607_150000", "20160608_120000", "20160609_153000"})
    io::write_pfm(data / (std::string(stem) + ".pfm"),
                  testsupport::uniform_sky(EnvFormat::SkyAngular, 16, 16, 1.f));

  RunResult scan_r = run("dataset-scan --root " + data.string() + " -o -", dir);
  REQUIRE(scan_r.exit_code == 0);
  CHECK(scan_r.out.find("path,timestamp") == 0);
  CHECK(scan_r.out.find("20160607_120000") != std::string::npos);

  fs::path splits = dir / "splits.json";
  REQUIRE(run("dataset-split --root " + data.string() + " --seed 5 -o " + splits.string(),
              dir)
              .exit_code == 0);
  std::string sj(slurp(splits).data(), slurp(splits).size());
  CHECK(sj.find("\"seed\": 5") != std::string::npos);
  CHECK(sj.find("\"train\"") != std::string::npos);

  fs::path report = dir / "report.csv";
  fs::path summary = dir / "summary.json";
  REQUIRE(run("dataset-report --root " + data.string() + " -o " + report.string() +
                  " --summary " + summary.string(),
              dir)
              .exit_code == 0);
  CHECK(fs::exists(report));
  CHECK(fs::exists(summary));

  fs::path mean = dir / "mean.pfm";
  REQUIRE(run("mean-skydome " + (data / "20160607_120000.pfm").string() + " " +
                  (data / "20160608_120000.pfm").string() + " -o " + mean.string(),
              dir)
              .exit_code == 0);
  CHECK(io::read_pfm(mean).px(8, 8)[0] == 1.f);
}

TEST_CASE("dataset config file supplies defaults, flags override") {
  auto dir = sandbox("dsconfig");
  fs::path data = dir / "data";
  fs::create_directories(data);
  io::write_pfm(data / "20160607_120000.pfm",
                testsupport::uniform_sky(EnvFormat::SkyAngular, 16, 16, 1.f));
  std::ofstream(dir / "cfg.json") << "{\"root\": \"" << data.string()
                                  << "\", \"split_seed\": 9}\n";

  RunResult r = run("dataset-split --config " + (dir / "cfg.json").string() + " -o -", dir);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("\"seed\": 9") != std::string::npos);

  RunResult o = run("dataset-split --config " + (dir / "cfg.json").string() +
                        " --seed 4 -o -",
                    dir);
  REQUIRE(o.exit_code == 0);
  CHECK(o.out.find("\"seed\": 4") != std::string::npos);

  // neither root nor config is a usage error
  CHECK(run("dataset-scan -o -", dir).exit_code == 1);
}

TEST_CASE("dataset report cache file") {
  auto dir = sandbox("dscache");
  fs::path data = dir / "data";
  fs::create_directories(data);
  io::write_pfm(data / "20160607_120000.pfm",
                testsupport::uniform_sky(EnvFormat::SkyAngular, 16, 16, 1.f));
  fs::path cache = dir / "stats.cache";
  std::string cmd = "dataset-report --root " + data.string() + " -o - --cache " +
                    cache.string();
  RunResult first = run(cmd, dir);
  REQUIRE(first.exit_code == 0);
  REQUIRE(fs::exists(cache));
  RunResult second = run(cmd, dir);
  CHECK(second.out == first.out);
}

TEST_CASE("metrics report serializes infinities as inf") {
  auto dir = sandbox("infinity");
  fs::path a = dir / "a.pfm";
  io::write_pfm(a, testsupport::gradient_sky(EnvFormat::SkyAngular, 64, 64));
  RunResult r = run("metrics " + a.string() + " " + a.string() +
                        " --metrics psnr2 --spaces hdr -o -",
                    dir);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("inf") != std::string::npos);
}

TEST_CASE("byte-identical outputs across runs and thread counts") {
  auto dir = sandbox("determinism");
  fs::path sky = dir / "sky.pfm";
  io::write_pfm(sky, testsupport::fdr_sky([] {
                  testsupport::FdrSkySpec spec;
                  spec.size = 128;
                  spec.sun_x = 40;
                  spec.sun_y = 32;
                  spec.plateau_x = 80;
                  spec.plateau_y = 80;
                  return spec;
                }()));

  struct Case {
    const char* name;
    std::string args;
  };
  std::vector<Case> cases = {
      {"tonemap", "tonemap IN -o OUT --op mulawlog2"},
      {"convert", "convert IN -o OUT --to latlong"},
      {"resize", "resize IN -o OUT --width 64 --height 64 --method area"},
      {"clip", "clip IN -o OUT --threshold 9 --equalize-to IN"},
      {"label", "label IN -o OUT --type continuous --seed 3 --sun-elevation 40 "
                "--sun-azimuth 180"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    auto render = [&](const std::string& out_path, int nthreads) {
      std::string args = c.args;
      auto replace_all = [&args](const std::string& from, const std::string& to) {
        for (size_t pos = args.find(from); pos != std::string::npos;
             pos = args.find(from, pos + to.size()))
          args.replace(pos, from.size(), to);
      };
      replace_all("IN", sky.string());
      replace_all("OUT", out_path);
      args += " --threads " + std::to_string(nthreads);
      REQUIRE(run(args, dir).exit_code == 0);
    };
    render((dir / "a.bin").string(), 1);
    render((dir / "b.bin").string(), 1);
    render((dir / "c.bin").string(), 8);
    auto a = slurp(dir / "a.bin");
    CHECK(a == slurp(dir / "b.bin"));
    CHECK(a == slurp(dir / "c.bin"));
  }
}
