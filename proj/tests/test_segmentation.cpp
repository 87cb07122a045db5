#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fdrsky/distance.hpp"
#include "fdrsky/noise.hpp"
#include "fdrsky/segmentation.hpp"
#include "support/synthetic.hpp"

using namespace fdrsky;

namespace {

Mask random_blob_mask(int w, int h, uint64_t seed, double fill = 0.4) {
  PerlinNoise2D noise(seed);
  Mask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      m.set(x, y, noise.fbm(x / 12.0, y / 12.0, 3, 0.5) > (0.5 - fill));
  return m;
}

Mask brute_force_erode_disc(const Mask& m, int diameter) {
  int r = (diameter - 1) / 2;
  Mask out(m.width, m.height);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      bool keep = true;
      for (int dy = -r; dy <= r && keep; ++dy)
        for (int dx = -r; dx <= r && keep; ++dx) {
          if (dx * dx + dy * dy > r * r) continue;
          int nx = x + dx, ny = y + dy;
          if (nx < 0 || nx >= m.width || ny < 0 || ny >= m.height || !m.at(nx, ny))
            keep = false;
        }
      out.set(x, y, keep && m.at(x, y));
    }
  }
  return out;
}

GrayscaleImage brute_force_edt(const Mask& m) {
  GrayscaleImage out(m.width, m.height);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (!m.at(x, y)) continue;
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < m.height; ++j)
        for (int i = 0; i < m.width; ++i)
          if (!m.at(i, j))
            best = std::min(best, std::hypot(static_cast<double>(i - x),
                                             static_cast<double>(j - y)));
      out.at(x, y) = static_cast<float>(best);
    }
  }
  return out;
}

bool subset_of(const Mask& inner, const Mask& outer) {
  for (size_t i = 0; i < inner.on.size(); ++i)
    if (inner.on[i] && !outer.on[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("sun mask geometry") {
  SECTION("zenith sun at 5 degrees spans the expected pixel radius") {
    SunPosition sun = sun_from_angles(90.0, 0.0);
    Mask m = sun_mask(sun, EnvFormat::SkyAngular, 512, 512, 5.0);
    // equidistant projection: (2.5 / 90) * 256 = 7.1 px around the center
    double max_r = 0.0;
    size_t count = 0;
    for (int y = 0; y < 512; ++y)
      for (int x = 0; x < 512; ++x) {
        double r = std::hypot(x + 0.5 - 256.0, y + 0.5 - 256.0);
        if (m.at(x, y)) {
          max_r = std::max(max_r, r);
          ++count;
        } else if (r < 6.9) {
          FAIL("pixel inside the disk not masked");
        }
      }
    CHECK(max_r <= 7.2);
    CHECK(count >= 140);
    CHECK(count <= 175);
  }
  SECTION("sun below the horizon leaves hemisphere formats empty") {
    SunPosition sun = sun_from_angles(-10.0, 90.0);
    CHECK(sun_mask(sun, EnvFormat::SkyAngular, 128, 128, 5.0).count() == 0);
    CHECK(sun_mask(sun, EnvFormat::SkyLatLong, 128, 32, 5.0).count() == 0);
  }
  SECTION("the half-degree disk is at most a few pixels at 128") {
    SunPosition sun = sun_from_angles(90.0, 0.0);
    CHECK(sun_mask(sun, EnvFormat::SkyAngular, 128, 128, 0.5).count() <= 4);
  }
  SECTION("area grows with diameter") {
    SunPosition sun = sun_from_angles(45.0, 120.0);
    Mask small = sun_mask(sun, EnvFormat::SkyAngular, 128, 128, 2.0);
    Mask large = sun_mask(sun, EnvFormat::SkyAngular, 128, 128, 8.0);
    CHECK(subset_of(small, large));
    CHECK(large.count() > small.count());
  }
}

TEST_CASE("centroid snapping refines an ephemeris prediction") {
  int n = 256;
  RadianceImage img = testsupport::uniform_sky(EnvFormat::SkyAngular, n, n, 1.f);
  // bright blob centered on a known pixel
  auto blob_dir = pixel_direction(EnvFormat::SkyAngular, n, n, 96, 64);
  REQUIRE(blob_dir);
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      float* p = img.px(96 + dx, 64 + dy);
      p[0] = p[1] = p[2] = 5000.f;
    }

  SECTION("a prediction inside the cone snaps onto the blob") {
    auto off_dir = pixel_direction(EnvFormat::SkyAngular, n, n, 98, 65);  // ~1 deg away
    SunPosition guess;
    guess.direction = *off_dir;
    SunPosition refined = snap_to_centroid(guess, img, 2.0);
    double dev = std::acos(std::clamp(dot(refined.direction, *blob_dir), -1.0, 1.0)) *
                 180.0 / kPi;
    CHECK(dev < 0.3);
  }

  SECTION("a prediction far outside the cone moves only marginally") {
    auto far_dir = pixel_direction(EnvFormat::SkyAngular, n, n, 160, 180);
    SunPosition guess;
    guess.direction = *far_dir;
    SunPosition refined = snap_to_centroid(guess, img, 2.0);
    // uniform background inside the cone: centroid stays near the guess
    double dev = std::acos(std::clamp(dot(refined.direction, *far_dir), -1.0, 1.0)) *
                 180.0 / kPi;
    CHECK(dev < 2.0);
  }

  SECTION("an empty cone returns the prediction unchanged") {
    SunPosition below = sun_from_angles(-30.0, 0.0);
    SunPosition refined = snap_to_centroid(below, img, 2.0);
    CHECK(refined.direction.z == below.direction.z);
  }
}

TEST_CASE("cloud colour ratio") {
  RadianceImage img = make_image(EnvFormat::SkyAngular, 4, 4);
  auto set = [&](int x, int y, float r, float g, float b) {
    float* p = img.px(x, y);
    p[0] = r;
    p[1] = g;
    p[2] = b;
  };
  set(0, 0, 2, 1, 2);  // R == B
  set(1, 0, 0, 0, 5);  // pure blue
  set(2, 0, 3, 0, 0);  // pure red
  set(3, 0, 0, 9, 0);  // B + R == 0
  GrayscaleImage ratio = cloud_ratio(img);
  CHECK(ratio.at(0, 0) == 0.f);
  CHECK(ratio.at(1, 0) == 1.f);
  CHECK(ratio.at(2, 0) == -1.f);
  CHECK(ratio.at(3, 0) == 0.f);

  SECTION("invariant under equal scaling of R and B") {
    RadianceImage scaled = img;
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) {
        scaled.px(x, y)[0] *= 3.f;
        scaled.px(x, y)[2] *= 3.f;
      }
    GrayscaleImage r2 = cloud_ratio(scaled);
    for (size_t i = 0; i < ratio.v.size(); ++i)
      CHECK(r2.v[i] == Catch::Approx(ratio.v[i]).margin(1e-6));
  }

  SECTION("the recommended input space is tagged mu-law-log2") {
    CHECK_FALSE(cloud_ratio_input_recommended(img));
    CHECK(cloud_ratio_input_recommended(
        tag_compression(img, ToneMapOp::mu_law_log2(5000.0))));
    CHECK_FALSE(
        cloud_ratio_input_recommended(tag_compression(img, ToneMapOp::power_law(2.2))));
  }
}

TEST_CASE("cloud mask thresholding and erosion") {
  LabelConfig cfg;
  Mask all_valid(32, 32, true);

  SECTION("clear blue sky yields no clouds") {
    GrayscaleImage ratio(32, 32, 0.95f);
    cfg.erosion_kernel = 1;
    CHECK(cloud_mask(ratio, cfg, all_valid).count() == 0);
  }

  SECTION("unit brush is the identity on the crude mask") {
    GrayscaleImage ratio(32, 32, 0.f);  // everything cloudy
    LabelConfig crude_cfg = cfg;
    crude_cfg.erosion_kernel = 1;
    Mask crude = cloud_mask(ratio, crude_cfg, all_valid);
    CHECK(crude.count() == 32u * 32u);
  }

  SECTION("a full mask loses a 7-pixel ring under the hand-drawn brush") {
    Mask full(32, 32, true);
    Mask eroded = erode_disc(full, 15);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        bool interior = x >= 7 && x < 25 && y >= 7 && y < 25;
        if (interior) CHECK(eroded.at(x, y));
        int edge = std::min(std::min(x, 31 - x), std::min(y, 31 - y));
        if (edge < 7) CHECK_FALSE(eroded.at(x, y));
      }
  }

  SECTION("erosion matches the brute-force oracle") {
    Mask m = random_blob_mask(32, 32, 77);
    for (int k : {3, 7}) {
      Mask fast = erode_disc(m, k);
      Mask slow = brute_force_erode_disc(m, k);
      CHECK(fast.on == slow.on);
    }
  }

  SECTION("erosion is monotone in the kernel") {
    Mask m = random_blob_mask(48, 48, 5, 0.55);
    Mask k1 = erode_disc(m, 1);
    Mask k7 = erode_disc(m, 7);
    Mask k15 = erode_disc(m, 15);
    CHECK(subset_of(k15, k7));
    CHECK(subset_of(k7, k1));
  }

  SECTION("even or non-positive kernels are rejected") {
    Mask m(8, 8, true);
    CHECK_THROWS_AS(erode_disc(m, 4), std::invalid_argument);
    CHECK_THROWS_AS(erode_disc(m, 0), std::invalid_argument);
  }
}

TEST_CASE("discrete label precedence") {
  SegmentationMaps maps;
  maps.sun = Mask(4, 4);
  maps.cloud = Mask(4, 4);
  maps.skydome = Mask(4, 4, true);
  maps.border = Mask(4, 4);

  maps.sun.set(1, 1, true);
  maps.cloud.set(1, 1, true);  // overlaps the sun
  maps.cloud.set(2, 2, true);
  maps.border.set(0, 0, true);
  maps.border.set(3, 3, true);
  maps.sun.set(3, 3, true);  // border wins

  DiscreteLabel label = discrete_label(maps);
  CHECK(label.at(0, 0) == 0);
  CHECK(label.at(1, 1) == 3);
  CHECK(label.at(2, 2) == 2);
  CHECK(label.at(3, 3) == 0);
  CHECK(label.at(2, 1) == 1);

  SECTION("dimension mismatch") {
    maps.cloud = Mask(5, 5);
    CHECK_THROWS_AS(discrete_label(maps), std::invalid_argument);
  }
}

TEST_CASE("segmentation partitions every pixel exactly once") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 32;
    RadianceImage img = testsupport::random_smooth_sky(EnvFormat::SkyAngular, n, n, rng());
    // random red/blue tilt so the cloud threshold fires irregularly
    PerlinNoise2D tilt(rng());
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        float* p = img.px(x, y);
        float f = static_cast<float>(tilt.fbm(x / 6.0, y / 6.0, 2, 0.5));
        p[2] = std::max(0.f, p[2] * (1.f + 1.5f * f));
      }
    LabelConfig cfg;
    cfg.erosion_kernel = (trial % 3) * 2 + 1;
    cfg.cloud_tau = 0.2 + 0.2 * ((trial % 5) / 4.0);
    cfg.perlin_seed = trial;
    double elevation = -5.0 + (trial % 10) * 10.0;
    SunPosition sun = sun_from_angles(elevation, (trial * 37) % 360);
    RadianceImage compressed = tonemap(img, ToneMapOp::mu_law_log2(5000.0));
    SegmentationMaps maps = segment(compressed, sun, cfg);
    DiscreteLabel label = discrete_label(maps);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        int classes = 0;
        bool is_border = maps.border.at(x, y);
        bool is_sun = maps.sun.at(x, y) && !is_border;
        bool is_cloud = maps.cloud.at(x, y) && !is_sun && !is_border;
        bool is_sky = maps.skydome.at(x, y);
        classes = int(is_border) + int(is_sun) + int(is_cloud) + int(is_sky);
        REQUIRE(classes == 1);
        REQUIRE(label.at(x, y) <= 3);
      }
  }
}

TEST_CASE("continuous labels") {
  int n = 64;
  RadianceImage img = testsupport::gradient_sky(EnvFormat::SkyAngular, n, n);
  // put some clouds in by dropping blue in a band
  for (int y = 20; y < 36; ++y)
    for (int x = 8; x < 56; ++x) img.px(x, y)[2] *= 0.3f;
  RadianceImage compressed = tonemap(img, ToneMapOp::mu_law_log2(5000.0));

  // aim the sun exactly at a pixel center so the peak similarity is 1
  auto sun_dir = pixel_direction(EnvFormat::SkyAngular, n, n, 40, 12);
  REQUIRE(sun_dir);
  SunPosition sun;
  sun.direction = *sun_dir;
  sun.elevation_deg = std::asin(sun_dir->z) * 180.0 / kPi;
  sun.azimuth_deg = std::atan2(sun_dir->x, sun_dir->y) * 180.0 / kPi;

  LabelConfig cfg;
  cfg.perlin_seed = 99;
  SegmentationMaps maps = segment(compressed, sun, cfg);
  REQUIRE(maps.sun.at(40, 12));
  SolidAngleMap omega = solid_angles(EnvFormat::SkyAngular, n, n);
  ContinuousLabel label = continuous_label(maps, EnvFormat::SkyAngular, sun, omega, cfg);

  SECTION("sun channel peaks at one on the sun pixel") {
    CHECK(label.at(40, 12)[0] == Catch::Approx(1.0).margin(1e-6));
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        CHECK(label.at(x, y)[0] >= 0.f);
        CHECK(label.at(x, y)[0] <= 1.f);
      }
  }

  SECTION("cloud channel vanishes outside the cloud mask") {
    DiscreteLabel codes = discrete_label(maps);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        if (codes.at(x, y) != 2) CHECK(label.at(x, y)[2] == 0.f);
  }

  SECTION("solid-angle channel is normalized") {
    float peak = 0.f;
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) peak = std::max(peak, label.at(x, y)[1]);
    CHECK(peak <= 1.f);
    CHECK(peak > 0.9f);
  }

  SECTION("fixed seed reproduces the label bit for bit") {
    ContinuousLabel again = continuous_label(maps, EnvFormat::SkyAngular, sun, omega, cfg);
    CHECK(label.ch == again.ch);
  }

  SECTION("different seeds differ") {
    LabelConfig other = cfg;
    other.perlin_seed = 100;
    ContinuousLabel changed = continuous_label(maps, EnvFormat::SkyAngular, sun, omega, other);
    CHECK(label.ch != changed.ch);
  }
}

TEST_CASE("distance field") {
  SECTION("empty mask is all zeros") {
    GrayscaleImage d = distance_field(Mask(8, 8));
    for (float v : d.v) CHECK(v == 0.f);
  }
  SECTION("single pixel mask") {
    Mask m(7, 7);
    m.set(3, 3, true);
    GrayscaleImage d = distance_field(m);
    CHECK(d.at(3, 3) == 1.f);
    CHECK(d.at(2, 3) == 0.f);
    CHECK(d.at(4, 4) == 0.f);
  }
  SECTION("10x10 block matches the all-pairs oracle") {
    Mask m(32, 32);
    for (int y = 10; y < 20; ++y)
      for (int x = 6; x < 16; ++x) m.set(x, y, true);
    GrayscaleImage fast = distance_field(m);
    GrayscaleImage slow = brute_force_edt(m);
    for (size_t i = 0; i < fast.v.size(); ++i)
      CHECK(fast.v[i] == Catch::Approx(slow.v[i]).margin(1e-4));
  }
  SECTION("random masks match the oracle") {
    Mask m = random_blob_mask(24, 24, 31337);
    GrayscaleImage fast = distance_field(m);
    GrayscaleImage slow = brute_force_edt(m);
    for (size_t i = 0; i < fast.v.size(); ++i)
      CHECK(fast.v[i] == Catch::Approx(slow.v[i]).margin(1e-4));
  }
}

TEST_CASE("perlin noise determinism and range") {
  PerlinNoise2D a(42), b(42), c(43);
  bool seeds_identical = true;
  for (int i = 0; i < 500; ++i) {
    double x = i * 0.37, y = i * 0.13;
    double va = a.fbm(x, y, 3, 0.5);
    CHECK(va == b.fbm(x, y, 3, 0.5));
    if (va != c.fbm(x, y, 3, 0.5)) seeds_identical = false;
    CHECK(va >= -1.0);
    CHECK(va <= 1.0);
  }
  CHECK_FALSE(seeds_identical);
}
