#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "qcs/envelope.hpp"

using namespace qcs;

namespace {

Envelope ramp() {
  Envelope e;
  e.name = "ramp";
  e.points.resize(kEnvelopeTablePoints);
  for (int i = 0; i < kEnvelopeTablePoints; ++i)
    e.points[i] = static_cast<double>(i) / (kEnvelopeTablePoints - 1);
  return e;
}

}  // namespace

TEST_CASE("library registration rules") {
  EnvelopeLibrary lib;
  CHECK(lib.contains(0));
  CHECK_FALSE(lib.contains(1));
  CHECK_THROWS_AS(lib.at(1), UnknownEnvelope);
  CHECK_THROWS_AS(lib.set(0, ramp()), ConfigError);
  CHECK_THROWS_AS(lib.set(256, ramp()), ConfigError);

  Envelope short_table;
  short_table.points.resize(17);
  CHECK_THROWS_AS(lib.set(1, short_table), ConfigError);

  lib.set(5, ramp());
  CHECK(lib.contains(5));
  CHECK(lib.at(5).name == "ramp");
  CHECK(lib.ids() == std::vector<int>{5});
}

TEST_CASE("stretched playback endpoints are exact") {
  EnvelopeLibrary lib;
  lib.set(1, ramp());
  lib.set(2, make_gaussian("g", 0.25));

  // First and last sample of any pulse length hit table[0] and table[4095].
  for (uint64_t n : {2ull, 5ull, 100ull, 4096ull, 10000ull}) {
    CHECK(lib.value(1, 0, n) == 0.0);
    CHECK(lib.value(1, n - 1, n) == 1.0);
  }
  // Rectangular id 0 is 1.0 everywhere.
  CHECK(lib.value(0, 0, 7) == 1.0);
  CHECK(lib.value(0, 6, 7) == 1.0);
}

TEST_CASE("linear interpolation against direct evaluation") {
  EnvelopeLibrary lib;
  lib.set(1, ramp());
  // A linear table interpolates to the line itself, for any stretch.
  for (uint64_t n : {3ull, 7ull, 1000ull}) {
    for (uint64_t k = 0; k < n; ++k) {
      const double expect = static_cast<double>(k) / (n - 1);
      CHECK(lib.value(1, k, n) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("cursor matches indexed lookup") {
  EnvelopeLibrary lib;
  const Envelope g = make_gaussian("g", 0.2);
  lib.set(3, g);
  const uint64_t n = 137;
  EnvelopeCursor cursor(&lib.at(3), n);
  for (uint64_t k = 0; k < n; ++k)
    CHECK(cursor.next() == doctest::Approx(lib.value(3, k, n)).epsilon(1e-12));

  EnvelopeCursor rect;
  for (int k = 0; k < 10; ++k) CHECK(rect.next() == 1.0);
}

TEST_CASE("shape constructors") {
  const Envelope g = make_gaussian("g", 0.2);
  REQUIRE(static_cast<int>(g.points.size()) == kEnvelopeTablePoints);
  CHECK(g.points[kEnvelopeTablePoints / 2] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(g.points.front() == g.points.back());
  // Edge value of a truncated gaussian: exp(-(0.5/sigma)^2 / 2).
  CHECK(g.points.front() == doctest::Approx(std::exp(-3.125)).epsilon(1e-2));

  const Envelope t = make_triangle("t");
  CHECK(t.points.front() == 0.0);
  CHECK(t.points[kEnvelopeTablePoints / 2] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(t.points.back() == doctest::Approx(0.0).epsilon(1e-3));

  const Envelope f = make_flattop("f", 0.1);
  CHECK(f.points[kEnvelopeTablePoints / 2] == 1.0);
  CHECK(f.points.front() < 0.05);
}

TEST_CASE("save and load round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "qcs_env_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  EnvelopeLibrary lib;
  lib.set(1, ramp());
  lib.set(9, make_gaussian("gauss", 0.2));
  lib.save((dir / "index.json").string());

  const EnvelopeLibrary back = EnvelopeLibrary::load((dir / "index.json").string());
  CHECK(back.ids() == std::vector<int>{1, 9});
  CHECK(back.at(9).name == "gauss");
  for (int i = 0; i < kEnvelopeTablePoints; ++i) {
    CHECK(back.at(1).points[i] == lib.at(1).points[i]);
    CHECK(back.at(9).points[i] == lib.at(9).points[i]);
  }
  fs::remove_all(dir);
}
