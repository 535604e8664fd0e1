#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"

#include "ecgraph/signal_io.hpp"
#include "helpers.hpp"

using namespace ecgraph;

TEST_SUITE("signal_io") {

  TEST_CASE("signal csv round-trips leads, order and values") {
    SignalRecord rec;
    rec.add(Lead::II, {0.0, -0.125, 1.5});
    rec.add(Lead::V5, {0.25, 0.5, -2.0});
    std::string csv = format_signal_csv(rec);
    CHECK(csv.find("II,V5\n") == 0);
    CHECK(csv.back() == '\n');

    SignalRecord back = parse_signal_csv(csv, 250.0);
    // all values above are exact at six decimals, so deep equality holds
    CHECK(back.leads() == rec.leads());
  }

  TEST_CASE("six decimals survive exactly") {
    SignalRecord rec;
    rec.add(Lead::I, {0.000001, -0.000001, 123.456789});
    SignalRecord back = parse_signal_csv(format_signal_csv(rec), 1.0);
    const auto& v = back.samples(Lead::I);
    CHECK(v[0] == 0.000001);
    CHECK(v[1] == -0.000001);
    CHECK(v[2] == 123.456789);
  }

  TEST_CASE("malformed signal csv is rejected") {
    CHECK_THROWS_AS(parse_signal_csv("", 100.0), Error);
    CHECK_THROWS_AS(parse_signal_csv("I,Q2\n0.0,0.0\n", 100.0), Error); // bad lead
    CHECK_THROWS_AS(parse_signal_csv("I,II\n0.0\n", 100.0), Error);     // short row
    CHECK_THROWS_AS(parse_signal_csv("I\nabc\n", 100.0), Error);        // not a number
  }

  TEST_CASE("signal files save and load through disk") {
    const std::string dir = test::temp_dir("sig");
    SignalRecord rec;
    rec.add(Lead::aVL, {1.0, 2.0});
    save_signal_csv(rec, dir + "/s.csv");
    SignalRecord back = load_signal_csv(dir + "/s.csv", 500.0);
    CHECK(back.samples(Lead::aVL) == std::vector<double>{1.0, 2.0});
    CHECK(back.sample_rate_hz == 500.0);
  }

  TEST_CASE("sidecars round-trip calibration and gap ranges") {
    SignalSidecar sc;
    sc.sample_rate_hz = 250.0;
    sc.gain_mv_per_pixel = 0.01;
    sc.source_image = "page_0001.png";
    sc.gaps[Lead::III] = {{5, 9}, {40, 41}};
    SignalSidecar back = parse_signal_sidecar(format_signal_sidecar(sc));
    CHECK(back.sample_rate_hz == 250.0);
    CHECK(back.gain_mv_per_pixel == 0.01);
    CHECK(back.source_image == "page_0001.png");
    REQUIRE(back.gaps.count(Lead::III) == 1);
    CHECK(back.gaps.at(Lead::III) == sc.gaps.at(Lead::III));
    CHECK_THROWS_AS(parse_signal_sidecar("{"), Error);
  }

  TEST_CASE("atomic writes replace the whole file or nothing") {
    const std::string dir = test::temp_dir("atomic");
    const std::string path = dir + "/f.txt";
    atomic_write_file(path, "first");
    CHECK(read_file(path) == "first");
    atomic_write_file(path, "second");
    CHECK(read_file(path) == "second");
    CHECK_THROWS_AS(read_file(dir + "/missing.txt"), Error);
    // no temp litter left behind
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      (void)e;
      ++files;
    }
    CHECK(files == 1);
  }
}
