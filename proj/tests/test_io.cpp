#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <unistd.h>

#include "irpc/io/bundle.hpp"
#include "irpc/io/digest.hpp"
#include "irpc/io/report.hpp"

using namespace irpc;
using namespace irpc::io;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("irpc_io_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write_text(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
  }

  std::string bytes_of(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  fs::path dir_;
};

template <typename E>
std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  }
  return "<no exception>";
}

}  // namespace

TEST_F(IoTest, Pgm16RoundTripIsBigEndian) {
  const Graymap g{3, 2, 65535, {0, 1, 258, 65535, 40000, 7}};
  write_pgm(path("a.pgm"), g);
  const std::string raw = bytes_of("a.pgm");
  const std::string header = "P5\n3 2\n65535\n";
  ASSERT_EQ(raw.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<unsigned char>(raw[header.size() + 4]), 0x01);  // 258 = 0x0102
  EXPECT_EQ(static_cast<unsigned char>(raw[header.size() + 5]), 0x02);
  const Graymap back = read_pgm(path("a.pgm"));
  EXPECT_EQ(back.width, 3);
  EXPECT_EQ(back.height, 2);
  EXPECT_EQ(back.samples, g.samples);
}

TEST_F(IoTest, Pgm8AndComments) {
  write_text("b.pgm", std::string("P5\n# made by hand\n2 1 # trailing\n255\n") + "\x05\xff");
  const Graymap g = read_pgm(path("b.pgm"));
  EXPECT_EQ(g.max_value, 255);
  EXPECT_EQ(g.samples, (std::vector<std::uint16_t>{5, 255}));
}

TEST_F(IoTest, PgmErrors) {
  write_text("p2.pgm", "P2\n1 1\n255\n0\n");
  EXPECT_THROW(read_pgm(path("p2.pgm")), FormatError);
  write_text("short.pgm", "P5\n4 4\n255\nab");
  EXPECT_NE(message_of<FormatError>([&] { read_pgm(path("short.pgm")); }).find("truncated"), std::string::npos);
  EXPECT_THROW(read_pgm(path("absent.pgm")), IoError);
  EXPECT_THROW(write_pgm(path("c.pgm"), Graymap{2, 2, 255, {1, 2, 3}}), DomainError);
  EXPECT_THROW(write_pgm(path("c.pgm"), Graymap{1, 1, 255, {300}}), DomainError);
}

TEST(Quantize, RoundsAndClamps) {
  EXPECT_EQ(quantize16(-3.0), 0);
  EXPECT_EQ(quantize16(NAN), 0);
  EXPECT_EQ(quantize16(2.5), 3);
  EXPECT_EQ(quantize16(70000.0), 65535);
}

TEST_F(IoTest, PlaneRoundTrips) {
  const FloatPlane p{2, 2, {1.0 / 3.0, -2.5, 12345.678, 0.0}};
  write_plane(path("a.irf"), p, PlanePrecision::Float64);
  EXPECT_EQ(read_plane(path("a.irf")).samples, p.samples);
  const std::string raw = bytes_of("a.irf");
  EXPECT_EQ(raw.size(), 12u + 4 * 8);
  EXPECT_EQ(raw.substr(0, 4), "IRF8");
  EXPECT_EQ(raw[4], 2);
  EXPECT_EQ(raw[5], 0);

  write_plane(path("b.irf"), p, PlanePrecision::Float32);
  const FloatPlane f = read_plane(path("b.irf"));
  EXPECT_EQ(bytes_of("b.irf").size(), 12u + 4 * 4);
  for (std::size_t k = 0; k < p.samples.size(); ++k)
    EXPECT_EQ(f.samples[k], static_cast<double>(static_cast<float>(p.samples[k])));
}

TEST_F(IoTest, PlaneErrors) {
  write_text("bad.irf", std::string("IRF9\x01\0\0\0\x01\0\0\0", 12));
  EXPECT_THROW(read_plane(path("bad.irf")), FormatError);
  write_plane(path("ok.irf"), FloatPlane{2, 1, {1, 2}}, PlanePrecision::Float32);
  fs::resize_file(path("ok.irf"), 15);
  EXPECT_THROW(read_plane(path("ok.irf")), FormatError);
  EXPECT_THROW(write_plane(path("x.irf"), FloatPlane{2, 2, {1}}, PlanePrecision::Float32), DomainError);
}

TEST_F(IoTest, CsvHeaderDetectionAndLineNumbers) {
  write_text("h.csv", "x,y,z\n1,2,3\n\n4, 5 ,6\r\n");
  const CsvTable t = read_csv(path("h.csv"));
  EXPECT_EQ(t.header, (std::vector<std::string>{"x", "y", "z"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.line_numbers, (std::vector<std::size_t>{2, 4}));
  EXPECT_EQ(t.rows[1][1], "5");

  write_text("n.csv", "1,2,3\n");
  EXPECT_TRUE(read_csv(path("n.csv")).header.empty());
  EXPECT_EQ(read_points(path("n.csv")).size(), 1u);

  write_text("bad.csv", "x,y,z\n1,2,3\n4,oops,6\n");
  const std::string msg = message_of<FormatError>([&] { read_points(path("bad.csv")); });
  EXPECT_NE(msg.find("bad.csv:3"), std::string::npos) << msg;
  write_text("cols.csv", "1,2\n");
  EXPECT_NE(message_of<FormatError>([&] { read_points(path("cols.csv")); }).find("cols.csv:1"), std::string::npos);
}

TEST_F(IoTest, PointsAndTrajectoriesRoundTrip) {
  const std::vector<Point3> pts{{0.1, -2.0, 1e-17}, {1.0 / 3.0, 4.0, 5.0}};
  write_points(path("p.csv"), pts);
  EXPECT_EQ(read_points(path("p.csv")), pts);

  const Trajectory tr({{0.0, {1.0 / 7.0, 2, 3}}, {0.5, {4, 5, 6}}});
  write_trajectory(path("t.csv"), tr);
  const Trajectory back = read_trajectory(path("t.csv"));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].position, tr[0].position);
  EXPECT_EQ(back[1].timestamp, 0.5);

  write_text("t2.csv", "0,1,2\n1,3,4\n");
  EXPECT_EQ(read_trajectory(path("t2.csv"))[1].position, Point3(3, 4, 0));
  write_text("t3.csv", "t,x,y\n0,1,2\n0,3,4\n");
  EXPECT_NE(message_of<FormatError>([&] { read_trajectory(path("t3.csv")); }).find("t3.csv:3"), std::string::npos);
}

TEST(Report, FormatAndParse) {
  RunReport r("estimate");
  r.set("tau_h_s", 0.1);
  r.set("count", 3);
  r.set("name", "x");
  r.set("tau_h_s", 0.012345678901234567);
  EXPECT_EQ(r.str(), "command=estimate\ntau_h_s=0.012345678901234567\ncount=3\nname=x\n");
  const auto kv = parse_report(r.str() + "garbage line\n");
  EXPECT_EQ(kv.size(), 4u);
  EXPECT_EQ(std::stod(kv.at("tau_h_s")), 0.012345678901234567);
}

TEST_F(IoTest, Digests) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  write_text("a.txt", "abc");
  EXPECT_EQ(file_digest(path("a.txt")), sha256_hex("abc"));
  const std::string d1 = directory_digest(dir_);
  write_text("b.txt", "more");
  EXPECT_NE(directory_digest(dir_), d1);
  EXPECT_EQ(directory_digest(dir_, {"b.txt"}), d1);
}

TEST_F(IoTest, BundleRoundTrip) {
  BenchmarkOptions opt;
  opt.seed = 2;
  opt.frames = 5;
  const auto b = make_benchmark(opt);
  write_bundle(b, dir_ / "bundle");
  const VideoSequence raw = read_sequence(dir_ / "bundle", "raw");
  ASSERT_EQ(raw.size(), 5u);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    EXPECT_EQ(raw[k].timing(), b.raw[k].timing());
    EXPECT_TRUE(std::equal(raw[k].data().begin(), raw[k].data().end(), b.raw[k].data().begin()));
  }
  const VideoSequence film = read_sequence(dir_ / "bundle", "film");
  EXPECT_TRUE(std::equal(film[2].data().begin(), film[2].data().end(), b.film[2].data().begin()));

  const TruthRecord t = read_truth(dir_ / "bundle" / kTruth);
  EXPECT_EQ(t.taus, b.taus);
  EXPECT_EQ(t.plane.normal, b.plane.normal);
  EXPECT_EQ(t.line.direction, b.line.direction);
  EXPECT_EQ(read_correspondences(dir_ / "bundle" / kCorrespondences), b.correspondences);

  std::vector<FrameTiming> timings;
  for (const auto& f : b.raw) timings.push_back(f.timing());
  const CameraSpec cam = read_camera(dir_ / "bundle" / kCamera, timings);
  EXPECT_EQ(cam.rotation, b.camera.rotation);
  EXPECT_EQ(cam.center(3), b.camera.center(3));
  const auto labels = read_labels(dir_ / "bundle", 5);
  EXPECT_EQ(labels[1].label, b.surfaces[1].label);
}

TEST_F(IoTest, MissingManifestNamesTheFile) {
  const std::string msg = message_of<FormatError>([&] { read_sequence(dir_, "raw"); });
  EXPECT_NE(msg.find("missing manifest"), std::string::npos);
  EXPECT_NE(msg.find("manifest.csv"), std::string::npos);
}

TEST_F(IoTest, ManifestFrameMustExist) {
  write_text("manifest.csv", "frame_index,timestamp_s,exposure_s,readout_s\n0,0,0.01,0.02\n");
  EXPECT_THROW(read_sequence(dir_, "raw"), FormatError);
}
