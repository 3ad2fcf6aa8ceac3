#include <doctest.h>

#include <cmath>
#include <cstring>

#include "generators.hpp"
#include "pdgstudio/checksum.hpp"
#include "pdgstudio/document.hpp"
#include "pdgstudio/error.hpp"
#include "pdgstudio/image_io.hpp"
#include "pdgstudio/synth.hpp"
#include "pdgstudio/tensor.hpp"

using namespace pdg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json minimal_document() {
  return json::parse(R"({"version": 1,
    "nodes": [{"id": "a", "movable": true, "footprint_path": "a.png"}],
    "edges": [{"parent": "static", "child": "a", "kind": "translation", "axis": [1, 0, 0],
               "center": [0, 0, 0], "range": [-1, 1]}]})");
}

}  // namespace

TEST_CASE("png: RGB and mask round trips") {
  gen::TempDir dir;
  const Image img = gen::textured_image(7, 11, 42);
  write_png(dir / "a.png", img);
  CHECK(read_rgb_png(dir / "a.png") == img);
  CHECK(decode_png(encode_png(img)).bit_depth == 8);

  Mask m = make_mask(5, 6);
  m.at(1, 2) = 1;
  m.at(4, 5) = 1;
  write_mask_png(dir / "m.png", m);
  CHECK(read_mask_png(dir / "m.png") == m);
  const PngRaster raw = read_png(dir / "m.png");
  CHECK(raw.samples[1 * 6 + 2] == 255);
  CHECK(raw.samples[0] == 0);
}

TEST_CASE("png: 16-bit gray keeps full precision") {
  gen::TempDir dir;
  std::vector<std::uint16_t> s{0, 1, 256, 65535, 1234, 40000};
  write_gray16_png(dir / "d.png", 2, 3, s);
  const PngRaster r = read_png(dir / "d.png");
  CHECK(r.bit_depth == 16);
  CHECK(r.samples == s);
  CHECK_THROWS_AS(read_rgb_png(dir / "d.png"), IoError);
}

TEST_CASE("png: garbage and missing files are I/O errors") {
  gen::TempDir dir;
  write_text_file(dir / "x.png", "definitely not a png");
  CHECK_THROWS_AS(read_png(dir / "x.png"), IoError);
  CHECK_THROWS_AS(read_png(dir / "missing.png"), IoError);
}

TEST_CASE("pfm: round trip keeps every bit, including NaN and zero") {
  gen::TempDir dir;
  DepthMap d(3, 4, 1, 0.0f);
  for (std::size_t i = 0; i < d.data().size(); ++i) d.data()[i] = 0.125f * static_cast<float>(i) + 1e-7f;
  d.at(1, 1) = std::nanf("");
  d.at(2, 3) = 0.0f;
  write_pfm(dir / "d.pfm", d);
  const DepthMap back = read_pfm(dir / "d.pfm");
  REQUIRE(back.same_shape(d));
  CHECK(std::memcmp(back.data().data(), d.data().data(), d.data().size() * sizeof(float)) == 0);
  // rows are stored bottom-up
  const auto bytes = read_file_bytes(dir / "d.pfm");
  float first;
  std::memcpy(&first, bytes.data() + (bytes.size() - 12 * 4), 4);
  CHECK(first == d.at(2, 0));
}

TEST_CASE("tensor: header layout and round trip") {
  Tensor4f t(2, 3, 1, 2);
  for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] = static_cast<float>(i) - 3.5f;
  const auto bytes = encode_tensor(t);
  REQUIRE(bytes.size() == 4 + 16 + t.data.size() * 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "PDGT");
  CHECK(bytes[4] == 2);
  CHECK(bytes[8] == 3);
  CHECK(bytes[12] == 1);
  CHECK(bytes[16] == 2);
  float f;
  std::memcpy(&f, bytes.data() + 20 + 4 * t.index(1, 2, 0, 1), 4);
  CHECK(f == t.at(1, 2, 0, 1));
  CHECK(bit_identical(decode_tensor(bytes), t));

  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(decode_tensor(truncated), IoError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_tensor(bad_magic), IoError);
}

TEST_CASE("tensor: bit_identical separates signed zeros and NaN payloads") {
  Tensor4f a(1, 1, 1, 1, 0.0f), b(1, 1, 1, 1, -0.0f);
  CHECK(a == b);
  CHECK_FALSE(bit_identical(a, b));
}

TEST_CASE("sha256 and base64 known vectors") {
  const std::string abc = "abc";
  CHECK(sha256_hex({abc.begin(), abc.end()}) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex({}) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  auto b64 = [](const std::string& s) { return base64_encode({s.begin(), s.end()}); };
  CHECK(b64("") == "");
  CHECK(b64("f") == "Zg==");
  CHECK(b64("fo") == "Zm8=");
  CHECK(b64("foo") == "Zm9v");
  CHECK(b64("foobar") == "Zm9vYmFy");
}

TEST_CASE("graph document: strict parse and round trip") {
  const PdgDocument doc = parse_pdg_document(minimal_document());
  REQUIRE(doc.nodes.size() == 1);
  CHECK(doc.nodes[0].movable);
  CHECK(doc.edges[0].kind == MotionKind::Translation);
  const PdgDocument again = parse_pdg_document(to_json(doc));
  CHECK(again.nodes == doc.nodes);
  CHECK(to_json(again) == to_json(doc));

  auto extra = minimal_document();
  extra["author"] = "me";
  CHECK_THROWS_AS(parse_pdg_document(extra), DocumentError);
  extra = minimal_document();
  extra["edges"][0]["speed"] = 2;
  CHECK_THROWS_AS(parse_pdg_document(extra), DocumentError);
  extra = minimal_document();
  extra["nodes"][0].erase("movable");
  CHECK_THROWS_AS(parse_pdg_document(extra), DocumentError);
  extra = minimal_document();
  extra["edges"][0]["kind"] = "twist";
  CHECK_THROWS(parse_pdg_document(extra));
  extra = minimal_document();
  extra["edges"][0]["axis"] = json::array({1, 0});
  CHECK_THROWS_AS(parse_pdg_document(extra), DocumentError);
  extra = minimal_document();
  extra["version"] = 2;
  CHECK_THROWS_AS(parse_pdg_document(extra), DocumentError);
}

TEST_CASE("graph document: file errors") {
  gen::TempDir dir;
  CHECK_THROWS_AS(load_pdg_document(dir / "none.json"), IoError);
  write_text_file(dir / "broken.json", "{\"version\": 1,");
  CHECK_THROWS_AS(load_pdg_document(dir / "broken.json"), IoError);
  save_pdg_document(dir / "ok.json", parse_pdg_document(minimal_document()));
  CHECK(load_pdg_document(dir / "ok.json").edges.size() == 1);
}

TEST_CASE("assemble_pdg: scene lift, placeholder geometry and points files") {
  gen::TempDir dir;
  SynthSpec spec;
  spec.width = 32;
  spec.height = 24;
  spec.background_depth = 4.0;
  spec.primitives = {{"a", 4, 4, 6, 8, 2.0, 1, SynthMotion{}}};
  const SynthResult r = synth_scene(spec);
  write_synth(r, dir.path());
  const PdgDocument doc = load_pdg_document(dir / "pdg.json");

  const Pdg lifted = assemble_pdg(doc, dir.path(), &r.scene);
  CHECK(lifted.nodes[0].points == r.pdg.nodes[0].points);
  CHECK(validate_pdg(lifted).empty());

  const Pdg placeholder = assemble_pdg(doc, dir.path(), nullptr);
  CHECK(placeholder.nodes[0].points.size() == 48);
  CHECK(placeholder.nodes[0].points[0] == Vec3(4, 4, 1));
  CHECK(validate_pdg(placeholder).empty());

  PointCloud cloud;
  cloud.points = {{0.5, -0.25, 3.0}, {1.0, 2.0, 4.0}};
  cloud.pixel_origin = {{4, 4}, {5, 6}};
  cloud.colors = {{1, 2, 3}, {250, 251, 252}};
  write_points_file(dir / "a.pdgt", cloud);
  const PointCloud back = read_points_file(dir / "a.pdgt");
  CHECK(back.points == cloud.points);
  CHECK(back.colors == cloud.colors);
  CHECK(back.pixel_origin[1].col == 6);
  PdgDocument with_points = doc;
  with_points.nodes[0].points_path = "a.pdgt";
  CHECK(assemble_pdg(with_points, dir.path(), &r.scene).nodes[0].points.size() == 2);

  PdgDocument missing = doc;
  missing.nodes[0].footprint_path = "nowhere.png";
  CHECK_THROWS_AS(assemble_pdg(missing, dir.path(), nullptr), IoError);
}

TEST_CASE("pose document") {
  const Pose p = parse_pose_document(json::parse(R"({"version": 1, "params": {"a": 0.5, "b": -1}})"));
  CHECK(p.params.at("a") == 0.5);
  CHECK(parse_pose_document(to_json(p)) == p);
  CHECK_THROWS_AS(parse_pose_document(json::parse(R"({"version": 1, "params": {}, "x": 1})")), DocumentError);
  CHECK_THROWS_AS(parse_pose_document(json::parse(R"({"version": 1, "params": {"a": "far"}})")), DocumentError);
  CHECK_THROWS_AS(parse_pose_document(json::parse(R"({"params": {}})")), DocumentError);
  gen::TempDir dir;
  save_pose(dir / "p.json", p);
  CHECK(load_pose(dir / "p.json") == p);
  CHECK_THROWS_AS(load_pose(dir / "q.json"), IoError);
}

TEST_CASE("diagnostics serialize with kind, subject and message") {
  const json j = diagnostics_to_json({{Violation::Cycle, "nodes a, b", "edges form a cycle through a, b"}});
  REQUIRE(j.is_array());
  CHECK(j[0].at("violation") == "cycle");
  CHECK(j[0].at("subject") == "nodes a, b");
}
