#include <doctest.h>

#include <thread>

#include "generators.hpp"
#include "pdgstudio/checksum.hpp"
#include "pdgstudio/image_io.hpp"
#include "pdgstudio/pipeline.hpp"
#include "pdgstudio/service.hpp"
#include "pdgstudio/synth.hpp"

#include <httplib.h>

using namespace pdg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

SynthSpec slider_spec() {
  SynthSpec spec;
  spec.width = 96;
  spec.height = 64;
  spec.background_depth = 4.0;
  spec.background_seed = 7;
  SynthRect box;
  box.id = "box";
  box.row = 16;
  box.col = 16;
  box.rows = 24;
  box.cols = 32;
  box.depth = 2.0;
  box.seed = 3;
  SynthMotion motion;
  motion.range = {-1.0, 1.0};
  motion.target = 0.5;
  box.motion = motion;
  spec.primitives.push_back(box);
  return spec;
}

struct Fixture {
  gen::TempDir dir{"pdgservice"};
  SynthResult synth = synth_scene(slider_spec());
  fs::path manifest = write_synth(synth, dir / "scene");
  StudioService service{dir / "work"};

  std::string pdg_body() const { return to_json(synth.document).dump(); }

  std::string open_session() {
    const ApiResponse created = service.create_session(json{{"manifest", manifest.string()}}.dump());
    REQUIRE(created.status == 201);
    return created.body.at("session").get<std::string>();
  }

  std::string ready_session() {
    const std::string id = open_session();
    REQUIRE(service.put_pdg(id, pdg_body()).status == 200);
    return id;
  }
};

json pose_body(double value, int frames = 8) {
  return {{"pose", {{"version", 1}, {"params", {{"box", value}}}}}, {"frames", frames}, {"easing", "linear"}};
}

}  // namespace

TEST_CASE("service: health, sessions and scene") {
  Fixture fx;
  CHECK(fx.service.health().body.at("status") == "ok");
  const std::string id = fx.open_session();
  CHECK(id == "s000001");
  CHECK(fx.open_session() == "s000002");

  const ApiResponse scene = fx.service.get_scene(id);
  REQUIRE(scene.status == 200);
  CHECK(scene.body.at("rows") == 64);
  CHECK(scene.body.at("cols") == 96);
  CHECK(scene.body.at("masks").contains("box"));
  CHECK(scene.body.at("image") == base64_encode(encode_png(fx.synth.scene.image)));

  CHECK(fx.service.get_scene("s999999").status == 404);
  CHECK(fx.service.put_pdg("nope", fx.pdg_body()).status == 404);
  CHECK(fx.service.put_pose("nope", "{}").status == 404);
  CHECK(fx.service.get_preview("nope", "0").status == 404);
  CHECK(fx.service.compile("nope", "").status == 404);
  CHECK(fx.service.create_session("{\"manifest\": \"/does/not/exist.json\"}").status == 400);
  CHECK(fx.service.create_session("not json").status == 400);
  CHECK(fx.service.create_session("{}").status == 400);
}

TEST_CASE("service: invalid graphs are rejected with diagnostics") {
  Fixture fx;
  const std::string id = fx.open_session();
  json doc = to_json(fx.synth.document);
  doc["edges"][0]["range"] = {1.0, -1.0};
  const ApiResponse bad = fx.service.put_pdg(id, doc.dump());
  CHECK(bad.status == 400);
  REQUIRE(bad.body.at("diagnostics").size() == 1);
  CHECK(bad.body["diagnostics"][0].at("violation") == "bad-range");
  CHECK_FALSE(fx.service.find(id)->snapshot()->pdg);
  CHECK(fx.service.put_pose(id, pose_body(0.5).dump()).status == 400);

  const ApiResponse good = fx.service.put_pdg(id, fx.pdg_body());
  CHECK(good.status == 200);
  CHECK(good.body.at("diagnostics").empty());
}

TEST_CASE("service: pose is clamped and lists preview urls") {
  Fixture fx;
  const std::string id = fx.ready_session();
  const ApiResponse r = fx.service.put_pose(id, pose_body(7.5, 4).dump());
  REQUIRE(r.status == 200);
  CHECK(r.body.at("pose").at("params").at("box") == 1.0);
  CHECK(r.body.at("frames") == 4);
  CHECK(r.body.at("previews") ==
        json{"/session/s000001/preview/0", "/session/s000001/preview/1", "/session/s000001/preview/2",
             "/session/s000001/preview/3", "/session/s000001/preview/4"});

  // a bare pose document keeps the timing
  const ApiResponse bare = fx.service.put_pose(id, json{{"version", 1}, {"params", {{"box", -0.25}}}}.dump());
  REQUIRE(bare.status == 200);
  CHECK(bare.body.at("frames") == 4);
  CHECK(bare.body.at("pose").at("params").at("box") == -0.25);

  CHECK(fx.service.put_pose(id, json{{"pose", {{"version", 1}, {"params", json::object()}}}, {"speed", 2}}.dump()).status ==
        400);
  CHECK(fx.service.put_pose(id, pose_body(0.5, 0).dump()).status == 400);
  CHECK(fx.service.get_preview(id, "5").status == 400);
  CHECK(fx.service.get_preview(id, "x").status == 400);
}

TEST_CASE("service: previews match a headless compile and are cached by pose") {
  Fixture fx;
  const std::string id = fx.ready_session();
  REQUIRE(fx.service.put_pose(id, pose_body(0.5, 8).dump()).status == 200);
  const CompileResult full = compile_motion(fx.synth.scene, fx.synth.pdg, fx.synth.target, {8, Easing::Linear});

  for (int f = 0; f <= 8; ++f) {
    const ApiResponse p = fx.service.get_preview(id, std::to_string(f));
    REQUIRE(p.status == 200);
    CHECK(p.body.at("cached") == false);
    CHECK(p.body.at("tracking") == base64_encode(encode_png(full.tracking.frames[static_cast<std::size_t>(f)])));
    CHECK(p.body.at("mask") == base64_encode(encode_mask_png(full.mask.frame(f))));
  }
  CHECK(fx.service.preview_renders() == 9);
  CHECK(fx.service.get_preview(id, "3").body.at("cached") == true);
  CHECK(fx.service.preview_renders() == 9);

  REQUIRE(fx.service.put_pose(id, pose_body(-0.5, 8).dump()).status == 200);
  CHECK(fx.service.get_preview(id, "3").body.at("cached") == false);
  CHECK(fx.service.preview_renders() == 10);
}

TEST_CASE("service: compile writes a manifest under the workdir") {
  Fixture fx;
  const std::string id = fx.ready_session();
  REQUIRE(fx.service.put_pose(id, pose_body(0.5, 4).dump()).status == 200);
  const ApiResponse r = fx.service.compile(id, "");
  REQUIRE(r.status == 200);
  const fs::path out = r.body.at("dir").get<std::string>();
  CHECK(out == fx.dir / "work" / id / "compile-1");
  CHECK(fs::exists(out / kCompileManifest));
  CHECK(r.body.at("manifest").at("frames") == 5);
  const fs::path chosen = fx.dir / "chosen";
  CHECK(fx.service.compile(id, json{{"out", chosen.string()}}.dump()).body.at("dir") == chosen.string());
  CHECK_NOTHROW(load_compile_outputs(chosen));
}

TEST_CASE("service: one writer at a time") {
  Fixture fx;
  const std::string id = fx.ready_session();
  {
    auto gate = fx.service.hold_writer(id);
    REQUIRE(gate.owns_lock());
    std::thread other([&] {
      CHECK(fx.service.put_pose(id, pose_body(0.25).dump()).status == 409);
      CHECK(fx.service.put_pdg(id, fx.pdg_body()).status == 409);
      CHECK(fx.service.get_scene(id).status == 200);
    });
    other.join();
  }
  CHECK(fx.service.put_pose(id, pose_body(0.25).dump()).status == 200);

  // racing writers: every request either lands or is refused, and the survivor is one of them
  std::vector<int> statuses(8);
  std::vector<std::thread> writers;
  for (int i = 0; i < 8; ++i)
    writers.emplace_back([&, i] { statuses[i] = fx.service.put_pose(id, pose_body(0.1 * i).dump()).status; });
  for (auto& t : writers) t.join();
  CHECK(std::count(statuses.begin(), statuses.end(), 200) >= 1);
  for (int s : statuses) CHECK((s == 200 || s == 409));
  const double final_value = fx.service.find(id)->snapshot()->pose.params.at("box");
  bool matches = false;
  for (int i = 0; i < 8; ++i) matches |= statuses[i] == 200 && std::abs(final_value - 0.1 * i) < 1e-12;
  CHECK(matches);
}

TEST_CASE("http transport round trip") {
  Fixture fx;
  HttpServer server(fx.service);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread loop([&] { server.listen(); });
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(5);

  auto health = client.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);

  auto created = client.Post("/session", json{{"manifest", fx.manifest.string()}}.dump(), "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const std::string id = json::parse(created->body).at("session");

  auto pdg = client.Put("/session/" + id + "/pdg", fx.pdg_body(), "application/json");
  REQUIRE(pdg);
  CHECK(pdg->status == 200);
  auto pose = client.Put("/session/" + id + "/pose", pose_body(0.5, 4).dump(), "application/json");
  REQUIRE(pose);
  CHECK(pose->status == 200);
  auto preview = client.Get("/session/" + id + "/preview/2");
  REQUIRE(preview);
  CHECK(preview->status == 200);
  CHECK(json::parse(preview->body).at("frame") == 2);
  CHECK(preview->get_header_value("Content-Type") == "application/json");

  auto missing = client.Get("/session/s424242/scene");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  auto unrouted = client.Get("/nothing/here");
  REQUIRE(unrouted);
  CHECK(unrouted->status == 404);

  server.stop();
  loop.join();
}
