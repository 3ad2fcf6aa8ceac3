#include "pdgstudio/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <ostream>

#include "pdgstudio/bundle.hpp"
#include "pdgstudio/document.hpp"
#include "pdgstudio/image_io.hpp"
#include "pdgstudio/metrics.hpp"
#include "pdgstudio/pipeline.hpp"
#include "pdgstudio/service.hpp"
#include "pdgstudio/synth.hpp"

namespace pdg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string pdg_path;
  std::string scene;
  std::string pose;
  std::string compile_dir;
  std::string edited;
  std::string prompt;
  std::string new_prompt;
  std::string video;
  std::string reference;
  std::string sample_id;
  std::string spec;
  std::string out;
  std::string bind = "127.0.0.1:8080";
  std::string workdir;
  std::string easing = "linear";
  int frames = kDefaultFrames;
  int steps = kDefaultSteps;
  int replace = kDefaultReplace;
  double tau = kDefaultTau;
  bool timestamp = false;
};

int cmd_validate(const Options& o, std::ostream& out) {
  const PdgDocument doc = load_pdg_document(o.pdg_path);
  std::optional<Scene> scene;
  if (!o.scene.empty()) scene = load_scene(o.scene);
  const Pdg pdg = assemble_pdg(doc, fs::path(o.pdg_path).parent_path(), scene ? &*scene : nullptr);
  const auto diagnostics = validate_pdg(pdg);
  for (const auto& d : diagnostics) out << to_string(d.violation) << ": " << d.subject << ": " << d.message << "\n";
  if (!diagnostics.empty()) return kExitValidation;
  out << "ok: " << pdg.nodes.size() << " nodes, " << pdg.edges.size() << " edges\n";
  return kExitOk;
}

int cmd_compile(const Options& o, std::ostream& out) {
  const Scene scene = load_scene(o.scene);
  const PdgDocument doc = load_pdg_document(o.pdg_path);
  const Pdg pdg = assemble_pdg(doc, fs::path(o.pdg_path).parent_path(), &scene);
  const Pose target = o.pose.empty() ? Pose{} : load_pose(o.pose);
  const CompileOptions options{o.frames, easing_from_string(o.easing)};
  const CompileResult result = compile_motion(scene, pdg, target, options);
  write_compile_outputs(o.out, scene, result, options);
  out << "compiled " << options.frames + 1 << " frames into " << o.out << "\n";
  return kExitOk;
}

int cmd_bundle(const Options& o, std::ostream& out) {
  const CompiledArtifacts compiled = load_compile_outputs(o.compile_dir);
  if (!fs::is_regular_file(o.edited)) throw IoError("missing edited frame " + o.edited);
  BundleRequest request;
  request.input = compiled.input;
  request.tracking = compiled.tracking;
  request.mask = compiled.mask;
  request.edited = read_rgb_png(o.edited);
  request.prompts = {o.prompt, o.new_prompt};
  request.steps = o.steps;
  request.replace = o.replace;
  request.timestamp = o.timestamp;
  const ReferenceEncoder encoder;
  const ConditioningBundle bundle = export_bundle(request, encoder, o.out);
  out << "bundle written to " << o.out << " (N=" << bundle.steps << ", M=" << bundle.replace << ")\n";
  return kExitOk;
}

std::vector<Image> read_video(const fs::path& path) {
  if (fs::is_regular_file(path)) return tensor_to_video(read_tensor(path));
  if (!fs::is_directory(path)) throw IoError("missing video " + path.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path))
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no PNG frames in " + path.string());
  std::vector<Image> frames;
  frames.reserve(files.size());
  for (const auto& f : files) frames.push_back(read_rgb_png(f));
  return frames;
}

void check_video(const std::vector<Image>& video, const char* what, std::size_t frames, int rows, int cols) {
  if (video.size() != frames)
    throw ShapeError(std::string("frame count mismatch: ") + what + " has " + std::to_string(video.size()) +
                     " frames, compile has " + std::to_string(frames));
  for (std::size_t t = 0; t < video.size(); ++t)
    if (video[t].rows() != rows || video[t].cols() != cols)
      throw ShapeError(std::string(what) + " frame " + std::to_string(t) + " is " + std::to_string(video[t].cols()) +
                       "x" + std::to_string(video[t].rows()) + ", expected " + std::to_string(cols) + "x" +
                       std::to_string(rows));
}

int cmd_metrics(const Options& o, std::ostream& out) {
  const CompiledArtifacts compiled = load_compile_outputs(o.compile_dir);
  const int rows = static_cast<int>(compiled.tracking.rows());
  const int cols = static_cast<int>(compiled.tracking.cols());
  const std::size_t frames = compiled.tracking.frames();
  const std::vector<Image> video = read_video(o.video);
  check_video(video, "candidate", frames, rows, cols);
  if (!fs::is_regular_file(o.edited)) throw IoError("missing edited frame " + o.edited);
  const Image edited = read_rgb_png(o.edited);
  if (edited.rows() != rows || edited.cols() != cols) throw ShapeError("edited frame does not match the compile size");

  MetricReport report;
  report.sample_id = o.sample_id.empty() ? fs::path(o.video).stem().string() : o.sample_id;
  report.frames = static_cast<int>(frames);
  report.rows = rows;
  report.cols = cols;
  report.tau = o.tau;
  report.optflow = optflow_score(video, compiled.flows, o.tau).score;
  report.idiff = idiff(video.back(), edited);
  const MaskedValue masked = idiff_masked(video.back(), edited, compiled.mask.frame(compiled.mask.frames - 1));
  report.idiff_m = masked.value;
  report.empty_mask = masked.empty_mask;
  if (o.reference.empty()) {
    report.psnr = psnr(video.back(), edited);
    report.ssim = ssim(video.back(), edited);
  } else {
    const std::vector<Image> reference = read_video(o.reference);
    check_video(reference, "reference", frames, rows, cols);
    for (std::size_t t = 0; t < frames; ++t) {
      report.psnr += psnr(video[t], reference[t]);
      report.ssim += ssim(video[t], reference[t]);
    }
    report.psnr /= static_cast<double>(frames);
    report.ssim /= static_cast<double>(frames);
  }
  fs::create_directories(o.out);
  write_text_file(fs::path(o.out) / (report.sample_id + ".json"), to_json(report).dump(2) + "\n");
  write_text_file(fs::path(o.out) / "metrics.csv", metrics_csv({report}));
  out << to_json(report).dump() << "\n";
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  json j;
  try {
    j = json::parse(read_text_file(o.spec));
  } catch (const json::parse_error& e) {
    throw IoError("cannot parse " + o.spec + ": " + e.what());
  }
  const SynthResult result = synth_scene(parse_synth_spec(j));
  out << write_synth(result, o.out).string() << "\n";
  return kExitOk;
}

int cmd_serve(const Options& o, std::ostream& out, std::ostream& err) {
  const auto colon = o.bind.rfind(':');
  if (colon == std::string::npos) throw ArgumentError("--bind expects host:port, got '" + o.bind + "'");
  const std::string host = o.bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(o.bind.substr(colon + 1));
  } catch (const std::exception&) {
    throw ArgumentError("bad port in --bind '" + o.bind + "'");
  }
  const fs::path workdir = o.workdir.empty() ? fs::temp_directory_path() / "pdgstudio" : fs::path(o.workdir);
  StudioService service(workdir);
  HttpServer server(service);
  const int bound = server.bind(host, port);
  if (bound < 0) {
    err << "error: cannot bind " << o.bind << "\n";
    return kExitIo;
  }
  out << "listening on http://" << host << ":" << bound << std::endl;
  return server.listen() ? kExitOk : kExitIo;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Part-aware depth-graph motion editing pipeline", "pdgstudio"};
  app.require_subcommand(1);
  Options o;

  auto* validate = app.add_subcommand("validate", "check a graph document");
  validate->add_option("pdg", o.pdg_path, "graph document")->required();
  validate->add_option("--scene", o.scene, "scene manifest; lifts real geometry");

  auto* compile = app.add_subcommand("compile", "render tracking video, disocclusion masks and flows");
  compile->add_option("--scene", o.scene, "scene manifest")->required();
  compile->add_option("--pdg", o.pdg_path, "graph document")->required();
  compile->add_option("--pose", o.pose, "target pose document (rest pose when omitted)");
  compile->add_option("--frames", o.frames, "T; the video has T + 1 frames")->capture_default_str();
  compile->add_option("--easing", o.easing, "linear or smoothstep")->capture_default_str();
  compile->add_option("--out", o.out, "output directory")->required();

  auto* bundle = app.add_subcommand("bundle", "encode and composite latents for the generator");
  bundle->add_option("--compile", o.compile_dir, "compile output directory")->required();
  bundle->add_option("--edited", o.edited, "user-edited last frame (PNG)")->required();
  bundle->add_option("--prompt", o.prompt, "source prompt");
  bundle->add_option("--new-prompt", o.new_prompt, "prompt for the painted content");
  bundle->add_option("--steps", o.steps, "N, denoising steps")->capture_default_str();
  bundle->add_option("--replace", o.replace, "M, steps conditioned on the composite")->capture_default_str();
  bundle->add_flag("--timestamp", o.timestamp, "record created_at in bundle.json");
  bundle->add_option("--out", o.out, "output directory")->required();

  auto* metrics = app.add_subcommand("metrics", "score a generated video");
  metrics->add_option("--video", o.video, "candidate frames (PNG directory or .pdgt)")->required();
  metrics->add_option("--compile", o.compile_dir, "compile output directory")->required();
  metrics->add_option("--edited", o.edited, "user-edited last frame (PNG)")->required();
  metrics->add_option("--reference", o.reference, "reference video for PSNR/SSIM");
  metrics->add_option("--tau", o.tau, "minimum reference flow magnitude (px)")->capture_default_str();
  metrics->add_option("--id", o.sample_id, "sample id (default: video file stem)");
  metrics->add_option("--out", o.out, "output directory")->required();

  auto* synth = app.add_subcommand("synth", "generate a synthetic scene, graph and pose");
  synth->add_option("spec", o.spec, "synthetic scene description (JSON)")->required();
  synth->add_option("--out", o.out, "output directory")->required();

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  serve->add_option("--bind", o.bind, "host:port")->capture_default_str();
  serve->add_option("--workdir", o.workdir, "directory for compile outputs");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (*validate) return cmd_validate(o, out);
    if (*compile) return cmd_compile(o, out);
    if (*bundle) return cmd_bundle(o, out);
    if (*metrics) return cmd_metrics(o, out);
    if (*synth) return cmd_synth(o, out);
    if (*serve) return cmd_serve(o, out, err);
  } catch (const InvalidGraphError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.category() == ErrorCategory::Io ? kExitIo : kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitValidation;
}

}  // namespace pdg
