#include <CLI11.hpp>
#include <fmt/core.h>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "panodet/detectors.hpp"
#include "panodet/evaluation.hpp"
#include "panodet/fusion.hpp"
#include "panodet/job_config.hpp"
#include "panodet/json_io.hpp"
#include "panodet/pipeline.hpp"
#include "panodet/service.hpp"

namespace fs = std::filesystem;
using namespace panodet;

namespace {

// Flag values collected by CLI11; applied over the config file afterwards.
struct Flags {
  std::string config;
  std::string image, images_dir, dataset, detections, plan, out, detector, mode, frame_id;
  double sigma = 0.0, sigma1 = 0.0, sigma2 = 0.0, nms_iou = 0.0;
  std::vector<double> iou_thr;
  int threads = 1;
  bool sweep = false;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string root;
};

struct Options {
  CLI::Option* image = nullptr;
  CLI::Option* images_dir = nullptr;
  CLI::Option* dataset = nullptr;
  CLI::Option* detections = nullptr;
  CLI::Option* plan = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* detector = nullptr;
  CLI::Option* mode = nullptr;
  CLI::Option* sigma = nullptr;
  CLI::Option* sigma1 = nullptr;
  CLI::Option* sigma2 = nullptr;
  CLI::Option* nms_iou = nullptr;
  CLI::Option* iou_thr = nullptr;
};

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

JobConfig resolve(const Flags& f, const Options& o) {
  JobConfig cfg = f.config.empty() ? JobConfig{} : read_job_config(f.config);
  if (given(o.image)) cfg.image = f.image;
  if (given(o.images_dir)) cfg.images_dir = f.images_dir;
  if (given(o.dataset)) cfg.dataset = f.dataset;
  if (given(o.detections)) cfg.detections = f.detections;
  if (given(o.plan)) cfg.plan = f.plan;
  if (given(o.out)) cfg.out = f.out;
  if (given(o.detector)) cfg.detector = f.detector;
  if (given(o.mode)) cfg.mode = parse_fusion_mode(f.mode);
  if (given(o.sigma)) cfg.realign.sigma = f.sigma;
  if (given(o.sigma1)) cfg.fusion.sigma1 = f.sigma1;
  if (given(o.sigma2)) cfg.fusion.sigma2 = f.sigma2;
  if (given(o.nms_iou)) cfg.fusion.nms_iou = f.nms_iou;
  if (given(o.iou_thr)) cfg.eval.iou_thresholds = f.iou_thr;
  cfg.validate();
  return cfg;
}

void require(const fs::path& p, const char* flag) {
  if (p.empty()) throw CLI::ValidationError(flag, "required");
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

void emit(const fs::path& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
}

EraImage load_era(const fs::path& p) {
  try {
    return EraImage(read_image(p));
  } catch (const ImageError& e) {
    throw ImageError(p.string() + ": " + e.what());
  }
}

int cmd_project(const JobConfig& cfg, int threads) {
  require(cfg.image, "--image");
  require(cfg.out, "--out");
  const EraImage era = load_era(cfg.image);
  const auto plan = cfg.window_plan();
  fs::create_directories(cfg.out);
  json manifest = plan_to_json(plan);
  manifest["source"] = cfg.image.filename().string();
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const std::string name = fmt::format("window_{}.png", k);
    RenderOptions ro;
    ro.threads = threads;
    write_file_bytes(cfg.out / name, encode_png(render_window(era, plan[k], ro).raster));
    manifest["windows"][k]["file"] = name;
  }
  write_text(cfg.out / "manifest.json", manifest.dump(2) + "\n");
  return 0;
}

DetectionFrame detect_one(const JobConfig& cfg, const std::string& id, const fs::path& image,
                          const FrameAnnotations* truth, const std::vector<WindowSpec>& plan,
                          int threads) {
  const EraImage era = load_era(image);
  auto detector = make_detector(cfg.detector, truth);
  RunOptions opts;
  opts.render.threads = threads;
  DetectionFrame frame{id, era.dims(), run_frame(era, plan, *detector, cfg.realign, opts)};
  return frame;
}

int cmd_detect(const JobConfig& cfg, const std::string& frame_id, int threads) {
  require(cfg.out, "--out");
  const auto plan = cfg.window_plan();
  DetectionSet set;
  if (!cfg.image.empty()) {
    const std::string id = frame_id.empty() ? cfg.image.stem().string() : frame_id;
    std::optional<Dataset> ds;
    const FrameAnnotations* truth = nullptr;
    if (!cfg.dataset.empty()) {
      ds = parse_dataset(cfg.dataset);
      truth = ds->find(id);
      if (truth == nullptr && cfg.detector == "oracle") throw std::runtime_error("frame '" + id + "' not in dataset");
    }
    set.frames.push_back(detect_one(cfg, id, cfg.image, truth, plan, threads));
  } else {
    require(cfg.dataset, "--dataset");
    require(cfg.images_dir, "--images-dir");
    const Dataset ds = parse_dataset(cfg.dataset);
    for (const auto& f : ds.frames) {
      set.frames.push_back(detect_one(cfg, f.id, cfg.images_dir / (f.id + ".png"), &f, plan, threads));
    }
  }
  write_detections(cfg.out, set);
  return 0;
}

DetectionSet fuse_set(const DetectionSet& in, const FusionParams& p, FusionMode mode) {
  DetectionSet out;
  for (const auto& f : in.frames) out.frames.push_back({f.id, f.dims, fuse(f.detections, p, mode, f.dims)});
  return out;
}

int cmd_fuse(const JobConfig& cfg) {
  require(cfg.detections, "--detections");
  require(cfg.out, "--out");
  write_detections(cfg.out, fuse_set(read_detections(cfg.detections), cfg.fusion, cfg.mode));
  return 0;
}

std::string sigma_label(double v) { return fmt::format("{:g}", v); }

int cmd_eval(const JobConfig& cfg, bool sweep) {
  require(cfg.dataset, "--dataset");
  require(cfg.detections, "--detections");
  const Dataset ds = parse_dataset(cfg.dataset);
  const DetectionSet dets = read_detections(cfg.detections);
  EvalConfig ec = cfg.eval;
  if (ec.classes.empty()) ec.classes = ds.classes;

  std::vector<NamedReports> rows;
  if (sweep) {
    const double grid[] = {0.3, 0.6, 0.9};
    for (double s1 : grid) {
      for (double s2 : grid) {
        FusionParams p = cfg.fusion;
        p.sigma1 = s1;
        p.sigma2 = s2;
        rows.push_back({fmt::format("soft s1={} s2={}", sigma_label(s1), sigma_label(s2)),
                        evaluate(ds, fuse_set(dets, p, FusionMode::soft), ec)});
      }
    }
    rows.push_back({"nms", evaluate(ds, fuse_set(dets, cfg.fusion, FusionMode::nms), ec)});
  } else {
    rows.push_back({"detections", evaluate(ds, dets, ec)});
  }

  for (const auto& w : rows.front().reports.front().warnings) std::cerr << "warning: " << w << "\n";
  std::cout << report_table(rows);
  if (!cfg.out.empty()) {
    std::string csv;
    for (const auto& r : rows) {
      if (sweep) csv += "# " + r.name + "\n";
      csv += report_csv(r.reports);
    }
    write_text(cfg.out, csv);
  }
  return 0;
}

int cmd_convert(const JobConfig& cfg) {
  require(cfg.dataset, "--dataset");
  Dataset ds = parse_dataset(cfg.dataset);
  for (auto& f : ds.frames) {
    for (auto& gt : f.objects) {
      if (gt.is_bfov()) gt.shape = bfov_to_erabox(std::get<Bfov>(gt.shape), f.dims);
    }
  }
  emit(cfg.out, write_dataset_text(ds));
  return 0;
}

HttpService* g_service = nullptr;

void on_signal(int) {
  if (g_service != nullptr) g_service->stop();
}

int cmd_serve(const Flags& f) {
  if (f.root.empty() || !fs::is_directory(f.root)) throw std::runtime_error("--root must be a directory");
  HttpService svc(f.root);
  g_service = &svc;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << fmt::format("serving {} on {}:{}\n", f.root, f.host, f.port);
  svc.listen(f.host, f.port);
  g_service = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object detection on equirectangular panoramas"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub, Options& o) {
    sub->add_option("--config", f.config, "JSON job config; flags override it")->check(CLI::ExistingFile);
    o.out = sub->add_option("--out", f.out, "Output path");
  };
  auto plan_opts = [&](CLI::App* sub, Options& o) {
    o.plan = sub->add_option("--plan", f.plan, "Window plan JSON (default: four 180 degree windows)");
    sub->add_option("--threads", f.threads, "Rendering threads")->check(CLI::PositiveNumber);
  };
  auto fusion_opts = [&](CLI::App* sub, Options& o) {
    o.mode = sub->add_option("--mode", f.mode, "soft or nms")->check(CLI::IsMember({"soft", "nms"}));
    o.sigma1 = sub->add_option("--sigma1", f.sigma1, "Overlap penalty");
    o.sigma2 = sub->add_option("--sigma2", f.sigma2, "Center-distance penalty");
    o.nms_iou = sub->add_option("--nms-iou", f.nms_iou, "NMS IoU threshold");
  };

  Options project_o, detect_o, fuse_o, eval_o, convert_o;

  auto* project = app.add_subcommand("project", "Render window views of a frame");
  common(project, project_o);
  plan_opts(project, project_o);
  project_o.image = project->add_option("--image", f.image, "Equirectangular frame");

  auto* detect = app.add_subcommand("detect", "Detect in every window and map boxes back");
  common(detect, detect_o);
  plan_opts(detect, detect_o);
  detect_o.image = detect->add_option("--image", f.image, "Single frame");
  detect->add_option("--frame-id", f.frame_id, "Frame id for --image (default: file stem)");
  detect_o.images_dir = detect->add_option("--images-dir", f.images_dir, "Directory of <id>.png frames");
  detect_o.dataset = detect->add_option("--dataset", f.dataset, "Annotations (frame list, oracle truth)");
  detect_o.detector = detect->add_option("--detector", f.detector, "stub[:file] | oracle | exec:<program>");
  detect_o.sigma = detect->add_option("--sigma", f.sigma, "Realignment sigma");

  auto* fuse_cmd = app.add_subcommand("fuse", "Merge per-window detections");
  common(fuse_cmd, fuse_o);
  fuse_o.detections = fuse_cmd->add_option("--detections", f.detections, "Raw detections JSON");
  fusion_opts(fuse_cmd, fuse_o);

  auto* eval = app.add_subcommand("eval", "Per-class AP and mAP");
  common(eval, eval_o);
  eval_o.dataset = eval->add_option("--dataset", f.dataset, "Ground-truth annotations");
  eval_o.detections = eval->add_option("--detections", f.detections, "Detections JSON");
  eval_o.iou_thr = eval->add_option("--iou-thr", f.iou_thr, "IoU thresholds");
  fusion_opts(eval, eval_o);
  eval->add_flag("--sweep", f.sweep, "Fuse raw detections over the sigma1 x sigma2 grid plus NMS");

  auto* convert = app.add_subcommand("convert", "Rewrite BFOV annotations as boxes");
  common(convert, convert_o);
  convert_o.dataset = convert->add_option("--dataset", f.dataset, "Annotations JSON");

  auto* serve = app.add_subcommand("serve", "HTTP service for the annotation tool");
  serve->add_option("--root", f.root, "Dataset root")->required();
  serve->add_option("--host", f.host, "Bind address");
  serve->add_option("--port", f.port, "Port");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*project) return cmd_project(resolve(f, project_o), f.threads);
    if (*detect) return cmd_detect(resolve(f, detect_o), f.frame_id, f.threads);
    if (*fuse_cmd) return cmd_fuse(resolve(f, fuse_o));
    if (*eval) return cmd_eval(resolve(f, eval_o), f.sweep);
    if (*convert) return cmd_convert(resolve(f, convert_o));
    if (*serve) return cmd_serve(f);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.get_name() << " " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
