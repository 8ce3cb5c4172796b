// airway: command-line front end for the airway segmentation library.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "airway/metaimage.hpp"
#include "airway/pipeline.hpp"
#include "airway/postproc.hpp"

namespace {

using namespace airway;

std::vector<double> parse_list(const std::string& text, const char* what, std::size_t want = 0) {
  auto v = parse_double_list(text, what);
  if (want && v.size() != want) {
    throw ValidationError(std::string(what) + ": expected " + std::to_string(want) + " values");
  }
  return v;
}

void write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << text;
  if (!out) throw IoError(path + ": write failed");
}

struct SynthArgs {
  std::string kind = "bifurcation", profile = "hard", polarity = "dark";
  double radius = 3.0, noise = 0.0, contrast = 1000.0, background = 0.0;
  std::string dims = "32,32,32", spacing = "1,1,1";
  std::uint64_t seed = 0;
  std::string out, mask, centerline;
};

int run_synth(const SynthArgs& a) {
  PhantomSpec s;
  s.kind = parse_phantom_kind(a.kind);
  s.profile = parse_profile(a.profile);
  s.polarity = parse_phantom_polarity(a.polarity);
  s.radius = a.radius;
  s.noise_sigma = a.noise;
  s.contrast = a.contrast;
  s.background = a.background;
  const auto d = parse_list(a.dims, "--dims", 3);
  for (double x : d) {
    if (!(x >= 1) || x != static_cast<double>(static_cast<std::size_t>(x))) {
      throw ValidationError("--dims: expected positive integers");
    }
  }
  s.grid.dims = {static_cast<std::size_t>(d[0]), static_cast<std::size_t>(d[1]),
                 static_cast<std::size_t>(d[2])};
  const auto sp = parse_list(a.spacing, "--spacing", 3);
  s.grid.spacing = {sp[0], sp[1], sp[2]};
  const auto ph = make_phantom(s, a.seed);
  write_mha(ph.image, a.out);
  if (!a.mask.empty()) write_mha(ph.mask, a.mask);
  if (!a.centerline.empty()) {
    std::vector<CenterlineVoxel> cl;
    for (const auto& p : phantom_centerline(s)) cl.push_back({p.voxel, p.branch});
    write_centerline(CenterlineRef(s.grid, cl), a.centerline);
  }
  return kExitOk;
}

struct FrangiArgs {
  std::string in, out, scales = "0.5,1,2,3,4", c = "auto", polarity = "dark";
  double alpha = 0.5, beta = 0.5, gamma = 1.0;
  bool normalize = false;
  std::string window = "-1000,600";
};

int run_frangi(const FrangiArgs& a) {
  VesselnessParams p;
  p.scales = parse_list(a.scales, "--scales");
  p.alpha = a.alpha;
  p.beta = a.beta;
  if (a.c != "auto") p.c = parse_list(a.c, "--c", 1)[0];
  p.polarity = parse_polarity(a.polarity);
  p.gamma = a.gamma;
  p.validate();
  const auto vol = read_mha(a.in);
  if (a.normalize) {
    const auto w = parse_list(a.window, "--window", 2);
    write_mha(vesselness_prior(vol, p, w[0], w[1]), a.out);
  } else {
    write_mha(frangi(vol, p), a.out);
  }
  return kExitOk;
}

struct TrainArgs {
  std::string config, out, loss_log;
};

int run_train(const TrainArgs& a) {
  auto cfg = TrainingConfig::from_config(KeyValueConfig::load(a.config));
  std::ofstream log;
  if (!a.loss_log.empty()) {
    log.open(a.loss_log, std::ios::trunc);
    if (!log) throw IoError(a.loss_log + ": cannot open for writing");
  }
  cfg.options.on_step = [&](std::size_t step, double loss) {
    if (log.is_open()) log << step << ' ' << loss << '\n';
  };
  const auto r = run_training(cfg);
  nn::save_params(r.params, a.out);
  if (!r.loss_history.empty()) {
    std::printf("steps = %zu\nfinal_loss = %.17g\n", r.loss_history.size(), r.loss_history.back());
  }
  return kExitOk;
}

struct InferArgs {
  std::string params, ct, vessel, out, window = "-1000,600";
  double threshold = 0.5;
};

int run_infer(const InferArgs& a) {
  const auto params = nn::load_params(a.params);
  const auto ct = read_mha(a.ct);
  const auto vessel = read_mha(a.vessel);
  const auto w = parse_list(a.window, "--window", 2);
  write_mha(nn::infer(params, ct, vessel, a.threshold, w[0], w[1]), a.out);
  return kExitOk;
}

struct PostArgs {
  std::string in, out, seed;
  bool strict = false;
};

int run_postprocess(const PostArgs& a) {
  const auto mask = read_mha(a.in);
  require_binary(mask, "postprocess input");
  if (mask.count_nonzero() == 0 && a.strict) {
    throw EmptyMaskError(a.in + ": mask is empty (strict mode)");
  }
  if (a.seed.empty()) {
    write_mha(postprocess(mask), a.out);
  } else {
    const auto s = parse_list(a.seed, "--seed", 3);
    const Index3 seed{static_cast<std::int64_t>(s[0]), static_cast<std::int64_t>(s[1]),
                      static_cast<std::int64_t>(s[2])};
    write_mha(postprocess(mask, seed), a.out);
  }
  return kExitOk;
}

struct EvalArgs {
  std::string pred, truth, centerline, report;
  double branch_frac = 0.8;
};

int run_evaluate(const EvalArgs& a) {
  const auto pred = read_mha(a.pred);
  const auto truth = read_mha(a.truth);
  std::optional<CenterlineRef> ref;
  if (!a.centerline.empty()) ref = read_centerline(a.centerline, truth.grid());
  write_text(evaluate(pred, truth, ref, a.branch_frac).to_text(), a.report);
  return kExitOk;
}

struct PipelineArgs {
  std::string config;
  bool dry_run = false;
};

int run_pipeline_cmd(const PipelineArgs& a) {
  const auto cfg = PipelineConfig::from_config(KeyValueConfig::load(a.config));
  if (a.dry_run) {
    for (const auto& line : pipeline_plan(cfg)) std::cout << line << '\n';
    return kExitOk;
  }
  const auto r = run_pipeline(cfg);
  std::cout << pipeline_report_text(r);
  return kExitOk;
}

struct SplitArgs {
  std::string ids, list, out;
  double ratio = 0.9;
  std::uint64_t seed = 0;
};

int run_split(const SplitArgs& a) {
  std::vector<std::string> ids;
  if (!a.list.empty()) {
    std::ifstream in(a.list);
    if (!in) throw IoError(a.list + ": cannot open for reading");
    for (std::string line; std::getline(in, line);) {
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos || line[b] == '#') continue;
      const auto e = line.find_last_not_of(" \t\r");
      ids.push_back(line.substr(b, e - b + 1));
    }
  }
  if (!a.ids.empty()) {
    std::size_t start = 0;
    while (start <= a.ids.size()) {
      const auto comma = std::min(a.ids.find(',', start), a.ids.size());
      auto item = a.ids.substr(start, comma - start);
      if (item.empty()) throw ValidationError("--ids: empty entry");
      ids.push_back(std::move(item));
      start = comma + 1;
    }
  }
  const auto s = split_dataset(ids, a.ratio, a.seed);
  std::string text;
  for (const auto& id : s.train) text += "train " + id + "\n";
  for (const auto& id : s.test) text += "test " + id + "\n";
  write_text(text, a.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Airway tree segmentation: vesselness prior, dual-channel UNet 3+, "
               "region-growing post-processing and evaluation"};
  app.set_version_flag("--version", std::string(nn::kParamsFormatVersion),
                       "Print the params-file format version and exit");
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic phantom and its mask");
  c_synth->add_option("--kind", synth.kind, "straight-tube|bent-tube|bifurcation|blob|plate")
      ->capture_default_str();
  c_synth->add_option("--radius", synth.radius, "Radius or plate half thickness, mm")
      ->capture_default_str();
  c_synth->add_option("--profile", synth.profile, "hard|gaussian")->capture_default_str();
  c_synth->add_option("--polarity", synth.polarity, "bright|dark")->capture_default_str();
  c_synth->add_option("--noise", synth.noise, "Gaussian noise sigma")->capture_default_str();
  c_synth->add_option("--contrast", synth.contrast)->capture_default_str();
  c_synth->add_option("--background", synth.background)->capture_default_str();
  c_synth->add_option("--dims", synth.dims, "nx,ny,nz")->capture_default_str();
  c_synth->add_option("--spacing", synth.spacing, "sx,sy,sz in mm")->capture_default_str();
  c_synth->add_option("--seed", synth.seed, "Noise seed")->capture_default_str();
  c_synth->add_option("--out", synth.out, "Image output (.mha/.mhd)")->required();
  c_synth->add_option("--mask", synth.mask, "Mask output");
  c_synth->add_option("--centerline", synth.centerline, "Centerline output (tube kinds)");

  FrangiArgs fr;
  auto* c_frangi = app.add_subcommand("frangi", "Multiscale vesselness filter");
  c_frangi->add_option("--in", fr.in)->required();
  c_frangi->add_option("--out", fr.out)->required();
  c_frangi->add_option("--scales", fr.scales, "Comma-separated sigmas in mm")->capture_default_str();
  c_frangi->add_option("--alpha", fr.alpha)->capture_default_str();
  c_frangi->add_option("--beta", fr.beta)->capture_default_str();
  c_frangi->add_option("--c", fr.c, "auto or a positive value")->capture_default_str();
  c_frangi->add_option("--polarity", fr.polarity, "dark|bright")->capture_default_str();
  c_frangi->add_option("--gamma", fr.gamma)->capture_default_str();
  c_frangi->add_flag("--normalize", fr.normalize, "Apply the CT window before filtering");
  c_frangi->add_option("--window", fr.window, "lo,hi in HU")->capture_default_str();

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train the network from a key=value config");
  c_train->add_option("--config", tr.config)->required()->check(CLI::ExistingFile);
  c_train->add_option("--out", tr.out, "Params file")->required();
  c_train->add_option("--loss-log", tr.loss_log, "Per-step loss output");

  InferArgs inf;
  auto* c_infer = app.add_subcommand("infer", "Predict a binary mask");
  c_infer->add_option("--params", inf.params)->required();
  c_infer->add_option("--ct", inf.ct)->required();
  c_infer->add_option("--vessel", inf.vessel)->required();
  c_infer->add_option("--out", inf.out)->required();
  c_infer->add_option("--threshold", inf.threshold)->capture_default_str();
  c_infer->add_option("--window", inf.window, "lo,hi in HU")->capture_default_str();

  PostArgs post;
  auto* c_post = app.add_subcommand("postprocess", "Seeded region growing and largest component");
  c_post->add_option("--in", post.in)->required();
  c_post->add_option("--out", post.out)->required();
  c_post->add_option("--seed", post.seed, "x,y,z voxel index overriding the automatic seed");
  c_post->add_flag("--strict", post.strict, "Fail with exit code 5 on an empty mask");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Dice, tree and branch detected rates");
  c_eval->add_option("--pred", ev.pred)->required();
  c_eval->add_option("--truth", ev.truth)->required();
  c_eval->add_option("--centerline", ev.centerline, "Lines 'ix iy iz branch_id'");
  c_eval->add_option("--branch-frac", ev.branch_frac)->capture_default_str();
  c_eval->add_option("--report", ev.report, "Report path, '-' for stdout")->capture_default_str();

  PipelineArgs pl;
  auto* c_pipe = app.add_subcommand("pipeline", "frangi -> infer -> postprocess -> evaluate");
  c_pipe->add_option("--config", pl.config)->required()->check(CLI::ExistingFile);
  c_pipe->add_flag("--dry-run", pl.dry_run, "List the file plan without running");

  SplitArgs sp;
  auto* c_split = app.add_subcommand("split", "Deterministic train/test split of case ids");
  c_split->add_option("--ids", sp.ids, "Comma-separated ids");
  c_split->add_option("--list", sp.list, "File with one id per line");
  c_split->add_option("--ratio", sp.ratio)->capture_default_str();
  c_split->add_option("--seed", sp.seed)->capture_default_str();
  c_split->add_option("--out", sp.out, "Output path, '-' for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*c_synth) return run_synth(synth);
    if (*c_frangi) return run_frangi(fr);
    if (*c_train) return run_train(tr);
    if (*c_infer) return run_infer(inf);
    if (*c_post) return run_postprocess(post);
    if (*c_eval) return run_evaluate(ev);
    if (*c_pipe) return run_pipeline_cmd(pl);
    if (*c_split) return run_split(sp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitFailure;
}
