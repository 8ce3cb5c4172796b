#include "airway/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "airway/metaimage.hpp"
#include "airway/postproc.hpp"

namespace airway {

int exit_code_for(const std::exception& e) {
  if (const auto* s = dynamic_cast<const StageError*>(&e)) return s->exit_code();
  if (dynamic_cast<const EmptyMaskError*>(&e)) return kExitEmptyMask;
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const ValidationError*>(&e)) return kExitValidation;
  return kExitFailure;
}

StageError::StageError(std::string stage, const std::exception& cause)
    : Error("stage '" + stage + "' failed: " + cause.what()),
      stage_(std::move(stage)),
      exit_code_(exit_code_for(cause)) {}

VesselnessParams vesselness_from_config(const KeyValueConfig& cfg) {
  VesselnessParams p;
  p.scales = cfg.get_double_list("vesselness.scales", p.scales);
  p.alpha = cfg.get_double("vesselness.alpha", p.alpha);
  p.beta = cfg.get_double("vesselness.beta", p.beta);
  if (const auto c = cfg.get("vesselness.c"); c && *c != "auto") {
    p.c = parse_double_list(*c, "vesselness.c").at(0);
  }
  p.polarity = parse_polarity(cfg.get_or("vesselness.polarity", "dark"));
  p.gamma = cfg.get_double("vesselness.gamma", p.gamma);
  p.validate();
  return p;
}

nn::NetSpec net_spec_from_config(const KeyValueConfig& cfg) {
  nn::NetSpec s;
  s.levels = static_cast<int>(cfg.get_int("net.levels", s.levels));
  s.base_channels = static_cast<int>(cfg.get_int("net.base_channels", s.base_channels));
  s.skip_channels = static_cast<int>(cfg.get_int("net.skip_channels", s.skip_channels));
  s.validate();
  return s;
}

namespace {

Dims3 dims_from(const std::vector<double>& v, const char* key) {
  if (v.size() != 3) throw ValidationError(std::string(key) + ": expected three values");
  Dims3 d{};
  for (int a = 0; a < 3; ++a) {
    if (!(v[a] >= 1.0) || v[a] != std::floor(v[a])) {
      throw ValidationError(std::string(key) + ": dims must be positive integers");
    }
    d[a] = static_cast<std::size_t>(v[a]);
  }
  return d;
}

Vec3 vec_from(const std::vector<double>& v, const char* key) {
  if (v.size() != 3) throw ValidationError(std::string(key) + ": expected three values");
  return {v[0], v[1], v[2]};
}

}  // namespace

PhantomSpec phantom_from_config(const KeyValueConfig& cfg) {
  PhantomSpec s;
  s.kind = parse_phantom_kind(cfg.get_or("phantom.kind", "bifurcation"));
  s.radius = cfg.get_double("phantom.radius", 3.0);
  s.profile = parse_profile(cfg.get_or("phantom.profile", "hard"));
  s.polarity = parse_phantom_polarity(cfg.get_or("phantom.polarity", "dark"));
  s.noise_sigma = cfg.get_double("phantom.noise", 0.0);
  s.contrast = cfg.get_double("phantom.contrast", 1000.0);
  s.background = cfg.get_double("phantom.background", 0.0);
  s.grid.dims = dims_from(cfg.get_double_list("phantom.dims", {32, 32, 32}), "phantom.dims");
  s.grid.spacing = vec_from(cfg.get_double_list("phantom.spacing", {1, 1, 1}), "phantom.spacing");
  s.validate();
  return s;
}

Volume3 vesselness_prior(const Volume3& ct, const VesselnessParams& p, double window_lo,
                         double window_hi) {
  return frangi(normalize_ct(ct, window_lo, window_hi), p);
}

PipelineConfig PipelineConfig::from_config(const KeyValueConfig& cfg) {
  PipelineConfig c;
  auto required = [&](const std::string& key) {
    const auto v = cfg.get(key);
    if (!v || v->empty()) throw ValidationError("pipeline config: missing " + key);
    return std::filesystem::path(*v);
  };
  auto optional = [&](const std::string& key) -> std::optional<std::filesystem::path> {
    const auto v = cfg.get(key);
    if (!v || v->empty()) return std::nullopt;
    return std::filesystem::path(*v);
  };
  c.ct = required("paths.ct");
  c.vessel = optional("paths.vessel");
  c.truth = optional("paths.truth");
  c.centerline = optional("paths.centerline");
  c.params = required("paths.params");
  c.out_dir = required("paths.out_dir");
  c.vesselness = vesselness_from_config(cfg);
  c.window_lo = cfg.get_double("normalize.lo", c.window_lo);
  c.window_hi = cfg.get_double("normalize.hi", c.window_hi);
  c.threshold = cfg.get_double("infer.threshold", c.threshold);
  c.branch_frac = cfg.get_double("metrics.branch_frac", c.branch_frac);
  c.seed = static_cast<std::uint64_t>(cfg.get_int("run.seed", 0));
  c.strict = cfg.get_bool("run.strict", false);
  cfg.reject_unused();
  return c;
}

void PipelineConfig::validate() const {
  auto must_exist = [](const std::filesystem::path& p, const char* what) {
    if (!std::filesystem::exists(p)) {
      throw ValidationError(std::string("pipeline config: ") + what + " '" + p.string() +
                            "' does not exist");
    }
  };
  must_exist(ct, "ct");
  if (vessel) must_exist(*vessel, "vessel");
  if (truth) must_exist(*truth, "truth");
  if (centerline) {
    must_exist(*centerline, "centerline");
    if (!truth) throw ValidationError("pipeline config: a centerline requires paths.truth");
  }
  must_exist(params, "params");
  if (!(window_lo < window_hi)) throw ValidationError("pipeline config: normalize.lo >= normalize.hi");
  if (!(branch_frac > 0.0 && branch_frac <= 1.0)) {
    throw ValidationError("pipeline config: metrics.branch_frac must be in (0, 1]");
  }
  vesselness.validate();
  if (std::filesystem::exists(out_dir) && !std::filesystem::is_directory(out_dir)) {
    throw ValidationError("pipeline config: out_dir '" + out_dir.string() + "' is not a directory");
  }
}

PipelineOutputs pipeline_outputs(const PipelineConfig& cfg) {
  return {cfg.out_dir / "vessel.mha", cfg.out_dir / "pred.mha", cfg.out_dir / "final.mha",
          cfg.out_dir / "report.txt"};
}

std::vector<std::string> pipeline_plan(const PipelineConfig& cfg) {
  std::vector<std::string> plan;
  plan.push_back("read " + cfg.ct.string());
  if (cfg.vessel) plan.push_back("read " + cfg.vessel->string());
  plan.push_back("read " + cfg.params.string());
  if (cfg.truth) plan.push_back("read " + cfg.truth->string());
  if (cfg.centerline) plan.push_back("read " + cfg.centerline->string());
  const auto out = pipeline_outputs(cfg);
  for (const auto* p : {&out.vessel, &out.pred, &out.final_mask, &out.report}) {
    plan.push_back("write " + p->string());
  }
  return plan;
}

std::string pipeline_report_text(const PipelineResult& r) {
  std::string text = "predicted_voxels = " + std::to_string(r.predicted_voxels) + "\n" +
                     "final_voxels = " + std::to_string(r.final_voxels) + "\n";
  if (r.report) {
    text += r.report->to_text();
  } else {
    text += "dice = absent\n";
  }
  return text;
}

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e);
  }
}

std::filesystem::path partial(const std::filesystem::path& p) {
  auto q = p;
  q += ".partial";
  return q;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  stage("validate", [&] {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    return 0;
  });
  PipelineResult result;
  result.outputs = pipeline_outputs(cfg);
  const auto& out = result.outputs;

  const auto ct = stage("read", [&] { return read_mha(cfg.ct); });
  const auto params = stage("read", [&] { return nn::load_params(cfg.params); });

  const auto vessel = stage("frangi", [&] {
    auto v = cfg.vessel ? read_mha(*cfg.vessel)
                        : vesselness_prior(ct, cfg.vesselness, cfg.window_lo, cfg.window_hi);
    write_mha(v, partial(out.vessel));
    return v;
  });

  const auto pred = stage("infer", [&] {
    auto m = nn::infer(params, ct, vessel, cfg.threshold, cfg.window_lo, cfg.window_hi);
    write_mha(m, partial(out.pred));
    return m;
  });
  result.predicted_voxels = pred.count_nonzero();

  const auto final_mask = stage("postprocess", [&] {
    if (cfg.strict && result.predicted_voxels == 0) {
      throw EmptyMaskError("prediction is empty (strict mode)");
    }
    auto m = postprocess(pred);
    write_mha(m, partial(out.final_mask));
    return m;
  });
  result.final_voxels = final_mask.count_nonzero();

  stage("evaluate", [&] {
    if (cfg.truth) {
      const auto truth = read_mha(*cfg.truth);
      std::optional<CenterlineRef> ref;
      if (cfg.centerline) ref = read_centerline(*cfg.centerline, truth.grid());
      result.report = evaluate(final_mask, truth, ref, cfg.branch_frac);
    }
    std::ofstream rep(partial(out.report), std::ios::trunc);
    if (!rep) throw IoError(partial(out.report).string() + ": cannot open for writing");
    rep << pipeline_report_text(result);
    if (!rep) throw IoError(partial(out.report).string() + ": write failed");
    return 0;
  });

  stage("finalize", [&] {
    for (const auto* p : {&out.vessel, &out.pred, &out.final_mask, &out.report}) {
      std::filesystem::rename(partial(*p), *p);
    }
    return 0;
  });
  return result;
}

TrainingConfig TrainingConfig::from_config(const KeyValueConfig& cfg) {
  TrainingConfig c;
  c.net = net_spec_from_config(cfg);
  c.init = nn::parse_init_scheme(cfg.get_or("net.init", "he"));
  c.vesselness = vesselness_from_config(cfg);
  c.window_lo = cfg.get_double("normalize.lo", c.window_lo);
  c.window_hi = cfg.get_double("normalize.hi", c.window_hi);
  const auto steps = cfg.get_int("train.steps", 500);
  if (steps < 0) throw ValidationError("train.steps must be >= 0");
  c.options.steps = static_cast<std::size_t>(steps);
  c.options.learning_rate = cfg.get_double("train.lr", c.options.learning_rate);
  c.options.momentum = cfg.get_double("train.momentum", c.options.momentum);
  c.seed = static_cast<std::uint64_t>(cfg.get_int("run.seed", 0));
  for (const auto& p : cfg.get_list("data.ct")) c.ct.emplace_back(p);
  for (const auto& p : cfg.get_list("data.truth")) c.truth.emplace_back(p);
  if (c.ct.size() != c.truth.size()) {
    throw ValidationError("train config: data.ct and data.truth must have equal length");
  }
  if (c.ct.empty()) c.phantom = phantom_from_config(cfg);
  cfg.reject_unused();
  return c;
}

nn::TrainResult run_training(const TrainingConfig& cfg) {
  std::vector<nn::TrainingPair> pairs;
  auto add_case = [&](const Volume3& ct, const Volume3& truth) {
    const auto vessel = vesselness_prior(ct, cfg.vesselness, cfg.window_lo, cfg.window_hi);
    pairs.push_back(nn::make_training_pair(ct, vessel, truth, cfg.net.divisor(), cfg.window_lo,
                                           cfg.window_hi));
  };
  if (cfg.ct.empty()) {
    const auto ph = make_phantom(cfg.phantom, cfg.seed);
    add_case(ph.image, ph.mask);
  } else {
    for (std::size_t i = 0; i < cfg.ct.size(); ++i) {
      add_case(read_mha(cfg.ct[i]), read_mha(cfg.truth[i]));
    }
  }
  return nn::train_toy(nn::build_unet3p(cfg.net, cfg.seed, cfg.init), pairs, cfg.options);
}

Split split_dataset(const std::vector<std::string>& ids, double ratio, std::uint64_t seed) {
  if (ids.size() < 2) throw ValidationError("split: at least two cases are required");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("split: ratio must be in (0, 1)");
  std::vector<std::string> order = ids;
  // Fisher-Yates with rejection-sampled indices.
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const std::uint64_t bound = i + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(order[i], order[static_cast<std::size_t>(r % bound)]);
  }
  const auto n_train =
      static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(order.size()) - 1e-9));
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return s;
}

}  // namespace airway
