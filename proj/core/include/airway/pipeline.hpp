#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "airway/config.hpp"
#include "airway/error.hpp"
#include "airway/metrics.hpp"
#include "airway/phantom.hpp"
#include "airway/train.hpp"
#include "airway/unet3p.hpp"
#include "airway/vesselness.hpp"

namespace airway {

/// Process exit codes shared by the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitValidation = 2,
  kExitIo = 3,
  kExitNumeric = 4,
  kExitEmptyMask = 5,
};

int exit_code_for(const std::exception& e);

/// A pipeline stage failed; carries the stage name and the cause's exit code.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::exception& cause);
  const std::string& stage() const { return stage_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string stage_;
  int exit_code_;
};

VesselnessParams vesselness_from_config(const KeyValueConfig& cfg);
nn::NetSpec net_spec_from_config(const KeyValueConfig& cfg);
PhantomSpec phantom_from_config(const KeyValueConfig& cfg);

/// Vesselness prior as the pipeline computes it: frangi over the
/// window-normalized CT.
Volume3 vesselness_prior(const Volume3& ct, const VesselnessParams& p,
                         double window_lo = kDefaultWindowLo, double window_hi = kDefaultWindowHi);

struct PipelineConfig {
  std::filesystem::path ct;
  std::optional<std::filesystem::path> vessel;  // precomputed prior, else computed
  std::optional<std::filesystem::path> truth;
  std::optional<std::filesystem::path> centerline;
  std::filesystem::path params;
  std::filesystem::path out_dir;

  VesselnessParams vesselness;
  double window_lo = kDefaultWindowLo;
  double window_hi = kDefaultWindowHi;
  double threshold = 0.5;
  double branch_frac = 0.8;
  std::uint64_t seed = 0;
  bool strict = false;

  /// Keys: paths.{ct,vessel,truth,centerline,params,out_dir},
  /// vesselness.{scales,alpha,beta,c,polarity,gamma}, normalize.{lo,hi},
  /// infer.threshold, metrics.branch_frac, run.{seed,strict}.
  static PipelineConfig from_config(const KeyValueConfig& cfg);

  /// Input paths must exist and the output directory must be creatable.
  void validate() const;
};

struct PipelineOutputs {
  std::filesystem::path vessel, pred, final_mask, report;
};

PipelineOutputs pipeline_outputs(const PipelineConfig& cfg);

/// Files the pipeline reads and writes, one `read <path>` / `write <path>`
/// line each, without touching the file system.
std::vector<std::string> pipeline_plan(const PipelineConfig& cfg);

struct PipelineResult {
  std::optional<EvalReport> report;
  std::size_t predicted_voxels = 0;
  std::size_t final_voxels = 0;
  PipelineOutputs outputs;
};

/// normalize -> frangi -> infer -> postprocess -> evaluate. Artifacts are
/// written as `<name>.partial` and renamed once every stage has succeeded.
/// Throws StageError.
PipelineResult run_pipeline(const PipelineConfig& cfg);

/// Text written to report.txt.
std::string pipeline_report_text(const PipelineResult& r);

struct TrainingConfig {
  nn::NetSpec net;
  VesselnessParams vesselness;
  double window_lo = kDefaultWindowLo;
  double window_hi = kDefaultWindowHi;
  nn::TrainOptions options;
  nn::InitScheme init = nn::InitScheme::He;
  std::uint64_t seed = 0;
  /// Paired lists; when empty a phantom is synthesized from `phantom`.
  std::vector<std::filesystem::path> ct, truth;
  PhantomSpec phantom;

  /// Keys: net.{levels,base_channels,skip_channels,init}, train.{steps,lr,momentum},
  /// run.seed, data.{ct,truth} (comma lists), phantom.{kind,radius,profile,
  /// polarity,noise,contrast,background,dims,spacing}, plus vesselness.* and
  /// normalize.* as for the pipeline.
  static TrainingConfig from_config(const KeyValueConfig& cfg);
};

/// Loads or synthesizes the training cases and runs train_toy.
nn::TrainResult run_training(const TrainingConfig& cfg);

/// Deterministic shuffle by seed; the first ceil(ratio * n) ids train.
struct Split {
  std::vector<std::string> train;
  std::vector<std::string> test;
};
Split split_dataset(const std::vector<std::string>& ids, double ratio = 0.9,
                    std::uint64_t seed = 0);

}  // namespace airway
