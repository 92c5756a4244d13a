#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "segthresh/dataset_io.hpp"
#include "segthresh/morphology.hpp"
#include "segthresh/preprocess.hpp"
#include "segthresh/report.hpp"
#include "segthresh/sweep.hpp"
#include "segthresh/synth.hpp"

namespace segthresh {

std::string_view toolkit_version() noexcept;

/// Effective configuration of one CLI run. Each command reads the fields it
/// needs; all of it is echoed into run.json.
struct RunConfig {
  std::filesystem::path root = ".";
  std::filesystem::path manifest;  // defaults to <root>/manifest.tsv
  std::string grid = "0.01:0.99:0.01";
  std::optional<double> threshold;
  std::vector<double> weights{1.0, 1.0, 1.0};
  EmptyTruthPolicy policy = EmptyTruthPolicy::Include;
  bool postprocess = false;
  std::string se = "cross3";
  std::vector<std::string> ops{"open", "close"};
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;
  int workers = 1;
  std::optional<std::filesystem::path> from_csv;
  std::optional<Split> split;  // evaluate one split only

  // synth
  std::size_t count = 100;
  SynthSpec synth;

  // split
  std::optional<std::filesystem::path> ids_file;

  // preprocess / postprocess inputs
  std::optional<std::filesystem::path> images;
  std::optional<std::filesystem::path> masks;
  std::optional<std::filesystem::path> input;
  std::size_t size = 256;
  std::size_t augment_copies = 0;
  AugmentationSpec augmentation;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
  ThresholdGrid threshold_grid() const;
  ObjectiveWeights objective_weights() const;
  PostprocessConfig postprocess_config() const;
  std::filesystem::path manifest_path() const;
};

/// "start:stop:step" with start < stop and step > 0.
ThresholdGrid parse_grid(const std::string& text);

/// Manifest records (optionally one split) loaded into memory using
/// `workers` threads. Failures name the offending path.
std::vector<LabeledPair> load_dataset(const RunConfig& config);

// Each command writes its outputs under config.out plus run.json (config echo
// and toolkit version). Files are written via temp-and-rename.

/// Single threshold: summary.json and per_image.csv.
EvalSummary cmd_eval(const RunConfig& config);
/// Grid sweep: sweep.csv and sweep.json.
SweepResult cmd_sweep(const RunConfig& config);
/// cmd_sweep, then the optimum and objective curve printed to `log`.
SweepResult cmd_optimize(const RunConfig& config, std::ostream& log);
void cmd_synth(const RunConfig& config);
/// Returns the per-split counts that were written.
SplitCounts cmd_split(const RunConfig& config);
/// Returns the number of image (or mask) files written.
std::size_t cmd_preprocess(const RunConfig& config);
std::size_t cmd_postprocess(const RunConfig& config);

}  // namespace segthresh
