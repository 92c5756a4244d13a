// segthresh: threshold sweeps, metric reports and dataset tooling for binary
// segmentation probability maps.

#include <cstdint>
#include <exception>
#include <optional>
#include <sstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "segthresh/commands.hpp"
#include "segthresh/errors.hpp"

namespace {

using segthresh::RunConfig;

struct Flags {
  std::string policy = "include";
  std::string split = "all";
  std::string ops = "open,close";
  std::string weights = "1,1,1";
  std::string grid;
  std::string from_csv;
  std::string ids;
  std::string images;
  std::string masks;
  std::string input;
  std::string plant = "0.30";
};

std::vector<double> parse_csv_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::vector<std::string> parse_csv_words(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void add_dataset_flags(CLI::App* cmd, RunConfig& cfg, Flags& flags) {
  cmd->add_option("--root", cfg.root, "Dataset root directory; manifest paths are relative to it");
  cmd->add_option("--manifest", cfg.manifest, "Manifest path (default <root>/manifest.tsv)");
  cmd->add_option("--policy", flags.policy, "Empty-truth policy")->check(CLI::IsMember({"include", "exclude"}));
  cmd->add_option("--split", flags.split, "Evaluate one split only")
      ->check(CLI::IsMember({"all", "train", "validation", "test", "unspecified"}));
  cmd->add_flag("--postprocess", cfg.postprocess, "Apply morphology after binarization");
  cmd->add_option("--se", cfg.se, "Structuring element")->check(CLI::IsMember({"cross3", "square3"}));
  cmd->add_option("--ops", flags.ops, "Morphological operations in order, e.g. open,close");
  cmd->add_option("--from-csv", flags.from_csv, "Replay a stored per-threshold aggregate CSV");
}

void add_common_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--out", cfg.out, "Output directory");
  cmd->add_option("--seed", cfg.seed, "Seed for every random draw");
  cmd->add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber);
}

void finish(RunConfig& cfg, const Flags& flags) {
  cfg.policy = segthresh::parse_policy(flags.policy);
  cfg.split = flags.split == "all" ? std::nullopt : std::optional(segthresh::parse_split(flags.split));
  cfg.ops = parse_csv_words(flags.ops);
  cfg.weights = parse_csv_doubles(flags.weights);
  if (!flags.grid.empty()) cfg.grid = flags.grid;
  if (!flags.from_csv.empty()) cfg.from_csv = flags.from_csv;
  if (!flags.ids.empty()) cfg.ids_file = flags.ids;
  if (!flags.images.empty()) cfg.images = flags.images;
  if (!flags.masks.empty()) cfg.masks = flags.masks;
  if (!flags.input.empty()) cfg.input = flags.input;
  cfg.synth.planted_threshold =
      flags.plant == "none" ? std::nullopt : std::optional(std::stod(flags.plant));
  cfg.synth.seed = cfg.seed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Segmentation metric evaluation and decision-threshold optimization"};
  app.set_config("--config", "", "TOML/INI config file (flags take precedence)");
  app.set_version_flag("--version", std::string(segthresh::toolkit_version()));
  app.require_subcommand(1);

  RunConfig cfg;
  Flags flags;
  double threshold = 0.0;
  std::vector<CLI::Option*> threshold_opts;

  auto* eval = app.add_subcommand("eval", "Metrics at one threshold: summary.json + per_image.csv");
  auto* sweep = app.add_subcommand("sweep", "Metrics over a threshold grid: sweep.csv + sweep.json");
  auto* optimize = app.add_subcommand("optimize", "Sweep, then print the optimal threshold and objective curve");
  for (auto* cmd : {eval, sweep, optimize}) {
    add_dataset_flags(cmd, cfg, flags);
    add_common_flags(cmd, cfg);
    threshold_opts.push_back(cmd->add_option("--threshold", threshold, "Single threshold in [0,1]"));
  }
  for (auto* cmd : {sweep, optimize}) {
    cmd->add_option("--grid", flags.grid, "start:stop:step (default 0.01:0.99:0.01)");
    cmd->add_option("--weights", flags.weights, "Objective weights d,i,p (normalized; default 1,1,1)");
  }

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with a planted optimal threshold");
  add_common_flags(synth, cfg);
  synth->add_option("-n,--count", cfg.count, "Number of images");
  synth->add_option("--size", cfg.synth.width, "Image width and height");
  synth->add_option("--presence", cfg.synth.presence_probability, "Probability an image contains a nerve");
  synth->add_option("--blur", cfg.synth.blur_radius, "Box blur radius");
  synth->add_option("--noise", cfg.synth.noise_amplitude, "Uniform noise amplitude");
  synth->add_option("--plant", flags.plant, "Planted threshold, or 'none'");

  auto* split = app.add_subcommand("split", "Deterministic 80:10:10 train/validation/test split");
  add_common_flags(split, cfg);
  split->add_option("--root", cfg.root, "Dataset root directory");
  split->add_option("--manifest", cfg.manifest, "Manifest to re-split");
  split->add_option("--ids", flags.ids, "Plain list of ids, one per line (instead of a manifest)");

  auto* preprocess = app.add_subcommand("preprocess", "Resize, normalize, binarize masks, optionally augment");
  add_common_flags(preprocess, cfg);
  preprocess->add_option("--images", flags.images, "Image file or directory")->required();
  preprocess->add_option("--masks", flags.masks, "Mask directory (matched to images by file stem)");
  preprocess->add_option("--size", cfg.size, "Output width and height");
  preprocess->add_option("--augment", cfg.augment_copies, "Augmented copies per image/mask pair");
  preprocess->add_option("--rotation", cfg.augmentation.rotation_degrees, "Max rotation in degrees");
  preprocess->add_option("--hflip", cfg.augmentation.horizontal_flip_probability, "Horizontal flip probability");
  preprocess->add_option("--vflip", cfg.augmentation.vertical_flip_probability, "Vertical flip probability");
  preprocess->add_option("--shift", cfg.augmentation.intensity_shift, "Max intensity shift");

  auto* postprocess = app.add_subcommand("postprocess", "Apply morphological clean-up to mask files");
  add_common_flags(postprocess, cfg);
  postprocess->add_option("--input", flags.input, "Mask file or directory")->required();
  postprocess->add_option("--se", cfg.se, "Structuring element")->check(CLI::IsMember({"cross3", "square3"}));
  postprocess->add_option("--ops", flags.ops, "Operations in order, e.g. open,close");

  CLI11_PARSE(app, argc, argv);

  try {
    finish(cfg, flags);
    cfg.synth.height = cfg.synth.width;
    for (const auto* opt : threshold_opts) {
      if (opt->count() > 0) cfg.threshold = threshold;
    }

    if (*eval) {
      const auto s = segthresh::cmd_eval(cfg);
      std::cout << "threshold " << segthresh::fixed6(s.threshold) << " dice " << segthresh::fixed6(s.mean.dice)
                << " iou " << segthresh::fixed6(s.mean.iou) << " pixel_accuracy "
                << segthresh::fixed6(s.mean.pixel_accuracy) << "\n";
    } else if (*sweep) {
      const auto r = segthresh::cmd_sweep(cfg);
      std::cout << "optimal_threshold " << segthresh::fixed6(r.optimal_threshold) << "\n";
    } else if (*optimize) {
      segthresh::cmd_optimize(cfg, std::cout);
    } else if (*synth) {
      segthresh::cmd_synth(cfg);
    } else if (*split) {
      const auto c = segthresh::cmd_split(cfg);
      std::cout << "train " << c.train << " validation " << c.validation << " test " << c.test << "\n";
    } else if (*preprocess) {
      std::cout << "preprocessed " << segthresh::cmd_preprocess(cfg) << " image(s)\n";
    } else if (*postprocess) {
      std::cout << "postprocessed " << segthresh::cmd_postprocess(cfg) << " mask(s)\n";
    }
  } catch (const segthresh::EmptyDatasetError& e) {
    std::cerr << "error: empty dataset: " << e.what() << "\n";
    return 3;
  } catch (const segthresh::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
