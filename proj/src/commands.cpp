#include "segthresh/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "segthresh/dataset_io.hpp"
#include "segthresh/errors.hpp"
#include "segthresh/metrics.hpp"
#include "segthresh/preprocess.hpp"
#include "parallel.hpp"

#ifndef SEGTHRESH_VERSION
#define SEGTHRESH_VERSION "0.0.0"
#endif

namespace segthresh {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view toolkit_version() noexcept { return SEGTHRESH_VERSION; }

ThresholdGrid parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  try {
    while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
  } catch (const std::exception&) {
    throw std::invalid_argument("grid '" + text + "': expected start:stop:step");
  }
  if (parts.size() != 3) throw std::invalid_argument("grid '" + text + "': expected start:stop:step");
  if (!(parts[0] < parts[1])) throw std::invalid_argument("grid '" + text + "': start must be below stop");
  if (!(parts[2] > 0.0)) throw std::invalid_argument("grid '" + text + "': step must be positive");
  return ThresholdGrid::uniform(parts[0], parts[1], parts[2]);
}

void RunConfig::validate() const {
  if (workers < 1) throw std::invalid_argument("--workers must be at least 1");
  if (weights.size() != 3) throw std::invalid_argument("--weights needs three values d,i,p");
  (void)objective_weights();
  (void)threshold_grid();
  if (threshold && !(*threshold >= 0.0 && *threshold <= 1.0)) {
    throw std::invalid_argument("--threshold must be in [0, 1]");
  }
  (void)postprocess_config();
  if (size == 0) throw std::invalid_argument("--size must be positive");
  augmentation.validate();
  synth.validate();
}

ThresholdGrid RunConfig::threshold_grid() const { return parse_grid(grid); }

ObjectiveWeights RunConfig::objective_weights() const {
  if (weights.size() != 3) throw std::invalid_argument("--weights needs three values d,i,p");
  return ObjectiveWeights(weights[0], weights[1], weights[2]);
}

PostprocessConfig RunConfig::postprocess_config() const {
  PostprocessConfig cfg{StructuringElement::named(se), {}};
  for (const auto& op : ops) cfg.ops.push_back(parse_morph_op(op));
  return cfg;
}

fs::path RunConfig::manifest_path() const {
  return manifest.empty() ? root / "manifest.tsv" : manifest;
}

namespace {

json config_json(const RunConfig& c) {
  json j;
  j["root"] = c.root.generic_string();
  j["manifest"] = c.manifest_path().generic_string();
  j["grid"] = c.grid;
  j["threshold"] = c.threshold ? json(*c.threshold) : json(nullptr);
  j["weights"] = c.weights;
  j["policy"] = std::string(to_string(c.policy));
  j["postprocess"] = c.postprocess;
  j["se"] = c.se;
  j["ops"] = c.ops;
  j["out"] = c.out.generic_string();
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["from_csv"] = c.from_csv ? json(c.from_csv->generic_string()) : json(nullptr);
  j["split"] = c.split ? json(std::string(to_string(*c.split))) : json("all");
  j["count"] = c.count;
  j["synth"] = {{"seed", c.synth.seed},
                {"width", c.synth.width},
                {"height", c.synth.height},
                {"presence_probability", c.synth.presence_probability},
                {"min_blobs", c.synth.min_blobs},
                {"max_blobs", c.synth.max_blobs},
                {"min_radius", c.synth.min_radius},
                {"max_radius", c.synth.max_radius},
                {"blur_radius", c.synth.blur_radius},
                {"noise_amplitude", c.synth.noise_amplitude},
                {"planted_threshold", c.synth.planted_threshold ? json(*c.synth.planted_threshold) : json(nullptr)},
                {"plant_band", c.synth.plant_band}};
  j["size"] = c.size;
  j["augment_copies"] = c.augment_copies;
  j["augmentation"] = {{"rotation_degrees", c.augmentation.rotation_degrees},
                       {"horizontal_flip_probability", c.augmentation.horizontal_flip_probability},
                       {"vertical_flip_probability", c.augmentation.vertical_flip_probability},
                       {"intensity_shift", c.augmentation.intensity_shift}};
  return j;
}

void write_run_manifest(const RunConfig& c, std::string_view command) {
  json j;
  j["command"] = std::string(command);
  j["version"] = std::string(toolkit_version());
  j["config"] = config_json(c);
  write_file_atomic(c.out / "run.json", j.dump(2) + "\n");
}

EvaluationTag run_tag(const RunConfig& c) { return EvaluationTag{std::nullopt, c.split.value_or(Split::Unspecified)}; }

std::vector<fs::path> list_files(const fs::path& dir_or_file) {
  if (fs::is_regular_file(dir_or_file)) return {dir_or_file};
  if (!fs::is_directory(dir_or_file)) throw IoError(dir_or_file.string(), "no such file or directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir_or_file)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Per-threshold counts with morphology applied after binarization; the
// prefix-sum sweep does not apply because post-processing is not a
// per-pixel operation.
PerImageCurve postprocessed_curve(const LabeledPair& item, const ThresholdGrid& grid,
                                  const PostprocessConfig& cfg) {
  PerImageCurve curve{item.id, {}};
  for (const double t : grid.values()) {
    curve.counts.push_back(confusion(postprocess(binarize(item.map, t), cfg), item.truth));
  }
  return curve;
}

std::size_t count_used(const std::vector<PerImageCurve>& curves, EmptyTruthPolicy policy) {
  return static_cast<std::size_t>(std::count_if(curves.begin(), curves.end(), [&](const PerImageCurve& c) {
    return policy == EmptyTruthPolicy::Include || c.truth_foreground() > 0;
  }));
}

}  // namespace

std::vector<LabeledPair> load_dataset(const RunConfig& config) {
  const DatasetManifest manifest = read_manifest(config.manifest_path());
  std::vector<ManifestRecord> records =
      config.split ? manifest.in_split(*config.split) : manifest.records;
  if (records.empty()) {
    throw EmptyDatasetError("no images in " +
                            (config.split ? "split '" + std::string(to_string(*config.split)) + "'"
                                          : std::string("manifest")) +
                            " of " + config.manifest_path().string());
  }
  DatasetManifest{records}.validate(config.root);

  std::vector<std::optional<LabeledPair>> loaded(records.size());
  detail::parallel_items(
      records.size(), config.workers,
      [&](std::size_t i) {
        const auto& r = records[i];
        loaded[i].emplace(LabeledPair{r.id, read_pmap(config.root / r.pmap), read_mask(config.root / r.mask)});
      },
      [&](std::size_t i) { return records[i].id; });

  std::vector<LabeledPair> out;
  out.reserve(loaded.size());
  for (auto& item : loaded) out.push_back(std::move(*item));
  return out;
}

EvalSummary cmd_eval(const RunConfig& config) {
  config.validate();
  if (!config.threshold) throw std::invalid_argument("eval needs --threshold");
  const double t = *config.threshold;
  EvalSummary summary;
  summary.threshold = t;
  summary.policy = config.policy;
  summary.postprocessed = config.postprocess;

  if (config.from_csv) {
    const StoredCurve stored = read_curve_csv(*config.from_csv);
    const auto values = stored.grid.values();
    const auto it = std::find_if(values.begin(), values.end(), [t](double v) { return std::abs(v - t) < 1e-9; });
    if (it == values.end()) {
      throw std::invalid_argument("threshold " + fixed6(t) + " is not a row of " + config.from_csv->string());
    }
    summary.mean = stored.per_threshold[static_cast<std::size_t>(it - values.begin())];
  } else {
    const auto dataset = load_dataset(config);
    const PostprocessConfig pp = config.postprocess_config();
    const ThresholdGrid grid({t});
    std::vector<PerImageCurve> curves(dataset.size());
    detail::parallel_items(
        dataset.size(), config.workers,
        [&](std::size_t i) {
          BinaryMask pred = binarize(dataset[i].map, t);
          if (config.postprocess) pred = postprocess(pred, pp);
          curves[i] = PerImageCurve{dataset[i].id, {confusion(pred, dataset[i].truth)}};
        },
        [&](std::size_t i) { return dataset[i].id; });
    summary.mean = aggregate(curves, grid, config.policy).front();
    summary.n_images = count_used(curves, config.policy);
    for (const auto& c : curves) {
      summary.images.push_back({c.id, c.counts.front(), metrics_from(c.counts.front())});
    }
  }

  write_file_atomic(config.out / "summary.json", format_eval_json(summary));
  write_file_atomic(config.out / "per_image.csv", format_per_image_csv(summary));
  write_run_manifest(config, "eval");
  return summary;
}

SweepResult cmd_sweep(const RunConfig& config) {
  config.validate();
  const ObjectiveWeights weights = config.objective_weights();
  std::optional<SweepResult> result;

  if (config.from_csv) {
    const StoredCurve stored = read_curve_csv(*config.from_csv);
    result = optimize(stored.per_threshold, stored.grid, weights);
    result->empty_truth_policy = config.policy;
  } else {
    const ThresholdGrid grid = config.threshold ? ThresholdGrid({*config.threshold}) : config.threshold_grid();
    const auto dataset = load_dataset(config);
    SweepOptions options{config.policy, config.workers, run_tag(config)};
    if (!config.postprocess) {
      result = run_sweep(dataset, grid, weights, options);
    } else {
      const PostprocessConfig pp = config.postprocess_config();
      std::vector<PerImageCurve> curves(dataset.size());
      detail::parallel_items(
          dataset.size(), config.workers,
          [&](std::size_t i) { curves[i] = postprocessed_curve(dataset[i], grid, pp); },
          [&](std::size_t i) { return dataset[i].id; });
      result = optimize(aggregate(curves, grid, config.policy), grid, weights);
      result->empty_truth_policy = config.policy;
      result->images_evaluated = count_used(curves, config.policy);
    }
  }
  result->tag = run_tag(config);

  write_file_atomic(config.out / "sweep.csv", format_curve_csv(*result));
  write_file_atomic(config.out / "sweep.json", format_sweep_json(*result));
  write_run_manifest(config, "sweep");
  return std::move(*result);
}

SweepResult cmd_optimize(const RunConfig& config, std::ostream& log) {
  SweepResult result = cmd_sweep(config);
  write_run_manifest(config, "optimize");
  log << "optimal_threshold " << fixed6(result.optimal_threshold) << "\n";
  log << "objective " << fixed6(result.objectives[result.optimal_index]) << "\n";
  log << "threshold,objective\n";
  for (std::size_t i = 0; i < result.grid.size(); ++i) {
    log << fixed6(result.grid[i]) << ',' << fixed6(result.objectives[i]) << '\n';
  }
  return result;
}

void cmd_synth(const RunConfig& config) {
  config.validate();
  write_synth_dataset(config.synth, config.count, config.out, config.workers);
  write_run_manifest(config, "synth");
}

SplitCounts cmd_split(const RunConfig& config) {
  config.validate();
  SplitCounts counts;
  const auto tally = [&counts](Split s) {
    if (s == Split::Train) ++counts.train;
    if (s == Split::Validation) ++counts.validation;
    if (s == Split::Test) ++counts.test;
  };

  if (config.ids_file) {
    std::ifstream in(*config.ids_file);
    if (!in) throw IoError(config.ids_file->string(), "cannot open id list");
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) ids.push_back(line);
    }
    std::string text = "# id\tsplit\n";
    for (const auto& [id, s] : split_dataset(ids, config.seed)) {
      text += id + '\t' + std::string(to_string(s)) + '\n';
      tally(s);
    }
    write_file_atomic(config.out / "splits.tsv", text);
  } else {
    DatasetManifest manifest = read_manifest(config.manifest_path());
    std::vector<std::string> ids;
    for (const auto& r : manifest.records) ids.push_back(r.id);
    std::map<std::string, Split> assignment;
    for (auto& [id, s] : split_dataset(ids, config.seed)) assignment.emplace(id, s);
    for (auto& r : manifest.records) {
      r.tag.split = assignment.at(r.id);
      tally(r.tag.split);
    }
    write_manifest(manifest, config.out / "manifest.tsv");
  }
  write_run_manifest(config, "split");
  return counts;
}

std::size_t cmd_preprocess(const RunConfig& config) {
  config.validate();
  if (!config.images) throw std::invalid_argument("preprocess needs --images");
  const auto images = list_files(*config.images);
  if (images.empty()) throw EmptyDatasetError("no images under " + config.images->string());

  std::map<std::string, fs::path> masks_by_stem;
  if (config.masks) {
    for (const auto& p : list_files(*config.masks)) masks_by_stem.emplace(p.stem().string(), p);
  }
  if (config.augment_copies > 0 && !config.masks) {
    throw std::invalid_argument("--augment needs --masks so both can be transformed together");
  }

  AugmentationSpec aug = config.augmentation;
  aug.seed = config.seed;
  detail::parallel_items(
      images.size(), config.workers,
      [&](std::size_t i) {
        const std::string stem = images[i].stem().string();
        const GrayImage img = normalize(resize_image(read_gray_image(images[i]), config.size, config.size));
        write_gray_image(img, config.out / "images" / (stem + ".png"));
        if (!config.masks) return;
        const auto found = masks_by_stem.find(stem);
        if (found == masks_by_stem.end()) throw IoError((*config.masks / stem).string(), "no mask for image");
        const BinaryMask mask =
            resize_mask(binarize_mask_image(read_gray_image(found->second)), config.size, config.size);
        write_mask(mask, config.out / "masks" / (stem + ".png"));
        for (std::size_t k = 0; k < config.augment_copies; ++k) {
          const auto [aug_img, aug_mask] = augment(img, mask, aug, i * config.augment_copies + k);
          const std::string name = stem + "_aug" + std::to_string(k) + ".png";
          write_gray_image(aug_img, config.out / "augmented" / "images" / name);
          write_mask(aug_mask, config.out / "augmented" / "masks" / name);
        }
      },
      [&](std::size_t i) { return images[i].string(); });
  write_run_manifest(config, "preprocess");
  return images.size();
}

std::size_t cmd_postprocess(const RunConfig& config) {
  config.validate();
  if (!config.input) throw std::invalid_argument("postprocess needs --input");
  const auto files = list_files(*config.input);
  const PostprocessConfig pp = config.postprocess_config();
  detail::parallel_items(
      files.size(), config.workers,
      [&](std::size_t i) {
        write_mask(postprocess(read_mask(files[i]), pp), config.out / "masks" / (files[i].stem().string() + ".png"));
      },
      [&](std::size_t i) { return files[i].string(); });
  write_run_manifest(config, "postprocess");
  return files.size();
}

}  // namespace segthresh
