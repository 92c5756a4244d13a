#include "segthresh/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "segthresh/errors.hpp"

namespace segthresh {

using nlohmann::json;

std::string fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

double round6(double value) {
  const double r = std::round(value * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;  // no "-0.0" in output
}

std::string format_curve_csv(const SweepResult& result) {
  std::string out = std::string(kCurveCsvHeader) + "\n";
  for (std::size_t i = 0; i < result.grid.size(); ++i) {
    const MetricTriple& m = result.per_threshold[i];
    out += fixed6(result.grid[i]) + ',' + fixed6(m.dice) + ',' + fixed6(m.iou) + ',' +
           fixed6(m.pixel_accuracy) + ',' + fixed6(result.objectives[i]) + '\n';
  }
  return out;
}

std::string format_sweep_json(const SweepResult& result) {
  const MetricTriple& best = result.optimal_metrics();
  json curve = json::array();
  for (std::size_t i = 0; i < result.grid.size(); ++i) {
    const MetricTriple& m = result.per_threshold[i];
    curve.push_back({{"threshold", round6(result.grid[i])},
                     {"dice", round6(m.dice)},
                     {"iou", round6(m.iou)},
                     {"pixel_accuracy", round6(m.pixel_accuracy)},
                     {"objective", round6(result.objectives[i])}});
  }
  json j;
  j["threshold"] = round6(result.optimal_threshold);
  j["optimal_threshold"] = round6(result.optimal_threshold);
  j["mean_dice"] = round6(best.dice);
  j["mean_iou"] = round6(best.iou);
  j["mean_pixel_accuracy"] = round6(best.pixel_accuracy);
  j["objective"] = round6(result.objectives[result.optimal_index]);
  j["weights"] = {round6(result.weights.dice()), round6(result.weights.iou()),
                  round6(result.weights.pixel_accuracy())};
  j["n_images"] = result.images_evaluated ? json(*result.images_evaluated) : json(nullptr);
  j["policy"] = std::string(to_string(result.empty_truth_policy));
  j["split"] = std::string(to_string(result.tag.split));
  j["curve"] = std::move(curve);
  return j.dump(2) + "\n";
}

StoredCurve parse_curve_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("curve CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("threshold,dice,iou,pixel_accuracy", 0) != 0) {
    throw std::invalid_argument("curve CSV: header must start with threshold,dice,iou,pixel_accuracy");
  }

  std::vector<std::pair<double, MetricTriple>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    try {
      while (std::getline(ss, cell, ',')) fields.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw std::invalid_argument("curve CSV line " + std::to_string(line_no) + ": not a number");
    }
    if (fields.size() < 4) {
      throw std::invalid_argument("curve CSV line " + std::to_string(line_no) + ": expected at least 4 columns");
    }
    for (std::size_t k = 1; k < 4; ++k) {
      if (!(fields[k] >= 0.0 && fields[k] <= 1.0)) {
        throw std::invalid_argument("curve CSV line " + std::to_string(line_no) + ": metric outside [0, 1]");
      }
    }
    rows.push_back({fields[0], {fields[1], fields[2], fields[3]}});
  }
  if (rows.empty()) throw EmptyDatasetError("curve CSV: no data rows");
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<double> thresholds;
  std::vector<MetricTriple> metrics;
  for (const auto& [t, m] : rows) {
    thresholds.push_back(t);
    metrics.push_back(m);
  }
  return {ThresholdGrid(std::move(thresholds)), std::move(metrics)};
}

StoredCurve read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open curve CSV");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_curve_csv(buffer.str());
}

std::string format_eval_json(const EvalSummary& s) {
  json j;
  j["threshold"] = round6(s.threshold);
  j["mean_dice"] = round6(s.mean.dice);
  j["mean_iou"] = round6(s.mean.iou);
  j["mean_pixel_accuracy"] = round6(s.mean.pixel_accuracy);
  j["n_images"] = s.n_images ? json(*s.n_images) : json(nullptr);
  j["policy"] = std::string(to_string(s.policy));
  j["postprocess"] = s.postprocessed;
  return j.dump(2) + "\n";
}

std::string format_per_image_csv(const EvalSummary& s) {
  std::string out = "id,dice,iou,pixel_accuracy,tp,fp,tn,fn\n";
  for (const auto& img : s.images) {
    out += img.id + ',' + fixed6(img.metrics.dice) + ',' + fixed6(img.metrics.iou) + ',' +
           fixed6(img.metrics.pixel_accuracy) + ',' + std::to_string(img.counts.tp) + ',' +
           std::to_string(img.counts.fp) + ',' + std::to_string(img.counts.tn) + ',' +
           std::to_string(img.counts.fn) + '\n';
  }
  return out;
}

}  // namespace segthresh
