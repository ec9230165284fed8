#include "forge/episodes.h"

#include "json.hpp"

#include <set>
#include <sstream>

namespace forge {

Histogram Histogram::build(const std::vector<double>& values, double bin_width) {
  if (!(bin_width > 0.0)) throw ValidationError("histogram: bin width must be positive");
  Histogram h;
  h.bin_width = bin_width;
  if (values.empty()) return h;
  h.min = *std::min_element(values.begin(), values.end());
  h.max = *std::max_element(values.begin(), values.end());
  h.origin = std::floor(h.min / bin_width) * bin_width;
  const auto bins = static_cast<std::size_t>(std::floor((h.max - h.origin) / bin_width)) + 1;
  h.counts.assign(bins, 0);
  double sum = 0.0;
  for (double v : values) {
    auto k = static_cast<std::size_t>(std::max(0.0, std::floor((v - h.origin) / bin_width)));
    ++h.counts[std::min(k, bins - 1)];
    sum += v;
  }
  h.mean = sum / static_cast<double>(values.size());
  return h;
}

DatasetStats dataset_stats(const EpisodeDataset& dataset) {
  std::vector<double> euclid, geo, ratio;
  std::map<std::string, std::set<InstanceId>> objects;
  std::map<std::string, std::set<std::pair<InstanceId, std::size_t>>> goals;
  DatasetStats s;
  for (const auto& e : dataset.episodes) {
    euclid.push_back(e.euclidean_distance);
    geo.push_back(e.geodesic_distance);
    ratio.push_back(e.geodesic_distance / e.euclidean_distance);
    objects[e.object_category].insert(e.goal.object_id);
    goals[e.object_category].insert({e.goal.object_id, e.goal_index});
    ++s.categories[e.object_category].episodes;
  }
  s.episodes = dataset.episodes.size();
  s.euclidean = Histogram::build(euclid, 0.5);
  s.geodesic = Histogram::build(geo, 0.5);
  s.ratio = Histogram::build(ratio, 0.05);
  for (auto& [name, c] : s.categories) {
    c.objects = objects[name].size();
    c.goals = goals[name].size();
  }
  return s;
}

namespace {

nlohmann::json histogram_json(const Histogram& h) {
  return {{"bin_width", h.bin_width}, {"origin", h.origin}, {"counts", h.counts},
          {"min", h.min},             {"max", h.max},       {"mean", h.mean}};
}

}  // namespace

std::string stats_to_json(const DatasetStats& s) {
  nlohmann::json categories = nlohmann::json::object();
  for (const auto& [name, c] : s.categories)
    categories[name] = {{"objects", c.objects}, {"goals", c.goals}, {"episodes", c.episodes}};
  const nlohmann::json j = {{"episodes", s.episodes},
                            {"histograms",
                             {{"euclidean", histogram_json(s.euclidean)},
                              {"geodesic", histogram_json(s.geodesic)},
                              {"ratio", histogram_json(s.ratio)}}},
                            {"categories", categories}};
  return j.dump(2) + "\n";
}

std::string stats_to_csv(const DatasetStats& s) {
  std::ostringstream out;
  out.precision(17);
  out << "histogram,bin_lo,bin_hi,count\n";
  const std::pair<const char*, const Histogram*> all[] = {
      {"euclidean", &s.euclidean}, {"geodesic", &s.geodesic}, {"ratio", &s.ratio}};
  for (const auto& [name, h] : all) {
    for (std::size_t k = 0; k < h->counts.size(); ++k) {
      out << name << ',' << h->origin + k * h->bin_width << ','
          << h->origin + (k + 1) * h->bin_width << ',' << h->counts[k] << '\n';
    }
  }
  return out.str();
}

}  // namespace forge
