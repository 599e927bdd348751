// SPDX-License-Identifier: Apache-2.0
#include "editduet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <string_view>
#include <vector>

#include "editduet/errors.hpp"
#include "text_util.hpp"

namespace editduet {

double time_coverage(double d, double d_hat) {
  if (!std::isfinite(d) || d <= 0.0) throw BadDuration("target duration must be positive");
  if (!std::isfinite(d_hat) || d_hat < 0.0) throw BadDuration("produced duration must be non-negative");
  return std::min(d, d_hat) / std::max(d, d_hat);
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

std::size_t count_repetitions(const Timeline& timeline) {
  const auto& clips = timeline.clips;
  std::map<std::string_view, std::vector<std::size_t>> by_file;
  for (std::size_t i = 0; i < clips.size(); ++i) by_file[clips[i].source_file].push_back(i);

  DisjointSets sets(clips.size());
  std::size_t merges = 0;
  for (auto& [file, idx] : by_file) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return clips[a].start_s != clips[b].start_s ? clips[a].start_s < clips[b].start_s : a < b;
    });
    for (std::size_t x = 0; x < idx.size(); ++x) {
      const auto& a = clips[idx[x]];
      for (std::size_t y = x + 1; y < idx.size(); ++y) {
        const auto& b = clips[idx[y]];
        if (b.start_s >= a.end_s) break;
        const double inter = std::min(a.end_s, b.end_s) - std::max(a.start_s, b.start_s);
        const double shorter = std::min(a.duration(), b.duration());
        if (inter >= kRepetitionOverlap * shorter && sets.unite(idx[x], idx[y])) ++merges;
      }
    }
  }
  // Each union joins two classes, so merges = sum over classes of (n - 1).
  return merges;
}

MetricsReport aggregate(std::span<const EpisodeResult> results, std::span<const double> targets) {
  if (results.size() != targets.size()) {
    throw LengthMismatch(std::to_string(results.size()) + " results but " + std::to_string(targets.size()) +
                         " targets");
  }
  if (results.empty()) throw EmptyInput("no episodes to aggregate");
  MetricsReport report;
  report.n_episodes = results.size();
  double coverage = 0.0;
  double repetitions = 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].status == EpisodeStatus::Failed) {
      ++report.n_failed;
      continue;
    }
    coverage += time_coverage(targets[i], total_duration(results[i].final_timeline));
    repetitions += static_cast<double>(count_repetitions(results[i].final_timeline));
    ++ok;
  }
  report.failure_rate = static_cast<double>(report.n_failed) / static_cast<double>(report.n_episodes);
  if (ok > 0) {
    report.mean_time_coverage = coverage / static_cast<double>(ok);
    report.mean_repetitions = repetitions / static_cast<double>(ok);
  }
  return report;
}

nlohmann::json to_json(const MetricsReport& report) {
  using nlohmann::json;
  return {{"n_episodes", report.n_episodes},
          {"n_failed", report.n_failed},
          {"failure_rate", report.failure_rate},
          {"mean_time_coverage", report.mean_time_coverage ? json(*report.mean_time_coverage) : json(nullptr)},
          {"mean_repetitions", report.mean_repetitions ? json(*report.mean_repetitions) : json(nullptr)}};
}

std::string render_report(const MetricsReport& r) {
  std::ostringstream out;
  out << "episodes            " << r.n_episodes << '\n'
      << "failed              " << r.n_failed << '\n'
      << "failure rate        " << detail::fixed(r.failure_rate, 3) << '\n'
      << "mean time coverage  " << (r.mean_time_coverage ? detail::fixed(*r.mean_time_coverage, 3) : "n/a") << '\n'
      << "mean repetitions    " << (r.mean_repetitions ? detail::fixed(*r.mean_repetitions, 3) : "n/a") << '\n';
  return out.str();
}

}  // namespace editduet
