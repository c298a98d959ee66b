#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace junction {

struct EpisodeMetrics {
  std::uint64_t seed = 0;
  bool collided = false;
  bool crossed = false;
  bool timed_out = false;
  double duration = 0.0;       // seconds until the episode ended
  double time_to_cross = 0.0;  // meaningful only when crossed
  // Seconds during which at least one traffic vehicle was braking / stopped.
  double braking_time = 0.0;
  double waiting_time = 0.0;

  bool outcome_exclusive() const {
    return (collided ? 1 : 0) + (crossed ? 1 : 0) + (timed_out ? 1 : 0) == 1;
  }
};

struct AggregateMetrics {
  int episodes = 0;
  int n_crossed = 0;
  double collision_rate = 0.0;  // percent
  double success_rate = 0.0;    // percent
  double timeout_rate = 0.0;    // percent
  double mean_time_to_cross = 0.0;  // over crossed episodes
  double se_time_to_cross = 0.0;
  double mean_braking = 0.0;  // over all episodes
  double se_braking = 0.0;
  double mean_waiting = 0.0;
  double se_waiting = 0.0;
};

namespace detail {
inline void mean_se(const std::vector<double>& xs, double& mean, double& se) {
  mean = 0.0;
  se = 0.0;
  if (xs.empty()) {
    return;
  }
  for (double x : xs) {
    mean += x;
  }
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) {
    return;
  }
  double ss = 0.0;
  for (double x : xs) {
    ss += (x - mean) * (x - mean);
  }
  const double var = ss / static_cast<double>(xs.size() - 1);
  se = std::sqrt(var / static_cast<double>(xs.size()));
}
}  // namespace detail

inline AggregateMetrics aggregate(const std::vector<EpisodeMetrics>& eps) {
  if (eps.empty()) {
    throw std::invalid_argument("aggregate: need at least one episode");
  }
  AggregateMetrics agg;
  agg.episodes = static_cast<int>(eps.size());
  int collisions = 0;
  int timeouts = 0;
  std::vector<double> t2c;
  std::vector<double> braking;
  std::vector<double> waiting;
  braking.reserve(eps.size());
  waiting.reserve(eps.size());
  for (const EpisodeMetrics& e : eps) {
    collisions += e.collided ? 1 : 0;
    timeouts += e.timed_out ? 1 : 0;
    if (e.crossed) {
      t2c.push_back(e.time_to_cross);
    }
    braking.push_back(e.braking_time);
    waiting.push_back(e.waiting_time);
  }
  agg.n_crossed = static_cast<int>(t2c.size());
  const double n = static_cast<double>(agg.episodes);
  agg.collision_rate = 100.0 * collisions / n;
  agg.timeout_rate = 100.0 * timeouts / n;
  agg.success_rate = 100.0 - agg.collision_rate - agg.timeout_rate;
  detail::mean_se(t2c, agg.mean_time_to_cross, agg.se_time_to_cross);
  detail::mean_se(braking, agg.mean_braking, agg.se_braking);
  detail::mean_se(waiting, agg.mean_waiting, agg.se_waiting);
  return agg;
}

}  // namespace junction
