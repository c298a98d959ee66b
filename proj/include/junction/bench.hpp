#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "junction/config.hpp"
#include "junction/metrics.hpp"
#include "junction/policies.hpp"
#include "junction/sim.hpp"

namespace junction {

namespace detail {
inline std::string num(double v, const char* f = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}
}  // namespace detail

// One closed-loop episode: sense -> decide -> advance until the ego crosses,
// collides, or times out. Braking/waiting clocks advance on every step where
// at least one traffic vehicle carries the corresponding flag. An optional
// sink receives one JSON line per step.
inline EpisodeMetrics run_episode(const BenchConfig& cfg, std::uint64_t seed,
                                  std::ostream* step_log = nullptr) {
  cfg.validate();
  const IntersectionLayout layout = IntersectionLayout::make();
  const TurnDirection turn = cfg.turn_direction();
  TrafficSim sim(layout, turn, make_sim_config(cfg), seed);
  RandomSource policy_rng(seed, 3);
  std::optional<TtcPolicy> ttc;
  std::optional<PomcpPolicy> pomcp;
  if (cfg.policy == "ttc") {
    ttc.emplace(layout, turn, make_ttc_config(cfg));
  } else if (cfg.policy == "pomcp") {
    pomcp.emplace(layout, turn, make_bundle(cfg, layout), cfg.solver, make_ttc_config(cfg));
  }
  EpisodeMetrics m;
  m.seed = seed;
  while (!sim.terminal()) {
    const auto obs = sim.sense();
    PolicyDecision d;
    if (ttc) {
      d = ttc->step(sim.ego(), obs);
    } else if (pomcp) {
      d = pomcp->step(sim.ego(), sim.ego_arclength(), obs, policy_rng);
    } else {
      d = random_policy_step(policy_rng);
    }
    const SimEvents ev = sim.sim_step(d.action);
    if (ev.n_braking > 0) {
      m.braking_time += cfg.dt;
    }
    if (ev.n_stopped > 0) {
      m.waiting_time += cfg.dt;
    }
    if (step_log != nullptr) {
      nlohmann::json rec;
      rec["step"] = sim.steps();
      rec["clock"] = sim.clock();
      rec["action"] = accel_value(d.action);
      const VehicleState& e = sim.ego();
      rec["ego"] = {{"x", e.x},         {"y", e.y}, {"theta", e.theta}, {"v", e.v},
                    {"a", e.a},         {"s", sim.ego_arclength()}};
      nlohmann::json vs = nlohmann::json::array();
      for (const SimVehicle& v : sim.traffic()) {
        vs.push_back({{"id", v.id},
                      {"lane", v.lane},
                      {"s", v.s},
                      {"v", v.v},
                      {"a", v.a},
                      {"braking", v.braking},
                      {"stopped", v.stopped}});
      }
      rec["vehicles"] = std::move(vs);
      rec["events"] = {{"n_braking", ev.n_braking},
                       {"n_stopped", ev.n_stopped},
                       {"collided", ev.collided},
                       {"crossed", ev.crossed},
                       {"timed_out", ev.timed_out}};
      if (!d.diagnostics.empty()) {
        rec["diag"] = d.diagnostics;
      }
      *step_log << rec.dump() << "\n";
    }
  }
  m.collided = sim.collided();
  m.crossed = sim.crossed();
  m.timed_out = sim.timed_out();
  m.duration = sim.clock();
  if (m.crossed) {
    m.time_to_cross = sim.clock();
  }
  return m;
}

struct BatchResult {
  AggregateMetrics agg;
  std::vector<EpisodeMetrics> episodes;
};

// Seeds run base .. base+n-1 so policy comparisons at the same base seed see
// identical traffic arrival sequences. An optional sink receives one JSON
// line per episode.
inline BatchResult run_batch(const BenchConfig& cfg, std::ostream* detail_log = nullptr,
                             std::ostream* progress = nullptr) {
  cfg.validate();
  BatchResult out;
  out.episodes.reserve(static_cast<std::size_t>(cfg.episodes));
  for (int i = 0; i < cfg.episodes; ++i) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    EpisodeMetrics m = run_episode(cfg, seed);
    if (detail_log != nullptr) {
      nlohmann::json rec;
      rec["seed"] = m.seed;
      rec["collided"] = m.collided;
      rec["crossed"] = m.crossed;
      rec["timed_out"] = m.timed_out;
      rec["duration"] = m.duration;
      rec["time_to_cross"] = m.time_to_cross;
      rec["braking_time"] = m.braking_time;
      rec["waiting_time"] = m.waiting_time;
      *detail_log << rec.dump() << "\n";
    }
    out.episodes.push_back(m);
    if (progress != nullptr && (i + 1) % 50 == 0) {
      *progress << "  " << (i + 1) << "/" << cfg.episodes << " episodes\n";
      progress->flush();
    }
  }
  out.agg = aggregate(out.episodes);
  return out;
}

inline std::string batch_csv_header() {
  return "policy,turn,density,threshold,queries,episodes,collision_rate,success_rate,"
         "timeout_rate,mean_time_to_cross,se_time_to_cross,mean_braking,se_braking,"
         "mean_waiting,se_waiting,n_crossed";
}

inline std::string batch_csv_row(const BenchConfig& cfg, const AggregateMetrics& a) {
  using detail::num;
  std::string row = cfg.policy + "," + cfg.turn + "," + num(cfg.density, "%.3f") + "," +
                    num(cfg.ttc_threshold, "%.3f") + "," + std::to_string(cfg.solver.tree_queries) +
                    "," + std::to_string(a.episodes);
  for (double v : {a.collision_rate, a.success_rate, a.timeout_rate, a.mean_time_to_cross,
                   a.se_time_to_cross, a.mean_braking, a.se_braking, a.mean_waiting,
                   a.se_waiting}) {
    row += "," + num(v);
  }
  row += "," + std::to_string(a.n_crossed);
  return row;
}

// Gap-acceptance threshold sweep: one batch per threshold value.
inline std::vector<std::pair<double, AggregateMetrics>> sweep_threshold(
    const BenchConfig& base, const std::vector<double>& grid, std::ostream& csv,
    std::ostream* progress = nullptr) {
  csv << "threshold," << batch_csv_header() << "\n";
  std::vector<std::pair<double, AggregateMetrics>> out;
  for (double th : grid) {
    BenchConfig cfg = base;
    cfg.policy = "ttc";
    cfg.ttc_threshold = th;
    if (progress != nullptr) {
      *progress << "threshold " << th << "\n";
      progress->flush();
    }
    const BatchResult r = run_batch(cfg, nullptr, progress);
    csv << detail::num(th, "%.3f") << "," << batch_csv_row(cfg, r.agg) << "\n";
    out.emplace_back(th, r.agg);
  }
  return out;
}

// Efficiency/safety frontier: the planner swept over action-penalty scale
// factors against the gap-acceptance baseline swept over thresholds.
inline std::vector<std::pair<double, AggregateMetrics>> sweep_tradeoff(
    const BenchConfig& base, const std::vector<double>& penalty_scales,
    const std::vector<double>& ttc_grid, std::ostream& csv, std::ostream* progress = nullptr) {
  csv << "policy,parameter," << batch_csv_header() << "\n";
  std::vector<std::pair<double, AggregateMetrics>> planner_points;
  for (double scale : penalty_scales) {
    BenchConfig cfg = base;
    cfg.policy = "pomcp";
    cfg.rewards.accelerate *= scale;
    cfg.rewards.maintain *= scale;
    cfg.rewards.moderate_brake *= scale;
    cfg.rewards.strong_brake *= scale;
    if (progress != nullptr) {
      *progress << "penalty scale " << scale << "\n";
      progress->flush();
    }
    const BatchResult r = run_batch(cfg, nullptr, progress);
    csv << "pomcp," << detail::num(scale, "%.3f") << "," << batch_csv_row(cfg, r.agg) << "\n";
    planner_points.emplace_back(scale, r.agg);
  }
  for (double th : ttc_grid) {
    BenchConfig cfg = base;
    cfg.policy = "ttc";
    cfg.ttc_threshold = th;
    if (progress != nullptr) {
      *progress << "ttc threshold " << th << "\n";
      progress->flush();
    }
    const BatchResult r = run_batch(cfg, nullptr, progress);
    csv << "ttc," << detail::num(th, "%.3f") << "," << batch_csv_row(cfg, r.agg) << "\n";
  }
  return planner_points;
}

// Success/efficiency across traffic densities for the planner and the
// gap-acceptance baseline.
inline void sweep_density(const BenchConfig& base, const std::vector<double>& densities,
                          std::ostream& csv, std::ostream* progress = nullptr) {
  csv << "density,policy," << batch_csv_header() << "\n";
  for (double density : densities) {
    for (const char* policy : {"pomcp", "ttc"}) {
      BenchConfig cfg = base;
      cfg.density = density;
      cfg.policy = policy;
      if (progress != nullptr) {
        *progress << "density " << density << " policy " << policy << "\n";
        progress->flush();
      }
      const BatchResult r = run_batch(cfg, nullptr, progress);
      csv << detail::num(density, "%.3f") << "," << policy << "," << batch_csv_row(cfg, r.agg)
          << "\n";
    }
  }
}

// Open-loop accuracy of the planner's motion model: from matched mid-episode
// states, roll the generative model and the ground truth forward side by side
// and average the absolute position error of every still-present vehicle per
// horizon step. The ego idles at the stop line so it does not disturb traffic.
inline std::vector<double> prediction_error_probe(const BenchConfig& cfg, int horizon,
                                                  int n_anchors) {
  cfg.validate();
  if (horizon < 1 || n_anchors < 1) {
    throw std::invalid_argument("prediction_error_probe: horizon and anchors must be >= 1");
  }
  const IntersectionLayout layout = IntersectionLayout::make();
  const ModelBundle bundle = make_bundle(cfg, layout);
  std::vector<double> err_sum(static_cast<std::size_t>(horizon) + 1, 0.0);
  std::vector<long> err_cnt(static_cast<std::size_t>(horizon) + 1, 0);
  for (int i = 0; i < n_anchors; ++i) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    TrafficSim sim(layout, cfg.turn_direction(), make_sim_config(cfg), seed);
    RandomSource probe_rng(seed, 4);
    const int settle = static_cast<int>(probe_rng.index(40));
    for (int s = 0; s < settle && !sim.terminal(); ++s) {
      sim.sim_step(AccelAction::Maintain);
    }
    if (sim.terminal() || sim.traffic().empty()) {
      continue;
    }
    WorldState gen = sim.world();
    std::vector<int> ids;
    ids.reserve(gen.others.size());
    for (std::size_t k = 0; k < sim.traffic().size(); ++k) {
      ids.push_back(sim.traffic()[k].id);
      const double a = sim.traffic()[k].a;
      gen.others[k].mode = std::abs(a) > 0.1 ? BehaviorMode::ConstantAcceleration
                                             : BehaviorMode::ConstantVelocity;
    }
    for (int h = 1; h <= horizon; ++h) {
      if (sim.terminal()) {
        break;
      }
      sim.sim_step(AccelAction::Maintain);
      TransitionOutcome t = transition_step(bundle, gen, AccelAction::Maintain, probe_rng);
      gen = std::move(t.next);
      for (std::size_t k = 0; k < ids.size(); ++k) {
        for (const SimVehicle& v : sim.traffic()) {
          if (v.id == ids[k]) {
            const VehicleState truth = sim.vehicle_state(v);
            const Vec2 diff = gen.others[k].state.position() - truth.position();
            err_sum[static_cast<std::size_t>(h)] += diff.norm();
            err_cnt[static_cast<std::size_t>(h)] += 1;
            break;
          }
        }
      }
    }
  }
  std::vector<double> mean(static_cast<std::size_t>(horizon) + 1, 0.0);
  for (int h = 1; h <= horizon; ++h) {
    const auto hs = static_cast<std::size_t>(h);
    mean[hs] = err_cnt[hs] > 0 ? err_sum[hs] / static_cast<double>(err_cnt[hs]) : 0.0;
  }
  return mean;
}

}  // namespace junction
