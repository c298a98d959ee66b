#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "junction/idm.hpp"
#include "junction/model.hpp"
#include "junction/policies.hpp"
#include "junction/pomcp.hpp"
#include "junction/reward.hpp"
#include "junction/road.hpp"
#include "junction/sim.hpp"

namespace junction {

// Every tunable in one tree, defaulting to the benchmark values. The JSON
// config file mirrors this structure; CLI flags override individual fields.
struct BenchConfig {
  // scenario
  std::string turn = "right";  // "right" | "left"
  double density = 0.2;
  double dt = 0.25;
  double max_speed = 13.88;
  double timeout = 60.0;
  double warmup_time = 30.0;
  double vehicle_length = 4.5;
  double vehicle_width = 1.8;
  double sensor_sigma_pos = 0.1;
  double sensor_sigma_speed = 0.1;

  IdmParams idm;  // ground-truth car following; also the crossing-phase rule

  // Planner generative model. The process-noise densities act along each
  // vehicle's exactly-sensed heading; across it only a small regularizing
  // density applies (traffic holds its lane, so lateral motion noise is not a
  // physical degree of freedom — see MotionNoise). The longitudinal densities
  // stay generous: real speed changes reach -9 m/s^2 in emergency stops, and
  // the filter must follow them within a few measurements.
  double mode_stay_prob = 0.98;
  double process_noise_cv = 1.0;
  double process_noise_ca = 1.0;
  double process_noise_lateral = 1e-3;

  SolverConfig solver;
  RewardConfig rewards;

  // gap-acceptance baseline
  double ttc_threshold = 4.5;

  // harness
  std::string policy = "pomcp";  // "pomcp" | "ttc" | "random"
  int episodes = 1000;
  std::uint64_t seed = 1;

  TurnDirection turn_direction() const {
    if (turn == "right") {
      return TurnDirection::Right;
    }
    if (turn == "left") {
      return TurnDirection::Left;
    }
    throw std::invalid_argument("config: turn must be \"right\" or \"left\"");
  }

  void validate() const {
    turn_direction();
    if (policy != "pomcp" && policy != "ttc" && policy != "random") {
      throw std::invalid_argument("config: policy must be pomcp, ttc, or random");
    }
    if (episodes < 1) {
      throw std::invalid_argument("config: episodes must be >= 1");
    }
    if (density < 0.0 || density > 1.0) {
      throw std::invalid_argument("config: density must be in [0, 1]");
    }
    if (!(dt > 0.0) || !(timeout > 0.0)) {
      throw std::invalid_argument("config: dt and timeout must be positive");
    }
    if (mode_stay_prob < 0.0 || mode_stay_prob > 1.0) {
      throw std::invalid_argument("config: mode_stay_prob must be in [0, 1]");
    }
    if (process_noise_cv < 0.0 || process_noise_ca < 0.0 || process_noise_lateral < 0.0) {
      throw std::invalid_argument("config: process noise densities must be >= 0");
    }
    if (ttc_threshold < 0.0) {
      throw std::invalid_argument("config: ttc_threshold must be >= 0");
    }
    solver.validate();
  }
};

namespace detail {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) {
    out = j.at(key).get<T>();
  }
}

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
                       const std::string& scope) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw std::invalid_argument("config: unknown key \"" + scope + key + "\"");
    }
  }
}

}  // namespace detail

inline void apply_json(BenchConfig& cfg, const nlohmann::json& j) {
  using detail::check_keys;
  using detail::read_field;
  check_keys(j, {"scenario", "idm", "model", "solver", "rewards", "ttc", "bench"}, "");
  if (j.contains("scenario")) {
    const auto& s = j.at("scenario");
    check_keys(s,
               {"turn", "density", "dt", "max_speed", "timeout", "warmup_time", "vehicle_length",
                "vehicle_width", "sensor_sigma_pos", "sensor_sigma_speed"},
               "scenario.");
    read_field(s, "turn", cfg.turn);
    read_field(s, "density", cfg.density);
    read_field(s, "dt", cfg.dt);
    read_field(s, "max_speed", cfg.max_speed);
    read_field(s, "timeout", cfg.timeout);
    read_field(s, "warmup_time", cfg.warmup_time);
    read_field(s, "vehicle_length", cfg.vehicle_length);
    read_field(s, "vehicle_width", cfg.vehicle_width);
    read_field(s, "sensor_sigma_pos", cfg.sensor_sigma_pos);
    read_field(s, "sensor_sigma_speed", cfg.sensor_sigma_speed);
  }
  if (j.contains("idm")) {
    const auto& s = j.at("idm");
    check_keys(s,
               {"desired_speed", "time_headway", "min_gap", "max_accel", "comfort_decel",
                "exponent", "max_decel"},
               "idm.");
    read_field(s, "desired_speed", cfg.idm.desired_speed);
    read_field(s, "time_headway", cfg.idm.time_headway);
    read_field(s, "min_gap", cfg.idm.min_gap);
    read_field(s, "max_accel", cfg.idm.max_accel);
    read_field(s, "comfort_decel", cfg.idm.comfort_decel);
    read_field(s, "exponent", cfg.idm.exponent);
    read_field(s, "max_decel", cfg.idm.max_decel);
  }
  if (j.contains("model")) {
    const auto& s = j.at("model");
    check_keys(s,
               {"mode_stay_prob", "process_noise_cv", "process_noise_ca",
                "process_noise_lateral"},
               "model.");
    read_field(s, "mode_stay_prob", cfg.mode_stay_prob);
    read_field(s, "process_noise_cv", cfg.process_noise_cv);
    read_field(s, "process_noise_ca", cfg.process_noise_ca);
    read_field(s, "process_noise_lateral", cfg.process_noise_lateral);
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    check_keys(s,
               {"tree_queries", "depth", "exploration", "discount", "pw_k", "pw_alpha",
                "ucb_log_bonus"},
               "solver.");
    read_field(s, "tree_queries", cfg.solver.tree_queries);
    read_field(s, "depth", cfg.solver.depth);
    read_field(s, "exploration", cfg.solver.exploration);
    read_field(s, "discount", cfg.solver.discount);
    read_field(s, "pw_k", cfg.solver.pw_k);
    read_field(s, "pw_alpha", cfg.solver.pw_alpha);
    read_field(s, "ucb_log_bonus", cfg.solver.ucb_log_bonus);
  }
  if (j.contains("rewards")) {
    const auto& s = j.at("rewards");
    check_keys(s,
               {"collision", "crossing", "accelerate", "maintain", "moderate_brake",
                "strong_brake", "discount"},
               "rewards.");
    read_field(s, "collision", cfg.rewards.collision);
    read_field(s, "crossing", cfg.rewards.crossing);
    read_field(s, "accelerate", cfg.rewards.accelerate);
    read_field(s, "maintain", cfg.rewards.maintain);
    read_field(s, "moderate_brake", cfg.rewards.moderate_brake);
    read_field(s, "strong_brake", cfg.rewards.strong_brake);
    read_field(s, "discount", cfg.rewards.discount);
  }
  if (j.contains("ttc")) {
    const auto& s = j.at("ttc");
    check_keys(s, {"threshold"}, "ttc.");
    read_field(s, "threshold", cfg.ttc_threshold);
  }
  if (j.contains("bench")) {
    const auto& s = j.at("bench");
    check_keys(s, {"policy", "episodes", "seed"}, "bench.");
    read_field(s, "policy", cfg.policy);
    read_field(s, "episodes", cfg.episodes);
    read_field(s, "seed", cfg.seed);
  }
}

inline nlohmann::json to_json(const BenchConfig& c) {
  nlohmann::json j;
  j["scenario"] = {{"turn", c.turn},
                   {"density", c.density},
                   {"dt", c.dt},
                   {"max_speed", c.max_speed},
                   {"timeout", c.timeout},
                   {"warmup_time", c.warmup_time},
                   {"vehicle_length", c.vehicle_length},
                   {"vehicle_width", c.vehicle_width},
                   {"sensor_sigma_pos", c.sensor_sigma_pos},
                   {"sensor_sigma_speed", c.sensor_sigma_speed}};
  j["idm"] = {{"desired_speed", c.idm.desired_speed}, {"time_headway", c.idm.time_headway},
              {"min_gap", c.idm.min_gap},             {"max_accel", c.idm.max_accel},
              {"comfort_decel", c.idm.comfort_decel}, {"exponent", c.idm.exponent},
              {"max_decel", c.idm.max_decel}};
  j["model"] = {{"mode_stay_prob", c.mode_stay_prob},
                {"process_noise_cv", c.process_noise_cv},
                {"process_noise_ca", c.process_noise_ca},
                {"process_noise_lateral", c.process_noise_lateral}};
  j["solver"] = {{"tree_queries", c.solver.tree_queries}, {"depth", c.solver.depth},
                 {"exploration", c.solver.exploration},   {"discount", c.solver.discount},
                 {"pw_k", c.solver.pw_k},                 {"pw_alpha", c.solver.pw_alpha},
                 {"ucb_log_bonus", c.solver.ucb_log_bonus}};
  j["rewards"] = {{"collision", c.rewards.collision},
                  {"crossing", c.rewards.crossing},
                  {"accelerate", c.rewards.accelerate},
                  {"maintain", c.rewards.maintain},
                  {"moderate_brake", c.rewards.moderate_brake},
                  {"strong_brake", c.rewards.strong_brake},
                  {"discount", c.rewards.discount}};
  j["ttc"] = {{"threshold", c.ttc_threshold}};
  j["bench"] = {{"policy", c.policy}, {"episodes", c.episodes}, {"seed", c.seed}};
  return j;
}

inline BenchConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open \"" + path + "\"");
  }
  nlohmann::json j;
  in >> j;
  BenchConfig cfg;
  apply_json(cfg, j);
  cfg.validate();
  return cfg;
}

// --- assembly helpers -------------------------------------------------------

inline SimConfig make_sim_config(const BenchConfig& c) {
  SimConfig s;
  s.density = c.density;
  s.dt = c.dt;
  s.max_speed = c.max_speed;
  s.timeout = c.timeout;
  s.warmup_time = c.warmup_time;
  s.vehicle_length = c.vehicle_length;
  s.vehicle_width = c.vehicle_width;
  s.idm = c.idm;
  s.sensor = ObservationModel{c.sensor_sigma_pos, c.sensor_sigma_speed};
  return s;
}

inline ModelBundle make_bundle(const BenchConfig& c, const IntersectionLayout& layout) {
  ModelBundle b;
  b.dt = c.dt;
  b.max_speed = c.max_speed;
  b.vehicle_length = c.vehicle_length;
  b.vehicle_width = c.vehicle_width;
  b.path = layout.turn_path(c.turn_direction());
  b.motion.longitudinal_cv = c.process_noise_cv;
  b.motion.longitudinal_ca = c.process_noise_ca;
  b.motion.lateral = c.process_noise_lateral;
  b.switching = BehaviorSwitchMatrix::symmetric(c.mode_stay_prob);
  b.sensor = ObservationModel{c.sensor_sigma_pos, c.sensor_sigma_speed};
  b.rewards = c.rewards;
  return b;
}

inline TtcConfig make_ttc_config(const BenchConfig& c) {
  TtcConfig t;
  t.threshold = c.ttc_threshold;
  t.idm = c.idm;
  t.vehicle_length = c.vehicle_length;
  return t;
}

}  // namespace junction
