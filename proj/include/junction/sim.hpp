#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "junction/dynamics.hpp"
#include "junction/geometry.hpp"
#include "junction/idm.hpp"
#include "junction/model.hpp"
#include "junction/random.hpp"
#include "junction/road.hpp"
#include "junction/types.hpp"

namespace junction {

struct SimConfig {
  double density = 0.2;  // probability of a vehicle entering per second, per entry
  double dt = 0.25;
  double max_speed = 13.88;
  double timeout = 60.0;
  double vehicle_length = 4.5;
  double vehicle_width = 1.8;
  double braking_flag_accel = -0.5;  // commanded accel below this counts as braking
  double stopped_flag_speed = 0.1;   // speed below this counts as stopped
  // Per-driver desired speed spread. A wide band makes slow platoon leaders
  // common, and the gaps that open ahead of them are what let anyone enter
  // the main road when arrivals are dense.
  double min_spawn_speed_frac = 0.4;
  // Traffic-only settling time simulated before the episode clock starts, so
  // the main road is populated when the ego begins instead of empty.
  double warmup_time = 30.0;
  IdmParams idm;  // desired_speed is overridden per vehicle at spawn
  ObservationModel sensor;

  void validate() const {
    if (density < 0.0 || density > 1.0) {
      throw std::invalid_argument("SimConfig: density must be in [0, 1]");
    }
    if (!(dt > 0.0) || !(timeout > 0.0)) {
      throw std::invalid_argument("SimConfig: dt and timeout must be positive");
    }
    if (!(vehicle_length > 0.0) || !(vehicle_width > 0.0) || !(max_speed > 0.0)) {
      throw std::invalid_argument("SimConfig: vehicle dimensions and max_speed must be positive");
    }
  }
};

struct SimVehicle {
  int id = 0;
  int lane = 0;       // 0 = eastbound, 1 = westbound
  double s = 0.0;     // arclength from the lane entry
  double v = 0.0;
  double a = 0.0;     // last commanded acceleration
  double v0 = 13.88;  // per-vehicle desired speed
  bool braking = false;
  bool stopped = false;
};

struct SimEvents {
  bool collided = false;
  bool crossed = false;
  bool timed_out = false;
  int n_braking = 0;  // traffic vehicles flagged this step
  int n_stopped = 0;
};

// Ground-truth closed-loop world: IDM car-following traffic on the main road,
// stochastic spawning at both entries, the ego advancing along its turn path,
// oriented-rectangle collision detection, and noisy sensing. Deliberately
// richer dynamics than the planner's constant-velocity/acceleration model.
class TrafficSim {
 public:
  TrafficSim(const IntersectionLayout& layout, TurnDirection turn, const SimConfig& cfg,
             std::uint64_t seed)
      : layout_(layout),
        cfg_(cfg),
        path_(layout.turn_path(turn)),
        ego_(layout.ego_start()),
        spawn_rng_(seed, 1),
        sense_rng_(seed, 2) {
    cfg_.validate();
    const int warmup_steps = static_cast<int>(std::floor(cfg_.warmup_time / cfg_.dt + 1e-9));
    for (int i = 0; i < warmup_steps; ++i) {
      advance_traffic();
      spawn_traffic();
    }
  }

  bool terminal() const { return collided_ || crossed_ || timed_out_; }
  bool collided() const { return collided_; }
  bool crossed() const { return crossed_; }
  bool timed_out() const { return timed_out_; }
  double clock() const { return steps_ * cfg_.dt; }
  int steps() const { return steps_; }
  const VehicleState& ego() const { return ego_; }
  double ego_arclength() const { return ego_s_; }
  const PathSpec& path() const { return path_; }
  const IntersectionLayout& layout() const { return layout_; }
  const SimConfig& config() const { return cfg_; }
  const std::vector<SimVehicle>& traffic() const { return vehicles_; }

  VehicleState vehicle_state(const SimVehicle& v) const {
    const LaneSpec& lane = layout_.lane(v.lane);
    const Vec2 p = lane.point_at(v.s);
    return {p.x, p.y, lane.heading, v.v, v.a};
  }

  // Snapshot in the planner's world representation (behavior labels are a
  // placeholder; the ground truth has no latent modes).
  WorldState world() const {
    WorldState w;
    w.ego = ego_;
    w.ego_arclength = ego_s_;
    w.others.reserve(vehicles_.size());
    for (const SimVehicle& v : vehicles_) {
      w.others.push_back({vehicle_state(v), BehaviorMode::ConstantVelocity});
    }
    return w;
  }

  // One noisy measurement per traffic vehicle, in stable spawn order. The ego
  // knows its own physical state exactly and is not part of the observation.
  std::vector<std::pair<int, VehicleObservation>> sense() {
    std::vector<std::pair<int, VehicleObservation>> out;
    out.reserve(vehicles_.size());
    for (const SimVehicle& v : vehicles_) {
      out.emplace_back(v.id, sample_observation(vehicle_state(v), cfg_.sensor, sense_rng_));
    }
    return out;
  }

  bool detect_collision() const {
    const OrientedBox ego_box = vehicle_box(ego_, cfg_.vehicle_length, cfg_.vehicle_width);
    for (const SimVehicle& v : vehicles_) {
      if (boxes_overlap(ego_box, vehicle_box(vehicle_state(v), cfg_.vehicle_length,
                                             cfg_.vehicle_width))) {
        return true;
      }
    }
    return false;
  }

  // Advances the whole world by one decision step. Order: traffic accelerates
  // against the current world (synchronous update), everything integrates,
  // vehicles leaving the road despawn, new vehicles spawn, then terminal
  // conditions are evaluated on the post-move world.
  SimEvents sim_step(AccelAction action) {
    if (terminal()) {
      throw std::logic_error("TrafficSim::sim_step: episode already terminal");
    }
    advance_traffic();
    const EgoAdvance adv = ego_step(ego_, ego_s_, path_, action, cfg_.dt, cfg_.max_speed);
    ego_ = adv.state;
    ego_s_ = adv.arclength;
    spawn_traffic();
    steps_ += 1;

    SimEvents ev;
    for (const SimVehicle& v : vehicles_) {
      ev.n_braking += v.braking ? 1 : 0;
      ev.n_stopped += v.stopped ? 1 : 0;
    }
    collided_ = detect_collision();
    crossed_ = !collided_ && ego_s_ >= path_.length() - 1e-9;
    timed_out_ = !collided_ && !crossed_ && clock() >= cfg_.timeout - 1e-9;
    ev.collided = collided_;
    ev.crossed = crossed_;
    ev.timed_out = timed_out_;
    return ev;
  }

  // Inserts a vehicle at each entry with probability density*dt, at a sampled
  // speed the vehicle could comfortably shed before reaching its leader. The
  // insertion is skipped while the entry is occupied (leader closer than the
  // equilibrium spacing for the sampled speed), so vehicles never spawn
  // overlapping and flow saturates at lane capacity.
  void spawn_traffic() {
    for (int lane = 0; lane < 2; ++lane) {
      const bool arrive = spawn_rng_.bernoulli(cfg_.density * cfg_.dt);
      if (!arrive) {
        continue;
      }
      const double frac = spawn_rng_.uniform(cfg_.min_spawn_speed_frac, 1.0);
      double speed = frac * cfg_.max_speed;
      const SimVehicle* leader = nullptr;
      for (const SimVehicle& v : vehicles_) {
        if (v.lane == lane && (leader == nullptr || v.s < leader->s)) {
          leader = &v;
        }
      }
      if (leader != nullptr) {
        const double gap = leader->s - cfg_.vehicle_length;
        // The entry cell is the space a car entering at this speed needs in
        // equilibrium; a closer leader means the entry is still occupied.
        // Demanded arrivals beyond lane capacity are dropped here, exactly
        // like road-network insertion that fails its safe-gap check.
        if (gap < cfg_.idm.min_gap + speed * cfg_.idm.time_headway) {
          continue;
        }
        speed = std::min(speed, std::sqrt(2.0 * cfg_.idm.comfort_decel *
                                          (gap - cfg_.idm.min_gap)));
      }
      SimVehicle nv;
      nv.id = next_id_++;
      nv.lane = lane;
      nv.s = 0.0;
      nv.v = speed;
      nv.v0 = frac * cfg_.max_speed;
      vehicles_.push_back(nv);
    }
  }

  // Deterministic scenario construction (tests, tools): adds a vehicle
  // directly, bypassing the stochastic entry process.
  void inject_vehicle(int lane, double s, double v, double v0) {
    SimVehicle nv;
    nv.id = next_id_++;
    nv.lane = lane;
    nv.s = s;
    nv.v = v;
    nv.v0 = v0;
    vehicles_.push_back(nv);
  }

 private:
  // IDM leader selection: the nearest same-lane vehicle ahead, or the ego when
  // its body intrudes into the lane's swept strip ahead of the follower.
  void advance_traffic() {
    const OrientedBox ego_box = vehicle_box(ego_, cfg_.vehicle_length, cfg_.vehicle_width);
    std::vector<double> accel(vehicles_.size(), 0.0);
    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
      const SimVehicle& v = vehicles_[i];
      const LaneSpec& lane = layout_.lane(v.lane);
      double gap = kInf;
      double closing = 0.0;
      for (std::size_t j = 0; j < vehicles_.size(); ++j) {
        if (j == i || vehicles_[j].lane != v.lane || vehicles_[j].s <= v.s) {
          continue;
        }
        const double g = vehicles_[j].s - v.s - cfg_.vehicle_length;
        if (g < gap) {
          gap = g;
          closing = v.v - vehicles_[j].v;
        }
      }
      if (boxes_overlap(ego_box, lane.strip())) {
        const double ego_s = lane.along(ego_.position());
        if (ego_s > v.s) {
          const double g = ego_s - v.s - cfg_.vehicle_length;
          if (g < gap) {
            gap = g;
            closing = v.v - ego_.v * heading_dir(ego_.theta).dot(lane.dir());
          }
        }
      }
      IdmParams p = cfg_.idm;
      p.desired_speed = v.v0;
      accel[i] = gap > 0.0 ? idm_accel(p, v.v, gap, closing) : -p.max_decel;
    }
    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
      SimVehicle& v = vehicles_[i];
      const double a = accel[i];
      double ds;
      if (a < 0.0 && v.v + a * cfg_.dt < 0.0) {
        ds = -v.v * v.v / (2.0 * a);  // comes to rest inside the step
      } else {
        ds = v.v * cfg_.dt + 0.5 * a * cfg_.dt * cfg_.dt;
      }
      v.s += std::max(0.0, ds);
      v.v = std::clamp(v.v + a * cfg_.dt, 0.0, cfg_.max_speed);
      v.a = a;
      v.braking = a < cfg_.braking_flag_accel;
      v.stopped = v.v < cfg_.stopped_flag_speed;
    }
    std::erase_if(vehicles_, [this](const SimVehicle& v) {
      return v.s > layout_.lane(v.lane).length;
    });
  }

  IntersectionLayout layout_;
  SimConfig cfg_;
  PathSpec path_;
  VehicleState ego_;
  double ego_s_ = 0.0;
  std::vector<SimVehicle> vehicles_;
  RandomSource spawn_rng_;
  RandomSource sense_rng_;
  int steps_ = 0;
  int next_id_ = 1;
  bool collided_ = false;
  bool crossed_ = false;
  bool timed_out_ = false;
};

}  // namespace junction
