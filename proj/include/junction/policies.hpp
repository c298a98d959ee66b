#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "junction/geometry.hpp"
#include "junction/idm.hpp"
#include "junction/imm.hpp"
#include "junction/model.hpp"
#include "junction/pomcp.hpp"
#include "junction/random.hpp"
#include "junction/road.hpp"
#include "junction/types.hpp"

namespace junction {

struct PolicyDecision {
  AccelAction action = AccelAction::Maintain;
  std::map<std::string, double> diagnostics;
};

// Time for a vehicle to reach the lateral reference line through the ego
// (the line x = ego.x): distance to the line divided by the approach speed
// relative to the ego. Vehicles already past the line in their direction of
// travel, or not closing on it, never reach it (+inf).
inline double ttc_compute(const VehicleState& ego, const VehicleState& veh) {
  const double d = veh.x - ego.x;
  if (d == 0.0) {
    return 0.0;
  }
  const Vec2 u = heading_dir(veh.theta);
  if (d * u.x > 0.0) {
    return kInf;
  }
  const double rel_vx = veh.v * u.x - ego.v * heading_dir(ego.theta).x;
  const double approach = d > 0.0 ? -rel_vx : rel_vx;
  if (approach <= 0.0) {
    return kInf;
  }
  return std::abs(d) / approach;
}

// Nearest action to a continuous acceleration; ties go to the milder
// (smaller-magnitude) command.
inline AccelAction snap_to_action(double accel) {
  int best = 0;
  for (int i = 1; i < kNumActions; ++i) {
    const double di = std::abs(kActionAccel[static_cast<std::size_t>(i)] - accel);
    const double db = std::abs(kActionAccel[static_cast<std::size_t>(best)] - accel);
    if (di < db || (di == db && std::abs(kActionAccel[static_cast<std::size_t>(i)]) <
                                    std::abs(kActionAccel[static_cast<std::size_t>(best)]))) {
      best = i;
    }
  }
  return action_from_index(best);
}

struct TtcConfig {
  double threshold = 4.5;   // seconds
  double sub_dt = 0.1;      // sub-sample spacing inside one decision step
  int sub_checks = 2;       // TTC evaluations per decision step
  int required_clear = 2;   // consecutive clear checks before crossing
  double moving_speed = 1e-9;
  IdmParams idm;            // crossing-phase car following
  double vehicle_length = 4.5;
};

enum class TtcPhase { Waiting, Crossing };

struct TtcPolicyState {
  TtcPhase phase = TtcPhase::Waiting;
  int consecutive_clear = 0;
};

// Shared gap-acceptance rule: while Waiting, hold the ego stopped and probe
// the minimum TTC at sub-sampled instants with linearly propagated states;
// after enough consecutive clear checks, commit to Crossing and follow IDM
// behind the nearest leader on the destination lane. Crossing never reverts.
inline AccelAction ttc_decide(const VehicleState& ego, const std::vector<VehicleState>& others,
                              const LaneSpec& destination, const TtcConfig& cfg,
                              TtcPolicyState& st, double* min_ttc_out = nullptr) {
  double min_ttc = kInf;
  if (st.phase == TtcPhase::Waiting) {
    for (int c = 0; c < cfg.sub_checks && st.phase == TtcPhase::Waiting; ++c) {
      const double t = cfg.sub_dt * c;
      VehicleState ego_t = ego;
      const Vec2 eu = heading_dir(ego.theta);
      ego_t.x += ego.v * eu.x * t;
      ego_t.y += ego.v * eu.y * t;
      double ttc = kInf;
      for (const VehicleState& o : others) {
        VehicleState ot = o;
        const Vec2 u = heading_dir(o.theta);
        ot.x += o.v * u.x * t;
        ot.y += o.v * u.y * t;
        ttc = std::min(ttc, ttc_compute(ego_t, ot));
      }
      min_ttc = std::min(min_ttc, ttc);
      if (ttc > cfg.threshold) {
        st.consecutive_clear = std::min(st.consecutive_clear + 1, cfg.required_clear);
        if (st.consecutive_clear >= cfg.required_clear) {
          st.phase = TtcPhase::Crossing;
        }
      } else {
        st.consecutive_clear = 0;
      }
    }
  }
  if (min_ttc_out != nullptr) {
    *min_ttc_out = min_ttc;
  }
  if (st.phase == TtcPhase::Waiting) {
    return ego.v > cfg.moving_speed ? AccelAction::ModerateBrake : AccelAction::Maintain;
  }
  double gap = kInf;
  double closing = 0.0;
  const double ego_s = destination.along(ego.position());
  for (const VehicleState& o : others) {
    const Vec2 lateral = o.position() - destination.point_at(destination.along(o.position()));
    if (lateral.norm() > 0.5 * destination.width) {
      continue;
    }
    const Vec2 u = heading_dir(o.theta);
    if (u.dot(destination.dir()) <= 0.0) {
      continue;
    }
    const double s = destination.along(o.position());
    if (s <= ego_s) {
      continue;
    }
    const double g = s - ego_s - cfg.vehicle_length;
    if (g < gap) {
      gap = g;
      closing = ego.v - o.v;
    }
  }
  const double a = gap > 0.0 ? idm_accel(cfg.idm, ego.v, gap, closing) : -cfg.idm.max_decel;
  return snap_to_action(a);
}

// Gap-acceptance baseline operating on noisy measurements.
class TtcPolicy {
 public:
  TtcPolicy(const IntersectionLayout& layout, TurnDirection turn, TtcConfig cfg)
      : destination_(layout.destination_lane(turn)), cfg_(cfg) {}

  const TtcPolicyState& state() const { return st_; }
  const TtcConfig& config() const { return cfg_; }
  void reset() { st_ = {}; }

  PolicyDecision step(const VehicleState& ego,
                      const std::vector<std::pair<int, VehicleObservation>>& obs) {
    std::vector<VehicleState> others;
    others.reserve(obs.size());
    for (const auto& [id, z] : obs) {
      others.push_back({z.x, z.y, z.theta, z.v, 0.0});
    }
    double min_ttc = kInf;
    PolicyDecision d;
    d.action = ttc_decide(ego, others, destination_, cfg_, st_, &min_ttc);
    d.diagnostics["min_ttc"] = min_ttc;
    d.diagnostics["phase"] = st_.phase == TtcPhase::Crossing ? 1.0 : 0.0;
    return d;
  }

 private:
  LaneSpec destination_;
  TtcConfig cfg_;
  TtcPolicyState st_;
};

inline PolicyDecision random_policy_step(RandomSource& rng) {
  PolicyDecision d;
  d.action = action_from_index(static_cast<int>(rng.index(kNumActions)));
  return d;
}

// Generative-model adapter for the tree search: latent behavior modes evolve,
// physical states advance under the mode dynamics, the ego tracks its path.
// Observation sampling is skipped inside the tree (branching is on sampled
// next states, not observation bins).
struct CrossingModel {
  using State = WorldState;
  static constexpr int kNumActions = junction::kNumActions;

  const ModelBundle* bundle = nullptr;

  struct Step {
    WorldState state;
    double reward = 0.0;
    bool terminal = false;
  };

  Step step(const WorldState& s, int action, RandomSource& rng) const {
    TransitionOutcome t = transition_step(*bundle, s, action_from_index(action), rng);
    return {std::move(t.next), t.reward, t.terminal};
  }
};

// Rollout policy for leaf evaluation: the gap-acceptance rule applied to the
// planner's imagined (noise-free) states. A rollout that starts after the ego
// has already entered the junction box resumes in the Crossing phase rather
// than braking mid-box; anywhere short of the box the ego can still yield,
// however fast it is rolling, so the gate logic applies.
class TtcRolloutPolicy {
 public:
  TtcRolloutPolicy(const LaneSpec& destination, TtcConfig cfg, double committed_arclength)
      : destination_(destination), cfg_(cfg), committed_arclength_(committed_arclength) {}

  void reset(const WorldState& s) {
    st_ = {};
    if (s.ego_arclength >= committed_arclength_) {
      st_.phase = TtcPhase::Crossing;
    }
  }

  int operator()(const WorldState& s, RandomSource& /*rng*/) {
    others_.clear();
    others_.reserve(s.others.size());
    for (const OtherVehicle& o : s.others) {
      others_.push_back(o.state);
    }
    const AccelAction a = ttc_decide(s.ego, others_, destination_, cfg_, st_);
    // Still yielding while rolling toward the box: moderate braking is the
    // default, but escalate when it would no longer stop the ego short of the
    // commit line — gliding in and then plowing is not a yield.
    if (st_.phase == TtcPhase::Waiting && a == AccelAction::ModerateBrake) {
      const double dist = committed_arclength_ - s.ego_arclength;
      const double needed = dist > 1e-6 ? (0.5 * s.ego.v * s.ego.v) / dist : kInf;
      if (needed > 2.0) {
        return action_index(AccelAction::StrongBrake);
      }
    }
    return action_index(a);
  }

 private:
  LaneSpec destination_;
  TtcConfig cfg_;
  double committed_arclength_ = 0.0;
  TtcPolicyState st_;
  std::vector<VehicleState> others_;
};

// Full planning policy: IMM belief update from the measurements, then a tree
// search from the refreshed belief.
class PomcpPolicy {
 public:
  PomcpPolicy(const IntersectionLayout& layout, TurnDirection turn, ModelBundle bundle,
              SolverConfig solver, TtcConfig rollout_cfg)
      : bundle_(std::move(bundle)),
        planner_(CrossingModel{&bundle_},
                 TtcRolloutPolicy(layout.destination_lane(turn), rollout_cfg,
                                  layout.committed_arclength(turn)),
                 solver) {}

  PomcpPolicy(const PomcpPolicy&) = delete;
  PomcpPolicy& operator=(const PomcpPolicy&) = delete;

  const ImmBelief& belief() const { return belief_; }
  const ModelBundle& bundle() const { return bundle_; }
  const PomcpPlanner<CrossingModel, TtcRolloutPolicy>& planner() const { return planner_; }

  void reset() { belief_ = {}; }

  // Belief refresh: matched tracks get an IMM step, first detections spawn a
  // fresh track, vanished tracks are dropped with their vehicles.
  void update_belief(const VehicleState& ego, double ego_arclength,
                     const std::vector<std::pair<int, VehicleObservation>>& obs) {
    belief_.ego = ego;
    belief_.ego_arclength = ego_arclength;
    std::vector<VehicleTrack> next;
    next.reserve(obs.size());
    for (const auto& [id, z] : obs) {
      const VehicleTrack* prev = nullptr;
      for (const VehicleTrack& t : belief_.tracks) {
        if (t.id == id) {
          prev = &t;
          break;
        }
      }
      next.push_back(prev != nullptr ? imm_step(*prev, z, bundle_)
                                     : init_track(id, z, bundle_.sensor));
    }
    belief_.tracks = std::move(next);
  }

  PolicyDecision step(const VehicleState& ego, double ego_arclength,
                      const std::vector<std::pair<int, VehicleObservation>>& obs,
                      RandomSource& rng) {
    update_belief(ego, ego_arclength, obs);
    const int a =
        planner_.plan([this](RandomSource& r) { return belief_sample(belief_, r); }, rng);
    PolicyDecision d;
    d.action = action_from_index(a);
    for (int i = 0; i < kNumActions; ++i) {
      const auto& edge = planner_.root().actions[static_cast<std::size_t>(i)];
      d.diagnostics["q" + std::to_string(i)] = edge.value;
      d.diagnostics["n" + std::to_string(i)] = static_cast<double>(edge.count);
    }
    return d;
  }

 private:
  ModelBundle bundle_;
  ImmBelief belief_;
  PomcpPlanner<CrossingModel, TtcRolloutPolicy> planner_;
};

}  // namespace junction
