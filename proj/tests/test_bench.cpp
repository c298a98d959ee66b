// Tests for the episode runner, metric aggregation, CSV/JSONL emission,
// parameter sweeps, the prediction-error probe, and config serialization.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include "junction/bench.hpp"
#include "junction/config.hpp"
#include "junction/metrics.hpp"

using namespace junction;
using Catch::Approx;

namespace {

EpisodeMetrics crossed_ep(double t2c, double braking, double waiting) {
  EpisodeMetrics m;
  m.crossed = true;
  m.duration = t2c;
  m.time_to_cross = t2c;
  m.braking_time = braking;
  m.waiting_time = waiting;
  return m;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    out.push_back(line);
  }
  return out;
}

BenchConfig empty_road_ttc() {
  BenchConfig cfg;
  cfg.policy = "ttc";
  cfg.density = 0.0;
  cfg.warmup_time = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("aggregate computes rates, means, and standard errors") {
  std::vector<EpisodeMetrics> eps;
  eps.push_back(crossed_ep(10.0, 1.0, 0.0));
  EpisodeMetrics crash;
  crash.collided = true;
  crash.duration = 3.0;
  crash.braking_time = 2.0;
  crash.waiting_time = 0.5;
  eps.push_back(crash);
  EpisodeMetrics stuck;
  stuck.timed_out = true;
  stuck.duration = 60.0;
  eps.push_back(stuck);

  const AggregateMetrics a = aggregate(eps);
  CHECK(a.episodes == 3);
  CHECK(a.n_crossed == 1);
  CHECK(a.collision_rate == Approx(100.0 / 3.0));
  CHECK(a.timeout_rate == Approx(100.0 / 3.0));
  CHECK(a.success_rate == Approx(100.0 / 3.0));
  // One crossed episode: mean is that sample, SE degenerates to zero.
  CHECK(a.mean_time_to_cross == Approx(10.0));
  CHECK(a.se_time_to_cross == 0.0);
  // Braking samples {1, 2, 0}: mean 1, sample variance 1, SE sqrt(1/3).
  CHECK(a.mean_braking == Approx(1.0));
  CHECK(a.se_braking == Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-12));
  // Waiting samples {0, 0.5, 0}: mean 1/6, sample variance 1/12, SE 1/6.
  CHECK(a.mean_waiting == Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(a.se_waiting == Approx(1.0 / 6.0).epsilon(1e-12));

  CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
}

TEST_CASE("episode outcomes are mutually exclusive flags") {
  EpisodeMetrics m;
  CHECK_FALSE(m.outcome_exclusive());  // nothing happened
  m.crossed = true;
  CHECK(m.outcome_exclusive());
  m.collided = true;
  CHECK_FALSE(m.outcome_exclusive());  // two at once
}

TEST_CASE("empty-road gap-acceptance episode crosses cleanly") {
  const BenchConfig cfg = empty_road_ttc();
  const EpisodeMetrics m = run_episode(cfg, 1);
  CHECK(m.crossed);
  CHECK_FALSE(m.collided);
  CHECK_FALSE(m.timed_out);
  CHECK(m.outcome_exclusive());
  // Full acceleration from rest covers the 24.4 m turn in exactly 20 steps.
  CHECK(m.duration == Approx(5.0));
  CHECK(m.time_to_cross == Approx(5.0));
  CHECK(m.braking_time == 0.0);
  CHECK(m.waiting_time == 0.0);
}

TEST_CASE("random-policy episode still ends in exactly one outcome") {
  BenchConfig cfg;
  cfg.policy = "random";
  cfg.density = 0.0;
  cfg.warmup_time = 0.0;
  const EpisodeMetrics m = run_episode(cfg, 11);
  CHECK(m.outcome_exclusive());
  CHECK(m.duration > 0.0);
  CHECK(m.duration <= cfg.timeout + 1e-9);
}

TEST_CASE("episode runner rejects an invalid configuration") {
  BenchConfig cfg;
  cfg.policy = "bogus";
  CHECK_THROWS_AS(run_episode(cfg, 1), std::invalid_argument);
}

TEST_CASE("step log emits one parseable JSON line per step") {
  const BenchConfig cfg = empty_road_ttc();
  std::ostringstream sink;
  const EpisodeMetrics m = run_episode(cfg, 1, &sink);
  const std::vector<std::string> lines = split_lines(sink.str());
  REQUIRE(static_cast<double>(lines.size()) == Approx(m.duration / cfg.dt));

  const nlohmann::json first = nlohmann::json::parse(lines.front());
  CHECK(first.at("step").get<int>() == 1);
  CHECK(first.at("clock").get<double>() == Approx(cfg.dt));
  CHECK(first.at("action").get<double>() == Approx(2.0));  // clear road: full throttle
  CHECK(first.at("ego").at("v").get<double>() == Approx(0.5));
  CHECK(first.at("vehicles").is_array());
  CHECK(first.at("vehicles").empty());
  CHECK_FALSE(first.at("events").at("crossed").get<bool>());
  CHECK(first.at("diag").contains("phase"));

  const nlohmann::json last = nlohmann::json::parse(lines.back());
  CHECK(last.at("step").get<int>() == static_cast<int>(lines.size()));
  CHECK(last.at("events").at("crossed").get<bool>());
  for (const std::string& line : lines) {
    const nlohmann::json rec = nlohmann::json::parse(line);
    const double a = rec.at("action").get<double>();
    CHECK((a == -4.0 || a == -2.0 || a == 0.0 || a == 2.0));
  }
}

TEST_CASE("batch runs consecutive seeds and aggregates its own episodes") {
  BenchConfig cfg = empty_road_ttc();
  cfg.episodes = 5;
  cfg.seed = 100;
  std::ostringstream detail;
  const BatchResult r = run_batch(cfg, &detail);
  REQUIRE(r.episodes.size() == 5);
  for (std::size_t i = 0; i < r.episodes.size(); ++i) {
    CHECK(r.episodes[i].seed == 100 + i);
  }
  CHECK(r.agg.episodes == 5);
  CHECK(r.agg.success_rate == Approx(100.0));
  CHECK(r.agg.n_crossed == 5);
  const AggregateMetrics again = aggregate(r.episodes);
  CHECK(r.agg.mean_time_to_cross == again.mean_time_to_cross);
  CHECK(r.agg.se_time_to_cross == again.se_time_to_cross);

  const std::vector<std::string> lines = split_lines(detail.str());
  REQUIRE(lines.size() == 5);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const nlohmann::json rec = nlohmann::json::parse(lines[i]);
    CHECK(rec.at("seed").get<std::uint64_t>() == 100 + i);
    CHECK(rec.at("crossed").get<bool>());
  }
}

TEST_CASE("batch progress stream reports every fifty episodes") {
  BenchConfig cfg = empty_road_ttc();
  cfg.episodes = 50;
  std::ostringstream progress;
  run_batch(cfg, nullptr, &progress);
  CHECK(progress.str().find("50/50") != std::string::npos);
}

TEST_CASE("CSV header and row layout are frozen") {
  CHECK(batch_csv_header() ==
        "policy,turn,density,threshold,queries,episodes,collision_rate,success_rate,"
        "timeout_rate,mean_time_to_cross,se_time_to_cross,mean_braking,se_braking,"
        "mean_waiting,se_waiting,n_crossed");

  BenchConfig cfg;
  cfg.policy = "pomcp";
  cfg.turn = "right";
  cfg.density = 0.2;
  cfg.ttc_threshold = 4.5;
  cfg.solver.tree_queries = 500;
  AggregateMetrics a;
  a.episodes = 2;
  a.n_crossed = 1;
  a.collision_rate = 50.0;
  a.success_rate = 50.0;
  a.timeout_rate = 0.0;
  a.mean_time_to_cross = 12.5;
  a.se_time_to_cross = 0.0;
  a.mean_braking = 1.25;
  a.se_braking = 0.5;
  a.mean_waiting = 1.0 / 3.0;
  a.se_waiting = 0.1;
  CHECK(batch_csv_row(cfg, a) ==
        "pomcp,right,0.200,4.500,500,2,50.000000,50.000000,0.000000,12.500000,"
        "0.000000,1.250000,0.500000,0.333333,0.100000,1");
}

TEST_CASE("same seed reproduces a planner episode exactly") {
  BenchConfig cfg;
  cfg.policy = "pomcp";
  cfg.density = 0.2;
  cfg.solver.tree_queries = 50;
  const EpisodeMetrics a = run_episode(cfg, 42);
  const EpisodeMetrics b = run_episode(cfg, 42);
  CHECK(a.collided == b.collided);
  CHECK(a.crossed == b.crossed);
  CHECK(a.timed_out == b.timed_out);
  CHECK(a.duration == b.duration);
  CHECK(a.time_to_cross == b.time_to_cross);
  CHECK(a.braking_time == b.braking_time);
  CHECK(a.waiting_time == b.waiting_time);
}

TEST_CASE("same seed reproduces batch CSV output byte for byte") {
  BenchConfig cfg;
  cfg.policy = "ttc";
  cfg.density = 0.2;
  cfg.episodes = 3;
  cfg.seed = 7;
  const BatchResult r1 = run_batch(cfg);
  const BatchResult r2 = run_batch(cfg);
  const std::string csv1 = batch_csv_header() + "\n" + batch_csv_row(cfg, r1.agg) + "\n";
  const std::string csv2 = batch_csv_header() + "\n" + batch_csv_row(cfg, r2.agg) + "\n";
  CHECK(csv1 == csv2);
  REQUIRE(r1.episodes.size() == r2.episodes.size());
  for (std::size_t i = 0; i < r1.episodes.size(); ++i) {
    CHECK(r1.episodes[i].duration == r2.episodes[i].duration);
    CHECK(r1.episodes[i].braking_time == r2.episodes[i].braking_time);
  }
}

TEST_CASE("threshold sweep emits one row per grid value") {
  BenchConfig base = empty_road_ttc();
  base.episodes = 2;
  std::ostringstream csv;
  const auto points = sweep_threshold(base, {0.0, 4.5}, csv);
  REQUIRE(points.size() == 2);
  CHECK(points[0].first == 0.0);
  CHECK(points[1].first == 4.5);
  CHECK(points[0].second.success_rate == Approx(100.0));  // nothing to collide with
  CHECK(points[1].second.success_rate == Approx(100.0));
  const std::vector<std::string> lines = split_lines(csv.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "threshold," + batch_csv_header());
  CHECK(lines[1].rfind("0.000,ttc,", 0) == 0);
  CHECK(lines[2].rfind("4.500,ttc,", 0) == 0);
}

TEST_CASE("tradeoff sweep scales planner penalties and runs the baseline grid") {
  BenchConfig base = empty_road_ttc();
  base.episodes = 1;
  base.solver.tree_queries = 50;
  std::ostringstream csv;
  const auto planner = sweep_tradeoff(base, {1.0, 2.0}, {4.5}, csv);
  REQUIRE(planner.size() == 2);
  CHECK(planner[0].first == 1.0);
  CHECK(planner[1].first == 2.0);
  const std::vector<std::string> lines = split_lines(csv.str());
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "policy,parameter," + batch_csv_header());
  CHECK(lines[1].rfind("pomcp,1.000,pomcp,", 0) == 0);
  CHECK(lines[2].rfind("pomcp,2.000,pomcp,", 0) == 0);
  CHECK(lines[3].rfind("ttc,4.500,ttc,", 0) == 0);
}

TEST_CASE("density sweep runs both policies at every density") {
  BenchConfig base = empty_road_ttc();
  base.episodes = 1;
  base.solver.tree_queries = 50;
  std::ostringstream csv;
  sweep_density(base, {0.0}, csv);
  const std::vector<std::string> lines = split_lines(csv.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "density,policy," + batch_csv_header());
  CHECK(lines[1].rfind("0.000,pomcp,", 0) == 0);
  CHECK(lines[2].rfind("0.000,ttc,", 0) == 0);
}

TEST_CASE("prediction error probe grows with the horizon") {
  BenchConfig cfg;
  cfg.density = 0.5;
  cfg.seed = 3;
  const std::vector<double> err = prediction_error_probe(cfg, 6, 4);
  REQUIRE(err.size() == 7);
  CHECK(err[0] == 0.0);
  CHECK(err[1] > 0.0);
  for (double e : err) {
    CHECK(e >= 0.0);
    CHECK(std::isfinite(e));
  }
  CHECK(err[6] > err[1]);
  CHECK_THROWS_AS(prediction_error_probe(cfg, 0, 4), std::invalid_argument);
}

TEST_CASE("config JSON round-trips every section") {
  BenchConfig c;
  c.turn = "left";
  c.density = 0.9;
  c.dt = 0.2;
  c.timeout = 45.0;
  c.sensor_sigma_pos = 0.25;
  c.idm.max_decel = 7.0;
  c.idm.time_headway = 1.5;
  c.mode_stay_prob = 0.9;
  c.process_noise_ca = 2.0;
  c.solver.tree_queries = 123;
  c.solver.pw_k = 3.0;
  c.solver.ucb_log_bonus = true;
  c.rewards.collision = -1500.0;
  c.rewards.accelerate = -1.0;
  c.ttc_threshold = 3.5;
  c.policy = "ttc";
  c.episodes = 77;
  c.seed = 9;

  BenchConfig d;
  apply_json(d, to_json(c));
  CHECK(d.turn == "left");
  CHECK(d.density == 0.9);
  CHECK(d.dt == 0.2);
  CHECK(d.timeout == 45.0);
  CHECK(d.sensor_sigma_pos == 0.25);
  CHECK(d.idm.max_decel == 7.0);
  CHECK(d.idm.time_headway == 1.5);
  CHECK(d.mode_stay_prob == 0.9);
  CHECK(d.process_noise_ca == 2.0);
  CHECK(d.solver.tree_queries == 123);
  CHECK(d.solver.pw_k == 3.0);
  CHECK(d.solver.ucb_log_bonus);
  CHECK(d.rewards.collision == -1500.0);
  CHECK(d.rewards.accelerate == -1.0);
  CHECK(d.ttc_threshold == 3.5);
  CHECK(d.policy == "ttc");
  CHECK(d.episodes == 77);
  CHECK(d.seed == 9);
}

TEST_CASE("config loader applies partial files and rejects unknown keys") {
  BenchConfig c;
  apply_json(c, nlohmann::json{{"scenario", {{"density", 0.7}}}});
  CHECK(c.density == 0.7);
  CHECK(c.turn == "right");  // untouched fields keep defaults

  CHECK_THROWS_AS(apply_json(c, nlohmann::json{{"bogus", 1}}), std::invalid_argument);
  CHECK_THROWS_AS(apply_json(c, nlohmann::json{{"solver", {{"nope", 2}}}}),
                  std::invalid_argument);

  const std::string path = "test_bench_config.json";
  {
    BenchConfig src;
    src.density = 0.3;
    src.policy = "random";
    std::ofstream out(path);
    out << to_json(src).dump(2) << "\n";
  }
  const BenchConfig loaded = load_config(path);
  CHECK(loaded.density == 0.3);
  CHECK(loaded.policy == "random");
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_config("no_such_file.json"), std::invalid_argument);
}

TEST_CASE("config validation rejects out-of-range settings") {
  const auto broken = [](auto&& mutate) {
    BenchConfig c;
    mutate(c);
    return c;
  };
  CHECK_NOTHROW(BenchConfig{}.validate());
  CHECK_THROWS_AS(broken([](BenchConfig& c) { c.turn = "straight"; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](BenchConfig& c) { c.policy = "dqn"; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](BenchConfig& c) { c.episodes = 0; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](BenchConfig& c) { c.density = 1.5; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](BenchConfig& c) { c.dt = 0.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(broken([](BenchConfig& c) { c.timeout = -1.0; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](BenchConfig& c) { c.mode_stay_prob = 1.5; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](BenchConfig& c) { c.ttc_threshold = -0.1; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](BenchConfig& c) { c.solver.tree_queries = 0; }).validate(),
                  std::invalid_argument);
}
