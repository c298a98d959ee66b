// Command-line benchmark harness for the junction-crossing planner: single
// episodes with step logs, seeded batches with CSV metrics, the parameter
// sweeps behind the headline figures, and a motion-model accuracy probe.

#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "junction/bench.hpp"
#include "junction/config.hpp"

namespace {

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::string> turn;
  std::optional<double> density;
  std::optional<std::string> policy;
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::optional<int> queries;
  std::optional<std::string> out;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file (flags override its values)");
  cmd->add_option("--turn", o.turn, "Turn direction: left or right")
      ->check(CLI::IsMember({"left", "right"}));
  cmd->add_option("--density", o.density, "Traffic density: arrival probability per second")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--policy", o.policy, "Decision policy")
      ->check(CLI::IsMember({"pomcp", "ttc", "random"}));
  cmd->add_option("--threshold", o.threshold, "Gap-acceptance TTC threshold in seconds");
  cmd->add_option("--seed", o.seed, "Base random seed");
  cmd->add_option("--episodes", o.episodes, "Episodes per batch")->check(CLI::PositiveNumber);
  cmd->add_option("--queries", o.queries, "Tree-search queries per decision")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output path (default: stdout)");
}

junction::BenchConfig build_config(const Overrides& o) {
  junction::BenchConfig cfg;
  if (o.config_path) {
    cfg = junction::load_config(*o.config_path);
  }
  if (o.turn) {
    cfg.turn = *o.turn;
  }
  if (o.density) {
    cfg.density = *o.density;
  }
  if (o.policy) {
    cfg.policy = *o.policy;
  }
  if (o.threshold) {
    cfg.ttc_threshold = *o.threshold;
  }
  if (o.seed) {
    cfg.seed = *o.seed;
  }
  if (o.episodes) {
    cfg.episodes = *o.episodes;
  }
  if (o.queries) {
    cfg.solver.tree_queries = *o.queries;
  }
  cfg.validate();
  return cfg;
}

// Returns the sink for result data: the --out file when given, else stdout.
std::ostream& open_out(const Overrides& o, std::ofstream& file) {
  if (o.out) {
    file.open(*o.out);
    if (!file) {
      throw std::invalid_argument("cannot open output file \"" + *o.out + "\"");
    }
    return file;
  }
  return std::cout;
}

std::vector<double> parse_grid(const std::string& csv_list, const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= csv_list.size()) {
    const std::size_t comma = csv_list.find(',', pos);
    const std::string tok =
        csv_list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!tok.empty()) {
      out.push_back(std::stod(tok));
    }
    if (comma == std::string::npos) {
      break;
    }
    pos = comma + 1;
  }
  if (out.empty()) {
    throw std::invalid_argument(std::string("empty grid for ") + what);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"T-junction crossing benchmark: belief-space tree-search planner vs. "
               "gap-acceptance and random baselines in an IDM traffic simulator"};
  app.require_subcommand(1);

  Overrides o;

  auto* episode = app.add_subcommand("episode", "Run one episode and log every step as JSON lines");
  add_common_flags(episode, o);
  std::string dump_tree_path;
  int dump_depth = 2;
  episode->add_option("--dump-tree", dump_tree_path,
                      "Write a depth-limited dump of the first decision's search tree");
  episode->add_option("--dump-depth", dump_depth, "Tree dump depth limit")
      ->check(CLI::PositiveNumber);

  auto* batch = app.add_subcommand("batch", "Run a seeded batch and emit aggregate metrics CSV");
  add_common_flags(batch, o);
  std::string detail_path;
  batch->add_option("--detail", detail_path, "Also write per-episode JSON lines to this path");

  auto* sweep_th = app.add_subcommand("sweep-threshold",
                                      "Gap-acceptance metrics across TTC thresholds");
  add_common_flags(sweep_th, o);
  std::string th_grid = "0,1,2,3,4,4.5,5";
  sweep_th->add_option("--grid", th_grid, "Comma-separated thresholds (s)");

  auto* sweep_tr = app.add_subcommand(
      "sweep-tradeoff", "Safety/efficiency frontier: planner action-penalty scales vs baseline");
  add_common_flags(sweep_tr, o);
  std::string scale_grid = "0.2,1,5,25,125";
  std::string tr_ttc_grid = "0,1,2,3,4,4.5,5";
  sweep_tr->add_option("--scales", scale_grid, "Comma-separated action-penalty scale factors");
  sweep_tr->add_option("--grid", tr_ttc_grid, "Comma-separated baseline thresholds (s)");

  auto* sweep_de = app.add_subcommand("sweep-density",
                                      "Planner and baseline metrics across traffic densities");
  add_common_flags(sweep_de, o);
  std::string de_grid = "0.1,0.3,0.5,0.7,0.9";
  sweep_de->add_option("--grid", de_grid, "Comma-separated densities");

  auto* probe = app.add_subcommand("probe-prediction",
                                   "Mean open-loop motion-model position error per horizon step");
  add_common_flags(probe, o);
  int horizon = 10;
  int anchors = 200;
  probe->add_option("--horizon", horizon, "Prediction horizon in steps")
      ->check(CLI::PositiveNumber);
  probe->add_option("--anchors", anchors, "Number of matched start states")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    const junction::BenchConfig cfg = build_config(o);
    std::ofstream file;
    std::ostream& out = open_out(o, file);

    if (episode->parsed()) {
      if (!dump_tree_path.empty()) {
        if (cfg.policy != "pomcp") {
          throw std::invalid_argument("--dump-tree requires --policy pomcp");
        }
        const junction::IntersectionLayout layout = junction::IntersectionLayout::make();
        const junction::TurnDirection turn = cfg.turn_direction();
        junction::TrafficSim sim(layout, turn, junction::make_sim_config(cfg), cfg.seed);
        junction::PomcpPolicy policy(layout, turn, junction::make_bundle(cfg, layout), cfg.solver,
                                     junction::make_ttc_config(cfg));
        junction::RandomSource rng(cfg.seed, 3);
        policy.step(sim.ego(), sim.ego_arclength(), sim.sense(), rng);
        std::ofstream dump(dump_tree_path);
        if (!dump) {
          throw std::invalid_argument("cannot open \"" + dump_tree_path + "\"");
        }
        policy.planner().dump_tree(dump, dump_depth);
      }
      const junction::EpisodeMetrics m = junction::run_episode(cfg, cfg.seed, &out);
      std::ostream& summary = o.out ? std::cout : std::cerr;
      summary << "outcome=" << (m.collided ? "collision" : m.crossed ? "crossed" : "timeout")
              << " duration=" << m.duration << " time_to_cross=" << m.time_to_cross
              << " braking_time=" << m.braking_time << " waiting_time=" << m.waiting_time
              << "\n";
    } else if (batch->parsed()) {
      std::ofstream detail;
      std::ostream* detail_ptr = nullptr;
      if (!detail_path.empty()) {
        detail.open(detail_path);
        if (!detail) {
          throw std::invalid_argument("cannot open \"" + detail_path + "\"");
        }
        detail_ptr = &detail;
      }
      const junction::BatchResult r = junction::run_batch(cfg, detail_ptr, &std::cerr);
      out << junction::batch_csv_header() << "\n" << junction::batch_csv_row(cfg, r.agg) << "\n";
    } else if (sweep_th->parsed()) {
      junction::sweep_threshold(cfg, parse_grid(th_grid, "--grid"), out, &std::cerr);
    } else if (sweep_tr->parsed()) {
      junction::sweep_tradeoff(cfg, parse_grid(scale_grid, "--scales"),
                               parse_grid(tr_ttc_grid, "--grid"), out, &std::cerr);
    } else if (sweep_de->parsed()) {
      junction::sweep_density(cfg, parse_grid(de_grid, "--grid"), out, &std::cerr);
    } else if (probe->parsed()) {
      const std::vector<double> err =
          junction::prediction_error_probe(cfg, horizon, anchors);
      out << "horizon_steps,horizon_seconds,mean_abs_position_error\n";
      for (int h = 1; h < static_cast<int>(err.size()); ++h) {
        out << h << "," << junction::detail::num(h * cfg.dt, "%.3f") << ","
            << junction::detail::num(err[static_cast<std::size_t>(h)]) << "\n";
      }
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
