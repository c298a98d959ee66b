#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "junction/random.hpp"

namespace junction {

struct SolverConfig {
  int tree_queries = 2000;
  int depth = 15;
  double exploration = 20.0;  // UCB constant, scaled to the reward magnitudes
  double discount = 0.95;
  double pw_k = 4.0;
  double pw_alpha = 0.2;
  // The selection bonus as published is sqrt(N(h)/N(h,a)); the textbook
  // variant uses sqrt(log N(h)/N(h,a)). Both are available.
  bool ucb_log_bonus = false;

  void validate() const {
    if (tree_queries < 1 || depth < 1) {
      throw std::invalid_argument("SolverConfig: tree_queries and depth must be >= 1");
    }
    if (!(pw_k > 0.0) || pw_alpha < 0.0 || pw_alpha > 1.0) {
      throw std::invalid_argument("SolverConfig: pw_k > 0 and pw_alpha in [0, 1] required");
    }
    if (discount < 0.0 || discount > 1.0) {
      throw std::invalid_argument("SolverConfig: discount in [0, 1] required");
    }
  }
};

// Monte-Carlo tree search over histories with double progressive widening on
// sampled next states. Model contract:
//   using State;  static constexpr int kNumActions;
//   step(const State&, int action, RandomSource&) -> {state, reward, terminal}
// Rollout policy contract:
//   void reset(const State&);  int operator()(const State&, RandomSource&)
template <typename Model, typename Rollout>
class PomcpPlanner {
 public:
  using State = typename Model::State;
  static constexpr int kA = Model::kNumActions;

  struct Child {
    State state;
    double reward = 0.0;
    bool terminal = false;
    int node = -1;
  };

  struct ActionEdge {
    int count = 0;      // N(h, a)
    double value = 0.0; // Q(h, a), incremental mean of discounted returns
    std::vector<Child> children;
  };

  struct HistoryNode {
    bool expanded = false;
    int count = 0;  // N(h), incremented with every action selection
    std::array<ActionEdge, kA> actions;
  };

  PomcpPlanner(Model model, Rollout rollout, SolverConfig cfg)
      : model_(std::move(model)), rollout_(std::move(rollout)), cfg_(cfg) {
    cfg_.validate();
  }

  const SolverConfig& config() const { return cfg_; }
  SolverConfig& config() { return cfg_; }
  const std::vector<HistoryNode>& nodes() const { return nodes_; }
  const HistoryNode& root() const { return nodes_.front(); }

  // Runs all queries from states drawn out of the root belief and returns the
  // index of the highest-valued root action (ties to the lowest index).
  template <typename Sampler>
  int plan(Sampler&& sample_root, RandomSource& rng) {
    nodes_.clear();
    nodes_.reserve(64);
    nodes_.emplace_back();
    nodes_[0].expanded = true;  // the root belief is always in the tree
    for (int q = 0; q < cfg_.tree_queries; ++q) {
      State s = sample_root(rng);
      simulate(s, 0, cfg_.depth, rng);
    }
    int best = 0;
    bool any = false;
    double best_value = 0.0;
    for (int a = 0; a < kA; ++a) {
      const ActionEdge& e = nodes_[0].actions[static_cast<std::size_t>(a)];
      if (e.count > 0 && (!any || e.value > best_value)) {
        any = true;
        best = a;
        best_value = e.value;
      }
    }
    return best;
  }

  // Selection rule: any untried action first (lowest index), otherwise
  // Q(h,a) + c * sqrt(N(h)/N(h,a)) (or the log variant). Ties resolve to the
  // lowest action index, so the result is deterministic.
  int ucb_select(const HistoryNode& n) const {
    for (int a = 0; a < kA; ++a) {
      if (n.actions[static_cast<std::size_t>(a)].count == 0) {
        return a;
      }
    }
    int best = 0;
    double best_score = -kInfScore;
    for (int a = 0; a < kA; ++a) {
      const ActionEdge& e = n.actions[static_cast<std::size_t>(a)];
      const double bonus = cfg_.ucb_log_bonus
                               ? std::log(std::max(1.0, static_cast<double>(n.count))) / e.count
                               : static_cast<double>(n.count) / e.count;
      const double score = e.value + cfg_.exploration * std::sqrt(bonus);
      if (score > best_score) {
        best_score = score;
        best = a;
      }
    }
    return best;
  }

  // Progressive widening: a new next state is sampled only while
  // k * N(h,a)^alpha exceeds the number of stored children.
  static bool pw_wants_new_state(const SolverConfig& cfg, int count, std::size_t n_children) {
    if (n_children == 0) {
      return true;
    }
    const double budget = cfg.pw_k * std::pow(static_cast<double>(count), cfg.pw_alpha);
    return budget > static_cast<double>(n_children);
  }

  // Either samples a fresh child through the generative model or revisits a
  // stored one uniformly at random. Returns the child index.
  std::size_t pw_next_state(int node, int action, const State& s, RandomSource& rng) {
    ActionEdge& e = nodes_[static_cast<std::size_t>(node)].actions[static_cast<std::size_t>(action)];
    if (pw_wants_new_state(cfg_, e.count, e.children.size())) {
      auto res = model_.step(s, action, rng);
      e.children.push_back(Child{std::move(res.state), res.reward, res.terminal, -1});
      return e.children.size() - 1;
    }
    return rng.index(e.children.size());
  }

  // Plays the rollout policy from the given state, accumulating discounted
  // reward until the depth budget or a terminal state.
  double rollout_from(State s, int depth, RandomSource& rng) {
    rollout_.reset(s);
    double total = 0.0;
    double disc = 1.0;
    for (int d = depth; d > 0; --d) {
      const int a = rollout_(s, rng);
      auto res = model_.step(s, a, rng);
      total += disc * res.reward;
      disc *= cfg_.discount;
      if (res.terminal) {
        break;
      }
      s = std::move(res.state);
    }
    return total;
  }

  // Most-visited-branch text dump for debugging: per node the visit count and
  // per action (visits, value, stored children).
  void dump_tree(std::ostream& os, int max_depth) const {
    if (!nodes_.empty()) {
      dump_node(os, 0, 0, max_depth);
    }
  }

  std::size_t total_action_visits() const {
    std::size_t total = 0;
    for (const HistoryNode& n : nodes_) {
      for (const ActionEdge& e : n.actions) {
        total += static_cast<std::size_t>(e.count);
      }
    }
    return total;
  }

 private:
  static constexpr double kInfScore = 1e300;

  double simulate(const State& s, int node, int depth, RandomSource& rng) {
    if (depth <= 0) {
      return 0.0;
    }
    if (!nodes_[static_cast<std::size_t>(node)].expanded) {
      nodes_[static_cast<std::size_t>(node)].expanded = true;
      return rollout_from(s, depth, rng);
    }
    const int a = ucb_select(nodes_[static_cast<std::size_t>(node)]);
    nodes_[static_cast<std::size_t>(node)].count += 1;
    nodes_[static_cast<std::size_t>(node)].actions[static_cast<std::size_t>(a)].count += 1;
    const std::size_t ci = pw_next_state(node, a, s, rng);
    double ret;
    {
      // Child payloads live on the edge's own heap buffer; the recursion only
      // appends nodes, so these references stay valid across it.
      const Child& peek =
          nodes_[static_cast<std::size_t>(node)].actions[static_cast<std::size_t>(a)].children[ci];
      ret = peek.reward;
      if (!peek.terminal) {
        int child_node = peek.node;
        if (child_node < 0) {
          child_node = alloc_node();
          nodes_[static_cast<std::size_t>(node)]
              .actions[static_cast<std::size_t>(a)]
              .children[ci]
              .node = child_node;
        }
        const Child& child =
            nodes_[static_cast<std::size_t>(node)].actions[static_cast<std::size_t>(a)].children[ci];
        ret += cfg_.discount * simulate(child.state, child_node, depth - 1, rng);
      }
    }
    ActionEdge& e = nodes_[static_cast<std::size_t>(node)].actions[static_cast<std::size_t>(a)];
    e.value += (ret - e.value) / e.count;
    return ret;
  }

  int alloc_node() {
    nodes_.emplace_back();
    return static_cast<int>(nodes_.size()) - 1;
  }

  void dump_node(std::ostream& os, int node, int depth, int max_depth) const {
    const HistoryNode& n = nodes_[static_cast<std::size_t>(node)];
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    os << pad << "node N=" << n.count << "\n";
    for (int a = 0; a < kA; ++a) {
      const ActionEdge& e = n.actions[static_cast<std::size_t>(a)];
      os << pad << "  a" << a << ": N=" << e.count << " Q=" << e.value
         << " children=" << e.children.size() << "\n";
      if (depth + 1 > max_depth || e.children.empty()) {
        continue;
      }
      // Follow the most-visited stored child (proxy: the one with a node).
      int best_child = -1;
      int best_count = -1;
      for (std::size_t c = 0; c < e.children.size(); ++c) {
        const Child& ch = e.children[c];
        if (ch.node >= 0) {
          const int cnt = nodes_[static_cast<std::size_t>(ch.node)].count;
          if (cnt > best_count) {
            best_count = cnt;
            best_child = static_cast<int>(c);
          }
        }
      }
      if (best_child >= 0) {
        dump_node(os, e.children[static_cast<std::size_t>(best_child)].node, depth + 1, max_depth);
      }
    }
  }

  Model model_;
  Rollout rollout_;
  SolverConfig cfg_;
  std::vector<HistoryNode> nodes_;
};

}  // namespace junction
