#include "heis/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace heis::detail {

namespace {

// Arc states: tree arcs have state 0, arcs at their lower bound state 1.
// Uncapacitated arcs never sit at an upper bound.
constexpr std::int8_t kTree = 0;
constexpr std::int8_t kLower = 1;
constexpr std::int8_t kUp = 1;
constexpr std::int8_t kDown = -1;

class Solver {
 public:
  Solver(const double* cost, std::size_t rows, std::size_t cols, const double* supply, const double* demand)
      : cost_(cost), rows_(rows), cols_(cols) {
    node_num_ = static_cast<std::int64_t>(rows + cols);
    arc_num_ = static_cast<std::int64_t>(rows * cols);
    all_arc_num_ = arc_num_ + node_num_;
    root_ = node_num_;

    double max_cost = 0.0;
    for (std::int64_t e = 0; e < arc_num_; ++e) max_cost = std::max(max_cost, std::abs(cost[e]));
    art_cost_ = (max_cost + 1.0) * static_cast<double>(node_num_);
    eps_ = 1e-14 * art_cost_;

    const auto nodes = static_cast<std::size_t>(node_num_ + 1);
    supply_.assign(nodes, 0.0);
    for (std::size_t i = 0; i < rows; ++i) supply_[i] = supply[i];
    for (std::size_t j = 0; j < cols; ++j) supply_[rows + j] = -demand[j];

    parent_.assign(nodes, -1);
    pred_.assign(nodes, -1);
    thread_.assign(nodes, 0);
    rev_thread_.assign(nodes, 0);
    succ_num_.assign(nodes, 0);
    last_succ_.assign(nodes, 0);
    pred_dir_.assign(nodes, kUp);
    pi_.assign(nodes, 0.0);
    flow_.assign(static_cast<std::size_t>(all_arc_num_), 0.0);
    state_.assign(static_cast<std::size_t>(all_arc_num_), kLower);
    art_source_.assign(static_cast<std::size_t>(node_num_), 0);
    art_target_.assign(static_cast<std::size_t>(node_num_), 0);
    art_cost_arc_.assign(static_cast<std::size_t>(node_num_), 0.0);

    parent_[root_] = -1;
    pred_[root_] = -1;
    thread_[root_] = 0;
    rev_thread_[0] = root_;
    succ_num_[root_] = node_num_ + 1;
    last_succ_[root_] = root_ - 1;
    pi_[root_] = 0.0;

    for (std::int64_t u = 0; u < node_num_; ++u) {
      const std::int64_t e = arc_num_ + u;
      parent_[u] = root_;
      pred_[u] = e;
      thread_[u] = u + 1;
      rev_thread_[u + 1] = u;
      succ_num_[u] = 1;
      last_succ_[u] = u;
      state_[e] = kTree;
      if (supply_[u] >= 0.0) {
        pred_dir_[u] = kUp;
        pi_[u] = 0.0;
        art_source_[u] = u;
        art_target_[u] = root_;
        flow_[e] = supply_[u];
        art_cost_arc_[u] = 0.0;
      } else {
        pred_dir_[u] = kDown;
        pi_[u] = art_cost_;
        art_source_[u] = root_;
        art_target_[u] = u;
        flow_[e] = -supply_[u];
        art_cost_arc_[u] = art_cost_;
      }
    }
    block_size_ = std::max<std::int64_t>(10, static_cast<std::int64_t>(std::sqrt(static_cast<double>(arc_num_))));
  }

  std::vector<FlowEntry> run() {
    while (find_entering_arc()) {
      find_join_node();
      find_leaving_arc();
      change_flow();
      update_tree_structure();
      update_potential();
    }
    std::vector<FlowEntry> out;
    for (std::int64_t u = 0; u < node_num_; ++u) {
      const std::int64_t e = pred_[u];
      if (e >= 0 && e < arc_num_ && flow_[e] > 0.0) {
        out.push_back({static_cast<std::size_t>(e) / cols_, static_cast<std::size_t>(e) % cols_, flow_[e]});
      }
    }
    std::sort(out.begin(), out.end(), [](const FlowEntry& a, const FlowEntry& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    return out;
  }

 private:
  std::int64_t source(std::int64_t e) const {
    return e < arc_num_ ? e / static_cast<std::int64_t>(cols_) : art_source_[e - arc_num_];
  }
  std::int64_t target(std::int64_t e) const {
    return e < arc_num_ ? static_cast<std::int64_t>(rows_) + e % static_cast<std::int64_t>(cols_)
                        : art_target_[e - arc_num_];
  }
  double cost(std::int64_t e) const { return e < arc_num_ ? cost_[e] : art_cost_arc_[e - arc_num_]; }

  double reduced(std::int64_t e) const {
    const std::int64_t i = e / static_cast<std::int64_t>(cols_);
    const std::int64_t j = static_cast<std::int64_t>(rows_) + e % static_cast<std::int64_t>(cols_);
    return state_[e] * (cost_[e] + pi_[i] - pi_[j]);
  }

  // Block search: scan arcs cyclically in blocks and take the most negative
  // reduced cost of the first block that has one. Ties keep the earliest arc
  // in scan order.
  bool find_entering_arc() {
    double min = -eps_;
    std::int64_t cnt = block_size_;
    std::int64_t e;
    bool found = false;
    for (e = next_arc_; e < arc_num_; ++e) {
      const double c = reduced(e);
      if (c < min) {
        min = c;
        in_arc_ = e;
        found = true;
      }
      if (--cnt == 0) {
        if (found) {
          next_arc_ = e + 1 == arc_num_ ? 0 : e + 1;
          return true;
        }
        cnt = block_size_;
      }
    }
    for (e = 0; e < next_arc_; ++e) {
      const double c = reduced(e);
      if (c < min) {
        min = c;
        in_arc_ = e;
        found = true;
      }
      if (--cnt == 0) {
        if (found) {
          next_arc_ = e + 1;
          return true;
        }
        cnt = block_size_;
      }
    }
    if (!found) return false;
    next_arc_ = e == arc_num_ ? 0 : e;
    return true;
  }

  void find_join_node() {
    std::int64_t u = source(in_arc_);
    std::int64_t v = target(in_arc_);
    while (u != v) {
      if (succ_num_[u] < succ_num_[v]) u = parent_[u];
      else v = parent_[v];
    }
    join_ = u;
  }

  void find_leaving_arc() {
    const std::int64_t first = source(in_arc_);
    const std::int64_t second = target(in_arc_);
    delta_ = INFINITY;
    int result = 0;
    for (std::int64_t u = first; u != join_; u = parent_[u]) {
      if (pred_dir_[u] == kUp) {
        const double d = flow_[pred_[u]];
        if (d < delta_) {
          delta_ = d;
          u_out_ = u;
          result = 1;
        }
      }
    }
    for (std::int64_t u = second; u != join_; u = parent_[u]) {
      if (pred_dir_[u] == kDown) {
        const double d = flow_[pred_[u]];
        if (d <= delta_) {
          delta_ = d;
          u_out_ = u;
          result = 2;
        }
      }
    }
    if (result == 0) throw std::logic_error("network simplex: unbounded cycle");
    if (result == 1) {
      u_in_ = first;
      v_in_ = second;
    } else {
      u_in_ = second;
      v_in_ = first;
    }
  }

  void change_flow() {
    if (delta_ > 0.0) {
      const double val = delta_;
      flow_[in_arc_] += val;
      for (std::int64_t u = source(in_arc_); u != join_; u = parent_[u]) flow_[pred_[u]] -= pred_dir_[u] * val;
      for (std::int64_t u = target(in_arc_); u != join_; u = parent_[u]) flow_[pred_[u]] += pred_dir_[u] * val;
    }
    state_[in_arc_] = kTree;
    flow_[pred_[u_out_]] = 0.0;
    state_[pred_[u_out_]] = kLower;
  }

  void update_tree_structure() {
    const std::int64_t old_rev_thread = rev_thread_[u_out_];
    const std::int64_t old_succ_num = succ_num_[u_out_];
    const std::int64_t old_last_succ = last_succ_[u_out_];
    v_out_ = parent_[u_out_];

    if (u_in_ == u_out_) {
      parent_[u_in_] = v_in_;
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source(in_arc_) ? kUp : kDown;
      if (thread_[v_in_] != u_out_) {
        std::int64_t after = thread_[old_last_succ];
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
        after = thread_[v_in_];
        thread_[v_in_] = u_out_;
        rev_thread_[u_out_] = v_in_;
        thread_[old_last_succ] = after;
        rev_thread_[after] = old_last_succ;
      }
    } else {
      const std::int64_t thread_continue = old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];

      std::int64_t stem = u_in_;
      std::int64_t par_stem = v_in_;
      std::int64_t next_stem;
      std::int64_t last = last_succ_[u_in_];
      std::int64_t before;
      std::int64_t after = thread_[last];
      thread_[v_in_] = u_in_;
      dirty_revs_.clear();
      dirty_revs_.push_back(v_in_);
      while (stem != u_out_) {
        next_stem = parent_[stem];
        thread_[last] = next_stem;
        dirty_revs_.push_back(last);

        before = rev_thread_[stem];
        thread_[before] = after;
        rev_thread_[after] = before;

        parent_[stem] = par_stem;
        par_stem = stem;
        stem = next_stem;

        last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
        after = thread_[last];
      }
      parent_[u_out_] = par_stem;
      thread_[last] = thread_continue;
      rev_thread_[thread_continue] = last;
      last_succ_[u_out_] = last;

      if (old_rev_thread != v_in_) {
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
      }
      for (std::int64_t u : dirty_revs_) rev_thread_[thread_[u]] = u;

      std::int64_t tmp_sc = 0;
      const std::int64_t tmp_ls = last_succ_[u_out_];
      for (std::int64_t u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
        pred_[u] = pred_[p];
        pred_dir_[u] = static_cast<std::int8_t>(-pred_dir_[p]);
        tmp_sc += succ_num_[u] - succ_num_[p];
        succ_num_[u] = tmp_sc;
        last_succ_[p] = tmp_ls;
      }
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source(in_arc_) ? kUp : kDown;
      succ_num_[u_in_] = old_succ_num;
    }

    const std::int64_t up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
    const std::int64_t last_succ_out = last_succ_[u_out_];
    for (std::int64_t u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) last_succ_[u] = last_succ_out;

    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
      for (std::int64_t u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
        last_succ_[u] = old_rev_thread;
      }
    } else if (last_succ_out != old_last_succ) {
      for (std::int64_t u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
        last_succ_[u] = last_succ_out;
      }
    }

    for (std::int64_t u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
    for (std::int64_t u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
  }

  void update_potential() {
    const double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost(in_arc_);
    const std::int64_t end = thread_[last_succ_[u_in_]];
    for (std::int64_t u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
  }

  const double* cost_;
  std::size_t rows_;
  std::size_t cols_;
  std::int64_t node_num_ = 0;
  std::int64_t arc_num_ = 0;
  std::int64_t all_arc_num_ = 0;
  std::int64_t root_ = 0;
  double art_cost_ = 0.0;
  double eps_ = 0.0;
  std::int64_t block_size_ = 10;
  std::int64_t next_arc_ = 0;

  std::vector<double> supply_;
  std::vector<std::int64_t> parent_, pred_, thread_, rev_thread_, succ_num_, last_succ_, dirty_revs_;
  std::vector<std::int8_t> pred_dir_;
  std::vector<double> pi_;
  std::vector<double> flow_;
  std::vector<std::int8_t> state_;
  std::vector<std::int64_t> art_source_, art_target_;
  std::vector<double> art_cost_arc_;

  std::int64_t in_arc_ = 0, join_ = 0, u_in_ = 0, v_in_ = 0, u_out_ = 0, v_out_ = 0;
  double delta_ = 0.0;
};

}  // namespace

std::vector<FlowEntry> network_simplex(const double* cost, std::size_t rows, std::size_t cols,
                                       const double* supply, const double* demand) {
  if (rows == 0 || cols == 0) return {};
  Solver solver(cost, rows, cols, supply, demand);
  return solver.run();
}

}  // namespace heis::detail
