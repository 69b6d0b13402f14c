#include "oste/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oste/error.hpp"
#include "oste/estimators.hpp"
#include "oste/logrank.hpp"

namespace oste {
namespace {

// Per-node event bookkeeping. reach[i] is the number of node event times
// <= member i's time, i.e. member i is at risk at times [0, reach[i]).
struct NodeEvents {
  detail::LogrankTable pooled;
  std::vector<std::size_t> reach;
  std::vector<char> event;
};

NodeEvents tabulate_node(const SurvivalDataset& ds, const IndexSet& members) {
  std::vector<double> times;
  for (auto row : members) {
    if (ds.outcome(row).event) {
      times.push_back(ds.outcome(row).time);
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  const std::size_t J = times.size();
  NodeEvents ne;
  ne.pooled.deaths.assign(J, 0.0);
  ne.pooled.at_risk.assign(J, 0.0);
  ne.reach.reserve(members.size());
  ne.event.reserve(members.size());
  std::vector<double> reach_count(J + 1, 0.0);
  for (auto row : members) {
    const auto& o = ds.outcome(row);
    const auto r = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), o.time) - times.begin());
    ne.reach.push_back(r);
    ne.event.push_back(o.event ? 1 : 0);
    reach_count[r] += 1.0;
    if (o.event) {
      ne.pooled.deaths[r - 1] += 1.0;
    }
  }
  double running = 0.0;
  for (std::size_t j = J; j-- > 0;) {
    running += reach_count[j + 1];
    ne.pooled.at_risk[j] = running;
  }
  return ne;
}

// Deaths and reach histogram of one side of a candidate split.
class GroupCounts {
 public:
  explicit GroupCounts(std::size_t J) : reach_count_(J + 1, 0.0), deaths_(J, 0.0), at_risk_(J, 0.0) {}

  void add(const NodeEvents& ne, std::size_t pos) {
    reach_count_[ne.reach[pos]] += 1.0;
    if (ne.event[pos]) {
      deaths_[ne.reach[pos] - 1] += 1.0;
    }
    ++size_;
  }

  void add(const GroupCounts& other) {
    for (std::size_t k = 0; k < reach_count_.size(); ++k) {
      reach_count_[k] += other.reach_count_[k];
    }
    for (std::size_t j = 0; j < deaths_.size(); ++j) {
      deaths_[j] += other.deaths_[j];
    }
    size_ += other.size_;
  }

  void clear() {
    std::fill(reach_count_.begin(), reach_count_.end(), 0.0);
    std::fill(deaths_.begin(), deaths_.end(), 0.0);
    size_ = 0;
  }

  std::size_t size() const { return size_; }

  double statistic(const NodeEvents& ne) {
    double running = 0.0;
    for (std::size_t j = deaths_.size(); j-- > 0;) {
      running += reach_count_[j + 1];
      at_risk_[j] = running;
    }
    return detail::logrank_from_counts(ne.pooled, deaths_, at_risk_);
  }

 private:
  std::vector<double> reach_count_;
  std::vector<double> deaths_;
  std::vector<double> at_risk_;
  std::size_t size_ = 0;
};

struct Candidate {
  double statistic = 0.0;
  std::optional<SplitRule> rule;
};

class SplitSearch {
 public:
  SplitSearch(const SurvivalDataset& ds, const IndexSet& members, std::size_t min_node_size)
      : ds_(ds), members_(members), min_(min_node_size), events_(tabulate_node(ds, members)) {}

  // Candidates replace the incumbent only on a strictly larger statistic, so
  // visiting features in ascending order yields the documented tie-break.
  void consider(std::size_t feature) {
    if (ds_.schema()[feature].kind == FeatureKind::categorical) {
      consider_categorical(feature);
    } else {
      consider_ordered(feature);
    }
  }

  const Candidate& best() const { return best_; }

 private:
  void offer(double statistic, std::size_t feature, std::variant<NumericSplit, CategoricalSplit> test) {
    if (statistic > best_.statistic) {
      best_.statistic = statistic;
      best_.rule = SplitRule{feature, std::move(test)};
    }
  }

  bool admissible(std::size_t left_size) const {
    return left_size >= min_ && members_.size() - left_size >= min_;
  }

  void consider_ordered(std::size_t feature) {
    const std::size_t m = members_.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto value = [&](std::size_t pos) { return ds_.value(members_[pos], feature); };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value(a) < value(b); });

    GroupCounts left(events_.pooled.size());
    for (std::size_t k = 0; k < m;) {
      const double v = value(order[k]);
      for (; k < m && value(order[k]) == v; ++k) {
        left.add(events_, order[k]);
      }
      if (k == m || m - left.size() < min_) {
        break;
      }
      if (!admissible(left.size())) {
        continue;
      }
      const double next = value(order[k]);
      double threshold = v + (next - v) / 2.0;
      if (!(threshold < next)) {
        threshold = v;
      }
      offer(left.statistic(events_), feature, NumericSplit{threshold});
    }
  }

  void consider_categorical(std::size_t feature) {
    // Levels present at this node, by level index.
    std::vector<std::uint32_t> levels;
    for (auto row : members_) {
      levels.push_back(static_cast<std::uint32_t>(ds_.value(row, feature)));
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    const std::size_t L = levels.size();
    if (L < 2) {
      return;
    }

    const std::size_t J = events_.pooled.size();
    std::vector<GroupCounts> per_level(L, GroupCounts(J));
    std::vector<double> time_sum(L, 0.0);
    for (std::size_t pos = 0; pos < members_.size(); ++pos) {
      const auto level = static_cast<std::uint32_t>(ds_.value(members_[pos], feature));
      const auto local = static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), level) - levels.begin());
      per_level[local].add(events_, pos);
      time_sum[local] += ds_.outcome(members_[pos]).time;
    }

    auto make_rule = [&](const std::vector<char>& goes_left, std::size_t left_size) {
      CategoricalSplit split;
      for (std::size_t l = 0; l < L; ++l) {
        (goes_left[l] ? split.left_levels : split.right_levels).push_back(levels[l]);
      }
      split.unseen_left = 2 * left_size >= members_.size();
      return split;
    };

    GroupCounts left(J);
    std::vector<char> goes_left(L, 0);
    if (L <= kMaxExhaustiveLevels) {
      // The last present level always goes right, so each partition is seen once.
      const std::uint32_t limit = 1u << (L - 1);
      for (std::uint32_t mask = 1; mask < limit; ++mask) {
        left.clear();
        for (std::size_t l = 0; l < L; ++l) {
          goes_left[l] = (mask >> l) & 1u;
          if (goes_left[l]) {
            left.add(per_level[l]);
          }
        }
        if (!admissible(left.size())) {
          continue;
        }
        const double stat = left.statistic(events_);
        if (stat > best_.statistic) {
          offer(stat, feature, make_rule(goes_left, left.size()));
        }
      }
      return;
    }

    std::vector<std::size_t> order(L);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return time_sum[a] / static_cast<double>(per_level[a].size()) <
             time_sum[b] / static_cast<double>(per_level[b].size());
    });
    for (std::size_t k = 0; k + 1 < L; ++k) {
      left.add(per_level[order[k]]);
      goes_left[order[k]] = 1;
      if (!admissible(left.size())) {
        continue;
      }
      const double stat = left.statistic(events_);
      if (stat > best_.statistic) {
        offer(stat, feature, make_rule(goes_left, left.size()));
      }
    }
  }

  const SurvivalDataset& ds_;
  const IndexSet& members_;
  std::size_t min_;
  NodeEvents events_;
  Candidate best_;
};

std::vector<std::size_t> draw_features(std::size_t d, std::size_t mtry, Rng& rng) {
  std::vector<std::size_t> features(d);
  std::iota(features.begin(), features.end(), std::size_t{0});
  for (std::size_t i = 0; i < mtry; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, d - 1);
    std::swap(features[i], features[pick(rng)]);
  }
  features.resize(mtry);
  std::sort(features.begin(), features.end());
  return features;
}

}  // namespace

bool SplitRule::goes_left(double value) const {
  if (const auto* numeric = std::get_if<NumericSplit>(&test)) {
    return value <= numeric->threshold;
  }
  const auto& cat = std::get<CategoricalSplit>(test);
  const auto level = static_cast<std::uint32_t>(value);
  if (std::binary_search(cat.left_levels.begin(), cat.left_levels.end(), level)) {
    return true;
  }
  if (std::binary_search(cat.right_levels.begin(), cat.right_levels.end(), level)) {
    return false;
  }
  return cat.unseen_left;
}

SurvivalTree::SurvivalTree(std::vector<TreeNode> nodes, IndexSet in_bag, IndexSet oob, TreeParams params,
                           std::uint64_t seed)
    : nodes_(std::move(nodes)), in_bag_(std::move(in_bag)), oob_(std::move(oob)), params_(params), seed_(seed) {
  if (nodes_.empty()) {
    throw ValidationError("a survival tree needs at least one node");
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    if (!node.is_leaf() && (node.left <= i || node.right <= i || node.left >= nodes_.size() ||
                            node.right >= nodes_.size())) {
      throw ValidationError("tree node " + std::to_string(i) + " has invalid children");
    }
  }
}

std::size_t SurvivalTree::num_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t SurvivalTree::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes_[i].is_leaf()) {
      level[nodes_[i].left] = level[i] + 1;
      level[nodes_[i].right] = level[i] + 1;
    }
  }
  return deepest;
}

std::size_t SurvivalTree::leaf_index(std::span<const double> x) const {
  std::size_t id = 0;
  while (!nodes_[id].is_leaf()) {
    const auto& rule = *nodes_[id].rule;
    id = rule.goes_left(x[rule.feature]) ? nodes_[id].left : nodes_[id].right;
  }
  return id;
}

double mortality(const StepFunction& survival, std::span<const double> grid) {
  double total = 0.0;
  for (double s : survival.evaluate(grid)) {
    total -= std::log(std::max(s, kMortalityFloor));
  }
  return total;
}

double SurvivalTree::predict_mortality(std::span<const double> x, std::span<const double> grid) const {
  return mortality(predict_curve(x), grid);
}

std::vector<double> SurvivalTree::node_mortality(std::span<const double> grid) const {
  std::vector<double> out(nodes_.size(), 0.0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].is_leaf()) {
      out[i] = mortality(nodes_[i].curve, grid);
    }
  }
  return out;
}

SurvivalTree grow_tree(const SurvivalDataset& ds, BootstrapSample sample, const TreeParams& params,
                       std::uint64_t seed) {
  const std::size_t d = ds.num_features();
  if (params.mtry < 1 || params.mtry > d) {
    throw GrowthError("mtry must lie in [1, " + std::to_string(d) + "], got " + std::to_string(params.mtry));
  }
  if (params.min_node_size < 1) {
    throw GrowthError("min_node_size must be >= 1");
  }
  if (ds.num_events(sample.in_bag) == 0) {
    throw GrowthError("in-bag sample contains no events");
  }

  Rng rng(seed);
  std::vector<TreeNode> nodes(1);
  struct Pending {
    std::size_t id;
    IndexSet members;
  };
  std::vector<Pending> stack;
  stack.push_back({0, sample.in_bag});

  while (!stack.empty()) {
    Pending work = std::move(stack.back());
    stack.pop_back();
    nodes[work.id].size = work.members.size();

    std::optional<SplitRule> rule;
    if (work.members.size() >= 2 * params.min_node_size && ds.num_events(work.members) > 0) {
      SplitSearch search(ds, work.members, params.min_node_size);
      for (auto feature : draw_features(d, params.mtry, rng)) {
        search.consider(feature);
      }
      rule = search.best().rule;
    }

    if (!rule) {
      nodes[work.id].curve = kaplan_meier(ds.outcomes(work.members));
      continue;
    }

    IndexSet left;
    IndexSet right;
    for (auto row : work.members) {
      (rule->goes_left(ds.value(row, rule->feature)) ? left : right).push_back(row);
    }
    const std::size_t left_id = nodes.size();
    nodes[work.id].rule = std::move(rule);
    nodes[work.id].left = left_id;
    nodes[work.id].right = left_id + 1;
    nodes.resize(nodes.size() + 2);
    stack.push_back({left_id + 1, std::move(right)});
    stack.push_back({left_id, std::move(left)});
  }

  return SurvivalTree(std::move(nodes), std::move(sample.in_bag), std::move(sample.oob), params, seed);
}

}  // namespace oste
