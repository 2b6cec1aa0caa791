#pragma once

#include <algorithm>
#include <array>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "aircep/core.hpp"
#include "aircep/ingest.hpp"
#include "aircep/rules.hpp"

namespace aircep {

struct LabeledRow {
  std::array<double, kPollutantCount> readings;
  Category label;
};

struct MiningParams {
  int max_depth = 6;
  std::size_t min_leaf = 20;
  double holdout_fraction = 0.2;
  unsigned seed = 42;
};

/// Binary axis-aligned decision tree; left holds rows with value <= threshold.
struct DecisionNode {
  bool leaf = true;
  Pollutant pollutant = Pollutant::PM25;
  double threshold = 0;
  std::unique_ptr<DecisionNode> left, right;
  Category label = Category::Good;
  std::size_t sample_count = 0;
  std::array<std::size_t, kCategoryCount> label_distribution{};
};

struct MiningResult {
  std::unique_ptr<DecisionNode> tree;
  RuleSet rules;
  std::optional<double> holdout_accuracy;
  std::size_t train_count = 0;
  std::size_t holdout_count = 0;
};

inline Category predict(const DecisionNode& node, const std::array<double, kPollutantCount>& readings) {
  const DecisionNode* n = &node;
  while (!n->leaf)
    n = (readings[static_cast<int>(n->pollutant)] <= n->threshold) ? n->left.get() : n->right.get();
  return n->label;
}

namespace mining_detail {

inline double gini(const std::array<std::size_t, kCategoryCount>& counts, std::size_t total) {
  if (total == 0) return 0;
  double sum = 0;
  for (std::size_t c : counts) {
    double p = static_cast<double>(c) / static_cast<double>(total);
    sum += p * p;
  }
  return 1.0 - sum;
}

inline Category majority(const std::array<std::size_t, kCategoryCount>& counts) {
  int best = 0;
  for (int i = 1; i < kCategoryCount; ++i)
    if (counts[i] > counts[best]) best = i;
  return static_cast<Category>(best);
}

struct Split {
  Pollutant pollutant;
  double threshold;
  double weighted_gini;
};

/// Best split over midpoint candidates; ties keep the first candidate in
/// (pollutant canonical order, ascending threshold) order.
inline std::optional<Split> best_split(const std::vector<const LabeledRow*>& rows,
                                       std::size_t min_leaf) {
  std::array<std::size_t, kCategoryCount> total_counts{};
  for (auto* r : rows) ++total_counts[static_cast<int>(r->label)];
  const std::size_t n = rows.size();
  const double parent = gini(total_counts, n);
  std::optional<Split> best;
  std::vector<std::pair<double, Category>> vals;
  vals.reserve(n);
  for (int pi = 0; pi < kPollutantCount; ++pi) {
    vals.clear();
    for (auto* r : rows) vals.emplace_back(r->readings[pi], r->label);
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::array<std::size_t, kCategoryCount> left_counts{};
    std::size_t left_n = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left_counts[static_cast<int>(vals[i].second)];
      ++left_n;
      if (vals[i].first == vals[i + 1].first) continue;
      if (left_n < min_leaf || n - left_n < min_leaf) continue;
      std::array<std::size_t, kCategoryCount> right_counts;
      for (int c = 0; c < kCategoryCount; ++c) right_counts[c] = total_counts[c] - left_counts[c];
      double w = (static_cast<double>(left_n) * gini(left_counts, left_n) +
                  static_cast<double>(n - left_n) * gini(right_counts, n - left_n)) /
                 static_cast<double>(n);
      if (w >= parent) continue;
      if (!best || w < best->weighted_gini)
        best = Split{static_cast<Pollutant>(pi), (vals[i].first + vals[i + 1].first) / 2.0, w};
    }
  }
  return best;
}

inline std::unique_ptr<DecisionNode> grow(const std::vector<const LabeledRow*>& rows, int depth,
                                          const MiningParams& params) {
  auto node = std::make_unique<DecisionNode>();
  node->sample_count = rows.size();
  for (auto* r : rows) ++node->label_distribution[static_cast<int>(r->label)];
  node->label = majority(node->label_distribution);
  if (depth >= params.max_depth) return node;
  auto split = best_split(rows, params.min_leaf);
  if (!split) return node;
  std::vector<const LabeledRow*> lhs, rhs;
  for (auto* r : rows)
    (r->readings[static_cast<int>(split->pollutant)] <= split->threshold ? lhs : rhs).push_back(r);
  node->leaf = false;
  node->pollutant = split->pollutant;
  node->threshold = split->threshold;
  node->left = grow(lhs, depth + 1, params);
  node->right = grow(rhs, depth + 1, params);
  return node;
}

/// Reduced-error pruning: post-order collapse whenever the collapsed leaf
/// misclassifies no more holdout rows than the subtree does. Returns the
/// subtree's holdout error count after pruning.
inline std::size_t prune(DecisionNode& node, const std::vector<const LabeledRow*>& holdout) {
  std::size_t leaf_errors = 0;
  for (auto* r : holdout)
    if (r->label != node.label) ++leaf_errors;
  if (node.leaf) return leaf_errors;
  std::vector<const LabeledRow*> lhs, rhs;
  for (auto* r : holdout)
    (r->readings[static_cast<int>(node.pollutant)] <= node.threshold ? lhs : rhs).push_back(r);
  std::size_t subtree_errors = prune(*node.left, lhs) + prune(*node.right, rhs);
  if (leaf_errors <= subtree_errors) {
    node.leaf = true;
    node.left.reset();
    node.right.reset();
    return leaf_errors;
  }
  return subtree_errors;
}

struct PathBounds {
  std::array<std::optional<double>, kPollutantCount> lower;  // pollutant > v
  std::array<std::optional<double>, kPollutantCount> upper;  // pollutant <= v
};

inline void extract(const DecisionNode& node, PathBounds bounds, RuleSet& rs) {
  if (node.leaf) {
    Rule r;
    r.name = "r" + std::to_string(rs.rules.size() + 1);
    r.category = node.label;
    for (int pi = 0; pi < kPollutantCount; ++pi) {
      if (bounds.lower[pi])
        r.conditions.push_back(
            Condition{static_cast<Pollutant>(pi), Comparator::Gt, *bounds.lower[pi]});
      if (bounds.upper[pi])
        r.conditions.push_back(
            Condition{static_cast<Pollutant>(pi), Comparator::Le, *bounds.upper[pi]});
    }
    if (r.conditions.empty())
      r.conditions.push_back(Condition{Pollutant::PM25, Comparator::Ge, 0});
    rs.rules.push_back(std::move(r));
    return;
  }
  int pi = static_cast<int>(node.pollutant);
  PathBounds lhs = bounds;
  if (!lhs.upper[pi] || node.threshold < *lhs.upper[pi]) lhs.upper[pi] = node.threshold;
  extract(*node.left, std::move(lhs), rs);
  PathBounds rhs = bounds;
  if (!rhs.lower[pi] || node.threshold > *rhs.lower[pi]) rhs.lower[pi] = node.threshold;
  extract(*node.right, std::move(rhs), rs);
}

}  // namespace mining_detail

inline MiningResult mine_rules(const std::vector<LabeledRow>& records, const MiningParams& params = {}) {
  if (records.size() < 2) throw DomainError("mining requires at least 2 labeled records");
  if (params.max_depth < 0 || params.min_leaf == 0 || params.holdout_fraction < 0 ||
      params.holdout_fraction >= 1)
    throw DomainError("invalid mining parameters");
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937 rng(params.seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t holdout_n =
      static_cast<std::size_t>(static_cast<double>(records.size()) * params.holdout_fraction);
  std::vector<const LabeledRow*> holdout, train;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < holdout_n ? holdout : train).push_back(&records[order[i]]);
  if (train.empty()) throw DomainError("holdout fraction leaves no training records");

  MiningResult result;
  result.train_count = train.size();
  result.holdout_count = holdout.size();
  result.tree = mining_detail::grow(train, 0, params);
  if (!holdout.empty()) {
    std::size_t errors = mining_detail::prune(*result.tree, holdout);
    result.holdout_accuracy =
        1.0 - static_cast<double>(errors) / static_cast<double>(holdout.size());
  }
  mining_detail::extract(*result.tree, mining_detail::PathBounds{}, result.rules);
  return result;
}

/// Rows with a ground-truth bucket label become training records; readings
/// come from the imputed dataset, labels are never imputed.
inline std::vector<LabeledRow> labeled_rows(const Dataset& dataset) {
  if (!dataset.imputed()) throw ContractError("labeled_rows requires an imputed dataset");
  std::vector<LabeledRow> rows;
  for (const RawRecord& rec : dataset.records) {
    if (!rec.aqi_bucket) continue;
    auto cat = parse_category(*rec.aqi_bucket);
    if (!cat) throw DomainError("unknown label text '" + *rec.aqi_bucket + "'");
    LabeledRow row;
    for (int pi = 0; pi < kPollutantCount; ++pi) row.readings[pi] = *rec.readings[pi];
    row.label = *cat;
    rows.push_back(row);
  }
  return rows;
}

inline void print_tree(const DecisionNode& node, std::string& out, int indent = 0) {
  out.append(static_cast<std::size_t>(indent) * 2, ' ');
  if (node.leaf) {
    out += "LEAF " + std::string(category_name(node.label)) +
           " n=" + std::to_string(node.sample_count) + "\n";
    return;
  }
  out += "SPLIT " + std::string(pollutant_name(node.pollutant)) + " <= " +
         format_double(node.threshold) + "\n";
  print_tree(*node.left, out, indent + 1);
  print_tree(*node.right, out, indent + 1);
}

inline std::string print_tree(const DecisionNode& node) {
  std::string out;
  print_tree(node, out);
  return out;
}

}  // namespace aircep
