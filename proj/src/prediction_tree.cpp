#include "specinterp/prediction_tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "specinterp/error.hpp"
#include "specinterp/predictor.hpp"

namespace si {

namespace {

TreeNode other_node(double mass, std::size_t depth) {
  TreeNode n;
  n.kind = NodeKind::Other;
  n.path_p = mass;
  n.depth = depth;
  return n;
}

// Appends Named children for `ps` and the Other child holding the rest of
// `mass`.
void attach_children(TreeNode& node, const std::optional<PredictionSet>& ps, double mass, std::size_t depth) {
  double named = 0.0;
  if (ps) {
    for (const auto& pred : ps->items) {
      TreeNode c;
      c.kind = NodeKind::Named;
      c.edge = pred.continuation;
      c.path_p = pred.p * mass;
      c.translation = pred.translation;
      c.complete = pred.complete;
      c.depth = depth;
      named += c.path_p;
      node.children.push_back(std::move(c));
    }
  }
  node.children.push_back(other_node(std::max(0.0, mass - named), depth));
}

struct AdvanceStats {
  std::size_t rejected = 0;
  std::size_t exhausted = 0;
};

// Returns whether `node` stays consistent with `token`.
bool filter(TreeNode& node, const Token& token, AdvanceStats& stats, bool is_root) {
  if (!node.named()) return true;
  if (!is_root && !node.fully_consumed()) {
    if (node.edge[node.edge_pos] != token) {
      ++stats.rejected;
      return false;
    }
    ++node.edge_pos;
    return true;
  }
  if (node.leaf()) {
    if (node.complete) {
      ++stats.rejected;
      return false;
    }
    ++stats.exhausted;
    node.kind = NodeKind::Other;
    node.edge.clear();
    node.edge_pos = 0;
    node.translation.clear();
    return true;
  }
  std::vector<TreeNode> kept;
  double other = 0.0;
  bool has_other = false;
  for (auto& c : node.children) {
    if (!filter(c, token, stats, false)) continue;
    if (c.named()) {
      kept.push_back(std::move(c));
    } else {
      other += c.path_p;
      has_other = true;
    }
  }
  if (has_other) kept.push_back(other_node(other, node.depth + 1));
  node.children = std::move(kept);
  return !node.children.empty();
}

double sum_leaves(const TreeNode& node) {
  if (node.leaf()) return node.path_p;
  double s = 0.0;
  for (const auto& c : node.children) s += sum_leaves(c);
  return s;
}

// Scales leaf masses by `factor` and recomputes internal masses bottom-up.
double rescale(TreeNode& node, double factor) {
  if (node.leaf()) {
    node.path_p *= factor;
    return node.path_p;
  }
  double s = 0.0;
  for (auto& c : node.children) s += rescale(c, factor);
  node.path_p = s;
  return s;
}

std::size_t count_named_leaves(const TreeNode& node) {
  if (node.leaf()) return node.named() ? 1 : 0;
  std::size_t n = 0;
  for (const auto& c : node.children) n += count_named_leaves(c);
  return n;
}

void collapse(PredictionTree& tree) {
  tree.root.children.clear();
  tree.root.children.push_back(other_node(1.0, 1));
  tree.root.path_p = 1.0;
}

TreeNode& mutable_node(PredictionTree& tree, const NodePath& path) {
  TreeNode* n = &tree.root;
  for (std::size_t idx : path) {
    if (idx >= n->children.size()) throw std::out_of_range("node path out of range");
    n = &n->children[idx];
  }
  return *n;
}

void collect_expandable(const TreeNode& node, NodePath& path, std::size_t max_depth, bool is_root,
                        std::vector<NodePath>& out) {
  if (!is_root && node.named() && node.leaf() && node.fully_consumed() && !node.complete && node.depth < max_depth) {
    out.push_back(path);
  }
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    path.push_back(i);
    collect_expandable(node.children[i], path, max_depth, false, out);
    path.pop_back();
  }
}

void prune_node(TreeNode& node, double epsilon, std::size_t k) {
  if (node.leaf()) return;
  double folded = 0.0;
  std::vector<TreeNode> named;
  std::vector<TreeNode> others;
  for (auto& c : node.children) {
    if (!c.named()) {
      others.push_back(std::move(c));
    } else if (c.path_p < epsilon) {
      folded += c.path_p;
    } else {
      named.push_back(std::move(c));
    }
  }
  if (named.size() > k) {
    std::vector<std::size_t> order(named.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (named[a].path_p != named[b].path_p) return named[a].path_p > named[b].path_p;
      return named[a].edge < named[b].edge;
    });
    std::vector<bool> keep(named.size(), false);
    for (std::size_t i = 0; i < k; ++i) keep[order[i]] = true;
    std::vector<TreeNode> kept;
    for (std::size_t i = 0; i < named.size(); ++i) {
      if (keep[i]) {
        kept.push_back(std::move(named[i]));
      } else {
        folded += named[i].path_p;
      }
    }
    named = std::move(kept);
  }
  node.children = std::move(named);
  double other = folded;
  for (const auto& o : others) other += o.path_p;
  node.children.push_back(other_node(other, node.depth + 1));
  for (auto& c : node.children) prune_node(c, epsilon, k);
}

void collect_hypotheses(const TreeNode& node, bool is_root, std::vector<Hypothesis>& out) {
  if (node.leaf()) {
    if (node.named() && !is_root) out.push_back({node.translation, node.path_p, node.complete});
    return;
  }
  for (const auto& c : node.children) collect_hypotheses(c, false, out);
}

std::string join(const Tokens& toks) {
  std::string s;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) s += ' ';
    s += toks[i];
  }
  return s;
}

void check_node(const TreeNode& node, double tol, const std::string& where, std::vector<std::string>& out) {
  if (node.path_p < -tol || node.path_p > 1.0 + tol) out.push_back(where + ": path_p outside [0,1]");
  if (node.edge_pos > node.edge.size()) out.push_back(where + ": edge_pos past edge end");
  if (node.leaf()) return;
  std::size_t others = 0;
  double sum = 0.0;
  for (const auto& c : node.children) {
    sum += c.path_p;
    if (!c.named()) ++others;
  }
  if (others != 1) out.push_back(where + ": expected exactly one Other child");
  if (std::abs(sum - node.path_p) > tol) out.push_back(where + ": children mass differs from node mass");
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    check_node(node.children[i], tol, where + "/" + std::to_string(i), out);
  }
}

void render_node(const TreeNode& node, std::size_t indent, std::string& out) {
  char mass[32];
  std::snprintf(mass, sizeof mass, "%.4f", node.path_p);
  out.append(indent * 2, ' ');
  if (!node.named()) {
    out += "* ";
    out += mass;
  } else {
    out += join(node.edge);
    out += " (" + std::to_string(node.edge_pos) + "/" + std::to_string(node.edge.size()) + ") ";
    out += mass;
    if (!node.complete) out += " open";
    out += " => " + join(node.translation);
  }
  out += '\n';
  for (const auto& c : node.children) render_node(c, indent + 1, out);
}

}  // namespace

PredictionTree build_tree(const Tokens& prefix, const std::optional<PredictionSet>& ps) {
  PredictionTree tree;
  tree.root.kind = NodeKind::Named;
  tree.root.path_p = 1.0;
  tree.root.complete = false;
  tree.anchor_len = prefix.size();
  tree.observed_prefix = prefix;
  attach_children(tree.root, ps, 1.0, 1);
  return tree;
}

MatchOutcome advance(PredictionTree& tree, std::size_t position, const Token& token) {
  if (position != tree.observed_prefix.size()) {
    throw Error(ErrorKind::OutOfOrderToken, "advance: expected position " +
                                                std::to_string(tree.observed_prefix.size()) + ", got " +
                                                std::to_string(position));
  }
  tree.observed_prefix.push_back(token);
  AdvanceStats stats;
  filter(tree.root, token, stats, true);

  MatchOutcome out;
  out.named_survivors = count_named_leaves(tree.root);
  const double total = sum_leaves(tree.root);
  if (out.named_survivors > 0 && total > 0.0) {
    out.kind = MatchKind::Matched;
    rescale(tree.root, 1.0 / total);
    return out;
  }
  out.named_survivors = 0;
  out.kind = (stats.rejected > 0 && stats.exhausted == 0) ? MatchKind::Diverged : MatchKind::Idle;
  collapse(tree);
  return out;
}

bool expand(PredictionTree& tree, const NodePath& path, const std::optional<PredictionSet>& ps,
            std::size_t max_depth) {
  if (path.empty()) return false;
  TreeNode& node = mutable_node(tree, path);
  if (!node.named() || !node.leaf() || !node.fully_consumed() || node.complete || node.depth >= max_depth) {
    return false;
  }
  attach_children(node, ps, node.path_p, node.depth + 1);
  return true;
}

bool expand(PredictionTree& tree, const NodePath& path, const Predictor& predictor, const ContextDoc& context,
            std::size_t k, std::size_t max_depth) {
  const auto candidates = expandable_leaves(tree, max_depth);
  if (std::find(candidates.begin(), candidates.end(), path) == candidates.end()) return false;
  return expand(tree, path, predictor.predict(context, tree.observed_prefix, k), max_depth);
}

std::vector<NodePath> expandable_leaves(const PredictionTree& tree, std::size_t max_depth) {
  std::vector<NodePath> out;
  NodePath path;
  collect_expandable(tree.root, path, max_depth, true, out);
  return out;
}

void prune(PredictionTree& tree, double epsilon, std::size_t k) { prune_node(tree.root, epsilon, k); }

std::vector<Hypothesis> leaf_hypotheses(const PredictionTree& tree) {
  std::vector<Hypothesis> out;
  collect_hypotheses(tree.root, true, out);
  std::stable_sort(out.begin(), out.end(), [](const Hypothesis& a, const Hypothesis& b) {
    if (a.mass != b.mass) return a.mass > b.mass;
    return a.translation < b.translation;
  });
  return out;
}

double total_mass(const PredictionTree& tree) { return sum_leaves(tree.root); }

std::size_t named_leaf_count(const PredictionTree& tree) {
  return tree.root.leaf() ? 0 : count_named_leaves(tree.root);
}

const TreeNode& node_at(const PredictionTree& tree, const NodePath& path) {
  const TreeNode* n = &tree.root;
  for (std::size_t idx : path) {
    if (idx >= n->children.size()) throw std::out_of_range("node path out of range");
    n = &n->children[idx];
  }
  return *n;
}

std::vector<std::string> check_tree(const PredictionTree& tree, double tol) {
  std::vector<std::string> out;
  if (std::abs(tree.root.path_p - 1.0) > tol) out.emplace_back("root mass is not 1");
  if (std::abs(total_mass(tree) - 1.0) > tol) out.emplace_back("total leaf mass is not 1");
  if (tree.root.leaf()) out.emplace_back("root has no children");
  check_node(tree.root, tol, "root", out);
  return out;
}

std::string render(const PredictionTree& tree) {
  std::string out = "(root) ";
  Tokens anchor(tree.observed_prefix.begin(),
                tree.observed_prefix.begin() + static_cast<std::ptrdiff_t>(tree.anchor_len));
  out += join(anchor);
  out += '\n';
  for (const auto& c : tree.root.children) render_node(c, 1, out);
  return out;
}

}  // namespace si
