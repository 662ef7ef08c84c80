#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "specinterp/prediction.hpp"
#include "specinterp/stream_model.hpp"

namespace si {

class Predictor;

enum class NodeKind { Named, Other };

// One hypothesis node. A Named node's edge is consumed one observed token
// at a time (edge_pos); only a fully consumed, open Named leaf can gain
// children. Every internal node has exactly one Other child, kept last.
struct TreeNode {
  NodeKind kind = NodeKind::Other;
  Tokens edge;
  std::size_t edge_pos = 0;
  double path_p = 0.0;
  Tokens translation;
  bool complete = true;
  /// Expansion round that created the node; the root is 0.
  std::size_t depth = 0;
  std::vector<TreeNode> children;

  bool named() const { return kind == NodeKind::Named; }
  bool leaf() const { return children.empty(); }
  bool fully_consumed() const { return edge_pos == edge.size(); }
};

/// Child indices from the root.
using NodePath = std::vector<std::size_t>;

struct PredictionTree {
  TreeNode root;
  /// Source prefix the tree was built at.
  std::size_t anchor_len = 0;
  /// Every source token of the utterance observed so far (anchor included).
  Tokens observed_prefix;
};

enum class MatchKind {
  Matched,   // at least one Named leaf survived
  Diverged,  // the token contradicted every Named leaf
  Idle,      // no Named leaf was contradicted; there was none, or all were exhausted
};

struct MatchOutcome {
  MatchKind kind = MatchKind::Idle;
  std::size_t named_survivors = 0;
};

/// A tree holding the Named children of `ps` and one Other child; nullopt gives an Other-only tree.
PredictionTree build_tree(const Tokens& prefix, const std::optional<PredictionSet>& ps);

// Conditions the tree on the next observed token. Surviving leaves are the
// Named leaves whose next edge token equals `token` plus every Other leaf;
// survivor masses are divided by their total. A fully consumed open leaf
// with no children is exhausted and turns into Other mass. Diverged and
// Idle collapse the tree to a single Other child of mass 1. Throws
// OutOfOrderToken unless position == observed_prefix.size().
MatchOutcome advance(PredictionTree& tree, std::size_t position, const Token& token);

// Gives the node at `path` children from `ps`, scaled to the node's mass.
// No-op (returns false) unless the node is a fully consumed, open Named
// leaf with depth < max_depth. nullopt adds a single Other child.
bool expand(PredictionTree& tree, const NodePath& path, const std::optional<PredictionSet>& ps,
            std::size_t max_depth);

/// Convenience: queries `predictor` on the observed prefix, then expands.
bool expand(PredictionTree& tree, const NodePath& path, const Predictor& predictor, const ContextDoc& context,
            std::size_t k, std::size_t max_depth);

/// Paths of every node that expand() would accept.
std::vector<NodePath> expandable_leaves(const PredictionTree& tree, std::size_t max_depth);

// Removes Named nodes below `epsilon` and all but the `k` heaviest Named
// children of each node (ties: lower edge first), folding their mass into
// the parent's Other child.
void prune(PredictionTree& tree, double epsilon, std::size_t k);

/// Named leaves as hypotheses, by mass descending then translation ascending.
std::vector<Hypothesis> leaf_hypotheses(const PredictionTree& tree);

double total_mass(const PredictionTree& tree);
std::size_t named_leaf_count(const PredictionTree& tree);
const TreeNode& node_at(const PredictionTree& tree, const NodePath& path);

/// Violated structural invariants (mass sums within `tol`, one Other per internal node, ...).
std::vector<std::string> check_tree(const PredictionTree& tree, double tol = 1e-9);

// Indented rendering, one node per line:
//   <edge tokens> (<edge_pos>/<len>) <mass, 4 decimals>[ open] => <translation>
// Other nodes render as "*"; the root line shows the anchor prefix.
std::string render(const PredictionTree& tree);

}  // namespace si
