// cosres/term.hpp — rational terms represented as finite cyclic term graphs.
//
// A rational term is a possibly infinite tree with finitely many distinct
// subtrees.  We store one as a rooted graph: a node table in which compound
// nodes may point back at their ancestors.  Two terms are equal when their
// rooted graphs are bisimilar, i.e. they unfold to the same tree.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cosres {

// Variable identity: source name plus rename generation.  Generation 0 is
// what the parser produces; clause renaming stamps fresh generations so that
// every clause use has variables unused anywhere else in the derivation.
struct Var {
  std::string name;
  std::uint32_t gen = 0;

  auto operator<=>(const Var&) const = default;

  // Display form round-trips through the parser: `X` for generation 0,
  // `X#3` for generation 3.
  std::string display() const {
    return gen == 0 ? name : name + "#" + std::to_string(gen);
  }
};

struct TermNode {
  bool is_var = false;
  std::string symbol;                    // variable name or functor
  std::uint32_t gen = 0;                 // variable generation; 0 for functors
  std::vector<std::uint32_t> children;   // empty for variables
};

class TermBuilder;

class RationalTerm {
 public:
  using NodeId = std::uint32_t;

  RationalTerm() : nodes_{TermNode{true, "_", 0, {}}} {}

  static RationalTerm variable(Var v) {
    RationalTerm t;
    t.nodes_ = {TermNode{true, std::move(v.name), v.gen, {}}};
    return t;
  }
  static RationalTerm variable(std::string name, std::uint32_t gen = 0) {
    return variable(Var{std::move(name), gen});
  }
  static RationalTerm atom(std::string functor) {
    RationalTerm t;
    t.nodes_ = {TermNode{false, std::move(functor), 0, {}}};
    return t;
  }
  static RationalTerm compound(const std::string& functor,
                               const std::vector<RationalTerm>& args);

  NodeId root() const { return root_; }
  std::size_t node_count() const { return nodes_.size(); }
  const TermNode& node(NodeId id) const { return nodes_[id]; }
  const std::vector<TermNode>& nodes() const { return nodes_; }

  bool root_is_var() const { return nodes_[root_].is_var; }
  Var root_var() const {
    const TermNode& n = nodes_[root_];
    if (!n.is_var) throw std::logic_error("root_var: root is a compound");
    return Var{n.symbol, n.gen};
  }
  const std::string& functor() const {
    const TermNode& n = nodes_[root_];
    if (n.is_var) throw std::logic_error("functor: root is a variable");
    return n.symbol;
  }
  std::size_t arity() const { return nodes_[root_].children.size(); }

  // Subgraph rooted at the i-th argument of the root.
  RationalTerm child(std::size_t i) const;
  // Subgraph rooted at an arbitrary node.
  RationalTerm slice(NodeId id) const;

 private:
  friend class TermBuilder;
  std::vector<TermNode> nodes_;
  NodeId root_ = 0;
};

// Builds term graphs, including cyclic ones, via placeholder nodes that are
// defined (or aliased to another node) after their id has been handed out.
class TermBuilder {
 public:
  std::uint32_t var(const Var& v) {
    nodes_.push_back(TermNode{true, v.name, v.gen, {}});
    defined_.push_back(true);
    alias_.push_back(kNoAlias);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }
  std::uint32_t var(std::string name, std::uint32_t gen = 0) {
    return var(Var{std::move(name), gen});
  }
  std::uint32_t compound(std::string functor, std::vector<std::uint32_t> children) {
    nodes_.push_back(TermNode{false, std::move(functor), 0, std::move(children)});
    defined_.push_back(true);
    alias_.push_back(kNoAlias);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }
  // Reserve an id to be filled in later; lets cycles refer to nodes that do
  // not exist yet.
  std::uint32_t forward() {
    nodes_.push_back(TermNode{});
    defined_.push_back(false);
    alias_.push_back(kNoAlias);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }
  void define(std::uint32_t id, std::string functor, std::vector<std::uint32_t> children) {
    if (defined_[id]) throw std::logic_error("TermBuilder: node defined twice");
    nodes_[id] = TermNode{false, std::move(functor), 0, std::move(children)};
    defined_[id] = true;
  }
  // Make `id` another name for `target` (used by mu-binders in the parser).
  void alias(std::uint32_t id, std::uint32_t target) {
    if (defined_[id]) throw std::logic_error("TermBuilder: aliasing a defined node");
    alias_[id] = target;
    defined_[id] = true;
  }

  // Extracts the term reachable from `root`.  Non-destructive: a builder can
  // emit several overlapping terms.
  RationalTerm build(std::uint32_t root) const;

 private:
  static constexpr std::uint32_t kNoAlias = UINT32_MAX;
  std::uint32_t resolve(std::uint32_t id) const {
    std::uint32_t hops = 0;
    while (alias_[id] != kNoAlias) {
      id = alias_[id];
      if (++hops > nodes_.size()) throw std::logic_error("TermBuilder: alias cycle");
    }
    return id;
  }
  std::vector<TermNode> nodes_;
  std::vector<bool> defined_;
  std::vector<std::uint32_t> alias_;
};

inline RationalTerm TermBuilder::build(std::uint32_t root) const {
  for (std::size_t i = 0; i < defined_.size(); ++i) {
    if (!defined_[i]) throw std::logic_error("TermBuilder: undefined forward node");
  }
  std::map<std::uint32_t, std::uint32_t> remap;
  std::vector<TermNode> out;
  std::vector<std::uint32_t> stack{resolve(root)};
  while (!stack.empty()) {
    std::uint32_t id = stack.back();
    stack.pop_back();
    if (remap.count(id)) continue;
    remap[id] = static_cast<std::uint32_t>(remap.size());
    out.push_back(nodes_[id]);
    for (std::uint32_t c : nodes_[id].children) stack.push_back(resolve(c));
  }
  RationalTerm t;
  t.nodes_.assign(out.size(), TermNode{});
  for (auto [oldid, newid] : remap) {
    TermNode n = nodes_[oldid];
    for (std::uint32_t& c : n.children) c = remap.at(resolve(c));
    t.nodes_[newid] = std::move(n);
  }
  t.root_ = remap.at(resolve(root));
  return t;
}

inline RationalTerm RationalTerm::compound(const std::string& functor,
                                           const std::vector<RationalTerm>& args) {
  TermBuilder b;
  std::vector<std::uint32_t> kids;
  kids.reserve(args.size());
  for (const RationalTerm& a : args) {
    // Splice the argument graph into the builder.
    std::map<NodeId, std::uint32_t> memo;
    std::vector<NodeId> order;
    std::vector<NodeId> stack{a.root()};
    while (!stack.empty()) {
      NodeId id = stack.back();
      stack.pop_back();
      if (memo.count(id)) continue;
      memo[id] = 0;
      order.push_back(id);
      for (NodeId c : a.node(id).children) stack.push_back(c);
    }
    for (NodeId id : order) memo[id] = b.forward();
    for (NodeId id : order) {
      const TermNode& n = a.node(id);
      if (n.is_var) {
        std::uint32_t v = b.var(Var{n.symbol, n.gen});
        b.alias(memo[id], v);
      } else {
        std::vector<std::uint32_t> cs;
        for (NodeId c : n.children) cs.push_back(memo.at(c));
        b.define(memo[id], n.symbol, std::move(cs));
      }
    }
    kids.push_back(memo.at(a.root()));
  }
  return b.build(b.compound(functor, std::move(kids)));
}

inline RationalTerm RationalTerm::slice(NodeId id) const {
  TermBuilder b;
  std::map<NodeId, std::uint32_t> memo;
  std::vector<NodeId> order;
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    if (memo.count(n)) continue;
    memo[n] = 0;
    order.push_back(n);
    for (NodeId c : nodes_[n].children) stack.push_back(c);
  }
  for (NodeId n : order) memo[n] = b.forward();
  for (NodeId n : order) {
    const TermNode& nd = nodes_[n];
    if (nd.is_var) {
      b.alias(memo[n], b.var(Var{nd.symbol, nd.gen}));
    } else {
      std::vector<std::uint32_t> cs;
      for (NodeId c : nd.children) cs.push_back(memo.at(c));
      b.define(memo[n], nd.symbol, std::move(cs));
    }
  }
  return b.build(memo.at(id));
}

inline RationalTerm RationalTerm::child(std::size_t i) const {
  const TermNode& n = nodes_[root_];
  if (n.is_var || i >= n.children.size()) throw std::logic_error("child: out of range");
  return slice(n.children[i]);
}

namespace detail {

// Bisimilarity of two roots within one node table.  Deterministic labelled
// graphs: the pair closure either hits a mismatch or is a bisimulation.
inline bool bisim(const std::vector<TermNode>& nodes, std::uint32_t a, std::uint32_t b) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{a, b}};
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    if (x == y) continue;
    if (!seen.insert({x, y}).second) continue;
    const TermNode& nx = nodes[x];
    const TermNode& ny = nodes[y];
    if (nx.is_var != ny.is_var) return false;
    if (nx.is_var) {
      if (nx.symbol != ny.symbol || nx.gen != ny.gen) return false;
      continue;
    }
    if (nx.symbol != ny.symbol || nx.children.size() != ny.children.size()) return false;
    for (std::size_t i = 0; i < nx.children.size(); ++i) {
      stack.push_back({nx.children[i], ny.children[i]});
    }
  }
  return true;
}

struct MergedGraph {
  std::vector<TermNode> nodes;
  std::vector<std::uint32_t> roots;
};

inline MergedGraph merge_graphs(const std::vector<const RationalTerm*>& terms) {
  MergedGraph g;
  for (const RationalTerm* t : terms) {
    std::uint32_t offset = static_cast<std::uint32_t>(g.nodes.size());
    for (TermNode n : t->nodes()) {
      for (std::uint32_t& c : n.children) c += offset;
      g.nodes.push_back(std::move(n));
    }
    g.roots.push_back(t->root() + offset);
  }
  return g;
}

inline RationalTerm slice_nodes(const std::vector<TermNode>& nodes, std::uint32_t root) {
  TermBuilder b;
  std::map<std::uint32_t, std::uint32_t> memo;
  std::vector<std::uint32_t> order;
  std::vector<std::uint32_t> stack{root};
  while (!stack.empty()) {
    std::uint32_t n = stack.back();
    stack.pop_back();
    if (memo.count(n)) continue;
    memo[n] = 0;
    order.push_back(n);
    for (std::uint32_t c : nodes[n].children) stack.push_back(c);
  }
  for (std::uint32_t n : order) memo[n] = b.forward();
  for (std::uint32_t n : order) {
    const TermNode& nd = nodes[n];
    if (nd.is_var) {
      b.alias(memo[n], b.var(Var{nd.symbol, nd.gen}));
    } else {
      std::vector<std::uint32_t> cs;
      for (std::uint32_t c : nd.children) cs.push_back(memo.at(c));
      b.define(memo[n], nd.symbol, std::move(cs));
    }
  }
  return b.build(memo.at(root));
}

}  // namespace detail

// True iff the two rooted graphs denote the same (possibly infinite) tree.
inline bool term_equal(const RationalTerm& a, const RationalTerm& b) {
  detail::MergedGraph g = detail::merge_graphs({&a, &b});
  return detail::bisim(g.nodes, g.roots[0], g.roots[1]);
}

// Finite depth-d truncation of the denoted tree.  Nodes at depth d are
// replaced by a cut marker, so unfolding is total on cyclic graphs.
struct FiniteTree {
  enum class Kind { Variable, Compound, Cut };
  Kind kind = Kind::Cut;
  std::string symbol;
  std::uint32_t gen = 0;
  std::vector<FiniteTree> children;

  bool operator==(const FiniteTree& o) const {
    return kind == o.kind && symbol == o.symbol && gen == o.gen && children == o.children;
  }

  static FiniteTree cut() { return FiniteTree{}; }
  static FiniteTree leaf_var(Var v) {
    return FiniteTree{Kind::Variable, std::move(v.name), v.gen, {}};
  }
  static FiniteTree node(std::string sym, std::vector<FiniteTree> kids) {
    return FiniteTree{Kind::Compound, std::move(sym), 0, std::move(kids)};
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::Cut:
        return "⊥";  // ⊥
      case Kind::Variable:
        return Var{symbol, gen}.display();
      case Kind::Compound: {
        if (children.empty()) return symbol;
        std::string s = symbol + "(";
        for (std::size_t i = 0; i < children.size(); ++i) {
          if (i) s += ", ";
          s += children[i].to_string();
        }
        return s + ")";
      }
    }
    return {};
  }
};

namespace detail {
inline FiniteTree unfold_from(const std::vector<TermNode>& nodes, std::uint32_t id, int depth) {
  if (depth <= 0) return FiniteTree::cut();
  const TermNode& n = nodes[id];
  if (n.is_var) return FiniteTree::leaf_var(Var{n.symbol, n.gen});
  std::vector<FiniteTree> kids;
  kids.reserve(n.children.size());
  for (std::uint32_t c : n.children) kids.push_back(unfold_from(nodes, c, depth - 1));
  return FiniteTree::node(n.symbol, std::move(kids));
}
}  // namespace detail

inline FiniteTree unfold(const RationalTerm& t, int depth) {
  if (depth < 0) throw std::logic_error("unfold: negative depth");
  // A node sitting exactly at the cut depth becomes the marker, so
  // unfold(t, 0) is the bare marker.
  return detail::unfold_from(t.nodes(), t.root(), depth);
}

// Variables of t in order of first occurrence (left-to-right, depth-first).
inline std::vector<Var> free_vars(const RationalTerm& t) {
  std::vector<Var> out;
  std::set<Var> seen_vars;
  std::set<std::uint32_t> seen_nodes;
  std::vector<std::uint32_t> stack{t.root()};
  // Use an explicit preorder walk so the ordering is deterministic.
  while (!stack.empty()) {
    std::uint32_t id = stack.back();
    stack.pop_back();
    if (!seen_nodes.insert(id).second) continue;
    const TermNode& n = t.node(id);
    if (n.is_var) {
      Var v{n.symbol, n.gen};
      if (seen_vars.insert(v).second) out.push_back(v);
      continue;
    }
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

inline bool contains_var(const RationalTerm& t, const Var& v) {
  for (const TermNode& n : t.nodes()) {
    if (n.is_var && n.symbol == v.name && n.gen == v.gen) return true;
  }
  return false;
}

// Bisimulation minimization by partition refinement.  The result is the
// quotient graph with a canonical (DFS) node order, so bisimilar terms
// minimize to identical representations.
inline RationalTerm minimized(const RationalTerm& t) {
  const std::size_t n = t.node_count();
  std::vector<int> block(n);
  {
    std::map<std::tuple<bool, std::string, std::uint32_t, std::size_t>, int> init;
    for (std::size_t i = 0; i < n; ++i) {
      const TermNode& nd = t.node(static_cast<std::uint32_t>(i));
      auto key = std::make_tuple(nd.is_var, nd.symbol, nd.is_var ? nd.gen : 0,
                                 nd.children.size());
      auto [it, fresh] = init.try_emplace(key, static_cast<int>(init.size()));
      block[i] = it->second;
    }
  }
  for (;;) {
    std::map<std::pair<int, std::vector<int>>, int> sig;
    std::vector<int> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<int> kids;
      for (std::uint32_t c : t.node(static_cast<std::uint32_t>(i)).children)
        kids.push_back(block[c]);
      auto [it, fresh] = sig.try_emplace({block[i], std::move(kids)},
                                         static_cast<int>(sig.size()));
      (void)fresh;
      next[i] = it->second;
    }
    // Refinement only ever splits blocks, so an unchanged block count means
    // the partition is stable (possibly relabelled).
    std::set<int> old(block.begin(), block.end());
    bool stable = old.size() == sig.size();
    block = std::move(next);
    if (stable) break;
  }
  // One representative node per block; all members agree on label and on the
  // blocks of their children, so any pick yields the same quotient.
  std::map<int, std::uint32_t> rep;
  for (std::size_t i = 0; i < n; ++i) rep.try_emplace(block[i], static_cast<std::uint32_t>(i));
  TermBuilder b;
  std::map<int, std::uint32_t> built;
  auto visit = [&](auto&& self, int blk) -> std::uint32_t {
    auto it = built.find(blk);
    if (it != built.end()) return it->second;
    const TermNode& nd = t.node(rep.at(blk));
    if (nd.is_var) {
      std::uint32_t id = b.var(Var{nd.symbol, nd.gen});
      built[blk] = id;
      return id;
    }
    std::uint32_t id = b.forward();
    built[blk] = id;
    std::vector<std::uint32_t> cs;
    cs.reserve(nd.children.size());
    for (std::uint32_t c : nd.children) cs.push_back(self(self, block[c]));
    b.define(id, nd.symbol, std::move(cs));
    return id;
  };
  return b.build(visit(visit, block[t.root()]));
}

// Canonical text key for hashing and set membership; equal keys iff bisimilar.
inline std::string canonical_key(const RationalTerm& t) {
  RationalTerm m = minimized(t);
  std::string s;
  // The minimized graph has a deterministic node order, so a flat dump of the
  // node table is canonical.
  s += std::to_string(m.root());
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    const TermNode& n = m.node(static_cast<std::uint32_t>(i));
    s += ';';
    if (n.is_var) {
      s += 'v';
      s += Var{n.symbol, n.gen}.display();
    } else {
      s += 'c';
      s += n.symbol;
      s += '/';
      for (std::uint32_t c : n.children) {
        s += std::to_string(c);
        s += ',';
      }
    }
  }
  return s;
}

// The finitely many pairwise non-bisimilar subterms of t.
inline std::vector<RationalTerm> distinct_subterms(const RationalTerm& t) {
  RationalTerm m = minimized(t);
  std::vector<RationalTerm> out;
  out.reserve(m.node_count());
  for (std::uint32_t i = 0; i < m.node_count(); ++i) out.push_back(m.slice(i));
  return out;
}

}  // namespace cosres
