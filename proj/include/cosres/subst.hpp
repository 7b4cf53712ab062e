// cosres/subst.hpp — substitutions over rational terms.
//
// A substitution is a finite mapping from variables to rational terms, kept
// in solved form: no domain variable occurs in any range term.  Application
// is simultaneous replacement, so it is also meaningful for the occasional
// non-solved mapping produced by composing arbitrary substitutions.

#pragma once

#include <map>
#include <set>
#include <vector>

#include "cosres/term.hpp"

namespace cosres {

class Substitution {
 public:
  Substitution() = default;

  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }

  // Identity bindings are dropped rather than stored.
  void bind(Var v, RationalTerm t) {
    if (t.root_is_var() && t.root_var() == v) return;
    bindings_.insert_or_assign(std::move(v), std::move(t));
  }

  const RationalTerm* lookup(const Var& v) const {
    auto it = bindings_.find(v);
    return it == bindings_.end() ? nullptr : &it->second;
  }

  const std::map<Var, RationalTerm>& bindings() const { return bindings_; }

  std::vector<Var> domain() const {
    std::vector<Var> out;
    out.reserve(bindings_.size());
    for (const auto& [v, t] : bindings_) out.push_back(v);
    return out;
  }

  bool is_solved_form() const {
    for (const auto& [v, t] : bindings_) {
      for (const auto& [w, u] : bindings_) {
        if (contains_var(u, v)) return false;
      }
      (void)t;
    }
    return true;
  }

 private:
  std::map<Var, RationalTerm> bindings_;
};

inline bool subst_equal(const Substitution& a, const Substitution& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [v, t] : a.bindings()) {
    const RationalTerm* u = b.lookup(v);
    if (!u || !term_equal(t, *u)) return false;
  }
  return true;
}

// Simultaneous replacement of bound variables.  Each distinct binding graph
// is spliced into the result once, so the result stays a finite graph and
// sharing inside bindings is preserved.
inline RationalTerm apply(const RationalTerm& t, const Substitution& s) {
  if (s.empty()) return t;
  TermBuilder b;
  std::map<RationalTerm::NodeId, std::uint32_t> tmemo;
  std::map<Var, std::uint32_t> range_memo;

  auto splice_range = [&b](const RationalTerm& r) -> std::uint32_t {
    std::map<RationalTerm::NodeId, std::uint32_t> memo;
    std::vector<RationalTerm::NodeId> order;
    std::vector<RationalTerm::NodeId> stack{r.root()};
    while (!stack.empty()) {
      auto id = stack.back();
      stack.pop_back();
      if (memo.count(id)) continue;
      memo[id] = 0;
      order.push_back(id);
      for (auto c : r.node(id).children) stack.push_back(c);
    }
    for (auto id : order) memo[id] = b.forward();
    for (auto id : order) {
      const TermNode& n = r.node(id);
      if (n.is_var) {
        b.alias(memo[id], b.var(Var{n.symbol, n.gen}));
      } else {
        std::vector<std::uint32_t> cs;
        for (auto c : n.children) cs.push_back(memo.at(c));
        b.define(memo[id], n.symbol, std::move(cs));
      }
    }
    return memo.at(r.root());
  };

  auto copy = [&](auto&& self, RationalTerm::NodeId id) -> std::uint32_t {
    auto it = tmemo.find(id);
    if (it != tmemo.end()) return it->second;
    const TermNode& n = t.node(id);
    if (n.is_var) {
      Var v{n.symbol, n.gen};
      if (const RationalTerm* r = s.lookup(v)) {
        auto rit = range_memo.find(v);
        std::uint32_t rid = rit != range_memo.end() ? rit->second : splice_range(*r);
        range_memo[v] = rid;
        tmemo[id] = rid;
        return rid;
      }
      std::uint32_t vid = b.var(v);
      tmemo[id] = vid;
      return vid;
    }
    std::uint32_t nid = b.forward();
    tmemo[id] = nid;
    std::vector<std::uint32_t> cs;
    cs.reserve(n.children.size());
    for (auto c : n.children) cs.push_back(self(self, c));
    b.define(nid, n.symbol, std::move(cs));
    return nid;
  };
  return b.build(copy(copy, t.root()));
}

// Composition in the usual sense: apply(t, compose(a, b)) coincides with
// apply(apply(t, a), b) for every t.  Bindings that collapse to the identity
// are dropped.  The result is in solved form whenever b's ranges avoid a's
// domain, which holds for the unifier sequences produced by derivations.
inline Substitution compose(const Substitution& a, const Substitution& b) {
  Substitution out;
  for (const auto& [v, t] : a.bindings()) out.bind(v, apply(t, b));
  for (const auto& [v, t] : b.bindings()) {
    if (!a.lookup(v)) out.bind(v, t);
  }
  return out;
}

inline Substitution restrict_to(const Substitution& s, const std::set<Var>& vars) {
  Substitution out;
  for (const auto& [v, t] : s.bindings()) {
    if (vars.count(v)) out.bind(v, t);
  }
  return out;
}

}  // namespace cosres
