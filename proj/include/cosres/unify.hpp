// cosres/unify.hpp — rational-tree unification and subsumption matching.
//
// Unification runs directly on the term graphs: a union-find closure over
// node pairs, with no occurs check, so X and f(X) unify to the cyclic
// solution.  The only failure mode is a functor/arity clash.  The classic
// equation-system pipeline (reduce to reduced form, then solve the reduced
// system into cyclic graphs) is exposed separately; the two routes agree and
// are cross-checked in the tests.

#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cosres/subst.hpp"
#include "cosres/term.hpp"

namespace cosres {

struct ClashInfo {
  std::string left_functor;
  std::size_t left_arity = 0;
  std::string right_functor;
  std::size_t right_arity = 0;
  std::vector<std::size_t> path;  // argument positions from the roots

  std::string to_string() const {
    std::string s = left_functor + "/" + std::to_string(left_arity) + " vs " +
                    right_functor + "/" + std::to_string(right_arity) + " at [";
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i) s += ".";
      s += std::to_string(path[i]);
    }
    return s + "]";
  }
};

struct UnifyResult {
  std::optional<Substitution> subst;
  std::optional<ClashInfo> clash;

  bool ok() const { return subst.has_value(); }
  explicit operator bool() const { return ok(); }
};

namespace detail {

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::uint32_t>(i);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  // Returns the surviving root after linking a and b.
  std::uint32_t link(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[a] = b;
    return b;
  }
};

}  // namespace detail

// Most general rational unifier of a and b, restricted to the variables that
// occur in them.  Occurrences of the same variable in either term denote the
// same unknown.
inline UnifyResult unify(const RationalTerm& a, const RationalTerm& b) {
  detail::MergedGraph g = detail::merge_graphs({&a, &b});
  const std::size_t n = g.nodes.size();
  detail::UnionFind uf(n);

  // Shape of each class: some compound member, if any.
  std::vector<std::optional<std::uint32_t>> shape(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!g.nodes[i].is_var) shape[i] = i;
  }

  struct Item {
    std::uint32_t x, y;
    std::vector<std::size_t> path;
  };
  std::vector<Item> work;

  // Nodes carrying the same variable are one unknown: link them up front.
  {
    std::map<Var, std::uint32_t> first;
    for (std::uint32_t i = 0; i < n; ++i) {
      const TermNode& nd = g.nodes[i];
      if (!nd.is_var) continue;
      auto [it, fresh] = first.try_emplace(Var{nd.symbol, nd.gen}, i);
      if (!fresh) work.push_back({it->second, i, {}});
    }
  }
  work.push_back({g.roots[0], g.roots[1], {}});

  while (!work.empty()) {
    Item item = std::move(work.back());
    work.pop_back();
    std::uint32_t x = uf.find(item.x);
    std::uint32_t y = uf.find(item.y);
    if (x == y) continue;
    std::optional<std::uint32_t> sx = shape[x];
    std::optional<std::uint32_t> sy = shape[y];
    std::uint32_t r = uf.link(x, y);
    if (sx && sy) {
      const TermNode& cx = g.nodes[*sx];
      const TermNode& cy = g.nodes[*sy];
      if (cx.symbol != cy.symbol || cx.children.size() != cy.children.size()) {
        return {std::nullopt,
                ClashInfo{cx.symbol, cx.children.size(), cy.symbol, cy.children.size(),
                          item.path}};
      }
      for (std::size_t i = 0; i < cx.children.size(); ++i) {
        auto path = item.path;
        path.push_back(i);
        work.push_back({cx.children[i], cy.children[i], std::move(path)});
      }
      shape[r] = sx;
    } else {
      shape[r] = sx ? sx : sy;
    }
  }

  // Extract the solved-form substitution.  Classes of variables with no
  // compound member collapse onto a canonical representative variable.
  std::map<std::uint32_t, std::set<Var>> class_vars;
  for (std::uint32_t i = 0; i < n; ++i) {
    const TermNode& nd = g.nodes[i];
    if (nd.is_var) class_vars[uf.find(i)].insert(Var{nd.symbol, nd.gen});
  }
  TermBuilder builder;
  std::map<std::uint32_t, std::uint32_t> built;
  auto term_of = [&](auto&& self, std::uint32_t cls) -> std::uint32_t {
    auto it = built.find(cls);
    if (it != built.end()) return it->second;
    if (shape[cls]) {
      std::uint32_t id = builder.forward();
      built[cls] = id;
      const TermNode& c = g.nodes[*shape[cls]];
      std::vector<std::uint32_t> cs;
      cs.reserve(c.children.size());
      for (std::uint32_t ch : c.children) cs.push_back(self(self, uf.find(ch)));
      builder.define(id, c.symbol, std::move(cs));
      return id;
    }
    const std::set<Var>& vars = class_vars.at(cls);
    std::uint32_t id = builder.var(*vars.begin());
    built[cls] = id;
    return id;
  };

  Substitution subst;
  for (const auto& [cls, vars] : class_vars) {
    const Var canonical = *vars.begin();
    RationalTerm rt = builder.build(term_of(term_of, cls));
    for (const Var& v : vars) {
      if (!shape[cls] && v == canonical) continue;
      subst.bind(v, rt);
    }
  }
  return {std::move(subst), std::nullopt};
}

// Subsumption matching: a substitution binding only variables of `pattern`
// such that pattern·sigma equals `target` exactly.  Implemented as a
// one-directional simulation over the graphs; a visited-pair set makes it
// total on cyclic inputs.  Returns nothing when no such legal substitution
// exists, including when a candidate binding would put a bound variable
// inside one of its own ranges.
inline std::optional<Substitution> match_term(const RationalTerm& pattern,
                                              const RationalTerm& target) {
  detail::MergedGraph g = detail::merge_graphs({&pattern, &target});
  std::map<Var, std::uint32_t> binding;  // pattern var -> target node
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{g.roots[0], g.roots[1]}};
  while (!stack.empty()) {
    auto [p, t] = stack.back();
    stack.pop_back();
    if (!seen.insert({p, t}).second) continue;
    const TermNode& np = g.nodes[p];
    const TermNode& nt = g.nodes[t];
    if (np.is_var) {
      Var v{np.symbol, np.gen};
      auto [it, fresh] = binding.try_emplace(v, t);
      if (!fresh && !detail::bisim(g.nodes, it->second, t)) return std::nullopt;
      continue;
    }
    if (nt.is_var) return std::nullopt;
    if (np.symbol != nt.symbol || np.children.size() != nt.children.size()) return std::nullopt;
    for (std::size_t i = 0; i < np.children.size(); ++i) {
      stack.push_back({np.children[i], nt.children[i]});
    }
  }
  Substitution out;
  for (const auto& [v, node] : binding) out.bind(v, detail::slice_nodes(g.nodes, node));
  // The matcher must be a legal substitution: solved form can fail when
  // pattern and target share variables, and then there is no matcher.
  for (const auto& [v, t] : out.bindings()) {
    for (const auto& [w, u] : out.bindings()) {
      (void)w;
      if (contains_var(u, v)) return std::nullopt;
    }
    (void)t;
  }
  return out;
}

// A system of term equations.  Reduced form: left-hand sides are distinct
// variables, each occurring exactly once as a left-hand side (they may still
// occur inside right-hand sides, which is what makes solutions cyclic).
struct EquationSystem {
  std::vector<std::pair<RationalTerm, RationalTerm>> equations;
};

struct ReduceResult {
  std::optional<EquationSystem> system;
  std::optional<ClashInfo> clash;
  bool ok() const { return system.has_value(); }
};

// Equation-system reduction: decompose compound pairs, orient var=term, and
// merge repeated left-hand sides, without an occurs check.
inline ReduceResult reduce(const EquationSystem& sys) {
  std::vector<const RationalTerm*> ptrs;
  for (const auto& [l, r] : sys.equations) {
    ptrs.push_back(&l);
    ptrs.push_back(&r);
  }
  detail::MergedGraph g = detail::merge_graphs(ptrs);

  std::map<Var, std::uint32_t> bound;  // reduced equations, var -> node
  std::vector<Var> bound_order;
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  struct Item {
    std::uint32_t l, r;
    std::vector<std::size_t> path;
  };
  std::deque<Item> work;
  for (std::size_t i = 0; i < sys.equations.size(); ++i) {
    work.push_back({g.roots[2 * i], g.roots[2 * i + 1], {}});
  }
  while (!work.empty()) {
    Item item = std::move(work.front());
    work.pop_front();
    if (!seen.insert({item.l, item.r}).second) continue;
    const TermNode& nl = g.nodes[item.l];
    const TermNode& nr = g.nodes[item.r];
    if (nl.is_var) {
      Var v{nl.symbol, nl.gen};
      if (nr.is_var && nr.symbol == nl.symbol && nr.gen == nl.gen) continue;
      auto it = bound.find(v);
      if (it == bound.end()) {
        bound.emplace(v, item.r);
        bound_order.push_back(v);
      } else {
        work.push_back({it->second, item.r, {}});
      }
      continue;
    }
    if (nr.is_var) {
      work.push_back({item.r, item.l, item.path});
      continue;
    }
    if (nl.symbol != nr.symbol || nl.children.size() != nr.children.size()) {
      return {std::nullopt,
              ClashInfo{nl.symbol, nl.children.size(), nr.symbol, nr.children.size(),
                        item.path}};
    }
    for (std::size_t i = 0; i < nl.children.size(); ++i) {
      auto path = item.path;
      path.push_back(i);
      work.push_back({nl.children[i], nr.children[i], std::move(path)});
    }
  }
  EquationSystem out;
  for (const Var& v : bound_order) {
    out.equations.emplace_back(RationalTerm::variable(v),
                               detail::slice_nodes(g.nodes, bound.at(v)));
  }
  return {std::move(out), std::nullopt};
}

// Solves a reduced system by knot-tying: every left-hand variable names a
// node, occurrences of those variables inside right-hand sides become edges,
// and cyclic equations produce cyclic graphs.
inline Substitution solve(const EquationSystem& reduced) {
  std::map<Var, std::size_t> eq_of;  // lhs var -> equation index
  for (std::size_t i = 0; i < reduced.equations.size(); ++i) {
    const RationalTerm& lhs = reduced.equations[i].first;
    if (!lhs.root_is_var()) throw std::logic_error("solve: left-hand side is not a variable");
    if (!eq_of.emplace(lhs.root_var(), i).second) {
      throw std::logic_error("solve: duplicate left-hand side");
    }
  }

  // Chains of variable equations X = Y collapse into classes first.
  std::map<Var, Var> parent;
  auto find = [&](Var v) {
    while (true) {
      auto it = parent.find(v);
      if (it == parent.end() || it->second == v) return v;
      v = it->second;
    }
  };
  std::map<Var, std::size_t> class_compound;  // class rep -> equation index
  for (const auto& [v, idx] : eq_of) {
    const RationalTerm& rhs = reduced.equations[idx].second;
    if (rhs.root_is_var()) parent[find(v)] = find(rhs.root_var());
  }
  for (const auto& [v, idx] : eq_of) {
    const RationalTerm& rhs = reduced.equations[idx].second;
    if (rhs.root_is_var()) continue;
    Var rep = find(v);
    if (!class_compound.emplace(rep, idx).second) {
      throw std::logic_error("solve: system is not in reduced form");
    }
  }
  // Canonical member of a pure-variable class: prefer a variable that is not
  // a left-hand side (it stays free), otherwise the least member.
  std::map<Var, std::set<Var>> members;
  for (const auto& [v, idx] : eq_of) {
    (void)idx;
    members[find(v)].insert(v);
    members[find(v)].insert(find(v));
  }
  auto canonical = [&](Var rep) {
    const std::set<Var>& ms = members.at(rep);
    for (const Var& m : ms) {
      if (!eq_of.count(m)) return m;
    }
    return *ms.begin();
  };

  TermBuilder b;
  std::map<Var, std::uint32_t> built;  // class rep -> node
  auto build_class = [&](auto&& self, Var rep) -> std::uint32_t {
    auto it = built.find(rep);
    if (it != built.end()) return it->second;
    auto ce = class_compound.find(rep);
    if (ce == class_compound.end()) {
      std::uint32_t id = b.var(canonical(rep));
      built[rep] = id;
      return id;
    }
    const RationalTerm& rhs = reduced.equations[ce->second].second;
    std::uint32_t placeholder = b.forward();
    built[rep] = placeholder;
    // Copy the right-hand graph; variable leaves that are solved by the
    // system become edges to their class node.
    std::map<RationalTerm::NodeId, std::uint32_t> memo;
    auto copy = [&](auto&& cp, RationalTerm::NodeId nid) -> std::uint32_t {
      auto mit = memo.find(nid);
      if (mit != memo.end()) return mit->second;
      const TermNode& nd = rhs.node(nid);
      if (nd.is_var) {
        Var v{nd.symbol, nd.gen};
        std::uint32_t res;
        if (eq_of.count(find(v))) {
          res = self(self, find(v));
        } else {
          res = b.var(v);
        }
        memo[nid] = res;
        return res;
      }
      std::uint32_t id = b.forward();
      memo[nid] = id;
      std::vector<std::uint32_t> cs;
      for (auto c : nd.children) cs.push_back(cp(cp, c));
      b.define(id, nd.symbol, std::move(cs));
      return id;
    };
    std::uint32_t body = copy(copy, rhs.root());
    b.alias(placeholder, body);
    return body;
  };

  Substitution out;
  for (const auto& [v, idx] : eq_of) {
    (void)idx;
    Var rep = find(v);
    if (class_compound.count(rep)) {
      out.bind(v, b.build(build_class(build_class, rep)));
    } else {
      Var c = canonical(rep);
      if (!(c == v)) out.bind(v, RationalTerm::variable(c));
    }
  }
  return out;
}

}  // namespace cosres
