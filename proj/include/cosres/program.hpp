// cosres/program.hpp — definite clauses and clause stores.

#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cosres/term.hpp"

namespace cosres {

struct Clause {
  int id = -1;
  RationalTerm head;
  std::vector<RationalTerm> body;
};

class Program {
 public:
  Program() = default;
  explicit Program(std::vector<Clause> clauses) : clauses_(std::move(clauses)) {
    for (std::size_t i = 0; i < clauses_.size(); ++i) {
      clauses_[i].id = static_cast<int>(i);
      const RationalTerm& h = clauses_[i].head;
      if (h.root_is_var()) throw std::logic_error("Program: clause head is a variable");
      index_[{h.functor(), h.arity()}].push_back(static_cast<int>(i));
    }
  }

  const std::vector<Clause>& clauses() const { return clauses_; }
  const Clause& clause(int id) const { return clauses_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return clauses_.size(); }

  // Clause ids whose head predicate could resolve the given atom, in source
  // order.
  const std::vector<int>& candidates(const std::string& functor, std::size_t arity) const {
    static const std::vector<int> kNone;
    auto it = index_.find({functor, arity});
    return it == index_.end() ? kNone : it->second;
  }

 private:
  std::vector<Clause> clauses_;
  std::map<std::pair<std::string, std::size_t>, std::vector<int>> index_;
};

namespace detail {
inline RationalTerm restamp_vars(const RationalTerm& t, std::uint32_t generation) {
  TermBuilder b;
  std::map<RationalTerm::NodeId, std::uint32_t> memo;
  auto copy = [&](auto&& self, RationalTerm::NodeId id) -> std::uint32_t {
    auto it = memo.find(id);
    if (it != memo.end()) return it->second;
    const TermNode& n = t.node(id);
    if (n.is_var) {
      std::uint32_t vid = b.var(Var{n.symbol, generation});
      memo[id] = vid;
      return vid;
    }
    std::uint32_t nid = b.forward();
    memo[id] = nid;
    std::vector<std::uint32_t> cs;
    for (auto c : n.children) cs.push_back(self(self, c));
    b.define(nid, n.symbol, std::move(cs));
    return nid;
  };
  return b.build(copy(copy, t.root()));
}
}  // namespace detail

// A copy of the clause whose variables carry the given rename generation.
// Distinct variables must have distinct names for the restamping to be a
// renaming; parsed clauses always do.
inline Clause rename_apart(const Clause& c, std::uint32_t generation) {
  std::set<std::string> names;
  std::set<Var> vars;
  auto collect = [&](const RationalTerm& t) {
    for (const TermNode& n : t.nodes()) {
      if (n.is_var) {
        names.insert(n.symbol);
        vars.insert(Var{n.symbol, n.gen});
      }
    }
  };
  collect(c.head);
  for (const RationalTerm& a : c.body) collect(a);
  if (names.size() != vars.size()) {
    throw std::logic_error("rename_apart: clause mixes generations of one name");
  }
  Clause out;
  out.id = c.id;
  out.head = detail::restamp_vars(c.head, generation);
  for (const RationalTerm& a : c.body) out.body.push_back(detail::restamp_vars(a, generation));
  return out;
}

inline std::uint32_t max_generation(const RationalTerm& t) {
  std::uint32_t g = 0;
  for (const TermNode& n : t.nodes()) {
    if (n.is_var && n.gen > g) g = n.gen;
  }
  return g;
}

inline std::uint32_t max_generation(const Program& p) {
  std::uint32_t g = 0;
  for (const Clause& c : p.clauses()) {
    g = std::max(g, max_generation(c.head));
    for (const RationalTerm& a : c.body) g = std::max(g, max_generation(a));
  }
  return g;
}

}  // namespace cosres
