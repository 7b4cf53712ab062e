// cosres/engine.hpp — derivations under SLD, co-SLD, structural resolution,
// and co-inductive structural resolution.
//
// Goals are sequences of (atom, hypothesis set) pairs; plain SLD and
// S-resolution are the degenerate case where every hypothesis set stays
// empty.  Each derivation step is recorded with enough detail (rule, selected
// atom, clause id, rename generation, unifier or matcher) that a trace can be
// re-checked from scratch by verify_trace, independently of the search.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cosres/program.hpp"
#include "cosres/subst.hpp"
#include "cosres/syntax.hpp"
#include "cosres/term.hpp"
#include "cosres/unify.hpp"

namespace cosres {

enum class Mode { Sld, CoSld, Sres, CoSres, CoRewId };
enum class Rule { Sld, Rewriting, Substitution, LoopDetection, Identity };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Sld: return "sld";
    case Mode::CoSld: return "co-sld";
    case Mode::Sres: return "sres";
    case Mode::CoSres: return "co-sres";
    case Mode::CoRewId: return "co-rew-id";
  }
  return "?";
}

inline const char* to_string(Rule r) {
  switch (r) {
    case Rule::Sld: return "sld";
    case Rule::Rewriting: return "rewriting";
    case Rule::Substitution: return "substitution";
    case Rule::LoopDetection: return "loop_detection";
    case Rule::Identity: return "identity";
  }
  return "?";
}

inline std::optional<Mode> mode_from_string(const std::string& s) {
  if (s == "sld") return Mode::Sld;
  if (s == "co-sld") return Mode::CoSld;
  if (s == "sres") return Mode::Sres;
  if (s == "co-sres") return Mode::CoSres;
  if (s == "co-rew-id") return Mode::CoRewId;
  return std::nullopt;
}

inline std::optional<Rule> rule_from_string(const std::string& s) {
  if (s == "sld") return Rule::Sld;
  if (s == "rewriting") return Rule::Rewriting;
  if (s == "substitution") return Rule::Substitution;
  if (s == "loop_detection") return Rule::LoopDetection;
  if (s == "identity") return Rule::Identity;
  return std::nullopt;
}

inline bool is_co_mode(Mode m) {
  return m == Mode::CoSld || m == Mode::CoSres || m == Mode::CoRewId;
}

struct CoGoalItem {
  RationalTerm atom;
  std::vector<RationalTerm> hypotheses;  // most recent first
};

struct CoGoal {
  std::vector<CoGoalItem> items;

  bool empty() const { return items.empty(); }
  std::size_t size() const { return items.size(); }

  static CoGoal of_atoms(const std::vector<RationalTerm>& atoms) {
    CoGoal g;
    g.items.reserve(atoms.size());
    for (const RationalTerm& a : atoms) g.items.push_back({a, {}});
    return g;
  }
};

struct StepLabel {
  Rule rule = Rule::Sld;
  int selected = -1;               // atom position; -1 for identity steps
  std::optional<int> clause_id;    // absent for loop detection and identity
  Substitution unifier;            // unifier or matcher; empty for identity
  std::uint32_t rename_gen = 0;    // clause rename generation; 0 if no clause
  std::optional<int> source_step;  // provenance through transformations
};

struct DerivationTrace {
  Mode mode = Mode::CoSres;
  std::vector<CoGoal> goals;  // G_0 .. G_n
  std::vector<StepLabel> steps;
  Substitution computed;
};

inline CoGoal apply_to_goal(const CoGoal& g, const Substitution& s) {
  CoGoal out;
  out.items.reserve(g.items.size());
  for (const CoGoalItem& it : g.items) {
    CoGoalItem ni;
    ni.atom = apply(it.atom, s);
    ni.hypotheses.reserve(it.hypotheses.size());
    for (const RationalTerm& h : it.hypotheses) ni.hypotheses.push_back(apply(h, s));
    out.items.push_back(std::move(ni));
  }
  return out;
}

inline std::set<Var> goal_free_vars(const CoGoal& g) {
  std::set<Var> out;
  for (const CoGoalItem& it : g.items) {
    for (const Var& v : free_vars(it.atom)) out.insert(v);
    for (const RationalTerm& h : it.hypotheses) {
      for (const Var& v : free_vars(h)) out.insert(v);
    }
  }
  return out;
}

inline bool hyps_contain(const std::vector<RationalTerm>& hyps, const RationalTerm& a) {
  for (const RationalTerm& h : hyps) {
    if (term_equal(h, a)) return true;
  }
  return false;
}

// S ∪ {A}: hypothesis lists are kept most-recent-first and deduplicated up to
// bisimilarity; they are compared as sets.
inline std::vector<RationalTerm> extend_hyps(const std::vector<RationalTerm>& hyps,
                                             const RationalTerm& atom) {
  if (hyps_contain(hyps, atom)) return hyps;
  std::vector<RationalTerm> out;
  out.reserve(hyps.size() + 1);
  out.push_back(atom);
  out.insert(out.end(), hyps.begin(), hyps.end());
  return out;
}

inline bool hyp_sets_equal(const std::vector<RationalTerm>& a,
                           const std::vector<RationalTerm>& b) {
  for (const RationalTerm& x : a) {
    if (!hyps_contain(b, x)) return false;
  }
  for (const RationalTerm& y : b) {
    if (!hyps_contain(a, y)) return false;
  }
  return true;
}

inline bool goal_equal(const CoGoal& a, const CoGoal& b) {
  if (a.items.size() != b.items.size()) return false;
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    if (!term_equal(a.items[i].atom, b.items[i].atom)) return false;
    if (!hyp_sets_equal(a.items[i].hypotheses, b.items[i].hypotheses)) return false;
  }
  return true;
}

namespace detail {

// Loop detection successors shared by co-SLD and co-S-resolution: one per
// hypothesis that unifies with the selected atom, in stored (most recent
// first) order.
inline void loop_detection_steps(const CoGoal& g, std::size_t k,
                                 std::vector<std::pair<CoGoal, StepLabel>>& out) {
  const CoGoalItem& item = g.items[k];
  for (const RationalTerm& hyp : item.hypotheses) {
    UnifyResult u = unify(item.atom, hyp);
    if (!u) continue;
    CoGoal rest;
    for (std::size_t j = 0; j < g.items.size(); ++j) {
      if (j != k) rest.items.push_back(g.items[j]);
    }
    StepLabel label;
    label.rule = Rule::LoopDetection;
    label.selected = static_cast<int>(k);
    label.unifier = *u.subst;
    out.emplace_back(apply_to_goal(rest, label.unifier), std::move(label));
  }
}

}  // namespace detail

// One SLD resolution step at position k: for every clause whose freshly
// renamed head unifies with the selected atom, splice in the body and apply
// the unifier to the whole goal.  Hypothesis sets stay empty.
inline std::vector<std::pair<CoGoal, StepLabel>> step_sld(const CoGoal& g, const Program& p,
                                                          std::size_t k, std::uint32_t gen) {
  std::vector<std::pair<CoGoal, StepLabel>> out;
  const RationalTerm& atom = g.items[k].atom;
  for (int cid : p.candidates(atom.functor(), atom.arity())) {
    Clause rc = rename_apart(p.clause(cid), gen);
    UnifyResult u = unify(rc.head, atom);
    if (!u) continue;
    const Substitution& theta = *u.subst;
    CoGoal next;
    for (std::size_t j = 0; j < k; ++j) next.items.push_back({apply(g.items[j].atom, theta), {}});
    for (const RationalTerm& b : rc.body) next.items.push_back({apply(b, theta), {}});
    for (std::size_t j = k + 1; j < g.items.size(); ++j) {
      next.items.push_back({apply(g.items[j].atom, theta), {}});
    }
    StepLabel label;
    label.rule = Rule::Sld;
    label.selected = static_cast<int>(k);
    label.clause_id = cid;
    label.unifier = theta;
    label.rename_gen = gen;
    out.emplace_back(std::move(next), std::move(label));
  }
  return out;
}

// co-SLD: loop detection alternatives first, then SLD-style clause steps.
// Clause steps push the selected atom into the hypothesis sets of the new
// body items; the unifier reaches every atom and every hypothesis member.
inline std::vector<std::pair<CoGoal, StepLabel>> step_co_sld(const CoGoal& g, const Program& p,
                                                             std::size_t k, std::uint32_t gen) {
  std::vector<std::pair<CoGoal, StepLabel>> out;
  detail::loop_detection_steps(g, k, out);
  const CoGoalItem& item = g.items[k];
  for (int cid : p.candidates(item.atom.functor(), item.atom.arity())) {
    Clause rc = rename_apart(p.clause(cid), gen);
    UnifyResult u = unify(rc.head, item.atom);
    if (!u) continue;
    const Substitution& theta = *u.subst;
    std::vector<RationalTerm> extended = extend_hyps(item.hypotheses, item.atom);
    CoGoal next;
    for (std::size_t j = 0; j < k; ++j) next.items.push_back(g.items[j]);
    for (const RationalTerm& b : rc.body) next.items.push_back({b, extended});
    for (std::size_t j = k + 1; j < g.items.size(); ++j) next.items.push_back(g.items[j]);
    StepLabel label;
    label.rule = Rule::Sld;
    label.selected = static_cast<int>(k);
    label.clause_id = cid;
    label.unifier = theta;
    label.rename_gen = gen;
    out.emplace_back(apply_to_goal(next, theta), std::move(label));
  }
  return out;
}

// Structural resolution: rewriting reduction (clause head subsumes the atom;
// only clause variables are instantiated, the atom is consumed) before
// substitution reduction (head unifies but does not subsume; the unifier is
// applied to the whole goal and the atom is kept).
inline std::vector<std::pair<CoGoal, StepLabel>> step_sres(const CoGoal& g, const Program& p,
                                                           std::size_t k, std::uint32_t gen) {
  std::vector<std::pair<CoGoal, StepLabel>> rewrites;
  std::vector<std::pair<CoGoal, StepLabel>> substs;
  const RationalTerm& atom = g.items[k].atom;
  for (int cid : p.candidates(atom.functor(), atom.arity())) {
    Clause rc = rename_apart(p.clause(cid), gen);
    std::optional<Substitution> matcher = match_term(rc.head, atom);
    if (matcher) {
      CoGoal next;
      for (std::size_t j = 0; j < k; ++j) next.items.push_back(g.items[j]);
      for (const RationalTerm& b : rc.body) next.items.push_back({apply(b, *matcher), {}});
      for (std::size_t j = k + 1; j < g.items.size(); ++j) next.items.push_back(g.items[j]);
      StepLabel label;
      label.rule = Rule::Rewriting;
      label.selected = static_cast<int>(k);
      label.clause_id = cid;
      label.unifier = *matcher;
      label.rename_gen = gen;
      rewrites.emplace_back(std::move(next), std::move(label));
      continue;
    }
    UnifyResult u = unify(rc.head, atom);
    if (!u) continue;
    StepLabel label;
    label.rule = Rule::Substitution;
    label.selected = static_cast<int>(k);
    label.clause_id = cid;
    label.unifier = *u.subst;
    label.rename_gen = gen;
    substs.emplace_back(apply_to_goal(g, label.unifier), std::move(label));
  }
  std::vector<std::pair<CoGoal, StepLabel>> out = std::move(rewrites);
  for (auto& s : substs) out.push_back(std::move(s));
  return out;
}

// Co-inductive structural resolution: loop detection, then rewriting (new
// body items carry S ∪ {A}; the matcher touches only the new atoms), then
// substitution (unifier applied to every atom and hypothesis member).
inline std::vector<std::pair<CoGoal, StepLabel>> step_co_sres(const CoGoal& g, const Program& p,
                                                              std::size_t k, std::uint32_t gen) {
  std::vector<std::pair<CoGoal, StepLabel>> out;
  detail::loop_detection_steps(g, k, out);
  std::vector<std::pair<CoGoal, StepLabel>> substs;
  const CoGoalItem& item = g.items[k];
  for (int cid : p.candidates(item.atom.functor(), item.atom.arity())) {
    Clause rc = rename_apart(p.clause(cid), gen);
    std::optional<Substitution> matcher = match_term(rc.head, item.atom);
    if (matcher) {
      std::vector<RationalTerm> extended = extend_hyps(item.hypotheses, item.atom);
      CoGoal next;
      for (std::size_t j = 0; j < k; ++j) next.items.push_back(g.items[j]);
      for (const RationalTerm& b : rc.body) next.items.push_back({apply(b, *matcher), extended});
      for (std::size_t j = k + 1; j < g.items.size(); ++j) next.items.push_back(g.items[j]);
      StepLabel label;
      label.rule = Rule::Rewriting;
      label.selected = static_cast<int>(k);
      label.clause_id = cid;
      label.unifier = *matcher;
      label.rename_gen = gen;
      out.emplace_back(std::move(next), std::move(label));
      continue;
    }
    UnifyResult u = unify(rc.head, item.atom);
    if (!u) continue;
    StepLabel label;
    label.rule = Rule::Substitution;
    label.selected = static_cast<int>(k);
    label.clause_id = cid;
    label.unifier = *u.subst;
    label.rename_gen = gen;
    substs.emplace_back(apply_to_goal(g, label.unifier), std::move(label));
  }
  for (auto& s : substs) out.push_back(std::move(s));
  return out;
}

// Composition of the unifiers a refutation computed, in step order.  Matchers
// and identity steps never contribute; which rules count depends on the mode.
inline Substitution computed_substitution(const DerivationTrace& t) {
  auto counts = [&](Rule r) {
    switch (t.mode) {
      case Mode::Sld:
      case Mode::CoSld:
        return r == Rule::Sld || r == Rule::LoopDetection;
      case Mode::Sres:
        return r == Rule::Substitution;
      case Mode::CoSres:
        return r == Rule::Substitution || r == Rule::LoopDetection;
      case Mode::CoRewId:
        return r == Rule::LoopDetection;
    }
    return false;
  };
  Substitution acc;
  for (const StepLabel& s : t.steps) {
    if (counts(s.rule)) acc = compose(acc, s.unifier);
  }
  return acc;
}

struct SearchOptions {
  std::size_t max_steps = 10000;   // total goal reductions attempted
  std::size_t max_solutions = 1;
  std::optional<std::size_t> max_depth;  // bound on derivation length
  enum class Selection { Leftmost, Rightmost };
  Selection selection = Selection::Leftmost;
};

enum class SearchStatus {
  Exhausted,        // the whole (bounded-free) search tree was explored
  BudgetExhausted,  // ran out of steps or depth: no answer is "unknown"
  SolutionLimit,    // stopped because enough refutations were found
};

struct DeriveResult {
  std::vector<DerivationTrace> refutations;
  SearchStatus status = SearchStatus::Exhausted;
  std::size_t steps_used = 0;
};

// Depth-first enumeration of refutations by backtracking.  At each goal the
// alternatives are tried in the order loop detection, rewriting, substitution
// (clauses in program order), matching the reference rule ordering; the
// no-consecutive-substitution constraint is enforced here.  `yield` returns
// false to stop early.
inline SearchStatus derive_each(const Program& p, const std::vector<RationalTerm>& query,
                                Mode mode, const SearchOptions& opts,
                                const std::function<bool(const DerivationTrace&)>& yield,
                                std::size_t* steps_used_out = nullptr) {
  if (mode == Mode::CoRewId) {
    throw std::logic_error("derive: co-rew-id traces arise by transformation, not search");
  }
  std::uint32_t base_gen = max_generation(p);
  for (const RationalTerm& a : query) base_gen = std::max(base_gen, max_generation(a));

  std::vector<CoGoal> goals{CoGoal::of_atoms(query)};
  std::vector<StepLabel> steps;
  std::size_t renamings = 0;
  std::size_t steps_used = 0;
  std::size_t solutions = 0;
  bool budget_hit = false;
  bool stopped = false;

  auto rec = [&](auto&& self) -> void {
    if (stopped || budget_hit) return;
    const CoGoal& goal = goals.back();
    if (goal.empty()) {
      DerivationTrace t;
      t.mode = mode;
      t.goals = goals;
      t.steps = steps;
      t.computed = computed_substitution(t);
      ++solutions;
      if (!yield(t) || solutions >= opts.max_solutions) stopped = true;
      return;
    }
    if (opts.max_depth && steps.size() >= *opts.max_depth) {
      budget_hit = true;  // clipped branch: completeness unknown
      return;
    }
    std::size_t k = opts.selection == SearchOptions::Selection::Leftmost ? 0
                                                                         : goal.items.size() - 1;
    std::uint32_t gen = base_gen + static_cast<std::uint32_t>(renamings) + 1;
    std::vector<std::pair<CoGoal, StepLabel>> succs;
    switch (mode) {
      case Mode::Sld: succs = step_sld(goal, p, k, gen); break;
      case Mode::CoSld: succs = step_co_sld(goal, p, k, gen); break;
      case Mode::Sres: succs = step_sres(goal, p, k, gen); break;
      case Mode::CoSres: succs = step_co_sres(goal, p, k, gen); break;
      case Mode::CoRewId: return;
    }
    for (auto& [next, label] : succs) {
      if (stopped || budget_hit) return;
      if (label.rule == Rule::Substitution && !steps.empty() &&
          steps.back().rule == Rule::Substitution) {
        continue;  // no consecutive substitution reductions
      }
      if (steps_used >= opts.max_steps) {
        budget_hit = true;
        return;
      }
      ++steps_used;
      bool renamed = label.rule != Rule::LoopDetection;
      goals.push_back(next);
      steps.push_back(label);
      if (renamed) ++renamings;
      self(self);
      goals.pop_back();
      steps.pop_back();
      if (renamed) --renamings;
    }
  };
  rec(rec);
  if (steps_used_out) *steps_used_out = steps_used;
  if (stopped) return SearchStatus::SolutionLimit;
  if (budget_hit) return SearchStatus::BudgetExhausted;
  return SearchStatus::Exhausted;
}

inline DeriveResult derive(const Program& p, const std::vector<RationalTerm>& query, Mode mode,
                           const SearchOptions& opts = {}) {
  DeriveResult r;
  r.status = derive_each(
      p, query, mode, opts,
      [&](const DerivationTrace& t) {
        r.refutations.push_back(t);
        return true;
      },
      &r.steps_used);
  return r;
}

struct VerifyResult {
  bool ok = true;
  int step = -1;  // -1: a trace-level problem, not tied to one step
  std::string reason;

  explicit operator bool() const { return ok; }
  static VerifyResult failure(int step, std::string reason) {
    return VerifyResult{false, step, std::move(reason)};
  }
};

// Re-checks every step of a trace against its labelled rule, from scratch:
// the recorded unifier/matcher must satisfy the rule's relation and the
// recorded successor goal must equal the one the rule prescribes.  Also
// enforces the trace-level invariants: empty hypothesis sets at the start
// (everywhere, for non-co modes), no consecutive substitution or identity
// steps, the computed substitution, and — for refutations — an empty final
// goal.
inline VerifyResult verify_trace(const Program& p, const DerivationTrace& t,
                                 bool require_refutation = true) {
  if (t.goals.empty()) return VerifyResult::failure(-1, "trace has no goals");
  if (t.steps.size() + 1 != t.goals.size()) {
    return VerifyResult::failure(-1, "step/goal count mismatch");
  }
  for (const CoGoalItem& it : t.goals.front().items) {
    if (!it.hypotheses.empty()) {
      return VerifyResult::failure(-1, "initial goal has non-empty hypothesis sets");
    }
  }
  if (!is_co_mode(t.mode)) {
    for (const CoGoal& g : t.goals) {
      for (const CoGoalItem& it : g.items) {
        if (!it.hypotheses.empty()) {
          return VerifyResult::failure(-1, "hypothesis sets must stay empty in this mode");
        }
      }
    }
  }
  auto legal = [&](Rule r) {
    switch (t.mode) {
      case Mode::Sld: return r == Rule::Sld;
      case Mode::CoSld: return r == Rule::Sld || r == Rule::LoopDetection;
      case Mode::Sres: return r == Rule::Rewriting || r == Rule::Substitution;
      case Mode::CoSres:
        return r == Rule::Rewriting || r == Rule::Substitution || r == Rule::LoopDetection;
      case Mode::CoRewId:
        return r == Rule::Rewriting || r == Rule::Identity || r == Rule::LoopDetection;
    }
    return false;
  };

  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const StepLabel& s = t.steps[i];
    const CoGoal& g = t.goals[i];
    const CoGoal& g1 = t.goals[i + 1];
    int step = static_cast<int>(i);
    if (!legal(s.rule)) {
      return VerifyResult::failure(step, std::string("rule ") + to_string(s.rule) +
                                             " is not part of mode " + to_string(t.mode));
    }

    if (s.rule == Rule::Identity) {
      if (!s.unifier.empty()) return VerifyResult::failure(step, "identity step carries bindings");
      if (i > 0 && t.steps[i - 1].rule == Rule::Identity) {
        return VerifyResult::failure(step, "consecutive identity reductions");
      }
      if (!goal_equal(g, g1)) return VerifyResult::failure(step, "identity step changes the goal");
      continue;
    }

    if (s.selected < 0 || static_cast<std::size_t>(s.selected) >= g.items.size()) {
      return VerifyResult::failure(step, "selected atom out of range");
    }
    std::size_t k = static_cast<std::size_t>(s.selected);
    const CoGoalItem& item = g.items[k];

    if (s.rule == Rule::LoopDetection) {
      bool found = false;
      for (const RationalTerm& hyp : item.hypotheses) {
        if (term_equal(apply(item.atom, s.unifier), apply(hyp, s.unifier))) {
          found = true;
          break;
        }
      }
      if (!found) {
        return VerifyResult::failure(step, "no hypothesis unifies with the atom under the "
                                           "recorded unifier");
      }
      CoGoal rest;
      for (std::size_t j = 0; j < g.items.size(); ++j) {
        if (j != k) rest.items.push_back(g.items[j]);
      }
      if (!goal_equal(g1, apply_to_goal(rest, s.unifier))) {
        return VerifyResult::failure(step, "loop detection successor mismatch");
      }
      continue;
    }

    // The remaining rules use a clause.
    if (!s.clause_id || *s.clause_id < 0 ||
        static_cast<std::size_t>(*s.clause_id) >= p.size()) {
      return VerifyResult::failure(step, "missing or invalid clause id");
    }
    Clause rc = rename_apart(p.clause(*s.clause_id), s.rename_gen);
    if (!(rc.head.functor() == item.atom.functor() && rc.head.arity() == item.atom.arity())) {
      return VerifyResult::failure(step, "clause head predicate does not fit the atom");
    }

    if (s.rule == Rule::Sld) {
      if (!term_equal(apply(rc.head, s.unifier), apply(item.atom, s.unifier))) {
        return VerifyResult::failure(step, "recorded substitution does not unify head and atom");
      }
      CoGoal next;
      if (t.mode == Mode::CoSld) {
        std::vector<RationalTerm> extended = extend_hyps(item.hypotheses, item.atom);
        for (std::size_t j = 0; j < k; ++j) next.items.push_back(g.items[j]);
        for (const RationalTerm& b : rc.body) next.items.push_back({b, extended});
        for (std::size_t j = k + 1; j < g.items.size(); ++j) next.items.push_back(g.items[j]);
        next = apply_to_goal(next, s.unifier);
      } else {
        for (std::size_t j = 0; j < k; ++j) {
          next.items.push_back({apply(g.items[j].atom, s.unifier), {}});
        }
        for (const RationalTerm& b : rc.body) next.items.push_back({apply(b, s.unifier), {}});
        for (std::size_t j = k + 1; j < g.items.size(); ++j) {
          next.items.push_back({apply(g.items[j].atom, s.unifier), {}});
        }
      }
      if (!goal_equal(g1, next)) return VerifyResult::failure(step, "sld successor mismatch");
      continue;
    }

    if (s.rule == Rule::Rewriting) {
      if (!term_equal(apply(rc.head, s.unifier), item.atom)) {
        return VerifyResult::failure(step, "recorded matcher does not rewrite head to atom");
      }
      std::set<Var> goal_vars = goal_free_vars(g);
      std::set<Var> clause_vars;
      for (const Var& v : free_vars(rc.head)) clause_vars.insert(v);
      for (const RationalTerm& b : rc.body) {
        for (const Var& v : free_vars(b)) clause_vars.insert(v);
      }
      for (const Var& v : s.unifier.domain()) {
        if (goal_vars.count(v)) {
          return VerifyResult::failure(step, "matcher binds a goal variable");
        }
        if (!clause_vars.count(v)) {
          return VerifyResult::failure(step, "matcher binds a variable foreign to the clause");
        }
      }
      CoGoal next;
      bool co = is_co_mode(t.mode);
      std::vector<RationalTerm> extended =
          co ? extend_hyps(item.hypotheses, item.atom) : std::vector<RationalTerm>{};
      for (std::size_t j = 0; j < k; ++j) next.items.push_back(g.items[j]);
      for (const RationalTerm& b : rc.body) next.items.push_back({apply(b, s.unifier), extended});
      for (std::size_t j = k + 1; j < g.items.size(); ++j) next.items.push_back(g.items[j]);
      if (!goal_equal(g1, next)) return VerifyResult::failure(step, "rewriting successor mismatch");
      continue;
    }

    // Substitution reduction.
    if (i > 0 && t.steps[i - 1].rule == Rule::Substitution) {
      return VerifyResult::failure(step, "consecutive substitution reductions");
    }
    if (!term_equal(apply(rc.head, s.unifier), apply(item.atom, s.unifier))) {
      return VerifyResult::failure(step, "recorded substitution does not unify head and atom");
    }
    if (match_term(rc.head, item.atom)) {
      return VerifyResult::failure(step, "substitution reduction used where the head subsumes "
                                         "the atom");
    }
    if (!goal_equal(g1, apply_to_goal(g, s.unifier))) {
      return VerifyResult::failure(step, "substitution successor mismatch");
    }
  }

  if (require_refutation && !t.goals.back().empty()) {
    return VerifyResult::failure(static_cast<int>(t.steps.size()), "final goal not empty");
  }
  if (!subst_equal(t.computed, computed_substitution(t))) {
    return VerifyResult::failure(-1, "computed substitution does not match the step unifiers");
  }
  return {};
}

}  // namespace cosres
