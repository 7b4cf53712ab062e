// cosres/transform.hpp — turning co-S refutations into co-rewriting-id and
// co-SLD refutations, with independent re-verification of every intermediate.
//
// Given a co-S-refutation of G with computed substitution sigma, the
// transformation walks the trace once: rewriting steps are replayed on the
// sigma-instantiated goals with the same clause, substitution reductions
// become identity reductions, and loop detections keep firing with the empty
// unifier.  The result is a co-rewriting-id refutation of G·sigma whose
// computed substitution is empty; stripping the identity steps then yields a
// co-SLD refutation.

#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cosres/engine.hpp"
#include "cosres/subst.hpp"

namespace cosres {

// sigmas[k-1] is the composition theta_k · theta_{k+1} · ... · theta_{m+1}
// with theta_{m+1} the empty substitution appended once, so the last entry is
// always the identity.
struct SuffixCompositions {
  std::vector<Substitution> sigmas;

  const Substitution& sigma(std::size_t k) const { return sigmas.at(k - 1); }
  std::size_t count() const { return sigmas.size(); }
};

inline SuffixCompositions suffix_compositions(const std::vector<Substitution>& thetas) {
  SuffixCompositions out;
  out.sigmas.assign(thetas.size() + 1, Substitution{});
  for (std::size_t k = thetas.size(); k-- > 0;) {
    out.sigmas[k] = compose(thetas[k], out.sigmas[k + 1]);
  }
  return out;
}

struct TransformError : std::runtime_error {
  int step;
  TransformError(int step_, const std::string& msg)
      : std::runtime_error("transform: step " + std::to_string(step_) + ": " + msg),
        step(step_) {}
};

namespace detail {
inline std::set<Var> clause_vars(const Clause& c) {
  std::set<Var> vars;
  for (const Var& v : free_vars(c.head)) vars.insert(v);
  for (const RationalTerm& b : c.body) {
    for (const Var& v : free_vars(b)) vars.insert(v);
  }
  return vars;
}
}  // namespace detail

// Transforms a verified co-S refutation of G into a co-rewriting-id
// refutation of G·sigma (sigma the computed substitution) with empty computed
// substitution.  Every output step is re-verified; a failure there indicates
// an engine bug, not bad input.
inline DerivationTrace transform(const Program& p, const DerivationTrace& t) {
  if (t.mode != Mode::CoSres) {
    throw TransformError(-1, "input trace is not a co-S-resolution trace");
  }
  if (VerifyResult v = verify_trace(p, t); !v) {
    throw TransformError(v.step, "input does not verify: " + v.reason);
  }

  std::vector<Substitution> thetas;
  for (const StepLabel& s : t.steps) {
    if (s.rule == Rule::Substitution || s.rule == Rule::LoopDetection) {
      thetas.push_back(s.unifier);
    }
  }
  SuffixCompositions sc = suffix_compositions(thetas);

  DerivationTrace out;
  out.mode = Mode::CoRewId;
  std::size_t cur = 1;  // index of the next unconsumed unifier's suffix
  out.goals.push_back(apply_to_goal(t.goals.front(), sc.sigma(cur)));
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const StepLabel& s = t.steps[i];
    StepLabel ns;
    ns.source_step = static_cast<int>(i);
    switch (s.rule) {
      case Rule::Rewriting: {
        ns.rule = Rule::Rewriting;
        ns.selected = s.selected;
        ns.clause_id = s.clause_id;
        ns.rename_gen = s.rename_gen;
        Clause rc = rename_apart(p.clause(*s.clause_id), s.rename_gen);
        ns.unifier = restrict_to(compose(s.unifier, sc.sigma(cur)), detail::clause_vars(rc));
        break;
      }
      case Rule::Substitution:
        ns.rule = Rule::Identity;
        ++cur;
        break;
      case Rule::LoopDetection:
        ns.rule = Rule::LoopDetection;
        ns.selected = s.selected;
        ++cur;
        break;
      default:
        throw TransformError(static_cast<int>(i), "unexpected rule in co-S trace");
    }
    out.steps.push_back(std::move(ns));
    out.goals.push_back(apply_to_goal(t.goals[i + 1], sc.sigma(cur)));
  }
  out.computed = computed_substitution(out);

  if (VerifyResult v = verify_trace(p, out); !v) {
    throw TransformError(v.step, "transformed step fails to re-verify: " + v.reason);
  }
  return out;
}

// Drops every identity-step target from a co-rewriting-id refutation.  The
// surviving rewriting steps are special cases of co-SLD clause steps (their
// matchers are unifiers that touch no goal variable), so the result verifies
// as a co-SLD refutation.
inline DerivationTrace strip_identity(const DerivationTrace& t) {
  if (t.mode != Mode::CoRewId) {
    throw std::logic_error("strip_identity: input is not a co-rewriting-id trace");
  }
  DerivationTrace out;
  out.mode = Mode::CoSld;
  out.goals.push_back(t.goals.front());
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const StepLabel& s = t.steps[i];
    if (s.rule == Rule::Identity) continue;
    StepLabel ns = s;
    if (ns.rule == Rule::Rewriting) ns.rule = Rule::Sld;
    out.steps.push_back(std::move(ns));
    out.goals.push_back(t.goals[i + 1]);
  }
  out.computed = computed_substitution(out);
  return out;
}

struct SoundnessReport {
  bool pass = false;
  Substitution sigma;
  std::optional<DerivationTrace> transformed;
  std::optional<DerivationTrace> stripped;
  std::string failed_stage;  // empty when pass
  int failing_step = -1;
  std::vector<std::string> detail;

  std::string to_string() const {
    std::string s;
    for (const std::string& line : detail) {
      s += line;
      s += "\n";
    }
    return s;
  }
};

// Runs the whole pipeline on a co-S refutation: checks the recorded computed
// substitution, transforms to co-rewriting-id (computed substitution must be
// empty), strips identities and verifies the result as a co-SLD refutation
// whose answer, restricted to the instantiated initial goal's variables, is
// again empty.
inline SoundnessReport soundness_check(const Program& p, const DerivationTrace& t) {
  SoundnessReport r;
  auto fail = [&](const std::string& stage, int step, const std::string& why) {
    r.pass = false;
    r.failed_stage = stage;
    r.failing_step = step;
    r.detail.push_back("FAIL [" + stage + "] " + why);
    return r;
  };

  if (VerifyResult v = verify_trace(p, t); !v) {
    return fail("input", v.step, v.reason);
  }
  r.detail.push_back("input co-S refutation verifies (" + std::to_string(t.steps.size()) +
                     " steps)");

  r.sigma = computed_substitution(t);
  if (!subst_equal(r.sigma, t.computed)) {
    return fail("computed", -1, "recorded computed substitution is not the composition of the "
                                "step unifiers");
  }
  r.detail.push_back("computed substitution sigma = " + to_text(r.sigma));

  DerivationTrace tr;
  try {
    tr = transform(p, t);
  } catch (const TransformError& e) {
    return fail("transform", e.step, e.what());
  }
  if (!tr.computed.empty()) {
    return fail("transform", -1, "transformed computed substitution is not empty");
  }
  r.transformed = tr;
  r.detail.push_back("co-rewriting-id refutation of the instantiated goal verifies, computed "
                     "substitution empty");

  DerivationTrace st = strip_identity(tr);
  if (VerifyResult v = verify_trace(p, st); !v) {
    return fail("strip", v.step, v.reason);
  }
  // The clause-step unifiers of the stripped trace bind only renamed clause
  // variables, so the answer for the instantiated goal is the identity.
  Substitution answer = restrict_to(st.computed, goal_free_vars(st.goals.front()));
  if (!answer.empty()) {
    return fail("co-sld-answer", -1,
                "stripped co-SLD refutation instantiates the goal: " + to_text(answer));
  }
  r.stripped = st;
  r.detail.push_back("co-SLD refutation verifies with identity answer for the instantiated goal");
  r.pass = true;
  return r;
}

}  // namespace cosres
