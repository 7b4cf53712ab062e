// cosres/syntax.hpp — concrete syntax: parsing and printing.
//
// Grammar (a small Prolog subset):
//   program  ::= { clause }
//   clause   ::= atom [ ":-" atom { "," atom } ] "."
//   query    ::= [ atom { "," atom } ]
//   term     ::= VAR | NAME [ "(" term { "," term } ")" ] | "mu" VAR "." term
//   NAME     ::= lowercase or digit start; hyphens are normalized to "_"
//   VAR      ::= uppercase or "_" start, optionally "#" generation
//
// "%" starts a line comment.  The mu-binder and the "#" generation suffix
// exist so rational terms and renamed variables round-trip through text;
// program files normally use neither.
//
// Cyclic terms print either as mu-binders (inline) or as recursive equation
// systems ("X = s(X)"), the latter being the default for answer bindings.

#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cosres/program.hpp"
#include "cosres/subst.hpp"
#include "cosres/term.hpp"
#include "cosres/unify.hpp"

namespace cosres {

struct SyntaxError : std::runtime_error {
  int line;
  int column;
  SyntaxError(int line_, int col_, const std::string& msg)
      : std::runtime_error(std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg),
        line(line_),
        column(col_) {}
};

namespace detail {

struct Token {
  enum class Kind { Name, Variable, LParen, RParen, LBrace, RBrace, Comma, Dot, Turnstile, Equals, End };
  Kind kind = Kind::End;
  std::string text;
  std::uint32_t gen = 0;
  int line = 1;
  int col = 1;
};

inline std::vector<Token> tokenize(const std::string& input) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto bump = [&](char c) {
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  };
  while (i < input.size()) {
    char c = input[i];
    if (c == '%') {
      while (i < input.size() && input[i] != '\n') {
        bump(input[i]);
        ++i;
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      bump(c);
      ++i;
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    auto single = [&](Token::Kind k) {
      t.kind = k;
      t.text = c;
      bump(c);
      ++i;
    };
    if (c == '(') { single(Token::Kind::LParen); out.push_back(t); continue; }
    if (c == ')') { single(Token::Kind::RParen); out.push_back(t); continue; }
    if (c == '{') { single(Token::Kind::LBrace); out.push_back(t); continue; }
    if (c == '}') { single(Token::Kind::RBrace); out.push_back(t); continue; }
    if (c == ',') { single(Token::Kind::Comma); out.push_back(t); continue; }
    if (c == '.') { single(Token::Kind::Dot); out.push_back(t); continue; }
    if (c == '=') { single(Token::Kind::Equals); out.push_back(t); continue; }
    if (c == ':') {
      if (i + 1 < input.size() && input[i + 1] == '-') {
        t.kind = Token::Kind::Turnstile;
        t.text = ":-";
        bump(':');
        bump('-');
        i += 2;
        out.push_back(t);
        continue;
      }
      throw SyntaxError(line, col, "expected ':-'");
    }
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      std::string name;
      while (i < input.size() &&
             (std::isalnum(static_cast<unsigned char>(input[i])) || input[i] == '_')) {
        name += input[i];
        bump(input[i]);
        ++i;
      }
      std::uint32_t gen = 0;
      if (i < input.size() && input[i] == '#') {
        bump('#');
        ++i;
        if (i >= input.size() || !std::isdigit(static_cast<unsigned char>(input[i]))) {
          throw SyntaxError(line, col, "expected generation digits after '#'");
        }
        std::string digits;
        while (i < input.size() && std::isdigit(static_cast<unsigned char>(input[i]))) {
          digits += input[i];
          bump(input[i]);
          ++i;
        }
        gen = static_cast<std::uint32_t>(std::stoul(digits));
      }
      t.kind = Token::Kind::Variable;
      t.text = std::move(name);
      t.gen = gen;
      out.push_back(t);
      continue;
    }
    if (std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c))) {
      std::string name;
      while (i < input.size() &&
             (std::isalnum(static_cast<unsigned char>(input[i])) || input[i] == '_' ||
              input[i] == '-')) {
        name += input[i] == '-' ? '_' : input[i];
        bump(input[i]);
        ++i;
      }
      t.kind = Token::Kind::Name;
      t.text = std::move(name);
      out.push_back(t);
      continue;
    }
    throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
  }
  Token end;
  end.kind = Token::Kind::End;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : tokens_(tokenize(text)) {}

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  Token take() {
    Token t = peek();
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  bool at(Token::Kind k) const { return peek().kind == k; }
  Token expect(Token::Kind k, const std::string& what) {
    if (!at(k)) throw SyntaxError(peek().line, peek().col, "expected " + what);
    return take();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(peek().line, peek().col, msg);
  }
  bool done() const { return at(Token::Kind::End); }

  // Term parsing shares one builder and dedupe map per syntactic unit
  // (clause, query, equation system), so repeated variables are one node.
  struct TermCtx {
    TermBuilder builder;
    std::map<Var, std::uint32_t> vars;
    std::vector<std::pair<Var, std::uint32_t>> mu_scope;
  };

  std::uint32_t parse_term_node(TermCtx& ctx) {
    const Token& t = peek();
    if (t.kind == Token::Kind::Variable) {
      Token v = take();
      Var var{v.text, v.gen};
      for (auto it = ctx.mu_scope.rbegin(); it != ctx.mu_scope.rend(); ++it) {
        if (it->first == var) return it->second;
      }
      auto [mit, fresh] = ctx.vars.try_emplace(var, 0);
      if (fresh) mit->second = ctx.builder.var(var);
      return mit->second;
    }
    if (t.kind == Token::Kind::Name) {
      // Contextual mu-binder: `mu X. body` names the body's root.
      if (t.text == "mu" && peek(1).kind == Token::Kind::Variable &&
          peek(2).kind == Token::Kind::Dot) {
        take();
        Token v = take();
        take();  // '.'
        Var binder{v.text, v.gen};
        std::uint32_t placeholder = ctx.builder.forward();
        ctx.mu_scope.push_back({binder, placeholder});
        std::uint32_t body = parse_term_node(ctx);
        ctx.mu_scope.pop_back();
        if (body == placeholder) fail("mu term binds no structure");
        ctx.builder.alias(placeholder, body);
        return body;
      }
      Token f = take();
      std::vector<std::uint32_t> args;
      if (at(Token::Kind::LParen)) {
        take();
        args.push_back(parse_term_node(ctx));
        while (at(Token::Kind::Comma)) {
          take();
          args.push_back(parse_term_node(ctx));
        }
        expect(Token::Kind::RParen, "')'");
      }
      return ctx.builder.compound(f.text, std::move(args));
    }
    fail("expected a term");
  }

  RationalTerm parse_whole_term() {
    TermCtx ctx;
    std::uint32_t id = parse_term_node(ctx);
    if (!done()) fail("trailing input after term");
    return ctx.builder.build(id);
  }

  RationalTerm parse_atom(TermCtx& ctx) {
    int line = peek().line, col = peek().col;
    std::uint32_t id = parse_term_node(ctx);
    RationalTerm t = ctx.builder.build(id);
    if (t.root_is_var()) throw SyntaxError(line, col, "an atom cannot be a variable");
    return t;
  }

  std::vector<RationalTerm> parse_query_body() {
    std::vector<RationalTerm> out;
    if (done()) return out;
    TermCtx ctx;
    out.push_back(parse_atom(ctx));
    while (at(Token::Kind::Comma)) {
      take();
      out.push_back(parse_atom(ctx));
    }
    if (!done()) fail("trailing input after query");
    return out;
  }

  Program parse_whole_program() {
    std::vector<Clause> clauses;
    while (!done()) {
      TermCtx ctx;
      Clause c;
      c.head = parse_atom(ctx);
      if (at(Token::Kind::Turnstile)) {
        take();
        c.body.push_back(parse_atom(ctx));
        while (at(Token::Kind::Comma)) {
          take();
          c.body.push_back(parse_atom(ctx));
        }
      }
      expect(Token::Kind::Dot, "'.' at end of clause");
      clauses.push_back(std::move(c));
    }
    return Program(std::move(clauses));
  }

  EquationSystem parse_equation_system() {
    EquationSystem sys;
    if (done()) return sys;
    TermCtx ctx;
    auto one = [&] {
      std::uint32_t l = parse_term_node(ctx);
      expect(Token::Kind::Equals, "'='");
      std::uint32_t r = parse_term_node(ctx);
      sys.equations.emplace_back(ctx.builder.build(l), ctx.builder.build(r));
    };
    one();
    while (at(Token::Kind::Comma)) {
      take();
      one();
    }
    if (!done()) fail("trailing input after equations");
    return sys;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

// Back-edge targets of a DFS over the graph: the nodes that need a name
// (mu-binder or equation) when printing.  Returned in first-visit order.
inline std::vector<std::uint32_t> nodes_needing_names(const RationalTerm& t) {
  enum { White, Grey, Black };
  std::vector<int> color(t.node_count(), White);
  std::set<std::uint32_t> named;
  std::vector<std::uint32_t> visit_order;
  struct Frame {
    std::uint32_t node;
    std::size_t next_child = 0;
  };
  std::vector<Frame> stack{{t.root()}};
  visit_order.push_back(t.root());
  color[t.root()] = Grey;
  while (!stack.empty()) {
    Frame& f = stack.back();
    const TermNode& n = t.node(f.node);
    if (f.next_child >= n.children.size()) {
      color[f.node] = Black;
      stack.pop_back();
      continue;
    }
    std::uint32_t c = n.children[f.next_child++];
    if (color[c] == Grey) {
      named.insert(c);
    } else if (color[c] == White) {
      color[c] = Grey;
      visit_order.push_back(c);
      stack.push_back({c});
    }
  }
  std::vector<std::uint32_t> out;
  for (std::uint32_t n : visit_order) {
    if (named.count(n)) out.push_back(n);
  }
  return out;
}

inline std::set<std::string> used_var_displays(const RationalTerm& t) {
  std::set<std::string> used;
  for (const TermNode& n : t.nodes()) {
    if (n.is_var) used.insert(Var{n.symbol, n.gen}.display());
  }
  return used;
}

inline std::vector<std::string> fresh_names(const std::set<std::string>& used, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t k = 1; out.size() < count; ++k) {
    std::string cand = "V" + std::to_string(k);
    if (!used.count(cand)) out.push_back(cand);
  }
  return out;
}

}  // namespace detail

enum class CycleStyle { MuBinder, Equations };

// Inline rendering with mu-binders for cycles.  Deterministic: binder names
// are V1, V2, ... skipping any variable display already used in the term.
inline std::string to_text(const RationalTerm& t) {
  std::vector<std::uint32_t> named_order = detail::nodes_needing_names(t);
  std::vector<std::string> fresh = detail::fresh_names(detail::used_var_displays(t),
                                                       named_order.size());
  std::map<std::uint32_t, std::string> name;
  for (std::size_t i = 0; i < named_order.size(); ++i) name[named_order[i]] = fresh[i];

  std::set<std::uint32_t> on_path;
  auto rec = [&](auto&& self, std::uint32_t id) -> std::string {
    auto nit = name.find(id);
    if (nit != name.end() && on_path.count(id)) return nit->second;
    const TermNode& n = t.node(id);
    std::string body;
    on_path.insert(id);
    if (n.is_var) {
      body = Var{n.symbol, n.gen}.display();
    } else if (n.children.empty()) {
      body = n.symbol;
    } else {
      body = n.symbol + "(";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) body += ", ";
        body += self(self, n.children[i]);
      }
      body += ")";
    }
    on_path.erase(id);
    if (nit != name.end()) return "mu " + nit->second + ". " + body;
    return body;
  };
  return rec(rec, t.root());
}

// Renders one binding `v = t` as a recursive equation system, e.g.
// "X = s(X)" or "X = p(V1, a), V1 = s(V1)".  Parsing the result back as an
// equation system and solving it reconstructs the binding exactly.
inline std::string binding_equations(const Var& v, const RationalTerm& t) {
  std::vector<std::uint32_t> named_order = detail::nodes_needing_names(t);
  std::set<std::string> used = detail::used_var_displays(t);
  used.insert(v.display());

  std::map<std::uint32_t, std::string> name;
  bool root_named = false;
  std::vector<std::uint32_t> aux;
  for (std::uint32_t id : named_order) {
    if (id == t.root()) {
      name[id] = v.display();
      root_named = true;
    } else {
      aux.push_back(id);
    }
  }
  std::vector<std::string> fresh = detail::fresh_names(used, aux.size());
  for (std::size_t i = 0; i < aux.size(); ++i) name[aux[i]] = fresh[i];

  auto body = [&](std::uint32_t def) {
    auto rec = [&](auto&& self, std::uint32_t id, bool top) -> std::string {
      if (!top) {
        auto nit = name.find(id);
        if (nit != name.end()) return nit->second;
      }
      const TermNode& n = t.node(id);
      if (n.is_var) return Var{n.symbol, n.gen}.display();
      if (n.children.empty()) return n.symbol;
      std::string s = n.symbol + "(";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) s += ", ";
        s += self(self, n.children[i], false);
      }
      return s + ")";
    };
    return rec(rec, def, true);
  };

  std::string out = v.display() + " = " + body(t.root());
  for (std::uint32_t id : named_order) {
    if (root_named && id == t.root()) continue;
    out += ", " + name.at(id) + " = " + body(id);
  }
  return out;
}

// Human-readable substitution, one recursive equation group per binding.
inline std::string to_text(const Substitution& s) {
  if (s.empty()) return "{}";
  std::string out = "{";
  bool first = true;
  for (const auto& [v, t] : s.bindings()) {
    if (!first) out += "; ";
    first = false;
    out += binding_equations(v, t);
  }
  return out + "}";
}

inline std::string to_text(const Clause& c) {
  std::string s = to_text(c.head);
  if (!c.body.empty()) {
    s += " :- ";
    for (std::size_t i = 0; i < c.body.size(); ++i) {
      if (i) s += ", ";
      s += to_text(c.body[i]);
    }
  }
  return s + ".";
}

inline std::string to_text(const Program& p) {
  std::string s;
  for (const Clause& c : p.clauses()) {
    s += to_text(c);
    s += "\n";
  }
  return s;
}

inline RationalTerm parse_term(const std::string& text) {
  detail::Parser p(text);
  return p.parse_whole_term();
}

inline std::vector<RationalTerm> parse_query(const std::string& text) {
  detail::Parser p(text);
  return p.parse_query_body();
}

inline Program parse_program(const std::string& text) {
  detail::Parser p(text);
  return p.parse_whole_program();
}

inline EquationSystem parse_equations(const std::string& text) {
  detail::Parser p(text);
  return p.parse_equation_system();
}

// Parses one rendered binding back into (var, term) via the equation solver.
inline std::pair<Var, RationalTerm> parse_binding(const std::string& eqs) {
  EquationSystem sys = parse_equations(eqs);
  if (sys.equations.empty()) throw std::logic_error("parse_binding: empty equation list");
  const RationalTerm& lhs = sys.equations.front().first;
  if (!lhs.root_is_var()) throw std::logic_error("parse_binding: left-hand side not a variable");
  Var v = lhs.root_var();
  Substitution sol = solve(sys);
  if (const RationalTerm* t = sol.lookup(v)) return {v, *t};
  return {v, RationalTerm::variable(v)};
}

}  // namespace cosres
