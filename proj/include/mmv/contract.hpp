#pragma once

#include "mmv/logic.hpp"

#include <map>
#include <string>
#include <vector>

namespace mmv {

struct Span {
  std::size_t begin = 0, end = 0;  // byte offsets, end exclusive
  int line = 0, col = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

inline std::string to_string(const Span& s) { return std::to_string(s.line) + ":" + std::to_string(s.col); }

// A binder pattern in a user-written stack type. Types are optional.
struct Pattern {
  enum class Kind { Var, Wild, Pair };
  Kind kind = Kind::Wild;
  std::string name;
  Type type;
  std::vector<Pattern> kids;

  static Pattern var(std::string x, Type t = {}) { return {Kind::Var, std::move(x), std::move(t), {}}; }
  static Pattern wild(Type t = {}) { return {Kind::Wild, "", std::move(t), {}}; }
  static Pattern pair(Pattern a, Pattern b, Type t = {}) {
    return {Kind::Pair, "", std::move(t), {std::move(a), std::move(b)}};
  }

  friend bool operator==(const Pattern& a, const Pattern& b) {
    return a.kind == b.kind && a.name == b.name && a.type == b.type && a.kids == b.kids;
  }
};

inline void pattern_vars(const Pattern& p, std::vector<std::string>& out) {
  if (p.kind == Pattern::Kind::Var) out.push_back(p.name);
  for (const auto& k : p.kids) pattern_vars(k, out);
}

// { p1 :. p2 :. _ | pred } as written; `rest` is the trailing `_`.
struct StackAnnot {
  std::vector<Pattern> items;
  bool rest = false;
  Formula pred = Formula::top();
  friend bool operator==(const StackAnnot& a, const StackAnnot& b) {
    return a.items == b.items && a.rest == b.rest && a.pred == b.pred;
  }
};

struct SpecAnnot {
  StackAnnot pre, post, exc;
  std::vector<Binding> ghosts;
  friend bool operator==(const SpecAnnot& a, const SpecAnnot& b) {
    return a.pre == b.pre && a.post == b.post && a.exc == b.exc && a.ghosts == b.ghosts;
  }
};

enum class AnnotKind { Assert, Assume, LoopInv, LambdaAnnot };

inline const char* annot_name(AnnotKind k) {
  switch (k) {
    case AnnotKind::Assert: return "Assert";
    case AnnotKind::Assume: return "Assume";
    case AnnotKind::LoopInv: return "LoopInv";
    case AnnotKind::LambdaAnnot: return "LambdaAnnot";
  }
  return "?";
}

struct Annotation {
  AnnotKind kind;
  StackAnnot stack;  // Assert, Assume, LoopInv
  SpecAnnot spec;    // LambdaAnnot
  Span span;
  friend bool operator==(const Annotation& a, const Annotation& b) {
    return a.kind == b.kind && a.stack == b.stack && a.spec == b.spec;
  }
};

struct AnnotationSite {
  std::vector<Annotation> before, after;
  friend bool operator==(const AnnotationSite& a, const AnnotationSite& b) {
    return a.before == b.before && a.after == b.after;
  }
};

struct AnnotatedContract {
  Type parameter, storage;
  SpecAnnot spec;
  InstrSeq code;
  Measures measures;
  std::map<InstrId, AnnotationSite> annotations;
  std::map<const void*, Span> spans;

  const AnnotationSite* site(const Instr& i) const {
    auto it = annotations.find(i.id());
    return it == annotations.end() ? nullptr : &it->second;
  }
  const Annotation* find(const Instr& i, AnnotKind k) const {
    if (const auto* s = site(i))
      for (const auto& a : s->before)
        if (a.kind == k) return &a;
    return nullptr;
  }
  Span span_of(const Instr& i) const {
    auto it = spans.find(i.id());
    return it == spans.end() ? Span{} : it->second;
  }
};

namespace detail {

inline void preorder(const InstrSeq& is, std::vector<Instr>& out) {
  for (const auto& i : is) {
    out.push_back(i);
    preorder(i.body(), out);
    preorder(i.body2(), out);
  }
}

}  // namespace detail

// Structural equality, including annotations at corresponding instructions.
inline bool contracts_equal(const AnnotatedContract& a, const AnnotatedContract& b) {
  if (!(a.parameter == b.parameter && a.storage == b.storage && a.spec == b.spec && a.measures == b.measures))
    return false;
  if (compare_seq(a.code, b.code) != 0) return false;
  std::vector<Instr> xs, ys;
  detail::preorder(a.code, xs);
  detail::preorder(b.code, ys);
  static const AnnotationSite empty;
  for (size_t k = 0; k < xs.size(); ++k) {
    const auto* s = a.site(xs[k]);
    const auto* t = b.site(ys[k]);
    if (!((s ? *s : empty) == (t ? *t : empty))) return false;
  }
  return true;
}

// ---------------------------------------------------------------- printing

inline std::string to_string(const Pattern& p) {
  std::string s;
  switch (p.kind) {
    case Pattern::Kind::Var: s = p.name; break;
    case Pattern::Kind::Wild: s = "_"; break;
    case Pattern::Kind::Pair: s = "(" + to_string(p.kids[0]) + ", " + to_string(p.kids[1]) + ")"; break;
  }
  return p.type.valid() ? s + ":" + type_atom(p.type) : s;
}

inline std::string to_string(const StackAnnot& a) {
  std::string out = "{";
  for (size_t k = 0; k < a.items.size(); ++k) out += (k ? " :. " : " ") + to_string(a.items[k]);
  if (a.rest) out += a.items.empty() ? " _" : " :. _";
  return out + " | " + to_string(a.pred) + " }";
}

inline std::string to_string(const SpecAnnot& s) {
  std::string out = to_string(s.pre) + " -> " + to_string(s.post) + " & " + to_string(s.exc);
  if (!s.ghosts.empty()) {
    out += " (";
    for (size_t k = 0; k < s.ghosts.size(); ++k)
      out += (k ? ", " : "") + s.ghosts[k].name + ":" + type_atom(s.ghosts[k].type);
    out += ")";
  }
  return out;
}

inline std::string to_string(const Annotation& a) {
  std::string body = a.kind == AnnotKind::LambdaAnnot ? to_string(a.spec) : to_string(a.stack);
  return "<< " + std::string(annot_name(a.kind)) + " " + body + " >>";
}

inline std::string to_string(const MeasureDef& m) {
  return "Measure " + m.name + " : " + to_string(Type::list(m.elem)) + " -> " + to_string(m.result) +
         " where [] = " + to_string(m.nil_rhs) + " | " + m.head_var + " :: " + m.tail_var + " = " +
         to_string(m.cons_rhs);
}

namespace detail {

class Printer {
 public:
  explicit Printer(const AnnotatedContract& c) : c_(c) {}

  std::string seq(const InstrSeq& is, int depth) {
    if (is.empty()) return "{}";
    std::string pad(size_t(depth + 1) * 2, ' ');
    std::string out = "{\n";
    for (size_t k = 0; k < is.size(); ++k) {
      const auto* site = c_.site(is[k]);
      if (site)
        for (const auto& a : site->before) out += pad + to_string(a) + "\n";
      out += pad + instr(is[k], depth + 1);
      if (site)
        for (const auto& a : site->after) out += " " + to_string(a);
      out += k + 1 < is.size() ? " ;\n" : "\n";
    }
    return out + std::string(size_t(depth) * 2, ' ') + "}";
  }

 private:
  std::string instr(const Instr& i, int depth) {
    std::string name = op_name(i.op());
    switch (i.op()) {
      case Op::Seq: return seq(i.body(), depth);
      case Op::Dip:
      case Op::Loop:
      case Op::Iter: return name + " " + seq(i.body(), depth);
      case Op::If:
      case Op::IfCons: return name + " " + seq(i.body(), depth) + " " + seq(i.body2(), depth);
      case Op::Lambda: return name + " " + type_atom(i.type()) + " " + type_atom(i.type2()) + " " + seq(i.body(), depth);
      default: return to_string(i);
    }
  }

  const AnnotatedContract& c_;
};

}  // namespace detail

inline std::string pretty_print(const AnnotatedContract& c) {
  std::string out = "parameter " + to_string(c.parameter) + ";\nstorage " + to_string(c.storage) + ";\n";
  for (const auto& m : c.measures) out += "<< " + to_string(m) + " >>\n";
  out += "<< ContractAnnot " + to_string(c.spec) + " >>\n";
  out += "code " + detail::Printer(c).seq(c.code, 0) + ";\n";
  return out;
}

}  // namespace mmv
