#pragma once

#include "mmv/contract.hpp"

#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mmv {

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int l, int c)
      : std::runtime_error("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + msg), line(l), col(c) {}
  int line, col;
};

namespace detail {

enum class Tok { Ident, Int, String, Bytes, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t begin, end;
  int line, col;
};

inline std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  std::size_t line_start = 0;
  auto col = [&](std::size_t at) { return int(at - line_start) + 1; };
  auto newline = [&](std::size_t at) {
    ++line;
    line_start = at + 1;
  };
  static const char* syms[] = {"::", ":.", "->", "=>", "<>", "<=", ">=", "<<", ">>", "&&", "||", ":", "=", "<",
                               ">",  "+",  "*",  ";",  ",",  ".",  "(",  ")",  "[",  "]",  "{",  "}",  "|", "&", "_"};
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      newline(i);
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      int l = line, cl = col(i);
      i += 2;
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) {
        if (src[i] == '\n') newline(i);
        ++i;
      }
      if (i + 1 >= src.size()) throw ParseError("unterminated comment", l, cl);
      i += 2;
      continue;
    }
    std::size_t start = i;
    int l = line, cl = col(i);
    auto push = [&](Tok k, std::string text) { out.push_back({k, std::move(text), start, i, l, cl}); };
    if (c == '0' && i + 1 < src.size() && src[i + 1] == 'x') {
      i += 2;
      std::string raw;
      while (i < src.size() && std::isxdigit(static_cast<unsigned char>(src[i]))) raw += src[i++];
      if (raw.size() % 2) throw ParseError("odd number of hex digits", l, cl);
      std::string bytes;
      for (std::size_t k = 0; k < raw.size(); k += 2) bytes += char(std::stoi(raw.substr(k, 2), nullptr, 16));
      push(Tok::Bytes, bytes);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      ++i;
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      push(Tok::Int, src.substr(start, i - start));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || (c == '_' && i + 1 < src.size() &&
                                                        (std::isalnum(static_cast<unsigned char>(src[i + 1])) || src[i + 1] == '_'))) {
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_' || src[i] == '\'')) ++i;
      push(Tok::Ident, src.substr(start, i - start));
      continue;
    }
    if (c == '"') {
      ++i;
      std::string s;
      while (i < src.size() && src[i] != '"') {
        if (src[i] == '\n') throw ParseError("unterminated string", l, cl);
        if (src[i] == '\\' && i + 1 < src.size()) ++i;
        s += src[i++];
      }
      if (i >= src.size()) throw ParseError("unterminated string", l, cl);
      ++i;
      push(Tok::String, s);
      continue;
    }
    bool matched = false;
    for (const char* s : syms) {
      std::size_t n = std::char_traits<char>::length(s);
      if (src.compare(i, n, s) == 0) {
        i += n;
        push(Tok::Sym, s);
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
  }
  out.push_back({Tok::End, "", src.size(), src.size(), line, col(src.size())});
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& src) : toks_(lex(src)) {}

  bool allow_quantifiers = false;

  AnnotatedContract contract() {
    AnnotatedContract c;
    bool have_param = false, have_storage = false, have_code = false, have_spec = false;
    if (at_end()) fail("empty contract");
    while (!at_end()) {
      if (accept_word("parameter")) {
        if (have_param) fail("duplicate parameter section");
        c.parameter = type();
        have_param = true;
        expect(";");
      } else if (accept_word("storage")) {
        if (have_storage) fail("duplicate storage section");
        c.storage = type();
        have_storage = true;
        expect(";");
      } else if (peek_sym("<<")) {
        Token open = next();
        if (accept_word("Measure")) {
          MeasureDef m = measure();
          if (find_measure(c.measures, m.name)) fail("duplicate annotation: measure " + m.name);
          c.measures.push_back(std::move(m));
        } else if (accept_word("ContractAnnot")) {
          if (have_spec) fail_at(open, "duplicate annotation: ContractAnnot");
          c.spec = spec();
          have_spec = true;
        } else {
          fail("expected Measure or ContractAnnot at top level");
        }
        expect(">>");
      } else if (accept_word("code")) {
        if (have_code) fail("duplicate code section");
        c.code = block(c);
        have_code = true;
        accept(";");
      } else {
        fail("expected parameter, storage, code or an annotation");
      }
    }
    if (!have_param) fail("missing parameter section");
    if (!have_storage) fail("missing storage section");
    if (!have_code) fail("missing code section");
    if (!have_spec) fail("missing ContractAnnot");
    return c;
  }

  Type type() {
    if (accept("(")) {
      Type t = type();
      expect(")");
      return t;
    }
    Token t = expect_ident("a type");
    if (t.text == "int") return Type::int_();
    if (t.text == "nat") return Type::nat();
    if (t.text == "bytes") return Type::bytes();
    if (t.text == "address") return Type::address();
    if (t.text == "operation") return Type::operation();
    if (t.text == "list") return Type::list(type());
    if (t.text == "pair" || t.text == "lambda") {
      Type a = type();
      Type b = type();
      return t.text == "pair" ? Type::pair(a, b) : Type::arrow(a, b);
    }
    fail_at(t, "unknown type " + t.text);
  }

  Value value(const Type& t) {
    if (t.is(TypeKind::Arrow)) return Value::code(code_literal());
    if (accept("(")) {
      Value v = value(t);
      expect(")");
      return v;
    }
    switch (t.kind()) {
      case TypeKind::Int:
      case TypeKind::Nat: return Value::integer(Int(expect_kind(Tok::Int, "an integer").text));
      case TypeKind::Bytes: return Value::bytes(expect_kind(Tok::Bytes, "bytes").text);
      case TypeKind::Address: return Value::address(expect_kind(Tok::String, "an address string").text);
      case TypeKind::Operation: return transfer_value();
      case TypeKind::Pair: {
        expect_word("Pair");
        Value a = value(t.fst());
        Value b = value(t.snd());
        return Value::pair(a, b);
      }
      case TypeKind::List: {
        expect("{");
        std::vector<Value> xs;
        if (!accept("}")) {
          do {
            if (peek_sym("}")) break;
            xs.push_back(value(t.elem()));
          } while (accept(";"));
          expect("}");
        }
        return Value::list(xs);
      }
      default: break;
    }
    fail("unsupported value type");
  }

  // values whose type is not known in advance (transfer arguments)
  Value untyped_value() {
    const Token& t = peek();
    if (t.kind == Tok::Int) return Value::integer(Int(next().text));
    if (t.kind == Tok::String) return Value::address(next().text);
    if (t.kind == Tok::Bytes) return Value::bytes(next().text);
    if (accept("(")) {
      Value v = untyped_value();
      expect(")");
      return v;
    }
    if (accept_word("Pair")) {
      Value a = untyped_value();
      return Value::pair(a, untyped_value());
    }
    if (peek_word("Transfer")) return transfer_value();
    if (accept("{")) {
      std::vector<Value> xs;
      if (!accept("}")) {
        do {
          if (peek_sym("}")) break;
          xs.push_back(untyped_value());
        } while (accept(";"));
        expect("}");
      }
      return Value::list(xs);
    }
    fail("expected a value");
  }

  Formula formula() {
    Formula a = disjunction();
    if (accept("=>")) return Formula::implies(a, formula());
    return a;
  }

  Term term() {
    Term a = sum();
    if (accept("::")) return Term::cons(a, term());
    return a;
  }

  bool at_end() const { return toks_[pos_].kind == Tok::End; }
  const Token& peek() const { return toks_[pos_]; }
  [[noreturn]] void fail(const std::string& msg) const { fail_at(peek(), msg); }

 private:
  // ---------------------------------------------------------------- tokens

  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool peek_sym(const char* s) const { return peek().kind == Tok::Sym && peek().text == s; }
  bool peek_word(const char* s) const { return peek().kind == Tok::Ident && peek().text == s; }
  bool accept(const char* s) {
    if (!peek_sym(s)) return false;
    ++pos_;
    return true;
  }
  bool accept_word(const char* s) {
    if (!peek_word(s)) return false;
    ++pos_;
    return true;
  }
  void expect(const char* s) {
    if (!accept(s)) fail(std::string("expected '") + s + "'" + found());
  }
  void expect_word(const char* s) {
    if (!accept_word(s)) fail(std::string("expected ") + s + found());
  }
  Token expect_ident(const char* what) { return expect_kind(Tok::Ident, what); }
  Token expect_kind(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what + found());
    return next();
  }
  std::string found() const {
    if (at_end()) return ", found end of input";
    return ", found '" + peek().text + "'";
  }
  [[noreturn]] static void fail_at(const Token& t, const std::string& msg) { throw ParseError(msg, t.line, t.col); }

  Span span_from(const Token& first) const {
    const Token& last = toks_[pos_ > 0 ? pos_ - 1 : 0];
    return Span{first.begin, last.end, first.line, first.col};
  }

  // ---------------------------------------------------------------- instructions

  InstrSeq block(AnnotatedContract& c) {
    expect("{");
    InstrSeq out;
    std::vector<Annotation> pending;
    for (;;) {
      while (peek_sym("<<")) pending.push_back(code_annotation());
      if (accept("}")) {
        if (!pending.empty()) {
          if (out.empty()) fail_at(toks_[pos_ - 1], "annotation is not attached to any instruction");
          attach_after(c, out.back(), pending);
        }
        return out;
      }
      Instr i = instr(c);
      attach_before(c, i, pending);
      pending.clear();
      std::vector<Annotation> after;
      while (peek_sym("<<")) after.push_back(code_annotation());
      if (!after.empty()) attach_after(c, i, after);
      out.push_back(i);
      if (!accept(";")) {
        expect("}");
        return out;
      }
    }
  }

  // code literal inside PUSH values and predicates: annotations are not allowed there
  InstrSeq code_literal() {
    AnnotatedContract scratch;
    ++in_literal_;
    InstrSeq is = block(scratch);
    --in_literal_;
    if (!scratch.annotations.empty()) fail("annotations are not allowed inside code values");
    return is;
  }

  static void add_unique(std::vector<Annotation>& dst, const Annotation& a) {
    for (const auto& b : dst)
      if (b.kind == a.kind) throw ParseError(std::string("duplicate annotation: ") + annot_name(a.kind), a.span.line, a.span.col);
    dst.push_back(a);
  }

  void attach_before(AnnotatedContract& c, const Instr& i, const std::vector<Annotation>& as) {
    bool loop = i.op() == Op::Loop || i.op() == Op::Iter;
    bool lam = i.op() == Op::Lambda;
    auto& site = c.annotations[i.id()];
    for (const auto& a : as) {
      if (a.kind == AnnotKind::LoopInv && !loop)
        throw ParseError("LoopInv must precede LOOP or ITER", a.span.line, a.span.col);
      if (a.kind == AnnotKind::LambdaAnnot && !lam)
        throw ParseError("LambdaAnnot must precede LAMBDA", a.span.line, a.span.col);
      add_unique(site.before, a);
    }
    auto has = [&](AnnotKind k) {
      for (const auto& a : site.before)
        if (a.kind == k) return true;
      return false;
    };
    Span sp = c.spans[i.id()];
    bool missing_inv = loop && !has(AnnotKind::LoopInv), missing_lam = lam && !has(AnnotKind::LambdaAnnot);
    if (site.before.empty() && site.after.empty()) c.annotations.erase(i.id());
    if (in_literal_) return;
    if (missing_inv) throw ParseError(std::string("missing LoopInv for ") + op_name(i.op()), sp.line, sp.col);
    if (missing_lam) throw ParseError("missing LambdaAnnot for LAMBDA", sp.line, sp.col);
  }

  void attach_after(AnnotatedContract& c, const Instr& i, const std::vector<Annotation>& as) {
    auto& site = c.annotations[i.id()];
    for (const auto& a : as) {
      if (a.kind == AnnotKind::LoopInv || a.kind == AnnotKind::LambdaAnnot)
        throw ParseError(std::string(annot_name(a.kind)) + " must precede its instruction", a.span.line, a.span.col);
      add_unique(site.after, a);
    }
  }

  Annotation code_annotation() {
    Token open = next();
    Annotation a;
    Token kw = expect_ident("an annotation keyword");
    if (kw.text == "Assert") a.kind = AnnotKind::Assert;
    else if (kw.text == "Assume") a.kind = AnnotKind::Assume;
    else if (kw.text == "LoopInv") a.kind = AnnotKind::LoopInv;
    else if (kw.text == "LambdaAnnot") a.kind = AnnotKind::LambdaAnnot;
    else if (kw.text == "ContractAnnot" || kw.text == "Measure") fail_at(kw, kw.text + " is only allowed at top level");
    else fail_at(kw, "unknown annotation " + kw.text);
    if (a.kind == AnnotKind::LambdaAnnot) a.spec = spec();
    else a.stack = stack_annot(false);
    expect(">>");
    a.span = span_from(open);
    return a;
  }

  Instr instr(AnnotatedContract& c) {
    Token first = peek();
    Instr i = instr_body(c);
    c.spans[i.id()] = span_from(first);
    return i;
  }

  Instr instr_body(AnnotatedContract& c) {
    if (peek_sym("{")) return Instr::seq(block(c));
    Token t = expect_ident("an instruction");
    const std::string& w = t.text;
    if (w == "DROP") return Instr::simple(Op::Drop);
    if (w == "DUP") return Instr::simple(Op::Dup);
    if (w == "SWAP") return Instr::simple(Op::Swap);
    if (w == "NOT") return Instr::simple(Op::Not);
    if (w == "ADD") return Instr::simple(Op::Add);
    if (w == "PAIR") return Instr::simple(Op::Pair);
    if (w == "CAR") return Instr::simple(Op::Car);
    if (w == "CDR") return Instr::simple(Op::Cdr);
    if (w == "CONS") return Instr::simple(Op::Cons);
    if (w == "EXEC") return Instr::simple(Op::Exec);
    if (w == "FAILWITH") return Instr::simple(Op::Failwith);
    if (w == "PACK") return Instr::simple(Op::Pack);
    if (w == "SHA256") return Instr::simple(Op::Sha256);
    if (w == "DIP") return Instr::dip(block(c));
    if (w == "LOOP") return Instr::loop(block(c));
    if (w == "ITER") return Instr::iter(block(c));
    if (w == "IF" || w == "IF_CONS") {
      InstrSeq a = block(c);
      InstrSeq b = block(c);
      return w == "IF" ? Instr::if_(a, b) : Instr::if_cons(a, b);
    }
    if (w == "PUSH") {
      Type ty = type();
      Value v = value(ty);
      return Instr::push(ty, v);
    }
    if (w == "NIL") return Instr::nil(type());
    if (w == "TRANSFER_TOKENS") return Instr::transfer_tokens(type());
    if (w == "LAMBDA") {
      Type a = type();
      Type b = type();
      return Instr::lambda(a, b, block(c));
    }
    fail_at(t, "unknown instruction " + w);
  }

  Value transfer_value() {
    expect_word("Transfer");
    Value arg = untyped_value();
    Token amt = expect_kind(Tok::Int, "an amount");
    Token dst = expect_kind(Tok::String, "an address string");
    return Value::transfer(arg, Int(amt.text), dst.text);
  }

  // ---------------------------------------------------------------- annotations

  MeasureDef measure() {
    MeasureDef m;
    m.name = expect_ident("a measure name").text;
    if (is_builtin_function(m.name) || is_reserved(m.name)) fail("reserved name " + m.name);
    expect(":");
    Type arg = type();
    if (!arg.is(TypeKind::List)) fail("a measure must take a list");
    m.elem = arg.elem();
    expect("->");
    m.result = type();
    expect_word("where");
    bool have_nil = false, have_cons = false;
    do {
      if (accept("[")) {
        expect("]");
        expect("=");
        if (have_nil) fail("duplicate [] clause");
        m.nil_rhs = term();
        have_nil = true;
      } else {
        m.head_var = var_name();
        expect("::");
        m.tail_var = var_name();
        if (m.head_var == m.tail_var) fail("measure pattern variables must differ");
        expect("=");
        if (have_cons) fail("duplicate :: clause");
        m.cons_rhs = term();
        have_cons = true;
      }
    } while (accept("|"));
    if (!have_nil || !have_cons) fail("a measure needs both [] and :: clauses");
    return m;
  }

  SpecAnnot spec() {
    SpecAnnot s;
    s.pre = stack_annot(true);
    expect("->");
    s.post = stack_annot(true);
    expect("&");
    s.exc = stack_annot(true);
    if (accept("(")) {
      do {
        std::string x = var_name();
        expect(":");
        s.ghosts.push_back({x, type()});
      } while (accept(","));
      expect(")");
    }
    return s;
  }

  // `single`: exactly one element, so a lone `_` is that element rather than "the rest"
  StackAnnot stack_annot(bool single) {
    StackAnnot a;
    expect("{");
    if (!peek_sym("|")) {
      do {
        if (peek_sym("_") && toks_[pos_ + 1].kind == Tok::Sym && toks_[pos_ + 1].text == "|") {
          ++pos_;
          a.rest = true;
          break;
        }
        a.items.push_back(pattern_item());
      } while (accept(":."));
    }
    expect("|");
    a.pred = formula();
    expect("}");
    if (single) {
      if (a.items.empty() && a.rest) {
        a.items.push_back(Pattern::wild());
        a.rest = false;
      }
      if (a.items.size() != 1 || a.rest) fail("a contract or lambda stack type has exactly one element");
    }
    return a;
  }

  Pattern pattern_item() {
    Pattern p = pattern();
    if (accept(":")) p.type = type();
    return p;
  }

  Pattern pattern() {
    if (accept("_")) return Pattern::wild();
    if (accept("(")) {
      Pattern a = pattern_item();
      expect(",");
      Pattern b = pattern_item();
      expect(")");
      return Pattern::pair(a, b);
    }
    return Pattern::var(var_name());
  }

  static bool is_reserved(const std::string& w) {
    static const std::set<std::string> words{"True", "False", "not", "call", "call_err", "exists", "forall",
                                             "Transfer", "Pair", "where", "Measure"};
    return words.count(w) > 0;
  }

  std::string var_name() {
    Token t = expect_ident("a variable");
    if (is_reserved(t.text)) fail_at(t, "reserved word " + t.text + " used as a variable");
    return t.text;
  }

  // ---------------------------------------------------------------- formulas

  Formula disjunction() {
    Formula a = conjunction();
    while (accept("||")) a = Formula::disj(a, conjunction());
    return a;
  }

  Formula conjunction() {
    Formula a = unary();
    while (accept("&&")) a = Formula::conj(a, unary());
    return a;
  }

  Formula unary() {
    if (accept_word("not")) return Formula::negate(unary());
    if (peek_word("exists") || peek_word("forall")) {
      Token q = next();
      if (!allow_quantifiers) fail_at(q, "quantifiers are not allowed in user predicates");
      std::string x = var_name();
      expect(":");
      Type t = type();
      expect(".");
      Formula body = formula();
      return q.text == "exists" ? Formula::exists(x, t, body) : Formula::forall(x, t, body);
    }
    return atomic();
  }

  Formula atomic() {
    if (accept_word("True")) return Formula::top();
    if (accept_word("False")) return Formula::bottom();
    if (peek_word("call") || peek_word("call_err")) {
      bool err = next().text == "call_err";
      expect("(");
      Term f = term();
      expect(",");
      Term a = term();
      expect(")");
      expect("=");
      Term r = term();
      return err ? Formula::call_err(f, a, r) : Formula::call(f, a, r);
    }
    if (peek_sym("(")) {
      std::size_t save = pos_;
      try {
        return comparison();
      } catch (const ParseError& e1) {
        std::size_t far1 = pos_;
        pos_ = save;
        try {
          expect("(");
          Formula f = formula();
          expect(")");
          return f;
        } catch (const ParseError& e2) {
          if (far1 > pos_) throw e1;
          throw;
        }
      }
    }
    return comparison();
  }

  Formula comparison() {
    Term a = term();
    if (accept("=")) return Formula::eq(a, term());
    if (accept("<>")) return Formula::neq(a, term());
    if (accept("<=")) return Formula::le(a, term());
    if (accept(">=")) return Formula::le(term(), a);
    if (accept("<")) return Formula::negate(Formula::le(term(), a));
    if (accept(">")) {
      Term b = term();
      return Formula::negate(Formula::le(a, b));
    }
    fail("expected a comparison" + found());
  }

  // ---------------------------------------------------------------- terms

  Term sum() {
    Term a = product();
    while (accept("+")) a = Term::plus(a, product());
    return a;
  }

  Term product() {
    Term a = application();
    while (accept("*")) a = Term::mul(a, application());
    return a;
  }

  bool starts_atom(std::size_t at) const {
    const Token& t = toks_[at];
    switch (t.kind) {
      case Tok::Int:
      case Tok::String:
      case Tok::Bytes: return true;
      case Tok::Ident: return !is_reserved(t.text) || t.text == "Transfer";
      case Tok::Sym: return t.text == "(" || t.text == "[" || t.text == "{";
      default: return false;
    }
  }

  Term application() {
    if (peek().kind == Tok::Ident && !is_reserved(peek().text) && starts_atom(pos_ + 1)) {
      std::string f = next().text;
      Term a = atom();
      if (is_builtin_function(f)) return Term::mangled(f, {}, a);
      return Term::measure(f, a);
    }
    return atom();
  }

  Term atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int: return Term::lit(Value::integer(Int(next().text)));
      case Tok::String: return Term::lit(Value::address(next().text));
      case Tok::Bytes: return Term::lit(Value::bytes(next().text));
      case Tok::Ident:
        if (accept_word("Transfer")) {
          expect("(");
          Term v = term();
          expect(",");
          Term i = term();
          expect(",");
          Term a = term();
          expect(")");
          return Term::transfer(v, i, a);
        }
        return Term::var(var_name());
      default: break;
    }
    if (accept("(")) {
      Term a = term();
      if (accept(",")) {
        Term b = term();
        expect(")");
        return Term::pair(a, b);
      }
      expect(")");
      return a;
    }
    if (accept("[")) {
      std::vector<Term> xs;
      if (!accept("]")) {
        do xs.push_back(term());
        while (accept(";"));
        expect("]");
      }
      Term l = Term::lit(Value::nil());
      for (auto it = xs.rbegin(); it != xs.rend(); ++it) l = Term::cons(*it, l);
      return l;
    }
    if (peek_sym("{")) return Term::lit(Value::code(code_literal()));
    fail("expected a term" + found());
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int in_literal_ = 0;
};

}  // namespace detail

inline AnnotatedContract parse_contract(const std::string& text) { return detail::Parser(text).contract(); }

inline Type parse_type(const std::string& text) {
  detail::Parser p(text);
  Type t = p.type();
  if (!p.at_end()) p.fail("trailing input after type");
  return t;
}

inline Value parse_value(const std::string& text, const Type& t) {
  detail::Parser p(text);
  Value v = p.value(t);
  if (!p.at_end()) p.fail("trailing input after value");
  if (!value_has_type(v, t)) throw ParseError("value " + to_string(v) + " does not have type " + to_string(t), 1, 1);
  return v;
}

inline Formula parse_formula_raw(const std::string& text, bool allow_quantifiers = false) {
  detail::Parser p(text);
  p.allow_quantifiers = allow_quantifiers;
  Formula f = p.formula();
  if (!p.at_end()) p.fail("trailing input after formula");
  return f;
}

inline Formula parse_formula(const std::string& text, const TypeEnv& gamma, const Measures& ms = {},
                             bool allow_quantifiers = false) {
  Formula f = parse_formula_raw(text, allow_quantifiers);
  wf_formula(gamma, f, ms);
  return f;
}

inline Term parse_term(const std::string& text) {
  detail::Parser p(text);
  Term t = p.term();
  if (!p.at_end()) p.fail("trailing input after term");
  return t;
}

}  // namespace mmv
