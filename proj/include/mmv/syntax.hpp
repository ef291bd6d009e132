#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mmv {

using Int = boost::multiprecision::cpp_int;

struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- types

enum class TypeKind { Int, Nat, Bytes, Address, Operation, Pair, List, Arrow };

class Type {
 public:
  Type() = default;

  static Type int_() { return leaf(TypeKind::Int); }
  static Type nat() { return leaf(TypeKind::Nat); }
  static Type bytes() { return leaf(TypeKind::Bytes); }
  static Type address() { return leaf(TypeKind::Address); }
  static Type operation() { return leaf(TypeKind::Operation); }
  static Type pair(Type a, Type b) { return node(TypeKind::Pair, std::move(a), std::move(b)); }
  static Type list(Type e) { return node(TypeKind::List, std::move(e), Type{}); }
  static Type arrow(Type a, Type b) { return node(TypeKind::Arrow, std::move(a), std::move(b)); }

  bool valid() const { return n_ != nullptr; }
  TypeKind kind() const { return n_->kind; }
  bool is(TypeKind k) const { return n_ && n_->kind == k; }
  // Pair: (fst, snd); List: elem in fst; Arrow: (dom, cod)
  const Type& fst() const { return n_->ab[0]; }
  const Type& snd() const { return n_->ab[1]; }
  const Type& elem() const { return n_->ab[0]; }

  friend bool operator==(const Type& x, const Type& y) {
    if (x.n_ == y.n_) return true;
    if (!x.n_ || !y.n_ || x.n_->kind != y.n_->kind) return false;
    switch (x.n_->kind) {
      case TypeKind::Pair:
      case TypeKind::Arrow: return x.fst() == y.fst() && x.snd() == y.snd();
      case TypeKind::List: return x.fst() == y.fst();
      default: return true;
    }
  }
  friend bool operator!=(const Type& x, const Type& y) { return !(x == y); }

 private:
  struct Node {
    TypeKind kind;
    std::vector<Type> ab;
  };
  static Type leaf(TypeKind k) { return node(k, Type{}, Type{}); }
  static Type node(TypeKind k, Type a, Type b) {
    Type t;
    t.n_ = std::make_shared<const Node>(Node{k, {std::move(a), std::move(b)}});
    return t;
  }
  std::shared_ptr<const Node> n_;
};

// Nat and Int share a runtime carrier.
inline Type carrier(const Type& t) {
  switch (t.kind()) {
    case TypeKind::Nat: return Type::int_();
    case TypeKind::Pair: return Type::pair(carrier(t.fst()), carrier(t.snd()));
    case TypeKind::List: return Type::list(carrier(t.elem()));
    case TypeKind::Arrow: return Type::arrow(carrier(t.fst()), carrier(t.snd()));
    default: return t;
  }
}

inline bool is_integer_type(const Type& t) { return t.is(TypeKind::Int) || t.is(TypeKind::Nat); }

inline bool needs_parens(const Type& t) {
  return t.is(TypeKind::Pair) || t.is(TypeKind::List) || t.is(TypeKind::Arrow);
}

inline std::string to_string(const Type& t);

inline std::string type_atom(const Type& t) {
  return needs_parens(t) ? "(" + to_string(t) + ")" : to_string(t);
}

inline std::string to_string(const Type& t) {
  if (!t.valid()) return "<?>";
  switch (t.kind()) {
    case TypeKind::Int: return "int";
    case TypeKind::Nat: return "nat";
    case TypeKind::Bytes: return "bytes";
    case TypeKind::Address: return "address";
    case TypeKind::Operation: return "operation";
    case TypeKind::Pair: return "pair " + type_atom(t.fst()) + " " + type_atom(t.snd());
    case TypeKind::List: return "list " + type_atom(t.elem());
    case TypeKind::Arrow: return "lambda " + type_atom(t.fst()) + " " + type_atom(t.snd());
  }
  return "<?>";
}

// ---------------------------------------------------------------- instructions and values

enum class Op {
  Seq, Dip, Drop, Dup, Swap, Push, Not, Add, If, Loop, Pair, Car, Cdr, Nil, Cons,
  IfCons, Iter, Lambda, Exec, TransferTokens, Failwith, Pack, Sha256
};

inline const char* op_name(Op op) {
  switch (op) {
    case Op::Seq: return "{}";
    case Op::Dip: return "DIP";
    case Op::Drop: return "DROP";
    case Op::Dup: return "DUP";
    case Op::Swap: return "SWAP";
    case Op::Push: return "PUSH";
    case Op::Not: return "NOT";
    case Op::Add: return "ADD";
    case Op::If: return "IF";
    case Op::Loop: return "LOOP";
    case Op::Pair: return "PAIR";
    case Op::Car: return "CAR";
    case Op::Cdr: return "CDR";
    case Op::Nil: return "NIL";
    case Op::Cons: return "CONS";
    case Op::IfCons: return "IF_CONS";
    case Op::Iter: return "ITER";
    case Op::Lambda: return "LAMBDA";
    case Op::Exec: return "EXEC";
    case Op::TransferTokens: return "TRANSFER_TOKENS";
    case Op::Failwith: return "FAILWITH";
    case Op::Pack: return "PACK";
    case Op::Sha256: return "SHA256";
  }
  return "?";
}

class Instr;
using InstrSeq = std::vector<Instr>;

enum class ValueKind { Int, Address, Bytes, Transfer, Pair, Nil, Cons, Code };

class Value {
 public:
  Value() = default;

  static Value integer(Int i) {
    Value v = make(ValueKind::Int);
    v.mut().i = std::move(i);
    return v;
  }
  static Value integer(long long i) { return integer(Int(i)); }
  static Value address(std::string a) {
    Value v = make(ValueKind::Address);
    v.mut().s = std::move(a);
    return v;
  }
  static Value bytes(std::string b) {
    Value v = make(ValueKind::Bytes);
    v.mut().s = std::move(b);
    return v;
  }
  static Value transfer(Value arg, Int amount, std::string dest) {
    Value v = make(ValueKind::Transfer);
    v.mut().ab[0] = std::move(arg);
    v.mut().i = std::move(amount);
    v.mut().s = std::move(dest);
    return v;
  }
  static Value pair(Value a, Value b) {
    Value v = make(ValueKind::Pair);
    v.mut().ab[0] = std::move(a);
    v.mut().ab[1] = std::move(b);
    return v;
  }
  static Value nil() {
    static const Value n = make(ValueKind::Nil);
    return n;
  }
  static Value cons(Value h, Value t) {
    if (!(t.is(ValueKind::Nil) || t.is(ValueKind::Cons)))
      throw StructuralError("cons tail is not a list");
    Value v = make(ValueKind::Cons);
    v.mut().ab[0] = std::move(h);
    v.mut().ab[1] = std::move(t);
    return v;
  }
  static Value list(const std::vector<Value>& xs) {
    Value r = nil();
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) r = cons(*it, r);
    return r;
  }
  static Value code(InstrSeq body);

  bool valid() const { return n_ != nullptr; }
  ValueKind kind() const { return n_->kind; }
  bool is(ValueKind k) const { return n_ && n_->kind == k; }
  const Int& as_int() const { return n_->i; }
  const Int& amount() const { return n_->i; }
  const std::string& text() const { return n_->s; }  // address token, byte string, transfer dest
  const Value& fst() const { return n_->ab[0]; }
  const Value& snd() const { return n_->ab[1]; }
  const Value& head() const { return n_->ab[0]; }
  const Value& tail() const { return n_->ab[1]; }
  const Value& arg() const { return n_->ab[0]; }
  const InstrSeq& body() const;

  std::vector<Value> list_items() const {
    std::vector<Value> out;
    for (const Value* p = this; p->is(ValueKind::Cons); p = &p->tail()) out.push_back(p->head());
    return out;
  }

  friend bool operator==(const Value& x, const Value& y);
  friend bool operator!=(const Value& x, const Value& y) { return !(x == y); }
  friend int compare(const Value& x, const Value& y);
  friend bool operator<(const Value& x, const Value& y) { return compare(x, y) < 0; }

 private:
  struct Node {
    ValueKind kind;
    Int i;
    std::string s;
    std::vector<Value> ab{Value{}, Value{}};
    std::shared_ptr<const InstrSeq> code;
  };
  static Value make(ValueKind k) {
    Value v;
    v.n_ = std::make_shared<Node>();
    const_cast<Node&>(*v.n_).kind = k;
    return v;
  }
  Node& mut() { return const_cast<Node&>(*n_); }
  std::shared_ptr<const Node> n_;
};

class Instr {
 public:
  struct Node {
    Op op;
    Type t1, t2;
    Value v;
    InstrSeq body, body2;
  };

  Instr() = default;

  static Instr simple(Op op) { return make(Node{op, {}, {}, {}, {}, {}}); }
  static Instr seq(InstrSeq b) { return make(Node{Op::Seq, {}, {}, {}, std::move(b), {}}); }
  static Instr dip(InstrSeq b) { return make(Node{Op::Dip, {}, {}, {}, std::move(b), {}}); }
  static Instr push(Type t, Value v) { return make(Node{Op::Push, std::move(t), {}, std::move(v), {}, {}}); }
  static Instr if_(InstrSeq a, InstrSeq b) { return make(Node{Op::If, {}, {}, {}, std::move(a), std::move(b)}); }
  static Instr loop(InstrSeq b) { return make(Node{Op::Loop, {}, {}, {}, std::move(b), {}}); }
  static Instr nil(Type t) { return make(Node{Op::Nil, std::move(t), {}, {}, {}, {}}); }
  static Instr if_cons(InstrSeq a, InstrSeq b) {
    return make(Node{Op::IfCons, {}, {}, {}, std::move(a), std::move(b)});
  }
  static Instr iter(InstrSeq b) { return make(Node{Op::Iter, {}, {}, {}, std::move(b), {}}); }
  static Instr lambda(Type a, Type b, InstrSeq body) {
    return make(Node{Op::Lambda, std::move(a), std::move(b), {}, std::move(body), {}});
  }
  static Instr transfer_tokens(Type t) { return make(Node{Op::TransferTokens, std::move(t), {}, {}, {}, {}}); }

  Op op() const { return n_->op; }
  const Type& type() const { return n_->t1; }
  const Type& type2() const { return n_->t2; }
  const Value& value() const { return n_->v; }
  const InstrSeq& body() const { return n_->body; }
  const InstrSeq& body2() const { return n_->body2; }
  const Node* id() const { return n_.get(); }

  friend bool operator==(const Instr& x, const Instr& y);
  friend bool operator!=(const Instr& x, const Instr& y) { return !(x == y); }

 private:
  static Instr make(Node n) {
    Instr i;
    i.n_ = std::make_shared<const Node>(std::move(n));
    return i;
  }
  std::shared_ptr<const Node> n_;
};

using InstrId = const Instr::Node*;

inline Value Value::code(InstrSeq body) {
  Value v = make(ValueKind::Code);
  v.mut().code = std::make_shared<const InstrSeq>(std::move(body));
  return v;
}

inline const InstrSeq& Value::body() const { return *n_->code; }

inline bool seq_equal(const InstrSeq& a, const InstrSeq& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

inline bool operator==(const Instr& x, const Instr& y) {
  if (x.n_ == y.n_) return true;
  const auto& a = *x.n_;
  const auto& b = *y.n_;
  if (a.op != b.op) return false;
  if (a.t1.valid() != b.t1.valid() || (a.t1.valid() && a.t1 != b.t1)) return false;
  if (a.t2.valid() != b.t2.valid() || (a.t2.valid() && a.t2 != b.t2)) return false;
  if (a.v.valid() != b.v.valid() || (a.v.valid() && a.v != b.v)) return false;
  return seq_equal(a.body, b.body) && seq_equal(a.body2, b.body2);
}

inline bool operator==(const Value& x, const Value& y) { return compare(x, y) == 0; }

inline int compare_seq(const InstrSeq& a, const InstrSeq& b);

inline int compare_type(const Type& a, const Type& b) {
  if (!a.valid() || !b.valid()) return int(a.valid()) - int(b.valid());
  if (a.kind() != b.kind()) return int(a.kind()) < int(b.kind()) ? -1 : 1;
  switch (a.kind()) {
    case TypeKind::Pair:
    case TypeKind::Arrow:
      if (int c = compare_type(a.fst(), b.fst())) return c;
      return compare_type(a.snd(), b.snd());
    case TypeKind::List: return compare_type(a.elem(), b.elem());
    default: return 0;
  }
}

inline int compare(const Value& x, const Value& y) {
  if (x.n_ == y.n_) return 0;
  if (!x.n_ || !y.n_) return int(x.valid()) - int(y.valid());
  if (x.kind() != y.kind()) return int(x.kind()) < int(y.kind()) ? -1 : 1;
  auto cmp_int = [](const Int& a, const Int& b) { return a < b ? -1 : (b < a ? 1 : 0); };
  switch (x.kind()) {
    case ValueKind::Int: return cmp_int(x.as_int(), y.as_int());
    case ValueKind::Address:
    case ValueKind::Bytes: return x.text().compare(y.text()) < 0 ? -1 : (x.text() == y.text() ? 0 : 1);
    case ValueKind::Transfer:
      if (int c = compare(x.arg(), y.arg())) return c;
      if (int c = cmp_int(x.amount(), y.amount())) return c;
      return x.text() < y.text() ? -1 : (x.text() == y.text() ? 0 : 1);
    case ValueKind::Pair:
    case ValueKind::Cons:
      if (int c = compare(x.fst(), y.fst())) return c;
      return compare(x.snd(), y.snd());
    case ValueKind::Nil: return 0;
    case ValueKind::Code: return compare_seq(x.body(), y.body());
  }
  return 0;
}

inline int compare_instr(const Instr& a, const Instr& b) {
  if (a.op() != b.op()) return int(a.op()) < int(b.op()) ? -1 : 1;
  if (int c = compare_type(a.type(), b.type())) return c;
  if (int c = compare_type(a.type2(), b.type2())) return c;
  if (a.value().valid() != b.value().valid()) return int(a.value().valid()) - int(b.value().valid());
  if (a.value().valid())
    if (int c = compare(a.value(), b.value())) return c;
  if (int c = compare_seq(a.body(), b.body())) return c;
  return compare_seq(a.body2(), b.body2());
}

inline int compare_seq(const InstrSeq& a, const InstrSeq& b) {
  for (size_t i = 0; i < a.size() && i < b.size(); ++i)
    if (int c = compare_instr(a[i], b[i])) return c;
  if (a.size() == b.size()) return 0;
  return a.size() < b.size() ? -1 : 1;
}

// ---------------------------------------------------------------- printing (Michelson-style)

inline std::string bytes_hex(const std::string& b) {
  static const char* digits = "0123456789abcdef";
  std::string out = "0x";
  for (unsigned char c : b) {
    out += digits[c >> 4];
    out += digits[c & 15];
  }
  return out;
}

inline std::string to_string(const InstrSeq& is);
inline std::string to_string(const Instr& i);

inline std::string to_string(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Int: return v.as_int().str();
    case ValueKind::Address: return "\"" + v.text() + "\"";
    case ValueKind::Bytes: return bytes_hex(v.text());
    case ValueKind::Transfer:
      return "(Transfer " + to_string(v.arg()) + " " + v.amount().str() + " \"" + v.text() + "\")";
    case ValueKind::Pair: return "(Pair " + to_string(v.fst()) + " " + to_string(v.snd()) + ")";
    case ValueKind::Nil: return "{}";
    case ValueKind::Cons: {
      std::string out = "{ ";
      auto items = v.list_items();
      for (size_t k = 0; k < items.size(); ++k) out += (k ? " ; " : "") + to_string(items[k]);
      return out + " }";
    }
    case ValueKind::Code: return to_string(v.body());
  }
  return "?";
}

inline std::string to_string(const Instr& i) {
  switch (i.op()) {
    case Op::Seq: return to_string(i.body());
    case Op::Dip:
    case Op::Loop:
    case Op::Iter: return std::string(op_name(i.op())) + " " + to_string(i.body());
    case Op::If:
    case Op::IfCons:
      return std::string(op_name(i.op())) + " " + to_string(i.body()) + " " + to_string(i.body2());
    case Op::Push: return "PUSH " + type_atom(i.type()) + " " + to_string(i.value());
    case Op::Nil: return "NIL " + type_atom(i.type());
    case Op::TransferTokens: return "TRANSFER_TOKENS " + type_atom(i.type());
    case Op::Lambda:
      return "LAMBDA " + type_atom(i.type()) + " " + type_atom(i.type2()) + " " + to_string(i.body());
    default: return op_name(i.op());
  }
}

inline std::string to_string(const InstrSeq& is) {
  if (is.empty()) return "{}";
  std::string out = "{ ";
  for (size_t k = 0; k < is.size(); ++k) out += (k ? " ; " : "") + to_string(is[k]);
  return out + " }";
}

// ---------------------------------------------------------------- stacks (index 0 is the top)

class Stack {
 public:
  Stack() = default;
  explicit Stack(std::vector<Value> top_first) : items_(std::move(top_first)) {}

  bool empty() const { return items_.empty(); }
  size_t size() const { return items_.size(); }
  const Value& at(size_t i) const { return items_.at(i); }
  const std::vector<Value>& items() const { return items_; }
  void push(Value v) { items_.insert(items_.begin(), std::move(v)); }
  Value pop() {
    Value v = items_.front();
    items_.erase(items_.begin());
    return v;
  }

  friend bool operator==(const Stack& a, const Stack& b) { return a.items_ == b.items_; }
  friend bool operator!=(const Stack& a, const Stack& b) { return !(a == b); }

 private:
  std::vector<Value> items_;
};

inline std::string to_string(const Stack& s) {
  std::string out;
  for (const auto& v : s.items()) out += to_string(v) + " :: ";
  return out + "[]";
}

// A failed TypeStack is the polymorphic result of a diverging sequence.
struct TypeStack {
  std::vector<Type> items;
  bool failed = false;

  static TypeStack bottom() { return TypeStack{{}, true}; }
  size_t size() const { return items.size(); }
  friend bool operator==(const TypeStack& a, const TypeStack& b) {
    if (a.failed || b.failed) return a.failed == b.failed;
    return a.items == b.items;
  }
  friend bool operator!=(const TypeStack& a, const TypeStack& b) { return !(a == b); }
};

inline std::string to_string(const TypeStack& ts) {
  if (ts.failed) return "<failed>";
  std::string out;
  for (const auto& t : ts.items) out += to_string(t) + " : ";
  return out + "[]";
}

struct Binding {
  std::string name;
  Type type;
  friend bool operator==(const Binding& a, const Binding& b) { return a.name == b.name && a.type == b.type; }
};

using BindingStack = std::vector<Binding>;

inline TypeStack erase(const BindingStack& ups) {
  TypeStack ts;
  for (const auto& b : ups) ts.items.push_back(b.type);
  return ts;
}

}  // namespace mmv
