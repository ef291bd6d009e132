#pragma once

#include "mmv/syntax.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mmv {

struct SimpleTypeError : std::runtime_error {
  SimpleTypeError(const std::string& msg, std::string p)
      : std::runtime_error(p.empty() ? msg : msg + " at " + p), path(std::move(p)) {}
  std::string path;
};

struct TypeTraceEntry {
  InstrId node;
  TypeStack before;
  TypeStack after;
};

using TypeTrace = std::vector<TypeTraceEntry>;

inline TypeStack simple_check_seq(const TypeStack& ts, const InstrSeq& is, TypeTrace* trace = nullptr);

inline bool value_has_type(const Value& v, const Type& t) {
  switch (t.kind()) {
    case TypeKind::Int: return v.is(ValueKind::Int);
    case TypeKind::Nat: return v.is(ValueKind::Int) && v.as_int() >= 0;
    case TypeKind::Bytes: return v.is(ValueKind::Bytes);
    case TypeKind::Address: return v.is(ValueKind::Address);
    case TypeKind::Operation: {
      if (!v.is(ValueKind::Transfer)) return false;
      // the argument may have any closed type
      std::function<bool(const Value&)> closed_typeable = [&](const Value& a) {
        switch (a.kind()) {
          case ValueKind::Pair: return closed_typeable(a.fst()) && closed_typeable(a.snd());
          case ValueKind::Cons: {
            for (const auto& x : a.list_items())
              if (!closed_typeable(x)) return false;
            return true;
          }
          default: return true;
        }
      };
      return closed_typeable(v.arg());
    }
    case TypeKind::Pair: return v.is(ValueKind::Pair) && value_has_type(v.fst(), t.fst()) && value_has_type(v.snd(), t.snd());
    case TypeKind::List: {
      if (v.is(ValueKind::Nil)) return true;
      if (!v.is(ValueKind::Cons)) return false;
      for (const auto& x : v.list_items())
        if (!value_has_type(x, t.elem())) return false;
      return true;
    }
    case TypeKind::Arrow: {
      if (!v.is(ValueKind::Code)) return false;
      try {
        TypeStack in{{t.fst()}, false};
        TypeStack out = simple_check_seq(in, v.body());
        return out.failed || (out.items.size() == 1 && out.items[0] == t.snd());
      } catch (const SimpleTypeError&) {
        return false;
      }
    }
  }
  return false;
}

namespace detail {

class SimpleTyper {
 public:
  explicit SimpleTyper(TypeTrace* trace) : trace_(trace) {}

  TypeStack seq(TypeStack ts, const InstrSeq& is, const std::string& path) {
    for (size_t k = 0; k < is.size(); ++k) {
      std::string p = path + "/" + std::to_string(k);
      if (ts.failed) throw SimpleTypeError("instruction after FAILWITH is unreachable", p);
      TypeStack before = ts;
      ts = instr(std::move(ts), is[k], p);
      if (trace_) trace_->push_back({is[k].id(), std::move(before), ts});
    }
    return ts;
  }

 private:
  static void need(const TypeStack& ts, size_t n, const Instr& i, const std::string& p) {
    if (ts.items.size() < n)
      throw SimpleTypeError(std::string(op_name(i.op())) + " needs " + std::to_string(n) + " stack elements, got " +
                                to_string(ts),
                            p);
  }
  static void expect(bool ok, const std::string& msg, const std::string& p) {
    if (!ok) throw SimpleTypeError(msg, p);
  }
  static TypeStack pop(TypeStack ts, size_t n) {
    ts.items.erase(ts.items.begin(), ts.items.begin() + long(n));
    return ts;
  }
  static TypeStack push(TypeStack ts, Type t) {
    ts.items.insert(ts.items.begin(), std::move(t));
    return ts;
  }
  static TypeStack join(const TypeStack& a, const TypeStack& b, const char* what, const std::string& p) {
    if (a.failed) return b;
    if (b.failed) return a;
    expect(a.items == b.items, std::string(what) + " branches disagree: " + to_string(a) + " vs " + to_string(b), p);
    return a;
  }

  TypeStack instr(TypeStack ts, const Instr& i, const std::string& p) {
    const auto& it = ts.items;
    switch (i.op()) {
      case Op::Seq: return seq(std::move(ts), i.body(), p + "/{}");
      case Op::Dip: {
        need(ts, 1, i, p);
        Type top = it[0];
        TypeStack inner = seq(pop(ts, 1), i.body(), p + "/DIP");
        if (inner.failed) return inner;
        return push(std::move(inner), top);
      }
      case Op::Drop: need(ts, 1, i, p); return pop(std::move(ts), 1);
      case Op::Dup: need(ts, 1, i, p); return push(ts, it[0]);
      case Op::Swap: need(ts, 2, i, p); std::swap(ts.items[0], ts.items[1]); return ts;
      case Op::Push:
        expect(value_has_type(i.value(), i.type()), "PUSH value " + to_string(i.value()) + " is not " + to_string(i.type()), p);
        return push(std::move(ts), i.type());
      case Op::Not:
        need(ts, 1, i, p);
        expect(is_integer_type(it[0]), "NOT expects int", p);
        return push(pop(std::move(ts), 1), Type::int_());
      case Op::Add: {
        need(ts, 2, i, p);
        expect(is_integer_type(it[0]) && is_integer_type(it[1]), "ADD expects two integers, got " + to_string(ts), p);
        Type r = it[0].is(TypeKind::Nat) && it[1].is(TypeKind::Nat) ? Type::nat() : Type::int_();
        return push(pop(std::move(ts), 2), r);
      }
      case Op::If: {
        need(ts, 1, i, p);
        expect(it[0].is(TypeKind::Int), "IF expects int, got " + to_string(it[0]), p);
        TypeStack rest = pop(std::move(ts), 1);
        return join(seq(rest, i.body(), p + "/IF.then"), seq(rest, i.body2(), p + "/IF.else"), "IF", p);
      }
      case Op::Loop: {
        need(ts, 1, i, p);
        expect(it[0].is(TypeKind::Int), "LOOP expects int, got " + to_string(it[0]), p);
        TypeStack rest = pop(std::move(ts), 1);
        TypeStack out = seq(rest, i.body(), p + "/LOOP");
        expect(out.failed || out == push(rest, Type::int_()),
               "LOOP body must preserve int : " + to_string(rest) + ", got " + to_string(out), p);
        return rest;
      }
      case Op::Pair: {
        need(ts, 2, i, p);
        Type r = Type::pair(it[0], it[1]);
        return push(pop(std::move(ts), 2), r);
      }
      case Op::Car:
      case Op::Cdr: {
        need(ts, 1, i, p);
        expect(it[0].is(TypeKind::Pair), std::string(op_name(i.op())) + " expects a pair, got " + to_string(it[0]), p);
        Type r = i.op() == Op::Car ? it[0].fst() : it[0].snd();
        return push(pop(std::move(ts), 1), r);
      }
      case Op::Nil: return push(std::move(ts), Type::list(i.type()));
      case Op::Cons: {
        need(ts, 2, i, p);
        expect(it[1].is(TypeKind::List) && it[1].elem() == it[0], "CONS expects T : list T, got " + to_string(ts), p);
        return pop(std::move(ts), 1);
      }
      case Op::IfCons: {
        need(ts, 1, i, p);
        expect(it[0].is(TypeKind::List), "IF_CONS expects a list, got " + to_string(it[0]), p);
        Type lt = it[0];
        TypeStack rest = pop(std::move(ts), 1);
        TypeStack cons_in = push(push(rest, lt), lt.elem());
        return join(seq(cons_in, i.body(), p + "/IF_CONS.cons"), seq(rest, i.body2(), p + "/IF_CONS.nil"), "IF_CONS", p);
      }
      case Op::Iter: {
        need(ts, 1, i, p);
        expect(it[0].is(TypeKind::List), "ITER expects a list, got " + to_string(it[0]), p);
        Type e = it[0].elem();
        TypeStack rest = pop(std::move(ts), 1);
        TypeStack out = seq(push(rest, e), i.body(), p + "/ITER");
        expect(out.failed || out == rest, "ITER body must map T : S to S, got " + to_string(out), p);
        return rest;
      }
      case Op::Lambda: {
        TypeStack out = seq(TypeStack{{i.type()}, false}, i.body(), p + "/LAMBDA");
        expect(out.failed || (out.items.size() == 1 && out.items[0] == i.type2()),
               "LAMBDA body must produce " + to_string(i.type2()) + " : [], got " + to_string(out), p);
        return push(std::move(ts), Type::arrow(i.type(), i.type2()));
      }
      case Op::Exec: {
        need(ts, 2, i, p);
        expect(it[1].is(TypeKind::Arrow) && it[1].fst() == it[0], "EXEC expects T1 : lambda T1 T2, got " + to_string(ts), p);
        Type r = it[1].snd();
        return push(pop(std::move(ts), 2), r);
      }
      case Op::TransferTokens: {
        need(ts, 3, i, p);
        expect(it[0] == i.type() && it[1].is(TypeKind::Int) && it[2].is(TypeKind::Address),
               "TRANSFER_TOKENS expects " + to_string(i.type()) + " : int : address, got " + to_string(ts), p);
        return push(pop(std::move(ts), 3), Type::operation());
      }
      case Op::Failwith: need(ts, 1, i, p); return TypeStack::bottom();
      case Op::Pack: need(ts, 1, i, p); return push(pop(std::move(ts), 1), Type::bytes());
      case Op::Sha256:
        need(ts, 1, i, p);
        expect(it[0].is(TypeKind::Bytes), "SHA256 expects bytes", p);
        return ts;
    }
    throw SimpleTypeError("unknown instruction", p);
  }

  TypeTrace* trace_;
};

}  // namespace detail

inline TypeStack simple_check_seq(const TypeStack& ts, const InstrSeq& is, TypeTrace* trace) {
  return detail::SimpleTyper(trace).seq(ts, is, "");
}

}  // namespace mmv
