#pragma once

#include "mmv/syntax.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mmv {

struct StuckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOutcome {
  enum class Kind { Ok, Failed, OutOfFuel, Stuck };  // Stuck only from try_exec_seq
  Kind kind = Kind::Ok;
  Stack stack;         // Ok
  Value value;         // Failed
  std::string reason;  // Stuck

  static RunOutcome ok(Stack s) { return {Kind::Ok, std::move(s), {}, {}}; }
  static RunOutcome failed(Value v) { return {Kind::Failed, {}, std::move(v), {}}; }
  static RunOutcome out_of_fuel() { return {Kind::OutOfFuel, {}, {}, {}}; }
  static RunOutcome stuck(std::string why) { return {Kind::Stuck, {}, {}, std::move(why)}; }

  friend bool operator==(const RunOutcome& a, const RunOutcome& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == Kind::Ok) return a.stack == b.stack;
    if (a.kind == Kind::Failed) return a.value == b.value;
    if (a.kind == Kind::Stuck) return a.reason == b.reason;
    return true;
  }
  friend bool operator!=(const RunOutcome& a, const RunOutcome& b) { return !(a == b); }
};

inline std::string to_string(const RunOutcome& o) {
  switch (o.kind) {
    case RunOutcome::Kind::Ok: return "Ok " + to_string(o.stack);
    case RunOutcome::Kind::Failed: return "Failed " + to_string(o.value);
    case RunOutcome::Kind::OutOfFuel: return "OutOfFuel";
    case RunOutcome::Kind::Stuck: return "Stuck: " + o.reason;
  }
  return "?";
}

constexpr std::int64_t kDefaultFuel = 100000;

// Model-only PACK: tagged printed form, injective because printing is.
inline Value model_pack(const Value& v) { return Value::bytes("\x05" + to_string(v)); }

// Model-only SHA256: non-cryptographic 32-byte digest.
inline Value model_sha256(const Value& b) {
  std::string out(32, '\0');
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : b.text()) h = (h ^ c) * 1099511628211ull;
  for (int k = 0; k < 32; ++k) {
    h = (h ^ std::uint64_t(k)) * 1099511628211ull;
    out[size_t(k)] = char(h >> 56);
  }
  return Value::bytes(out);
}

namespace detail {

class Machine {
 public:
  explicit Machine(std::int64_t fuel) : fuel_(fuel) {}

  // false: out of fuel
  bool tick() {
    if (fuel_ <= 0) return false;
    --fuel_;
    return true;
  }

  RunOutcome seq(Stack s, const InstrSeq& is) {
    for (const auto& i : is) {
      if (!tick()) return RunOutcome::out_of_fuel();  // E-Seq
      RunOutcome o = instr(std::move(s), i);
      if (o.kind != RunOutcome::Kind::Ok) return o;
      s = std::move(o.stack);
    }
    if (!tick()) return RunOutcome::out_of_fuel();  // E-Nop
    return RunOutcome::ok(std::move(s));
  }

 private:
  static RunOutcome shallow(const Stack& s, const Instr& i) {
    return RunOutcome::stuck(std::string(op_name(i.op())) + " on a stack of depth " + std::to_string(s.size()));
  }
  static RunOutcome not_int(const Instr& i) {
    return RunOutcome::stuck(std::string(op_name(i.op())) + " expects an integer");
  }

  RunOutcome instr(Stack s, const Instr& i) {
    if (!tick()) return RunOutcome::out_of_fuel();
    switch (i.op()) {
      case Op::Seq: return seq(std::move(s), i.body());
      case Op::Dip: {
        if (s.size() < 1) return shallow(s, i);
        Value top = s.pop();
        RunOutcome o = seq(std::move(s), i.body());
        if (o.kind == RunOutcome::Kind::Ok) o.stack.push(std::move(top));
        return o;
      }
      case Op::Drop: if (s.size() < 1) return shallow(s, i); s.pop(); return RunOutcome::ok(std::move(s));
      case Op::Dup: if (s.size() < 1) return shallow(s, i); s.push(s.at(0)); return RunOutcome::ok(std::move(s));
      case Op::Swap: {
        if (s.size() < 2) return shallow(s, i);
        Value a = s.pop();
        Value b = s.pop();
        s.push(a);
        s.push(b);
        return RunOutcome::ok(std::move(s));
      }
      case Op::Push: s.push(i.value()); return RunOutcome::ok(std::move(s));
      case Op::Not: {
        if (s.size() < 1) return shallow(s, i);
        if (!s.at(0).is(ValueKind::Int)) return not_int(i);
        bool nz = s.at(0).as_int() != 0;
        s.pop();
        s.push(Value::integer(nz ? 0 : 1));
        return RunOutcome::ok(std::move(s));
      }
      case Op::Add: {
        if (s.size() < 2) return shallow(s, i);
        if (!s.at(0).is(ValueKind::Int) || !s.at(1).is(ValueKind::Int)) return not_int(i);
        Int r = s.at(0).as_int() + s.at(1).as_int();
        s.pop();
        s.pop();
        s.push(Value::integer(std::move(r)));
        return RunOutcome::ok(std::move(s));
      }
      case Op::If: {
        if (s.size() < 1) return shallow(s, i);
        if (!s.at(0).is(ValueKind::Int)) return not_int(i);
        bool nz = s.at(0).as_int() != 0;
        s.pop();
        return seq(std::move(s), nz ? i.body() : i.body2());
      }
      case Op::Loop: {
        for (;;) {
          if (s.size() < 1) return shallow(s, i);
          if (!s.at(0).is(ValueKind::Int)) return not_int(i);
          bool nz = s.at(0).as_int() != 0;
          s.pop();
          if (!nz) return RunOutcome::ok(std::move(s));  // E-LoopF
          RunOutcome o = seq(std::move(s), i.body());
          if (o.kind != RunOutcome::Kind::Ok) return o;
          s = std::move(o.stack);
          if (!tick()) return RunOutcome::out_of_fuel();  // next LOOP application
        }
      }
      case Op::Pair: {
        if (s.size() < 2) return shallow(s, i);
        Value a = s.pop();
        Value b = s.pop();
        s.push(Value::pair(std::move(a), std::move(b)));
        return RunOutcome::ok(std::move(s));
      }
      case Op::Car:
      case Op::Cdr: {
        if (s.size() < 1) return shallow(s, i);
        if (!s.at(0).is(ValueKind::Pair)) return RunOutcome::stuck(std::string(op_name(i.op())) + " expects a pair");
        Value p = s.pop();
        s.push(i.op() == Op::Car ? p.fst() : p.snd());
        return RunOutcome::ok(std::move(s));
      }
      case Op::Nil: s.push(Value::nil()); return RunOutcome::ok(std::move(s));
      case Op::Cons: {
        if (s.size() < 2) return shallow(s, i);
        if (!s.at(1).is(ValueKind::Nil) && !s.at(1).is(ValueKind::Cons)) return RunOutcome::stuck("CONS expects a list");
        Value h = s.pop();
        Value t = s.pop();
        s.push(Value::cons(std::move(h), std::move(t)));
        return RunOutcome::ok(std::move(s));
      }
      case Op::IfCons: {
        if (s.size() < 1) return shallow(s, i);
        Value l = s.pop();
        if (l.is(ValueKind::Cons)) {
          s.push(l.tail());
          s.push(l.head());
          return seq(std::move(s), i.body());
        }
        if (!l.is(ValueKind::Nil)) return RunOutcome::stuck("IF_CONS expects a list");
        return seq(std::move(s), i.body2());
      }
      case Op::Iter: {
        for (;;) {
          if (s.size() < 1) return shallow(s, i);
          Value l = s.pop();
          if (l.is(ValueKind::Nil)) return RunOutcome::ok(std::move(s));  // E-IterNil
          if (!l.is(ValueKind::Cons)) return RunOutcome::stuck("ITER expects a list");
          s.push(l.head());
          RunOutcome o = seq(std::move(s), i.body());
          if (o.kind != RunOutcome::Kind::Ok) return o;
          s = std::move(o.stack);
          s.push(l.tail());
          if (!tick()) return RunOutcome::out_of_fuel();
        }
      }
      case Op::Lambda: s.push(Value::code(i.body())); return RunOutcome::ok(std::move(s));
      case Op::Exec: {
        if (s.size() < 2) return shallow(s, i);
        if (!s.at(1).is(ValueKind::Code)) return RunOutcome::stuck("EXEC expects code");
        Value arg = s.pop();
        Value f = s.pop();
        RunOutcome o = seq(Stack({arg}), f.body());
        if (o.kind != RunOutcome::Kind::Ok) return o;
        if (o.stack.size() != 1) return RunOutcome::stuck("EXEC body did not return a singleton stack");
        s.push(o.stack.at(0));
        return RunOutcome::ok(std::move(s));
      }
      case Op::TransferTokens: {
        if (s.size() < 3) return shallow(s, i);
        if (!s.at(1).is(ValueKind::Int) || !s.at(2).is(ValueKind::Address))
          return RunOutcome::stuck("TRANSFER_TOKENS expects V : int : address");
        Value v = s.pop();
        Value amt = s.pop();
        Value dst = s.pop();
        s.push(Value::transfer(std::move(v), amt.as_int(), dst.text()));
        return RunOutcome::ok(std::move(s));
      }
      case Op::Failwith: if (s.size() < 1) return shallow(s, i); return RunOutcome::failed(s.at(0));
      case Op::Pack: {
        if (s.size() < 1) return shallow(s, i);
        Value v = s.pop();
        s.push(model_pack(v));
        return RunOutcome::ok(std::move(s));
      }
      case Op::Sha256: {
        if (s.size() < 1) return shallow(s, i);
        if (!s.at(0).is(ValueKind::Bytes)) return RunOutcome::stuck("SHA256 expects bytes");
        Value v = s.pop();
        s.push(model_sha256(v));
        return RunOutcome::ok(std::move(s));
      }
    }
    return RunOutcome::stuck("unknown instruction");
  }

  std::int64_t fuel_;
};

// Relational reading of the rules: every rule whose conclusion matches is
// tried and all derivations up to the height bound are collected.
class Deriver {
 public:
  using Outcomes = std::vector<RunOutcome>;

  Outcomes seq(const Stack& s, const InstrSeq& is, size_t from, int depth) {
    if (depth <= 0) return {};
    if (from == is.size()) return {RunOutcome::ok(s)};  // E-Nop
    Outcomes out;
    for (auto& o : instr(s, is[from], depth - 1)) {  // E-Seq
      if (o.kind == RunOutcome::Kind::Ok)
        append(out, seq(o.stack, is, from + 1, depth - 1));
      else
        out.push_back(o);
    }
    return out;
  }

 private:
  static void append(Outcomes& out, Outcomes more) {
    for (auto& o : more)
      if (std::find(out.begin(), out.end(), o) == out.end()) out.push_back(std::move(o));
  }
  static bool is_int(const Stack& s, size_t k) { return s.size() > k && s.at(k).is(ValueKind::Int); }
  static Stack rest(const Stack& s, size_t n) {
    return Stack(std::vector<Value>(s.items().begin() + long(n), s.items().end()));
  }
  static Stack with(Stack s, std::initializer_list<Value> tops) {
    std::vector<Value> v(tops);
    for (auto it = v.rbegin(); it != v.rend(); ++it) s.push(*it);
    return s;
  }
  static Outcomes ok(Stack s) { return {RunOutcome::ok(std::move(s))}; }

  Outcomes under(const Value& top, Outcomes inner) {
    for (auto& o : inner)
      if (o.kind == RunOutcome::Kind::Ok) o.stack.push(top);
    return inner;
  }

  Outcomes instr(const Stack& s, const Instr& i, int d) {
    if (d <= 0) return {};
    Outcomes out;
    const size_t n = s.size();
    switch (i.op()) {
      case Op::Seq: return seq(s, i.body(), 0, d);
      case Op::Dip:
        if (n >= 1) return under(s.at(0), seq(rest(s, 1), i.body(), 0, d));
        return {};
      case Op::Drop:
        if (n >= 1) return ok(rest(s, 1));
        return {};
      case Op::Dup:
        if (n >= 1) return ok(with(s, {s.at(0)}));
        return {};
      case Op::Swap:
        if (n >= 2) return ok(with(rest(s, 2), {s.at(1), s.at(0)}));
        return {};
      case Op::Push: return ok(with(s, {i.value()}));
      case Op::Not:
        if (is_int(s, 0) && s.at(0).as_int() != 0) append(out, ok(with(rest(s, 1), {Value::integer(0)})));
        if (is_int(s, 0) && s.at(0).as_int() == 0) append(out, ok(with(rest(s, 1), {Value::integer(1)})));
        return out;
      case Op::Add:
        if (is_int(s, 0) && is_int(s, 1))
          return ok(with(rest(s, 2), {Value::integer(s.at(0).as_int() + s.at(1).as_int())}));
        return {};
      case Op::If:
        if (is_int(s, 0) && s.at(0).as_int() != 0) append(out, seq(rest(s, 1), i.body(), 0, d));
        if (is_int(s, 0) && s.at(0).as_int() == 0) append(out, seq(rest(s, 1), i.body2(), 0, d));
        return out;
      case Op::Loop:
        if (is_int(s, 0) && s.at(0).as_int() != 0) {
          for (auto& o : seq(rest(s, 1), i.body(), 0, d)) {
            if (o.kind == RunOutcome::Kind::Ok)
              append(out, instr(o.stack, i, d - 1));
            else
              append(out, {o});
          }
        }
        if (is_int(s, 0) && s.at(0).as_int() == 0) append(out, ok(rest(s, 1)));
        return out;
      case Op::Pair:
        if (n >= 2) return ok(with(rest(s, 2), {Value::pair(s.at(0), s.at(1))}));
        return {};
      case Op::Car:
        if (n >= 1 && s.at(0).is(ValueKind::Pair)) return ok(with(rest(s, 1), {s.at(0).fst()}));
        return {};
      case Op::Cdr:
        if (n >= 1 && s.at(0).is(ValueKind::Pair)) return ok(with(rest(s, 1), {s.at(0).snd()}));
        return {};
      case Op::Nil: return ok(with(s, {Value::nil()}));
      case Op::Cons:
        if (n >= 2 && (s.at(1).is(ValueKind::Nil) || s.at(1).is(ValueKind::Cons)))
          return ok(with(rest(s, 2), {Value::cons(s.at(0), s.at(1))}));
        return {};
      case Op::IfCons:
        if (n >= 1 && s.at(0).is(ValueKind::Cons))
          append(out, seq(with(rest(s, 1), {s.at(0).head(), s.at(0).tail()}), i.body(), 0, d));
        if (n >= 1 && s.at(0).is(ValueKind::Nil)) append(out, seq(rest(s, 1), i.body2(), 0, d));
        return out;
      case Op::Iter:
        if (n >= 1 && s.at(0).is(ValueKind::Cons)) {
          const Value& l = s.at(0);
          for (auto& o : seq(with(rest(s, 1), {l.head()}), i.body(), 0, d)) {
            if (o.kind == RunOutcome::Kind::Ok)
              append(out, instr(with(o.stack, {l.tail()}), i, d - 1));
            else
              append(out, {o});
          }
        }
        if (n >= 1 && s.at(0).is(ValueKind::Nil)) append(out, ok(rest(s, 1)));
        return out;
      case Op::Lambda: return ok(with(s, {Value::code(i.body())}));
      case Op::Exec:
        if (n >= 2 && s.at(1).is(ValueKind::Code)) {
          for (auto& o : seq(Stack({s.at(0)}), s.at(1).body(), 0, d)) {
            if (o.kind != RunOutcome::Kind::Ok)
              append(out, {o});
            else if (o.stack.size() == 1)
              append(out, ok(with(rest(s, 2), {o.stack.at(0)})));
          }
        }
        return out;
      case Op::TransferTokens:
        if (n >= 3 && s.at(1).is(ValueKind::Int) && s.at(2).is(ValueKind::Address))
          return ok(with(rest(s, 3), {Value::transfer(s.at(0), s.at(1).as_int(), s.at(2).text())}));
        return {};
      case Op::Failwith:
        if (n >= 1) return {RunOutcome::failed(s.at(0))};
        return {};
      case Op::Pack:
        if (n >= 1) return ok(with(rest(s, 1), {model_pack(s.at(0))}));
        return {};
      case Op::Sha256:
        if (n >= 1 && s.at(0).is(ValueKind::Bytes)) return ok(with(rest(s, 1), {model_sha256(s.at(0))}));
        return {};
    }
    return {};
  }
};

}  // namespace detail

// Like exec_seq, but reports a stuck configuration as an outcome.
inline RunOutcome try_exec_seq(const Stack& s, const InstrSeq& is, std::int64_t fuel = kDefaultFuel) {
  return detail::Machine(fuel).seq(s, is);
}

inline RunOutcome exec_seq(const Stack& s, const InstrSeq& is, std::int64_t fuel = kDefaultFuel) {
  RunOutcome o = try_exec_seq(s, is, fuel);
  if (o.kind == RunOutcome::Kind::Stuck) throw StuckError(o.reason);
  return o;
}

// All outcomes of derivations of height at most depth.
inline std::vector<RunOutcome> exec_derivation_search(const Stack& s, const InstrSeq& is, int depth) {
  return detail::Deriver().seq(s, is, 0, depth);
}

}  // namespace mmv
