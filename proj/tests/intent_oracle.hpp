#pragma once

// Random straight-line programs for intent inference, and a brute-force
// simulator that serves as the reference. The simulator tracks, for one
// parameter at a time, the set of "first access" states reachable by
// executing the routine with every call inlined. Calls that can come back to
// the caller may be skipped (some recursion level has to stop), and their
// depth is bounded.

#include "segmig/model.hpp"

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace testsupport {

struct IntentOp {
  enum Kind { read, write, read_write, read_expr_arg, call, ext_in, ext_out, ext_inout,
              ext_unknown, intrinsic } kind = read;
  int param = 0;          // read/write/read_write/read_expr_arg/ext*/intrinsic
  int callee = 0;         // call
  std::vector<int> args;  // call: caller parameter index, or -1 for the local T
};

struct IntentProgram {
  std::vector<int> arity;
  std::vector<std::vector<IntentOp>> body;
};

inline const char *param_name(int i) {
  static const char *names[] = {"A", "B", "C", "D"};
  return names[i];
}

inline IntentProgram random_intent_program(std::mt19937 &rng, int max_routines = 8,
                                           int max_params = 4, int max_ops = 8) {
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
  IntentProgram p;
  int n = 1 + pick(max_routines);
  for (int r = 0; r < n; ++r)
    p.arity.push_back(pick(max_params + 1));
  p.body.resize(n);
  for (int r = 0; r < n; ++r) {
    int ops = pick(max_ops + 1);
    for (int i = 0; i < ops; ++i) {
      IntentOp op;
      int k = pick(10);
      if (k <= 3) {
        op.kind = IntentOp::call;
        op.callee = pick(n);
        // distinct actuals: passing one variable twice is not conforming
        std::vector<int> avail;
        for (int q = 0; q < p.arity[r]; ++q)
          avail.push_back(q);
        std::shuffle(avail.begin(), avail.end(), rng);
        for (int a = 0; a < p.arity[op.callee]; ++a) {
          if (!avail.empty() && pick(4) != 0) {
            op.args.push_back(avail.back());
            avail.pop_back();
          } else {
            op.args.push_back(-1);
          }
        }
      } else {
        if (p.arity[r] == 0)
          continue;
        op.param = pick(p.arity[r]);
        static const IntentOp::Kind simple[] = {
            IntentOp::read,   IntentOp::write,   IntentOp::read_write,
            IntentOp::read_expr_arg, IntentOp::ext_in, IntentOp::ext_out,
            IntentOp::ext_inout, IntentOp::ext_unknown, IntentOp::intrinsic};
        op.kind = simple[pick(9)];
      }
      p.body[r].push_back(op);
    }
  }
  return p;
}

inline std::string routine_name(int r) { return "R" + std::to_string(r); }

// Fixed-form source, one file per routine.
inline std::map<std::string, std::string> intent_program_source(const IntentProgram &p) {
  std::map<std::string, std::string> files;
  for (std::size_t r = 0; r < p.body.size(); ++r) {
    std::string params;
    for (int q = 0; q < p.arity[r]; ++q)
      params += std::string(q ? ", " : "") + param_name(q);
    std::string text = "      SUBROUTINE " + routine_name(static_cast<int>(r)) + "(" + params + ")\n";
    text += "      INTEGER T\n";
    if (!params.empty())
      text += "      INTEGER " + params + "\n";
    for (const auto &op : p.body[r]) {
      std::string x = op.kind == IntentOp::call ? "" : param_name(op.param);
      switch (op.kind) {
      case IntentOp::read: text += "      WRITE(*,*) " + x + "\n"; break;
      case IntentOp::write: text += "      " + x + " = 1\n"; break;
      case IntentOp::read_write: text += "      " + x + " = " + x + " + 1\n"; break;
      case IntentOp::read_expr_arg: text += "      CALL UNK(" + x + " + 1)\n"; break;
      case IntentOp::ext_in: text += "      CALL EXTIN(" + x + ")\n"; break;
      case IntentOp::ext_out: text += "      CALL EXTOUT(" + x + ")\n"; break;
      case IntentOp::ext_inout: text += "      CALL EXTIO(" + x + ")\n"; break;
      case IntentOp::ext_unknown: text += "      CALL UNK(" + x + ")\n"; break;
      case IntentOp::intrinsic: text += "      T = ABS(" + x + ")\n"; break;
      case IntentOp::call: {
        std::string args;
        for (std::size_t a = 0; a < op.args.size(); ++a)
          args += std::string(a ? ", " : "") + (op.args[a] < 0 ? "T" : param_name(op.args[a]));
        text += "      CALL " + routine_name(op.callee) + "(" + args + ")\n";
        break;
      }
      }
    }
    text += "      END\n";
    files["src/r" + std::to_string(r) + ".f"] = text;
  }
  return files;
}

inline segmig::IntentCatalog intent_program_catalog() {
  using segmig::Intent;
  return {{"extin", {Intent::in}}, {"extout", {Intent::out}}, {"extio", {Intent::inout}}};
}

class IntentSimulator {
public:
  explicit IntentSimulator(const IntentProgram &p) : p_(p) {
    int n = static_cast<int>(p.body.size());
    reach_.assign(n, std::vector<bool>(n, false));
    for (int r = 0; r < n; ++r) {
      // plain DFS from r over call ops
      std::vector<int> todo = {r};
      while (!todo.empty()) {
        int x = todo.back();
        todo.pop_back();
        for (const auto &op : p.body[x])
          if (op.kind == IntentOp::call && !reach_[r][op.callee]) {
            reach_[r][op.callee] = true;
            todo.push_back(op.callee);
          }
      }
    }
    depth_ = 4 * n + 4;
  }

  // Intent of parameter `q` of routine `r`.
  segmig::Intent intent(int r, int q) {
    unsigned final_states = run(r, 1u << q, kN, depth_);
    using segmig::Intent;
    Intent out = Intent::unknown;
    if (final_states & kR)
      out = segmig::join(out, Intent::in);
    if (final_states & kW)
      out = segmig::join(out, Intent::out);
    if (final_states & kRW)
      out = segmig::join(out, Intent::inout);
    return out == Intent::unknown ? Intent::in : out;
  }

private:
  // States of the tracked variable: untouched, read first (never written),
  // read first then written, written first.
  static constexpr unsigned kN = 1, kR = 2, kRW = 4, kW = 8;

  static unsigned access(unsigned states, bool write) {
    unsigned out = 0;
    for (unsigned s : {kN, kR, kRW, kW}) {
      if (!(states & s))
        continue;
      if (s == kN)
        out |= write ? kW : kR;
      else if (s == kR)
        out |= write ? kRW : kR;
      else
        out |= s;
    }
    return out;
  }

  // Set of states after running routine r with the tracked variable bound to
  // the parameters in `mask`, starting from `states`.
  unsigned run(int r, unsigned mask, unsigned states, int depth) {
    auto key = std::make_tuple(r, mask, states, depth);
    if (auto it = memo_.find(key); it != memo_.end())
      return it->second;
    unsigned s = states;
    for (const auto &op : p_.body[r]) {
      if (op.kind == IntentOp::call) {
        unsigned inner = 0;
        for (std::size_t a = 0; a < op.args.size(); ++a)
          if (op.args[a] >= 0 && (mask >> op.args[a]) & 1u)
            inner |= 1u << a;
        if (!inner)
          continue;
        bool may_return_here = reach_[op.callee][r];
        if (may_return_here)
          s = s | (depth > 0 ? run(op.callee, inner, s, depth - 1) : 0u);
        else
          s = run(op.callee, inner, s, depth);
        continue;
      }
      if (!((mask >> op.param) & 1u))
        continue;
      switch (op.kind) {
      case IntentOp::read:
      case IntentOp::read_expr_arg:
      case IntentOp::ext_in:
      case IntentOp::intrinsic: s = access(s, false); break;
      case IntentOp::write:
      case IntentOp::ext_out: s = access(s, true); break;
      default: s = access(access(s, false), true); break;
      }
    }
    memo_[key] = s;
    return s;
  }

  const IntentProgram &p_;
  std::vector<std::vector<bool>> reach_;
  int depth_ = 0;
  std::map<std::tuple<int, unsigned, unsigned, int>, unsigned> memo_;
};

} // namespace testsupport
