#include "segmig/analysis.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace segmig {

std::string_view type_origin_name(TypeOrigin o) {
  switch (o) {
  case TypeOrigin::declared: return "declared";
  case TypeOrigin::implicit_rule: return "implicit-rule";
  case TypeOrigin::pointeur_decl: return "pointeur-decl";
  case TypeOrigin::function_return: return "function-return";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Implicit typing

ImplicitTable ImplicitTable::for_unit(const ProgramUnitAst &unit) {
  ImplicitTable t;
  for (char c = 'a'; c <= 'z'; ++c)
    t.letters[c] = TypeSpec{(c >= 'i' && c <= 'n') ? "integer" : "real", "", std::nullopt};
  for (const auto &s : unit.body) {
    if (s.kind != StmtKind::implicit)
      continue;
    if (s.implicit->none) {
      t.none = true;
      continue;
    }
    for (const auto &rule : s.implicit->rules)
      for (auto [lo, hi] : rule.ranges)
        for (char c = lo; c <= hi; ++c)
          t.letters[c] = rule.type;
  }
  return t;
}

std::optional<TypeSpec> ImplicitTable::type_of(const std::string &name) const {
  if (none || name.empty())
    return std::nullopt;
  auto it = letters.find(name[0]);
  if (it == letters.end())
    return std::nullopt;
  return it->second;
}

namespace {

struct NameUse {
  bool variable = false;
  bool function = false;
  bool subroutine = false;
  bool written = false;
  SourceSpan span;
};

std::map<std::string, NameUse> name_uses(const ProgramUnitAst &unit, const SymbolTable &syms,
                                         const std::vector<UseEvent> &events) {
  std::map<std::string, NameUse> uses;
  for (const auto &e : events) {
    switch (e.kind) {
    case UseEvent::read:
    case UseEvent::write: {
      auto &u = uses[e.name];
      u.variable = true;
      u.written = u.written || e.kind == UseEvent::write;
      if (u.span.start_line == 0)
        u.span = e.span;
      break;
    }
    case UseEvent::invoke: {
      auto &u = uses[e.name];
      (e.is_function ? u.function : u.subroutine) = true;
      if (u.span.start_line == 0)
        u.span = e.span;
      break;
    }
    case UseEvent::field: {
      auto &u = uses[e.segment];
      u.variable = true;
      break;
    }
    }
  }
  for (const auto &[n, d] : syms.decls) {
    uses[n].variable = true;
    for (const auto &dim : d.dims)
      for (const auto &t : flatten(dim))
        if (t.is_ident())
          uses[t.text].variable = true;
  }
  for (const auto &p : syms.params)
    uses[p].variable = true;
  for (const auto &[p, seg] : syms.pointers)
    uses[p].variable = true;
  for (const auto &s : unit.body)
    if (s.kind == StmtKind::data || s.kind == StmtKind::save || s.kind == StmtKind::equivalence)
      for (const auto &n : s.names)
        uses[n].variable = true;
  return uses;
}

std::optional<TypeSpec> function_return_type(const ProjectModel &model, const std::string &f) {
  if (const UnitSummary *u = model.unit(f))
    return u->return_type;
  return std::nullopt;
}

} // namespace

std::vector<TypeAssignment> infer_implicit_types(const ProgramUnitAst &unit,
                                                 const SymbolTable &syms,
                                                 const ProjectModel &model) {
  auto events = unit_events(unit, syms);
  auto uses = name_uses(unit, syms, events);
  ImplicitTable rules = ImplicitTable::for_unit(unit);
  std::vector<TypeAssignment> out;

  auto implicit_or_throw = [&](const std::string &name, const SourceSpan &span) {
    auto t = rules.type_of(name);
    if (!t)
      throw MigrationError(span, "symbol " + name + " has no type under IMPLICIT NONE in " +
                                     unit.name);
    return *t;
  };

  for (const auto &[name, use] : uses) {
    bool is_result = unit.kind == UnitKind::function && name == unit.name;
    if (is_result) {
      TypeAssignment a{name, {}, {}, TypeOrigin::function_return};
      if (unit.return_type)
        a.type = *unit.return_type;
      else if (const DeclInfo *d = syms.decl(name); d && d->type)
        a.type = *d->type;
      else
        a.type = implicit_or_throw(name, unit.span);
      out.push_back(a);
      continue;
    }
    const DeclInfo *d = syms.decl(name);
    bool routine = use.function || use.subroutine;
    bool array = d && d->is_array();
    if (routine && use.variable && (use.written || array || !d || !d->type || syms.pointers.count(name)))
      throw MigrationError(use.span, "symbol " + name +
                                         " is used both as a variable and as a called routine");
    if (use.subroutine)
      continue;
    if (use.function) {
      if (model.unit(name)) {
        auto rt = function_return_type(model, name);
        out.push_back({name, rt.value_or(TypeSpec{}), {}, TypeOrigin::function_return});
      } else if (d && d->type) {
        out.push_back({name, *d->type, {}, TypeOrigin::function_return});
      } else if (!is_intrinsic_name(name)) {
        out.push_back({name, implicit_or_throw(name, use.span), {}, TypeOrigin::function_return});
      }
      continue;
    }
    if (auto it = syms.pointers.find(name); it != syms.pointers.end()) {
      out.push_back({name, {}, it->second, TypeOrigin::pointeur_decl});
      continue;
    }
    if (!d && syms.segment(name)) {
      // default pointer of a visible segment
      out.push_back({name, {}, name, TypeOrigin::pointeur_decl});
      continue;
    }
    if (d && d->type) {
      TypeSpec t = *d->type;
      if (d->char_len)
        t.char_len = d->char_len;
      out.push_back({name, t, {}, TypeOrigin::declared});
      continue;
    }
    out.push_back({name, implicit_or_throw(name, d ? d->span : use.span), {},
                   TypeOrigin::implicit_rule});
  }
  return out;
}

ExternalClassification classify_external_names(const ProgramUnitAst &unit,
                                                const SymbolTable &syms,
                                                const ProjectModel &) {
  ExternalClassification c;
  auto events = unit_events(unit, syms);
  std::set<std::string> invoked, written;
  for (const auto &e : events) {
    if (e.kind == UseEvent::invoke && e.is_function)
      invoked.insert(e.name);
    if (e.kind == UseEvent::write)
      written.insert(e.name);
  }
  for (const auto &s : unit.body) {
    if (s.kind == StmtKind::external)
      for (const auto &n : s.names)
        c.external_routine_decl.insert(n);
    if (s.kind != StmtKind::type_decl)
      continue;
    for (const auto &e : s.decl->entities) {
      const std::string &n = e.name;
      bool own_result = unit.kind == UnitKind::function && n == unit.name;
      if (!own_result && invoked.count(n)) {
        if (written.count(n))
          throw MigrationError(s.span, "name " + n + " is both assigned and invoked");
        c.return_type_decl.insert(n);
      } else {
        c.plain_variable_decl.insert(n);
      }
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Intents

IntentCatalog parse_intent_catalog(std::string_view text) {
  IntentCatalog cat;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    std::string compact;
    for (char c : line)
      if (c != ' ' && c != '\t' && c != '\r')
        compact += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (compact.empty())
      continue;
    auto open = compact.find('(');
    if (open == std::string::npos || open == 0 || compact.back() != ')')
      throw MigrationError(SourceSpan{0, lineno, 1, lineno, 1},
                           "malformed intent catalog line: " + line);
    std::string name = compact.substr(0, open);
    std::vector<Intent> intents;
    std::string body = compact.substr(open + 1, compact.size() - open - 2);
    std::size_t pos = 0;
    while (!body.empty() && pos <= body.size()) {
      auto comma = body.find(',', pos);
      std::string item = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (item == "in")
        intents.push_back(Intent::in);
      else if (item == "out")
        intents.push_back(Intent::out);
      else if (item == "inout")
        intents.push_back(Intent::inout);
      else
        throw MigrationError(SourceSpan{0, lineno, 1, lineno, 1},
                             "unknown intent '" + item + "' in catalog entry " + name);
      if (comma == std::string::npos)
        break;
      pos = comma + 1;
    }
    cat[name] = std::move(intents);
  }
  return cat;
}

namespace {

// Abstract access traces: which access comes first and whether any write
// occurs. Four possible values, kept as a bit set.
enum Summary : unsigned { kNone = 1, kRead = 2, kReadWrite = 4, kWrite = 8 };
using SummarySet = unsigned;

unsigned concat1(unsigned a, unsigned b) {
  if (a == kNone)
    return b;
  if (a == kRead)
    return (b == kReadWrite || b == kWrite) ? kReadWrite : kRead;
  return a;
}

SummarySet concat(SummarySet a, SummarySet b) {
  SummarySet out = 0;
  for (unsigned x = 1; x <= 8; x <<= 1)
    if (a & x)
      for (unsigned y = 1; y <= 8; y <<= 1)
        if (b & y)
          out |= concat1(x, y);
  return out;
}

SummarySet from_intent(Intent i) {
  switch (i) {
  case Intent::in: return kRead;
  case Intent::out: return kWrite;
  default: return kReadWrite;
  }
}

Intent to_intent(SummarySet s) {
  Intent out = Intent::unknown;
  if (s & kRead)
    out = join(out, Intent::in);
  if (s & kWrite)
    out = join(out, Intent::out);
  if (s & kReadWrite)
    out = join(out, Intent::inout);
  return out == Intent::unknown ? Intent::in : out;
}

bool is_routine(const UnitSummary &u) {
  return u.kind == UnitKind::subroutine || u.kind == UnitKind::function;
}

} // namespace

IntentTable infer_intents(const ProjectModel &model) { return infer_intents(model, {}); }

IntentTable infer_intents(const ProjectModel &model, const std::vector<std::string> &order) {
  std::vector<std::string> routines;
  for (const auto &n : order)
    if (const UnitSummary *u = model.unit(n); u && is_routine(*u) &&
        std::find(routines.begin(), routines.end(), n) == routines.end())
      routines.push_back(n);
  for (const auto &[n, u] : model.units)
    if (is_routine(u) && std::find(routines.begin(), routines.end(), n) == routines.end())
      routines.push_back(n);
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < routines.size(); ++i)
    index[routines[i]] = static_cast<int>(i);

  std::vector<std::vector<int>> succ(routines.size());
  for (std::size_t i = 0; i < routines.size(); ++i)
    for (const auto &e : model.units.at(routines[i]).events)
      if (e.kind == UseEvent::invoke)
        if (auto it = index.find(e.name); it != index.end())
          succ[i].push_back(it->second);

  // Tarjan: SCCs come out callees first.
  std::vector<int> idx(routines.size(), -1), low(routines.size()), comp(routines.size(), -1);
  std::vector<bool> on(routines.size());
  std::vector<int> stack;
  std::vector<std::vector<int>> sccs;
  int counter = 0;
  std::function<void(int)> visit = [&](int v) {
    idx[v] = low[v] = counter++;
    stack.push_back(v);
    on[v] = true;
    for (int w : succ[v]) {
      if (idx[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on[w]) {
        low[v] = std::min(low[v], idx[w]);
      }
    }
    if (low[v] == idx[v]) {
      std::vector<int> scc;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on[w] = false;
        comp[w] = static_cast<int>(sccs.size());
        scc.push_back(w);
      } while (w != v);
      sccs.push_back(std::move(scc));
    }
  };
  for (std::size_t i = 0; i < routines.size(); ++i)
    if (idx[i] < 0)
      visit(static_cast<int>(i));

  std::vector<std::vector<SummarySet>> value(routines.size());
  for (std::size_t i = 0; i < routines.size(); ++i)
    value[i].assign(model.units.at(routines[i]).params.size(), 0);

  auto evaluate = [&](int r) {
    const UnitSummary &u = model.units.at(routines[r]);
    std::vector<SummarySet> out;
    for (const auto &p : u.params) {
      SummarySet s = kNone;
      for (const auto &e : u.events) {
        if (e.kind == UseEvent::read && e.name == p)
          s = concat(s, kRead);
        else if (e.kind == UseEvent::write && e.name == p)
          s = concat(s, kWrite);
        else if (e.kind == UseEvent::invoke) {
          for (std::size_t k = 0; k < e.passed.size(); ++k) {
            if (e.passed[k] != p)
              continue;
            SummarySet atom;
            if (auto it = index.find(e.name); it != index.end()) {
              int c = it->second;
              if (k >= value[c].size())
                atom = kReadWrite;
              else if (comp[c] == comp[r])
                atom = kNone | value[c][k];
              else
                atom = value[c][k];
            } else if (auto cat = model.intent_catalog.find(e.name);
                       cat != model.intent_catalog.end()) {
              atom = k < cat->second.size() ? from_intent(cat->second[k]) : kReadWrite;
            } else if (is_intrinsic_name(e.name)) {
              atom = kRead;
            } else {
              atom = kReadWrite;
            }
            s = concat(s, atom);
          }
        }
      }
      out.push_back(s);
    }
    return out;
  };

  for (const auto &scc : sccs) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (int r : scc) {
        auto v = evaluate(r);
        if (v != value[r]) {
          value[r] = std::move(v);
          changed = true;
        }
      }
    }
  }

  IntentTable table;
  for (std::size_t i = 0; i < routines.size(); ++i) {
    auto &row = table[routines[i]];
    for (SummarySet s : value[i])
      row.push_back(to_intent(s));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Imports

RequiredSymbols required_symbols(const UnitSummary &unit, const ProjectModel &model) {
  RequiredSymbols req;
  for (const auto &[p, seg] : unit.pointers) {
    req.segments.insert(seg);
    if (model.segment(p))
      req.renamed_types.insert(p);
  }
  for (const auto &seg : unit.default_pointers) {
    req.segments.insert(seg);
    req.renamed_types.insert(seg);
  }
  for (const auto &e : unit.events) {
    if (e.kind == UseEvent::invoke && e.name != unit.name && !is_intrinsic_name(e.name))
      req.routines.insert(e.name);
    // a variable spelled like a segment is that segment's default pointer
    if ((e.kind == UseEvent::read || e.kind == UseEvent::write) && model.segment(e.name) &&
        !unit.pointers.count(e.name)) {
      req.segments.insert(e.name);
      req.renamed_types.insert(e.name);
    }
  }
  req.defined.insert(unit.name);
  for (const auto &n : unit.external_decls)
    if (!model.unit(n))
      req.defined.insert(n);
  return req;
}

std::vector<Import> compute_uses(const RequiredSymbols &req, const ProjectModel &model) {
  std::map<std::string, Import> by_module;
  for (const auto &seg : req.segments) {
    if (!model.segment(seg))
      throw MigrationError(SourceSpan{}, "segment " + seg + " is defined by no module");
    Import &imp = by_module[seg + "_mod"];
    imp.module = seg + "_mod";
    if (req.renamed_types.count(seg))
      imp.renames = {{"seg_" + seg, seg}};
  }
  for (const auto &r : req.routines) {
    if (req.defined.count(r) || is_intrinsic_name(r))
      continue;
    const UnitSummary *u = model.unit(r);
    if (u && (u->kind == UnitKind::subroutine || u->kind == UnitKind::function)) {
      by_module[r + "_mod"].module = r + "_mod";
      continue;
    }
    if (model.intent_catalog.count(r))
      continue;
    throw MigrationError(SourceSpan{}, "routine " + r +
                                           " is defined by no module, is not declared EXTERNAL "
                                           "and is not in the intent catalog");
  }
  std::vector<Import> out;
  for (auto &[m, imp] : by_module)
    out.push_back(std::move(imp));
  return out;
}

// ---------------------------------------------------------------------------
// Negative pointers

std::vector<Diagnostic> negative_pointer_diagnostics(const ProgramUnitAst &unit,
                                                     const SymbolTable &syms) {
  std::vector<Diagnostic> out;
  auto is_pointer = [&](const ExprToken &t) {
    return t.is_ident() && !syms.decl(t.text) &&
           (syms.pointers.count(t.text) || syms.segment(t.text));
  };
  auto is_cmp = [](const ExprToken &t) {
    static const std::set<std::string> ops = {".eq.", ".ne.", ".lt.", ".le.", ".gt.", ".ge.",
                                              "==",   "/=",   "<",    "<=",   ">",    ">="};
    return t.kind == TokenKind::op && ops.count(t.text);
  };
  auto warn = [&](const Stmt &s, const std::string &p, const char *what) {
    out.push_back({Severity::warning, s.span,
                   "pointer " + p + " " + what + " a negative value; left unchanged"});
  };
  auto scan = [&](const Stmt &s, const ExprTokenStream &t) {
    for (std::size_t i = 0; i + 3 < t.size(); ++i) {
      if (is_pointer(t[i]) && is_cmp(t[i + 1]) && t[i + 2].is_op("-") &&
          t[i + 3].kind == TokenKind::integer)
        warn(s, t[i].text, "compared with");
    }
    for (std::size_t i = 0; i + 3 < t.size(); ++i) {
      if (t[i].is_op("-") && t[i + 1].kind == TokenKind::integer && is_cmp(t[i + 2]) &&
          is_pointer(t[i + 3]))
        warn(s, t[i + 3].text, "compared with");
    }
  };
  unit.for_each_stmt([&](const Stmt &s) {
    if (s.kind == StmtKind::assignment) {
      const auto &lhs = s.parts[0].tokens;
      const auto &rhs = s.parts[2].tokens;
      if (lhs.size() == 1 && is_pointer(lhs[0]) && rhs.size() == 2 && rhs[0].is_op("-") &&
          rhs[1].kind == TokenKind::integer)
        warn(s, lhs[0].text, "is assigned");
    }
    for (const auto &p : s.parts)
      if (p.role == PartRole::read)
        scan(s, p.tokens);
  });
  return out;
}

} // namespace segmig
