#include "segmig/symbols.hpp"

#include <algorithm>
#include <array>

namespace segmig {

namespace {

constexpr std::array kIntrinsics = {
    "abs",    "iabs",   "dabs",   "cabs",   "sqrt",   "dsqrt",  "csqrt",  "exp",
    "dexp",   "cexp",   "log",    "alog",   "dlog",   "clog",   "log10",  "alog10",
    "dlog10", "sin",    "dsin",   "csin",   "cos",    "dcos",   "ccos",   "tan",
    "dtan",   "asin",   "dasin",  "acos",   "dacos",  "atan",   "datan",  "atan2",
    "datan2", "sinh",   "dsinh",  "cosh",   "dcosh",  "tanh",   "dtanh",  "int",
    "ifix",   "idint",  "real",   "float",  "sngl",   "dble",   "cmplx",  "ichar",
    "char",   "nint",   "idnint", "anint",  "dnint",  "aint",   "dint",   "mod",
    "amod",   "dmod",   "sign",   "isign",  "dsign",  "dim",    "idim",   "ddim",
    "dprod",  "max",    "max0",   "amax1",  "dmax1",  "amax0",  "max1",   "min",
    "min0",   "amin1",  "dmin1",  "amin0",  "min1",   "len",    "index",  "lge",
    "lgt",    "lle",    "llt",    "aimag",  "conjg",  "len_trim", "trim", "adjustl",
    "adjustr", "size",  "associated", "huge", "tiny", "epsilon", "repeat", "scan",
    "verify", "achar",  "iachar", "floor",  "ceiling", "modulo"};

constexpr std::array kIoSpecifiers = {
    "unit",   "fmt",       "rec",        "end",    "err",         "iostat",
    "iomsg",  "file",      "status",     "access", "form",        "recl",
    "blank",  "position",  "action",     "delim",  "pad",         "exist",
    "opened", "number",    "named",      "name",   "sequential",  "direct",
    "formatted", "unformatted", "nextrec", "size", "advance",     "readwrite",
    "read",   "write"};

// Specifiers through which an I/O statement returns a value.
bool io_specifier_writes(const std::string &stmt, const std::string &spec) {
  if (spec == "iostat" || spec == "iomsg" || spec == "size")
    return true;
  if (stmt == "inquire")
    return spec != "unit" && spec != "file" && spec != "err";
  return false;
}

struct Walker {
  const SymbolTable &syms;
  const SourceSpan &span;
  std::vector<UseEvent> &out;

  void emit(UseEvent::Kind k, const std::string &name) {
    UseEvent e;
    e.kind = k;
    e.name = name;
    e.span = span;
    out.push_back(std::move(e));
  }

  // Reading a bare name: a local variable, or a field through the default
  // pointer.
  void read_name(const std::string &name) {
    if (const SegmentDefinition *seg = syms.field_owner(name)) {
      UseEvent e;
      e.kind = UseEvent::field;
      e.name = name;
      e.segment = seg->name;
      e.span = span;
      out.push_back(std::move(e));
      return;
    }
    emit(UseEvent::read, name);
  }

  void read_root(const ExprToken &t) {
    if (t.kind == TokenKind::dotted_access || t.kind == TokenKind::slash_dim) {
      if (!t.base.empty())
        read_root(t.base.front());
      if (t.kind == TokenKind::dotted_access && t.has_args)
        expr(t.args);
      return;
    }
    if (t.is_ident())
      read_name(t.text);
  }

  static bool has_colon(const ExprTokenStream &inner) {
    int depth = 0;
    for (const auto &t : inner) {
      if (t.is_punct("("))
        ++depth;
      else if (t.is_punct(")"))
        --depth;
      else if (depth == 0 && t.is_punct(":"))
        return true;
    }
    return false;
  }

  bool indexes_storage(const std::string &name, const ExprTokenStream &inner) const {
    if (const DeclInfo *d = syms.decl(name)) {
      if (d->is_array())
        return true;
      if (d->type && d->type->base == "character" && has_colon(inner))
        return true; // substring
    }
    if (syms.kind == UnitKind::function && name == syms.unit_name)
      return true;
    if (!syms.is_local(name))
      if (const SegmentDefinition *seg = syms.field_owner(name)) {
        const FieldDef *f = seg->field(name);
        return !f->dims.empty() || (f->type.base == FieldBase::character && has_colon(inner));
      }
    return false;
  }

  // An actual argument: the variable passed by reference, if any.
  std::optional<std::string> actual(const ExprTokenStream &arg) {
    if (arg.size() == 1 && arg[0].is_ident()) {
      const std::string &n = arg[0].text;
      if (syms.field_owner(n)) {
        read_name(n);
        return std::nullopt;
      }
      return n;
    }
    if (arg.size() >= 3 && arg[0].is_ident() && arg[1].is_punct("(") &&
        matching_paren(arg, 1) == arg.size() - 1 &&
        indexes_storage(arg[0].text, ExprTokenStream(arg.begin() + 2, arg.end() - 1))) {
      expr(ExprTokenStream(arg.begin() + 2, arg.end() - 1));
      if (syms.field_owner(arg[0].text)) {
        read_name(arg[0].text);
        return std::nullopt;
      }
      return arg[0].text;
    }
    expr(arg);
    return std::nullopt;
  }

  void invoke(const std::string &callee, const ExprTokenStream &inner, bool is_function) {
    UseEvent e;
    e.kind = UseEvent::invoke;
    e.name = callee;
    e.is_function = is_function;
    e.span = span;
    for (const auto &arg : split_top_level(inner))
      e.passed.push_back(actual(arg));
    out.push_back(std::move(e));
  }

  void expr(const ExprTokenStream &t) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const ExprToken &tok = t[i];
      if (tok.kind == TokenKind::dotted_access || tok.kind == TokenKind::slash_dim) {
        read_root(tok);
        continue;
      }
      if (!tok.is_ident())
        continue;
      if (i + 1 < t.size() && t[i + 1].is_punct("(")) {
        std::size_t close = matching_paren(t, i + 1);
        if (close == std::string::npos)
          throw MigrationError(span, "unbalanced parentheses after " + tok.text);
        ExprTokenStream inner(t.begin() + static_cast<long>(i) + 2,
                              t.begin() + static_cast<long>(close));
        if (indexes_storage(tok.text, inner)) {
          expr(inner);
          read_name(tok.text);
        } else {
          invoke(tok.text, inner, true);
        }
        i = close;
        continue;
      }
      read_name(tok.text);
    }
  }

  // Assignment target or input item.
  void target(const ExprTokenStream &t) {
    if (t.empty())
      return;
    const ExprToken &head = t[0];
    if (head.kind == TokenKind::dotted_access || head.kind == TokenKind::slash_dim) {
      read_root(head);
      if (t.size() > 1)
        expr(ExprTokenStream(t.begin() + 1, t.end()));
      return;
    }
    if (!head.is_ident()) {
      expr(t);
      return;
    }
    if (t.size() > 1)
      expr(ExprTokenStream(t.begin() + 1, t.end()));
    if (syms.field_owner(head.text))
      read_name(head.text);
    else
      emit(UseEvent::write, head.text);
  }

  // `( items, v = e1, e2 [, e3] )` inside an I/O list.
  bool implied_do(const ExprTokenStream &item, bool input) {
    if (item.size() < 2 || !item.front().is_punct("(") ||
        matching_paren(item, 0) != item.size() - 1)
      return false;
    auto parts = split_top_level(ExprTokenStream(item.begin() + 1, item.end() - 1));
    std::size_t ctl = parts.size();
    for (std::size_t k = 0; k < parts.size(); ++k)
      if (parts[k].size() >= 3 && parts[k][0].is_ident() && parts[k][1].is_op("=")) {
        ctl = k;
        break;
      }
    if (ctl == parts.size() || ctl == 0)
      return false;
    expr(ExprTokenStream(parts[ctl].begin() + 2, parts[ctl].end()));
    for (std::size_t k = ctl + 1; k < parts.size(); ++k)
      expr(parts[k]);
    emit(UseEvent::write, parts[ctl][0].text);
    for (std::size_t k = 0; k < ctl; ++k)
      io_item(parts[k], input);
    return true;
  }

  void io_item(const ExprTokenStream &item, bool input) {
    if (implied_do(item, input))
      return;
    if (input)
      target(item);
    else
      expr(item);
  }

  void io_list(const ExprTokenStream &t, bool input) {
    for (const auto &item : split_top_level(t))
      io_item(item, input);
  }

  void io_control(const std::string &stmt, const ExprTokenStream &t) {
    if (t.size() < 2)
      return;
    ExprTokenStream inner(t.begin() + 1, t.end() - 1);
    for (const auto &item : split_top_level(inner)) {
      if (item.size() >= 2 && item[0].is_ident() && item[1].is_op("=") &&
          is_io_specifier(item[0].text)) {
        ExprTokenStream value(item.begin() + 2, item.end());
        if (io_specifier_writes(stmt, item[0].text))
          target(value);
        else
          expr(value);
      } else {
        expr(item);
      }
    }
  }

  const SegmentDefinition *operand_segment(const ExprTokenStream &op) const {
    if (op.size() != 1)
      return nullptr;
    const ExprToken &t = op[0];
    if (t.is_ident()) {
      if (auto it = syms.pointers.find(t.text); it != syms.pointers.end())
        return syms.segment(it->second);
      return syms.decl(t.text) ? nullptr : syms.segment(t.text);
    }
    if (t.kind == TokenKind::dotted_access) {
      const SegmentDefinition *owner = nullptr;
      if (t.base.empty())
        owner = syms.field_owner(t.field);
      else if (t.base.size() == 1 && t.base[0].is_ident())
        owner = operand_segment(t.base);
      if (owner)
        if (const FieldDef *f = owner->field(t.field); f && f->type.base == FieldBase::segment_pointer)
          return syms.segment(f->type.segment);
    }
    return nullptr;
  }

  void esope(const EsopeStatement &e) {
    auto root = [&](const ExprTokenStream &op, bool write) {
      if (op.empty())
        return;
      if (op[0].is_ident() && !syms.field_owner(op[0].text)) {
        emit(write ? UseEvent::write : UseEvent::read, op[0].text);
      } else {
        read_root(op[0]);
      }
    };
    // the migrated command passes the segment's dimensioning variables
    auto dims = [&](const ExprTokenStream &op) {
      if (const SegmentDefinition *seg = operand_segment(op))
        for (const auto &v : seg->dimensioning_vars)
          emit(UseEvent::read, v);
    };
    switch (e.kind) {
    case EsopeKind::segini:
      dims(e.operands[0]);
      root(e.operands[0], true);
      break;
    case EsopeKind::segini_copy:
      root(e.operands[1], false);
      root(e.operands[0], true);
      break;
    case EsopeKind::segact_move:
      root(e.operands[0], false);
      root(e.operands[1], false);
      break;
    case EsopeKind::segadj:
      dims(e.operands[0]);
      root(e.operands[0], false);
      break;
    case EsopeKind::segprt:
      root(e.operands[0], false);
      break;
    case EsopeKind::segsup:
      root(e.operands[0], false);
      root(e.operands[0], true);
      break;
    default:
      break;
    }
  }

  void statement(const Stmt &s) {
    switch (s.kind) {
    case StmtKind::assignment:
    case StmtKind::do_loop: {
      for (const auto &p : s.parts)
        if (p.role == PartRole::read)
          expr(p.tokens);
      for (const auto &p : s.parts) {
        if (p.role == PartRole::write)
          target(p.tokens);
        else if (p.role == PartRole::do_var)
          emit(UseEvent::write, p.tokens[0].text);
      }
      return;
    }
    case StmtKind::esope:
      esope(*s.esope);
      return;
    case StmtKind::call: {
      std::string callee = s.parts[1].tokens[0].text;
      ExprTokenStream inner;
      if (s.parts.size() > 2) {
        const auto &args = s.parts[2].tokens;
        inner.assign(args.begin() + 1, args.end() - 1);
      }
      invoke(callee, inner, false);
      return;
    }
    case StmtKind::io: {
      std::string stmt = s.parts[0].tokens[0].text;
      for (const auto &p : s.parts) {
        switch (p.role) {
        case PartRole::io_control:
          io_control(stmt, p.tokens);
          break;
        case PartRole::io_input:
          io_list(p.tokens, true);
          break;
        case PartRole::io_output:
          io_list(p.tokens, false);
          break;
        case PartRole::read:
          if (!(p.tokens.size() == 1 && p.tokens[0].is_op("*")))
            expr(p.tokens);
          break;
        default:
          break;
        }
      }
      return;
    }
    case StmtKind::opaque: {
      bool only_raw = s.parts.size() == 1 && s.parts[0].role == PartRole::raw;
      if (!only_raw) {
        for (const auto &p : s.parts)
          if (p.role == PartRole::read)
            expr(p.tokens);
        return;
      }
      // Unknown statement: its leading keyword aside, assume every name is
      // both read and written.
      const auto &t = s.parts[0].tokens;
      for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i].is_ident()) {
          read_name(t[i].text);
          if (!syms.field_owner(t[i].text))
            emit(UseEvent::write, t[i].text);
        }
      return;
    }
    case StmtKind::if_then:
    case StmtKind::else_if:
    case StmtKind::logical_if:
    case StmtKind::arithmetic_if:
    case StmtKind::do_while:
    case StmtKind::return_:
      for (const auto &p : s.parts)
        if (p.role == PartRole::read)
          expr(p.tokens);
      for (const auto &n : s.nested)
        statement(n);
      return;
    default:
      return;
    }
  }
};

} // namespace

bool is_intrinsic_name(const std::string &name) {
  return std::find(kIntrinsics.begin(), kIntrinsics.end(), name) != kIntrinsics.end();
}

bool is_io_specifier(const std::string &name) {
  return std::find(kIoSpecifiers.begin(), kIoSpecifiers.end(), name) != kIoSpecifiers.end();
}

const DeclInfo *SymbolTable::decl(const std::string &name) const {
  auto it = decls.find(name);
  return it == decls.end() ? nullptr : &it->second;
}

bool SymbolTable::is_param(const std::string &name) const {
  return std::find(params.begin(), params.end(), name) != params.end();
}

const SegmentDefinition *SymbolTable::segment(const std::string &name) const {
  for (const auto *s : segments)
    if (s->name == name)
      return s;
  return nullptr;
}

bool SymbolTable::is_local(const std::string &name) const {
  return decls.count(name) || is_param(name) || pointers.count(name) ||
         (kind == UnitKind::function && name == unit_name);
}

const SegmentDefinition *SymbolTable::field_owner(const std::string &name) const {
  if (is_local(name) || segments.empty())
    return nullptr;
  return owning_segment(segments, name);
}

const SegmentDefinition *owning_segment(const std::vector<const SegmentDefinition *> &scope,
                                        const std::string &field, const SourceSpan &where) {
  const SegmentDefinition *found = nullptr;
  for (const auto *s : scope) {
    if (!s->field(field))
      continue;
    if (found && found->name != s->name)
      throw MigrationError(where, "field '" + field + "' is ambiguous: owned by segments " +
                                      found->name + " and " + s->name);
    found = s;
  }
  return found;
}

SymbolTable build_symbol_table(const ProgramUnitAst &unit,
                               std::vector<const SegmentDefinition *> visible) {
  SymbolTable t;
  t.unit_name = unit.name;
  t.kind = unit.kind;
  t.params = unit.params;
  for (const auto &s : unit.body)
    if (s.kind == StmtKind::segment_def &&
        std::none_of(visible.begin(), visible.end(),
                     [&](const SegmentDefinition *v) { return v->name == s.segment->name; }))
      t.segments.push_back(&*s.segment);
  for (const auto &seg : unit.included_segments)
    if (std::none_of(visible.begin(), visible.end(),
                     [&](const SegmentDefinition *v) { return v->name == seg.name; }))
      visible.push_back(&seg);
  for (const auto *v : visible)
    if (std::none_of(t.segments.begin(), t.segments.end(),
                     [&](const SegmentDefinition *x) { return x->name == v->name; }))
      t.segments.push_back(v);

  for (const auto &s : unit.body) {
    switch (s.kind) {
    case StmtKind::type_decl:
      for (const auto &e : s.decl->entities) {
        auto &d = t.decls[e.name];
        d.type = s.decl->type;
        if (!e.dims.empty())
          d.dims = e.dims;
        if (e.char_len)
          d.char_len = e.char_len;
        if (d.span.start_line == 0)
          d.span = s.span;
      }
      break;
    case StmtKind::dimension:
      for (const auto &e : s.decl->entities) {
        auto &d = t.decls[e.name];
        d.dims = e.dims;
        if (d.span.start_line == 0)
          d.span = s.span;
      }
      break;
    case StmtKind::common:
      for (const auto &e : s.decl->entities) {
        auto &d = t.decls[e.name];
        d.in_common = true;
        if (!e.dims.empty())
          d.dims = e.dims;
        if (d.span.start_line == 0)
          d.span = s.span;
      }
      break;
    case StmtKind::parameter:
      for (const auto &n : s.names)
        t.decls[n].is_parameter = true;
      break;
    case StmtKind::external:
      for (const auto &n : s.names)
        t.decls[n].is_external = true;
      break;
    case StmtKind::intrinsic:
      for (const auto &n : s.names)
        t.decls[n].is_intrinsic = true;
      break;
    case StmtKind::esope:
      if (s.esope->kind == EsopeKind::pointer_decl)
        for (const auto &b : s.esope->pointers)
          t.pointers[b.pointer] = b.segment;
      break;
    default:
      break;
    }
  }
  // A name in EXTERNAL/INTRINSIC alone is a routine, not a local entity.
  for (auto it = t.decls.begin(); it != t.decls.end();) {
    const DeclInfo &d = it->second;
    bool routine_only = (d.is_external || d.is_intrinsic) && !d.type && d.dims.empty();
    if (routine_only)
      it = t.decls.erase(it);
    else
      ++it;
  }
  return t;
}

void walk_statement(const Stmt &s, const SymbolTable &syms, std::vector<UseEvent> &out) {
  Walker w{syms, s.span, out};
  w.statement(s);
}

void walk_expression(const ExprTokenStream &tokens, const SymbolTable &syms,
                     const SourceSpan &span, std::vector<UseEvent> &out) {
  Walker w{syms, span, out};
  w.expr(tokens);
}

std::vector<UseEvent> unit_events(const ProgramUnitAst &unit, const SymbolTable &syms) {
  std::vector<UseEvent> out;
  for (const auto &s : unit.body)
    walk_statement(s, syms, out);
  return out;
}

} // namespace segmig
