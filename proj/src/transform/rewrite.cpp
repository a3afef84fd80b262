#include "segmig/transform.hpp"

#include <algorithm>
#include <cctype>

namespace segmig {

namespace {

bool word_like(const ExprToken &t) {
  return t.kind == TokenKind::identifier || t.kind == TokenKind::integer ||
         t.kind == TokenKind::real || t.kind == TokenKind::logical;
}

ExprToken op(std::string o) { return ExprToken::oper(std::move(o)); }
ExprToken pu(std::string p) { return ExprToken::punct(std::move(p)); }
ExprToken id(std::string n, bool space = false) { return ExprToken::ident(std::move(n), space); }

void append(ExprTokenStream &out, const ExprTokenStream &more) {
  out.insert(out.end(), more.begin(), more.end());
}

// Uppercases code outside character literals, for traceability comments.
std::string upper_code(const std::string &s) {
  std::string out = s;
  char quote = 0;
  for (auto &c : out) {
    if (quote) {
      if (c == quote)
        quote = 0;
    } else if (c == '\'' || c == '"') {
      quote = c;
    } else {
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

TargetNode trace(const std::string &text, const SourceSpan &origin) {
  return TargetNode::comment(std::string(kTracePrefix) + text, origin);
}

ExprTokenStream all_tokens(const Stmt &s) {
  ExprTokenStream t;
  for (const auto &p : s.parts)
    append(t, p.tokens);
  return t;
}

std::string original_text(const Stmt &s) { return upper_code(render_free(all_tokens(s))); }

bool same_tokens(const ExprTokenStream &a, const ExprTokenStream &b) {
  return without_spacing(flatten(a)) == without_spacing(flatten(b));
}

bool is_comparison(const ExprToken &t, bool &equal) {
  if (t.kind != TokenKind::op)
    return false;
  if (t.text == ".eq." || t.text == "==") {
    equal = true;
    return true;
  }
  if (t.text == ".ne." || t.text == "/=") {
    equal = false;
    return true;
  }
  return false;
}

bool operand_boundary(const ExprToken &t) {
  if (t.kind == TokenKind::punct)
    return t.text == "(" || t.text == ",";
  return t.kind == TokenKind::op &&
         (t.text == ".and." || t.text == ".or." || t.text == ".not." || t.text == ".eqv." ||
          t.text == ".neqv.");
}

bool operand_end(const ExprToken &t) {
  if (t.kind == TokenKind::punct)
    return t.text == ")" || t.text == ",";
  return t.kind == TokenKind::op &&
         (t.text == ".and." || t.text == ".or." || t.text == ".eqv." || t.text == ".neqv.");
}

// `p .eq. 0` and `p .ne. q` on segment pointers become associated() tests.
ExprTokenStream pointer_tests(const ExprTokenStream &t, const UnitContext &ctx) {
  ExprTokenStream out;
  std::size_t i = 0;
  while (i < t.size()) {
    bool equal = false;
    if (i + 2 < t.size() && is_comparison(t[i + 1], equal) &&
        (out.empty() || operand_boundary(out.back())) &&
        (i + 3 >= t.size() || operand_end(t[i + 3]))) {
      const ExprToken &a = t[i], &b = t[i + 2];
      const SegmentDefinition *sa = ctx.pointer_segment(a);
      const SegmentDefinition *sb = ctx.pointer_segment(b);
      bool zero_a = a.kind == TokenKind::integer && a.text == "0";
      bool zero_b = b.kind == TokenKind::integer && b.text == "0";
      if ((sa && (zero_b || sb)) || (sb && zero_a)) {
        bool pair = sa && sb;
        bool negate = pair ? !equal : equal;
        ExprTokenStream call;
        if (negate)
          call.push_back(op(".not."));
        call.push_back(id("associated", negate));
        call.push_back(pu("("));
        if (pair) {
          call.push_back(a);
          call.back().space_before = false;
          call.push_back(pu(","));
          call.push_back(b);
          call.back().space_before = true;
        } else {
          call.push_back(sa ? a : b);
          call.back().space_before = false;
        }
        call.push_back(pu(")"));
        call.front().space_before = a.space_before;
        append(out, call);
        i += 3;
        continue;
      }
    }
    out.push_back(t[i]);
    ++i;
  }
  return out;
}

struct ArgType {
  std::string type; // free-form spelling
  bool array = false;
};

std::optional<ArgType> actual_type(const ExprTokenStream &arg, const UnitContext &ctx) {
  ExprTokenStream a = arg;
  if (a.size() == 2 && (a[0].is_op("-") || a[0].is_op("+")))
    a.erase(a.begin());
  if (a.empty())
    return std::nullopt;
  if (a.size() == 1) {
    const ExprToken &t = a[0];
    switch (t.kind) {
    case TokenKind::integer: return ArgType{"integer", false};
    case TokenKind::real:
      return ArgType{t.text.find('d') != std::string::npos ? "double precision" : "real", false};
    case TokenKind::string: return ArgType{"character(len=*)", false};
    case TokenKind::logical: return ArgType{"logical", false};
    default: break;
    }
  }
  if (!a[0].is_ident())
    return std::nullopt;
  auto it = ctx.types.find(a[0].text);
  if (it == ctx.types.end() || it->second.type.empty() ||
      it->second.origin == TypeOrigin::function_return)
    return std::nullopt;
  const DeclInfo *d = ctx.syms.decl(a[0].text);
  bool array = d && d->is_array();
  TypeSpec ts = it->second.type;
  std::string spelling = ts.base == "character" ? "character(len=*)" : type_spelling(ts);
  if (a.size() == 1)
    return ArgType{spelling, array};
  if (array && a[1].is_punct("(") && matching_paren(a, 1) == a.size() - 1)
    return ArgType{spelling, false};
  return std::nullopt;
}

// Actual argument lists of the first reference to `name`.
std::optional<std::vector<ExprTokenStream>> first_call(const ProgramUnitAst &unit,
                                                       const std::string &name) {
  std::optional<std::vector<ExprTokenStream>> found;
  unit.for_each_stmt([&](const Stmt &s) {
    if (found)
      return;
    for (const auto &p : s.parts) {
      if (p.role == PartRole::args && p.callee == name) {
        if (p.tokens.size() >= 2)
          found = split_top_level(ExprTokenStream(p.tokens.begin() + 1, p.tokens.end() - 1));
        else
          found = std::vector<ExprTokenStream>{};
        return;
      }
      if (p.role == PartRole::keyword || p.role == PartRole::names || p.role == PartRole::label)
        continue;
      const auto &t = p.tokens;
      for (std::size_t i = 0; i + 1 < t.size(); ++i)
        if (t[i].is_ident() && t[i].text == name && t[i + 1].is_punct("(")) {
          std::size_t close = matching_paren(t, i + 1);
          if (close == std::string::npos)
            continue;
          found = split_top_level(
              ExprTokenStream(t.begin() + static_cast<long>(i) + 2, t.begin() + static_cast<long>(close)));
          return;
        }
    }
    if (s.kind == StmtKind::call && s.parts.size() == 2 && s.parts[1].tokens.size() == 1 &&
        s.parts[1].tokens[0].text == name)
      found = std::vector<ExprTokenStream>{};
  });
  return found;
}

std::optional<std::string> build_interface(const UnitContext &ctx, const std::string &name) {
  const auto &catalog = ctx.model->intent_catalog;
  auto entry = catalog.find(name);
  if (entry == catalog.end())
    return std::nullopt;
  auto args = first_call(*ctx.unit, name);
  if (!args || args->size() != entry->second.size())
    return std::nullopt;
  std::vector<std::string> dummies, decls;
  for (std::size_t i = 0; i < args->size(); ++i) {
    auto t = actual_type((*args)[i], ctx);
    if (!t)
      return std::nullopt;
    std::string d = "a" + std::to_string(i + 1);
    dummies.push_back(d);
    std::string intent(intent_name(entry->second[i]));
    decls.push_back(t->type + ", intent(" + intent + ") :: " + d + (t->array ? "(*)" : ""));
  }
  auto ty = ctx.types.find(name);
  bool function = ty != ctx.types.end() && ty->second.origin == TypeOrigin::function_return;
  std::string list;
  for (std::size_t i = 0; i < dummies.size(); ++i)
    list += (i ? ", " : "") + dummies[i];
  std::string kind = function ? "function" : "subroutine";
  std::string text = "interface\n  " + kind + " " + name + "(" + list + ")\n";
  if (function) {
    if (ty->second.type.empty())
      return std::nullopt;
    text += "    " + type_spelling(ty->second.type) + " :: " + name + "\n";
  }
  for (const auto &d : decls)
    text += "    " + d + "\n";
  text += "  end " + kind + " " + name + "\nend interface\n";
  return text;
}

std::string esope_trace_text(const EsopeStatement &e) {
  std::string out = upper_code(std::string(esope_keyword(e.kind))) + " ";
  out += upper_code(canonical_text(e.operands[0]));
  if (e.operands.size() == 2)
    out += "=" + upper_code(canonical_text(e.operands[1]));
  return out;
}

} // namespace

std::string render_free(const ExprTokenStream &tokens) {
  ExprTokenStream flat = flatten(tokens);
  std::string out;
  const ExprToken *prev = nullptr;
  for (const auto &t : flat) {
    if (!out.empty() && (t.space_before || (prev && word_like(*prev) && word_like(t))))
      out += ' ';
    out += t.text;
    prev = &t;
  }
  return out;
}

std::string render_import(const Import &imp) {
  std::string out = "use " + imp.module;
  for (std::size_t i = 0; i < imp.renames.size(); ++i)
    out += ", " + imp.renames[i].first + " => " + imp.renames[i].second;
  return out;
}

// ---------------------------------------------------------------------------
// Context

UnitContext UnitContext::build(const ProjectModel &model, const ProgramUnitAst &unit,
                               const IntentTable &intents) {
  UnitContext ctx;
  ctx.model = &model;
  ctx.unit = &unit;
  ctx.syms = unit_symbols(model, unit);
  for (auto &t : infer_implicit_types(unit, ctx.syms, model))
    ctx.types[t.name] = t;
  if (const UnitSummary *s = model.unit(unit.name)) {
    ctx.required = required_symbols(*s, model);
    ctx.uses = compute_uses(ctx.required, model);
  }
  ctx.intents.assign(unit.params.size(), Intent::in);
  if (auto it = intents.find(unit.name); it != intents.end())
    for (std::size_t i = 0; i < it->second.size() && i < ctx.intents.size(); ++i)
      ctx.intents[i] = it->second[i] == Intent::unknown ? Intent::in : it->second[i];
  for (const auto &s : unit.body)
    if (s.kind == StmtKind::external)
      for (const auto &n : s.names)
        if (!ctx.is_project_routine(n) && !ctx.syms.is_param(n))
          if (auto text = build_interface(ctx, n))
            ctx.interfaces[n] = *text;
  return ctx;
}

std::string UnitContext::type_name(const std::string &segment) const {
  return required.renamed_types.count(segment) ? "seg_" + segment : segment;
}

bool UnitContext::is_project_routine(const std::string &name) const {
  const UnitSummary *u = model->unit(name);
  return u && (u->kind == UnitKind::subroutine || u->kind == UnitKind::function);
}

const SegmentDefinition *UnitContext::pointer_segment(const ExprToken &t) const {
  if (t.is_ident()) {
    if (auto it = types.find(t.text);
        it != types.end() && it->second.origin == TypeOrigin::pointeur_decl)
      return syms.segment(it->second.segment);
    if (const SegmentDefinition *owner = syms.field_owner(t.text)) {
      const FieldDef *f = owner->field(t.text);
      if (f && f->type.base == FieldBase::segment_pointer && f->dims.empty())
        return syms.segment(f->type.segment);
    }
    return nullptr;
  }
  if (t.kind == TokenKind::dotted_access) {
    const SegmentDefinition *owner = nullptr;
    if (t.base.empty())
      owner = syms.field_owner(t.field);
    else if (t.base.size() == 1)
      owner = pointer_segment(t.base[0]);
    if (owner && !t.has_args)
      if (const FieldDef *f = owner->field(t.field);
          f && f->type.base == FieldBase::segment_pointer)
        return syms.segment(f->type.segment);
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Expressions

ExprTokenStream rewrite_expression(const ExprTokenStream &tokens, const UnitContext &ctx) {
  ExprTokenStream out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const ExprToken &t = tokens[i];
    switch (t.kind) {
    case TokenKind::dotted_access: {
      ExprTokenStream acc;
      if (t.base.empty()) {
        const SegmentDefinition *owner = ctx.syms.field_owner(t.field);
        if (!owner)
          throw MigrationError(ctx.unit->span, "field " + t.field +
                                                   " belongs to no segment visible in " +
                                                   ctx.unit->name);
        acc.push_back(id(owner->name));
      } else {
        acc = rewrite_expression(t.base, ctx);
      }
      acc.push_back(op("%"));
      acc.push_back(id(t.field));
      if (t.has_args) {
        acc.push_back(pu("("));
        append(acc, rewrite_expression(t.args, ctx));
        acc.push_back(pu(")"));
      }
      acc.front().space_before = t.space_before;
      append(out, acc);
      break;
    }
    case TokenKind::slash_dim: {
      out.push_back(id("size", t.space_before));
      out.push_back(pu("("));
      ExprTokenStream base = rewrite_expression(t.base, ctx);
      if (!base.empty())
        base.front().space_before = false;
      append(out, base);
      out.push_back(pu(","));
      out.push_back(id("dim", true));
      out.push_back(op("="));
      out.push_back(ExprToken::integer(t.dim));
      out.push_back(pu(")"));
      break;
    }
    case TokenKind::identifier: {
      // keyword specifiers such as `fmt=` are not symbols
      bool keyword_arg = i + 1 < tokens.size() && tokens[i + 1].is_op("=");
      const SegmentDefinition *owner = keyword_arg ? nullptr : ctx.syms.field_owner(t.text);
      if (owner) {
        out.push_back(id(owner->name, t.space_before));
        out.push_back(op("%"));
        out.push_back(id(t.text));
      } else {
        out.push_back(t);
      }
      break;
    }
    default:
      out.push_back(t);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Statements

namespace {

ExprTokenStream rewrite_part(const StmtPart &p, StmtKind kind, const UnitContext &ctx) {
  switch (p.role) {
  case PartRole::read:
    return rewrite_expression(pointer_tests(p.tokens, ctx), ctx);
  case PartRole::write:
  case PartRole::args:
  case PartRole::io_control:
  case PartRole::io_input:
  case PartRole::io_output:
  case PartRole::do_var:
    return rewrite_expression(p.tokens, ctx);
  case PartRole::raw:
    return kind == StmtKind::opaque ? rewrite_expression(p.tokens, ctx) : p.tokens;
  default:
    return p.tokens;
  }
}

std::string operand_text(const ExprTokenStream &op, const UnitContext &ctx) {
  ExprTokenStream t = rewrite_expression(op, ctx);
  if (!t.empty())
    t.front().space_before = false;
  return render_free(t);
}

RewriteOutcome rewrite_esope(const Stmt &s, const UnitContext &ctx) {
  const EsopeStatement &e = *s.esope;
  RewriteOutcome r;
  r.changed = true;
  auto node = [&](std::string text) {
    TargetNode n = TargetNode::stmt(std::move(text), s.span);
    n.label = s.label;
    r.nodes.push_back(std::move(n));
  };
  auto segment_of = [&](const ExprTokenStream &op) {
    const SegmentDefinition *seg = op.size() == 1 ? ctx.pointer_segment(op[0]) : nullptr;
    if (!seg)
      throw MigrationError(s.span, upper_code(std::string(esope_keyword(e.kind))) +
                                       " on pointer " + canonical_text(op) +
                                       " whose segment is unknown");
    return seg;
  };
  switch (e.kind) {
  case EsopeKind::pointer_decl: {
    std::vector<std::pair<std::string, std::vector<std::string>>> groups;
    for (const auto &b : e.pointers) {
      if (!ctx.syms.segment(b.segment))
        throw MigrationError(s.span, "pointer " + b.pointer + " refers to unknown segment " +
                                         b.segment);
      auto g = std::find_if(groups.begin(), groups.end(),
                            [&](const auto &x) { return x.first == b.segment; });
      if (g == groups.end())
        groups.push_back({b.segment, {b.pointer}});
      else
        g->second.push_back(b.pointer);
    }
    for (const auto &[seg, names] : groups) {
      std::string list;
      for (std::size_t i = 0; i < names.size(); ++i)
        list += (i ? ", " : "") + names[i];
      TargetNode n = TargetNode::decl("type(" + ctx.type_name(seg) + "), pointer :: " + list,
                                      s.span);
      n.label = s.label;
      r.nodes.push_back(std::move(n));
    }
    break;
  }
  case EsopeKind::segini:
  case EsopeKind::segadj: {
    const SegmentDefinition *seg = segment_of(e.operands[0]);
    std::string text = e.kind == EsopeKind::segini ? "call segini(" : "call segadj(";
    text += operand_text(e.operands[0], ctx);
    for (const auto &v : seg->dimensioning_vars)
      text += ", " + v;
    node(text + ")");
    break;
  }
  case EsopeKind::segsup:
  case EsopeKind::segprt:
    segment_of(e.operands[0]);
    node(std::string(e.kind == EsopeKind::segsup ? "call segsup(" : "call segprt(") +
         operand_text(e.operands[0], ctx) + ")");
    break;
  case EsopeKind::segini_copy:
  case EsopeKind::segact_move: {
    const SegmentDefinition *a = segment_of(e.operands[0]);
    const SegmentDefinition *b = segment_of(e.operands[1]);
    const char *cmd = e.kind == EsopeKind::segini_copy ? "segcop" : "segmov";
    if (a->name != b->name)
      throw MigrationError(s.span, std::string(cmd) + " across different segment types: " +
                                       canonical_text(e.operands[0]) + " is a " + a->name +
                                       ", " + canonical_text(e.operands[1]) + " is a " +
                                       b->name);
    node(std::string("call ") + cmd + "(" + operand_text(e.operands[0], ctx) + ", " +
         operand_text(e.operands[1], ctx) + ")");
    break;
  }
  case EsopeKind::segact:
  case EsopeKind::segdes:
    r.nodes.push_back(
        trace("removed: " + esope_trace_text(e) + " \xe2\x80\x94 swapping is automatic", s.span));
    r.removed = true;
    if (s.label) {
      // keep the label alive for branches to it
      TargetNode n = TargetNode::stmt("continue", s.span);
      n.label = s.label;
      r.nodes.push_back(std::move(n));
      r.removed = false;
    }
    break;
  case EsopeKind::segment_def:
    break;
  }
  return r;
}

RewriteOutcome rewrite_type_decl(const Stmt &s, const UnitContext &ctx) {
  RewriteOutcome r;
  std::vector<std::string> kept, dropped, reasons;
  for (const auto &e : s.decl->entities) {
    std::string why;
    if (ctx.syms.pointers.count(e.name))
      why = e.name + " is declared by POINTEUR";
    else if (ctx.interfaces.count(e.name))
      why = e.name + " is declared by the generated interface block";
    else if (e.name != ctx.unit->name && ctx.is_project_routine(e.name))
      why = e.name + " comes from module " + e.name + "_mod";
    if (why.empty()) {
      kept.push_back(render_free(e.tokens));
    } else {
      dropped.push_back(e.name);
      reasons.push_back(why);
    }
  }
  if (dropped.empty()) {
    TargetNode n = TargetNode::decl(render_free(all_tokens(s)), s.span);
    n.label = s.label;
    r.nodes.push_back(std::move(n));
    return r;
  }
  std::string why;
  for (std::size_t i = 0; i < reasons.size(); ++i)
    why += (i ? "; " : "") + reasons[i];
  r.nodes.push_back(trace("removed: " + original_text(s) + " \xe2\x80\x94 " + why, s.span));
  r.changed = true;
  if (kept.empty()) {
    r.removed = true;
    return r;
  }
  std::string text = render_free(s.decl->head);
  for (std::size_t i = 0; i < kept.size(); ++i)
    text += (i ? ", " : " ") + kept[i];
  TargetNode n = TargetNode::decl(text, s.span);
  n.label = s.label;
  r.nodes.push_back(std::move(n));
  return r;
}

RewriteOutcome rewrite_external(const Stmt &s, const UnitContext &ctx) {
  RewriteOutcome r;
  std::vector<std::string> keep, internal;
  for (const auto &n : s.names) {
    if (ctx.is_project_routine(n) && !ctx.syms.is_param(n))
      internal.push_back(n);
    else if (!ctx.interfaces.count(n))
      keep.push_back(n);
  }
  bool any_iface = false;
  for (const auto &n : s.names)
    if (ctx.interfaces.count(n))
      any_iface = true;
  if (internal.empty() && !any_iface) {
    TargetNode n = TargetNode::decl(render_free(all_tokens(s)), s.span);
    n.label = s.label;
    r.nodes.push_back(std::move(n));
    return r;
  }
  r.changed = true;
  for (const auto &n : internal)
    r.nodes.push_back(trace("removed: EXTERNAL " + upper_code(n) + " \xe2\x80\x94 provided by use " +
                                n + "_mod",
                            s.span));
  for (const auto &n : s.names)
    if (auto it = ctx.interfaces.find(n); it != ctx.interfaces.end()) {
      r.nodes.push_back(trace("EXTERNAL " + upper_code(n) +
                                  " \xe2\x80\x94 interface from the intent catalog",
                              s.span));
      TargetNode t = TargetNode::templ(TemplateRole::declaration, "interface " + n, it->second);
      t.origin = s.span;
      r.nodes.push_back(std::move(t));
    }
  if (!keep.empty()) {
    std::string list;
    for (std::size_t i = 0; i < keep.size(); ++i)
      list += (i ? ", " : "") + keep[i];
    r.nodes.push_back(TargetNode::decl("external :: " + list, s.span));
  } else if (!any_iface) {
    r.removed = true;
  }
  return r;
}

bool is_zero(const ExprTokenStream &t) {
  return t.size() == 1 && t[0].kind == TokenKind::integer && t[0].text == "0";
}

RewriteOutcome rewrite_assignment(const Stmt &s, const UnitContext &ctx) {
  const ExprTokenStream &lhs = s.parts[0].tokens;
  const ExprTokenStream &rhs = s.parts[2].tokens;
  const SegmentDefinition *target = lhs.size() == 1 ? ctx.pointer_segment(lhs[0]) : nullptr;
  if (target) {
    const SegmentDefinition *source = rhs.size() == 1 ? ctx.pointer_segment(rhs[0]) : nullptr;
    std::string text;
    if (source)
      text = operand_text(lhs, ctx) + " => " + operand_text(rhs, ctx);
    else if (is_zero(rhs))
      text = "nullify(" + operand_text(lhs, ctx) + ")";
    if (!text.empty()) {
      RewriteOutcome r;
      r.changed = true;
      TargetNode n = TargetNode::stmt(text, s.span);
      n.label = s.label;
      r.nodes.push_back(std::move(n));
      return r;
    }
  }
  RewriteOutcome r;
  ExprTokenStream out;
  for (const auto &p : s.parts)
    append(out, rewrite_part(p, s.kind, ctx));
  r.changed = !same_tokens(out, all_tokens(s));
  TargetNode n = TargetNode::stmt(render_free(out), s.span);
  n.label = s.label;
  r.nodes.push_back(std::move(n));
  return r;
}

} // namespace

RewriteOutcome rewrite_statement(const Stmt &s, const UnitContext &ctx) {
  RewriteOutcome r;
  auto single = [&](NodeKind k, std::string text) {
    TargetNode n = TargetNode::line(k, std::move(text), s.span);
    n.label = s.label;
    r.nodes.push_back(std::move(n));
  };
  switch (s.kind) {
  case StmtKind::comment:
    single(NodeKind::comment, "!" + s.text);
    return r;
  case StmtKind::blank:
    r.nodes.push_back(TargetNode::blank_line());
    r.nodes.back().origin = s.span;
    return r;
  case StmtKind::directive:
    single(NodeKind::statement, s.text);
    return r;
  case StmtKind::include_begin:
    r.nodes.push_back(trace("begin include \"" + s.text + "\"", s.span));
    if (s.label) {
      single(NodeKind::statement, "continue");
      r.changed = true;
    }
    return r;
  case StmtKind::include_end:
    r.nodes.push_back(trace("end include \"" + s.text + "\"", s.span));
    return r;
  case StmtKind::include:
    throw MigrationError(s.span, "include of \"" + s.include->path + "\" was not resolved");
  case StmtKind::segment_def:
    r.nodes.push_back(trace("moved: SEGMENT " + upper_code(s.segment->name) +
                                " \xe2\x80\x94 migrated to module " + s.segment->name + "_mod",
                            s.span));
    r.removed = r.changed = true;
    return r;
  case StmtKind::esope:
    return rewrite_esope(s, ctx);
  case StmtKind::implicit:
    r.nodes.push_back(trace("removed: " + original_text(s) +
                                " \xe2\x80\x94 implicit none is inserted and every name declared",
                            s.span));
    r.removed = r.changed = true;
    return r;
  case StmtKind::type_decl:
    return rewrite_type_decl(s, ctx);
  case StmtKind::external:
    return rewrite_external(s, ctx);
  case StmtKind::dimension:
  case StmtKind::parameter:
  case StmtKind::common:
  case StmtKind::data:
  case StmtKind::save:
  case StmtKind::intrinsic:
  case StmtKind::equivalence:
    single(NodeKind::declaration, render_free(all_tokens(s)));
    return r;
  case StmtKind::format:
    single(NodeKind::statement, render_free(all_tokens(s)));
    return r;
  case StmtKind::assignment:
    return rewrite_assignment(s, ctx);
  case StmtKind::logical_if: {
    ExprTokenStream cond = rewrite_part(s.parts[1], s.kind, ctx);
    if (!cond.empty())
      cond.front().space_before = true;
    RewriteOutcome inner = rewrite_statement(s.nested.at(0), ctx);
    std::string head = "if" + render_free(cond);
    if (head.rfind("if(", 0) == 0)
      head = "if (" + head.substr(3);
    r.changed = inner.changed || !same_tokens(cond, s.parts[1].tokens);
    std::string body;
    for (auto &n : inner.nodes) {
      if (n.kind == NodeKind::comment)
        r.nodes.push_back(std::move(n));
      else
        body = n.text;
    }
    if (body.empty()) {
      body = "continue";
      r.changed = true;
    }
    single(NodeKind::statement, head + " " + body);
    return r;
  }
  case StmtKind::end:
    single(NodeKind::statement, render_free(all_tokens(s)));
    return r;
  default:
    break;
  }
  ExprTokenStream out;
  for (const auto &p : s.parts)
    append(out, rewrite_part(p, s.kind, ctx));
  r.changed = !same_tokens(out, all_tokens(s));
  single(NodeKind::statement, render_free(out));
  return r;
}

} // namespace segmig
