#include "segmig/parser.hpp"

#include <algorithm>
#include <set>

namespace segmig {

std::string type_spelling(const TypeSpec &t) {
  std::string out = t.base;
  if (t.base == "character") {
    std::string len = t.char_len.value_or("1");
    return "character(len=" + len + ")";
  }
  if (!t.kind.empty())
    out += "(" + t.kind + ")";
  return out;
}

const FieldDef *SegmentDefinition::field(std::string_view n) const {
  for (const auto &f : fields)
    if (f.name == n)
      return &f;
  return nullptr;
}

std::string_view esope_keyword(EsopeKind k) {
  switch (k) {
  case EsopeKind::segment_def: return "segment";
  case EsopeKind::pointer_decl: return "pointeur";
  case EsopeKind::segini:
  case EsopeKind::segini_copy: return "segini";
  case EsopeKind::segact:
  case EsopeKind::segact_move: return "segact";
  case EsopeKind::segadj: return "segadj";
  case EsopeKind::segsup: return "segsup";
  case EsopeKind::segprt: return "segprt";
  case EsopeKind::segdes: return "segdes";
  }
  return "";
}

std::string_view include_flavor_name(IncludeFlavor f) {
  switch (f) {
  case IncludeFlavor::preprocessor_hash: return "#include";
  case IncludeFlavor::fortran_include: return "include";
  case IncludeFlavor::esope_percent_inc: return "%inc";
  case IncludeFlavor::esope_dash_inc: return "-inc";
  }
  return "";
}

std::string_view unit_kind_name(UnitKind k) {
  switch (k) {
  case UnitKind::program: return "program";
  case UnitKind::subroutine: return "subroutine";
  case UnitKind::function: return "function";
  case UnitKind::block_data: return "block data";
  case UnitKind::fragment: return "fragment";
  }
  return "";
}

bool is_specification(StmtKind k) {
  switch (k) {
  case StmtKind::segment_def:
  case StmtKind::type_decl:
  case StmtKind::dimension:
  case StmtKind::parameter:
  case StmtKind::common:
  case StmtKind::data:
  case StmtKind::save:
  case StmtKind::external:
  case StmtKind::intrinsic:
  case StmtKind::implicit:
  case StmtKind::equivalence:
    return true;
  default:
    return false;
  }
}

bool is_executable(StmtKind k) {
  switch (k) {
  case StmtKind::comment:
  case StmtKind::blank:
  case StmtKind::directive:
  case StmtKind::include:
  case StmtKind::include_begin:
  case StmtKind::include_end:
  case StmtKind::format:
  case StmtKind::end:
    return false;
  default:
    return !is_specification(k);
  }
}

namespace {

const std::set<std::string, std::less<>> kEsopeCommands = {
    "segini", "segact", "segadj", "segsup", "segprt", "segdes"};

bool word_at(const ExprTokenStream &t, std::size_t i, std::string_view w) {
  return i < t.size() && t[i].is_ident() && t[i].text == w;
}

ExprTokenStream slice(const ExprTokenStream &t, std::size_t b,
                      std::size_t e = std::string::npos) {
  e = std::min(e, t.size());
  if (b >= e)
    return {};
  return ExprTokenStream(t.begin() + static_cast<long>(b),
                         t.begin() + static_cast<long>(e));
}

StmtPart part(PartRole role, ExprTokenStream tokens) {
  return StmtPart{role, std::move(tokens), {}};
}

// Index of the first top-level `=` operator, or npos.
std::size_t top_level_assign(const ExprTokenStream &t) {
  int depth = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].is_punct("("))
      ++depth;
    else if (t[i].is_punct(")"))
      --depth;
    else if (depth == 0 && t[i].is_op("="))
      return i;
  }
  return std::string::npos;
}

// Parses a type keyword and optional length selector at t[i].
std::optional<std::pair<TypeSpec, std::size_t>>
parse_type_spec(const ExprTokenStream &t, std::size_t i) {
  if (i >= t.size() || !t[i].is_ident())
    return std::nullopt;
  TypeSpec spec;
  const std::string &w = t[i].text;
  std::size_t j = i + 1;
  if (w == "integer" || w == "real" || w == "complex" || w == "logical" ||
      w == "character") {
    spec.base = w;
  } else if (w == "doubleprecision") {
    spec.base = "double precision";
  } else if (w == "doublecomplex") {
    spec.base = "double complex";
  } else if (w == "double" && word_at(t, j, "precision")) {
    spec.base = "double precision";
    ++j;
  } else if (w == "double" && word_at(t, j, "complex")) {
    spec.base = "double complex";
    ++j;
  } else {
    return std::nullopt;
  }
  if (j < t.size() && t[j].is_op("*")) {
    if (j + 1 < t.size() && t[j + 1].is_punct("(")) {
      std::size_t close = matching_paren(t, j + 1);
      if (close == std::string::npos)
        return std::nullopt;
      auto inner = slice(t, j + 2, close);
      std::string len = (inner.size() == 1 && inner[0].is_op("*"))
                            ? "*"
                            : canonical_text(inner);
      if (spec.base == "character")
        spec.char_len = len;
      else
        spec.kind = len;
      j = close + 1;
    } else if (j + 1 < t.size() && t[j + 1].kind == TokenKind::integer) {
      if (spec.base == "character")
        spec.char_len = t[j + 1].text;
      else
        spec.kind = t[j + 1].text;
      j += 2;
    } else {
      return std::nullopt;
    }
  }
  return std::pair{spec, j};
}

Entity parse_entity(const ExprTokenStream &toks, const SourceSpan &span) {
  Entity e;
  e.tokens = toks;
  if (toks.empty() || !toks[0].is_ident())
    throw MigrationError(span, "expected a name in declaration");
  e.name = toks[0].text;
  std::size_t i = 1;
  auto parse_len = [&] {
    if (i < toks.size() && toks[i].is_op("*")) {
      if (i + 1 < toks.size() && toks[i + 1].kind == TokenKind::integer) {
        e.char_len = toks[i + 1].text;
        i += 2;
      } else if (i + 1 < toks.size() && toks[i + 1].is_punct("(")) {
        std::size_t close = matching_paren(toks, i + 1);
        if (close == std::string::npos)
          throw MigrationError(span, "unbalanced length selector");
        auto inner = slice(toks, i + 2, close);
        e.char_len = (inner.size() == 1 && inner[0].is_op("*"))
                         ? std::string("*")
                         : canonical_text(inner);
        i = close + 1;
      }
    }
  };
  parse_len();
  if (i < toks.size() && toks[i].is_punct("(")) {
    std::size_t close = matching_paren(toks, i);
    if (close == std::string::npos)
      throw MigrationError(span, "unbalanced dimension list for " + e.name);
    e.dims = split_top_level(slice(toks, i + 1, close));
    i = close + 1;
  }
  parse_len();
  if (i != toks.size())
    throw MigrationError(span, "unexpected tokens after declaration of " + e.name);
  return e;
}

std::vector<Entity> parse_entities(const ExprTokenStream &toks,
                                   const SourceSpan &span) {
  std::vector<Entity> out;
  for (auto &piece : split_top_level(toks))
    out.push_back(parse_entity(piece, span));
  return out;
}

std::size_t skip_double_colon(const ExprTokenStream &t, std::size_t i) {
  if (i < t.size() && t[i].is_punct(","))
    ++i;
  if (i + 1 < t.size() && t[i].is_punct(":") && t[i + 1].is_punct(":"))
    i += 2;
  return i;
}

ImplicitSpec parse_implicit(const ExprTokenStream &t, const SourceSpan &span) {
  ImplicitSpec spec;
  if (word_at(t, 1, "none") && t.size() == 2) {
    spec.none = true;
    return spec;
  }
  auto items = split_top_level(slice(t, 1));
  for (auto &item : items) {
    auto ts = parse_type_spec(item, 0);
    if (!ts)
      throw MigrationError(span, "malformed IMPLICIT statement");
    auto [type, j] = *ts;
    if (j >= item.size() || !item[j].is_punct("("))
      throw MigrationError(span, "IMPLICIT rule needs a letter list");
    std::size_t close = matching_paren(item, j);
    if (close == std::string::npos)
      throw MigrationError(span, "unbalanced IMPLICIT letter list");
    ImplicitRule rule{type, {}};
    for (auto &range : split_top_level(slice(item, j + 1, close))) {
      auto letter = [&](const ExprToken &tok) {
        if (!tok.is_ident() || tok.text.size() != 1)
          throw MigrationError(span, "IMPLICIT ranges must be single letters");
        return tok.text[0];
      };
      if (range.size() == 1) {
        char c = letter(range[0]);
        rule.ranges.emplace_back(c, c);
      } else if (range.size() == 3 && range[1].is_op("-")) {
        rule.ranges.emplace_back(letter(range[0]), letter(range[2]));
      } else {
        throw MigrationError(span, "malformed IMPLICIT letter range");
      }
    }
    spec.rules.push_back(std::move(rule));
  }
  return spec;
}

// Identifiers outside /value/ lists and outside parentheses.
std::vector<std::string> names_outside_slashes(const ExprTokenStream &t,
                                               std::size_t from) {
  std::vector<std::string> out;
  bool in_values = false;
  int depth = 0;
  for (std::size_t i = from; i < t.size(); ++i) {
    if (t[i].is_punct("("))
      ++depth;
    else if (t[i].is_punct(")"))
      --depth;
    else if (t[i].is_op("/") && depth == 0)
      in_values = !in_values;
    else if (!in_values && depth == 0 && t[i].is_ident())
      out.push_back(t[i].text);
  }
  return out;
}

Stmt make(StmtKind kind, const LogicalLine &line) {
  Stmt s;
  s.kind = kind;
  s.label = line.label;
  s.span = line.span;
  s.text = line.text;
  return s;
}

std::vector<Stmt> parse_esope(const ExprTokenStream &t, const LogicalLine &line) {
  const std::string &w = t[0].text;
  const SourceSpan &span = line.span;
  std::size_t i = 1;
  if (i < t.size() && t[i].is_punct(","))
    ++i;
  auto rest = slice(t, i);
  if (rest.empty())
    throw MigrationError(span, "malformed " + w + ": missing pointer operand");

  if (w == "pointeur") {
    Stmt s = make(StmtKind::esope, line);
    EsopeStatement e;
    e.kind = EsopeKind::pointer_decl;
    e.span = span;
    for (auto &piece : split_top_level(rest)) {
      if (piece.size() != 1 || piece[0].kind != TokenKind::dotted_access ||
          piece[0].has_args || piece[0].base.size() != 1 ||
          !piece[0].base[0].is_ident())
        throw MigrationError(span,
                             "malformed pointeur: expected <pointer>.<segment>");
      e.pointers.push_back({piece[0].base[0].text, piece[0].field});
      e.operands.push_back({ExprToken::ident(piece[0].base[0].text)});
    }
    s.esope = std::move(e);
    s.parts.push_back(part(PartRole::raw, t));
    return {std::move(s)};
  }

  std::vector<Stmt> out;
  for (auto &piece : split_top_level(rest)) {
    // Access modes such as `p*mod` are irrelevant after migration.
    if (piece.size() >= 3 && piece[piece.size() - 2].is_op("*") &&
        piece.back().is_ident())
      piece.resize(piece.size() - 2);
    if (piece.empty())
      throw MigrationError(span, "malformed " + w + ": empty operand");
    EsopeStatement e;
    e.span = span;
    std::size_t eq = top_level_assign(piece);
    if (eq != std::string::npos) {
      auto target = slice(piece, 0, eq);
      auto source = slice(piece, eq + 1);
      if (target.empty() || source.empty())
        throw MigrationError(span, "malformed " + w + ": incomplete p=q form");
      if (w == "segini")
        e.kind = EsopeKind::segini_copy;
      else if (w == "segact")
        e.kind = EsopeKind::segact_move;
      else
        throw MigrationError(span, w + " does not accept the p=q form");
      e.operands = {without_spacing(target), without_spacing(source)};
    } else {
      if (w == "segini") e.kind = EsopeKind::segini;
      else if (w == "segact") e.kind = EsopeKind::segact;
      else if (w == "segadj") e.kind = EsopeKind::segadj;
      else if (w == "segsup") e.kind = EsopeKind::segsup;
      else if (w == "segprt") e.kind = EsopeKind::segprt;
      else e.kind = EsopeKind::segdes;
      e.operands = {without_spacing(piece)};
    }
    for (const auto &op : e.operands) {
      bool ok = op.size() == 1 && (op[0].is_ident() ||
                                   op[0].kind == TokenKind::dotted_access);
      if (!ok)
        throw MigrationError(span, "malformed " + w + ": operand '" +
                                       render_tokens(op) +
                                       "' is not a pointer");
    }
    Stmt s = make(StmtKind::esope, line);
    s.esope = std::move(e);
    s.parts.push_back(part(PartRole::raw, t));
    out.push_back(std::move(s));
  }
  // Only the first expanded statement keeps the label.
  for (std::size_t k = 1; k < out.size(); ++k)
    out[k].label.reset();
  return out;
}

Stmt parse_io(const ExprTokenStream &t, const LogicalLine &line) {
  Stmt s = make(StmtKind::io, line);
  const std::string &w = t[0].text;
  s.parts.push_back(part(PartRole::keyword, slice(t, 0, 1)));
  bool input = w == "read";
  PartRole list_role = input ? PartRole::io_input : PartRole::io_output;
  if (t.size() > 1 && t[1].is_punct("(")) {
    std::size_t close = matching_paren(t, 1);
    if (close == std::string::npos)
      throw MigrationError(line.span, "unbalanced I/O control list");
    s.parts.push_back(part(PartRole::io_control, slice(t, 1, close + 1)));
    if (close + 1 < t.size())
      s.parts.push_back(part(list_role, slice(t, close + 1)));
    return s;
  }
  // READ fmt, list / PRINT fmt, list / REWIND n
  auto pieces = split_top_level(slice(t, 1));
  if (!pieces.empty()) {
    s.parts.push_back(part(PartRole::read, pieces[0]));
    std::size_t consumed = 1 + pieces[0].size();
    if (consumed < t.size()) {
      s.parts.push_back(part(PartRole::raw, slice(t, consumed, consumed + 1)));
      s.parts.push_back(part(list_role, slice(t, consumed + 1)));
    }
  }
  return s;
}

Stmt parse_do(const ExprTokenStream &t, const LogicalLine &line) {
  std::size_t i = 1;
  Stmt s = make(StmtKind::do_loop, line);
  if (i < t.size() && t[i].kind == TokenKind::integer) {
    s.do_label = std::stoi(t[i].text);
    ++i;
    if (i < t.size() && t[i].is_punct(","))
      ++i;
  }
  if (word_at(t, i, "while")) {
    s.kind = StmtKind::do_while;
    s.parts.push_back(part(PartRole::keyword, slice(t, 0, i + 1)));
    s.parts.push_back(part(PartRole::read, slice(t, i + 1)));
    return s;
  }
  if (i == t.size()) {
    s.parts.push_back(part(PartRole::keyword, t));
    return s;
  }
  if (i + 1 >= t.size() || !t[i].is_ident() || !t[i + 1].is_op("="))
    throw MigrationError(line.span, "malformed DO statement");
  s.parts.push_back(part(PartRole::keyword, slice(t, 0, i)));
  s.parts.push_back(part(PartRole::do_var, slice(t, i, i + 1)));
  s.parts.push_back(part(PartRole::raw, slice(t, i + 1, i + 2)));
  s.parts.push_back(part(PartRole::read, slice(t, i + 2)));
  return s;
}

Stmt classify(const ExprTokenStream &t, const LogicalLine &line);

Stmt parse_if(const ExprTokenStream &t, const LogicalLine &line) {
  std::size_t close = matching_paren(t, 1);
  if (close == std::string::npos || close + 1 >= t.size())
    throw MigrationError(line.span, "malformed IF statement");
  std::size_t after = close + 1;
  if (word_at(t, after, "then") && after + 1 == t.size()) {
    Stmt s = make(StmtKind::if_then, line);
    s.parts.push_back(part(PartRole::keyword, slice(t, 0, 1)));
    s.parts.push_back(part(PartRole::read, slice(t, 1, after)));
    s.parts.push_back(part(PartRole::keyword, slice(t, after)));
    return s;
  }
  if (t[after].kind == TokenKind::integer) {
    Stmt s = make(StmtKind::arithmetic_if, line);
    s.parts.push_back(part(PartRole::keyword, slice(t, 0, 1)));
    s.parts.push_back(part(PartRole::read, slice(t, 1, after)));
    s.parts.push_back(part(PartRole::label, slice(t, after)));
    return s;
  }
  Stmt s = make(StmtKind::logical_if, line);
  s.parts.push_back(part(PartRole::keyword, slice(t, 0, 1)));
  s.parts.push_back(part(PartRole::read, slice(t, 1, after)));
  LogicalLine inner = line;
  inner.label.reset();
  Stmt body = classify(slice(t, after), inner);
  if (body.kind == StmtKind::if_then || body.kind == StmtKind::logical_if ||
      body.kind == StmtKind::do_loop || body.kind == StmtKind::end ||
      is_specification(body.kind))
    throw MigrationError(line.span, "statement not allowed in a logical IF");
  body.text = render_tokens(slice(t, after));
  s.nested.push_back(std::move(body));
  return s;
}

Stmt classify(const ExprTokenStream &t, const LogicalLine &line) {
  const SourceSpan &span = line.span;
  if (t.empty())
    throw MigrationError(span, "empty statement");
  std::string first = t[0].is_ident() ? t[0].text : std::string();

  if (kEsopeCommands.count(first) || first == "pointeur") {
    bool command_shape = t.size() == 1 || t[1].is_punct(",") || t[1].is_ident() ||
                         t[1].kind == TokenKind::dotted_access;
    if (command_shape) {
      auto stmts = parse_esope(t, line);
      if (stmts.size() != 1)
        throw MigrationError(span, "multi-pointer command inside logical IF");
      return std::move(stmts.front());
    }
  }

  if (first == "end" && t.size() >= 2 && t[1].is_ident()) {
    if (t[1].text == "if" && t.size() == 2) {
      Stmt s = make(StmtKind::end_if, line);
      s.parts.push_back(part(PartRole::keyword, t));
      return s;
    }
    if (t[1].text == "do" && t.size() == 2) {
      Stmt s = make(StmtKind::end_do, line);
      s.parts.push_back(part(PartRole::keyword, t));
      return s;
    }
    if (t[1].text == "segment")
      throw MigrationError(span, "END SEGMENT without a matching SEGMENT");
  }
  if ((first == "endif" || first == "enddo") && t.size() == 1) {
    Stmt s = make(first == "endif" ? StmtKind::end_if : StmtKind::end_do, line);
    s.parts.push_back(part(PartRole::keyword, t));
    return s;
  }
  if (first == "endsegment")
    throw MigrationError(span, "END SEGMENT without a matching SEGMENT");
  bool unit_end = (first == "end" &&
                   (t.size() == 1 ||
                    (t[1].is_ident() &&
                     (t[1].text == "subroutine" || t[1].text == "function" ||
                      t[1].text == "program" || t[1].text == "block")))) ||
                  first == "endsubroutine" || first == "endfunction" ||
                  first == "endprogram";
  if (unit_end) {
    Stmt s = make(StmtKind::end, line);
    s.parts.push_back(part(PartRole::keyword, t));
    return s;
  }

  if (first == "if" && t.size() > 1 && t[1].is_punct("("))
    return parse_if(t, line);
  if ((first == "elseif") || (first == "else" && word_at(t, 1, "if"))) {
    std::size_t open = first == "elseif" ? 1 : 2;
    std::size_t close = open < t.size() && t[open].is_punct("(")
                            ? matching_paren(t, open)
                            : std::string::npos;
    if (close == std::string::npos || !word_at(t, close + 1, "then"))
      throw MigrationError(span, "malformed ELSE IF statement");
    Stmt s = make(StmtKind::else_if, line);
    s.parts.push_back(part(PartRole::keyword, slice(t, 0, open)));
    s.parts.push_back(part(PartRole::read, slice(t, open, close + 1)));
    s.parts.push_back(part(PartRole::keyword, slice(t, close + 1)));
    return s;
  }
  if (first == "else" && t.size() == 1) {
    Stmt s = make(StmtKind::else_, line);
    s.parts.push_back(part(PartRole::keyword, t));
    return s;
  }
  if (first == "do" && (t.size() == 1 || !t[1].is_op("=")))
    return parse_do(t, line);

  if (top_level_assign(t) != std::string::npos) {
    std::size_t eq = top_level_assign(t);
    Stmt s = make(StmtKind::assignment, line);
    s.parts.push_back(part(PartRole::write, slice(t, 0, eq)));
    s.parts.push_back(part(PartRole::raw, slice(t, eq, eq + 1)));
    s.parts.push_back(part(PartRole::read, slice(t, eq + 1)));
    return s;
  }

  if (first == "call") {
    if (t.size() < 2 || !t[1].is_ident())
      throw MigrationError(span, "malformed CALL statement");
    Stmt s = make(StmtKind::call, line);
    s.parts.push_back(part(PartRole::keyword, slice(t, 0, 1)));
    s.parts.push_back(part(PartRole::raw, slice(t, 1, 2)));
    if (t.size() > 2) {
      if (!t[2].is_punct("(") || matching_paren(t, 2) != t.size() - 1)
        throw MigrationError(span, "malformed CALL argument list");
      StmtPart args = part(PartRole::args, slice(t, 2));
      args.callee = t[1].text;
      s.parts.push_back(std::move(args));
    }
    return s;
  }

  if (auto ts = parse_type_spec(t, 0); ts && !word_at(t, ts->second, "function")) {
    Stmt s = make(StmtKind::type_decl, line);
    std::size_t j = skip_double_colon(t, ts->second);
    Declaration d;
    d.type = ts->first;
    d.head = slice(t, 0, j);
    d.entities = parse_entities(slice(t, j), span);
    for (const auto &e : d.entities)
      s.names.push_back(e.name);
    s.parts.push_back(part(PartRole::keyword, d.head));
    s.parts.push_back(part(PartRole::names, slice(t, j)));
    s.decl = std::move(d);
    return s;
  }

  if (first == "dimension") {
    Stmt s = make(StmtKind::dimension, line);
    std::size_t j = skip_double_colon(t, 1);
    Declaration d;
    d.head = slice(t, 0, j);
    d.entities = parse_entities(slice(t, j), span);
    for (const auto &e : d.entities)
      s.names.push_back(e.name);
    s.parts.push_back(part(PartRole::keyword, d.head));
    s.parts.push_back(part(PartRole::names, slice(t, j)));
    s.decl = std::move(d);
    return s;
  }
  if (first == "parameter") {
    Stmt s = make(StmtKind::parameter, line);
    if (t.size() < 2 || !t[1].is_punct("(") || matching_paren(t, 1) != t.size() - 1)
      throw MigrationError(span, "malformed PARAMETER statement");
    for (auto &item : split_top_level(slice(t, 2, t.size() - 1))) {
      if (item.size() < 3 || !item[0].is_ident() || !item[1].is_op("="))
        throw MigrationError(span, "malformed PARAMETER item");
      s.names.push_back(item[0].text);
    }
    s.parts.push_back(part(PartRole::keyword, slice(t, 0, 1)));
    s.parts.push_back(part(PartRole::raw, slice(t, 1)));
    return s;
  }
  if (first == "common") {
    Stmt s = make(StmtKind::common, line);
    Declaration d;
    d.head = slice(t, 0, 1);
    ExprTokenStream list;
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (t[i].is_op("/") || t[i].is_op("//")) {
        // skip /block/ names
        if (t[i].is_op("/")) {
          std::size_t j = i + 1;
          while (j < t.size() && !t[j].is_op("/"))
            ++j;
          i = j;
        }
        if (!list.empty() && !list.back().is_punct(","))
          list.push_back(ExprToken::punct(","));
        continue;
      }
      list.push_back(t[i]);
    }
    while (!list.empty() && list.front().is_punct(","))
      list.erase(list.begin());
    d.entities = parse_entities(list, span);
    for (const auto &e : d.entities)
      s.names.push_back(e.name);
    s.parts.push_back(part(PartRole::keyword, slice(t, 0, 1)));
    s.parts.push_back(part(PartRole::raw, slice(t, 1)));
    s.decl = std::move(d);
    return s;
  }
  if (first == "data") {
    Stmt s = make(StmtKind::data, line);
    s.names = names_outside_slashes(t, 1);
    s.parts.push_back(part(PartRole::keyword, slice(t, 0, 1)));
    s.parts.push_back(part(PartRole::raw, slice(t, 1)));
    return s;
  }
  if (first == "save" || first == "external" || first == "intrinsic") {
    Stmt s = make(first == "save"       ? StmtKind::save
                  : first == "external" ? StmtKind::external
                                        : StmtKind::intrinsic,
                  line);
    std::size_t j = skip_double_colon(t, 1);
    s.names = names_outside_slashes(t, j);
    s.parts.push_back(part(PartRole::keyword, slice(t, 0, j)));
    s.parts.push_back(part(PartRole::names, slice(t, j)));
    return s;
  }
  if (first == "implicit") {
    Stmt s = make(StmtKind::implicit, line);
    s.implicit = parse_implicit(t, span);
    s.parts.push_back(part(PartRole::raw, t));
    return s;
  }
  if (first == "equivalence") {
    Stmt s = make(StmtKind::equivalence, line);
    for (const auto &tok : t)
      if (tok.is_ident() && tok.text != "equivalence")
        s.names.push_back(tok.text);
    s.parts.push_back(part(PartRole::keyword, slice(t, 0, 1)));
    s.parts.push_back(part(PartRole::raw, slice(t, 1)));
    return s;
  }
  if (first == "continue" && t.size() == 1) {
    Stmt s = make(StmtKind::continue_, line);
    s.parts.push_back(part(PartRole::keyword, t));
    return s;
  }
  if (first == "return") {
    Stmt s = make(StmtKind::return_, line);
    s.parts.push_back(part(PartRole::keyword, slice(t, 0, 1)));
    if (t.size() > 1)
      s.parts.push_back(part(PartRole::read, slice(t, 1)));
    return s;
  }
  if (first == "stop" || first == "pause") {
    Stmt s = make(StmtKind::stop, line);
    s.parts.push_back(part(PartRole::keyword, slice(t, 0, 1)));
    if (t.size() > 1)
      s.parts.push_back(part(PartRole::raw, slice(t, 1)));
    return s;
  }
  if (first == "goto" || (first == "go" && word_at(t, 1, "to"))) {
    std::size_t j = first == "goto" ? 1 : 2;
    Stmt s = make(StmtKind::opaque, line);
    s.parts.push_back(part(PartRole::keyword, slice(t, 0, j)));
    if (j < t.size() && t[j].is_punct("(")) {
      // computed GO TO (l1, l2, ...) [,] expr
      std::size_t close = matching_paren(t, j);
      if (close == std::string::npos)
        throw MigrationError(span, "malformed computed GO TO");
      std::size_t k = close + 1;
      if (k < t.size() && t[k].is_punct(","))
        ++k;
      s.parts.push_back(part(PartRole::label, slice(t, j, k)));
      s.parts.push_back(part(PartRole::read, slice(t, k)));
    } else {
      s.parts.push_back(part(PartRole::label, slice(t, j)));
    }
    return s;
  }
  if (first == "write" || first == "read" || first == "print" ||
      first == "open" || first == "close" || first == "inquire" ||
      first == "rewind" || first == "backspace" || first == "endfile")
    return parse_io(t, line);
  if (first == "format") {
    Stmt s = make(StmtKind::format, line);
    s.parts.push_back(part(PartRole::raw, t));
    return s;
  }
  if (first == "include" && t.size() == 2 && t[1].kind == TokenKind::string) {
    Stmt s = make(StmtKind::include, line);
    std::string lit = t[1].text;
    s.include = IncludeDirective{IncludeFlavor::fortran_include,
                                 lit.substr(1, lit.size() - 2), span};
    s.parts.push_back(part(PartRole::raw, t));
    return s;
  }

  Stmt s = make(StmtKind::opaque, line);
  s.parts.push_back(part(PartRole::raw, t));
  return s;
}

ExprTokenStream statement_tokens(const LogicalLine &line) {
  return scan_expression(lex(line.text, line.span), line.span);
}

struct Header {
  UnitKind kind;
  std::string name;
  std::vector<std::string> params;
  std::optional<TypeSpec> return_type;
};

std::optional<Header> parse_header(const LogicalLine &line) {
  if (line.kind != LineKind::statement)
    return std::nullopt;
  ExprTokenStream t = lex(line.text, line.span);
  if (t.empty() || !t[0].is_ident())
    return std::nullopt;
  Header h;
  std::size_t i = 0;
  const std::string &w = t[0].text;
  auto read_params = [&](std::size_t at) {
    if (at == t.size())
      return;
    if (!t[at].is_punct("(") || matching_paren(t, at) != t.size() - 1)
      throw MigrationError(line.span, "malformed parameter list");
    for (auto &p : split_top_level(slice(t, at + 1, t.size() - 1))) {
      if (p.size() != 1 || !(p[0].is_ident() || p[0].is_op("*")))
        throw MigrationError(line.span, "malformed dummy argument");
      h.params.push_back(p[0].text);
    }
  };
  if (w == "program" && t.size() == 2 && t[1].is_ident()) {
    h.kind = UnitKind::program;
    h.name = t[1].text;
    return h;
  }
  if (w == "subroutine" && t.size() >= 2 && t[1].is_ident()) {
    h.kind = UnitKind::subroutine;
    h.name = t[1].text;
    read_params(2);
    return h;
  }
  if ((w == "block" && word_at(t, 1, "data")) || w == "blockdata") {
    h.kind = UnitKind::block_data;
    std::size_t j = w == "block" ? 2 : 1;
    h.name = j < t.size() && t[j].is_ident() ? t[j].text : "block_data";
    return h;
  }
  if (auto ts = parse_type_spec(t, 0)) {
    h.return_type = ts->first;
    i = ts->second;
  }
  if (word_at(t, i, "function") && i + 1 < t.size() && t[i + 1].is_ident()) {
    h.kind = UnitKind::function;
    h.name = t[i + 1].text;
    read_params(i + 2);
    if (h.params.empty() && i + 2 == t.size())
      throw MigrationError(line.span, "FUNCTION header needs a parameter list");
    return h;
  }
  return std::nullopt;
}

bool is_unit_end(const LogicalLine &line) {
  if (line.kind != LineKind::statement)
    return false;
  auto t = lex(line.text, line.span);
  if (t.empty() || !t[0].is_ident())
    return false;
  const std::string &w = t[0].text;
  if (w == "endsubroutine" || w == "endfunction" || w == "endprogram")
    return true;
  if (w != "end")
    return false;
  if (t.size() == 1)
    return true;
  return t[1].is_ident() && (t[1].text == "subroutine" || t[1].text == "function" ||
                             t[1].text == "program" || t[1].text == "block");
}

bool is_segment_end(const LogicalLine &line) {
  if (line.kind != LineKind::statement)
    return false;
  auto t = lex(line.text, line.span);
  return (t.size() == 2 && word_at(t, 0, "end") && word_at(t, 1, "segment")) ||
         (t.size() == 1 && word_at(t, 0, "endsegment"));
}

Stmt comment_stmt(const LogicalLine &line) {
  Stmt s;
  s.kind = line.kind == LineKind::blank ? StmtKind::blank : StmtKind::comment;
  s.span = line.span;
  s.text = line.text;
  return s;
}

} // namespace

bool is_segment_header(const LogicalLine &line) {
  if (line.kind != LineKind::statement)
    return false;
  auto t = lex(line.text, line.span);
  if (t.size() < 2 || !word_at(t, 0, "segment"))
    return false;
  return t[1].is_punct(",") || t[1].is_ident() || t[1].is_op("/");
}

std::optional<IncludeDirective> parse_include_directive(const LogicalLine &line) {
  if (line.kind == LineKind::statement) {
    auto t = lex(line.text, line.span);
    if (t.size() == 2 && word_at(t, 0, "include") && t[1].kind == TokenKind::string)
      return IncludeDirective{IncludeFlavor::fortran_include,
                              t[1].text.substr(1, t[1].text.size() - 2),
                              line.span};
    return std::nullopt;
  }
  if (line.kind != LineKind::directive)
    return std::nullopt;
  std::string_view text = line.text;
  std::size_t i = 0;
  while (i < text.size() && text[i] == ' ')
    ++i;
  text.remove_prefix(i);
  auto trim = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ')
      s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ')
      s.remove_suffix(1);
    return s;
  };
  std::string lower = to_lower(text.substr(0, std::min<std::size_t>(text.size(), 8)));
  if (lower.rfind("#include", 0) == 0 || lower.rfind("# include", 0) == 0) {
    auto rest = trim(text.substr(text.find("include") + 7));
    if (rest.size() >= 2 && ((rest.front() == '"' && rest.back() == '"') ||
                             (rest.front() == '<' && rest.back() == '>')))
      return IncludeDirective{IncludeFlavor::preprocessor_hash,
                              std::string(rest.substr(1, rest.size() - 2)),
                              line.span};
    throw MigrationError(line.span, "malformed #include directive");
  }
  if (lower.rfind("%inc", 0) == 0 || lower.rfind("-inc", 0) == 0) {
    auto rest = trim(text.substr(4));
    if (rest.empty())
      throw MigrationError(line.span, "include directive without a name");
    return IncludeDirective{lower[0] == '%' ? IncludeFlavor::esope_percent_inc
                                            : IncludeFlavor::esope_dash_inc,
                            std::string(rest), line.span};
  }
  return std::nullopt;
}

std::vector<Stmt> parse_statement(const LogicalLine &line) {
  if (line.kind == LineKind::comment || line.kind == LineKind::blank)
    return {comment_stmt(line)};
  if (line.kind == LineKind::directive) {
    Stmt s;
    s.span = line.span;
    s.text = line.text;
    if (auto inc = parse_include_directive(line)) {
      s.kind = StmtKind::include;
      s.include = std::move(inc);
    } else {
      s.kind = StmtKind::directive;
    }
    return {std::move(s)};
  }
  ExprTokenStream t = statement_tokens(line);
  if (!t.empty() && t[0].is_ident() &&
      (kEsopeCommands.count(t[0].text) || t[0].text == "pointeur") &&
      (t.size() == 1 || t[1].is_punct(",") || t[1].is_ident() ||
       t[1].kind == TokenKind::dotted_access))
    return parse_esope(t, line);
  return {classify(t, line)};
}

SegmentDefinition parse_segment_definition(std::span<const LogicalLine> lines) {
  if (lines.empty() || !is_segment_header(lines.front()))
    throw MigrationError(lines.empty() ? SourceSpan{} : lines.front().span,
                         "expected SEGMENT header");
  const LogicalLine &head = lines.front();
  auto ht = lex(head.text, head.span);
  SegmentDefinition seg;
  std::size_t i = 1;
  if (ht[i].is_punct(",") || ht[i].is_op("/"))
    ++i;
  if (i >= ht.size() || !ht[i].is_ident())
    throw MigrationError(head.span, "SEGMENT needs a name");
  seg.name = ht[i].text;
  ++i;
  if (i < ht.size() && ht[i].is_op("/"))
    ++i;
  if (i != ht.size())
    throw MigrationError(head.span, "unexpected tokens after segment name");
  seg.default_pointer = seg.name;
  seg.span = head.span;

  if (lines.size() < 2 || !is_segment_end(lines.back()))
    throw MigrationError(head.span, "segment " + seg.name + " has no END SEGMENT");
  seg.span.end_line = lines.back().span.end_line;
  seg.span.end_col = lines.back().span.end_col;

  std::vector<std::string> pending;
  auto add_field = [&](FieldDef f) {
    if (seg.field(f.name))
      throw MigrationError(f.span, "duplicate field " + f.name + " in segment " +
                                       seg.name);
    f.comments = std::move(pending);
    pending.clear();
    seg.fields.push_back(std::move(f));
  };

  for (std::size_t k = 1; k + 1 < lines.size(); ++k) {
    const LogicalLine &line = lines[k];
    if (line.kind == LineKind::comment) {
      pending.push_back(line.text);
      continue;
    }
    if (line.kind == LineKind::blank)
      continue;
    if (line.kind != LineKind::statement)
      throw MigrationError(line.span, "directive inside segment definition");
    ExprTokenStream t = statement_tokens(line);
    if (word_at(t, 0, "pointeur")) {
      auto stmts = parse_esope(t, line);
      for (const auto &b : stmts.front().esope->pointers) {
        FieldDef f;
        f.name = b.pointer;
        f.type.base = FieldBase::segment_pointer;
        f.type.segment = b.segment;
        f.span = line.span;
        add_field(std::move(f));
      }
      continue;
    }
    auto ts = parse_type_spec(t, 0);
    if (!ts)
      throw MigrationError(line.span,
                           "only type declarations and pointeur are allowed in a segment");
    const TypeSpec &type = ts->first;
    std::size_t j = skip_double_colon(t, ts->second);
    for (auto &e : parse_entities(slice(t, j), line.span)) {
      FieldDef f;
      f.name = e.name;
      f.span = line.span;
      f.dims = e.dims;
      const std::string &b = type.base;
      const std::string &kind = type.kind;
      if (b == "integer" && (kind.empty() || kind == "4"))
        f.type.base = FieldBase::integer;
      else if (b == "real" && (kind.empty() || kind == "4"))
        f.type.base = FieldBase::real;
      else if ((b == "real" && kind == "8") || (b == "double precision" && kind.empty()))
        f.type.base = FieldBase::double_precision;
      else if (b == "logical" && (kind.empty() || kind == "4"))
        f.type.base = FieldBase::logical;
      else if (b == "character") {
        f.type.base = FieldBase::character;
        std::string len = e.char_len.value_or(type.char_len.value_or("1"));
        bool numeric = !len.empty() && std::all_of(len.begin(), len.end(), [](char c) {
          return std::isdigit(static_cast<unsigned char>(c));
        });
        if (!numeric || std::stoi(len) < 1)
          throw MigrationError(line.span, "character field " + f.name +
                                              " needs a constant length >= 1");
        f.type.char_len = std::stoi(len);
      } else {
        throw MigrationError(line.span, "unsupported field type " + type_spelling(type) +
                                            " for " + f.name);
      }
      add_field(std::move(f));
    }
  }
  seg.trailing_comments = std::move(pending);
  if (seg.fields.empty())
    throw MigrationError(seg.span, "segment " + seg.name + " declares no field");

  for (auto &f : seg.fields) {
    if (f.type.base == FieldBase::segment_pointer && !f.dims.empty())
      throw MigrationError(f.span, "arrays of segment pointers are not supported");
    for (const auto &dim : f.dims) {
      auto flat = flatten(dim);
      for (std::size_t q = 0; q < flat.size(); ++q) {
        const auto &tok = flat[q];
        if (tok.is_punct(":"))
          throw MigrationError(f.span, "explicit lower bounds are not supported in segment arrays");
        if (!tok.is_ident())
          continue;
        if (q + 1 < flat.size() && flat[q + 1].is_punct("("))
          throw MigrationError(f.span, "function reference in dimension of " + f.name);
        if (seg.field(tok.text))
          throw MigrationError(f.span, "dimension of " + f.name +
                                           " references field " + tok.text);
        f.is_dynamic = true;
        if (std::find(seg.dimensioning_vars.begin(), seg.dimensioning_vars.end(),
                      tok.text) == seg.dimensioning_vars.end())
          seg.dimensioning_vars.push_back(tok.text);
      }
    }
  }
  return seg;
}

ProgramUnitAst parse_unit(std::span<const LogicalLine> lines, FileId file,
                          const std::string &path, bool as_fragment) {
  ProgramUnitAst unit;
  unit.file = file;
  unit.path = path;
  std::size_t i = 0;
  while (i < lines.size() && lines[i].kind != LineKind::statement &&
         lines[i].kind != LineKind::directive) {
    unit.leading.push_back(comment_stmt(lines[i]));
    ++i;
  }
  std::optional<Header> header =
      i < lines.size() ? parse_header(lines[i]) : std::nullopt;
  if (header) {
    unit.kind = header->kind;
    unit.name = header->name;
    unit.params = header->params;
    unit.return_type = header->return_type;
    unit.span = lines[i].span;
    ++i;
  } else if (as_fragment) {
    unit.kind = UnitKind::fragment;
    unit.span = lines.empty() ? SourceSpan{file, 1, 1, 1, 1} : lines.front().span;
    // A fragment owns its leading comments as ordinary body comments.
    unit.body = std::move(unit.leading);
    unit.leading.clear();
  } else {
    unit.kind = UnitKind::program;
    unit.name = "main";
    unit.span = i < lines.size() ? lines[i].span : SourceSpan{file, 1, 1, 1, 1};
  }

  bool ended = false;
  for (; i < lines.size(); ++i) {
    const LogicalLine &line = lines[i];
    if (ended) {
      if (line.kind == LineKind::comment || line.kind == LineKind::blank) {
        unit.trailing.push_back(comment_stmt(line));
        continue;
      }
      throw MigrationError(line.span, "statement after END of " + unit.name);
    }
    if (line.kind == LineKind::statement && parse_header(line))
      throw MigrationError(line.span, "unit header inside " +
                                          (unit.name.empty() ? std::string("fragment")
                                                             : unit.name));
    if (is_unit_end(line)) {
      if (unit.kind == UnitKind::fragment)
        throw MigrationError(line.span, "END statement in an included fragment");
      auto stmts = parse_statement(line);
      unit.end = std::move(stmts.front());
      ended = true;
      continue;
    }
    if (is_segment_header(line)) {
      std::size_t j = i + 1;
      while (j < lines.size() && !is_segment_end(lines[j]) && !is_unit_end(lines[j]))
        ++j;
      if (j >= lines.size() || !is_segment_end(lines[j]))
        throw MigrationError(line.span, "unterminated SEGMENT block");
      Stmt s;
      s.kind = StmtKind::segment_def;
      s.label = line.label;
      s.span = line.span;
      s.span.end_line = lines[j].span.end_line;
      s.span.end_col = lines[j].span.end_col;
      s.segment = parse_segment_definition(lines.subspan(i, j - i + 1));
      s.esope = EsopeStatement{EsopeKind::segment_def,
                               {{ExprToken::ident(s.segment->name)}}, {}, s.span};
      s.text = "segment " + s.segment->name;
      unit.body.push_back(std::move(s));
      i = j;
      continue;
    }
    for (auto &s : parse_statement(line))
      unit.body.push_back(std::move(s));
  }
  if (!ended && unit.kind != UnitKind::fragment)
    throw MigrationError(unit.span, "missing END for " + std::string(unit_kind_name(unit.kind)) +
                                        " " + unit.name);
  if (!unit.body.empty() || unit.end) {
    const SourceSpan &last = unit.end ? unit.end->span : unit.body.back().span;
    unit.span.end_line = std::max(unit.span.end_line, last.end_line);
    unit.span.end_col = unit.span.end_line == last.end_line ? last.end_col : unit.span.end_col;
  }
  return unit;
}

std::vector<ProgramUnitAst> parse_file(std::span<const LogicalLine> lines,
                                       FileId file, const std::string &path,
                                       bool as_fragment) {
  std::vector<ProgramUnitAst> units;
  if (as_fragment) {
    units.push_back(parse_unit(lines, file, path, true));
    return units;
  }
  std::size_t start = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_unit_end(lines[i])) {
      // Comments following the last END stay with the last unit.
      std::size_t stop = i + 1;
      bool more_statements = false;
      for (std::size_t k = stop; k < lines.size(); ++k)
        if (lines[k].kind == LineKind::statement || lines[k].kind == LineKind::directive)
          more_statements = true;
      if (!more_statements)
        stop = lines.size();
      units.push_back(parse_unit(lines.subspan(start, stop - start), file, path));
      start = stop;
      i = stop - 1;
    }
  }
  if (start < lines.size()) {
    bool has_statement = false;
    for (std::size_t k = start; k < lines.size(); ++k)
      if (lines[k].kind == LineKind::statement || lines[k].kind == LineKind::directive)
        has_statement = true;
    if (has_statement)
      units.push_back(parse_unit(lines.subspan(start), file, path));
    else if (!units.empty())
      for (std::size_t k = start; k < lines.size(); ++k)
        units.back().trailing.push_back(comment_stmt(lines[k]));
  }
  return units;
}

} // namespace segmig
