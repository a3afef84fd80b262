#pragma once

#include "segmig/diagnostics.hpp"
#include "segmig/tokens.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace segmig {

// A FORTRAN 77 type specification as written: `integer`, `real*8`,
// `character*40`, `character*(*)`.
struct TypeSpec {
  std::string base; // integer, real, double precision, logical, character, complex
  std::string kind; // numeric length selector, e.g. "8" for real*8
  std::optional<std::string> char_len; // "40", "*", or an expression

  bool empty() const { return base.empty(); }
  friend bool operator==(const TypeSpec &, const TypeSpec &) = default;
};

// Free-form spelling: `integer`, `real(8)`, `character(len=40)`.
std::string type_spelling(const TypeSpec &t);

// ---------------------------------------------------------------------------
// Segments

enum class FieldBase {
  integer,
  real,
  double_precision,
  logical,
  character,
  segment_pointer,
};

struct FieldType {
  FieldBase base = FieldBase::integer;
  int char_len = 0;    // character fields only, >= 1
  std::string segment; // segment_pointer fields only
  friend bool operator==(const FieldType &, const FieldType &) = default;
};

struct FieldDef {
  std::string name;
  FieldType type;
  std::vector<ExprTokenStream> dims; // empty = scalar
  bool is_dynamic = false;           // some dim references a dimensioning variable
  std::vector<std::string> comments; // source comments preceding the field
  SourceSpan span;
};

struct SegmentDefinition {
  std::string name;
  std::vector<FieldDef> fields;
  // First-encounter order, scanning fields top to bottom, left to right.
  std::vector<std::string> dimensioning_vars;
  std::string default_pointer; // always equal to name
  std::vector<std::string> trailing_comments;
  SourceSpan span;

  const FieldDef *field(std::string_view name) const;
};

// ---------------------------------------------------------------------------
// Esope statements

enum class EsopeKind {
  segment_def,
  pointer_decl,
  segini,
  segini_copy,
  segact,
  segact_move,
  segadj,
  segsup,
  segprt,
  segdes,
};

std::string_view esope_keyword(EsopeKind k);

struct PointerBinding {
  std::string pointer;
  std::string segment;
};

struct EsopeStatement {
  EsopeKind kind = EsopeKind::segini;
  // Command operands: one pointer expression, or (target, source) for the
  // copy forms. Pointer declarations list their pointer names here too.
  std::vector<ExprTokenStream> operands;
  std::vector<PointerBinding> pointers; // pointer_decl only
  SourceSpan span;
};

// ---------------------------------------------------------------------------
// Host statements

enum class IncludeFlavor { preprocessor_hash, fortran_include, esope_percent_inc, esope_dash_inc };

std::string_view include_flavor_name(IncludeFlavor f);

struct IncludeDirective {
  IncludeFlavor flavor = IncludeFlavor::preprocessor_hash;
  std::string path;
  SourceSpan span;
};

struct Entity {
  std::string name;
  std::vector<ExprTokenStream> dims;
  std::optional<std::string> char_len;
  ExprTokenStream tokens; // as written, for passthrough
};

// Type declarations and DIMENSION statements (type empty).
struct Declaration {
  TypeSpec type;
  ExprTokenStream head; // keyword and length selector tokens as written
  std::vector<Entity> entities;
};

struct ImplicitRule {
  TypeSpec type;
  std::vector<std::pair<char, char>> ranges;
};

struct ImplicitSpec {
  bool none = false;
  std::vector<ImplicitRule> rules;
};

enum class PartRole {
  keyword,    // statement keywords, never rewritten
  read,       // expression whose symbols are read
  write,      // assignment target
  args,       // parenthesized actual argument list of `callee`
  io_control, // ( unit, fmt, spec=value ... )
  io_input,   // items assigned by a READ
  io_output,  // items read by WRITE/PRINT
  do_var,     // DO control variable
  label,      // statement labels referenced
  raw,        // passed through untouched
  names,      // declared/listed names (EXTERNAL, SAVE, COMMON, DATA ...)
};

struct StmtPart {
  PartRole role = PartRole::raw;
  ExprTokenStream tokens;
  std::string callee; // args parts only
};

enum class StmtKind {
  comment,
  blank,
  directive,
  include,
  include_begin,
  include_end,
  segment_def,
  esope,
  type_decl,
  dimension,
  parameter,
  common,
  data,
  save,
  external,
  intrinsic,
  implicit,
  equivalence,
  assignment,
  call,
  if_then,
  else_if,
  else_,
  end_if,
  logical_if,
  arithmetic_if,
  do_loop,
  do_while,
  end_do,
  continue_,
  return_,
  stop,
  io,
  format,
  opaque,
  end,
};

bool is_specification(StmtKind k);
bool is_executable(StmtKind k);

struct Stmt {
  StmtKind kind = StmtKind::opaque;
  std::optional<int> label;
  SourceSpan span;
  // Comment/directive text, include path for markers, or the statement body
  // as written (FORMAT statements are emitted from it verbatim).
  std::string text;
  std::vector<StmtPart> parts;
  std::optional<Declaration> decl;
  std::optional<EsopeStatement> esope;
  std::optional<SegmentDefinition> segment;
  std::optional<IncludeDirective> include;
  std::optional<ImplicitSpec> implicit;
  std::vector<std::string> names; // EXTERNAL, INTRINSIC, SAVE, PARAMETER, COMMON, DATA names
  std::vector<Stmt> nested;       // body of a logical IF
  int do_label = 0;               // terminating label of a labelled DO
  // Set when the statement was copied from an included fragment.
  std::string from_include;

  bool is_comment_like() const {
    return kind == StmtKind::comment || kind == StmtKind::blank ||
           kind == StmtKind::include_begin || kind == StmtKind::include_end;
  }
};

enum class UnitKind { program, subroutine, function, block_data, fragment };

std::string_view unit_kind_name(UnitKind k);

// Full-fidelity tree of one program unit or included fragment.
struct ProgramUnitAst {
  UnitKind kind = UnitKind::fragment;
  std::string name;
  std::vector<std::string> params;
  std::optional<TypeSpec> return_type; // from a typed FUNCTION header
  SourceSpan span;
  FileId file = 0;
  std::string path;
  std::vector<Stmt> leading;  // comments before the header
  std::vector<Stmt> body;     // statements between header and END
  std::vector<Stmt> trailing; // comments after END (last unit of a file)
  std::optional<Stmt> end;
  // Segments defined by included files, filled by include resolution.
  std::vector<SegmentDefinition> included_segments;

  // Visits every statement including nested logical-IF bodies.
  template <typename F> void for_each_stmt(F &&f) const {
    for (const auto &s : body)
      visit(s, f);
  }

private:
  template <typename F> static void visit(const Stmt &s, F &f) {
    f(s);
    for (const auto &n : s.nested)
      visit(n, f);
  }
};

} // namespace segmig
