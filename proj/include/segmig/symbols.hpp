#pragma once

#include "segmig/ast.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace segmig {

// What the declarations of a unit say about one name.
struct DeclInfo {
  std::optional<TypeSpec> type; // explicit type declaration, if any
  std::vector<ExprTokenStream> dims;
  std::optional<std::string> char_len; // entity-level length override
  bool is_parameter = false;
  bool in_common = false;
  bool is_external = false;
  bool is_intrinsic = false;
  SourceSpan span;

  bool is_array() const { return !dims.empty(); }
};

// Symbol facts for one (include-resolved) unit.
struct SymbolTable {
  std::string unit_name;
  UnitKind kind = UnitKind::subroutine;
  std::vector<std::string> params;
  std::map<std::string, DeclInfo> decls;
  std::map<std::string, std::string> pointers; // POINTEUR name -> segment
  std::vector<const SegmentDefinition *> segments; // visible, in scope order

  const DeclInfo *decl(const std::string &name) const;
  bool is_param(const std::string &name) const;
  const SegmentDefinition *segment(const std::string &name) const;
  // Segment owning a bare field name when the name is not a local symbol;
  // throws on ambiguity.
  const SegmentDefinition *field_owner(const std::string &name) const;
  // True if `name` refers to a local entity (declared, parameter, pointer or
  // the function result).
  bool is_local(const std::string &name) const;
};

SymbolTable build_symbol_table(const ProgramUnitAst &unit,
                               std::vector<const SegmentDefinition *> visible_segments);

// Returns the unique visible segment owning `field`, nullptr if none, and
// throws MigrationError naming both segments on ambiguity.
const SegmentDefinition *owning_segment(const std::vector<const SegmentDefinition *> &scope,
                                        const std::string &field,
                                        const SourceSpan &where = {});

// One access made by a statement, in evaluation order.
struct UseEvent {
  enum Kind { read, write, invoke, field } kind = read;
  std::string name; // variable, callee, or field name
  // invoke: per actual argument, the variable passed by reference if any.
  std::vector<std::optional<std::string>> passed;
  bool is_function = false; // invoke from expression context
  std::string segment;      // field: owning segment (default pointer)
  SourceSpan span;
};

// Walks one statement (and a logical IF's nested statement) emitting use
// events. Assignments yield right-hand-side reads, then target subscript
// reads, then the write.
void walk_statement(const Stmt &s, const SymbolTable &syms, std::vector<UseEvent> &out);

// Walks an expression in read context.
void walk_expression(const ExprTokenStream &tokens, const SymbolTable &syms,
                     const SourceSpan &span, std::vector<UseEvent> &out);

std::vector<UseEvent> unit_events(const ProgramUnitAst &unit, const SymbolTable &syms);

// FORTRAN 77 intrinsic procedure names (generic and specific).
bool is_intrinsic_name(const std::string &name);

// Specifier names accepted inside I/O control lists.
bool is_io_specifier(const std::string &name);

} // namespace segmig
