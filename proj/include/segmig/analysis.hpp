#pragma once

#include "segmig/model.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace segmig {

enum class TypeOrigin { declared, implicit_rule, pointeur_decl, function_return };

std::string_view type_origin_name(TypeOrigin o);

struct TypeAssignment {
  std::string name;
  TypeSpec type;       // empty for pointers
  std::string segment; // pointeur_decl only
  TypeOrigin origin = TypeOrigin::declared;
};

// The letter -> type table in effect in a unit: i-n integer, everything
// else real, overridden by IMPLICIT statements in order.
struct ImplicitTable {
  bool none = false;
  std::map<char, TypeSpec> letters;

  static ImplicitTable for_unit(const ProgramUnitAst &unit);
  std::optional<TypeSpec> type_of(const std::string &name) const;
};

// Types every referenced symbol of the unit. Symbols are returned sorted by
// name. Throws when a symbol is both a variable and a called routine, or
// when IMPLICIT NONE leaves a symbol untyped.
std::vector<TypeAssignment> infer_implicit_types(const ProgramUnitAst &unit,
                                                 const SymbolTable &syms,
                                                 const ProjectModel &model);

struct ExternalClassification {
  std::set<std::string> external_routine_decl; // named in EXTERNAL
  std::set<std::string> return_type_decl;      // typed name used as a function
  std::set<std::string> plain_variable_decl;
};

ExternalClassification classify_external_names(const ProgramUnitAst &unit,
                                                const SymbolTable &syms,
                                                const ProjectModel &model);

using IntentTable = std::map<std::string, std::vector<Intent>>;

// Parses `name(intent, intent, ...)` lines; `#` starts a comment.
IntentCatalog parse_intent_catalog(std::string_view text);

// Fixpoint over the call graph. A parameter's intent follows its first
// access in textual order: read first gives in (inout if also written),
// written first gives out. Arguments passed to a project routine inherit
// that routine's intent; catalog entries seed known externals; unknown
// externals count as read-then-written. Calls between routines of one
// recursive cycle may or may not execute. Unused parameters are in.
IntentTable infer_intents(const ProjectModel &model);
// Same, visiting routines in the given order (names missing from `order`
// come last). The result does not depend on the order.
IntentTable infer_intents(const ProjectModel &model, const std::vector<std::string> &order);

struct Import {
  std::string module;
  std::vector<std::pair<std::string, std::string>> renames; // local => remote
  friend bool operator==(const Import &, const Import &) = default;
};

struct RequiredSymbols {
  std::set<std::string> segments; // segment types and their commands
  std::set<std::string> routines; // called routines
  std::set<std::string> renamed_types; // segments whose type name is shadowed by a variable
  std::set<std::string> defined;  // satisfied locally (interface blocks, own name)
};

// What a migrated unit needs, computed from its summary alone.
RequiredSymbols required_symbols(const UnitSummary &unit, const ProjectModel &model);

// One import per module defining a required symbol, alphabetical.
std::vector<Import> compute_uses(const RequiredSymbols &req, const ProjectModel &model);

// Warnings for pointers compared with or assigned a negative literal.
std::vector<Diagnostic> negative_pointer_diagnostics(const ProgramUnitAst &unit,
                                                     const SymbolTable &syms);

} // namespace segmig
