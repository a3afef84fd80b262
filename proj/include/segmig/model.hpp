#pragma once

#include "segmig/ast.hpp"
#include "segmig/includes.hpp"
#include "segmig/symbols.hpp"

#include <compare>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace segmig {

enum class Intent { unknown, in, out, inout };

std::string_view intent_name(Intent i);
Intent join(Intent a, Intent b);

// Known parameter intents of routines outside the project.
using IntentCatalog = std::map<std::string, std::vector<Intent>>;

struct EsopeRecord {
  EsopeKind kind = EsopeKind::segini;
  std::string text; // canonical operand text
  SourceSpan span;
  friend bool operator==(const EsopeRecord &, const EsopeRecord &) = default;
  friend auto operator<=>(const EsopeRecord &a, const EsopeRecord &b) {
    return std::tie(a.span.file, a.span.start_line, a.span.start_col, a.text) <=>
           std::tie(b.span.file, b.span.start_line, b.span.start_col, b.text);
  }
};

struct UnitSummary {
  std::string name;
  UnitKind kind = UnitKind::subroutine;
  std::vector<std::string> params;
  std::optional<TypeSpec> return_type;
  std::set<std::string> referenced;
  std::set<std::string> defined;
  std::string path;
  FileId file = 0;
  std::vector<std::string> visible_segments;
  std::map<std::string, std::string> pointers; // pointer -> segment
  std::set<std::string> default_pointers;      // segments used via bare fields
  std::set<std::string> external_decls;        // names in EXTERNAL statements
  std::vector<EsopeRecord> esope;
  std::vector<UseEvent> events; // accesses in textual order
};

struct CallEdge {
  std::string caller;
  std::string callee;
  int arg_count = 0;
  bool external = false;  // callee is not a project unit
  bool intrinsic = false; // callee is a FORTRAN intrinsic
  bool is_function = false;
  SourceSpan span;
};

struct IncludeEdge {
  std::string includer;
  std::string included;
  friend bool operator==(const IncludeEdge &, const IncludeEdge &) = default;
};

struct ProjectModel {
  std::map<std::string, UnitSummary> units;
  std::map<std::string, SegmentDefinition> segments;
  std::map<std::string, std::string> segment_files; // segment -> defining file
  std::vector<CallEdge> call_graph;
  std::vector<IncludeEdge> include_graph;
  IntentCatalog intent_catalog;
  std::set<std::string> externals; // referenced routines defined nowhere

  const UnitSummary *unit(const std::string &name) const;
  const SegmentDefinition *segment(const std::string &name) const;
  std::vector<const SegmentDefinition *> scope_of(const UnitSummary &u) const;
  // Line-oriented debug report, one entity per line.
  std::string dump() const;
};

// Units must already be include-resolved. Segments defined in included
// files are taken from `cache`.
ProjectModel build_project_model(const std::vector<ProgramUnitAst> &units,
                                 const FragmentCache *cache = nullptr,
                                 IntentCatalog catalog = {});

// Symbol table for a unit against the model's segments.
SymbolTable unit_symbols(const ProjectModel &model, const ProgramUnitAst &unit);

// The unique segment in `scope` owning `field`, or nullptr. Throws on
// ambiguity.
const SegmentDefinition *segment_for_field(const ProjectModel &model, const std::string &field,
                                           const std::vector<std::string> &scope);

} // namespace segmig
