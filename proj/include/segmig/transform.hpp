#pragma once

#include "segmig/analysis.hpp"
#include "segmig/target.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace segmig {

// Prefix of every traceability comment the migration writes.
inline constexpr const char *kTracePrefix = "! [seg-migrate] ";

struct TransformStats {
  int rewritten = 0;   // source statements whose text changed
  int removed = 0;     // replaced by a traceability comment only
  int passthrough = 0; // emitted with the same tokens
  TransformStats &operator+=(const TransformStats &o) {
    rewritten += o.rewritten;
    removed += o.removed;
    passthrough += o.passthrough;
    return *this;
  }
  friend bool operator==(const TransformStats &, const TransformStats &) = default;
};

// Module holding one segment's derived type and its commands.
TargetNode migrate_segment(const SegmentDefinition &seg);

// Bodies of the generated command procedures, as procedure templates.
std::vector<TargetNode> synthesize_command_bodies(const SegmentDefinition &seg);

// The abstract `segment` module and the segment registry module, in that
// order.
std::vector<TargetNode> generate_support_modules();

inline const char *kSegmentModule = "segment_mod";
inline const char *kRegistryModule = "segment_registry_mod";

// Everything a statement rewrite needs to know about its unit.
struct UnitContext {
  const ProjectModel *model = nullptr;
  const ProgramUnitAst *unit = nullptr;
  SymbolTable syms;
  std::map<std::string, TypeAssignment> types;
  RequiredSymbols required;
  std::vector<Import> uses;
  std::vector<Intent> intents; // per parameter
  // True externals declared through a generated interface block, with the
  // block's text.
  std::map<std::string, std::string> interfaces;

  static UnitContext build(const ProjectModel &model, const ProgramUnitAst &unit,
                           const IntentTable &intents);

  // Local spelling of a segment's type (`seg_<name>` when a variable
  // shadows it).
  std::string type_name(const std::string &segment) const;
  // Segment a pointer-valued operand designates, or nullptr.
  const SegmentDefinition *pointer_segment(const ExprToken &t) const;
  bool is_project_routine(const std::string &name) const;
};

struct RewriteOutcome {
  std::vector<TargetNode> nodes;
  bool removed = false; // only traceability comments remain
  bool changed = false; // tokens differ from the source
};

ExprTokenStream rewrite_expression(const ExprTokenStream &tokens, const UnitContext &ctx);
RewriteOutcome rewrite_statement(const Stmt &s, const UnitContext &ctx);

// Free-form text of a token stream.
std::string render_free(const ExprTokenStream &tokens);

struct MigratedUnit {
  std::vector<TargetNode> nodes; // leading comments, the unit, trailing comments
  TransformStats stats;
  bool is_program = false;
};

MigratedUnit migrate_unit(const ProgramUnitAst &unit, const ProjectModel &model,
                          const IntentTable &intents);

// Wraps a migrated subprogram (procedure node) into `<name>_mod`.
TargetNode wrap_in_module(const std::string &unit_name, const std::vector<Import> &uses,
                          TargetNode procedure);

struct MigratedFile {
  std::string source; // input path; empty for the support files
  std::string output; // path relative to the output directory
  TargetNode tree;
  TransformStats stats;
  int modules = 0;
  int programs = 0;
};

struct MigrationOptions {
  std::string source_dir; // output paths are relative to this
};

// One tree per input file holding units or segment definitions, then the two
// support files. Throws MigrationError with every unit's errors.
std::vector<MigratedFile> migrate_project(const ProjectModel &model,
                                          const std::vector<ProgramUnitAst> &units,
                                          const MigrationOptions &opts = {});

std::string render_import(const Import &imp);

} // namespace segmig
