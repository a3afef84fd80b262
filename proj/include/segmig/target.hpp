#pragma once

#include "segmig/diagnostics.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace segmig {

// Fortran 2008 output tree. Typed nodes carry structure (modules, types,
// procedures, single lines); template nodes carry generated text with
// `{name}` placeholders and are re-indented when expanded.
enum class NodeKind {
  file,       // top-level sequence, children separated by a blank line
  module,
  program,
  derived_type,
  procedure,
  interface_block,
  statement,
  declaration,
  comment,
  use_stmt,
  contains_marker,
  blank,
  template_,
};

enum class TemplateRole { statement, declaration, procedure, program_unit };

std::string_view node_kind_name(NodeKind k);

struct TargetNode {
  NodeKind kind = NodeKind::statement;
  // Line text for leaf nodes, opening line for containers.
  std::string text;
  std::string end_text; // closing line of containers
  std::optional<int> label;
  // Block structure of statement sequences: levels closed before this line,
  // opened after it, and closed after it (labelled DO terminators).
  int dedent_before = 0;
  int indent_after = 0;
  int dedent_after = 0;
  std::vector<TargetNode> children;

  // template_ only
  TemplateRole role = TemplateRole::statement;
  std::string name; // for error messages
  std::map<std::string, std::string> bindings;

  // Source statement this node was produced from; file 0 for generated.
  SourceSpan origin;

  static TargetNode line(NodeKind k, std::string text, SourceSpan origin = {});
  static TargetNode stmt(std::string text, SourceSpan origin = {});
  static TargetNode decl(std::string text, SourceSpan origin = {});
  static TargetNode comment(std::string text, SourceSpan origin = {});
  static TargetNode use(std::string text);
  static TargetNode blank_line();
  static TargetNode contains();
  static TargetNode container(NodeKind k, std::string open, std::string close,
                              std::vector<TargetNode> children = {});
  static TargetNode templ(TemplateRole role, std::string name, std::string text,
                          std::map<std::string, std::string> bindings = {});
};

// Visits every node depth first.
template <typename F> void walk_tree(const TargetNode &n, F &&f) {
  f(n);
  for (const auto &c : n.children)
    walk_tree(c, f);
}

} // namespace segmig
