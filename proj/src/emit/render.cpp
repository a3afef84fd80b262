#include "segmig/emit.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace segmig {

std::string_view node_kind_name(NodeKind k) {
  switch (k) {
  case NodeKind::file: return "file";
  case NodeKind::module: return "module";
  case NodeKind::program: return "program";
  case NodeKind::derived_type: return "derived-type";
  case NodeKind::procedure: return "procedure";
  case NodeKind::interface_block: return "interface";
  case NodeKind::statement: return "statement";
  case NodeKind::declaration: return "declaration";
  case NodeKind::comment: return "comment";
  case NodeKind::use_stmt: return "use";
  case NodeKind::contains_marker: return "contains";
  case NodeKind::blank: return "blank";
  case NodeKind::template_: return "template";
  }
  return "";
}

TargetNode TargetNode::line(NodeKind k, std::string text, SourceSpan origin) {
  TargetNode n;
  n.kind = k;
  n.text = std::move(text);
  n.origin = origin;
  return n;
}
TargetNode TargetNode::stmt(std::string text, SourceSpan origin) {
  return line(NodeKind::statement, std::move(text), origin);
}
TargetNode TargetNode::decl(std::string text, SourceSpan origin) {
  return line(NodeKind::declaration, std::move(text), origin);
}
TargetNode TargetNode::comment(std::string text, SourceSpan origin) {
  return line(NodeKind::comment, std::move(text), origin);
}
TargetNode TargetNode::use(std::string text) { return line(NodeKind::use_stmt, std::move(text)); }
TargetNode TargetNode::blank_line() { return line(NodeKind::blank, ""); }
TargetNode TargetNode::contains() { return line(NodeKind::contains_marker, "contains"); }

TargetNode TargetNode::container(NodeKind k, std::string open, std::string close,
                                 std::vector<TargetNode> children) {
  TargetNode n;
  n.kind = k;
  n.text = std::move(open);
  n.end_text = std::move(close);
  n.children = std::move(children);
  return n;
}

TargetNode TargetNode::templ(TemplateRole role, std::string name, std::string text,
                             std::map<std::string, std::string> bindings) {
  TargetNode n;
  n.kind = NodeKind::template_;
  n.role = role;
  n.name = std::move(name);
  n.text = std::move(text);
  n.bindings = std::move(bindings);
  return n;
}

void RenderConfig::validate() const {
  if (indent_width < 1 || indent_width > 8)
    throw MigrationError(SourceSpan{}, "indent width must be between 1 and 8, got " +
                                           std::to_string(indent_width));
  if (max_line_length < 72 || max_line_length > 132)
    throw MigrationError(SourceSpan{}, "maximum line length must be between 72 and 132, got " +
                                           std::to_string(max_line_length));
  if (continuation != "&")
    throw MigrationError(SourceSpan{}, "continuation marker must be '&'");
}

namespace {

std::vector<std::string> split_lines(const std::string &text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string::npos) {
      if (start < text.size())
        out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

bool is_comment_line(const std::string &l) {
  auto p = l.find_first_not_of(' ');
  return p != std::string::npos && l[p] == '!';
}

const std::set<std::string> &keywords() {
  static const std::set<std::string> k = {
      "allocate",  "assignment", "associated", "call",      "character", "class",
      "contains",  "continue",   "deallocate", "deferred",  "dimension", "do",
      "else",      "elseif",     "end",        "enddo",     "endif",     "error",
      "exit",      "extends",    "external",   "format",    "function",  "go",
      "goto",      "if",         "implicit",   "import",    "in",        "inout",
      "integer",   "intent",     "interface",  "intrinsic", "logical",   "module",
      "none",      "nullify",    "only",       "out",       "parameter", "pointer",
      "precision", "print",      "private",    "procedure", "program",   "public",
      "read",      "real",       "result",     "return",    "save",      "select",
      "stop",      "subroutine", "then",       "type",      "use",       "while",
      "write",     "abstract",   "double",     "data",      "common",    "equivalence",
      "len",       "null",       "open",       "close",     "rewind",    "inquire",
      "backspace", "endfile",    "kind",       "size",      "allocatable"};
  return k;
}

std::string apply_case(const std::string &line, KeywordCase kc) {
  if (kc == KeywordCase::lower || is_comment_line(line))
    return line;
  std::string out = line;
  char quote = 0;
  std::size_t i = 0;
  while (i < out.size()) {
    char c = out[i];
    if (quote) {
      if (c == quote)
        quote = 0;
      ++i;
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < out.size() && (std::isalnum(static_cast<unsigned char>(out[j])) || out[j] == '_'))
        ++j;
      std::string word = out.substr(i, j - i);
      bool component = (i > 0 && out[i - 1] == '%') || (j < out.size() && out[j] == '%');
      if (!component && keywords().count(word))
        for (std::size_t k = i; k < j; ++k)
          out[k] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[k])));
      i = j;
      continue;
    }
    ++i;
  }
  return out;
}

struct Renderer {
  const RenderConfig &cfg;
  std::vector<std::string> lines;

  std::string pad(int depth) const {
    return std::string(static_cast<std::size_t>(std::max(depth, 0) * cfg.indent_width), ' ');
  }

  void emit(const std::string &l) {
    if (l.empty() || is_comment_line(l)) {
      lines.push_back(l);
      return;
    }
    for (auto &part : split_long_line(apply_case(l, cfg.keyword_case), cfg))
      lines.push_back(std::move(part));
  }

  std::string leaf_text(const TargetNode &n) const {
    if (n.label)
      return std::to_string(*n.label) + " " + n.text;
    return n.text;
  }

  void sequence(const std::vector<TargetNode> &nodes, int depth, int container_depth) {
    int extra = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const TargetNode &n = nodes[i];
      if (n.kind == NodeKind::contains_marker) {
        bool more = std::any_of(nodes.begin() + static_cast<long>(i) + 1, nodes.end(),
                                [](const TargetNode &x) {
                                  return x.kind != NodeKind::blank &&
                                         x.kind != NodeKind::contains_marker;
                                });
        if (more)
          emit(pad(container_depth) + "contains");
        continue;
      }
      extra = std::max(0, extra - n.dedent_before);
      node(n, depth + extra);
      extra += n.indent_after;
      extra = std::max(0, extra - n.dedent_after);
    }
  }

  void node(const TargetNode &n, int depth) {
    switch (n.kind) {
    case NodeKind::file:
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        // leading comments stay attached to the unit that follows
        if (i && n.children[i - 1].kind != NodeKind::comment)
          lines.emplace_back();
        node(n.children[i], depth);
      }
      break;
    case NodeKind::module:
    case NodeKind::program:
    case NodeKind::derived_type:
    case NodeKind::procedure:
    case NodeKind::interface_block:
      emit(pad(depth) + n.text);
      sequence(n.children, depth + 1, depth);
      emit(pad(depth) + n.end_text);
      break;
    case NodeKind::blank:
      lines.emplace_back();
      break;
    case NodeKind::contains_marker:
      emit(pad(depth) + "contains");
      break;
    case NodeKind::template_:
      for (auto &l : expand_template(n, depth, cfg))
        emit(l);
      break;
    default:
      emit(pad(depth) + leaf_text(n));
    }
  }
};

} // namespace

std::vector<std::string> expand_template(const TargetNode &node, int depth,
                                         const RenderConfig &cfg) {
  std::string text;
  const std::string &t = node.text;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == '{') {
      auto close = t.find('}', i);
      if (close != std::string::npos) {
        std::string key = t.substr(i + 1, close - i - 1);
        bool word = !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
          return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
        });
        if (word) {
          auto it = node.bindings.find(key);
          if (it == node.bindings.end())
            throw MigrationError(SourceSpan{}, "template " + node.name +
                                                   " has no binding for placeholder {" + key +
                                                   "}");
          text += it->second;
          i = close;
          continue;
        }
      }
    }
    text += t[i];
  }

  auto raw = split_lines(text);
  std::size_t base = std::string::npos;
  for (const auto &l : raw) {
    auto p = l.find_first_not_of(' ');
    if (p != std::string::npos)
      base = std::min(base, p);
  }
  if (base == std::string::npos)
    base = 0;
  std::string pad(static_cast<std::size_t>(depth * cfg.indent_width), ' ');
  std::vector<std::string> out;
  for (const auto &l : raw) {
    if (l.find_first_not_of(' ') == std::string::npos)
      out.emplace_back();
    else
      out.push_back(pad + l.substr(base));
  }
  // leading and trailing blank lines of the template text are not content
  while (!out.empty() && out.front().empty())
    out.erase(out.begin());
  while (!out.empty() && out.back().empty())
    out.pop_back();
  return out;
}

namespace {

// Last break position keeping `line[0, head) + " &"` within the limit, or npos.
std::size_t break_position(const std::string &line, std::size_t indent, std::size_t limit) {
  std::size_t best = std::string::npos;
  char quote = 0;
  for (std::size_t i = indent + 1; i < line.size(); ++i) {
    char c = line[i];
    if (quote) {
      if (c == quote)
        quote = 0;
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      continue;
    }
    if (c != ' ' && line[i - 1] != ',')
      continue;
    std::size_t head = i;
    while (head > indent && line[head - 1] == ' ')
      --head;
    if (head + 2 > limit)
      break;
    best = i;
  }
  return best;
}

} // namespace

std::vector<std::string> split_long_line(const std::string &line, const RenderConfig &cfg) {
  auto limit = static_cast<std::size_t>(cfg.max_line_length);
  if (line.size() <= limit || is_comment_line(line))
    return {line};
  std::size_t indent = line.find_first_not_of(' ');
  std::string cont_pad(indent + 2 * static_cast<std::size_t>(cfg.indent_width), ' ');
  std::vector<std::string> out;
  std::string rest = line;
  std::size_t rest_indent = indent;
  while (rest.size() > limit) {
    std::size_t cut = break_position(rest, rest_indent, limit);
    if (cut == std::string::npos)
      break; // one token longer than the line; left as is
    std::size_t head = cut;
    while (head > rest_indent && rest[head - 1] == ' ')
      --head;
    std::string next = cont_pad + rest.substr(rest.find_first_not_of(' ', cut));
    if (next.size() >= rest.size())
      break; // no progress possible
    out.push_back(rest.substr(0, head) + " " + cfg.continuation);
    rest = std::move(next);
    rest_indent = cont_pad.size();
  }
  out.push_back(rest);
  return out;
}

std::string render_unit(const TargetNode &tree, const RenderConfig &cfg) {
  cfg.validate();
  Renderer r{cfg, {}};
  r.node(tree, 0);
  std::string out;
  for (const auto &l : r.lines) {
    std::size_t end = l.find_last_not_of(' ');
    out += end == std::string::npos ? std::string() : l.substr(0, end + 1);
    out += '\n';
  }
  return out;
}

} // namespace segmig
