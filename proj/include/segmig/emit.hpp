#pragma once

#include "segmig/lines.hpp"
#include "segmig/target.hpp"

#include <string>
#include <vector>

namespace segmig {

enum class KeywordCase { lower, upper };

struct RenderConfig {
  int indent_width = 2;
  int max_line_length = 132;
  KeywordCase keyword_case = KeywordCase::lower;
  std::string continuation = "&";

  // Throws MigrationError when a field is out of range.
  void validate() const;
};

// Renders a tree to text, one line per statement, LF line endings.
std::string render_unit(const TargetNode &tree, const RenderConfig &cfg = {});

// Substitutes `{name}` placeholders and re-indents every line relative to
// `depth`; the template's own leading whitespace is kept as relative
// indentation. Throws for a placeholder without binding.
std::vector<std::string> expand_template(const TargetNode &node, int depth,
                                         const RenderConfig &cfg = {});

// Splits an over-long statement line at token boundaries with trailing `&`.
// `indent` is the line's leading whitespace; continuation lines get two more
// indentation steps.
std::vector<std::string> split_long_line(const std::string &line, const RenderConfig &cfg);

struct OutputFile {
  std::string path; // relative to the output directory
  std::string text;
};

struct WriteReport {
  struct Entry {
    std::string path;
    int lines = 0;
    std::string error; // empty on success
  };
  std::vector<Entry> files;
  bool ok() const;
  std::string text() const;
};

// Writes every file with write-then-rename. Errors are reported per file.
WriteReport write_tree(const std::vector<OutputFile> &outputs, const std::string &out_dir,
                       Encoding enc = Encoding::utf8);

} // namespace segmig
