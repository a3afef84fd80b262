#pragma once

#include "segmig/diagnostics.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace segmig {

enum class Encoding { utf8, latin1 };

enum class LineKind { statement, comment, directive, blank };

// One fixed-form statement after continuation cards are merged, or one
// comment/directive/blank line.
struct LogicalLine {
  LineKind kind = LineKind::statement;
  std::optional<int> label;
  // Statement body (columns 7-72 of every card), comment text after the
  // marker column, or the whole directive line.
  std::string text;
  SourceSpan span;
};

// Expands tabs to the next multiple-of-8 column stop.
std::string expand_tabs(std::string_view line);

// Splits a fixed-form source file into logical lines. Columns 1-5 hold the
// label, a non-blank non-zero column 6 marks a continuation card, columns
// 7-72 hold the statement and anything beyond column 72 is ignored.
// Throws MigrationError for a continuation card with no statement before it
// or a non-numeric label field.
std::vector<LogicalLine> split_logical_lines(std::string_view source,
                                             FileId file = 0,
                                             Encoding enc = Encoding::utf8);

} // namespace segmig
