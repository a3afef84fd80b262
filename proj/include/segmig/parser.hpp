#pragma once

#include "segmig/ast.hpp"
#include "segmig/lines.hpp"

#include <optional>
#include <span>
#include <vector>

namespace segmig {

// Island parser for fixed-form FORTRAN 77 with Esope. Esope constructs are
// parsed into structured nodes; host statements are classified only as far
// as the migration needs, and anything else becomes an opaque statement.

// Splits a file into program units. A file with no unit header is treated
// as an included fragment when `as_fragment` is set and as a headerless
// main program otherwise.
std::vector<ProgramUnitAst> parse_file(std::span<const LogicalLine> lines,
                                       FileId file, const std::string &path,
                                       bool as_fragment = false);

// Parses the lines of exactly one program unit (header through END), or
// one included fragment.
ProgramUnitAst parse_unit(std::span<const LogicalLine> lines, FileId file = 0,
                          const std::string &path = {},
                          bool as_fragment = false);

// Parses `SEGMENT, <name>` ... `END SEGMENT`. Comment lines inside the
// block are attached to the following field.
SegmentDefinition parse_segment_definition(std::span<const LogicalLine> lines);

// Classifies one logical line. Returns more than one statement only for
// Esope commands naming several pointers (`SEGSUP, P1, P2`).
std::vector<Stmt> parse_statement(const LogicalLine &line);

// Recognizes the four include syntaxes.
std::optional<IncludeDirective> parse_include_directive(const LogicalLine &line);

// True if the line opens a segment definition block.
bool is_segment_header(const LogicalLine &line);

} // namespace segmig
