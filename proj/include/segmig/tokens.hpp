#pragma once

#include "segmig/diagnostics.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace segmig {

enum class TokenKind {
  identifier,
  integer,
  real,
  string,
  logical,
  op,
  punct,
  // Esope islands, produced by scan_expression
  dotted_access,
  slash_dim,
};

struct ExprToken;
using ExprTokenStream = std::vector<ExprToken>;

struct ExprToken {
  TokenKind kind = TokenKind::identifier;
  // Lowercase for identifiers, operators and numbers; verbatim for strings.
  std::string text;
  bool space_before = false;

  // dotted_access: base is the pointer expression (one token; empty means
  // the default pointer), field the accessed field, args the subscripts
  // without the enclosing parentheses.
  // slash_dim: base is the array access, dim the 1-based dimension.
  ExprTokenStream base;
  std::string field;
  bool has_args = false;
  ExprTokenStream args;
  int dim = 0;

  static ExprToken ident(std::string name, bool space = false);
  static ExprToken punct(std::string p, bool space = false);
  static ExprToken oper(std::string o, bool space = false);
  static ExprToken integer(long v, bool space = false);

  bool is(TokenKind k, std::string_view t) const {
    return kind == k && text == t;
  }
  bool is_punct(std::string_view p) const { return is(TokenKind::punct, p); }
  bool is_op(std::string_view o) const { return is(TokenKind::op, o); }
  bool is_ident() const { return kind == TokenKind::identifier; }

  friend bool operator==(const ExprToken &, const ExprToken &) = default;
};

// Tokenizes one statement's text. Identifiers, keywords, dotted operators
// and numbers are lowercased; character literals keep their spelling.
ExprTokenStream lex(std::string_view text, const SourceSpan &where = {});

// Folds dotted accesses `p.f(...)` and slash dimensions `a(/k)` into
// structured tokens; every other token passes through unchanged.
ExprTokenStream scan_expression(const ExprTokenStream &tokens,
                                const SourceSpan &where = {});

// Re-renders tokens using the recorded spacing. Esope islands are printed in
// their source syntax.
std::string render_tokens(const ExprTokenStream &tokens);

// Same as render_tokens but ignores recorded spacing and uses a single space
// between words; used for comparisons and normalized messages.
std::string canonical_text(const ExprTokenStream &tokens);

// Flattens structured tokens back to plain tokens (source syntax).
ExprTokenStream flatten(const ExprTokenStream &tokens);

// Strips spacing flags so token streams compare by content only.
ExprTokenStream without_spacing(ExprTokenStream tokens);

bool is_dotted_operator(std::string_view word);

// Splits a stream at top-level commas (outside parentheses).
std::vector<ExprTokenStream> split_top_level(const ExprTokenStream &tokens,
                                             std::string_view sep = ",");

// Index of the parenthesis matching the '(' at `open`, or npos.
std::size_t matching_paren(const ExprTokenStream &tokens, std::size_t open);

std::string to_lower(std::string_view s);

} // namespace segmig
