#include "segmig/tokens.hpp"

#include <array>
#include <cctype>
#include <cstring>

namespace segmig {

namespace {

constexpr std::array kDottedWords = {"eq",  "ne",  "lt",   "le",  "gt",
                                     "ge",  "and", "or",   "not", "eqv",
                                     "neqv", "true", "false"};

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

// If text[i] == '.' starts a dotted operator, returns its length.
std::size_t dotted_word_at(std::string_view text, std::size_t i) {
  if (i >= text.size() || text[i] != '.')
    return 0;
  std::size_t j = i + 1;
  while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j])))
    ++j;
  if (j == i + 1 || j >= text.size() || text[j] != '.')
    return 0;
  if (!is_dotted_operator(to_lower(text.substr(i + 1, j - i - 1))))
    return 0;
  return j - i + 1;
}

std::size_t lex_number(std::string_view text, std::size_t i, bool &is_real) {
  std::size_t j = i;
  while (j < text.size() && digit(text[j]))
    ++j;
  if (j < text.size() && text[j] == '.' && dotted_word_at(text, j) == 0) {
    is_real = true;
    ++j;
    while (j < text.size() && digit(text[j]))
      ++j;
  }
  if (j < text.size() && std::strchr("eEdD", text[j]) && j > i) {
    std::size_t k = j + 1;
    if (k < text.size() && (text[k] == '+' || text[k] == '-'))
      ++k;
    if (k < text.size() && digit(text[k])) {
      is_real = true;
      j = k;
      while (j < text.size() && digit(text[j]))
        ++j;
    }
  }
  return j;
}

} // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char &c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_dotted_operator(std::string_view word) {
  for (auto w : kDottedWords)
    if (word == w)
      return true;
  return false;
}

ExprToken ExprToken::ident(std::string name, bool space) {
  ExprToken t;
  t.kind = TokenKind::identifier;
  t.text = std::move(name);
  t.space_before = space;
  return t;
}
ExprToken ExprToken::punct(std::string p, bool space) {
  ExprToken t;
  t.kind = TokenKind::punct;
  t.text = std::move(p);
  t.space_before = space;
  return t;
}
ExprToken ExprToken::oper(std::string o, bool space) {
  ExprToken t;
  t.kind = TokenKind::op;
  t.text = std::move(o);
  t.space_before = space;
  return t;
}
ExprToken ExprToken::integer(long v, bool space) {
  ExprToken t;
  t.kind = TokenKind::integer;
  t.text = std::to_string(v);
  t.space_before = space;
  return t;
}

ExprTokenStream lex(std::string_view text, const SourceSpan &where) {
  ExprTokenStream out;
  std::size_t i = 0;
  bool space = false;
  auto push = [&](TokenKind k, std::string t) {
    ExprToken tok;
    tok.kind = k;
    tok.text = std::move(t);
    tok.space_before = space;
    out.push_back(std::move(tok));
    space = false;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      space = true;
      ++i;
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j]))
        ++j;
      push(TokenKind::identifier, to_lower(text.substr(i, j - i)));
      i = j;
      continue;
    }
    if (digit(c) || (c == '.' && i + 1 < text.size() && digit(text[i + 1]))) {
      bool is_real = c == '.';
      std::size_t j = i;
      if (c == '.') {
        j = i + 1;
        while (j < text.size() && digit(text[j]))
          ++j;
        if (j < text.size() && std::strchr("eEdD", text[j])) {
          std::size_t k = j + 1;
          if (k < text.size() && (text[k] == '+' || text[k] == '-'))
            ++k;
          if (k < text.size() && digit(text[k])) {
            j = k;
            while (j < text.size() && digit(text[j]))
              ++j;
          }
        }
      } else {
        j = lex_number(text, i, is_real);
      }
      push(is_real ? TokenKind::real : TokenKind::integer,
           to_lower(text.substr(i, j - i)));
      i = j;
      continue;
    }
    if (c == '\'' || c == '"') {
      std::size_t j = i + 1;
      bool closed = false;
      while (j < text.size()) {
        if (text[j] == c) {
          if (j + 1 < text.size() && text[j + 1] == c) {
            j += 2;
            continue;
          }
          closed = true;
          ++j;
          break;
        }
        ++j;
      }
      if (!closed)
        throw MigrationError(where, "unterminated character literal");
      push(TokenKind::string, std::string(text.substr(i, j - i)));
      i = j;
      continue;
    }
    if (c == '.') {
      if (std::size_t n = dotted_word_at(text, i)) {
        std::string w = to_lower(text.substr(i, n));
        bool logical = w == ".true." || w == ".false.";
        push(logical ? TokenKind::logical : TokenKind::op, w);
        i += n;
        continue;
      }
      push(TokenKind::punct, ".");
      ++i;
      continue;
    }
    static constexpr std::array kTwoChar = {"**", "//", "==", "/=", "<=",
                                            ">=", "=>"};
    bool matched = false;
    for (auto op : kTwoChar) {
      if (text.substr(i, 2) == op) {
        push(TokenKind::op, op);
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched)
      continue;
    if (std::strchr("+-*/=<>%", c)) {
      push(TokenKind::op, std::string(1, c));
      ++i;
      continue;
    }
    if (std::strchr("(),:;$&", c)) {
      push(TokenKind::punct, std::string(1, c));
      ++i;
      continue;
    }
    throw MigrationError(where, std::string("unexpected character '") + c + "'");
  }
  return out;
}

std::size_t matching_paren(const ExprTokenStream &tokens, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < tokens.size(); ++i) {
    if (tokens[i].is_punct("("))
      ++depth;
    else if (tokens[i].is_punct(")")) {
      if (--depth == 0)
        return i;
    }
  }
  return std::string::npos;
}

std::vector<ExprTokenStream> split_top_level(const ExprTokenStream &tokens,
                                             std::string_view sep) {
  std::vector<ExprTokenStream> parts(1);
  int depth = 0;
  for (const auto &t : tokens) {
    if (t.is_punct("("))
      ++depth;
    else if (t.is_punct(")"))
      --depth;
    if (depth == 0 && t.kind == TokenKind::punct && t.text == sep) {
      parts.emplace_back();
      continue;
    }
    parts.back().push_back(t);
  }
  if (parts.size() == 1 && parts[0].empty())
    parts.clear();
  return parts;
}

ExprTokenStream scan_expression(const ExprTokenStream &tokens,
                                const SourceSpan &where) {
  ExprTokenStream out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const ExprToken &t = tokens[i];

    // `p.f` (and chains `p.f.g`) fold into dotted accesses.
    bool can_be_base =
        !out.empty() && (out.back().is_ident() ||
                         out.back().kind == TokenKind::dotted_access);
    if (t.is_punct(".") && can_be_base && i + 1 < tokens.size() &&
        tokens[i + 1].is_ident() && !tokens[i + 1].space_before) {
      ExprToken acc;
      acc.kind = TokenKind::dotted_access;
      acc.space_before = out.back().space_before;
      out.back().space_before = false;
      acc.base.push_back(std::move(out.back()));
      out.pop_back();
      acc.field = tokens[i + 1].text;
      acc.text = acc.field;
      i += 2;
      if (i < tokens.size() && tokens[i].is_punct("(") &&
          !(i + 1 < tokens.size() && tokens[i + 1].is_op("/"))) {
        std::size_t close = matching_paren(tokens, i);
        if (close == std::string::npos)
          throw MigrationError(where, "unbalanced parentheses after ." + acc.field);
        ExprTokenStream inner(tokens.begin() + static_cast<long>(i) + 1,
                              tokens.begin() + static_cast<long>(close));
        acc.has_args = true;
        acc.args = scan_expression(inner, where);
        i = close + 1;
      }
      out.push_back(std::move(acc));
      continue;
    }

    // `a(/k)` folds into a slash dimension when it follows an array access.
    if (t.is_punct("(") && i + 1 < tokens.size() && tokens[i + 1].is_op("/") &&
        can_be_base) {
      std::size_t close = matching_paren(tokens, i);
      bool ok = close == i + 3 && tokens[i + 2].kind == TokenKind::integer;
      if (!ok)
        throw MigrationError(where,
                             "slash notation needs an integer literal dimension");
      int dim = std::stoi(tokens[i + 2].text);
      if (dim < 1)
        throw MigrationError(where, "slash dimension must be at least 1");
      ExprToken sd;
      sd.kind = TokenKind::slash_dim;
      sd.space_before = out.back().space_before;
      out.back().space_before = false;
      sd.base.push_back(std::move(out.back()));
      out.pop_back();
      sd.dim = dim;
      out.push_back(std::move(sd));
      i = close + 1;
      continue;
    }
    out.push_back(t);
    ++i;
  }
  return out;
}

namespace {

void render_into(std::string &out, const ExprTokenStream &tokens,
                 bool canonical) {
  bool first = true;
  for (const auto &t : tokens) {
    bool space = canonical ? !first : t.space_before;
    if (canonical && !first) {
      // keep canonical output compact around punctuation
      space = !(t.is_punct(")") || t.is_punct(",") || t.is_punct("(") ||
                (!out.empty() && (out.back() == '(')));
    }
    if (space && !out.empty())
      out += ' ';
    switch (t.kind) {
    case TokenKind::dotted_access:
      render_into(out, t.base, canonical);
      out += '.';
      out += t.field;
      if (t.has_args) {
        out += '(';
        render_into(out, t.args, canonical);
        out += ')';
      }
      break;
    case TokenKind::slash_dim:
      render_into(out, t.base, canonical);
      out += "(/" + std::to_string(t.dim) + ")";
      break;
    default:
      out += t.text;
    }
    first = false;
  }
}

void flatten_into(ExprTokenStream &out, const ExprToken &t) {
  switch (t.kind) {
  case TokenKind::dotted_access: {
    for (const auto &b : t.base)
      flatten_into(out, b);
    if (!t.base.empty())
      out.back().space_before = t.space_before;
    out.push_back(ExprToken::punct("."));
    out.push_back(ExprToken::ident(t.field));
    if (t.has_args) {
      out.push_back(ExprToken::punct("("));
      for (const auto &a : t.args)
        flatten_into(out, a);
      out.push_back(ExprToken::punct(")"));
    }
    break;
  }
  case TokenKind::slash_dim: {
    for (const auto &b : t.base)
      flatten_into(out, b);
    out.push_back(ExprToken::punct("("));
    out.push_back(ExprToken::oper("/"));
    out.push_back(ExprToken::integer(t.dim));
    out.push_back(ExprToken::punct(")"));
    break;
  }
  default:
    out.push_back(t);
  }
}

} // namespace

std::string render_tokens(const ExprTokenStream &tokens) {
  std::string out;
  render_into(out, tokens, false);
  return out;
}

std::string canonical_text(const ExprTokenStream &tokens) {
  std::string out;
  render_into(out, tokens, true);
  return out;
}

ExprTokenStream flatten(const ExprTokenStream &tokens) {
  ExprTokenStream out;
  for (const auto &t : tokens)
    flatten_into(out, t);
  return out;
}

ExprTokenStream without_spacing(ExprTokenStream tokens) {
  for (auto &t : tokens) {
    t.space_before = false;
    t.base = without_spacing(std::move(t.base));
    t.args = without_spacing(std::move(t.args));
  }
  return tokens;
}

} // namespace segmig
