#include "segmig/lines.hpp"

#include <cctype>
#include <cstring>

namespace segmig {

namespace {

constexpr int kLabelEnd = 5;
constexpr int kContinuationCol = 6;
constexpr int kBodyStart = 7;
constexpr int kBodyEnd = 72;
constexpr std::size_t kBodyWidth = kBodyEnd - kBodyStart + 1;

// Byte offsets of each column start, plus one past the end. UTF-8 counts
// code points; Latin-1 counts bytes.
std::vector<std::size_t> column_offsets(std::string_view line, Encoding enc) {
  std::vector<std::size_t> offs;
  offs.reserve(line.size() + 1);
  for (std::size_t i = 0; i < line.size(); ++i) {
    auto c = static_cast<unsigned char>(line[i]);
    if (enc == Encoding::utf8 && (c & 0xC0) == 0x80)
      continue;
    offs.push_back(i);
  }
  offs.push_back(line.size());
  return offs;
}

// Columns [from, to] (1-based, inclusive), clipped to the line.
std::string_view column_slice(std::string_view line,
                              const std::vector<std::size_t> &offs, int from,
                              int to) {
  int ncols = static_cast<int>(offs.size()) - 1;
  if (from > ncols)
    return {};
  int last = std::min(to, ncols);
  return line.substr(offs[from - 1], offs[last] - offs[from - 1]);
}

int column_count(const std::vector<std::size_t> &offs) {
  return static_cast<int>(offs.size()) - 1;
}

std::string rtrim(std::string_view s) {
  std::size_t n = s.size();
  while (n > 0 && (s[n - 1] == ' ' || s[n - 1] == '\r'))
    --n;
  return std::string(s.substr(0, n));
}

bool is_blank(std::string_view s) {
  for (char c : s)
    if (c != ' ' && c != '\r')
      return false;
  return true;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size())
    return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i])
      return false;
  return true;
}

bool is_esope_include(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && line[i] == ' ')
    ++i;
  auto rest = line.substr(i);
  if (!starts_with_ci(rest, "%inc") && !starts_with_ci(rest, "-inc"))
    return false;
  return rest.size() == 4 || rest[4] == ' ';
}

// Tracks an open character literal across cards so '!' inside strings is
// not mistaken for a comment and split literals keep their padding.
struct StringState {
  char quote = 0;

  // Returns the byte offset of an inline '!' comment, or npos.
  std::size_t scan(std::string_view body) {
    for (std::size_t i = 0; i < body.size(); ++i) {
      char c = body[i];
      if (quote) {
        if (c == quote) {
          if (i + 1 < body.size() && body[i + 1] == quote)
            ++i;
          else
            quote = 0;
        }
      } else if (c == '\'' || c == '"') {
        quote = c;
      } else if (c == '!') {
        return i;
      }
    }
    return std::string_view::npos;
  }
};

} // namespace

std::string expand_tabs(std::string_view line) {
  std::string out;
  out.reserve(line.size());
  for (char c : line) {
    if (c == '\t') {
      std::size_t next = (out.size() / 8 + 1) * 8;
      out.append(next - out.size(), ' ');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::vector<LogicalLine> split_logical_lines(std::string_view source,
                                             FileId file, Encoding enc) {
  std::vector<LogicalLine> out;
  // Comments met between an initial card and its continuations are emitted
  // after the merged statement.
  std::vector<LogicalLine> held;
  std::optional<std::size_t> open_stmt;
  StringState strings;
  bool last_card_padded = false;

  auto flush_held = [&] {
    for (auto &h : held)
      out.push_back(std::move(h));
    held.clear();
  };
  auto close_stmt = [&] {
    if (open_stmt) {
      auto &stmt = out[*open_stmt];
      stmt.text = rtrim(stmt.text);
      open_stmt.reset();
    }
    flush_held();
  };

  int lineno = 0;
  std::size_t pos = 0;
  while (pos < source.size()) {
    std::size_t nl = source.find('\n', pos);
    std::string_view raw = nl == std::string_view::npos
                               ? source.substr(pos)
                               : source.substr(pos, nl - pos);
    pos = nl == std::string_view::npos ? source.size() : nl + 1;
    ++lineno;

    std::string line = expand_tabs(raw);
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    auto offs = column_offsets(line, enc);
    int ncols = column_count(offs);

    auto whole_span = [&](int first_col) {
      return SourceSpan{file, lineno, first_col, lineno, std::max(ncols, first_col)};
    };

    if (is_blank(line)) {
      LogicalLine l{LineKind::blank, std::nullopt, "", whole_span(1)};
      (open_stmt ? held : out).push_back(std::move(l));
      continue;
    }

    char c1 = line[0];
    if (c1 == 'C' || c1 == 'c' || c1 == '*' || c1 == '!') {
      LogicalLine l{LineKind::comment, std::nullopt,
                    rtrim(std::string_view(line).substr(1)), whole_span(1)};
      (open_stmt ? held : out).push_back(std::move(l));
      continue;
    }
    if (c1 == '#' || is_esope_include(line)) {
      close_stmt();
      out.push_back({LineKind::directive, std::nullopt, rtrim(line),
                     whole_span(1)});
      continue;
    }

    auto label_field = column_slice(line, offs, 1, kLabelEnd);
    auto cont_field = column_slice(line, offs, kContinuationCol, kContinuationCol);
    auto body_view = column_slice(line, offs, kBodyStart, kBodyEnd);
    bool continuation = !cont_field.empty() && cont_field != " " && cont_field != "0";

    if (!continuation)
      strings.quote = 0;
    std::string body(body_view);
    std::size_t bang = strings.scan(body);
    std::optional<LogicalLine> trailing;
    if (bang != std::string::npos) {
      int col = kBodyStart + static_cast<int>(bang);
      trailing = LogicalLine{LineKind::comment, std::nullopt,
                             rtrim(std::string_view(body).substr(bang + 1)),
                             SourceSpan{file, lineno, col, lineno,
                                        std::max(ncols, col)}};
      body.resize(bang);
    }
    int body_end_col = std::min(ncols, kBodyEnd);

    if (continuation) {
      if (!is_blank(label_field))
        throw MigrationError(SourceSpan{file, lineno, 1, lineno, kLabelEnd},
                             "continuation card carries a label");
      if (!open_stmt)
        throw MigrationError(whole_span(1),
                             "continuation card with no preceding statement");
      auto &stmt = out[*open_stmt];
      if (!last_card_padded)
        stmt.text = rtrim(stmt.text);
      stmt.text += body;
      stmt.span.end_line = lineno;
      stmt.span.end_col = std::max(body_end_col, kBodyStart);
    } else {
      close_stmt();
      std::optional<int> label;
      if (!is_blank(label_field)) {
        int value = 0;
        bool seen_digit = false;
        for (char ch : label_field) {
          if (ch == ' ')
            continue;
          if (!std::isdigit(static_cast<unsigned char>(ch)))
            throw MigrationError(SourceSpan{file, lineno, 1, lineno, kLabelEnd},
                                 "invalid character in label field");
          value = value * 10 + (ch - '0');
          seen_digit = true;
        }
        if (seen_digit)
          label = value;
      }
      out.push_back({LineKind::statement, label, body,
                     SourceSpan{file, lineno, kBodyStart, lineno,
                                std::max(body_end_col, kBodyStart)}});
      open_stmt = out.size() - 1;
    }

    // A literal left open at the end of the card continues on the next one;
    // blank padding up to column 72 is part of its value.
    last_card_padded = strings.quote != 0;
    if (last_card_padded) {
      auto &stmt = out[*open_stmt];
      auto have = static_cast<std::size_t>(
          std::max(0, std::min(ncols, kBodyEnd) - kBodyStart + 1));
      if (have < kBodyWidth)
        stmt.text.append(kBodyWidth - have, ' ');
    }
    if (trailing)
      held.push_back(std::move(*trailing));
  }
  close_stmt();
  return out;
}

} // namespace segmig
