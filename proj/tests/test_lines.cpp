#include <doctest.h>

#include "segmig/lines.hpp"
#include "segmig/tokens.hpp"

#include <random>

using namespace segmig;

namespace {

std::string card(const std::string &body, char cont = ' ', const std::string &label = "") {
  std::string l = label;
  l.resize(5, ' ');
  return l + cont + body;
}

// Independent model of continuation merging: non-final card bodies lose
// trailing blanks unless a character literal is still open, in which case
// the body is padded to its full 66 columns.
std::string oracle_merge(const std::vector<std::string> &bodies) {
  std::string out;
  char quote = 0;
  for (std::size_t k = 0; k < bodies.size(); ++k) {
    std::string b = bodies[k];
    for (std::size_t i = 0; i < b.size(); ++i) {
      char c = b[i];
      if (quote && c == quote)
        quote = 0;
      else if (!quote && (c == '\'' || c == '"'))
        quote = c;
    }
    if (k + 1 < bodies.size()) {
      if (quote)
        b.resize(66, ' ');
      else
        while (!b.empty() && b.back() == ' ')
          b.pop_back();
    } else {
      while (!b.empty() && b.back() == ' ')
        b.pop_back();
    }
    out += b;
  }
  return out;
}

} // namespace

TEST_CASE("comment line from the user example") {
  auto ls = split_logical_lines("C the user does not have a book yet \n");
  REQUIRE(ls.size() == 1);
  CHECK(ls[0].kind == LineKind::comment);
  CHECK(ls[0].text == " the user does not have a book yet");
  CHECK(ls[0].span.start_line == 1);
}

TEST_CASE("empty file gives no lines") {
  CHECK(split_logical_lines("").empty());
}

TEST_CASE("star and lowercase comment markers") {
  auto ls = split_logical_lines("* star\nc lower\n! bang\n");
  REQUIRE(ls.size() == 3);
  for (auto &l : ls)
    CHECK(l.kind == LineKind::comment);
}

TEST_CASE("two cards merge into one statement") {
  std::string src = card("CALL FOO(A,") + "\n" + card("    B)", '1') + "\n";
  auto ls = split_logical_lines(src);
  REQUIRE(ls.size() == 1);
  CHECK(ls[0].kind == LineKind::statement);
  CHECK(ls[0].text == "CALL FOO(A,    B)");
  CHECK(ls[0].span.start_line == 1);
  CHECK(ls[0].span.end_line == 2);
}

TEST_CASE("label and columns beyond 72 are handled") {
  std::string body = "X = 1";
  body.resize(66, ' ');
  std::string src = card(body, ' ', "  100") + "SEQ00010\n";
  auto ls = split_logical_lines(src);
  REQUIRE(ls.size() == 1);
  CHECK(ls[0].label == 100);
  CHECK(ls[0].text == "X = 1");
}

TEST_CASE("tabs expand to multiples of eight") {
  CHECK(expand_tabs("\tX") == "        X");
  CHECK(expand_tabs("ab\tc") == "ab      c");
  auto ls = split_logical_lines("\tX = 1\n");
  // a leading tab lands on column 9, inside the statement field
  REQUIRE(ls.size() == 1);
  CHECK(ls[0].text == "  X = 1");
}

TEST_CASE("continuation without a statement is an error") {
  CHECK_THROWS_AS(split_logical_lines(card("X", '1')), MigrationError);
  try {
    split_logical_lines("C c\n" + card("X", '&'));
  } catch (const MigrationError &e) {
    CHECK(e.diagnostics().front().span.start_line == 2);
  }
}

TEST_CASE("non-numeric label is an error") {
  CHECK_THROWS_AS(split_logical_lines(card("X = 1", ' ', "1A")), MigrationError);
}

TEST_CASE("comments between cards are kept after the statement") {
  std::string src = card("X = A +") + "\nC inside\n" + card("B", '+') + "\n";
  auto ls = split_logical_lines(src);
  REQUIRE(ls.size() == 2);
  CHECK(ls[0].text == "X = A +B");
  CHECK(ls[1].kind == LineKind::comment);
  CHECK(ls[1].text == " inside");
}

TEST_CASE("inline bang comment outside strings") {
  auto ls = split_logical_lines(card("X = 'a!b' ! note") + "\n");
  REQUIRE(ls.size() == 2);
  CHECK(ls[0].text == "X = 'a!b'");
  CHECK(ls[1].kind == LineKind::comment);
  CHECK(ls[1].text == " note");
}

TEST_CASE("directives and blank lines") {
  auto ls = split_logical_lines("#include \"user.seg\"\n\n      %INC BOOK\n-inc lib\n");
  REQUIRE(ls.size() == 4);
  CHECK(ls[0].kind == LineKind::directive);
  CHECK(ls[1].kind == LineKind::blank);
  CHECK(ls[2].kind == LineKind::directive);
  CHECK(ls[3].kind == LineKind::directive);
}

TEST_CASE("every input line is accounted for") {
  std::string src = "C a\n" + card("X = 1") + "\n\n" + card("Y =") + "\n" +
                    card("2", '1') + "\n* b\n";
  auto ls = split_logical_lines(src);
  int covered = 0;
  for (auto &l : ls)
    covered += l.span.end_line - l.span.start_line + 1;
  CHECK(covered == 6);
}

TEST_CASE("random card splits agree with the merge oracle") {
  std::mt19937 rng(20240611);
  const std::vector<std::string> atoms = {"alpha", "b", "=", "+", "(", ")", ",",
                                          "12", "3.5", "'it''s x'", "'a  b'",
                                          "call", "foo", ".eq.", "*"};
  for (int iter = 0; iter < 400; ++iter) {
    std::string stmt;
    int n = std::uniform_int_distribution<int>(1, 40)(rng);
    for (int k = 0; k < n; ++k) {
      if (k)
        stmt += ' ';
      stmt += atoms[std::uniform_int_distribution<std::size_t>(0, atoms.size() - 1)(rng)];
    }
    // Split into bodies of at most 66 columns, never right after a blank
    // (fixed form drops trailing blanks of a card).
    std::vector<std::string> bodies;
    std::size_t pos = 0;
    while (pos < stmt.size()) {
      std::size_t len = std::uniform_int_distribution<std::size_t>(1, 66)(rng);
      len = std::min(len, stmt.size() - pos);
      while (len > 1 && pos + len < stmt.size() && stmt[pos + len - 1] == ' ')
        --len;
      bodies.push_back(stmt.substr(pos, len));
      pos += len;
    }
    if (bodies.size() > 19)
      continue;
    std::string src;
    for (std::size_t k = 0; k < bodies.size(); ++k)
      src += card(bodies[k], k == 0 ? ' ' : static_cast<char>('0' + (k % 9) + 1)) + "\n";
    auto ls = split_logical_lines(src);
    REQUIRE(ls.size() == 1);
    CHECK(ls[0].text == oracle_merge(bodies));
    CHECK(ls[0].span.end_line == static_cast<int>(bodies.size()));
    bool split_in_string = ls[0].text.size() != stmt.size();
    if (!split_in_string)
      CHECK(without_spacing(lex(ls[0].text)) == without_spacing(lex(stmt)));
  }
}
