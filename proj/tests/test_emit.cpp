#include "segmig/emit.hpp"
#include "segmig/tokens.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace segmig;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> lines_of(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);)
    out.push_back(l);
  return out;
}

TargetNode user_type_block() {
  return TargetNode::container(
      NodeKind::derived_type, "type, extends(segment) :: user", "end type user",
      {TargetNode::decl("integer, private :: ubbcnt = 0"),
       TargetNode::decl("character(len=40), public :: uname = ''"),
       TargetNode::decl("integer, pointer, public :: ubb(:) => null()")});
}

// Joins `&`-continued lines back into one statement.
std::string unsplit(const std::vector<std::string> &lines) {
  std::string out;
  for (auto l : lines) {
    auto start = l.find_first_not_of(' ');
    l = l.substr(start);
    if (!l.empty() && l.back() == '&') {
      l.pop_back();
      while (!l.empty() && l.back() == ' ')
        l.pop_back();
      out += l + " ";
    } else {
      out += l;
    }
  }
  return out;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string &name) {
  fs::path p = fs::temp_directory_path() / ("segmig_emit_" + name);
  fs::remove_all(p);
  return p;
}

} // namespace

TEST_CASE("render: type block fields are one level deeper than the type line") {
  TargetNode mod = TargetNode::container(
      NodeKind::module, "module user_mod", "end module user_mod",
      {TargetNode::stmt("implicit none"), TargetNode::stmt("private"), user_type_block()});
  auto ls = lines_of(render_unit(mod));
  REQUIRE(ls.size() == 9);
  CHECK(ls[3] == "  type, extends(segment) :: user");
  CHECK(ls[4] == "    integer, private :: ubbcnt = 0");
  CHECK(ls[5] == "    character(len=40), public :: uname = ''");
  CHECK(ls[6] == "    integer, pointer, public :: ubb(:) => null()");
  CHECK(ls[7] == "  end type user");
}

TEST_CASE("render: empty module is three lines and omits contains") {
  TargetNode mod = TargetNode::container(NodeKind::module, "module empty_mod",
                                         "end module empty_mod",
                                         {TargetNode::stmt("implicit none"),
                                          TargetNode::contains()});
  std::string text = render_unit(mod);
  CHECK(text == "module empty_mod\n  implicit none\nend module empty_mod\n");
  CHECK(text.find("contains") == std::string::npos);
}

TEST_CASE("render: contains is printed when procedures follow") {
  TargetNode mod = TargetNode::container(
      NodeKind::module, "module a_mod", "end module a_mod",
      {TargetNode::stmt("implicit none"), TargetNode::contains(),
       TargetNode::container(NodeKind::procedure, "subroutine a", "end subroutine a")});
  CHECK(render_unit(mod) ==
        "module a_mod\n  implicit none\ncontains\n  subroutine a\n  end subroutine a\nend "
        "module a_mod\n");
}

TEST_CASE("render: block structure from indent and dedent flags") {
  TargetNode ifs = TargetNode::stmt("if (x > 0) then");
  ifs.indent_after = 1;
  TargetNode els = TargetNode::stmt("else");
  els.dedent_before = 1;
  els.indent_after = 1;
  TargetNode endif = TargetNode::stmt("end if");
  endif.dedent_before = 1;
  TargetNode doloop = TargetNode::stmt("do 10 i = 1, n");
  doloop.indent_after = 1;
  TargetNode term = TargetNode::stmt("continue");
  term.label = 10;
  term.dedent_after = 1;
  TargetNode proc = TargetNode::container(
      NodeKind::procedure, "subroutine s", "end subroutine s",
      {ifs, TargetNode::stmt("y = 1"), els, TargetNode::stmt("y = 2"), endif, doloop,
       TargetNode::stmt("y = y + i"), term, TargetNode::stmt("return")});
  CHECK(render_unit(proc) == "subroutine s\n"
                             "  if (x > 0) then\n"
                             "    y = 1\n"
                             "  else\n"
                             "    y = 2\n"
                             "  end if\n"
                             "  do 10 i = 1, n\n"
                             "    y = y + i\n"
                             "    10 continue\n"
                             "  return\n"
                             "end subroutine s\n");
}

TEST_CASE("render: configurable indentation and keyword case") {
  RenderConfig cfg;
  cfg.indent_width = 4;
  TargetNode mod = TargetNode::container(NodeKind::module, "module m", "end module m",
                                         {TargetNode::stmt("implicit none")});
  CHECK(render_unit(mod, cfg) == "module m\n    implicit none\nend module m\n");
  cfg.keyword_case = KeywordCase::upper;
  std::string up = render_unit(mod, cfg);
  CHECK(up.find("IMPLICIT NONE") != std::string::npos);
  CHECK(up.find("MODULE") != std::string::npos);
}

TEST_CASE("render: comments keep their text and the current indentation") {
  TargetNode proc = TargetNode::container(
      NodeKind::procedure, "subroutine s", "end subroutine s",
      {TargetNode::comment("! the user does not have a book yet ")});
  auto ls = lines_of(render_unit(proc));
  REQUIRE(ls.size() == 3);
  // trailing blanks are trimmed from every line
  CHECK(ls[1] == "  ! the user does not have a book yet");
}

TEST_CASE("render: output ends lines with LF only") {
  TargetNode mod = TargetNode::container(NodeKind::module, "module m", "end module m");
  std::string text = render_unit(mod);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.back() == '\n');
}

TEST_CASE("render config: ranges are validated") {
  RenderConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.indent_width = 0;
  CHECK_THROWS_AS(cfg.validate(), MigrationError);
  cfg.indent_width = 9;
  CHECK_THROWS_AS(cfg.validate(), MigrationError);
  cfg.indent_width = 8;
  cfg.max_line_length = 71;
  CHECK_THROWS_AS(cfg.validate(), MigrationError);
  cfg.max_line_length = 133;
  CHECK_THROWS_AS(cfg.validate(), MigrationError);
  cfg.max_line_length = 72;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("render: a 150-column call splits into continued lines with the same tokens") {
  std::string call = "call process_inventory(";
  for (int i = 0; call.size() < 146; ++i)
    call += (i ? ", " : "") + std::string("argument_") + std::to_string(i);
  call += ")";
  REQUIRE(call.size() >= 150);
  TargetNode proc = TargetNode::container(NodeKind::procedure, "subroutine s",
                                          "end subroutine s", {TargetNode::stmt(call)});
  auto ls = lines_of(render_unit(proc));
  REQUIRE(ls.size() == 4);
  CHECK(ls[1].back() == '&');
  for (const auto &l : ls)
    CHECK(l.size() <= 132);
  std::vector<std::string> stmt(ls.begin() + 1, ls.end() - 1);
  CHECK(without_spacing(lex(unsplit(stmt))) == without_spacing(lex(call)));
}

TEST_CASE("render: splitting never breaks inside a character literal") {
  RenderConfig cfg;
  cfg.max_line_length = 72;
  std::string line = "  write(*, *) 'a literal with spaces that would be tempting to cut', x, y, z";
  auto parts = split_long_line(line, cfg);
  REQUIRE(parts.size() >= 2);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    auto quotes = std::count(parts[i].begin(), parts[i].end(), '\'');
    CHECK(quotes % 2 == 0);
  }
  CHECK(without_spacing(lex(unsplit(parts))) == without_spacing(lex(line)));
}

TEST_CASE("render property: no statement line exceeds the limit for random calls") {
  std::mt19937 rng(7);
  for (int limit : {72, 100, 132}) {
    RenderConfig cfg;
    cfg.max_line_length = limit;
    for (int round = 0; round < 50; ++round) {
      std::string call = "call r(";
      int n = 5 + static_cast<int>(rng() % 60);
      for (int i = 0; i < n; ++i)
        call += (i ? ", " : "") + std::string(1 + rng() % 12, 'a' + static_cast<char>(rng() % 26));
      call += ")";
      TargetNode p = TargetNode::container(NodeKind::procedure, "subroutine s",
                                           "end subroutine s", {TargetNode::stmt(call)});
      auto ls = lines_of(render_unit(p, cfg));
      for (const auto &l : ls)
        CHECK(static_cast<int>(l.size()) <= limit);
      std::vector<std::string> stmt(ls.begin() + 1, ls.end() - 1);
      CHECK(without_spacing(lex(unsplit(stmt))) == without_spacing(lex(call)));
    }
  }
}

TEST_CASE("render property: rendering is deterministic") {
  TargetNode mod = TargetNode::container(
      NodeKind::module, "module user_mod", "end module user_mod",
      {TargetNode::stmt("implicit none"), user_type_block(), TargetNode::contains(),
       TargetNode::templ(TemplateRole::procedure, "t",
                         "subroutine {1}_x()\n  call y\nend subroutine {1}_x", {{"1", "user"}})});
  CHECK(render_unit(mod) == render_unit(mod));
}

TEST_CASE("template: placeholder substitution") {
  TargetNode t = TargetNode::templ(TemplateRole::declaration, "binding",
                                   "procedure :: segini => {1}_segini", {{"1", "user"}});
  auto out = expand_template(t, 0);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "procedure :: segini => user_segini");
}

TEST_CASE("template: no placeholders gives the text re-indented") {
  TargetNode t = TargetNode::templ(TemplateRole::statement, "plain", "    x = 1\n      y = 2");
  auto out = expand_template(t, 1);
  REQUIRE(out.size() == 2);
  CHECK(out[0] == "  x = 1");
  CHECK(out[1] == "    y = 2");
}

TEST_CASE("template: three lines at depth 2 shift by twice the indent width") {
  TargetNode t = TargetNode::templ(TemplateRole::statement, "three",
                                   "if (a) then\n  b = {v}\nend if", {{"v", "7"}});
  auto out = expand_template(t, 2);
  REQUIRE(out.size() == 3);
  CHECK(out[0] == "    if (a) then");
  CHECK(out[1] == "      b = 7");
  CHECK(out[2] == "    end if");
}

TEST_CASE("template property: expansion is indentation-equivariant") {
  std::mt19937 rng(11);
  for (int width : {1, 2, 3, 4, 8}) {
    RenderConfig cfg;
    cfg.indent_width = width;
    for (int round = 0; round < 20; ++round) {
      std::string text;
      int n = 1 + static_cast<int>(rng() % 6);
      for (int i = 0; i < n; ++i)
        text += std::string(rng() % 7, ' ') + "line" + std::to_string(i) + " {a}\n";
      TargetNode t = TargetNode::templ(TemplateRole::statement, "r", text, {{"a", "q"}});
      for (int d = 0; d < 4; ++d) {
        auto at = expand_template(t, d, cfg);
        auto next = expand_template(t, d + 1, cfg);
        REQUIRE(at.size() == next.size());
        for (std::size_t i = 0; i < at.size(); ++i)
          CHECK(next[i] == std::string(static_cast<std::size_t>(width), ' ') + at[i]);
      }
    }
  }
}

TEST_CASE("template: an unbound placeholder is an error naming the template") {
  TargetNode t = TargetNode::templ(TemplateRole::statement, "segini_call",
                                   "call {1}_segini(p)", {});
  try {
    expand_template(t, 0);
    FAIL("expected an error");
  } catch (const MigrationError &e) {
    std::string msg = e.what();
    CHECK(msg.find("segini_call") != std::string::npos);
    CHECK(msg.find("{1}") != std::string::npos);
  }
  TargetNode mod = TargetNode::container(NodeKind::module, "module m", "end module m", {t});
  CHECK_THROWS_AS(render_unit(mod), MigrationError);
}

TEST_CASE("template: braces that are not placeholders are kept") {
  TargetNode t = TargetNode::templ(TemplateRole::statement, "fmt", "write(*, '(a)') '{ }'");
  CHECK(expand_template(t, 0)[0] == "write(*, '(a)') '{ }'");
}

TEST_CASE("write_tree: files, line counts and no temporaries left") {
  fs::path dir = scratch("basic");
  std::vector<OutputFile> outs = {{"a.f90", "module a\nend module a\n"},
                                  {"sub/b.f90", "program b\nend program b\n"}};
  WriteReport r = write_tree(outs, dir.string());
  CHECK(r.ok());
  REQUIRE(r.files.size() == 2);
  CHECK(r.files[0].lines == 2);
  CHECK(slurp(dir / "a.f90") == outs[0].text);
  CHECK(slurp(dir / "sub/b.f90") == outs[1].text);
  for (auto &e : fs::recursive_directory_iterator(dir))
    CHECK(e.path().extension() != ".tmp");
  CHECK(r.text() == "a.f90 2 lines\nsub/b.f90 2 lines\n");
  fs::remove_all(dir);
}

TEST_CASE("write_tree: a second identical run gives byte-identical files") {
  fs::path dir = scratch("twice");
  std::vector<OutputFile> outs = {{"x.f90", "module x\n  implicit none\nend module x\n"}};
  WriteReport a = write_tree(outs, dir.string());
  std::string first = slurp(dir / "x.f90");
  WriteReport b = write_tree(outs, dir.string());
  CHECK(slurp(dir / "x.f90") == first);
  CHECK(a.text() == b.text());
  fs::remove_all(dir);
}

TEST_CASE("write_tree: empty output set gives an empty report") {
  fs::path dir = scratch("empty");
  WriteReport r = write_tree({}, dir.string());
  CHECK(r.ok());
  CHECK(r.files.empty());
  CHECK(r.text().empty());
}

TEST_CASE("write_tree: an unwritable output directory is reported per file") {
  fs::path base = scratch("blocked");
  fs::create_directories(base);
  // a regular file where the directory should be fails even for root
  std::ofstream(base / "out") << "not a directory";
  WriteReport r = write_tree({{"a.f90", "x\n"}, {"b.f90", "y\n"}}, (base / "out").string());
  CHECK_FALSE(r.ok());
  REQUIRE(r.files.size() == 2);
  CHECK_FALSE(r.files[0].error.empty());
  CHECK_FALSE(r.files[1].error.empty());
  CHECK(r.text().find("error") != std::string::npos);

  fs::path ro = base / "ro";
  fs::create_directories(ro);
  fs::permissions(ro, fs::perms::owner_read | fs::perms::owner_exec);
  bool enforced = !std::ofstream(ro / "probe");
  if (enforced) {
    WriteReport r2 = write_tree({{"a.f90", "x\n"}}, ro.string());
    CHECK_FALSE(r2.ok());
  }
  fs::permissions(ro, fs::perms::owner_all);
  fs::remove_all(base);
}

TEST_CASE("write_tree: latin-1 output encoding") {
  fs::path dir = scratch("latin1");
  write_tree({{"c.f90", "! caf\xC3\xA9\n"}}, dir.string(), Encoding::latin1);
  CHECK(slurp(dir / "c.f90") == "! caf\xE9\n");
  fs::remove_all(dir);
}
