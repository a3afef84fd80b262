#pragma once

// Free-form Fortran checker independent of the migration library: it reads
// rendered text only. Reports, per top-level program unit, the number of
// `implicit none` statements and every name referenced without a
// declaration, host association, use association or intrinsic meaning.

#include <algorithm>
#include <cctype>
#include <cstring>
#include <map>
#include <regex>
#include <sstream>
#include <set>
#include <string>
#include <vector>

namespace f90check {

struct Tok {
  enum Kind { name, number, string, dotop, punct } kind;
  std::string text;
};

struct Statement {
  int line = 0;
  std::vector<Tok> toks;
};

struct Issue {
  std::string file;
  std::string unit;
  int line = 0;
  std::string message;
};

struct UnitReport {
  std::string file;
  std::string kind; // module, program, block data
  std::string name;
  int implicit_none = 0;
};

struct Report {
  std::vector<UnitReport> units;
  std::vector<Issue> issues;
};

inline std::string lower(std::string s) {
  for (auto &c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
inline bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Drops a trailing `!` comment (outside strings).
inline std::string strip_comment(const std::string &l) {
  char q = 0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    char c = l[i];
    if (q) {
      if (c == q)
        q = 0;
    } else if (c == '\'' || c == '"') {
      q = c;
    } else if (c == '!') {
      return l.substr(0, i);
    }
  }
  return l;
}

inline std::vector<Tok> tokenize(const std::string &s) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '\'' || c == '"') {
      std::size_t j = i + 1;
      while (j < s.size()) {
        if (s[j] == c) {
          if (j + 1 < s.size() && s[j + 1] == c) {
            j += 2;
            continue;
          }
          break;
        }
        ++j;
      }
      out.push_back({Tok::string, s.substr(i, j - i + 1)});
      i = j + 1;
    } else if (c == '.' && i + 1 < s.size() && std::isalpha(static_cast<unsigned char>(s[i + 1]))) {
      std::size_t j = i + 1;
      while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j])))
        ++j;
      if (j < s.size() && s[j] == '.') {
        out.push_back({Tok::dotop, lower(s.substr(i, j - i + 1))});
        i = j + 1;
      } else {
        out.push_back({Tok::punct, "."});
        ++i;
      }
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])))
        ++j;
      if (j < s.size() && s[j] == '.') {
        // `1.eq.2`: the dot starts an operator
        std::size_t k = j + 1;
        while (k < s.size() && std::isalpha(static_cast<unsigned char>(s[k])))
          ++k;
        bool op = k > j + 1 && k < s.size() && s[k] == '.';
        if (!op) {
          ++j;
          while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])))
            ++j;
        }
      }
      if (j < s.size() && std::strchr("eEdD", s[j]) && j + 1 < s.size() &&
          (std::isdigit(static_cast<unsigned char>(s[j + 1])) || s[j + 1] == '+' || s[j + 1] == '-')) {
        j += 2;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])))
          ++j;
      }
      if (j < s.size() && s[j] == '_') {
        ++j;
        while (j < s.size() && is_name_char(s[j]))
          ++j;
      }
      out.push_back({Tok::number, s.substr(i, j - i)});
      i = j;
    } else if (is_name_start(c)) {
      std::size_t j = i;
      while (j < s.size() && is_name_char(s[j]))
        ++j;
      out.push_back({Tok::name, lower(s.substr(i, j - i))});
      i = j;
    } else {
      static const char *two[] = {"::", "=>", "==", "/=", "<=", ">=", "**", "//", "(/", "/)"};
      std::string p(1, c);
      for (const char *t : two)
        if (s.compare(i, 2, t) == 0) {
          p = t;
          break;
        }
      // `(/` only as an array constructor opener; keep `(` and `/` apart otherwise
      if (p == "(/" || p == "/)")
        p = std::string(1, c);
      out.push_back({Tok::punct, p});
      i += p.size();
    }
  }
  return out;
}

// Joins `&` continuations and drops comments and blank lines.
inline std::vector<Statement> statements(const std::string &text) {
  std::vector<Statement> out;
  std::string pending;
  int start = 0;
  int n = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos)
      nl = text.size();
    std::string raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++n;
    std::string l = strip_comment(raw);
    auto first = l.find_first_not_of(" \t");
    if (first == std::string::npos) {
      if (nl == text.size())
        break;
      continue;
    }
    l = l.substr(first);
    if (!pending.empty() && l[0] == '&')
      l = l.substr(1);
    if (pending.empty())
      start = n;
    auto last = l.find_last_not_of(" \t");
    if (last != std::string::npos && l[last] == '&') {
      pending += l.substr(0, last) + " ";
    } else {
      pending += l;
      out.push_back({start, tokenize(pending)});
      pending.clear();
    }
    if (nl == text.size())
      break;
  }
  return out;
}

inline const std::set<std::string> &intrinsics() {
  static const std::set<std::string> s = {
      "abs", "achar", "acos", "adjustl", "adjustr", "aimag", "aint", "all", "allocated", "alog",
      "alog10", "amax0", "amax1", "amin0", "amin1", "amod", "anint", "any", "asin", "associated",
      "atan", "atan2", "btest", "cabs", "ccos", "ceiling", "cexp", "char", "clog", "cmplx",
      "conjg", "cos", "cosh", "count", "cpu_time", "csin", "csqrt", "dabs", "dacos", "dasin",
      "datan", "datan2", "dble", "dcos", "dcosh", "ddim", "dexp", "digits", "dim", "dint",
      "dlog", "dlog10", "dmax1", "dmin1", "dmod", "dnint", "dot_product", "dprod", "dsign",
      "dsin", "dsinh", "dsqrt", "dtan", "dtanh", "epsilon", "exp", "float", "floor", "huge",
      "iabs", "iachar", "iand", "ichar", "idim", "idint", "idnint", "ieor", "ifix", "index",
      "int", "ior", "isign", "kind", "lbound", "len", "len_trim", "lge", "lgt", "lle", "llt",
      "log", "log10", "logical", "matmul", "max", "max0", "max1", "maxloc", "maxval", "merge",
      "min", "min0", "min1", "minloc", "minval", "mod", "modulo", "move_alloc", "nint", "not",
      "null", "present", "product", "random_number", "real", "repeat", "reshape", "scan",
      "selected_int_kind", "selected_real_kind", "shape", "sign", "sin", "sinh", "size",
      "sngl", "spread", "sqrt", "sum", "tan", "tanh", "tiny", "transpose", "trim", "ubound",
      "verify", "date_and_time", "system_clock", "get_command_argument", "command_argument_count",
      "execute_command_line", "new_line", "storage_size", "extends_type_of", "same_type_as"};
  return s;
}

inline bool is_type_keyword(const std::string &w) {
  return w == "integer" || w == "real" || w == "logical" || w == "character" ||
         w == "complex" || w == "double" || w == "doubleprecision";
}

class Checker {
public:
  void add_file(const std::string &path, const std::string &text) { parse(path, text); }

  Report run() {
    compute_exports();
    Report rep;
    for (auto &u : units_) {
      rep.units.push_back({u.file, u.kind, u.name, u.implicit_none});
      for (int s : u.scopes)
        resolve(s, u, rep);
    }
    return rep;
  }

private:
  struct UseSpec {
    std::string module;
    bool only = false;
    std::vector<std::pair<std::string, std::string>> names; // local, remote
    int line = 0;
  };
  struct Scope {
    std::string kind; // module, program, block data, procedure, interface_body
    std::string name;
    int parent = -1;
    bool host = true;
    std::set<std::string> declared;
    std::set<std::string> typed;
    std::set<std::string> external;
    std::set<std::string> invoked;
    std::vector<std::string> dummies;
    std::string result; // functions: the result variable
    bool has_prefix_type = false;
    std::vector<std::pair<std::string, int>> refs;
    std::vector<UseSpec> uses;
    std::set<std::string> imports;
    bool default_private = false;
    std::set<std::string> public_names, private_names;
    int header_line = 0;
  };
  struct Unit {
    std::string file, kind, name;
    int implicit_none = 0;
    std::vector<int> scopes;
  };

  std::vector<Scope> scopes_;
  std::vector<Unit> units_;
  std::map<std::string, int> modules_; // name -> scope
  std::map<std::string, std::set<std::string>> exports_;
  std::vector<Issue> parse_issues_;

  static std::vector<std::vector<Tok>> split_commas(const std::vector<Tok> &t, std::size_t from,
                                                    std::size_t to) {
    std::vector<std::vector<Tok>> out(1);
    int depth = 0;
    for (std::size_t i = from; i < to; ++i) {
      const Tok &k = t[i];
      if (k.kind == Tok::punct && k.text == "(")
        ++depth;
      if (k.kind == Tok::punct && k.text == ")")
        --depth;
      if (depth == 0 && k.kind == Tok::punct && k.text == ",") {
        out.emplace_back();
        continue;
      }
      out.back().push_back(k);
    }
    if (out.back().empty())
      out.pop_back();
    return out;
  }

  static std::size_t find_punct(const std::vector<Tok> &t, const std::string &p,
                                std::size_t from = 0) {
    for (std::size_t i = from; i < t.size(); ++i)
      if (t[i].kind == Tok::punct && t[i].text == p)
        return i;
    return std::string::npos;
  }

  static std::size_t close_paren(const std::vector<Tok> &t, std::size_t open) {
    int depth = 0;
    for (std::size_t i = open; i < t.size(); ++i) {
      if (t[i].kind == Tok::punct && t[i].text == "(")
        ++depth;
      if (t[i].kind == Tok::punct && t[i].text == ")" && --depth == 0)
        return i;
    }
    return t.size();
  }

  // Every name referenced in an expression-like token range: names after
  // `%` and keyword-argument names are skipped.
  void expr_refs(Scope &s, const std::vector<Tok> &t, std::size_t from, std::size_t to,
                 int line) {
    int depth = 0;
    for (std::size_t i = from; i < to && i < t.size(); ++i) {
      const Tok &k = t[i];
      if (k.kind == Tok::punct) {
        if (k.text == "(")
          ++depth;
        else if (k.text == ")")
          --depth;
        continue;
      }
      if (k.kind != Tok::name)
        continue;
      if (i > from && t[i - 1].kind == Tok::punct && t[i - 1].text == "%")
        continue;
      bool kwarg = depth > 0 && i + 1 < to && t[i + 1].kind == Tok::punct && t[i + 1].text == "=" &&
                   i > 0 && t[i - 1].kind == Tok::punct &&
                   (t[i - 1].text == "(" || t[i - 1].text == ",");
      if (kwarg)
        continue;
      s.refs.push_back({k.text, line});
    }
  }

  // Skips a type spec starting at `i`; returns the index after it.
  static std::size_t skip_type_spec(const std::vector<Tok> &t, std::size_t i) {
    if (t[i].text == "double" && i + 1 < t.size() && t[i + 1].kind == Tok::name)
      ++i; // double precision
    ++i;
    if (i < t.size() && t[i].kind == Tok::punct && t[i].text == "(")
      return close_paren(t, i) + 1;
    if (i < t.size() && t[i].kind == Tok::punct && t[i].text == "*") {
      ++i;
      if (i < t.size() && t[i].kind == Tok::punct && t[i].text == "(")
        return close_paren(t, i) + 1;
      return i + 1;
    }
    return i;
  }

  // Refs in the type spec's own selectors (`character(len=n)`, `type(user)`).
  void type_spec_refs(Scope &s, const std::vector<Tok> &t, std::size_t start, std::size_t end,
                      int line) {
    if (t[start].text == "type" || t[start].text == "class") {
      if (start + 2 < end && t[start + 2].kind == Tok::name && t[start + 2].text != "*")
        s.refs.push_back({t[start + 2].text, line});
      return;
    }
    for (std::size_t i = start + 1; i < end; ++i) {
      if (t[i].kind != Tok::name || t[i].text == "precision")
        continue;
      if ((t[i].text == "len" || t[i].text == "kind") && i + 1 < end && t[i + 1].text == "=")
        continue;
      s.refs.push_back({t[i].text, line});
    }
  }

  void entity_list(Scope &s, const std::vector<Tok> &t, std::size_t from, bool typed, int line) {
    for (auto &ent : split_commas(t, from, t.size())) {
      if (ent.empty() || ent[0].kind != Tok::name)
        continue;
      s.declared.insert(ent[0].text);
      if (typed)
        s.typed.insert(ent[0].text);
      expr_refs(s, ent, 1, ent.size(), line);
    }
  }

  void header(Scope &child, const std::vector<Tok> &t, std::size_t name_at, int line) {
    child.name = t[name_at].text;
    child.header_line = line;
    std::size_t open = name_at + 1;
    std::size_t close = open;
    if (open < t.size() && t[open].text == "(") {
      close = close_paren(t, open);
      for (std::size_t i = open + 1; i < close; ++i)
        if (t[i].kind == Tok::name) {
          child.dummies.push_back(t[i].text);
          child.declared.insert(t[i].text);
        }
    }
    for (std::size_t i = close; i < t.size(); ++i)
      if (t[i].kind == Tok::name && t[i].text == "result" && i + 2 < t.size()) {
        child.result = t[i + 2].text;
        child.declared.insert(child.result);
      }
  }

  void parse(const std::string &path, const std::string &text) {
    auto stmts = statements(text);
    enum class Frame { unit, procedure, interface_block, type_body };
    std::vector<std::pair<Frame, int>> stack; // frame, scope index
    int unit_index = -1;

    auto cur = [&]() -> int {
      for (auto it = stack.rbegin(); it != stack.rend(); ++it)
        if (it->first == Frame::unit || it->first == Frame::procedure)
          return it->second;
      return -1;
    };
    auto in_interface = [&] {
      return !stack.empty() && stack.back().first == Frame::interface_block;
    };
    auto new_scope = [&](std::string kind, int parent) {
      Scope sc;
      sc.kind = std::move(kind);
      sc.parent = parent;
      scopes_.push_back(std::move(sc));
      int id = static_cast<int>(scopes_.size()) - 1;
      if (unit_index >= 0)
        units_[unit_index].scopes.push_back(id);
      return id;
    };

    for (auto &st : stmts) {
      auto t = st.toks;
      int line = st.line;
      if (!t.empty() && t[0].kind == Tok::number)
        t.erase(t.begin()); // statement label
      if (t.empty())
        continue;
      const std::string w0 = t[0].kind == Tok::name ? t[0].text : "";
      const std::string w1 = t.size() > 1 && t[1].kind == Tok::name ? t[1].text : "";

      // --- program unit boundaries
      if (stack.empty()) {
        std::string kind;
        std::size_t name_at = 1;
        if (w0 == "module" && w1 != "procedure")
          kind = "module";
        else if (w0 == "program")
          kind = "program";
        else if (w0 == "block" && w1 == "data")
          kind = "block data", name_at = 2;
        else if (w0 == "blockdata")
          kind = "block data";
        if (kind.empty()) {
          parse_issues_.push_back({path, "", line, "statement outside any program unit"});
          continue;
        }
        units_.push_back({path, kind, name_at < t.size() ? t[name_at].text : "", 0, {}});
        unit_index = static_cast<int>(units_.size()) - 1;
        int id = new_scope(kind, -1);
        scopes_[id].name = units_[unit_index].name;
        if (kind == "module")
          modules_[scopes_[id].name] = id;
        stack.push_back({Frame::unit, id});
        continue;
      }

      // --- ends
      bool is_end = w0 == "end" || w0 == "endmodule" || w0 == "endprogram" ||
                    w0 == "endsubroutine" || w0 == "endfunction" || w0 == "endtype" ||
                    w0 == "endinterface";
      if (is_end) {
        std::string what = w0 == "end" ? w1 : w0.substr(3);
        if (what == "if" || what == "do" || what == "select" || what == "where" ||
            what == "associate" || what == "forall" || what == "block" && !(t.size() > 2 && t[2].text == "data"))
          continue;
        if (what == "type" && !stack.empty() && stack.back().first == Frame::type_body) {
          stack.pop_back();
          continue;
        }
        if (what == "interface") {
          if (in_interface())
            stack.pop_back();
          continue;
        }
        if (!stack.empty())
          stack.pop_back();
        continue;
      }
      if (w0 == "endif" || w0 == "enddo" || w0 == "endselect")
        continue;

      int sid = cur();
      Scope &s = scopes_[sid];

      // --- derived type bodies
      if (!stack.empty() && stack.back().first == Frame::type_body) {
        if (w0 == "contains" || w0 == "private" || w0 == "sequence")
          continue;
        if (w0 == "procedure") {
          // procedure(iface), deferred :: name / procedure :: name => impl
          if (t.size() > 2 && t[1].text == "(")
            s.refs.push_back({t[2].text, line});
          auto arrow = find_punct(t, "=>");
          if (arrow != std::string::npos && arrow + 1 < t.size())
            s.refs.push_back({t[arrow + 1].text, line});
          else if (auto dc = find_punct(t, "::"); dc != std::string::npos && t[1].text != "(")
            for (std::size_t i = dc + 1; i < t.size(); ++i)
              if (t[i].kind == Tok::name)
                s.refs.push_back({t[i].text, line});
          continue;
        }
        if (w0 == "generic" || w0 == "final")
          continue;
        // component declaration: refs in the type selector and dimensions
        std::size_t after = skip_type_spec(t, 0);
        type_spec_refs(s, t, 0, after, line);
        auto dc = find_punct(t, "::");
        std::size_t from = dc == std::string::npos ? after : dc + 1;
        for (auto &ent : split_commas(t, from, t.size())) {
          // `=> null()` and constant initializers only
          for (std::size_t i = 1; i < ent.size(); ++i)
            if (ent[i].kind == Tok::name && ent[i].text != "null")
              s.refs.push_back({ent[i].text, line});
        }
        continue;
      }

      // --- interface blocks
      if (w0 == "interface" || (w0 == "abstract" && w1 == "interface")) {
        if (w0 == "interface" && t.size() > 1 && t[1].kind == Tok::name &&
            t[1].text != "assignment" && t[1].text != "operator")
          s.declared.insert(t[1].text);
        stack.push_back({Frame::interface_block, sid});
        continue;
      }
      if (w0 == "module" && w1 == "procedure") {
        for (std::size_t i = 2; i < t.size(); ++i)
          if (t[i].kind == Tok::name)
            s.refs.push_back({t[i].text, line});
        continue;
      }

      // --- procedure headers
      std::size_t kw = std::string::npos;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i].kind == Tok::punct && t[i].text == "(") {
          i = close_paren(t, i);
          continue;
        }
        if (t[i].kind == Tok::name && (t[i].text == "subroutine" || t[i].text == "function")) {
          kw = i;
          break;
        }
        if (t[i].kind != Tok::name)
          break;
        bool prefix = t[i].text == "recursive" || t[i].text == "pure" ||
                      t[i].text == "elemental" || is_type_keyword(t[i].text) ||
                      t[i].text == "precision" || t[i].text == "type";
        if (!prefix)
          break;
      }
      if (kw != std::string::npos && kw + 1 < t.size() && t[kw + 1].kind == Tok::name) {
        bool iface = in_interface();
        int id = new_scope(iface ? "interface_body" : "procedure", sid);
        Scope &c = scopes_[id];
        c.host = !iface;
        header(c, t, kw + 1, line);
        if (t[kw].text == "function") {
          c.declared.insert(c.name);
          if (c.result.empty())
            c.result = c.name;
          c.has_prefix_type = kw > 0;
          if (kw > 0)
            type_spec_refs(c, t, 0, kw, line);
        }
        scopes_[sid].declared.insert(c.name);
        stack.push_back({Frame::procedure, id});
        continue;
      }

      // --- specification statements
      if (w0 == "use") {
        UseSpec u;
        u.module = w1;
        u.line = line;
        std::size_t i = 2;
        if (i < t.size() && t[i].text == ",") {
          ++i;
          if (i < t.size() && t[i].text == "only") {
            u.only = true;
            i += 2; // only :
          }
          for (auto &item : split_commas(t, i, t.size())) {
            if (item.size() >= 3 && item[1].text == "=>")
              u.names.push_back({item[0].text, item[2].text});
            else if (!item.empty())
              u.names.push_back({item[0].text, item[0].text});
          }
        }
        s.uses.push_back(std::move(u));
        continue;
      }
      if (w0 == "import") {
        auto dc = find_punct(t, "::");
        for (std::size_t i = dc == std::string::npos ? 1 : dc + 1; i < t.size(); ++i)
          if (t[i].kind == Tok::name)
            s.imports.insert(t[i].text);
        continue;
      }
      if (w0 == "implicit") {
        if (w1 == "none") {
          // interface bodies are separate scoping units; anything else counts
          if (s.kind != "interface_body")
            ++units_[unit_index].implicit_none;
        } else {
          parse_issues_.push_back({path, units_[unit_index].name, line,
                                   "implicit typing rule in free-form output"});
        }
        continue;
      }
      if (w0 == "contains")
        continue;
      if (w0 == "private" || w0 == "public") {
        auto dc = find_punct(t, "::");
        if (t.size() == 1) {
          if (w0 == "private")
            s.default_private = true;
          continue;
        }
        std::size_t from = dc == std::string::npos ? 1 : dc + 1;
        for (std::size_t i = from; i < t.size(); ++i) {
          if (t[i].kind != Tok::name)
            continue;
          if (t[i].text == "assignment" || t[i].text == "operator") {
            i = close_paren(t, i + 1);
            continue;
          }
          (w0 == "public" ? s.public_names : s.private_names).insert(t[i].text);
          s.refs.push_back({t[i].text, line});
        }
        continue;
      }
      if (w0 == "external" || w0 == "intrinsic") {
        auto dc = find_punct(t, "::");
        for (std::size_t i = dc == std::string::npos ? 1 : dc + 1; i < t.size(); ++i)
          if (t[i].kind == Tok::name) {
            s.declared.insert(t[i].text);
            s.external.insert(t[i].text);
          }
        continue;
      }
      if (w0 == "intent" || w0 == "dimension" || w0 == "save" || w0 == "parameter" ||
          w0 == "equivalence" || w0 == "target" || w0 == "allocatable" || w0 == "pointer" ||
          w0 == "optional") {
        auto dc = find_punct(t, "::");
        std::size_t from = dc != std::string::npos ? dc + 1 : 1;
        if (w0 == "intent" && dc == std::string::npos)
          from = close_paren(t, 1) + 1;
        expr_refs(s, t, from, t.size(), line);
        continue;
      }
      if (w0 == "common" || w0 == "data" || w0 == "namelist") {
        bool in_slash = false;
        for (std::size_t i = 1; i < t.size(); ++i) {
          if (t[i].kind == Tok::punct && t[i].text == "/") {
            in_slash = !in_slash;
            continue;
          }
          if (in_slash || t[i].kind != Tok::name)
            continue;
          if (i > 0 && t[i - 1].text == "%")
            continue;
          s.refs.push_back({t[i].text, line});
        }
        continue;
      }
      if (w0 == "format")
        continue;
      bool derived_def = w0 == "type" && (t.size() == 1 || t[1].text == "," || t[1].text == "::" ||
                                          (t[1].kind == Tok::name && t[1].text != "is"));
      if (derived_def) {
        auto dc = find_punct(t, "::");
        std::string name = dc != std::string::npos ? t[dc + 1].text : t[1].text;
        s.declared.insert(name);
        for (std::size_t i = 1; dc != std::string::npos && i < dc; ++i)
          if (t[i].text == "extends" && i + 2 < t.size())
            s.refs.push_back({t[i + 2].text, line});
        stack.push_back({Frame::type_body, sid});
        continue;
      }
      bool typed_decl = is_type_keyword(w0) ||
                        ((w0 == "type" || w0 == "class") && t.size() > 1 && t[1].text == "(" &&
                         !(t.size() > 2 && t[2].text == "is"));
      if (typed_decl && !(w0 == "class" && w1 == "default")) {
        std::size_t after = skip_type_spec(t, 0);
        type_spec_refs(s, t, 0, after, line);
        auto dc = find_punct(t, "::");
        bool ext = false;
        for (std::size_t i = after; dc != std::string::npos && i < dc; ++i) {
          if (t[i].kind == Tok::name && t[i].text == "external")
            ext = true;
          if (t[i].kind == Tok::name && t[i].text == "dimension" && i + 1 < dc)
            expr_refs(s, t, i + 1, close_paren(t, i + 1) + 1, line);
        }
        std::size_t from = dc != std::string::npos ? dc + 1 : after;
        for (auto &ent : split_commas(t, from, t.size())) {
          if (ent.empty() || ent[0].kind != Tok::name)
            continue;
          s.declared.insert(ent[0].text);
          s.typed.insert(ent[0].text);
          if (ext)
            s.external.insert(ent[0].text);
          expr_refs(s, ent, 1, ent.size(), line);
        }
        continue;
      }

      // --- executable statements
      static const std::set<std::string> kws = {
          "if",       "then",     "else",     "elseif",     "do",     "while", "call",
          "return",   "stop",     "continue", "go",         "goto",   "to",    "write",
          "read",     "print",    "open",     "close",      "inquire", "rewind", "backspace",
          "endfile",  "allocate", "deallocate", "nullify",  "select", "case",  "type",
          "class",    "is",       "default",  "error",      "exit",   "cycle", "where",
          "elsewhere", "pause",   "assign"};
      int depth = 0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        const Tok &k = t[i];
        if (k.kind == Tok::punct) {
          if (k.text == "(")
            ++depth;
          else if (k.text == ")")
            --depth;
          continue;
        }
        if (k.kind != Tok::name)
          continue;
        if (i > 0 && t[i - 1].kind == Tok::punct && t[i - 1].text == "%")
          continue;
        if (depth == 0 && kws.count(k.text))
          continue;
        bool kwarg = depth > 0 && i + 1 < t.size() && t[i + 1].kind == Tok::punct &&
                     t[i + 1].text == "=" && t[i - 1].kind == Tok::punct &&
                     (t[i - 1].text == "(" || t[i - 1].text == ",");
        if (kwarg)
          continue;
        s.refs.push_back({k.text, line});
        bool called = i > 0 && t[i - 1].kind == Tok::name && t[i - 1].text == "call" && depth == 0;
        if (called)
          s.invoked.insert(k.text);
      }
    }
    if (!stack.empty())
      parse_issues_.push_back({path, unit_index >= 0 ? units_[unit_index].name : "", 0,
                               "unterminated program unit"});
  }

  std::set<std::string> imported(const Scope &s, std::vector<Issue> *issues, const Unit &u) {
    std::set<std::string> out;
    for (const auto &use : s.uses) {
      auto ex = exports_.find(use.module);
      if (ex == exports_.end()) {
        if (issues)
          issues->push_back({u.file, u.name, use.line, "use of unknown module " + use.module});
        continue;
      }
      std::set<std::string> renamed_away;
      for (auto &[local, remote] : use.names) {
        if (!ex->second.count(remote) && issues)
          issues->push_back({u.file, u.name, use.line,
                             "module " + use.module + " has no public entity " + remote});
        out.insert(local);
        renamed_away.insert(remote);
      }
      if (!use.only)
        for (auto &n : ex->second)
          if (!renamed_away.count(n))
            out.insert(n);
    }
    return out;
  }

  void compute_exports() {
    bool changed = true;
    for (auto &[name, id] : modules_)
      exports_[name];
    while (changed) {
      changed = false;
      for (auto &[name, id] : modules_) {
        const Scope &m = scopes_[id];
        std::set<std::string> ex;
        if (m.default_private) {
          ex = m.public_names;
        } else {
          ex = m.declared;
          for (auto &n : imported(m, nullptr, units_.front()))
            ex.insert(n);
          for (auto &n : m.private_names)
            ex.erase(n);
          for (auto &n : m.public_names)
            ex.insert(n);
        }
        if (ex != exports_[name]) {
          exports_[name] = ex;
          changed = true;
        }
      }
    }
  }

  bool visible(int sid, const std::string &n, std::map<int, std::set<std::string>> &imp_cache,
               const Unit &u) {
    for (int cur = sid; cur >= 0;) {
      const Scope &s = scopes_[cur];
      if (s.declared.count(n) || s.imports.count(n) && cur != sid)
        return true;
      if (!imp_cache.count(cur))
        imp_cache[cur] = imported(s, nullptr, u);
      if (imp_cache[cur].count(n))
        return true;
      if (!s.host) {
        // interface bodies see only what they import
        if (s.imports.count(n) && s.parent >= 0)
          return visible(s.parent, n, imp_cache, u);
        return false;
      }
      cur = s.parent;
    }
    return false;
  }

  void resolve(int sid, const Unit &u, Report &rep) {
    const Scope &s = scopes_[sid];
    std::map<int, std::set<std::string>> cache;
    imported(s, &rep.issues, u);
    if (sid == u.scopes.front())
      for (auto &pi : parse_issues_)
        if (pi.file == u.file && pi.unit == u.name)
          rep.issues.push_back(pi);
    std::set<std::string> seen;
    for (auto &[n, line] : s.refs) {
      if (seen.count(n))
        continue;
      seen.insert(n);
      if (visible(sid, n, cache, u))
        continue;
      if (intrinsics().count(n))
        continue;
      rep.issues.push_back({u.file, u.name, line,
                            "'" + n + "' referenced in " + s.kind + " " + s.name +
                                " without a declaration"});
    }
    for (auto &d : s.dummies) {
      bool ok = s.typed.count(d) || s.external.count(d) || s.invoked.count(d);
      if (!ok)
        rep.issues.push_back({u.file, u.name, s.header_line,
                              "dummy argument '" + d + "' of " + s.name + " has no type"});
    }
    if (s.kind != "module" && !s.result.empty() && s.kind != "program") {
      bool ok = s.has_prefix_type || s.typed.count(s.result);
      if (!ok)
        rep.issues.push_back({u.file, u.name, s.header_line,
                              "result of function " + s.name + " has no type"});
    }
  }
};

inline Report check(const std::vector<std::pair<std::string, std::string>> &files) {
  Checker c;
  for (auto &[p, t] : files)
    c.add_file(p, t);
  return c.run();
}

// Esope syntax left in non-comment output lines.
inline std::vector<std::string> esope_leftovers(const std::string &text) {
  // command syntax at the start of a statement or after a logical IF
  static const std::regex command(
      R"((^\s*(\d+\s+)?|\)\s*)(segini|segact|segadj|segsup|segprt|segdes)\s*,)", std::regex::icase);
  static const std::regex leading(R"(^\s*(\d+\s+)?(segment|pointeur|end\s*segment|segini|segact|segadj|segsup|segprt|segdes)\b)",
                                  std::regex::icase);
  static const std::regex slash(R"(\(\s*/\s*\d+\s*\))");
  static const std::regex dotted(R"(\b([a-z_][a-z0-9_]*)\.([a-z_][a-z0-9_]*)(\.?))",
                                 std::regex::icase);
  std::vector<std::string> bad;
  std::istringstream in(text);
  for (std::string raw; std::getline(in, raw);) {
    std::string l = strip_comment(raw);
    // blank out character literals
    std::string code;
    char q = 0;
    for (char c : l) {
      if (q) {
        if (c == q)
          q = 0;
        code += ' ';
      } else if (c == '\'' || c == '"') {
        q = c;
        code += ' ';
      } else {
        code += c;
      }
    }
    if (std::regex_search(code, command) || std::regex_search(code, leading) ||
        std::regex_search(code, slash)) {
      bad.push_back(raw);
      continue;
    }
    for (std::sregex_iterator it(code.begin(), code.end(), dotted), end; it != end; ++it) {
      // `a.eq.b` is an operator, not an access
      if ((*it)[3].length() == 0) {
        bad.push_back(raw);
        break;
      }
    }
  }
  return bad;
}

} // namespace f90check
