#include "segmig/includes.hpp"

#include "segmig/parser.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace segmig {

std::optional<std::string> DiskLoader::read(const std::string &path) const {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec))
    return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MemoryLoader::MemoryLoader(std::map<std::string, std::string> files) {
  for (auto &[k, v] : files)
    files_[normalize_path(k)] = std::move(v);
}

std::optional<std::string> MemoryLoader::read(const std::string &path) const {
  auto it = files_.find(normalize_path(path));
  if (it == files_.end())
    return std::nullopt;
  return it->second;
}

std::string normalize_path(const std::string &path) {
  if (path.empty())
    return path;
  std::string out = fs::path(path).lexically_normal().generic_string();
  if (out.size() > 1 && out.back() == '/')
    out.pop_back();
  return out;
}

IncludeResolver::IncludeResolver(const SourceLoader &loader,
                                 std::vector<std::string> search_dirs,
                                 std::string source_dir)
    : loader_(loader), dirs_(std::move(search_dirs)), source_dir_(std::move(source_dir)) {}

std::vector<std::string> IncludeResolver::candidates(const IncludeDirective &d,
                                                     const std::string &including_path) const {
  std::vector<std::string> dirs;
  dirs.push_back(fs::path(including_path).parent_path().generic_string());
  for (const auto &dir : dirs_)
    dirs.push_back(dir);
  dirs.push_back(source_dir_);

  std::vector<std::string> names = {d.path};
  std::string lower = to_lower(d.path);
  if (lower != d.path)
    names.push_back(lower);
  if (fs::path(d.path).extension().empty())
    for (const char *ext : {".inc", ".seg", ".eso", ".h"}) {
      names.push_back(d.path + ext);
      if (lower != d.path)
        names.push_back(lower + ext);
    }

  std::vector<std::string> out;
  for (const auto &dir : dirs)
    for (const auto &n : names) {
      std::string c = normalize_path((fs::path(dir.empty() ? "." : dir) / n).generic_string());
      if (std::find(out.begin(), out.end(), c) == out.end())
        out.push_back(c);
    }
  return out;
}

std::string IncludeResolver::resolve(const IncludeDirective &d,
                                     const std::string &including_path) const {
  auto tried = candidates(d, including_path);
  for (const auto &c : tried)
    if (loader_.read(c))
      return c;
  std::string msg = "include file '" + d.path + "' not found (" +
                    std::string(include_flavor_name(d.flavor)) +
                    " directive; #include, include, %inc and -inc are searched alike); tried:";
  for (const auto &c : tried)
    msg += " " + c;
  throw MigrationError(d.span, msg);
}

std::vector<IncludeDirective> scan_includes(const std::vector<LogicalLine> &lines) {
  std::vector<IncludeDirective> out;
  for (const auto &l : lines)
    if (l.kind == LineKind::directive || l.kind == LineKind::statement)
      if (auto d = parse_include_directive(l))
        out.push_back(std::move(*d));
  return out;
}

FragmentCache::FragmentCache(const IncludeResolver &resolver, FileTable &files, Encoding enc)
    : resolver_(resolver), files_(files), enc_(enc) {}

bool FragmentCache::contains(const std::string &p) const { return cache_.count(p) != 0; }

const Fragment &FragmentCache::at(const std::string &p) const {
  auto it = cache_.find(p);
  if (it == cache_.end())
    throw MigrationError(SourceSpan{}, "include file " + p + " was not loaded");
  return it->second;
}

namespace {

Stmt marker(StmtKind kind, const IncludeDirective &d, const std::string &resolved) {
  Stmt s;
  s.kind = kind;
  s.span = d.span;
  s.text = d.path;
  s.from_include = resolved;
  return s;
}

void append_segments(std::vector<SegmentDefinition> &out, const Fragment &f) {
  for (const auto &s : f.nested_segments)
    out.push_back(s);
  for (const auto &s : f.segments)
    out.push_back(s);
}

} // namespace

const Fragment &FragmentCache::load(const std::string &path) {
  if (auto it = cache_.find(path); it != cache_.end())
    return it->second;
  if (auto pos = std::find(stack_.begin(), stack_.end(), path); pos != stack_.end()) {
    std::string cycle;
    for (auto it = pos; it != stack_.end(); ++it)
      cycle += *it + " -> ";
    cycle += path;
    throw MigrationError(SourceSpan{}, "include cycle: " + cycle);
  }
  auto text = resolver_.loader().read(path);
  if (!text)
    throw MigrationError(SourceSpan{}, "cannot read include file " + path);

  stack_.push_back(path);
  struct Pop {
    std::vector<std::string> &s;
    ~Pop() { s.pop_back(); }
  } pop{stack_};

  Fragment frag;
  frag.path = path;
  frag.file = files_.find(path);
  if (frag.file == 0)
    frag.file = files_.add(path);
  frag.lines = split_logical_lines(*text, frag.file, enc_);
  auto units = parse_file(frag.lines, frag.file, path, true);
  for (const auto &u : units) {
    if (u.kind != UnitKind::fragment)
      throw MigrationError(u.span, "included file " + path + " contains a program unit");
    for (const auto &s : u.body) {
      switch (s.kind) {
      case StmtKind::comment:
      case StmtKind::blank:
        break; // comments of included files are not copied
      case StmtKind::segment_def:
        frag.segments.push_back(*s.segment);
        break;
      case StmtKind::include: {
        std::string target = resolver_.resolve(*s.include, path);
        const Fragment &inner = load(target);
        frag.includes.push_back(target);
        frag.statements.push_back(marker(StmtKind::include_begin, *s.include, target));
        for (const auto &n : inner.statements)
          frag.statements.push_back(n);
        frag.statements.push_back(marker(StmtKind::include_end, *s.include, target));
        append_segments(frag.nested_segments, inner);
        break;
      }
      default: {
        Stmt copy = s;
        copy.from_include = path;
        frag.statements.push_back(std::move(copy));
      }
      }
    }
  }
  return cache_.emplace(path, std::move(frag)).first->second;
}

ProgramUnitAst resolve_includes(const ProgramUnitAst &unit, const FragmentCache &cache) {
  ProgramUnitAst out = unit;
  out.body.clear();
  for (const auto &s : unit.body) {
    if (s.kind != StmtKind::include) {
      out.body.push_back(s);
      continue;
    }
    std::string target = cache.resolver().resolve(*s.include, unit.path);
    const Fragment &frag = cache.at(target);
    out.body.push_back(marker(StmtKind::include_begin, *s.include, target));
    out.body.back().label = s.label;
    for (const auto &n : frag.statements)
      out.body.push_back(n);
    out.body.push_back(marker(StmtKind::include_end, *s.include, target));
    append_segments(out.included_segments, frag);
  }
  // The same segment may arrive through two includes.
  std::vector<SegmentDefinition> unique;
  for (auto &seg : out.included_segments)
    if (std::none_of(unique.begin(), unique.end(),
                     [&](const SegmentDefinition &u) { return u.name == seg.name; }))
      unique.push_back(std::move(seg));
  out.included_segments = std::move(unique);
  return out;
}

} // namespace segmig
