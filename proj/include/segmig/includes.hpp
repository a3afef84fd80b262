#pragma once

#include "segmig/ast.hpp"
#include "segmig/lines.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace segmig {

// Where source text comes from. The CLI reads the disk; tests and the Python
// module hand in memory maps.
class SourceLoader {
public:
  virtual ~SourceLoader() = default;
  virtual std::optional<std::string> read(const std::string &path) const = 0;
};

class DiskLoader : public SourceLoader {
public:
  std::optional<std::string> read(const std::string &path) const override;
};

class MemoryLoader : public SourceLoader {
public:
  explicit MemoryLoader(std::map<std::string, std::string> files);
  std::optional<std::string> read(const std::string &path) const override;
  const std::map<std::string, std::string> &files() const { return files_; }

private:
  std::map<std::string, std::string> files_;
};

std::string normalize_path(const std::string &path);

// Resolution order: the including file's directory, each include path in
// order, then the source directory. Each directory is tried with the name
// as written, lowercased, and with the usual include suffixes appended.
class IncludeResolver {
public:
  IncludeResolver(const SourceLoader &loader, std::vector<std::string> search_dirs,
                  std::string source_dir);

  std::string resolve(const IncludeDirective &d, const std::string &including_path) const;
  std::vector<std::string> candidates(const IncludeDirective &d,
                                      const std::string &including_path) const;
  const SourceLoader &loader() const { return loader_; }

private:
  const SourceLoader &loader_;
  std::vector<std::string> dirs_;
  std::string source_dir_;
};

struct Fragment {
  std::string path; // resolved path
  FileId file = 0;
  // Comments and segment definitions removed; nested includes expanded
  // between begin/end markers.
  std::vector<Stmt> statements;
  std::vector<SegmentDefinition> segments; // defined directly in this file
  std::vector<SegmentDefinition> nested_segments; // from its own includes
  std::vector<std::string> includes;              // direct, resolved
  std::vector<LogicalLine> lines;                 // for census and counting
};

class FragmentCache {
public:
  FragmentCache(const IncludeResolver &resolver, FileTable &files,
                Encoding enc = Encoding::utf8);

  // Loads and expands a fragment and everything it includes. Throws on
  // cycles and missing files.
  const Fragment &load(const std::string &resolved_path);
  const Fragment &at(const std::string &resolved_path) const;
  bool contains(const std::string &resolved_path) const;
  const std::map<std::string, Fragment> &all() const { return cache_; }
  const IncludeResolver &resolver() const { return resolver_; }

private:
  const IncludeResolver &resolver_;
  FileTable &files_;
  Encoding enc_;
  std::map<std::string, Fragment> cache_;
  std::vector<std::string> stack_;
};

// Replaces every include statement of `unit` by a begin marker, the
// fragment's statements and an end marker. Returns a new unit; the input is
// not modified.
ProgramUnitAst resolve_includes(const ProgramUnitAst &unit, const FragmentCache &cache);

// Include directives of a file, in order.
std::vector<IncludeDirective> scan_includes(const std::vector<LogicalLine> &lines);

} // namespace segmig
