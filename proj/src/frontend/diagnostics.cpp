#include "segmig/diagnostics.hpp"

#include <algorithm>
#include <tuple>

namespace segmig {

FileId FileTable::add(std::string path) {
  if (FileId existing = find(path); existing != 0)
    return existing;
  paths_.push_back(std::move(path));
  return static_cast<FileId>(paths_.size());
}

const std::string &FileTable::path(FileId id) const {
  static const std::string generated = "<generated>";
  if (id <= 0 || id > static_cast<FileId>(paths_.size()))
    return generated;
  return paths_[id - 1];
}

FileId FileTable::find(const std::string &path) const {
  auto it = std::find(paths_.begin(), paths_.end(), path);
  return it == paths_.end() ? 0 : static_cast<FileId>(it - paths_.begin()) + 1;
}

std::string format_location(const FileTable &files, const SourceSpan &span) {
  std::string out = files.path(span.file);
  if (span.start_line > 0) {
    out += ":" + std::to_string(span.start_line);
    out += ":" + std::to_string(std::max(span.start_col, 1));
  }
  return out;
}

std::string format_diagnostic(const FileTable &files, const Diagnostic &d) {
  const char *sev = d.severity == Severity::error     ? "error"
                    : d.severity == Severity::warning ? "warning"
                                                      : "note";
  return format_location(files, d.span) + ": " + sev + ": " + d.message;
}

static std::string join_messages(const std::vector<Diagnostic> &ds) {
  std::string out;
  for (const auto &d : ds) {
    if (!out.empty())
      out += "; ";
    out += d.message;
  }
  return out;
}

MigrationError::MigrationError(Diagnostic d)
    : std::runtime_error(d.message), diags_{std::move(d)} {}

MigrationError::MigrationError(std::vector<Diagnostic> ds)
    : std::runtime_error(join_messages(ds)), diags_(std::move(ds)) {}

MigrationError::MigrationError(const SourceSpan &span,
                               const std::string &message)
    : MigrationError(Diagnostic{Severity::error, span, message}) {}

void sort_diagnostics(const FileTable &files, std::vector<Diagnostic> &ds) {
  std::stable_sort(ds.begin(), ds.end(),
                   [&](const Diagnostic &a, const Diagnostic &b) {
                     return std::tuple(files.path(a.span.file),
                                       a.span.start_line, a.span.start_col,
                                       a.message) <
                            std::tuple(files.path(b.span.file),
                                       b.span.start_line, b.span.start_col,
                                       b.message);
                   });
}

} // namespace segmig
