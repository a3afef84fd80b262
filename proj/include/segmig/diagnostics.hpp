#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace segmig {

using FileId = int;

// Positions are 1-based and refer to the original file, before include
// resolution.
struct SourceSpan {
  FileId file = 0;
  int start_line = 0;
  int start_col = 0;
  int end_line = 0;
  int end_col = 0;

  bool valid() const {
    return start_line >= 1 && start_col >= 1 &&
           (end_line > start_line ||
            (end_line == start_line && end_col >= start_col));
  }
  friend bool operator==(const SourceSpan &, const SourceSpan &) = default;
};

enum class Severity { note, warning, error };

struct Diagnostic {
  Severity severity = Severity::error;
  SourceSpan span;
  std::string message;
};

// Maps file ids back to paths for diagnostics. Id 0 is reserved for
// generated or unknown locations.
class FileTable {
public:
  FileId add(std::string path);
  const std::string &path(FileId id) const;
  FileId find(const std::string &path) const;
  std::size_t size() const { return paths_.size(); }

private:
  std::vector<std::string> paths_;
};

std::string format_location(const FileTable &files, const SourceSpan &span);
std::string format_diagnostic(const FileTable &files, const Diagnostic &d);

// Thrown for fatal per-file problems (parse errors, model errors). Carries
// one or more diagnostics so callers can aggregate.
class MigrationError : public std::runtime_error {
public:
  explicit MigrationError(Diagnostic d);
  explicit MigrationError(std::vector<Diagnostic> ds);
  MigrationError(const SourceSpan &span, const std::string &message);

  const std::vector<Diagnostic> &diagnostics() const { return diags_; }

private:
  std::vector<Diagnostic> diags_;
};

// Sort by (file path, line, column, message) for order-stable output.
void sort_diagnostics(const FileTable &files, std::vector<Diagnostic> &ds);

} // namespace segmig
