#pragma once

#include "segmig/includes.hpp"
#include "segmig/model.hpp"

#include <memory>
#include <string>
#include <vector>

namespace segmig {

struct ProjectInput {
  std::vector<std::string> source_files; // every discovered file, included ones too
  std::vector<std::string> include_dirs;
  std::string source_dir;
  IntentCatalog catalog;
  Encoding encoding = Encoding::utf8;
};

// Everything the front half of the pipeline produces. Not copyable: the
// fragment cache refers to the resolver and the file table.
struct LoadedProject {
  FileTable files;
  std::unique_ptr<IncludeResolver> resolver;
  std::unique_ptr<FragmentCache> cache;
  // Targets of some include plus unreferenced .inc/.seg/.h files, sorted.
  std::vector<std::string> included_files;
  std::vector<std::string> unit_files;     // the rest, sorted
  std::map<std::string, std::vector<LogicalLine>> lines; // per input file
  std::vector<ProgramUnitAst> parsed;   // as parsed, includes unresolved
  std::vector<ProgramUnitAst> resolved; // includes inlined
  ProjectModel model;
};

// Load failure; carries the file table so spans can be printed.
class LoadError : public MigrationError {
public:
  LoadError(std::vector<Diagnostic> ds, FileTable files)
      : MigrationError(std::move(ds)), files_(std::move(files)) {}
  const FileTable &files() const { return files_; }

private:
  FileTable files_;
};

// Includes first (a sequential prepass filling the fragment cache), then
// every other file. Errors from all files are collected before throwing
// LoadError.
std::unique_ptr<LoadedProject> load_project(const SourceLoader &loader, const ProjectInput &in);

} // namespace segmig
