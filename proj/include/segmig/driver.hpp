#pragma once

#include "segmig/emit.hpp"
#include "segmig/project.hpp"
#include "segmig/transform.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace segmig {

// Bad command line or configuration file; exit code 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string source_dir = ".";
  std::string out_dir;
  std::vector<std::string> include_paths; // searched in order
  std::optional<std::string> intent_catalog_path;
  Encoding encoding = Encoding::utf8;
  RenderConfig render;
  std::vector<std::string> extensions = {".f", ".F", ".eso", ".inc", ".seg"};
  bool verbose = false;
};

// Applies `key = value` lines (`#` comments) on top of `cfg`. Keys:
// src, out, include-path (repeatable), intent-catalog, encoding, indent,
// line-length, keyword-case, extensions, verbose. Unknown keys and bad
// values throw ConfigError.
void apply_config_text(const std::string &text, RunConfig &cfg);

// Throws ConfigError when the configuration contradicts itself.
void validate_config(const RunConfig &cfg, bool needs_out);

// Files under `dir` with one of the extensions (case-sensitive, so `.F` and
// `.f` are distinct), sorted.
std::vector<std::string> discover_sources(const std::string &dir,
                                          const std::vector<std::string> &extensions);

ProjectInput project_input(const RunConfig &cfg, std::vector<std::string> files,
                           IntentCatalog catalog);

struct MigrationResult {
  std::vector<MigratedFile> files;
  std::vector<OutputFile> outputs; // rendered, same order as files
  int input_files = 0;
  std::string report;
};

// Migrates and renders a loaded project; output paths are relative to
// `source_dir`. Throws MigrationError.
MigrationResult migrate_loaded(const LoadedProject &p, const std::string &source_dir,
                               const RenderConfig &render = {});

struct Census {
  int files = 0;
  int units = 0;
  int segments = 0;
  int pointeurs = 0;
  int segini = 0;
  int segini_copy = 0;
  int segact = 0;
  int segact_move = 0;
  int segadj = 0;
  int segsup = 0;
  int segprt = 0;
  int segdes = 0;
  int includes = 0;
  int undeclared = 0;         // implicitly typed names
  int unresolved_intents = 0; // parameters whose intent stays unknown
  int ambiguous_fields = 0;
  std::vector<Diagnostic> warnings; // negative pointers

  std::string text() const;
};

Census take_census(const LoadedProject &p);

// Entry point of the seg-migrate tool. `args` excludes the program name.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace segmig
