#include "segmig/driver.hpp"

#include "segmig/analysis.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace segmig {

namespace {

std::optional<std::string> read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_diagnostics(std::ostream &err, const FileTable &files, std::vector<Diagnostic> ds) {
  sort_diagnostics(files, ds);
  for (const auto &d : ds)
    err << format_diagnostic(files, d) << "\n";
}

struct Flags {
  std::string src, out, catalog, config, encoding, keyword_case;
  std::vector<std::string> include_paths;
  int indent = 0, line_length = 0;
  bool verbose = false;
};

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Esope / FORTRAN 77 to Fortran 2008 migration", "seg-migrate"};
  app.require_subcommand(1, 1);
  Flags f;
  auto add_common = [&](CLI::App *cmd) {
    cmd->add_option("--src", f.src, "source directory");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--include-path", f.include_paths, "include search directory (repeatable)");
    cmd->add_option("--intent-catalog", f.catalog, "intents of external routines");
    cmd->add_option("--config", f.config, "key=value configuration file");
    cmd->add_option("--indent", f.indent, "indentation width");
    cmd->add_option("--line-length", f.line_length, "maximum line length");
    cmd->add_option("--keyword-case", f.keyword_case, "lower or upper");
    cmd->add_option("--encoding", f.encoding, "utf-8 or latin-1");
    cmd->add_flag("--verbose,-v", f.verbose, "progress on standard error");
  };
  CLI::App *migrate = app.add_subcommand("migrate", "migrate a source tree");
  CLI::App *check = app.add_subcommand("check", "parse and analyze only; writes nothing");
  CLI::App *dump = app.add_subcommand("dump-model", "print the project model");
  for (CLI::App *cmd : {migrate, check, dump})
    add_common(cmd);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError &e) {
    std::ostringstream o, e2;
    int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? 0 : 2;
  }
  CLI::App *cmd = migrate->parsed() ? migrate : check->parsed() ? check : dump;
  auto given = [&](const std::string &name) {
    const CLI::Option *o = cmd->get_option_no_throw("--" + name);
    return o && o->count() > 0;
  };

  RunConfig cfg;
  try {
    if (given("config")) {
      auto text = read_file(f.config);
      if (!text)
        throw ConfigError("cannot read config file " + f.config);
      apply_config_text(*text, cfg);
    }
    std::string overrides;
    if (given("src"))
      cfg.source_dir = f.src;
    if (given("out"))
      cfg.out_dir = f.out;
    if (given("include-path"))
      cfg.include_paths = f.include_paths;
    if (given("intent-catalog"))
      cfg.intent_catalog_path = f.catalog;
    if (given("verbose"))
      cfg.verbose = true;
    if (given("indent"))
      overrides += "indent=" + std::to_string(f.indent) + "\n";
    if (given("line-length"))
      overrides += "line-length=" + std::to_string(f.line_length) + "\n";
    if (given("keyword-case"))
      overrides += "keyword-case=" + f.keyword_case + "\n";
    if (given("encoding"))
      overrides += "encoding=" + f.encoding + "\n";
    apply_config_text(overrides, cfg);
    validate_config(cfg, cmd == migrate);
  } catch (const ConfigError &e) {
    err << "seg-migrate: " << e.what() << "\n";
    return 2;
  }

  IntentCatalog catalog;
  if (cfg.intent_catalog_path) {
    auto text = read_file(*cfg.intent_catalog_path);
    if (!text) {
      err << "seg-migrate: cannot read intent catalog " << *cfg.intent_catalog_path << "\n";
      return 2;
    }
    try {
      catalog = parse_intent_catalog(*text);
    } catch (const MigrationError &e) {
      err << "seg-migrate: " << *cfg.intent_catalog_path << ": " << e.what() << "\n";
      return 2;
    }
  }

  auto log = [&](const std::string &msg) {
    if (cfg.verbose)
      err << "seg-migrate: " << msg << "\n";
  };

  std::vector<std::string> files = discover_sources(cfg.source_dir, cfg.extensions);
  log("found " + std::to_string(files.size()) + " source files under " + cfg.source_dir);
  DiskLoader loader;
  std::unique_ptr<LoadedProject> project;
  try {
    project = load_project(loader, project_input(cfg, files, std::move(catalog)));
  } catch (const LoadError &e) {
    print_diagnostics(err, e.files(), e.diagnostics());
    err << "seg-migrate: " << e.diagnostics().size() << " error(s); nothing written\n";
    return 1;
  }
  log("parsed " + std::to_string(project->parsed.size()) + " program units, " +
      std::to_string(project->included_files.size()) + " included files");

  if (cmd == dump) {
    out << project->model.dump();
    return 0;
  }

  if (cmd == check) {
    Census c;
    try {
      c = take_census(*project);
    } catch (const MigrationError &e) {
      print_diagnostics(err, project->files, e.diagnostics());
      return 1;
    }
    out << c.text();
    print_diagnostics(err, project->files, c.warnings);
    return 0;
  }

  MigrationResult result;
  try {
    result = migrate_loaded(*project, cfg.source_dir, cfg.render);
  } catch (const MigrationError &e) {
    print_diagnostics(err, project->files, e.diagnostics());
    err << "seg-migrate: " << e.diagnostics().size() << " error(s); nothing written\n";
    return 1;
  }
  log("migrated into " + std::to_string(result.outputs.size()) + " files");

  WriteReport written = write_tree(result.outputs, cfg.out_dir, cfg.encoding);
  std::string report = result.report + "written:\n" + written.text();
  WriteReport rep_file = write_tree({{"migration-report.txt", report}}, cfg.out_dir);
  out << report;
  if (!written.ok() || !rep_file.ok()) {
    for (const auto &e : written.files)
      if (!e.error.empty())
        err << "seg-migrate: " << e.path << ": " << e.error << "\n";
    return 1;
  }
  return 0;
}

} // namespace segmig
