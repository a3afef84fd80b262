#include "segmig/driver.hpp"

#include "segmig/analysis.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

namespace fs = std::filesystem;

namespace segmig {

namespace {

std::string trim(const std::string &s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos)
    return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

int parse_int(const std::string &key, const std::string &v) {
  try {
    std::size_t used = 0;
    int n = std::stoi(v, &used);
    if (used != v.size())
      throw std::invalid_argument(v);
    return n;
  } catch (const std::exception &) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string &key, const std::string &v) {
  std::string l = to_lower(v);
  if (l == "true" || l == "yes" || l == "1" || l == "on")
    return true;
  if (l == "false" || l == "no" || l == "0" || l == "off")
    return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string &v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');)
    if (auto t = trim(item); !t.empty())
      out.push_back(t);
  return out;
}

} // namespace

void apply_config_text(const std::string &text, RunConfig &cfg) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool include_reset = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    line = trim(line);
    if (line.empty())
      continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = to_lower(trim(line.substr(0, eq)));
    std::string value = trim(line.substr(eq + 1));
    if (key == "src") {
      cfg.source_dir = value;
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "include-path") {
      if (!include_reset)
        cfg.include_paths.clear();
      include_reset = true;
      cfg.include_paths.push_back(value);
    } else if (key == "intent-catalog") {
      cfg.intent_catalog_path = value;
    } else if (key == "encoding") {
      std::string l = to_lower(value);
      if (l == "utf-8" || l == "utf8")
        cfg.encoding = Encoding::utf8;
      else if (l == "latin-1" || l == "latin1" || l == "iso-8859-1")
        cfg.encoding = Encoding::latin1;
      else
        throw ConfigError("encoding: expected utf-8 or latin-1, got '" + value + "'");
    } else if (key == "indent") {
      cfg.render.indent_width = parse_int(key, value);
    } else if (key == "line-length") {
      cfg.render.max_line_length = parse_int(key, value);
    } else if (key == "keyword-case") {
      std::string l = to_lower(value);
      if (l == "lower")
        cfg.render.keyword_case = KeywordCase::lower;
      else if (l == "upper")
        cfg.render.keyword_case = KeywordCase::upper;
      else
        throw ConfigError("keyword-case: expected lower or upper, got '" + value + "'");
    } else if (key == "extensions") {
      cfg.extensions = split_list(value);
      if (cfg.extensions.empty())
        throw ConfigError("extensions: empty list");
    } else if (key == "verbose") {
      cfg.verbose = parse_bool(key, value);
    } else {
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
}

void validate_config(const RunConfig &cfg, bool needs_out) {
  try {
    cfg.render.validate();
  } catch (const MigrationError &e) {
    throw ConfigError(e.what());
  }
  if (cfg.source_dir.empty())
    throw ConfigError("no source directory");
  if (!fs::is_directory(cfg.source_dir))
    throw ConfigError("source directory " + cfg.source_dir + " does not exist");
  for (const auto &d : cfg.include_paths)
    if (!fs::is_directory(d))
      throw ConfigError("include path " + d + " does not exist");
  if (!needs_out)
    return;
  if (cfg.out_dir.empty())
    throw ConfigError("no output directory (--out)");
  std::error_code ec;
  auto a = fs::weakly_canonical(cfg.source_dir, ec);
  auto b = fs::weakly_canonical(cfg.out_dir, ec);
  if (a == b)
    throw ConfigError("the output directory must differ from the source directory");
}

std::vector<std::string> discover_sources(const std::string &dir,
                                          const std::vector<std::string> &extensions) {
  std::vector<std::string> out;
  for (auto it = fs::recursive_directory_iterator(dir, fs::directory_options::skip_permission_denied);
       it != fs::recursive_directory_iterator(); ++it) {
    if (!it->is_regular_file())
      continue;
    std::string ext = it->path().extension().string();
    if (std::find(extensions.begin(), extensions.end(), ext) != extensions.end())
      out.push_back(normalize_path(it->path().generic_string()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

ProjectInput project_input(const RunConfig &cfg, std::vector<std::string> files,
                           IntentCatalog catalog) {
  ProjectInput in;
  in.source_files = std::move(files);
  in.include_dirs = cfg.include_paths;
  in.source_dir = cfg.source_dir;
  in.catalog = std::move(catalog);
  in.encoding = cfg.encoding;
  return in;
}

MigrationResult migrate_loaded(const LoadedProject &p, const std::string &source_dir,
                               const RenderConfig &render) {
  MigrationResult r;
  r.input_files = static_cast<int>(p.unit_files.size() + p.included_files.size());
  r.files = migrate_project(p.model, p.resolved, {source_dir});
  for (const auto &f : r.files)
    r.outputs.push_back({f.output, render_unit(f.tree, render)});

  TransformStats total;
  int modules = 0, programs = 0, support = 0;
  std::ostringstream rows;
  for (std::size_t i = 0; i < r.files.size(); ++i) {
    const auto &f = r.files[i];
    total += f.stats;
    modules += f.source.empty() ? 0 : f.modules;
    programs += f.programs;
    if (f.source.empty()) {
      ++support;
      rows << "  " << f.output << "  generated\n";
    } else {
      std::string rel = fs::path(f.source).lexically_relative(source_dir).generic_string();
      if (rel.empty() || rel.rfind("..", 0) == 0)
        rel = f.source;
      rows << "  " << rel << " -> " << f.output << "  ok  rewritten " << f.stats.rewritten
           << ", removed " << f.stats.removed << ", passthrough " << f.stats.passthrough << "\n";
    }
  }
  std::ostringstream os;
  os << "seg-migrate migration report\n"
     << "input files: " << r.input_files << "\n"
     << "output files: " << r.files.size() << " (" << modules << " modules, " << programs
     << " main programs, " << support << " support files)\n"
     << "statements: rewritten " << total.rewritten << ", removed " << total.removed
     << ", passthrough " << total.passthrough << "\n"
     << "files:\n"
     << rows.str();
  r.report = os.str();
  return r;
}

std::string Census::text() const {
  std::ostringstream os;
  os << "files: " << files << "\n"
     << "program units: " << units << "\n"
     << "segments: " << segments << "\n"
     << "pointeurs: " << pointeurs << "\n"
     << "segini: " << segini << "\n"
     << "segini copy: " << segini_copy << "\n"
     << "segact: " << segact << "\n"
     << "segact move: " << segact_move << "\n"
     << "segadj: " << segadj << "\n"
     << "segsup: " << segsup << "\n"
     << "segprt: " << segprt << "\n"
     << "segdes: " << segdes << "\n"
     << "includes: " << includes << "\n"
     << "undeclared variables: " << undeclared << "\n"
     << "unresolved intents: " << unresolved_intents << "\n"
     << "ambiguous default-pointer fields: " << ambiguous_fields << "\n"
     << "negative-pointer warnings: " << warnings.size() << "\n";
  return os.str();
}

namespace {

void count_esope(Census &c, const Stmt &s) {
  if (s.kind == StmtKind::include)
    ++c.includes;
  if (!s.esope)
    return;
  switch (s.esope->kind) {
  case EsopeKind::segment_def: break;
  case EsopeKind::pointer_decl: c.pointeurs += static_cast<int>(s.esope->pointers.size()); break;
  case EsopeKind::segini: ++c.segini; break;
  case EsopeKind::segini_copy: ++c.segini_copy; break;
  case EsopeKind::segact: ++c.segact; break;
  case EsopeKind::segact_move: ++c.segact_move; break;
  case EsopeKind::segadj: ++c.segadj; break;
  case EsopeKind::segsup: ++c.segsup; break;
  case EsopeKind::segprt: ++c.segprt; break;
  case EsopeKind::segdes: ++c.segdes; break;
  }
}

} // namespace

Census take_census(const LoadedProject &p) {
  Census c;
  c.files = static_cast<int>(p.unit_files.size() + p.included_files.size());
  c.units = static_cast<int>(p.parsed.size());
  c.segments = static_cast<int>(p.model.segments.size());
  for (const auto &u : p.parsed)
    u.for_each_stmt([&](const Stmt &s) { count_esope(c, s); });
  // fragments: only their own statements, not the ones expanded from nested includes
  for (const auto &[path, frag] : p.cache->all()) {
    c.includes += static_cast<int>(frag.includes.size());
    int depth = 0;
    for (const auto &s : frag.statements) {
      if (s.kind == StmtKind::include_begin)
        ++depth;
      else if (s.kind == StmtKind::include_end)
        --depth;
      else if (depth == 0 && s.kind != StmtKind::include)
        count_esope(c, s);
    }
  }

  IntentTable intents = infer_intents(p.model);
  for (const auto &[name, list] : intents)
    c.unresolved_intents += static_cast<int>(std::count(list.begin(), list.end(), Intent::unknown));

  for (const auto &u : p.resolved) {
    SymbolTable syms = unit_symbols(p.model, u);
    for (const auto &t : infer_implicit_types(u, syms, p.model))
      if (t.origin == TypeOrigin::implicit_rule)
        ++c.undeclared;
    for (auto &d : negative_pointer_diagnostics(u, syms))
      c.warnings.push_back(std::move(d));
    const UnitSummary *sum = p.model.unit(u.name);
    if (!sum)
      continue;
    auto scope = p.model.scope_of(*sum);
    for (const auto &name : sum->referenced) {
      if (syms.is_local(name))
        continue;
      int owners = 0;
      for (const auto *seg : scope)
        owners += seg->field(name) ? 1 : 0;
      if (owners > 1)
        ++c.ambiguous_fields;
    }
  }
  return c;
}

} // namespace segmig
