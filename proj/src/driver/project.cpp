#include "segmig/project.hpp"

#include "segmig/parser.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

namespace segmig {

namespace {

template <typename F> void collect(std::vector<Diagnostic> &errors, F &&f) {
  try {
    f();
  } catch (const MigrationError &e) {
    errors.insert(errors.end(), e.diagnostics().begin(), e.diagnostics().end());
  }
}

} // namespace

namespace {

void load_into(LoadedProject &project, const SourceLoader &loader, const ProjectInput &in) {
  LoadedProject *p = &project;
  p->resolver = std::make_unique<IncludeResolver>(loader, in.include_dirs, in.source_dir);
  p->cache = std::make_unique<FragmentCache>(*p->resolver, p->files, in.encoding);

  std::vector<std::string> sources;
  for (const auto &f : in.source_files)
    sources.push_back(normalize_path(f));
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());

  std::vector<Diagnostic> errors;
  std::set<std::string> included;
  for (const auto &path : sources) {
    if (p->files.find(path) == 0)
      p->files.add(path);
    collect(errors, [&] {
      auto text = loader.read(path);
      if (!text)
        throw MigrationError(SourceSpan{}, "cannot read " + path);
      p->lines[path] = split_logical_lines(*text, p->files.find(path), in.encoding);
      for (const auto &d : scan_includes(p->lines[path]))
        included.insert(p->resolver->resolve(d, path));
    });
  }
  if (!errors.empty())
    throw MigrationError(errors);

  // Header-style files nobody includes are still fragments, never main programs.
  for (const auto &path : sources) {
    auto ext = to_lower(std::filesystem::path(path).extension().string());
    if (ext == ".inc" || ext == ".seg" || ext == ".h")
      included.insert(path);
  }
  // Included files first, in sorted order; the cache is read-only afterwards.
  for (const auto &path : included)
    collect(errors, [&] { p->cache->load(path); });
  if (!errors.empty())
    throw MigrationError(errors);

  for (const auto &path : sources) {
    if (included.count(path)) {
      p->included_files.push_back(path);
      continue;
    }
    p->unit_files.push_back(path);
    collect(errors, [&] {
      auto units = parse_file(p->lines[path], p->files.find(path), path);
      for (auto &u : units) {
        ProgramUnitAst r = resolve_includes(u, *p->cache);
        p->parsed.push_back(std::move(u));
        p->resolved.push_back(std::move(r));
      }
    });
  }
  // Included files outside the source tree (found on include paths).
  for (const auto &path : included)
    if (!std::binary_search(sources.begin(), sources.end(), path))
      p->included_files.push_back(path);
  std::sort(p->included_files.begin(), p->included_files.end());
  if (!errors.empty())
    throw MigrationError(errors);

  p->model = build_project_model(p->resolved, p->cache.get(), in.catalog);
}

} // namespace

std::unique_ptr<LoadedProject> load_project(const SourceLoader &loader, const ProjectInput &in) {
  auto p = std::make_unique<LoadedProject>();
  try {
    load_into(*p, loader, in);
  } catch (const MigrationError &e) {
    throw LoadError(e.diagnostics(), p->files);
  }
  return p;
}

} // namespace segmig
