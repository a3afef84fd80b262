#include "segmig/analysis.hpp"
#include "segmig/driver.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

namespace py = pybind11;
using namespace segmig;

namespace {

// In-memory sources live under this prefix so include lookups and output
// names behave as on disk.
const std::string kRoot = "src";

struct Session {
  std::unique_ptr<MemoryLoader> loader;
  std::unique_ptr<LoadedProject> project;
  RunConfig cfg;
};

py::object migration_error_type;

[[noreturn]] void raise(const FileTable &files, std::vector<Diagnostic> ds) {
  sort_diagnostics(files, ds);
  py::list msgs;
  std::string text;
  for (const auto &d : ds) {
    std::string m = format_diagnostic(files, d);
    msgs.append(m);
    text += (text.empty() ? "" : "\n") + m;
  }
  PyErr_SetObject(migration_error_type.ptr(), py::make_tuple(text, msgs).ptr());
  throw py::error_already_set();
}

RunConfig make_config(const std::vector<std::string> &include_paths, int indent, int line_length,
                      const std::string &keyword_case, const std::string &encoding) {
  RunConfig cfg;
  cfg.source_dir = kRoot;
  std::ostringstream text;
  text << "indent = " << indent << "\nline-length = " << line_length
       << "\nkeyword-case = " << keyword_case << "\nencoding = " << encoding << "\n";
  try {
    apply_config_text(text.str(), cfg);
    cfg.render.validate();
  } catch (const ConfigError &e) {
    throw py::value_error(e.what());
  } catch (const MigrationError &e) {
    throw py::value_error(e.what());
  }
  for (const auto &p : include_paths)
    cfg.include_paths.push_back(kRoot + "/" + p);
  return cfg;
}

Session load(const std::map<std::string, std::string> &files,
             const std::vector<std::string> &include_paths, const std::optional<std::string> &catalog,
             int indent, int line_length, const std::string &keyword_case,
             const std::string &encoding) {
  Session s;
  s.cfg = make_config(include_paths, indent, line_length, keyword_case, encoding);
  std::map<std::string, std::string> rooted;
  std::vector<std::string> sources;
  for (const auto &[path, text] : files) {
    std::string p = normalize_path(kRoot + "/" + path);
    rooted[p] = text;
    std::string ext = std::filesystem::path(p).extension().string();
    if (std::find(s.cfg.extensions.begin(), s.cfg.extensions.end(), ext) != s.cfg.extensions.end())
      sources.push_back(p);
  }
  std::sort(sources.begin(), sources.end());
  IntentCatalog cat;
  if (catalog) {
    try {
      cat = parse_intent_catalog(*catalog);
    } catch (const MigrationError &e) {
      throw py::value_error(std::string("intent catalog: ") + e.what());
    }
  }
  s.loader = std::make_unique<MemoryLoader>(std::move(rooted));
  try {
    s.project = load_project(*s.loader, project_input(s.cfg, sources, std::move(cat)));
  } catch (const LoadError &e) {
    raise(e.files(), e.diagnostics());
  }
  return s;
}

std::string strip_root(const std::string &p) {
  return p.rfind(kRoot + "/", 0) == 0 ? p.substr(kRoot.size() + 1) : p;
}

py::dict migrate(const std::map<std::string, std::string> &files,
                 const std::vector<std::string> &include_paths,
                 const std::optional<std::string> &catalog, int indent, int line_length,
                 const std::string &keyword_case) {
  Session s = load(files, include_paths, catalog, indent, line_length, keyword_case, "utf-8");
  MigrationResult r;
  try {
    r = migrate_loaded(*s.project, kRoot, s.cfg.render);
  } catch (const MigrationError &e) {
    raise(s.project->files, e.diagnostics());
  }
  py::dict outputs;
  for (const auto &o : r.outputs)
    outputs[py::str(o.path)] = o.text;
  py::list rows;
  for (const auto &f : r.files) {
    py::dict row;
    row["source"] = f.source.empty() ? py::object(py::none()) : py::object(py::str(strip_root(f.source)));
    row["output"] = f.output;
    row["rewritten"] = f.stats.rewritten;
    row["removed"] = f.stats.removed;
    row["passthrough"] = f.stats.passthrough;
    rows.append(row);
  }
  py::dict out;
  out["outputs"] = outputs;
  out["files"] = rows;
  out["report"] = r.report;
  return out;
}

py::dict check(const std::map<std::string, std::string> &files,
               const std::vector<std::string> &include_paths,
               const std::optional<std::string> &catalog) {
  Session s = load(files, include_paths, catalog, 2, 132, "lower", "utf-8");
  Census c;
  try {
    c = take_census(*s.project);
  } catch (const MigrationError &e) {
    raise(s.project->files, e.diagnostics());
  }
  py::dict d;
  d["files"] = c.files;
  d["units"] = c.units;
  d["segments"] = c.segments;
  d["pointeurs"] = c.pointeurs;
  d["segini"] = c.segini;
  d["segini_copy"] = c.segini_copy;
  d["segact"] = c.segact;
  d["segact_move"] = c.segact_move;
  d["segadj"] = c.segadj;
  d["segsup"] = c.segsup;
  d["segprt"] = c.segprt;
  d["segdes"] = c.segdes;
  d["includes"] = c.includes;
  d["undeclared"] = c.undeclared;
  d["unresolved_intents"] = c.unresolved_intents;
  d["ambiguous_fields"] = c.ambiguous_fields;
  py::list warnings;
  for (const auto &w : c.warnings)
    warnings.append(format_diagnostic(s.project->files, w));
  d["warnings"] = warnings;
  return d;
}

std::string dump_model(const std::map<std::string, std::string> &files,
                       const std::vector<std::string> &include_paths) {
  return load(files, include_paths, std::nullopt, 2, 132, "lower", "utf-8").project->model.dump();
}

std::map<std::string, std::vector<std::string>>
infer(const std::map<std::string, std::string> &files, const std::vector<std::string> &include_paths,
      const std::optional<std::string> &catalog) {
  Session s = load(files, include_paths, catalog, 2, 132, "lower", "utf-8");
  std::map<std::string, std::vector<std::string>> out;
  for (const auto &[name, list] : infer_intents(s.project->model))
    for (Intent i : list)
      out[name].emplace_back(intent_name(i));
  return out;
}

py::tuple cli(const std::vector<std::string> &args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = run_cli(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

} // namespace

PYBIND11_MODULE(_segmig, m) {
  m.doc() = "Esope / FORTRAN 77 to Fortran 2008 migration";
  migration_error_type = py::reinterpret_borrow<py::object>(
      PyErr_NewException("segmig.MigrationError", PyExc_RuntimeError, nullptr));
  m.attr("MigrationError") = migration_error_type;

  m.def("migrate", &migrate, py::arg("files"), py::arg("include_paths") = std::vector<std::string>{},
        py::arg("intent_catalog") = std::nullopt, py::arg("indent") = 2,
        py::arg("line_length") = 132, py::arg("keyword_case") = "lower",
        "Migrates in-memory sources {path: text}; returns outputs, per-file rows and the report.");
  m.def("check", &check, py::arg("files"), py::arg("include_paths") = std::vector<std::string>{},
        py::arg("intent_catalog") = std::nullopt, "Census of Esope constructs; writes nothing.");
  m.def("dump_model", &dump_model, py::arg("files"),
        py::arg("include_paths") = std::vector<std::string>{});
  m.def("infer_intents", &infer, py::arg("files"),
        py::arg("include_paths") = std::vector<std::string>{},
        py::arg("intent_catalog") = std::nullopt, "Intent of each parameter, per routine.");
  m.def("run_cli", &cli, py::arg("args"),
        "Runs the seg-migrate command line; returns (exit code, stdout, stderr).");
}
