#include "segmig/model.hpp"

#include "segmig/analysis.hpp"

#include <algorithm>
#include <sstream>

namespace segmig {

std::string_view intent_name(Intent i) {
  switch (i) {
  case Intent::in: return "in";
  case Intent::out: return "out";
  case Intent::inout: return "inout";
  case Intent::unknown: break;
  }
  return "unknown";
}

Intent join(Intent a, Intent b) {
  if (a == Intent::unknown)
    return b;
  if (b == Intent::unknown || a == b)
    return a;
  return Intent::inout;
}

const UnitSummary *ProjectModel::unit(const std::string &name) const {
  auto it = units.find(name);
  return it == units.end() ? nullptr : &it->second;
}

const SegmentDefinition *ProjectModel::segment(const std::string &name) const {
  auto it = segments.find(name);
  return it == segments.end() ? nullptr : &it->second;
}

std::vector<const SegmentDefinition *> ProjectModel::scope_of(const UnitSummary &u) const {
  std::vector<const SegmentDefinition *> out;
  for (const auto &n : u.visible_segments)
    if (const auto *s = segment(n))
      out.push_back(s);
  return out;
}

std::string ProjectModel::dump() const {
  std::ostringstream os;
  for (const auto &[name, seg] : segments)
    os << "segment " << name << " " << segment_files.at(name) << "\n";
  for (const auto &[name, u] : units)
    os << unit_kind_name(u.kind) << " " << name << " " << u.path << "\n";
  for (const auto &e : call_graph)
    os << "call " << e.caller << " " << e.callee << " " << e.arg_count
       << (e.intrinsic ? " intrinsic" : e.external ? " external" : "") << "\n";
  for (const auto &e : include_graph)
    os << "include " << e.includer << " " << e.included << "\n";
  for (const auto &x : externals)
    os << "external " << x << "\n";
  return os.str();
}

const SegmentDefinition *segment_for_field(const ProjectModel &model, const std::string &field,
                                           const std::vector<std::string> &scope) {
  std::vector<const SegmentDefinition *> segs;
  for (const auto &n : scope)
    if (const auto *s = model.segment(n))
      segs.push_back(s);
  return owning_segment(segs, field);
}

SymbolTable unit_symbols(const ProjectModel &model, const ProgramUnitAst &unit) {
  const UnitSummary *u = model.unit(unit.name);
  std::vector<const SegmentDefinition *> scope;
  if (u)
    scope = model.scope_of(*u);
  return build_symbol_table(unit, scope);
}

namespace {

void add_segment(ProjectModel &m, const SegmentDefinition &seg, const std::string &file) {
  if (auto it = m.segment_files.find(seg.name); it != m.segment_files.end())
    throw MigrationError(seg.span, "segment " + seg.name + " is defined twice (" + it->second +
                                       " and " + file + ")");
  m.segments.emplace(seg.name, seg);
  m.segment_files.emplace(seg.name, file);
}

std::string esope_text(const EsopeStatement &e) {
  std::string out;
  if (e.kind == EsopeKind::pointer_decl) {
    for (const auto &b : e.pointers)
      out += (out.empty() ? "" : ",") + b.pointer + "." + b.segment;
    return out;
  }
  for (const auto &op : e.operands)
    out += (out.empty() ? "" : "=") + canonical_text(op);
  return out;
}

} // namespace

ProjectModel build_project_model(const std::vector<ProgramUnitAst> &units,
                                 const FragmentCache *cache, IntentCatalog catalog) {
  ProjectModel m;
  m.intent_catalog = std::move(catalog);

  if (cache)
    for (const auto &[path, frag] : cache->all())
      for (const auto &seg : frag.segments)
        add_segment(m, seg, path);
  std::map<std::string, std::vector<std::string>> file_segments;
  for (const auto &u : units)
    for (const auto &s : u.body)
      if (s.kind == StmtKind::segment_def) {
        add_segment(m, *s.segment, u.path);
        file_segments[u.path].push_back(s.segment->name);
      }

  for (const auto &u : units) {
    if (m.units.count(u.name))
      throw MigrationError(u.span, std::string(unit_kind_name(u.kind)) + " " + u.name +
                                       " is defined more than once");
    UnitSummary sum;
    sum.name = u.name;
    sum.kind = u.kind;
    sum.params = u.params;
    sum.return_type = u.return_type;
    sum.path = u.path;
    sum.file = u.file;
    auto add_visible = [&](const std::string &n) {
      if (std::find(sum.visible_segments.begin(), sum.visible_segments.end(), n) ==
          sum.visible_segments.end())
        sum.visible_segments.push_back(n);
    };
    for (const auto &s : u.body)
      if (s.kind == StmtKind::segment_def)
        add_visible(s.segment->name);
    for (const auto &seg : u.included_segments)
      add_visible(seg.name);
    for (const auto &n : file_segments[u.path])
      add_visible(n);
    m.units.emplace(u.name, std::move(sum));
  }

  for (const auto &u : units) {
    UnitSummary &sum = m.units.at(u.name);
    SymbolTable syms = build_symbol_table(u, m.scope_of(sum));
    sum.pointers = syms.pointers;
    if (u.kind == UnitKind::function && !sum.return_type) {
      if (const DeclInfo *d = syms.decl(u.name); d && d->type)
        sum.return_type = d->type;
      else
        sum.return_type = ImplicitTable::for_unit(u).type_of(u.name);
    }
    for (const auto &[p, seg] : syms.pointers)
      if (!m.segment(seg))
        throw MigrationError(u.span, "pointer " + p + " refers to unknown segment " + seg +
                                         " in " + u.name);

    u.for_each_stmt([&](const Stmt &s) {
      if (s.esope)
        sum.esope.push_back({s.esope->kind, esope_text(*s.esope), s.span});
    });
    sum.events = unit_events(u, syms);
    for (const auto &s : u.body)
      if (s.kind == StmtKind::external)
        sum.external_decls.insert(s.names.begin(), s.names.end());

    sum.defined.insert(u.name);
    for (const auto &p : u.params)
      sum.defined.insert(p);
    for (const auto &[n, d] : syms.decls)
      sum.defined.insert(n);
    for (const auto &[p, seg] : syms.pointers) {
      sum.defined.insert(p);
      sum.referenced.insert(seg);
    }
    for (const auto &e : sum.events) {
      if (e.kind == UseEvent::field) {
        sum.default_pointers.insert(e.segment);
        sum.referenced.insert(e.segment);
        continue;
      }
      sum.referenced.insert(e.name);
      if (e.kind != UseEvent::invoke)
        continue;
      CallEdge edge;
      edge.caller = u.name;
      edge.callee = e.name;
      edge.arg_count = static_cast<int>(e.passed.size());
      edge.is_function = e.is_function;
      edge.span = e.span;
      bool known = false;
      for (const auto &other : units)
        known = known || other.name == e.name;
      edge.external = !known;
      edge.intrinsic = !known && is_intrinsic_name(e.name);
      if (edge.external && !edge.intrinsic)
        m.externals.insert(e.name);
      m.call_graph.push_back(std::move(edge));
    }

    int depth = 0;
    for (const auto &s : u.body) {
      if (s.kind == StmtKind::include_end)
        --depth;
      if (s.kind == StmtKind::include_begin && depth++ == 0) {
        IncludeEdge edge{u.path, s.from_include};
        if (std::find(m.include_graph.begin(), m.include_graph.end(), edge) ==
            m.include_graph.end())
          m.include_graph.push_back(edge);
      }
    }
  }
  if (cache)
    for (const auto &[path, frag] : cache->all())
      for (const auto &inc : frag.includes) {
        IncludeEdge edge{path, inc};
        if (std::find(m.include_graph.begin(), m.include_graph.end(), edge) ==
            m.include_graph.end())
          m.include_graph.push_back(edge);
      }
  return m;
}

} // namespace segmig
