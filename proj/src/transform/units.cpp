#include "segmig/transform.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>

namespace segmig {

namespace {

std::string join(const std::vector<std::string> &xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i)
    out += (i ? ", " : "") + xs[i];
  return out;
}

bool invoked(const UnitContext &ctx, const std::string &name) {
  const UnitSummary *s = ctx.model->unit(ctx.unit->name);
  if (!s)
    return false;
  return std::any_of(s->events.begin(), s->events.end(), [&](const UseEvent &e) {
    return e.kind == UseEvent::invoke && e.name == name;
  });
}

bool in_external_stmt(const ProgramUnitAst &unit, const std::string &name) {
  for (const auto &s : unit.body)
    if (s.kind == StmtKind::external &&
        std::find(s.names.begin(), s.names.end(), name) != s.names.end())
      return true;
  return false;
}

// Declarations for everything the source left to implicit typing, plus
// intent attributes of the dummy arguments.
std::vector<TargetNode> hoisted_declarations(const UnitContext &ctx) {
  const ProgramUnitAst &unit = *ctx.unit;
  std::vector<TargetNode> out;
  std::map<std::string, std::vector<std::string>> intent_groups;
  std::vector<std::string> intent_order;

  for (std::size_t i = 0; i < unit.params.size(); ++i) {
    const std::string &p = unit.params[i];
    if (invoked(ctx, p))
      continue; // dummy procedure
    auto it = ctx.types.find(p);
    std::string intent(intent_name(ctx.intents[i]));
    if (it != ctx.types.end() && it->second.origin == TypeOrigin::implicit_rule) {
      out.push_back(TargetNode::decl(type_spelling(it->second.type) + ", intent(" + intent +
                                     ") :: " + p));
    } else if (it != ctx.types.end() && it->second.origin == TypeOrigin::pointeur_decl &&
               !ctx.syms.pointers.count(p)) {
      out.push_back(TargetNode::decl("type(" + ctx.type_name(it->second.segment) +
                                     "), pointer, intent(" + intent + ") :: " + p));
    } else {
      if (!intent_groups.count(intent))
        intent_order.push_back(intent);
      intent_groups[intent].push_back(p);
    }
  }
  for (const auto &i : intent_order)
    out.push_back(TargetNode::decl("intent(" + i + ") :: " + join(intent_groups[i])));

  if (unit.kind == UnitKind::function && !unit.return_type) {
    const DeclInfo *d = ctx.syms.decl(unit.name);
    auto it = ctx.types.find(unit.name);
    if (!(d && d->type) && it != ctx.types.end())
      out.push_back(TargetNode::decl(type_spelling(it->second.type) + " :: " + unit.name));
  }

  std::map<std::string, std::vector<std::string>> pointer_groups;
  std::map<std::string, std::vector<std::string>> implicit_groups;
  std::vector<std::string> functions;
  for (const auto &[name, a] : ctx.types) {
    bool param = ctx.syms.is_param(name);
    switch (a.origin) {
    case TypeOrigin::pointeur_decl:
      if (!param && !ctx.syms.pointers.count(name))
        pointer_groups[a.segment].push_back(name);
      break;
    case TypeOrigin::implicit_rule:
      if (!param)
        implicit_groups[type_spelling(a.type)].push_back(name);
      break;
    case TypeOrigin::function_return: {
      if (name == unit.name || ctx.is_project_routine(name) || ctx.interfaces.count(name) ||
          param)
        break;
      const DeclInfo *d = ctx.syms.decl(name);
      if (d && d->type)
        break;
      std::string attr = in_external_stmt(unit, name) ? "" : ", external";
      functions.push_back(type_spelling(a.type) + attr + " :: " + name);
      break;
    }
    case TypeOrigin::declared:
      break;
    }
  }
  for (const auto &[seg, names] : pointer_groups)
    out.push_back(TargetNode::decl("type(" + ctx.type_name(seg) + "), pointer :: " + join(names)));
  for (const auto &[type, names] : implicit_groups)
    out.push_back(TargetNode::decl(type + " :: " + join(names)));
  for (auto &f : functions)
    out.push_back(TargetNode::decl(f));
  return out;
}

bool opens_block(const Stmt &s) {
  return s.kind == StmtKind::if_then || s.kind == StmtKind::do_while ||
         (s.kind == StmtKind::do_loop && s.do_label == 0);
}

std::string header_text(const ProgramUnitAst &unit) {
  std::string args = "(" + join(unit.params) + ")";
  switch (unit.kind) {
  case UnitKind::subroutine:
    return "subroutine " + unit.name + (unit.params.empty() ? "" : args);
  case UnitKind::function:
    return (unit.return_type ? type_spelling(*unit.return_type) + " " : std::string()) +
           "function " + unit.name + args;
  case UnitKind::program: return "program " + unit.name;
  case UnitKind::block_data: return "block data " + unit.name;
  case UnitKind::fragment: break;
  }
  return unit.name;
}

std::string end_text(const ProgramUnitAst &unit) {
  switch (unit.kind) {
  case UnitKind::subroutine: return "end subroutine " + unit.name;
  case UnitKind::function: return "end function " + unit.name;
  case UnitKind::program: return "end program " + unit.name;
  case UnitKind::block_data: return "end block data " + unit.name;
  case UnitKind::fragment: break;
  }
  return "end";
}

} // namespace

TargetNode wrap_in_module(const std::string &unit_name, const std::vector<Import> &uses,
                          TargetNode procedure) {
  std::vector<TargetNode> kids;
  for (const auto &u : uses)
    kids.push_back(TargetNode::use(render_import(u)));
  kids.push_back(TargetNode::stmt("implicit none"));
  kids.push_back(TargetNode::contains());
  kids.push_back(std::move(procedure));
  TargetNode m = TargetNode::container(NodeKind::module, "module " + unit_name + "_mod",
                                       "end module " + unit_name + "_mod", std::move(kids));
  m.name = unit_name + "_mod";
  m.origin = m.children.back().origin;
  return m;
}

MigratedUnit migrate_unit(const ProgramUnitAst &unit, const ProjectModel &model,
                          const IntentTable &intents) {
  if (unit.kind == UnitKind::fragment)
    throw MigrationError(unit.span, "an include fragment is not a program unit");
  UnitContext ctx = UnitContext::build(model, unit, intents);
  MigratedUnit mu;

  std::vector<TargetNode> body = hoisted_declarations(ctx);
  std::vector<int> open_labels;
  for (const auto &s : unit.body) {
    RewriteOutcome r = rewrite_statement(s, ctx);
    if (!s.is_comment_like() && s.kind != StmtKind::directive) {
      if (r.removed)
        ++mu.stats.removed;
      else if (r.changed)
        ++mu.stats.rewritten;
      else
        ++mu.stats.passthrough;
    }
    if (r.nodes.empty())
      continue;
    TargetNode &first = r.nodes.front();
    TargetNode &last = r.nodes.back();
    if (s.kind == StmtKind::else_if || s.kind == StmtKind::else_ ||
        s.kind == StmtKind::end_if || s.kind == StmtKind::end_do)
      first.dedent_before = 1;
    if (s.kind == StmtKind::else_if || s.kind == StmtKind::else_ || opens_block(s))
      last.indent_after = 1;
    if (s.kind == StmtKind::do_loop && s.do_label != 0) {
      last.indent_after = 1;
      open_labels.push_back(s.do_label);
    } else if (s.label) {
      int closed = 0;
      while (!open_labels.empty() && open_labels.back() == *s.label) {
        open_labels.pop_back();
        ++closed;
      }
      // END DO closing a labelled loop already dedents before itself
      if (s.kind == StmtKind::end_do && closed > 0)
        --closed;
      last.dedent_after = closed;
    }
    for (auto &n : r.nodes)
      body.push_back(std::move(n));
  }
  if (unit.end && unit.end->label) {
    TargetNode n = TargetNode::stmt("continue", unit.end->span);
    n.label = unit.end->label;
    body.push_back(std::move(n));
  }

  for (const auto &s : unit.leading)
    mu.nodes.push_back(rewrite_statement(s, ctx).nodes.front());

  TargetNode main;
  switch (unit.kind) {
  case UnitKind::subroutine:
  case UnitKind::function: {
    TargetNode proc = TargetNode::container(NodeKind::procedure, header_text(unit),
                                            end_text(unit), std::move(body));
    proc.origin = unit.span;
    proc.name = unit.name;
    main = wrap_in_module(unit.name, ctx.uses, std::move(proc));
    break;
  }
  case UnitKind::program:
  case UnitKind::block_data: {
    std::vector<TargetNode> kids;
    for (const auto &u : ctx.uses)
      kids.push_back(TargetNode::use(render_import(u)));
    kids.push_back(TargetNode::stmt("implicit none"));
    for (auto &n : body)
      kids.push_back(std::move(n));
    main = TargetNode::container(NodeKind::program, header_text(unit), end_text(unit),
                                 std::move(kids));
    main.origin = unit.span;
    main.name = unit.name;
    mu.is_program = unit.kind == UnitKind::program;
    break;
  }
  case UnitKind::fragment:
    break;
  }
  mu.nodes.push_back(std::move(main));
  for (const auto &s : unit.trailing)
    for (auto &n : rewrite_statement(s, ctx).nodes)
      mu.nodes.push_back(std::move(n));
  return mu;
}

namespace {

std::string output_stem(const std::string &path, const std::string &source_dir) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (!source_dir.empty()) {
    std::string dir = normalize_path(source_dir);
    if (!dir.empty() && dir.back() != '/')
      dir += '/';
    if (path.rfind(dir, 0) == 0)
      return path.substr(dir.size());
  }
  return p.filename().string();
}

// Segments of one file, each after the segments it points to.
std::vector<const SegmentDefinition *> ordered_segments(std::vector<const SegmentDefinition *> segs) {
  std::sort(segs.begin(), segs.end(), [](auto *a, auto *b) {
    return a->span.start_line < b->span.start_line;
  });
  std::vector<const SegmentDefinition *> out;
  std::set<std::string> placed;
  std::function<void(const SegmentDefinition *)> place = [&](const SegmentDefinition *s) {
    if (placed.count(s->name))
      return;
    placed.insert(s->name);
    for (const auto &f : s->fields)
      if (f.type.base == FieldBase::segment_pointer)
        for (auto *o : segs)
          if (o->name == f.type.segment)
            place(o);
    out.push_back(s);
  };
  for (auto *s : segs)
    place(s);
  return out;
}

void check_segment_cycles(const ProjectModel &model) {
  std::map<std::string, int> state; // 1 on stack, 2 done
  std::vector<std::string> stack;
  std::function<void(const SegmentDefinition &)> visit = [&](const SegmentDefinition &s) {
    state[s.name] = 1;
    stack.push_back(s.name);
    for (const auto &f : s.fields) {
      if (f.type.base != FieldBase::segment_pointer || f.type.segment == s.name)
        continue;
      const SegmentDefinition *t = model.segment(f.type.segment);
      if (!t)
        throw MigrationError(f.span, "field " + f.name + " of segment " + s.name +
                                         " points to unknown segment " + f.type.segment);
      if (state[t->name] == 1) {
        std::string cycle;
        auto from = std::find(stack.begin(), stack.end(), t->name);
        for (auto it = from; it != stack.end(); ++it)
          cycle += *it + " -> ";
        throw MigrationError(s.span, "segments refer to each other through pointer fields (" +
                                         cycle + t->name +
                                         "); their modules would depend on each other");
      }
      if (state[t->name] == 0)
        visit(*t);
    }
    stack.pop_back();
    state[s.name] = 2;
  };
  for (const auto &[name, s] : model.segments)
    if (state[name] == 0)
      visit(s);
}

int count_kind(const TargetNode &tree, NodeKind k) {
  int n = 0;
  walk_tree(tree, [&](const TargetNode &x) {
    if (x.kind == k)
      ++n;
  });
  return n;
}

} // namespace

std::vector<MigratedFile> migrate_project(const ProjectModel &model,
                                          const std::vector<ProgramUnitAst> &units,
                                          const MigrationOptions &opts) {
  std::vector<Diagnostic> errors;
  auto collect = [&](auto &&f) {
    try {
      f();
    } catch (const MigrationError &e) {
      errors.insert(errors.end(), e.diagnostics().begin(), e.diagnostics().end());
    }
  };
  collect([&] { check_segment_cycles(model); });
  if (!errors.empty())
    throw MigrationError(errors);

  IntentTable intents = infer_intents(model);

  std::map<std::string, std::vector<const ProgramUnitAst *>> by_file;
  for (const auto &u : units)
    by_file[u.path].push_back(&u);
  std::map<std::string, std::vector<const SegmentDefinition *>> segs_by_file;
  for (const auto &[name, file] : model.segment_files) {
    segs_by_file[file].push_back(model.segment(name));
    by_file[file];
  }

  // output names: the extension becomes .f90, kept on collision
  std::map<std::string, int> stems;
  std::vector<std::string> reserved = {std::string(kSegmentModule) + ".f90",
                                       std::string(kRegistryModule) + ".f90"};
  for (const auto &r : reserved)
    ++stems[r];
  auto f90 = [](const std::string &rel) {
    return std::filesystem::path(rel).replace_extension(".f90").generic_string();
  };
  for (const auto &[path, _] : by_file)
    ++stems[f90(output_stem(path, opts.source_dir))];

  std::vector<MigratedFile> out;
  for (const auto &[path, file_units] : by_file) {
    MigratedFile mf;
    mf.source = path;
    std::string rel = output_stem(path, opts.source_dir);
    mf.output = stems[f90(rel)] > 1 ? rel + ".f90" : f90(rel);
    mf.tree.kind = NodeKind::file;
    for (const SegmentDefinition *s : ordered_segments(segs_by_file[path]))
      collect([&] { mf.tree.children.push_back(migrate_segment(*s)); });
    auto sorted = file_units;
    std::sort(sorted.begin(), sorted.end(), [](auto *a, auto *b) {
      return a->span.start_line < b->span.start_line;
    });
    for (const ProgramUnitAst *u : sorted)
      collect([&] {
        MigratedUnit mu = migrate_unit(*u, model, intents);
        mf.stats += mu.stats;
        for (auto &n : mu.nodes)
          mf.tree.children.push_back(std::move(n));
      });
    mf.modules = count_kind(mf.tree, NodeKind::module);
    mf.programs = 0;
    for (const auto &c : mf.tree.children)
      if (c.kind == NodeKind::program && c.text.rfind("program ", 0) == 0)
        ++mf.programs;
    if (!mf.tree.children.empty())
      out.push_back(std::move(mf));
  }
  if (!errors.empty())
    throw MigrationError(errors);

  auto support = generate_support_modules();
  for (auto &s : support) {
    MigratedFile mf;
    mf.output = s.name + ".f90";
    mf.tree.kind = NodeKind::file;
    mf.tree.children.push_back(std::move(s));
    mf.modules = 1;
    out.push_back(std::move(mf));
  }
  return out;
}

} // namespace segmig
