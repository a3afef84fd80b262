#include "segmig/transform.hpp"

#include <algorithm>

namespace segmig {

namespace {

std::string field_type(const FieldType &t) {
  switch (t.base) {
  case FieldBase::integer: return "integer";
  case FieldBase::real: return "real";
  case FieldBase::double_precision: return "double precision";
  case FieldBase::logical: return "logical";
  case FieldBase::character: return "character(len=" + std::to_string(t.char_len) + ")";
  case FieldBase::segment_pointer: return "type(" + t.segment + ")";
  }
  return "integer";
}

std::string zero_of(const FieldType &t) {
  switch (t.base) {
  case FieldBase::integer: return "0";
  case FieldBase::real: return "0.0";
  case FieldBase::double_precision: return "0.0d0";
  case FieldBase::logical: return ".false.";
  case FieldBase::character: return "''";
  case FieldBase::segment_pointer: return "";
  }
  return "0";
}

std::string dims_text(const std::vector<ExprTokenStream> &dims) {
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i)
    out += (i ? ", " : "") + canonical_text(dims[i]);
  return out;
}

std::string deferred_shape(std::size_t rank) {
  std::string out = "(";
  for (std::size_t i = 0; i < rank; ++i)
    out += i ? ",:" : ":";
  return out + ")";
}

std::string join(const std::vector<std::string> &xs, const std::string &sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i)
    out += (i ? sep : "") + xs[i];
  return out;
}

std::vector<const FieldDef *> dynamic_fields(const SegmentDefinition &seg) {
  std::vector<const FieldDef *> out;
  for (const auto &f : seg.fields)
    if (f.is_dynamic)
      out.push_back(&f);
  return out;
}

// A dummy name that differs from every dimensioning variable.
std::string fresh(const SegmentDefinition &seg, std::string base) {
  auto taken = [&](const std::string &n) {
    return std::find(seg.dimensioning_vars.begin(), seg.dimensioning_vars.end(), n) !=
           seg.dimensioning_vars.end();
  };
  while (taken(base))
    base += "_";
  return base;
}

TargetNode proc(const std::string &name, std::string text) {
  return TargetNode::templ(TemplateRole::procedure, name, std::move(text));
}

std::string dim_decls(const SegmentDefinition &seg) {
  std::string out;
  for (const auto &v : seg.dimensioning_vars)
    out += "  integer, intent(in) :: " + v + "\n";
  return out;
}

std::string extent_fn(const SegmentDefinition &seg, const FieldDef &f) {
  return seg.name + "_" + f.name + "_extent";
}

std::string extent_var(const FieldDef &f) { return "ext_" + f.name; }

std::string extent_list(const FieldDef &f, const std::string &prefix) {
  std::vector<std::string> xs;
  for (std::size_t k = 1; k <= f.dims.size(); ++k)
    xs.push_back(prefix + "(" + std::to_string(k) + ")");
  return join(xs);
}

} // namespace

std::vector<TargetNode> synthesize_command_bodies(const SegmentDefinition &seg) {
  std::vector<TargetNode> out;
  const std::string dims_args = join(seg.dimensioning_vars);
  auto dyn = dynamic_fields(seg);
  const std::string p = fresh(seg, "p");
  const std::string q = fresh(seg, "q");
  const std::string ext = fresh(seg, "ext");

  for (const FieldDef *f : dyn) {
    std::string t = "function " + extent_fn(seg, *f) + "(" + dims_args + ") result(" + ext + ")\n";
    t += dim_decls(seg);
    t += "  integer :: " + ext + "(" + std::to_string(f->dims.size()) + ")\n";
    for (std::size_t k = 0; k < f->dims.size(); ++k)
      t += "  " + ext + "(" + std::to_string(k + 1) + ") = int(" + canonical_text(f->dims[k]) +
           ")\n";
    t += "  if (any(" + ext + " < 0)) then\n";
    t += "    write(*, '(a)') '{1}: negative extent for field " + f->name + "'\n";
    t += "    error stop 1\n";
    t += "  end if\n";
    t += "end function " + extent_fn(seg, *f) + "\n";
    out.push_back(proc(extent_fn(seg, *f), t));
  }

  auto ext_decls = [&] {
    std::string t;
    for (const FieldDef *f : dyn)
      t += "  integer :: " + extent_var(*f) + "(" + std::to_string(f->dims.size()) + ")\n";
    return t;
  };
  auto ext_assign = [&] {
    std::string t;
    for (const FieldDef *f : dyn)
      t += "  " + extent_var(*f) + " = " + extent_fn(seg, *f) + "(" + dims_args + ")\n";
    return t;
  };
  std::string args = seg.dimensioning_vars.empty() ? p : p + ", " + dims_args;

  // segini
  {
    std::string t = "subroutine {1}_segini(" + args + ")\n";
    t += "  type({1}), pointer, intent(out) :: " + p + "\n";
    t += dim_decls(seg);
    t += ext_decls();
    t += ext_assign();
    t += "  allocate(" + p + ")\n";
    for (const auto &v : seg.dimensioning_vars)
      t += "  " + p + "%" + v + " = " + v + "\n";
    for (const FieldDef *f : dyn) {
      t += "  allocate(" + p + "%" + f->name + "(" + extent_list(*f, extent_var(*f)) + "))\n";
      t += "  " + p + "%" + f->name + " = " + zero_of(f->type) + "\n";
    }
    t += "end subroutine {1}_segini\n";
    out.push_back(proc("segini", t));
  }

  // segadj: new arrays, copy the overlap, release, repoint
  {
    std::string t = "subroutine {1}_segadj(" + args + ")\n";
    t += "  type({1}), intent(inout) :: " + p + "\n";
    t += dim_decls(seg);
    t += ext_decls();
    for (const FieldDef *f : dyn)
      t += "  " + field_type(f->type) + ", pointer :: new_" + f->name +
           deferred_shape(f->dims.size()) + "\n";
    t += ext_assign();
    for (const FieldDef *f : dyn) {
      const std::string nf = "new_" + f->name;
      const std::string old = p + "%" + f->name;
      t += "  allocate(" + nf + "(" + extent_list(*f, extent_var(*f)) + "))\n";
      t += "  " + nf + " = " + zero_of(f->type) + "\n";
      t += "  if (associated(" + old + ")) then\n";
      std::vector<std::string> ranges;
      for (std::size_t k = 1; k <= f->dims.size(); ++k)
        ranges.push_back("1:min(size(" + old + ", dim=" + std::to_string(k) + "), " +
                         extent_var(*f) + "(" + std::to_string(k) + "))");
      t += "    " + nf + "(" + join(ranges) + ") = " + old + "(" + join(ranges) + ")\n";
      t += "    deallocate(" + old + ")\n";
      t += "  end if\n";
      t += "  " + old + " => " + nf + "\n";
    }
    for (const auto &v : seg.dimensioning_vars)
      t += "  " + p + "%" + v + " = " + v + "\n";
    t += "end subroutine {1}_segadj\n";
    out.push_back(proc("segadj", t));
  }

  // segsup
  {
    std::string t = "subroutine {1}_segsup(self)\n";
    t += "  class({1}), intent(inout) :: self\n";
    for (const FieldDef *f : dyn) {
      t += "  if (associated(self%" + f->name + ")) deallocate(self%" + f->name + ")\n";
      t += "  nullify(self%" + f->name + ")\n";
    }
    for (const auto &f : seg.fields)
      if (f.type.base == FieldBase::segment_pointer)
        t += "  nullify(self%" + f.name + ")\n";
    for (const auto &v : seg.dimensioning_vars)
      t += "  self%" + v + " = 0\n";
    t += "end subroutine {1}_segsup\n";
    out.push_back(proc("segsup", t));
  }

  // segprt: one line per field
  {
    std::string t = "subroutine {1}_segprt(self)\n";
    t += "  class({1}), intent(in) :: self\n";
    t += "  write(*, '(a)') 'segment {1}'\n";
    for (const auto &v : seg.dimensioning_vars)
      t += "  write(*, *) '" + v + " = ', self%" + v + "\n";
    for (const auto &f : seg.fields) {
      const std::string x = "self%" + f.name;
      if (f.type.base == FieldBase::segment_pointer) {
        t += "  write(*, *) '" + f.name + " associated = ', associated(" + x + ")\n";
      } else if (f.dims.empty()) {
        t += "  write(*, *) '" + f.name + " = ', " + x + "\n";
      } else {
        std::vector<std::string> extents;
        for (std::size_t k = 1; k <= f.dims.size(); ++k)
          extents.push_back("size(" + x + ", dim=" + std::to_string(k) + ")");
        std::string shape = "'" + f.name + "(', " + join(extents, ", ',', ") + ", ') = ', " + x;
        if (f.is_dynamic) {
          t += "  if (associated(" + x + ")) then\n";
          t += "    write(*, *) " + shape + "\n";
          t += "  else\n";
          t += "    write(*, '(a)') '" + f.name + " = (not allocated)'\n";
          t += "  end if\n";
        } else {
          t += "  write(*, *) " + shape + "\n";
        }
      }
    }
    t += "end subroutine {1}_segprt\n";
    out.push_back(proc("segprt", t));
  }

  auto copy_fields = [&](const std::string &to, const std::string &from, bool allocate) {
    std::string t;
    for (const auto &v : seg.dimensioning_vars)
      t += "  " + to + "%" + v + " = " + from + "%" + v + "\n";
    for (const auto &f : seg.fields) {
      const std::string a = to + "%" + f.name, b = from + "%" + f.name;
      if (f.type.base == FieldBase::segment_pointer) {
        t += "  " + a + " => " + b + "\n";
      } else if (f.is_dynamic) {
        if (allocate) {
          std::vector<std::string> extents;
          for (std::size_t k = 1; k <= f.dims.size(); ++k)
            extents.push_back("size(" + b + ", dim=" + std::to_string(k) + ")");
          t += "  if (associated(" + b + ")) then\n";
          t += "    allocate(" + a + "(" + join(extents) + "))\n";
          t += "    " + a + " = " + b + "\n";
          t += "  end if\n";
        } else {
          t += "  " + a + " = " + b + "\n";
        }
      } else {
        t += "  " + a + " = " + b + "\n";
      }
    }
    return t;
  };

  // segcop: fresh instance sized like the source
  {
    std::string t = "subroutine {1}_segcop(" + p + ", " + q + ")\n";
    t += "  type({1}), pointer, intent(out) :: " + p + "\n";
    t += "  type({1}), intent(in) :: " + q + "\n";
    t += "  allocate(" + p + ")\n";
    t += copy_fields(p, q, true);
    t += "end subroutine {1}_segcop\n";
    out.push_back(proc("segcop", t));
  }
  {
    std::string t = "subroutine {1}_clone(self, copy)\n";
    t += "  class({1}), intent(in) :: self\n";
    t += "  class(segment), pointer, intent(out) :: copy\n";
    t += "  type({1}), pointer :: fresh\n";
    t += "  call {1}_segcop(fresh, self)\n";
    t += "  copy => fresh\n";
    t += "end subroutine {1}_clone\n";
    out.push_back(proc("clone", t));
  }

  // segmov: existing target
  {
    std::string t = "subroutine {1}_segmov(self, source)\n";
    t += "  class({1}), intent(inout) :: self\n";
    t += "  class(segment), intent(in) :: source\n";
    t += "  select type (source)\n";
    t += "  type is ({1})\n";
    std::string body;
    for (const FieldDef *f : dyn) {
      const std::string a = "self%" + f->name, b = "source%" + f->name;
      body += "  if (.not. associated(" + a + ")) then\n";
      body += "    write(*, '(a)') 'segmov: field " + f->name + " of the target {1} is not allocated'\n";
      body += "    error stop 1\n";
      body += "  end if\n";
      body += "  if (.not. associated(" + b + ")) then\n";
      body += "    write(*, '(a)') 'segmov: field " + f->name + " of the source {1} is not allocated'\n";
      body += "    error stop 1\n";
      body += "  end if\n";
      body += "  if (any(shape(" + a + ") /= shape(" + b + "))) then\n";
      body += "    write(*, '(a)') 'segmov: field " + f->name + " differs in shape'\n";
      body += "    error stop 1\n";
      body += "  end if\n";
    }
    body += copy_fields("self", "source", false);
    // indent the type-is block one level
    std::string shifted;
    std::size_t start = 0;
    while (start < body.size()) {
      auto nl = body.find('\n', start);
      shifted += "  " + body.substr(start, nl - start + 1);
      start = nl + 1;
    }
    t += shifted;
    t += "  class default\n";
    t += "    write(*, '(a)') 'segmov: the source is not a {1}'\n";
    t += "    error stop 1\n";
    t += "  end select\n";
    t += "end subroutine {1}_segmov\n";
    out.push_back(proc("segmov", t));
  }

  {
    std::string t = "! seg_store: archived segments are out of reach of the migration; stub\n";
    t += "subroutine {1}_seg_store(self, unit)\n";
    t += "  class({1}), intent(in) :: self\n";
    t += "  integer, intent(in) :: unit\n";
    t += "  write(*, '(a, i0)') 'seg_store is not implemented for {1}, unit ', unit\n";
    t += "  error stop 1\n";
    t += "end subroutine {1}_seg_store\n";
    out.push_back(proc("seg_store", t));
  }
  {
    std::string t = "function {1}_seg_type(self) result(name)\n";
    t += "  class({1}), intent(in) :: self\n";
    t += "  character(len=:), allocatable :: name\n";
    t += "  name = '{1}'\n";
    t += "end function {1}_seg_type\n";
    out.push_back(proc("seg_type", t));
  }
  {
    std::string t = "subroutine {1}_assign(lhs, rhs)\n";
    t += "  type({1}), intent(inout) :: lhs\n";
    t += "  type({1}), intent(in) :: rhs\n";
    t += "  write(*, '(a)') 'use => for segment pointers'\n";
    t += "  error stop 1\n";
    t += "end subroutine {1}_assign\n";
    out.push_back(proc("assign", t));
  }

  for (auto &n : out)
    n.bindings["1"] = seg.name;
  return out;
}

TargetNode migrate_segment(const SegmentDefinition &seg) {
  std::vector<TargetNode> mod;
  mod.push_back(TargetNode::use("use " + std::string(kSegmentModule)));
  std::set<std::string> pointed;
  for (const auto &f : seg.fields) {
    if (f.type.base != FieldBase::segment_pointer)
      continue;
    if (!f.dims.empty())
      throw MigrationError(f.span, "field " + f.name + " of segment " + seg.name +
                                       " is an array of segment pointers, which Fortran "
                                       "2008 cannot express; store registry indexes instead");
    if (f.type.segment != seg.name)
      pointed.insert(f.type.segment);
  }
  for (const auto &s : pointed)
    mod.push_back(TargetNode::use("use " + s + "_mod"));
  mod.push_back(TargetNode::stmt("implicit none"));
  mod.push_back(TargetNode::stmt("private"));
  mod.push_back(TargetNode::blank_line());
  mod.push_back(TargetNode::decl("public :: " + seg.name));
  mod.push_back(TargetNode::decl("public :: segini, segadj, segsup, segprt, segcop, segmov"));
  mod.push_back(TargetNode::decl("public :: assignment(=)"));
  mod.push_back(TargetNode::blank_line());

  std::vector<TargetNode> type;
  for (const auto &v : seg.dimensioning_vars)
    type.push_back(TargetNode::decl("integer, private :: " + v + " = 0"));
  for (const auto &f : seg.fields) {
    for (const auto &c : f.comments)
      type.push_back(TargetNode::comment("!" + c, f.span));
    std::string line;
    if (f.type.base == FieldBase::segment_pointer)
      line = field_type(f.type) + ", pointer, public :: " + f.name + " => null()";
    else if (f.is_dynamic)
      line = field_type(f.type) + ", pointer, public :: " + f.name +
             deferred_shape(f.dims.size()) + " => null()";
    else if (!f.dims.empty())
      line = field_type(f.type) + ", public :: " + f.name + "(" + dims_text(f.dims) +
             ") = " + zero_of(f.type);
    else
      line = field_type(f.type) + ", public :: " + f.name + " = " + zero_of(f.type);
    TargetNode d = TargetNode::decl(line, f.span);
    type.push_back(std::move(d));
  }
  type.push_back(TargetNode::contains());
  std::map<std::string, std::string> b{{"1", seg.name}};
  for (auto [binding, impl] : std::vector<std::pair<std::string, std::string>>{
           {"segsup", "segsup"},
           {"segcop", "clone"},
           {"segmov", "segmov"},
           {"segprt", "segprt"},
           {"seg_store", "seg_store"},
           {"seg_type", "seg_type"}})
    type.push_back(TargetNode::templ(TemplateRole::declaration, "binding",
                                     "procedure :: " + binding + " => {1}_" + impl, b));
  TargetNode dt = TargetNode::container(NodeKind::derived_type,
                                        "type, extends(segment) :: " + seg.name,
                                        "end type " + seg.name, std::move(type));
  dt.origin = seg.span;
  mod.push_back(std::move(dt));
  mod.push_back(TargetNode::blank_line());

  for (auto [generic, impl] : std::vector<std::pair<std::string, std::string>>{
           {"segini", "segini"},
           {"segadj", "segadj"},
           {"segsup", "segsup"},
           {"segprt", "segprt"},
           {"segcop", "segcop"},
           {"segmov", "segmov"},
           {"assignment(=)", "assign"}}) {
    TargetNode iface = TargetNode::container(NodeKind::interface_block, "interface " + generic,
                                             "end interface " + generic);
    iface.children.push_back(TargetNode::templ(TemplateRole::declaration, "generic",
                                               "module procedure {1}_" + impl, b));
    mod.push_back(std::move(iface));
  }
  mod.push_back(TargetNode::blank_line());
  mod.push_back(TargetNode::contains());
  bool first = true;
  for (auto &body : synthesize_command_bodies(seg)) {
    if (!first)
      mod.push_back(TargetNode::blank_line());
    first = false;
    mod.push_back(std::move(body));
  }
  TargetNode m = TargetNode::container(NodeKind::module, "module " + seg.name + "_mod",
                                       "end module " + seg.name + "_mod", std::move(mod));
  m.origin = seg.span;
  m.name = seg.name + "_mod";
  return m;
}

std::vector<TargetNode> generate_support_modules() {
  const char *segment_text = R"(module segment_mod
  implicit none
  private

  public :: segment

  type, abstract :: segment
  contains
    procedure(abstract_segsup), deferred :: segsup
    procedure(abstract_segcop), deferred :: segcop
    procedure(abstract_segmov), deferred :: segmov
    procedure(abstract_segprt), deferred :: segprt
    procedure(abstract_seg_store), deferred :: seg_store
    procedure(abstract_seg_type), deferred :: seg_type
  end type segment

  abstract interface
    subroutine abstract_segsup(self)
      import :: segment
      class(segment), intent(inout) :: self
    end subroutine abstract_segsup

    subroutine abstract_segcop(self, copy)
      import :: segment
      class(segment), intent(in) :: self
      class(segment), pointer, intent(out) :: copy
    end subroutine abstract_segcop

    subroutine abstract_segmov(self, source)
      import :: segment
      class(segment), intent(inout) :: self
      class(segment), intent(in) :: source
    end subroutine abstract_segmov

    subroutine abstract_segprt(self)
      import :: segment
      class(segment), intent(in) :: self
    end subroutine abstract_segprt

    ! seg_store: contract chosen by the migration, concrete versions are stubs
    subroutine abstract_seg_store(self, unit)
      import :: segment
      class(segment), intent(in) :: self
      integer, intent(in) :: unit
    end subroutine abstract_seg_store

    ! seg_type: contract chosen by the migration, returns the segment name
    function abstract_seg_type(self) result(name)
      import :: segment
      class(segment), intent(in) :: self
      character(len=:), allocatable :: name
    end function abstract_seg_type
  end interface
end module segment_mod
)";

  const char *registry_text = R"(module segment_registry_mod
  use segment_mod
  implicit none
  private

  public :: segment_ref, register_segment, lookup_segment, release_segment

  ! one slot per registered segment; Fortran has no arrays of pointers
  type :: segment_ref
    class(segment), pointer :: ptr => null()
    logical :: used = .false.
  end type segment_ref

  type(segment_ref), allocatable :: table(:)

contains

  function register_segment(s) result(idx)
    class(segment), target :: s
    integer :: idx
    type(segment_ref), allocatable :: grown(:)
    integer :: i, n
    if (.not. allocated(table)) allocate(table(16))
    do i = 1, size(table)
      if (.not. table(i)%used) then
        idx = i
        table(idx)%ptr => s
        table(idx)%used = .true.
        return
      end if
    end do
    n = size(table)
    allocate(grown(2 * n))
    grown(1:n) = table
    call move_alloc(grown, table)
    idx = n + 1
    table(idx)%ptr => s
    table(idx)%used = .true.
  end function register_segment

  subroutine check_index(idx, what)
    integer, intent(in) :: idx
    character(len=*), intent(in) :: what
    logical :: valid
    valid = allocated(table)
    if (valid) valid = idx >= 1 .and. idx <= size(table)
    if (valid) valid = table(idx)%used
    if (.not. valid) then
      write(*, '(a, a, a, i0)') 'segment registry: ', what, ' of invalid index ', idx
      error stop 1
    end if
  end subroutine check_index

  function lookup_segment(idx) result(s)
    integer, intent(in) :: idx
    class(segment), pointer :: s
    call check_index(idx, 'lookup')
    s => table(idx)%ptr
  end function lookup_segment

  subroutine release_segment(idx)
    integer, intent(in) :: idx
    call check_index(idx, 'release')
    nullify(table(idx)%ptr)
    table(idx)%used = .false.
  end subroutine release_segment
end module segment_registry_mod
)";
  TargetNode a = TargetNode::templ(TemplateRole::program_unit, kSegmentModule, segment_text);
  a.name = kSegmentModule;
  TargetNode b = TargetNode::templ(TemplateRole::program_unit, kRegistryModule, registry_text);
  b.name = kRegistryModule;
  return {a, b};
}

} // namespace segmig
