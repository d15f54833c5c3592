#pragma once

#include "mpst/syntax.hh"
#include "mpst/system.hh"

namespace mpst {

/// Automaton of a closed, guarded local type. Every selection, branching
/// and `end` occurrence becomes its own state; variables resolve to the
/// body of their binder. States are named q0, q1, ... in depth-first order.
Machine to_machine(const LocalPtr& t, const Participant& owner);

/// Local type of a basic machine; throws NotBasic otherwise. Back edges to
/// states on the current path become recursion variables, renamed t0, t1,
/// ... in pre-order.
LocalPtr to_local(const Machine& m);

/// Machines for the projections of a well-formed global type.
System system_of(const GlobalPtr& g);

} // namespace mpst
