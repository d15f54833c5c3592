#pragma once

#include <string>

#include "mpst/cfsm.hh"
#include "mpst/generalized.hh"
#include "mpst/system.hh"

namespace mpst {

/// Graphviz renderings. Initial states are double circles; final states are
/// the ones without outgoing edges.
std::string to_dot(const Machine& m);
/// One cluster per machine.
std::string to_dot(const System& s);
/// Configurations as nodes, labelled by their printed form.
std::string to_dot(const ReachSet& rs, const System& s);
/// Places are circles, transitions boxes; the initial token is shown as a
/// filled place.
std::string to_dot(const LabelledNet& n);
/// Variables as points, one box per equation.
std::string to_dot(const GeneralGlobal& g);
std::string to_dot(const GeneralLocal& t);

} // namespace mpst
