#pragma once

#include <map>
#include <set>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mpst/lts.hh"
#include "mpst/syntax.hh"
#include "mpst/system.hh"

namespace mpst {

using Channel = std::pair<Participant, Participant>;

/// One local type per participant plus channel contents. Empty channels
/// are not stored.
struct LocalConfig {
    std::map<Participant, LocalPtr> types;
    std::map<Channel, std::vector<Label>> buffers;

    bool stable() const { return buffers.empty(); }
};

std::string to_string(const LocalConfig& c);

/// Successors of a global type under the asynchronous global rules. The
/// same label must step in every branch of an unresolved choice for a
/// message to overtake it.
std::vector<std::pair<Action, GlobalPtr>> step_global(const GlobalPtr& g);

std::vector<std::pair<Action, LocalConfig>> step_local_system(const LocalConfig& c);

/// Projections of every participant with in-flight messages placed in the
/// buffers.
LocalConfig project_config(const GlobalPtr& g);
/// Same, over a fixed participant set (participants may drop out of `g`
/// as it executes).
LocalConfig project_config(const GlobalPtr& g, const std::set<Participant>& parts);

/// The projected family with all buffers empty.
LocalConfig initial_config(const std::map<Participant, LocalPtr>& types);

std::unique_ptr<InternedLts<GlobalPtr>> global_lts(const GlobalPtr& g);
std::unique_ptr<InternedLts<LocalConfig>> local_lts(const LocalConfig& c);

/// Anything with a trace semantics.
using Executable = std::variant<GlobalPtr, LocalConfig, System>;

std::unique_ptr<Lts> make_lts(const Executable& x);

EquivResult trace_equiv(const Executable& x, const Executable& y, std::size_t n, Bound k);
TraceTrie traces(const Executable& x, std::size_t n, Bound k);

/// Pointwise subtyping with identical buffers.
bool config_subtype(const LocalConfig& a, const LocalConfig& b);

/// Walks global states up to depth n (bound k) alongside the projected
/// configuration, checking that enabled actions agree and that successors
/// stay related by subtyping. Returns the violations found.
std::vector<std::string> check_step_equivalence(const GlobalPtr& g, std::size_t n, Bound k);

} // namespace mpst
