#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mpst/action.hh"
#include "mpst/cfsm.hh"
#include "mpst/lts.hh"
#include "mpst/semantics.hh"
#include "mpst/system.hh"

namespace mpst {

using Var = std::string;

/// One defining equation of a graph-shaped type. The meaning of x, y and z
/// depends on the kind:
///   msg       x = from -> to : label; y
///   send      x = to ! label; y            (local)
///   recv      x = from ? label; y          (local)
///   fork      x = y | z
///   join      x | y = z
///   choice    x = y + z                    (global)
///   ichoice   x = y (+) z                  (local, this participant decides)
///   echoice   x = y & z                    (local, someone else decides)
///   merge     x + y = z
///   indirect  x = y
///   end       x = end
struct Equation {
    enum class Kind { msg, send, recv, fork, join, choice, ichoice, echoice, merge, indirect, end };
    Kind kind = Kind::end;
    Var x, y, z;
    Participant from, to;
    Label label;

    bool operator==(const Equation&) const = default;
    /// Variables this equation consumes and produces.
    std::vector<Var> inputs() const;
    std::vector<Var> outputs() const;
};

struct GeneralGlobal {
    std::vector<Equation> eqs;
    Var init;
};

struct GeneralLocal {
    Participant owner;
    std::vector<Equation> eqs;
    Var init;
};

/// Parses `.ggt` text. Checks that every variable is consumed by exactly
/// one equation and produced by at most one, that the entry exists, and
/// that no message goes to its sender.
GeneralGlobal parse_general_global(std::string_view text);
/// Parses `.glt` text, which starts with `role P;`.
GeneralLocal parse_general_local(std::string_view text);

std::string print(const GeneralGlobal& g);
std::string print(const GeneralLocal& t);

std::set<Participant> participants(const GeneralGlobal& g);
std::set<Var> variables(const std::vector<Equation>& eqs);

/// Parallel composition of state variables, flattened and sorted.
struct ParState {
    std::vector<Var> vars;

    ParState() = default;
    explicit ParState(std::vector<Var> v);
    bool operator==(const ParState&) const = default;
    auto operator<=>(const ParState&) const = default;
};

std::string to_string(const ParState& x);

/// Maximum number of parallel threads in one state (fork nesting cap).
constexpr std::size_t default_fork_cap = 8;

/// One step of the state equivalence, oriented from definitions to their
/// continuations: indirection, fork, join, either branch of a choice, and
/// merge entries. Choices yield both branches.
std::set<ParState> gequiv_expand(const ParState& x, const std::vector<Equation>& eqs);

/// Participants that may send first from `x` without receiving anything:
/// the senders of the first message equations reached through forks,
/// choices, merges and indirections.
std::set<Participant> active_senders(const GeneralGlobal& g, const Var& x);

/// Projection; throws ChoiceOwnership when a choice has no single active
/// sender.
GeneralLocal gproject(const GeneralGlobal& g, const Participant& p);

/// Per-participant states plus channel contents.
struct GState {
    std::map<Participant, ParState> parts;
    std::map<Channel, std::vector<Label>> buffers;

    bool operator==(const GState&) const = default;
};

std::string to_string(const GState& s);

GState ginitial(const GeneralGlobal& g);
GState ginitial(const std::map<Participant, GeneralLocal>& ts);

/// Visible successors of a global type state. Silent moves (the state
/// equivalence and crossing exchanges that do not involve the
/// participant) are folded into each visible step.
std::vector<std::pair<Action, GState>> gstep_global(const GState& s, const GeneralGlobal& g,
                                                    std::size_t fork_cap = default_fork_cap);
std::vector<std::pair<Action, GState>> gstep_local_system(const GState& s,
                                                          const std::map<Participant, GeneralLocal>& ts,
                                                          std::size_t fork_cap = default_fork_cap);

/// Trace semantics of the rules above. Each participant's position is kept
/// as the set of its silently reachable states, which leaves the traces
/// unchanged and keeps the state space small.
std::unique_ptr<Lts> gglobal_lts(const GeneralGlobal& g);
std::unique_ptr<Lts> glocal_lts(const std::map<Participant, GeneralLocal>& ts);
/// The same over single states, stepping with gstep_global directly.
std::unique_ptr<Lts> gglobal_rule_lts(const GeneralGlobal& g);

/// Automaton of a local type: states are the sets of parallel states
/// reachable silently, so the result is deterministic.
Machine gto_machine(const GeneralLocal& t, std::size_t fork_cap = default_fork_cap);

/// Machines of all projections.
System gsystem_of(const GeneralGlobal& g);

struct LabelledNet {
    struct Transition {
        std::vector<std::size_t> in, out;  // place indices
        std::optional<Action> label;
    };
    std::vector<Var> places;
    std::vector<Transition> transitions;
    std::vector<unsigned> initial;  // tokens per place

    std::size_t place(const Var& v) const;
};

LabelledNet to_petri(const GeneralLocal& t);

struct NetExploration {
    std::size_t markings = 0;
    bool safe = true;
    std::vector<unsigned> unsafe_marking;  // first marking with two tokens somewhere
};

/// Exhaustive marking search from the initial marking.
NetExploration explore_markings(const LabelledNet& n);

struct MixedReport {
    bool ok = true;
    std::optional<StateId> offending;
    std::string reason;
};

/// Every send/receive pair at a state closes a diamond.
MixedReport mixed_parallel(const Machine& m);

/// Receivers along a sequence of actions.
std::set<Participant> receivers(const Trace& phi);
/// Participants that send in phi before receiving anything in phi.
std::set<Participant> active_senders(const Trace& phi);

struct ChoiceReport {
    bool ok = true;
    std::string witness;
};

/// For two sends of one participant enabled at a 1-bounded reachable
/// configuration, the participants that may still receive afterwards (in
/// 1-bounded executions) are the same. Throws NotCompatible unless the
/// system is multiparty compatible (pass `checked` to skip that).
ChoiceReport receiver_property(const System& s, bool checked = false);

/// For two non-commuting receives with distinct labels at one state, the
/// causal chains leading to them have the same single active sender.
/// Chains ignore the receiver's own earlier actions. Same precondition as
/// receiver_property.
ChoiceReport unique_sender(const System& s, bool checked = false);

struct SessionReport {
    bool deterministic = true;
    bool compatible = true;
    bool mixed_parallel = true;
    bool unique_sender = true;
    bool receiver = true;
    std::vector<std::string> failures;

    bool ok() const { return deterministic && compatible && mixed_parallel && unique_sender && receiver; }
};

SessionReport session_compatible(const System& s);

/// Sequential graph type of a session-compatible system built from its
/// alternating 1-bounded executions. Throws NotSessionCompatible.
GeneralGlobal gsynthesize(const System& s);

} // namespace mpst
