#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mpst/action.hh"
#include "mpst/cfsm.hh"
#include "mpst/system.hh"

namespace mpst {

/// A send immediately followed by its matching receive, repeated.
bool is_alternation(const std::vector<Action>& phi);

/// phi[j] depends on phi[i] (i < j): phi[j] is the dual of phi[i], or both
/// have the same subject. Throws ValidationError unless i < j < |phi|.
bool depends(const std::vector<Action>& phi, std::size_t i, std::size_t j);

/// Indices form a causal chain in phi: each element except the last has a
/// later element of the chain depending on it.
bool is_causal_chain(const std::vector<Action>& phi, const std::vector<std::size_t>& chain);

/// Greedy maximal causal chain of phi ending at index `last`, restricted to
/// indices >= `from`: walks backwards adding every action that some chosen
/// action depends on. Returned in execution order.
std::vector<std::size_t> maximal_causal_chain(const std::vector<Action>& phi, std::size_t last,
                                              std::size_t from = 0);

struct CompatFailure {
    Participant participant;
    Trace local_path;        // the participant's own actions before the failure
    Trace stable_path;       // 1-bounded execution reaching the stable state
    std::string stable_state;
    Action action;           // the action left without a dual
    Trace alternation;       // alternations of the others tried for it
    std::string reason;
};

struct CompatReport {
    bool compatible = true;
    std::size_t stable_states = 0;
    std::vector<CompatFailure> failures;
};

struct CompatOptions {
    /// Throw NotBasic when some machine is not basic. When false, any
    /// deterministic system is accepted.
    bool require_basic = true;
    std::size_t threads = 1;
};

/// Every machine's action sequences, from every 1-bounded reachable stable
/// configuration, are matched by dual actions of the other machines
/// interleaved with alternations that do not involve it.
CompatReport multiparty_compatible(const System& s, CompatOptions opts = {});

} // namespace mpst
