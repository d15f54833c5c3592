#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mpst/lts.hh"
#include "mpst/system.hh"

namespace mpst {

/// Control vector plus one FIFO word per ordered pair, indexed by
/// System::channel(from, to). Words hold indices into System::alphabet().
struct Configuration {
    std::vector<StateId> control;
    std::vector<std::vector<std::uint32_t>> buffers;

    bool operator==(const Configuration&) const = default;
    bool stable() const;
};

struct ConfigHash {
    std::size_t operator()(const Configuration& c) const;
};

Configuration initial(const System& s);

struct Firing {
    std::size_t machine;
    Action act;
    Configuration target;
};

/// Enabled transitions, ordered by participant then action.
std::vector<Firing> fire(const Configuration& c, const System& s);

/// `(q0, q1, q2; AB=act·quit, CA=d)`; empty buffers are omitted.
std::string to_string(const Configuration& c, const System& s);

struct Classification {
    bool stable = false;
    bool final = false;
    bool deadlock = false;
    bool orphan = false;
    bool unspecified_reception = false;

    bool intermediate() const { return !stable && !final && !deadlock && !orphan && !unspecified_reception; }
    bool error() const { return deadlock || orphan || unspecified_reception; }
    std::vector<std::string> names() const;
};

Classification classify(const Configuration& c, const System& s);

struct ReachOptions {
    std::size_t threads = 1;
};

/// Configurations reachable by executions that never hold more than k
/// messages in any one channel.
struct ReachSet {
    struct Arc {
        std::uint32_t src;
        Action act;
        std::uint32_t dst;
    };

    Bound bound = 1;
    std::vector<Configuration> configs;
    std::vector<Arc> arcs;
    std::vector<std::vector<std::size_t>> out;  // arc indices per configuration
    std::vector<std::size_t> parent_arc;        // BFS tree; npos for the root

    std::size_t size() const { return configs.size(); }
    std::optional<std::uint32_t> find(const Configuration& c) const;
    /// Shortest action sequence from the initial configuration.
    Trace path_to(std::uint32_t id) const;

    std::unordered_map<Configuration, std::uint32_t, ConfigHash> index;
};

ReachSet reach(const System& s, Bound k, ReachOptions opts = {});

struct Violation {
    std::string kind;  // deadlock | orphan | unspecified_reception | liveness
    Trace path;
    std::string configuration;
};

struct SafetyReport {
    Bound bound = 1;
    std::size_t configurations = 0;
    std::vector<Violation> violations;
    /// Liveness is only meaningful when some machine has a final state.
    bool liveness_checked = false;
    bool live = true;

    bool safe() const;
};

SafetyReport check_safety(const System& s, Bound k, bool liveness = true, ReachOptions opts = {});

/// The system as a generic LTS over configurations (no bound applied;
/// bounds are enforced by the trace algorithms).
std::unique_ptr<InternedLts<Configuration>> as_lts(const System& s);

TraceTrie traces(const System& s, std::size_t n, Bound k);

/// Product of the machines (optionally without one participant), explored
/// on demand. Edges are the individual machine edges; no buffers.
class Product {
public:
    using Tuple = std::vector<StateId>;

    Product(const System& s, std::optional<Participant> minus = std::nullopt);

    Tuple initial() const;
    std::vector<std::pair<Action, Tuple>> successors(const Tuple& t) const;
    /// Members of the product, ordered as the tuple.
    const std::vector<std::size_t>& members() const { return members_; }
    std::size_t num_states_bound() const;  // product of state counts

private:
    const System& sys_;
    std::vector<std::size_t> members_;
};

/// Pairs of distinct enabled transitions at a configuration where the
/// one-step diamond is expected for basic systems but absent.
std::vector<std::string> diamond_violations(const System& s, const ReachSet& rs);

} // namespace mpst
