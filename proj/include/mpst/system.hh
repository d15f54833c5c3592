#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mpst/action.hh"

namespace mpst {

using StateId = std::uint32_t;

struct Edge {
    StateId src;
    Action act;
    StateId dst;
};

/// A communicating finite-state machine owned by one participant.
/// Outgoing edges of a state are kept ordered by action, then target.
class Machine {
public:
    Machine() = default;
    explicit Machine(Participant owner) : owner_(std::move(owner)) {}

    const Participant& owner() const { return owner_; }
    std::size_t num_states() const { return names_.size(); }
    StateId initial() const { return initial_; }
    const std::string& name(StateId q) const { return names_.at(q); }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<Edge>& edges() const { return edges_; }
    /// Indices into edges() leaving q.
    const std::vector<std::size_t>& out(StateId q) const { return out_.at(q); }

    bool is_final(StateId q) const { return out_.at(q).empty(); }
    bool is_sending(StateId q) const;
    bool is_receiving(StateId q) const;
    bool is_mixed(StateId q) const;
    std::optional<StateId> find_state(const std::string& name) const;
    /// Target of the unique edge (q, a, -), if any.
    std::optional<StateId> step(StateId q, const Action& a) const;

    StateId add_state(std::string name);
    StateId state(const std::string& name);  // find or add
    void set_initial(StateId q) { initial_ = q; }
    /// Throws ValidationError if the subject of `a` is not the owner.
    void add_edge(StateId src, Action a, StateId dst);

    /// States reachable from the initial one.
    std::vector<bool> reachable() const;
    /// Copy with unreachable states removed; state order is preserved.
    Machine trimmed() const;

    std::set<Label> alphabet() const;
    std::set<Participant> peers() const;

private:
    Participant owner_;
    std::vector<std::string> names_;
    std::map<std::string, StateId> index_;
    StateId initial_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> out_;
};

/// One machine per participant, kept sorted by participant name.
class System {
public:
    System() = default;
    /// Throws ValidationError on duplicate owners or when a machine mentions
    /// a participant that has no machine.
    explicit System(std::vector<Machine> machines);

    std::size_t size() const { return machines_.size(); }
    const std::vector<Machine>& machines() const { return machines_; }
    const Machine& machine(std::size_t i) const { return machines_.at(i); }
    const Machine& machine(const Participant& p) const;
    const std::vector<Participant>& participants() const { return participants_; }
    std::optional<std::size_t> index_of(const Participant& p) const;
    std::size_t channel(std::size_t from, std::size_t to) const { return from * size() + to; }
    /// All ordered pairs of distinct participants.
    std::vector<std::pair<Participant, Participant>> channels() const;

    /// Sorted message alphabet; buffers store indices into it.
    const std::vector<Label>& alphabet() const { return alphabet_; }
    std::uint32_t label_id(const Label& l) const;

    System without(const Participant& p) const;

private:
    std::vector<Machine> machines_;
    std::vector<Participant> participants_;
    std::vector<Label> alphabet_;
};

/// `machine A { init q0; q0 -- A B ! act --> q1; }` blocks. `state q;`
/// declares a state explicitly.
System parse_system(std::string_view text);
std::string print(const System& s);
std::string print(const Machine& m);

/// Deterministic: no state has two edges with the same action.
bool is_deterministic(const Machine& m);

struct BasicReport {
    bool basic = true;
    std::vector<std::string> reasons;
};

/// Deterministic, directed and free of mixed states.
BasicReport is_basic(const Machine& m);
BasicReport is_basic(const System& s);

/// Same shape up to state renaming, restricted to reachable states.
/// Requires deterministic machines.
bool isomorphic(const Machine& a, const Machine& b);

} // namespace mpst
