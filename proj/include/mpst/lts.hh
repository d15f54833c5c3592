#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mpst/action.hh"

namespace mpst {

/// Buffer bound; 0 means no bound.
using Bound = unsigned;
constexpr Bound unbounded = 0;

std::size_t node_cap();  // MPST_NODE_CAP or 1'000'000
/// Overrides the cap for this process; 0 restores the default.
void set_node_cap(std::size_t cap);

/// A labelled transition system over lazily interned states.
class Lts {
public:
    using Id = std::uint32_t;
    using Succ = std::vector<std::pair<Action, Id>>;

    virtual ~Lts() = default;
    virtual Id initial() = 0;
    virtual const Succ& successors(Id s) = 0;
    /// Successful termination (used to tell completed traces apart).
    virtual bool is_final(Id s) = 0;
    virtual std::string describe(Id s) = 0;
    virtual std::size_t num_states() const = 0;
};

/// Lts over values of type S. `Key` maps a state to its identity string
/// (so structurally equal states are shared).
template <class S>
class InternedLts : public Lts {
public:
    using Next = std::function<std::vector<std::pair<Action, S>>(const S&)>;
    using Key = std::function<std::string(const S&)>;
    using Final = std::function<bool(const S&)>;

    InternedLts(S init, Next next, Key key, Final fin)
        : next_(std::move(next)), key_(std::move(key)), fin_(std::move(fin)) {
        init_ = intern(std::move(init));
    }

    Id initial() override { return init_; }

    const Succ& successors(Id s) override {
        if (!done_[s]) {
            Succ out;
            for (auto& [a, t] : next_(states_[s])) out.emplace_back(a, intern(std::move(t)));
            std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
                return x.first != y.first ? x.first < y.first : x.second < y.second;
            });
            out.erase(std::unique(out.begin(), out.end()), out.end());
            succ_[s] = std::move(out);
            done_[s] = true;
        }
        return succ_[s];
    }

    bool is_final(Id s) override { return fin_(states_[s]); }
    std::string describe(Id s) override { return keys_[s]; }
    std::size_t num_states() const override { return states_.size(); }
    const S& state(Id s) const { return states_[s]; }

private:
    Id intern(S s) {
        std::string k = key_(s);
        auto it = index_.find(k);
        if (it != index_.end()) return it->second;
        if (states_.size() >= node_cap()) throw_limit();
        Id id = Id(states_.size());
        index_.emplace(k, id);
        keys_.push_back(std::move(k));
        states_.push_back(std::move(s));
        succ_.emplace_back();
        done_.push_back(false);
        return id;
    }
    [[noreturn]] static void throw_limit();

    Next next_;
    Key key_;
    Final fin_;
    Id init_ = 0;
    std::unordered_map<std::string, Id> index_;
    std::vector<std::string> keys_;
    std::vector<S> states_;
    std::vector<Succ> succ_;
    std::vector<bool> done_;
};

[[noreturn]] void throw_node_cap(std::size_t cap);

template <class S>
void InternedLts<S>::throw_limit() {
    throw_node_cap(node_cap());
}

/// Prefix tree of bounded traces.
struct TraceTrie {
    struct Node {
        std::map<Action, std::size_t> kids;
        bool complete = false;  // some run along this trace terminated successfully
    };
    std::vector<Node> nodes{Node{}};

    std::size_t size() const { return nodes.size(); }
    std::vector<Trace> all() const;
    std::vector<Trace> completed() const;
    bool contains(const Trace& t) const;
};

/// All traces of length at most n whose executions keep every channel at
/// most k deep (counted as sends minus receives per channel).
TraceTrie traces(Lts& l, std::size_t n, Bound k);

struct EquivResult {
    bool equivalent = true;
    /// Shortest trace accepted by exactly one side.
    Trace counterexample;
    /// Which side accepts the counterexample: 0 for left, 1 for right.
    int accepted_by = -1;
    std::size_t explored = 0;
};

EquivResult trace_equiv(Lts& a, Lts& b, std::size_t n, Bound k);

} // namespace mpst
