#include "mpst/lts.hh"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <deque>
#include <set>

#include "mpst/error.hh"

namespace mpst {

namespace {
std::atomic<std::size_t> cap_override{0};
}

void set_node_cap(std::size_t cap) { cap_override = cap; }

std::size_t node_cap() {
    if (std::size_t o = cap_override.load(std::memory_order_relaxed)) return o;
    static const std::size_t cap = [] {
        if (const char* v = std::getenv("MPST_NODE_CAP")) {
            char* end = nullptr;
            unsigned long long n = std::strtoull(v, &end, 10);
            if (end != v && n > 0) return std::size_t(n);
        }
        return std::size_t(1'000'000);
    }();
    return cap;
}

void throw_node_cap(std::size_t cap) {
    throw ResourceLimit("exploration exceeded the node cap of " + std::to_string(cap) +
                        " states (set MPST_NODE_CAP to raise it)");
}

namespace {

using Channels = std::vector<std::pair<std::pair<Participant, Participant>, unsigned>>;

/// Returns false if the action would exceed the bound.
bool bump(Channels& ch, const Action& a, Bound k) {
    auto key = std::make_pair(a.from, a.to);
    auto it = std::lower_bound(ch.begin(), ch.end(), key,
                               [](const auto& e, const auto& kk) { return e.first < kk; });
    bool found = it != ch.end() && it->first == key;
    if (a.is_send()) {
        unsigned cur = found ? it->second : 0;
        if (k != unbounded && cur >= k) return false;
        if (found) ++it->second;
        else ch.insert(it, {key, 1});
    } else if (found) {
        if (--it->second == 0) ch.erase(it);
    }
    return true;
}

using IdSet = std::vector<Lts::Id>;

/// Successors of a set of states grouped by action.
std::map<Action, IdSet> step_set(Lts& l, const IdSet& s) {
    std::map<Action, IdSet> out;
    for (Lts::Id q : s)
        for (const auto& [a, t] : l.successors(q)) out[a].push_back(t);
    for (auto& [a, v] : out) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return out;
}

bool any_final(Lts& l, const IdSet& s) {
    return std::any_of(s.begin(), s.end(), [&](Lts::Id q) { return l.is_final(q); });
}

} // namespace

std::vector<Trace> TraceTrie::all() const {
    std::vector<Trace> out;
    Trace cur;
    std::function<void(std::size_t)> go = [&](std::size_t n) {
        out.push_back(cur);
        for (const auto& [a, k] : nodes[n].kids) {
            cur.push_back(a);
            go(k);
            cur.pop_back();
        }
    };
    go(0);
    return out;
}

std::vector<Trace> TraceTrie::completed() const {
    std::vector<Trace> out;
    Trace cur;
    std::function<void(std::size_t)> go = [&](std::size_t n) {
        if (nodes[n].complete) out.push_back(cur);
        for (const auto& [a, k] : nodes[n].kids) {
            cur.push_back(a);
            go(k);
            cur.pop_back();
        }
    };
    go(0);
    return out;
}

bool TraceTrie::contains(const Trace& t) const {
    std::size_t n = 0;
    for (const auto& a : t) {
        auto it = nodes[n].kids.find(a);
        if (it == nodes[n].kids.end()) return false;
        n = it->second;
    }
    return true;
}

TraceTrie traces(Lts& l, std::size_t n, Bound k) {
    TraceTrie trie;
    struct Item {
        std::size_t node;
        IdSet set;
        Channels ch;
        std::size_t depth;
    };
    std::deque<Item> work;
    work.push_back({0, {l.initial()}, {}, 0});
    trie.nodes[0].complete = any_final(l, {l.initial()});
    while (!work.empty()) {
        Item it = std::move(work.front());
        work.pop_front();
        if (it.depth == n) continue;
        for (auto& [a, next] : step_set(l, it.set)) {
            Channels ch = it.ch;
            if (!bump(ch, a, k)) continue;
            std::size_t child = trie.nodes.size();
            if (child >= node_cap()) throw_node_cap(node_cap());
            trie.nodes.emplace_back();
            trie.nodes[child].complete = any_final(l, next);
            trie.nodes[it.node].kids.emplace(a, child);
            work.push_back({child, std::move(next), std::move(ch), it.depth + 1});
        }
    }
    return trie;
}

EquivResult trace_equiv(Lts& a, Lts& b, std::size_t n, Bound k) {
    struct Node {
        IdSet left, right;
        Channels ch;
        std::size_t parent;
        Action via;
        std::size_t depth;
    };
    EquivResult res;
    std::vector<Node> nodes;
    std::set<std::tuple<IdSet, IdSet, Channels>> seen;
    nodes.push_back({{a.initial()}, {b.initial()}, {}, 0, {}, 0});
    seen.insert({nodes[0].left, nodes[0].right, nodes[0].ch});
    auto path = [&](std::size_t i, const Action& last) {
        Trace t{last};
        while (i != 0) {
            t.push_back(nodes[i].via);
            i = nodes[i].parent;
        }
        std::reverse(t.begin(), t.end());
        return t;
    };
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].depth == n) continue;
        auto ls = step_set(a, nodes[i].left);
        auto rs = step_set(b, nodes[i].right);
        // Merge the two ordered action sets.
        std::set<Action> acts;
        for (const auto& [x, _] : ls) acts.insert(x);
        for (const auto& [x, _] : rs) acts.insert(x);
        for (const auto& x : acts) {
            Channels ch = nodes[i].ch;
            if (!bump(ch, x, k)) continue;
            auto li = ls.find(x);
            auto ri = rs.find(x);
            if (li == ls.end() || ri == rs.end()) {
                res.equivalent = false;
                res.counterexample = path(i, x);
                res.accepted_by = li == ls.end() ? 1 : 0;
                res.explored = nodes.size();
                return res;
            }
            if (!seen.insert({li->second, ri->second, ch}).second) continue;
            if (nodes.size() >= node_cap()) throw_node_cap(node_cap());
            nodes.push_back({li->second, ri->second, std::move(ch), i, x, nodes[i].depth + 1});
        }
    }
    res.explored = nodes.size();
    return res;
}

} // namespace mpst
