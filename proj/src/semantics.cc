#include "mpst/semantics.hh"

#include <algorithm>
#include <deque>
#include <set>

#include "mpst/cfsm.hh"
#include "mpst/error.hh"
#include "mpst/projection.hh"

namespace mpst {

std::string to_string(const LocalConfig& c) {
    std::string out = "(";
    bool first = true;
    for (const auto& [p, t] : c.types) {
        if (!first) out += ", ";
        first = false;
        out += p + ": " + print(t);
    }
    out += ";";
    first = true;
    for (const auto& [ch, w] : c.buffers) {
        out += first ? " " : ", ";
        first = false;
        out += ch.first + (ch.first.size() == 1 && ch.second.size() == 1 ? "" : ".") + ch.second + "=";
        for (std::size_t i = 0; i < w.size(); ++i) out += (i ? "·" : "") + w[i];
    }
    if (first) out += " ε";
    return out + ")";
}

namespace {

GlobalPtr replace_branch(const GlobalPtr& g, std::size_t i, GlobalPtr cont) {
    auto out = std::make_shared<Global>(*g);
    out->branches[i].cont = std::move(cont);
    return out;
}

GlobalPtr with_mid(const GlobalPtr& g, std::size_t i) {
    auto out = std::make_shared<Global>(*g);
    out->mid = i;
    return out;
}

} // namespace

namespace {

// `blocked` holds participants that may not act at this position (they
// wait on an enclosing exchange). `open` holds the recursion terms unfolded
// on the way down: a derivation is finite, so meeting one again adds
// nothing.
std::vector<std::pair<Action, GlobalPtr>> steps(const GlobalPtr& g0, const std::set<Participant>& blocked,
                                                std::vector<std::string>& open) {
    std::vector<std::pair<Action, GlobalPtr>> out;
    GlobalPtr g = g0;
    std::size_t opened = 0;
    while (g->kind == Global::Kind::rec) {
        std::string key = print(g);
        if (std::find(open.begin(), open.end(), key) != open.end()) {
            open.resize(open.size() - opened);
            return out;
        }
        open.push_back(std::move(key));
        ++opened;
        g = unfold(g);
    }
    auto done = [&] { open.resize(open.size() - opened); };
    if (g->kind != Global::Kind::branch) {
        done();
        return out;
    }
    if (g->mid) {
        std::size_t j = *g->mid;
        if (!blocked.count(g->to)) out.emplace_back(receive(g->from, g->to, g->branches[j].label), g->branches[j].cont);
        std::set<Participant> inner = blocked;
        inner.insert(g->to);
        for (auto& [a, next] : steps(g->branches[j].cont, inner, open)) out.emplace_back(a, replace_branch(g, j, next));
        done();
        return out;
    }
    if (!blocked.count(g->from))
        for (std::size_t i = 0; i < g->branches.size(); ++i)
            out.emplace_back(send(g->from, g->to, g->branches[i].label), with_mid(g, i));
    // Actions of other participants may overtake the choice only if every
    // branch offers them.
    std::set<Participant> inner = blocked;
    inner.insert(g->from);
    inner.insert(g->to);
    std::vector<std::vector<std::pair<Action, GlobalPtr>>> per;
    for (const auto& b : g->branches) {
        per.push_back(steps(b.cont, inner, open));
        if (per.back().empty()) break;
    }
    done();
    if (per.size() < g->branches.size()) return out;
    std::set<Action> candidates;
    for (const auto& [a, _] : per[0]) candidates.insert(a);
    for (const auto& a : candidates) {
        std::vector<std::vector<GlobalPtr>> options;
        bool everywhere = true;
        for (const auto& st : per) {
            std::vector<GlobalPtr> mine;
            for (const auto& [b, next] : st)
                if (b == a) mine.push_back(next);
            if (mine.empty()) {
                everywhere = false;
                break;
            }
            options.push_back(std::move(mine));
        }
        if (!everywhere) continue;
        std::vector<std::size_t> pick(options.size(), 0);
        while (true) {
            auto n = std::make_shared<Global>(*g);
            for (std::size_t i = 0; i < options.size(); ++i) n->branches[i].cont = options[i][pick[i]];
            out.emplace_back(a, n);
            std::size_t k = 0;
            while (k < pick.size() && ++pick[k] == options[k].size()) pick[k++] = 0;
            if (k == pick.size()) break;
        }
    }
    return out;
}

} // namespace

std::vector<std::pair<Action, GlobalPtr>> step_global(const GlobalPtr& g) {
    std::vector<std::string> open;
    return steps(g, {}, open);
}

std::vector<std::pair<Action, LocalConfig>> step_local_system(const LocalConfig& c) {
    std::vector<std::pair<Action, LocalConfig>> out;
    for (const auto& [p, t0] : c.types) {
        LocalPtr t = unfold_all(t0);
        if (t->kind == Local::Kind::send) {
            for (const auto& b : t->branches) {
                LocalConfig n = c;
                n.types[p] = b.cont;
                n.buffers[{p, t->peer}].push_back(b.label);
                out.emplace_back(send(p, t->peer, b.label), std::move(n));
            }
        } else if (t->kind == Local::Kind::recv) {
            auto it = c.buffers.find({t->peer, p});
            if (it == c.buffers.end()) continue;
            const auto* b = t->find(it->second.front());
            if (!b) continue;
            LocalConfig n = c;
            n.types[p] = b->cont;
            auto& w = n.buffers[{t->peer, p}];
            w.erase(w.begin());
            if (w.empty()) n.buffers.erase({t->peer, p});
            out.emplace_back(receive(t->peer, p, b->label), std::move(n));
        }
    }
    return out;
}

LocalConfig initial_config(const std::map<Participant, LocalPtr>& types) {
    LocalConfig c;
    c.types = types;
    return c;
}

LocalConfig project_config(const GlobalPtr& g) {
    return project_config(g, participants(g));
}

LocalConfig project_config(const GlobalPtr& g, const std::set<Participant>& parts) {
    LocalConfig c;
    for (const auto& p : parts) c.types[p] = project(g, p);
    GlobalPtr cur = g;
    while (cur->kind == Global::Kind::branch) {
        if (cur->mid) {
            c.buffers[{cur->from, cur->to}].push_back(cur->branches[*cur->mid].label);
            cur = cur->branches[*cur->mid].cont;
        } else {
            cur = cur->branches[0].cont;
        }
    }
    return c;
}

std::unique_ptr<InternedLts<GlobalPtr>> global_lts(const GlobalPtr& g) {
    return std::make_unique<InternedLts<GlobalPtr>>(
        g, [](const GlobalPtr& x) { return step_global(x); }, [](const GlobalPtr& x) { return print(x); },
        [](const GlobalPtr& x) { return x->is_end(); });
}

namespace {

bool local_final(const LocalConfig& c) {
    if (!c.stable()) return false;
    return std::all_of(c.types.begin(), c.types.end(),
                       [](const auto& kv) { return unfold_all(kv.second)->is_end(); });
}

} // namespace

std::unique_ptr<InternedLts<LocalConfig>> local_lts(const LocalConfig& c) {
    return std::make_unique<InternedLts<LocalConfig>>(
        c, [](const LocalConfig& x) { return step_local_system(x); },
        [](const LocalConfig& x) { return to_string(x); }, local_final);
}

std::unique_ptr<Lts> make_lts(const Executable& x) {
    if (const auto* g = std::get_if<GlobalPtr>(&x)) return global_lts(*g);
    if (const auto* c = std::get_if<LocalConfig>(&x)) return local_lts(*c);
    return as_lts(std::get<System>(x));
}

EquivResult trace_equiv(const Executable& x, const Executable& y, std::size_t n, Bound k) {
    auto a = make_lts(x);
    auto b = make_lts(y);
    return trace_equiv(*a, *b, n, k);
}

TraceTrie traces(const Executable& x, std::size_t n, Bound k) {
    auto a = make_lts(x);
    return traces(*a, n, k);
}

bool config_subtype(const LocalConfig& a, const LocalConfig& b) {
    if (a.buffers != b.buffers || a.types.size() != b.types.size()) return false;
    for (const auto& [p, t] : a.types) {
        auto it = b.types.find(p);
        if (it == b.types.end() || !subtype(t, it->second)) return false;
    }
    return true;
}

std::vector<std::string> check_step_equivalence(const GlobalPtr& g, std::size_t n, Bound k) {
    std::vector<std::string> bad;
    struct Item {
        GlobalPtr g;
        LocalConfig s;
        std::size_t depth;
        std::map<Channel, unsigned> fill;
    };
    const std::set<Participant> parts = participants(g);
    std::deque<Item> work{{g, project_config(g), 0, {}}};
    std::set<std::string> seen{print(g) + "|" + to_string(work.front().s)};
    while (!work.empty() && bad.empty()) {
        Item it = std::move(work.front());
        work.pop_front();
        if (!config_subtype(project_config(it.g, parts), it.s)) {
            bad.push_back("projection of " + print(it.g) + " is not below " + to_string(it.s));
            break;
        }
        if (it.depth == n) continue;
        auto gs = step_global(it.g);
        auto ls = step_local_system(it.s);
        std::set<Action> ga, la;
        for (const auto& [a, _] : gs) ga.insert(a);
        for (const auto& [a, _] : ls) la.insert(a);
        if (ga != la) {
            bad.push_back("enabled actions differ at " + print(it.g));
            break;
        }
        for (const auto& [a, g2] : gs) {
            auto fill = it.fill;
            Channel ch{a.from, a.to};
            if (a.is_send()) {
                if (k != unbounded && fill[ch] >= k) continue;
                ++fill[ch];
            } else if (--fill[ch] == 0) {
                fill.erase(ch);
            }
            for (const auto& [b, s2] : ls) {
                if (!(b == a)) continue;
                std::string key = print(g2) + "|" + to_string(s2);
                if (seen.insert(key).second) work.push_back({g2, s2, it.depth + 1, fill});
            }
        }
    }
    return bad;
}

} // namespace mpst
