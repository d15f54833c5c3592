#include "mpst/translate.hh"

#include <map>

#include "mpst/error.hh"
#include "mpst/projection.hh"

namespace mpst {

namespace {

struct Builder {
    Machine m;
    std::vector<std::pair<std::string, StateId>> env;

    explicit Builder(const Participant& owner) : m(owner) {}

    StateId lookup(const std::string& v) const {
        for (auto it = env.rbegin(); it != env.rend(); ++it)
            if (it->first == v) return it->second;
        throw ValidationError("unbound recursion variable '" + v + "'");
    }

    /// State for `t`, binding any leading recursion variables to it.
    StateId build(const LocalPtr& t) {
        std::vector<std::string> binders;
        LocalPtr head = t;
        while (head->kind == Local::Kind::rec) {
            binders.push_back(head->var);
            head = head->body;
        }
        if (head->kind == Local::Kind::var) {
            for (const auto& b : binders)
                if (b == head->var) throw ValidationError("unguarded recursion on '" + b + "'");
            return lookup(head->var);
        }
        StateId q = m.add_state("q" + std::to_string(m.num_states()));
        std::size_t mark = env.size();
        for (const auto& b : binders) env.emplace_back(b, q);
        if (head->is_prefix()) {
            for (const auto& br : head->branches) {
                StateId d = build(br.cont);
                Action a = head->kind == Local::Kind::send ? send(m.owner(), head->peer, br.label)
                                                           : receive(head->peer, m.owner(), br.label);
                m.add_edge(q, a, d);
            }
        }
        env.resize(mark);
        return q;
    }
};

struct Reader {
    const Machine& m;
    std::vector<bool> on_path;
    std::vector<bool> used;

    std::string var(StateId q) const { return "t_" + m.name(q); }

    LocalPtr go(StateId q) {
        if (on_path[q]) {
            used[q] = true;
            return l_var(var(q));
        }
        if (m.is_final(q)) return l_end();
        on_path[q] = true;
        bool was_used = used[q];
        used[q] = false;
        std::vector<LocalBranch> bs;
        Participant peer;
        bool sending = m.is_sending(q);
        for (std::size_t e : m.out(q)) {
            const Edge& ed = m.edges()[e];
            peer = ed.act.peer();
            bs.push_back({ed.act.msg, go(ed.dst)});
        }
        on_path[q] = false;
        LocalPtr body = sending ? l_send(peer, std::move(bs)) : l_recv(peer, std::move(bs));
        LocalPtr out = used[q] ? l_rec(var(q), body) : body;
        used[q] = was_used;
        return out;
    }
};

} // namespace

Machine to_machine(const LocalPtr& t, const Participant& owner) {
    check_closed_guarded(t);
    Builder b(owner);
    StateId q0 = b.build(t);
    b.m.set_initial(q0);
    return b.m;
}

LocalPtr to_local(const Machine& m) {
    auto r = is_basic(m);
    if (!r.basic) {
        std::string why;
        for (const auto& s : r.reasons) why += (why.empty() ? "" : "; ") + s;
        throw NotBasic("machine " + m.owner() + " is not basic: " + why);
    }
    Reader rd{m, std::vector<bool>(m.num_states(), false), std::vector<bool>(m.num_states(), false)};
    return rename_canonical(rd.go(m.initial()));
}

System system_of(const GlobalPtr& g) {
    std::vector<Machine> ms;
    for (const auto& p : participants(g)) ms.push_back(to_machine(project(g, p), p));
    return System(std::move(ms));
}

} // namespace mpst
