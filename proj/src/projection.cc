#include "mpst/projection.hh"

#include <set>
#include <unordered_map>

#include "mpst/error.hh"

namespace mpst {

namespace {

LocalPtr merge_at(const LocalPtr& a, const LocalPtr& b, std::vector<std::string>& path) {
    auto fail = [&]() -> LocalPtr { throw MergeFailure(path, print(a), print(b)); };
    if (equal(a, b)) return a;
    if (a->kind != b->kind) return fail();
    switch (a->kind) {
    case Local::Kind::end: return a;
    case Local::Kind::var: return fail();
    case Local::Kind::rec: {
        if (a->var != b->var) return fail();
        path.push_back("rec " + a->var);
        auto body = merge_at(a->body, b->body, path);
        path.pop_back();
        return l_rec(a->var, body);
    }
    case Local::Kind::send: {
        if (a->peer != b->peer || a->branches.size() != b->branches.size()) return fail();
        std::vector<LocalBranch> bs;
        for (std::size_t i = 0; i < a->branches.size(); ++i) {
            if (a->branches[i].label != b->branches[i].label) return fail();
            path.push_back(a->branches[i].label);
            bs.push_back({a->branches[i].label, merge_at(a->branches[i].cont, b->branches[i].cont, path)});
            path.pop_back();
        }
        return l_send(a->peer, std::move(bs));
    }
    case Local::Kind::recv: {
        if (a->peer != b->peer) return fail();
        std::vector<LocalBranch> bs;
        for (const auto& x : a->branches) {
            if (const auto* y = b->find(x.label)) {
                path.push_back(x.label);
                bs.push_back({x.label, merge_at(x.cont, y->cont, path)});
                path.pop_back();
            } else {
                bs.push_back(x);
            }
        }
        for (const auto& y : b->branches)
            if (!a->find(y.label)) bs.push_back(y);
        return l_recv(a->peer, std::move(bs));
    }
    }
    return fail();
}

struct Projector {
    const Participant& p;
    std::unordered_map<const Global*, LocalPtr> memo;
    std::vector<std::string> path;

    LocalPtr go(const GlobalPtr& g) {
        auto it = memo.find(g.get());
        if (it != memo.end()) return it->second;
        LocalPtr r = compute(g);
        memo.emplace(g.get(), r);
        return r;
    }

    LocalPtr cont(const GlobalBranch& b) {
        path.push_back(b.label);
        auto r = go(b.cont);
        path.pop_back();
        return r;
    }

    LocalPtr compute(const GlobalPtr& g) {
        switch (g->kind) {
        case Global::Kind::end: return l_end();
        case Global::Kind::var: return l_var(g->var);
        case Global::Kind::rec: {
            path.push_back("rec " + g->var);
            LocalPtr body = go(g->body);
            path.pop_back();
            if (body->kind == Local::Kind::var && body->var == g->var) return l_end();
            // A binder whose variable no longer occurs is dropped, so that
            // nested binders cannot leave an unguarded variable behind.
            if (!free_vars(body).count(g->var)) return body;
            return l_rec(g->var, body);
        }
        case Global::Kind::branch: {
            if (g->to == p) {
                std::vector<LocalBranch> bs;
                for (const auto& b : g->branches) bs.push_back({b.label, cont(b)});
                return l_recv(g->from, std::move(bs));
            }
            if (g->mid) return cont(g->branches[*g->mid]);
            if (g->from == p) {
                std::vector<LocalBranch> bs;
                for (const auto& b : g->branches) bs.push_back({b.label, cont(b)});
                return l_send(g->to, std::move(bs));
            }
            LocalPtr acc = cont(g->branches[0]);
            for (std::size_t i = 1; i < g->branches.size(); ++i) {
                LocalPtr next = cont(g->branches[i]);
                path.push_back("{" + g->branches[0].label + "," + g->branches[i].label + "}");
                acc = merge_at(acc, next, path);
                path.pop_back();
            }
            return acc;
        }
        }
        return l_end();
    }
};

} // namespace

LocalPtr project(const GlobalPtr& g, const Participant& p) {
    if (!participants(g).count(p)) return l_end();
    Projector pr{p, {}, {}};
    return pr.go(g);
}

LocalPtr merge(const LocalPtr& a, const LocalPtr& b) {
    std::vector<std::string> path;
    return merge_at(a, b, path);
}

std::optional<LocalPtr> try_merge(const LocalPtr& a, const LocalPtr& b) {
    try {
        return merge(a, b);
    } catch (const MergeFailure&) {
        return std::nullopt;
    }
}

WellFormedReport well_formed(const GlobalPtr& g) {
    WellFormedReport r;
    try {
        check_closed_guarded(g);
    } catch (const ValidationError& e) {
        r.ok = false;
        r.errors["*"] = e.what();
        return r;
    }
    for (const auto& p : participants(g)) {
        try {
            r.projections[p] = project(g, p);
        } catch (const MergeFailure& e) {
            r.ok = false;
            r.errors[p] = e.what();
        }
    }
    return r;
}

namespace {

struct SubtypeCheck {
    std::set<std::pair<std::string, std::string>> assumed;

    bool go(const LocalPtr& a0, const LocalPtr& b0) {
        LocalPtr a = unfold_all(a0), b = unfold_all(b0);
        if (a->kind != b->kind) return false;
        if (a->kind == Local::Kind::end) return true;
        // Closed inputs leave no free variables after unfolding.
        if (a->kind == Local::Kind::var) return a->var == b->var;
        if (a->peer != b->peer) return false;
        if (!assumed.emplace(print(a), print(b)).second) return true;
        if (a->kind == Local::Kind::send && a->branches.size() != b->branches.size()) return false;
        for (const auto& x : a->branches) {
            const auto* y = b->find(x.label);
            if (!y || !go(x.cont, y->cont)) return false;
        }
        return true;
    }
};

} // namespace

bool subtype(const LocalPtr& a, const LocalPtr& b) {
    SubtypeCheck c;
    return c.go(a, b);
}

} // namespace mpst
