#include "mpst/synthesis.hh"

#include <algorithm>
#include <set>

#include "mpst/compat.hh"
#include "mpst/error.hh"
#include "mpst/projection.hh"
#include "mpst/semantics.hh"

namespace mpst {

namespace {

using Tuple = std::vector<StateId>;

struct Walker {
    const System& sys;
    bool reverse;

    struct Frame {
        Tuple tuple;
        std::set<std::size_t> involved;  // participants acting since this frame
    };
    std::vector<Frame> stack;

    std::string var(std::size_t frame) const { return "t_" + std::to_string(frame); }

    bool final_at(const Tuple& t, std::size_t p) const { return sys.machine(p).is_final(t[p]); }

    /// Enabled (sender, receiver) pairs in preference order.
    std::vector<std::pair<std::size_t, std::size_t>> enabled(const Tuple& t) const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t p = 0; p < sys.size(); ++p) {
            const Machine& m = sys.machine(p);
            std::set<std::size_t> peers;
            for (std::size_t e : m.out(t[p]))
                if (m.edges()[e].act.is_send()) peers.insert(*sys.index_of(m.edges()[e].act.to));
            for (std::size_t q : peers) {
                const Machine& mq = sys.machine(q);
                bool listens = false;
                for (std::size_t e : mq.out(t[q])) {
                    const Action& a = mq.edges()[e].act;
                    if (a.is_receive() && a.from == sys.participants()[p]) listens = true;
                }
                if (listens) out.emplace_back(p, q);
            }
        }
        if (reverse) std::reverse(out.begin(), out.end());
        return out;
    }

    GlobalPtr walk(const Tuple& t) {
        auto pairs = enabled(t);
        // Close the loop on an ancestor once everyone still active has
        // acted since then.
        std::size_t repeats = 0;
        std::set<std::size_t> missing_for_latest;
        bool have_latest = false;
        for (std::size_t f = stack.size(); f-- > 0;) {
            if (stack[f].tuple != t) continue;
            ++repeats;
            std::set<std::size_t> missing;
            for (std::size_t p = 0; p < sys.size(); ++p)
                if (!stack[f].involved.count(p) && !final_at(t, p)) missing.insert(p);
            if (missing.empty()) return g_var(var(f));
            if (!have_latest) {
                missing_for_latest = missing;
                have_latest = true;
            }
        }
        if (repeats > sys.size() + 1)
            throw SynthesisFailure("joint state revisited too often without involving every participant");
        if (pairs.empty()) {
            for (std::size_t p = 0; p < sys.size(); ++p)
                if (!final_at(t, p))
                    throw SynthesisFailure("no exchange is enabled with empty buffers but " +
                                           sys.participants()[p] + " has not terminated");
            return g_end();
        }
        std::pair<std::size_t, std::size_t> pick = pairs.front();
        if (have_latest) {
            auto it = std::find_if(pairs.begin(), pairs.end(), [&](const auto& pq) {
                return missing_for_latest.count(pq.first) || missing_for_latest.count(pq.second);
            });
            if (it == pairs.end()) {
                std::string who;
                for (auto p : missing_for_latest) who += (who.empty() ? "" : ", ") + sys.participants()[p];
                throw SynthesisFailure("loop closes without involving " + who);
            }
            pick = *it;
        }
        auto [p, q] = pick;
        const Machine& mp = sys.machine(p);
        const Machine& mq = sys.machine(q);
        std::set<Label> offered;
        for (std::size_t e : mq.out(t[q])) {
            const Action& a = mq.edges()[e].act;
            if (a.is_receive() && a.from == sys.participants()[p]) offered.insert(a.msg);
        }
        std::size_t frame = stack.size();
        stack.push_back({t, {}});
        std::vector<GlobalBranch> branches;
        for (std::size_t e : mp.out(t[p])) {
            const Edge& ed = mp.edges()[e];
            if (!ed.act.is_send() || ed.act.to != sys.participants()[q]) continue;
            if (!offered.count(ed.act.msg))
                throw SynthesisFailure(sys.participants()[q] + " cannot receive " + to_string(ed.act) +
                                       " in state " + mq.name(t[q]));
            Tuple n = t;
            n[p] = ed.dst;
            n[q] = *mq.step(t[q], dual(ed.act));
            // Record the exchange for every open frame.
            std::vector<std::set<std::size_t>> saved;
            for (auto& f : stack) saved.push_back(f.involved);
            for (auto& f : stack) {
                f.involved.insert(p);
                f.involved.insert(q);
            }
            branches.push_back({ed.act.msg, walk(n)});
            for (std::size_t i = 0; i < stack.size(); ++i) stack[i].involved = saved[i];
        }
        stack.pop_back();
        GlobalPtr body = g_branch(sys.participants()[p], sys.participants()[q], std::move(branches));
        if (free_vars(body).count(var(frame))) return g_rec(var(frame), body);
        return body;
    }
};

} // namespace

GlobalPtr synthesize(const System& s, SynthesisOptions opts) {
    if (opts.check_preconditions) {
        auto b = is_basic(s);
        if (!b.basic) throw NotBasic("system is not basic: " + b.reasons.front());
        auto c = multiparty_compatible(s);
        if (!c.compatible) {
            const auto& f = c.failures.front();
            throw NotCompatible("not multiparty compatible: " + f.participant + " cannot match " +
                                to_string(f.action));
        }
    }
    Walker w{s, opts.reverse_order, {}};
    Tuple t;
    for (const auto& m : s.machines()) t.push_back(m.initial());
    GlobalPtr g = rename_canonical(w.walk(t));
    auto wf = well_formed(g);
    if (!wf.ok) {
        std::string why = wf.errors.begin()->first + ": " + wf.errors.begin()->second;
        throw SynthesisFailure("synthesized type " + print(g) + " is not well formed (" + why + ")");
    }
    return g;
}

RoundTrip verify_roundtrip(const System& s, const GlobalPtr& g, std::size_t n, const std::vector<Bound>& ks) {
    RoundTrip r;
    for (Bound k : ks) {
        auto res = trace_equiv(Executable{s}, Executable{g}, n, k);
        if (!res.equivalent) r.ok = false;
        r.bounds.push_back({k, std::move(res)});
    }
    return r;
}

} // namespace mpst
