#include "mpst/compat.hh"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <thread>

#include "mpst/error.hh"

namespace mpst {

bool is_alternation(const std::vector<Action>& phi) {
    if (phi.size() % 2) return false;
    for (std::size_t i = 0; i < phi.size(); i += 2)
        if (!phi[i].is_send() || phi[i + 1] != dual(phi[i])) return false;
    return true;
}

bool depends(const std::vector<Action>& phi, std::size_t i, std::size_t j) {
    if (!(i < j && j < phi.size())) throw ValidationError("depends: indices must satisfy i < j < |phi|");
    const Action& a = phi[i];
    const Action& b = phi[j];
    return (a.is_send() && b == dual(a)) || a.subject() == b.subject();
}

bool is_causal_chain(const std::vector<Action>& phi, const std::vector<std::size_t>& chain) {
    for (std::size_t k = 1; k < chain.size(); ++k)
        if (chain[k] <= chain[k - 1]) return false;
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
        bool found = false;
        for (std::size_t i = k + 1; i < chain.size() && !found; ++i) found = depends(phi, chain[k], chain[i]);
        if (!found) return false;
    }
    return true;
}

std::vector<std::size_t> maximal_causal_chain(const std::vector<Action>& phi, std::size_t last,
                                              std::size_t from) {
    std::vector<std::size_t> chain{last};
    for (std::size_t k = last; k-- > from;) {
        bool dep = std::any_of(chain.begin(), chain.end(), [&](std::size_t i) { return depends(phi, k, i); });
        if (dep) chain.push_back(k);
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

namespace {

using Context = std::vector<StateId>;

struct Reached {
    Context ctx;
    Trace path;
};

class Checker {
public:
    Checker(const System& s, std::size_t p) : sys_(s), p_(p) {}

    /// Runs the exploration from one stable configuration.
    void run(const Configuration& stable, const Trace& stable_path, const std::string& stable_name,
             std::vector<CompatFailure>& out) {
        Context c0 = stable.control;
        StateId q0 = c0[p_];
        c0[p_] = 0;
        struct Item {
            StateId q;
            std::vector<Context> xs;
            Trace local;
        };
        std::deque<Item> work;
        auto push = [&](StateId q, std::vector<Context> xs, Trace local) {
            std::sort(xs.begin(), xs.end());
            xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
            if (visited_.emplace(q, xs).second) work.push_back({q, std::move(xs), std::move(local)});
        };
        push(q0, {c0}, {});
        const Machine& m = sys_.machine(p_);
        const Participant& me = sys_.participants()[p_];
        while (!work.empty()) {
            Item it = std::move(work.front());
            work.pop_front();
            std::vector<Reached> ys = close(it.xs);
            auto fail = [&](Action a, Trace alt, std::string why) {
                out.push_back({me, it.local, stable_path, stable_name, std::move(a), std::move(alt), std::move(why)});
            };
            // Sends grouped by receiver.
            std::map<std::size_t, std::vector<const Edge*>> sends;
            for (std::size_t e : m.out(it.q)) {
                const Edge& ed = m.edges()[e];
                if (ed.act.is_send()) sends[*sys_.index_of(ed.act.to)].push_back(&ed);
            }
            for (const auto& [r, group] : sends) {
                std::set<Label> want;
                for (const Edge* e : group) want.insert(e->act.msg);
                std::vector<const Reached*> cover;
                const Reached* best = nullptr;
                std::size_t best_n = 0;
                for (const auto& y : ys) {
                    std::set<Label> have = receivable(r, y.ctx[r]);
                    std::size_t n = 0;
                    for (const auto& l : want) n += have.count(l);
                    if (n == want.size()) cover.push_back(&y);
                    if (!best || n > best_n) {
                        best = &y;
                        best_n = n;
                    }
                }
                if (cover.empty()) {
                    std::set<Label> have = receivable(r, best->ctx[r]);
                    Label missing;
                    for (const auto& l : want)
                        if (!have.count(l)) {
                            missing = l;
                            break;
                        }
                    fail(send(me, sys_.participants()[r], missing), best->path,
                         "no configuration of the others can receive every label sent to " +
                             sys_.participants()[r]);
                    continue;
                }
                for (const Edge* e : group) {
                    std::vector<Context> next;
                    for (const Reached* y : cover) {
                        Context c = y->ctx;
                        c[r] = *sys_.machine(r).step(c[r], dual(e->act));
                        next.push_back(std::move(c));
                    }
                    Trace local = it.local;
                    local.push_back(e->act);
                    push(e->dst, std::move(next), std::move(local));
                }
            }
            // Receives grouped by sender: some context must have the sender
            // offering only labels this state accepts; those labels are the
            // ones followed.
            std::map<std::size_t, std::map<Label, StateId>> recvs;
            for (std::size_t e : m.out(it.q)) {
                const Edge& ed = m.edges()[e];
                if (ed.act.is_receive()) recvs[*sys_.index_of(ed.act.from)][ed.act.msg] = ed.dst;
            }
            for (const auto& [r, accept] : recvs) {
                std::map<Label, std::vector<Context>> next;
                const Reached* bad = nullptr;
                Label bad_label;
                for (const auto& y : ys) {
                    std::set<Label> offer = offered(r, y.ctx[r]);
                    if (offer.empty()) continue;
                    auto miss = std::find_if(offer.begin(), offer.end(), [&](const Label& l) { return !accept.count(l); });
                    if (miss != offer.end()) {
                        if (!bad) {
                            bad = &y;
                            bad_label = *miss;
                        }
                        continue;
                    }
                    for (const auto& l : offer) {
                        Context c = y.ctx;
                        c[r] = *sys_.machine(r).step(c[r], send(sys_.participants()[r], me, l));
                        next[l].push_back(std::move(c));
                    }
                }
                if (next.empty()) {
                    if (bad)
                        fail(send(sys_.participants()[r], me, bad_label), bad->path,
                             "the sender may choose a label " + me + " cannot receive");
                    else
                        fail(send(sys_.participants()[r], me, accept.begin()->first), {},
                             "no configuration of the others sends to " + me);
                    continue;
                }
                for (auto& [l, cs] : next) {
                    Trace local = it.local;
                    local.push_back(receive(sys_.participants()[r], me, l));
                    push(accept.at(l), std::move(cs), std::move(local));
                }
            }
        }
    }

private:
    std::set<Label> receivable(std::size_t r, StateId q) const {
        std::set<Label> out;
        const Machine& m = sys_.machine(r);
        for (std::size_t e : m.out(q)) {
            const Action& a = m.edges()[e].act;
            if (a.is_receive() && a.from == sys_.participants()[p_]) out.insert(a.msg);
        }
        return out;
    }

    /// Labels machine r sends to the checked participant from state q.
    std::set<Label> offered(std::size_t r, StateId q) const {
        std::set<Label> out;
        const Machine& m = sys_.machine(r);
        for (std::size_t e : m.out(q)) {
            const Action& a = m.edges()[e].act;
            if (a.is_send() && a.to == sys_.participants()[p_]) out.insert(a.msg);
        }
        return out;
    }

    /// Contexts reachable through alternations of the other machines, in
    /// breadth-first order, with the alternation that reaches them.
    const std::vector<Reached>& closure_of(const Context& c) {
        auto it = closures_.find(c);
        if (it != closures_.end()) return it->second;
        std::vector<Reached> out{{c, {}}};
        std::set<Context> seen{c};
        for (std::size_t i = 0; i < out.size(); ++i) {
            for (std::size_t x = 0; x < sys_.size(); ++x) {
                if (x == p_) continue;
                const Machine& mx = sys_.machine(x);
                for (std::size_t e : mx.out(out[i].ctx[x])) {
                    const Edge& ed = mx.edges()[e];
                    if (!ed.act.is_send()) continue;
                    std::size_t y = *sys_.index_of(ed.act.to);
                    if (y == p_) continue;
                    auto d = sys_.machine(y).step(out[i].ctx[y], dual(ed.act));
                    if (!d) continue;
                    Context n = out[i].ctx;
                    n[x] = ed.dst;
                    n[y] = *d;
                    if (!seen.insert(n).second) continue;
                    if (seen.size() > node_cap()) throw_node_cap(node_cap());
                    Trace path = out[i].path;
                    path.push_back(ed.act);
                    path.push_back(dual(ed.act));
                    out.push_back({std::move(n), std::move(path)});
                }
            }
        }
        return closures_.emplace(c, std::move(out)).first->second;
    }

    std::vector<Reached> close(const std::vector<Context>& xs) {
        std::vector<Reached> out;
        std::set<Context> seen;
        for (const auto& x : xs)
            for (const auto& r : closure_of(x))
                if (seen.insert(r.ctx).second) out.push_back(r);
        return out;
    }

    const System& sys_;
    std::size_t p_;
    std::map<Context, std::vector<Reached>> closures_;
    std::set<std::pair<StateId, std::vector<Context>>> visited_;
};

} // namespace

CompatReport multiparty_compatible(const System& s, CompatOptions opts) {
    if (opts.require_basic) {
        auto b = is_basic(s);
        if (!b.basic) {
            std::string why;
            for (const auto& r : b.reasons) why += (why.empty() ? "" : "; ") + r;
            throw NotBasic("system is not basic: " + why);
        }
    } else {
        for (const auto& m : s.machines())
            if (!is_deterministic(m)) throw NotBasic("machine " + m.owner() + " is not deterministic");
    }
    ReachSet rs = reach(s, 1);
    std::vector<std::uint32_t> stable;
    for (std::uint32_t i = 0; i < rs.size(); ++i)
        if (rs.configs[i].stable()) stable.push_back(i);

    std::vector<std::vector<CompatFailure>> per(s.size());
    auto work = [&](std::size_t p) {
        Checker ck(s, p);
        for (auto id : stable) ck.run(rs.configs[id], rs.path_to(id), to_string(rs.configs[id], s), per[p]);
    };
    std::size_t threads = std::max<std::size_t>(1, std::min(opts.threads, s.size()));
    if (threads == 1) {
        for (std::size_t p = 0; p < s.size(); ++p) work(p);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t p = t; p < s.size(); p += threads) work(p);
            });
        for (auto& th : pool) th.join();
    }
    CompatReport r;
    r.stable_states = stable.size();
    for (auto& f : per) r.failures.insert(r.failures.end(), f.begin(), f.end());
    r.compatible = r.failures.empty();
    return r;
}

} // namespace mpst
