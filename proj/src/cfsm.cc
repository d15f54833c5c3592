#include "mpst/cfsm.hh"

#include <memory>

#include <algorithm>
#include <deque>
#include <thread>

#include "mpst/error.hh"

namespace mpst {

bool Configuration::stable() const {
    return std::all_of(buffers.begin(), buffers.end(), [](const auto& w) { return w.empty(); });
}

std::size_t ConfigHash::operator()(const Configuration& c) const {
    std::size_t h = 1469598103934665603ull;
    auto mix = [&](std::size_t v) { h = (h ^ v) * 1099511628211ull; };
    for (StateId q : c.control) mix(q);
    for (const auto& w : c.buffers) {
        mix(0x9e3779b9u + w.size());
        for (auto a : w) mix(a);
    }
    return h;
}

Configuration initial(const System& s) {
    Configuration c;
    for (const auto& m : s.machines()) c.control.push_back(m.initial());
    c.buffers.resize(s.size() * s.size());
    return c;
}

std::vector<Firing> fire(const Configuration& c, const System& s) {
    std::vector<Firing> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const Machine& m = s.machine(i);
        for (std::size_t e : m.out(c.control[i])) {
            const Edge& ed = m.edges()[e];
            std::size_t peer = *s.index_of(ed.act.peer());
            std::uint32_t lbl = s.label_id(ed.act.msg);
            if (ed.act.is_send()) {
                Configuration t = c;
                t.control[i] = ed.dst;
                t.buffers[s.channel(i, peer)].push_back(lbl);
                out.push_back({i, ed.act, std::move(t)});
            } else {
                const auto& w = c.buffers[s.channel(peer, i)];
                if (w.empty() || w.front() != lbl) continue;
                Configuration t = c;
                t.control[i] = ed.dst;
                auto& tw = t.buffers[s.channel(peer, i)];
                tw.erase(tw.begin());
                out.push_back({i, ed.act, std::move(t)});
            }
        }
    }
    return out;
}

std::string to_string(const Configuration& c, const System& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ", ";
        out += s.machine(i).name(c.control[i]);
    }
    std::string bufs;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = 0; j < s.size(); ++j) {
            const auto& w = c.buffers[s.channel(i, j)];
            if (w.empty()) continue;
            if (!bufs.empty()) bufs += ", ";
            const auto& p = s.participants();
            bufs += p[i] + (p[i].size() == 1 && p[j].size() == 1 ? "" : ".") + p[j] + "=";
            for (std::size_t k = 0; k < w.size(); ++k) {
                if (k) bufs += "·";
                bufs += s.alphabet()[w[k]];
            }
        }
    }
    out += "; " + (bufs.empty() ? std::string("ε") : bufs) + ")";
    return out;
}

std::vector<std::string> Classification::names() const {
    std::vector<std::string> out;
    if (stable) out.push_back("stable");
    if (final) out.push_back("final");
    if (deadlock) out.push_back("deadlock");
    if (orphan) out.push_back("orphan");
    if (unspecified_reception) out.push_back("unspecified_reception");
    if (intermediate()) out.push_back("intermediate");
    return out;
}

Classification classify(const Configuration& c, const System& s) {
    Classification r;
    r.stable = c.stable();
    bool all_final = true, all_blocked = true;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const Machine& m = s.machine(i);
        StateId q = c.control[i];
        if (!m.is_final(q)) all_final = false;
        if (!m.is_final(q) && !m.is_receiving(q)) all_blocked = false;
        if (m.is_receiving(q)) {
            bool prevented = true;
            for (std::size_t e : m.out(q)) {
                const Action& a = m.edges()[e].act;
                const auto& w = c.buffers[s.channel(*s.index_of(a.from), i)];
                if (w.empty() || s.alphabet()[w.front()] == a.msg) {
                    prevented = false;
                    break;
                }
            }
            if (prevented) r.unspecified_reception = true;
        }
    }
    r.final = r.stable && all_final;
    r.deadlock = !r.final && r.stable && all_blocked;
    r.orphan = all_final && !r.stable;
    return r;
}

std::optional<std::uint32_t> ReachSet::find(const Configuration& c) const {
    auto it = index.find(c);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

Trace ReachSet::path_to(std::uint32_t id) const {
    Trace t;
    while (parent_arc[id] != std::size_t(-1)) {
        const Arc& a = arcs[parent_arc[id]];
        t.push_back(a.act);
        id = a.src;
    }
    std::reverse(t.begin(), t.end());
    return t;
}

namespace {

bool within(const Firing& f, const System& s, Bound k) {
    if (k == unbounded || !f.act.is_send()) return true;
    std::size_t peer = *s.index_of(f.act.to);
    return f.target.buffers[s.channel(f.machine, peer)].size() <= k;
}

} // namespace

ReachSet reach(const System& s, Bound k, ReachOptions opts) {
    ReachSet rs;
    rs.bound = k;
    auto add = [&](Configuration c, std::size_t via) -> std::pair<std::uint32_t, bool> {
        auto it = rs.index.find(c);
        if (it != rs.index.end()) return {it->second, false};
        if (rs.configs.size() >= node_cap()) throw_node_cap(node_cap());
        std::uint32_t id = std::uint32_t(rs.configs.size());
        rs.index.emplace(c, id);
        rs.configs.push_back(std::move(c));
        rs.out.emplace_back();
        rs.parent_arc.push_back(via);
        return {id, true};
    };
    add(initial(s), std::size_t(-1));
    // Level-synchronous BFS; successor lists are computed (possibly in
    // parallel) per level and merged in order, so the result does not
    // depend on the thread count.
    std::size_t begin = 0;
    while (begin < rs.configs.size()) {
        std::size_t end = rs.configs.size();
        std::vector<std::vector<Firing>> succ(end - begin);
        auto work = [&](std::size_t from, std::size_t to) {
            for (std::size_t i = from; i < to; ++i) {
                auto fs = fire(rs.configs[begin + i], s);
                fs.erase(std::remove_if(fs.begin(), fs.end(), [&](const Firing& f) { return !within(f, s, k); }),
                         fs.end());
                succ[i] = std::move(fs);
            }
        };
        std::size_t n = end - begin;
        std::size_t threads = std::max<std::size_t>(1, std::min(opts.threads, n / 64 + 1));
        if (threads == 1) {
            work(0, n);
        } else {
            std::vector<std::thread> pool;
            std::size_t chunk = (n + threads - 1) / threads;
            for (std::size_t t = 0; t < threads; ++t) {
                std::size_t a = t * chunk, b = std::min(n, a + chunk);
                if (a < b) pool.emplace_back(work, a, b);
            }
            for (auto& th : pool) th.join();
        }
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t src = std::uint32_t(begin + i);
            for (auto& f : succ[i]) {
                std::size_t arc = rs.arcs.size();
                std::uint32_t dst = add(std::move(f.target), arc).first;
                rs.arcs.push_back({src, f.act, dst});
                rs.out[src].push_back(arc);
            }
        }
        begin = end;
    }
    return rs;
}

bool SafetyReport::safe() const {
    return violations.empty();
}

SafetyReport check_safety(const System& s, Bound k, bool liveness, ReachOptions opts) {
    ReachSet rs = reach(s, k, opts);
    SafetyReport r;
    r.bound = k;
    r.configurations = rs.size();
    std::vector<bool> is_final(rs.size(), false);
    for (std::uint32_t i = 0; i < rs.size(); ++i) {
        Classification c = classify(rs.configs[i], s);
        is_final[i] = c.final;
        auto report = [&](const char* kind) {
            r.violations.push_back({kind, rs.path_to(i), to_string(rs.configs[i], s)});
        };
        if (c.deadlock) report("deadlock");
        if (c.orphan) report("orphan");
        if (c.unspecified_reception) report("unspecified_reception");
    }
    bool has_final_state = false;
    for (const auto& m : s.machines())
        for (StateId q = 0; q < m.num_states(); ++q)
            if (m.is_final(q)) has_final_state = true;
    r.liveness_checked = liveness && has_final_state;
    if (r.liveness_checked) {
        // Backward reachability from final configurations.
        std::vector<std::vector<std::uint32_t>> preds(rs.size());
        for (const auto& a : rs.arcs) preds[a.dst].push_back(a.src);
        std::vector<bool> ok = is_final;
        std::deque<std::uint32_t> work;
        for (std::uint32_t i = 0; i < rs.size(); ++i)
            if (ok[i]) work.push_back(i);
        while (!work.empty()) {
            std::uint32_t v = work.front();
            work.pop_front();
            for (auto u : preds[v])
                if (!ok[u]) {
                    ok[u] = true;
                    work.push_back(u);
                }
        }
        for (std::uint32_t i = 0; i < rs.size(); ++i) {
            if (ok[i]) continue;
            r.live = false;
            r.violations.push_back({"liveness", rs.path_to(i), to_string(rs.configs[i], s)});
            break;
        }
    }
    return r;
}

std::unique_ptr<InternedLts<Configuration>> as_lts(const System& s) {
    auto sys = std::make_shared<const System>(s);
    auto next = [sys](const Configuration& c) {
        std::vector<std::pair<Action, Configuration>> out;
        for (auto& f : fire(c, *sys)) out.emplace_back(std::move(f.act), std::move(f.target));
        return out;
    };
    auto key = [sys](const Configuration& c) { return to_string(c, *sys); };
    auto fin = [sys](const Configuration& c) { return classify(c, *sys).final; };
    return std::make_unique<InternedLts<Configuration>>(initial(*sys), next, key, fin);
}

TraceTrie traces(const System& s, std::size_t n, Bound k) {
    auto l = as_lts(s);
    return traces(*l, n, k);
}

Product::Product(const System& s, std::optional<Participant> minus) : sys_(s) {
    for (std::size_t i = 0; i < s.size(); ++i)
        if (!minus || s.participants()[i] != *minus) members_.push_back(i);
}

Product::Tuple Product::initial() const {
    Tuple t;
    for (auto i : members_) t.push_back(sys_.machine(i).initial());
    return t;
}

std::vector<std::pair<Action, Product::Tuple>> Product::successors(const Tuple& t) const {
    std::vector<std::pair<Action, Tuple>> out;
    for (std::size_t k = 0; k < members_.size(); ++k) {
        const Machine& m = sys_.machine(members_[k]);
        for (std::size_t e : m.out(t[k])) {
            Tuple n = t;
            n[k] = m.edges()[e].dst;
            out.emplace_back(m.edges()[e].act, std::move(n));
        }
    }
    return out;
}

std::size_t Product::num_states_bound() const {
    std::size_t n = 1;
    for (auto i : members_) n *= sys_.machine(i).num_states();
    return n;
}

std::vector<std::string> diamond_violations(const System& s, const ReachSet& rs) {
    std::vector<std::string> out;
    auto after = [&](const Configuration& c, const Action& a) -> std::optional<Configuration> {
        for (auto& f : fire(c, s))
            if (f.act == a) return std::move(f.target);
        return std::nullopt;
    };
    for (std::uint32_t i = 0; i < rs.size(); ++i) {
        const auto& arcs = rs.out[i];
        for (std::size_t x = 0; x < arcs.size(); ++x) {
            for (std::size_t y = x + 1; y < arcs.size(); ++y) {
                const auto& t1 = rs.arcs[arcs[x]];
                const auto& t2 = rs.arcs[arcs[y]];
                const Action& a1 = t1.act;
                const Action& a2 = t2.act;
                std::string where = to_string(rs.configs[i], s) + " with " + to_string(a1) + ", " + to_string(a2);
                if (a1.subject() == a2.subject()) {
                    // Only two sends on the same channel may coexist.
                    if (!(a1.is_send() && a2.is_send() && a1.to == a2.to))
                        out.push_back("unexpected pair at " + where);
                    continue;
                }
                auto s1 = after(rs.configs[t1.dst], a2);
                auto s2 = after(rs.configs[t2.dst], a1);
                if (!s1 || !s2 || !(*s1 == *s2)) out.push_back("diamond missing at " + where);
            }
        }
    }
    return out;
}

} // namespace mpst
