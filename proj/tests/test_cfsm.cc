#include "doctest.h"

#include <deque>
#include <map>
#include <set>

#include "mpst/cfsm.hh"
#include "mpst/error.hh"
#include "mpst/system.hh"
#include "util.hh"

using namespace mpst;

namespace {

System commit() { return parse_system(read_protocol("commit.cfsm")); }

// Brute-force reachability written against the machine edges only: a
// configuration is the list of state names plus one string per channel.
struct OracleConfig {
    std::vector<std::string> states;
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> chans;
    auto operator<=>(const OracleConfig&) const = default;
};

std::vector<std::pair<Action, OracleConfig>> oracle_next(const System& s, const OracleConfig& c, unsigned k) {
    std::vector<std::pair<Action, OracleConfig>> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const Machine& m = s.machine(i);
        StateId q = *m.find_state(c.states[i]);
        for (const Edge& e : m.edges()) {
            if (e.src != q) continue;
            OracleConfig d = c;
            d.states[i] = m.name(e.dst);
            auto key = std::make_pair(e.act.from, e.act.to);
            auto& w = d.chans[key];
            if (e.act.is_send()) {
                if (k && w.size() >= k) continue;
                w.push_back(e.act.msg);
            } else {
                if (w.empty() || w.front() != e.act.msg) continue;
                w.erase(w.begin());
                if (w.empty()) d.chans.erase(key);
            }
            out.emplace_back(e.act, std::move(d));
        }
    }
    return out;
}

std::set<OracleConfig> oracle_reach(const System& s, unsigned k) {
    OracleConfig init;
    for (const Machine& m : s.machines()) init.states.push_back(m.name(m.initial()));
    std::set<OracleConfig> seen{init};
    std::deque<OracleConfig> work{init};
    while (!work.empty()) {
        OracleConfig c = work.front();
        work.pop_front();
        for (auto& [a, d] : oracle_next(s, c, k))
            if (seen.insert(d).second) work.push_back(d);
    }
    return seen;
}

// All action sequences of length <= n, by plain recursion.
void oracle_traces(const System& s, const OracleConfig& c, unsigned k, std::size_t n, Trace& cur,
                   std::set<Trace>& out) {
    out.insert(cur);
    if (cur.size() == n) return;
    for (auto& [a, d] : oracle_next(s, c, k)) {
        cur.push_back(a);
        oracle_traces(s, d, k, n, cur, out);
        cur.pop_back();
    }
}

std::set<Trace> oracle_traces(const System& s, unsigned k, std::size_t n) {
    OracleConfig init;
    for (const Machine& m : s.machines()) init.states.push_back(m.name(m.initial()));
    std::set<Trace> out;
    Trace cur;
    oracle_traces(s, init, k, n, cur, out);
    return out;
}

std::set<Trace> as_set(const TraceTrie& t) {
    auto v = t.all();
    return {v.begin(), v.end()};
}

} // namespace

TEST_CASE("initial configuration and firing") {
    System s = commit();
    Configuration c0 = initial(s);
    CHECK(c0.stable());
    CHECK(to_string(c0, s) == "(q0, q0, q0; ε)");
    auto fs = fire(c0, s);
    REQUIRE(fs.size() == 2);
    CHECK(to_string(fs[0].act) == "AB!act");
    CHECK(to_string(fs[1].act) == "AB!quit");
    CHECK(to_string(fs[0].target, s) == "(q1, q0, q0; AB=act)");

    auto after = fire(fs[0].target, s);
    bool recv = false;
    for (const auto& f : after) recv |= to_string(f.act) == "AB?act";
    CHECK(recv);

    CHECK(classify(c0, s).stable);
    CHECK(!classify(c0, s).error());
}

TEST_CASE("firing changes one state and one buffer by one symbol") {
    System s = commit();
    ReachSet rs = reach(s, 2);
    for (const auto& c : rs.configs) {
        for (const Firing& f : fire(c, s)) {
            std::size_t states = 0, bufs = 0;
            for (std::size_t i = 0; i < c.control.size(); ++i) states += c.control[i] != f.target.control[i];
            for (std::size_t i = 0; i < c.buffers.size(); ++i) {
                if (c.buffers[i] == f.target.buffers[i]) continue;
                ++bufs;
                long d = long(c.buffers[i].size()) - long(f.target.buffers[i].size());
                CHECK((d == 1 || d == -1));
            }
            CHECK(states == 1);
            CHECK(bufs == 1);
        }
    }
}

TEST_CASE("bounded reachability agrees with a brute force search") {
    System s = commit();
    for (unsigned k : {1u, 2u, 3u}) {
        ReachSet rs = reach(s, k);
        CHECK(rs.size() == oracle_reach(s, k).size());
    }
    // Frozen from the brute force search above.
    CHECK(reach(s, 1).size() == 30);
    CHECK(reach(s, 2).size() == 70);

    // Threads do not change the result.
    ReachSet a = reach(s, 3), b = reach(s, 3, {4});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.configs[i] == b.configs[i]);
    CHECK(a.arcs.size() == b.arcs.size());

    // Every configuration has a shortest path that leads to it.
    for (std::uint32_t i = 0; i < a.size(); ++i) {
        Configuration c = initial(s);
        for (const Action& act : a.path_to(i)) {
            bool moved = false;
            for (const Firing& f : fire(c, s)) {
                if (f.act == act) {
                    c = f.target;
                    moved = true;
                    break;
                }
            }
            REQUIRE(moved);
        }
        CHECK(c == a.configs[i]);
    }
}

TEST_CASE("reachability is monotone in the bound") {
    for (const char* f : {"commit.cfsm", "remark_abc.cfsm", "buyer_seller.cfsm"}) {
        System s = parse_system(read_protocol(f));
        ReachSet r1 = reach(s, 1), r2 = reach(s, 2), r3 = reach(s, 3);
        for (const auto& c : r1.configs) CHECK(r2.find(c).has_value());
        for (const auto& c : r2.configs) CHECK(r3.find(c).has_value());
    }
}

TEST_CASE("single machine without transitions") {
    System s = parse_system("machine A { init q0; }");
    for (unsigned k : {1u, 2u, 5u}) CHECK(reach(s, k).size() == 1);
    Classification c = classify(initial(s), s);
    CHECK(c.stable);
    CHECK(c.final);
    CHECK(!c.error());
    CHECK(fire(initial(s), s).empty());
    CHECK(check_safety(s, 1).safe());
}

TEST_CASE("classification") {
    // Both wait for the other.
    System dl = parse_system(
        "machine A { init q0; q0 -- B A ? x --> q1; }\n"
        "machine B { init q0; q0 -- A B ? y --> q1; }");
    Classification c = classify(initial(dl), dl);
    CHECK(c.deadlock);
    CHECK(c.stable);
    CHECK(!c.final);
    auto rep = check_safety(dl, 1);
    REQUIRE(!rep.violations.empty());
    CHECK(rep.violations[0].kind == "deadlock");
    CHECK(rep.violations[0].path.empty());

    // A sends and stops; B stops without reading.
    System orph = parse_system(
        "machine A { init q0; q0 -- A B ! a --> q1; }\n"
        "machine B { init q0; }");
    ReachSet rs = reach(orph, 1);
    REQUIRE(rs.size() == 2);
    Classification c1 = classify(rs.configs[1], orph);
    CHECK(c1.orphan);
    CHECK(!c1.stable);
    CHECK(!c1.final);
    auto names = c1.names();
    CHECK(std::find(names.begin(), names.end(), "orphan") != names.end());

    System ur = parse_system(
        "machine A { init q0; q0 -- A B ! a --> q1; }\n"
        "machine B { init q0; q0 -- A B ? b --> q1; }");
    ReachSet ru = reach(ur, 1);
    bool found = false;
    for (const auto& cf : ru.configs) found |= classify(cf, ur).unspecified_reception;
    CHECK(found);
}

TEST_CASE("safety of the commit system and the ABC systems") {
    System s = commit();
    for (unsigned k : {1u, 2u, 3u}) {
        auto rep = check_safety(s, k);
        CHECK(rep.safe());
        CHECK(rep.violations.empty());
    }

    System abc = parse_system(read_protocol("remark_abc.cfsm"));
    ReachSet rs = reach(abc, 1);
    const System& cs = abc;
    std::size_t ca = cs.channel(*cs.index_of("C"), *cs.index_of("A"));
    std::size_t a = *cs.index_of("A");
    bool stuck_d = false;
    for (const auto& c : rs.configs) {
        if (c.buffers[ca].size() == 1 && cs.alphabet()[c.buffers[ca][0]] == "d") {
            bool can = false;
            for (const Firing& f : fire(c, cs)) can |= f.machine == a && f.act.msg == "d";
            stuck_d |= !can && classify(c, cs).unspecified_reception;
        }
    }
    CHECK(stuck_d);
    auto rep = check_safety(abc, 1);
    CHECK(!rep.safe());
    bool kind = false;
    for (const auto& v : rep.violations) kind |= v.kind == "unspecified_reception" || v.kind == "orphan";
    CHECK(kind);
}

TEST_CASE("liveness") {
    // A loops forever while B can never reach its final state.
    System s = parse_system(
        "machine A { init q0; q0 -- A B ! a --> q1; q1 -- A B ! a --> q0; }\n"
        "machine B { init q0; q0 -- A B ? a --> q0; q0 -- A B ? b --> q1; }");
    auto rep = check_safety(s, 1);
    CHECK(rep.liveness_checked);
    CHECK(!rep.live);
    bool live_violation = false;
    for (const auto& v : rep.violations) live_violation |= v.kind == "liveness";
    CHECK(live_violation);

    // No final states anywhere: liveness has nothing to say.
    System loop = parse_system(
        "machine A { init q0; q0 -- A B ! a --> q0; }\n"
        "machine B { init q0; q0 -- A B ? a --> q0; }");
    auto r2 = check_safety(loop, 2);
    CHECK(!r2.liveness_checked);
    CHECK(r2.safe());
}

TEST_CASE("bounded traces agree with plain enumeration") {
    System s = commit();
    CHECK(as_set(traces(s, 0, 1)) == std::set<Trace>{Trace{}});
    auto t2 = traces(s, 2, 1);
    CHECK(t2.contains({send("A", "B", "act"), receive("A", "B", "act")}));
    CHECK(t2.contains({send("A", "B", "quit"), receive("A", "B", "quit")}));
    // Different channels: the second send does not wait for the first receive.
    CHECK(t2.contains({send("A", "B", "act"), send("A", "C", "commit")}));
    for (unsigned k : {1u, 2u})
        for (std::size_t n : {3u, 6u}) CHECK(as_set(traces(s, n, k)) == oracle_traces(s, k, n));

    // A sender with nobody reading: the bound blocks the second send.
    System lone = parse_system(
        "machine A { init q0; q0 -- A B ! a --> q0; }\n"
        "machine B { init q0; }");
    auto tl = as_set(traces(lone, 2, 1));
    CHECK(tl == oracle_traces(lone, 1, 2));
    CHECK(tl == std::set<Trace>{Trace{}, Trace{send("A", "B", "a")}});
    CHECK(as_set(traces(lone, 2, 2)).size() == 3);
}

TEST_CASE("associated product") {
    System s = commit();
    Product full(s);
    CHECK(full.initial() == Product::Tuple{0, 0, 0});
    CHECK(full.num_states_bound() == 4 * 4 * 4);

    Product minus(s, Participant("C"));
    CHECK(minus.num_states_bound() == s.machine("A").num_states() * s.machine("B").num_states());
    CHECK(minus.members().size() == 2);
    std::set<Product::Tuple> seen{minus.initial()};
    std::deque<Product::Tuple> work{minus.initial()};
    while (!work.empty()) {
        auto t = work.front();
        work.pop_front();
        for (auto& [a, u] : minus.successors(t)) {
            CHECK(a.subject() != "C");
            if (seen.insert(u).second) work.push_back(u);
        }
    }
    CHECK(seen.size() <= minus.num_states_bound());
}

TEST_CASE("diamond property on basic systems") {
    for (const char* f : {"commit.cfsm", "remark_a2bc.cfsm", "buyer_seller.cfsm"}) {
        System s = parse_system(read_protocol(f));
        REQUIRE(is_basic(s).basic);
        for (unsigned k : {1u, 2u, 3u}) CHECK(diamond_violations(s, reach(s, k)).empty());
    }
}

TEST_CASE("node cap") {
    System loop = parse_system(
        "machine A { init q0; q0 -- A B ! a --> q0; }\n"
        "machine B { init q0; q0 -- A B ? a --> q0; }");
    set_node_cap(3);
    CHECK_THROWS_AS(reach(loop, 10), ResourceLimit);
    set_node_cap(0);
    CHECK(reach(loop, 10).size() == 11);
}
