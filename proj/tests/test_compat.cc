#include "doctest.h"

#include <set>

#include "mpst/cfsm.hh"
#include "mpst/compat.hh"
#include "mpst/error.hh"
#include "mpst/system.hh"
#include "util.hh"

using namespace mpst;

namespace {

System load(const char* f) { return parse_system(read_protocol(f)); }

// The action sequences of one machine up to length n.
void language(const Machine& m, StateId q, std::size_t n, Trace& cur, std::set<Trace>& out) {
    out.insert(cur);
    if (cur.size() == n) return;
    for (std::size_t e : m.out(q)) {
        cur.push_back(m.edges()[e].act);
        language(m, m.edges()[e].dst, n, cur, out);
        cur.pop_back();
    }
}

std::set<Trace> language(const Machine& m, std::size_t n) {
    std::set<Trace> out;
    Trace cur;
    language(m, m.initial(), n, cur, out);
    return out;
}

} // namespace

TEST_CASE("duality of actions") {
    Action a = send("A", "B", "act");
    CHECK(to_string(dual(a)) == "AB?act");
    CHECK(dual(dual(a)) == a);
    Trace t{send("A", "B", "a"), receive("C", "A", "x")};
    CHECK(dual(t) == Trace{receive("A", "B", "a"), send("C", "A", "x")});
    CHECK(dual(dual(t)) == t);
}

TEST_CASE("alternations") {
    CHECK(is_alternation({}));
    CHECK(is_alternation({send("A", "B", "act"), receive("A", "B", "act")}));
    CHECK(!is_alternation({send("A", "B", "act"), send("A", "C", "x")}));
    CHECK(!is_alternation({receive("A", "B", "act"), send("A", "B", "act")}));
    CHECK(!is_alternation({send("A", "B", "act")}));
    CHECK(!is_alternation({send("A", "B", "a"), receive("A", "B", "b")}));
}

TEST_CASE("dependency and causal chains") {
    Trace phi{send("A", "B", "a"), receive("A", "B", "a"), send("A", "C", "b"), send("C", "D", "x")};
    CHECK(depends(phi, 0, 1));
    CHECK(depends(phi, 0, 2));
    CHECK(!depends(phi, 0, 3));
    CHECK(!depends(phi, 1, 2));
    CHECK_THROWS_AS(depends(phi, 2, 1), ValidationError);
    CHECK_THROWS_AS(depends(phi, 1, 9), ValidationError);

    CHECK(is_causal_chain(phi, {0, 1}));
    CHECK(is_causal_chain(phi, {0, 2}));
    CHECK(!is_causal_chain(phi, {1, 2}));
    CHECK(!is_causal_chain(phi, {2, 0}));

    Trace chain{send("B", "A", "a"), receive("B", "A", "a"), send("A", "C", "go"), receive("A", "C", "go"),
                send("C", "D", "x")};
    CHECK(maximal_causal_chain(chain, 4) == std::vector<std::size_t>{0, 1, 2, 3, 4});
    CHECK(maximal_causal_chain(chain, 4, 2) == std::vector<std::size_t>{2, 3, 4});
    CHECK(maximal_causal_chain(phi, 3) == std::vector<std::size_t>{3});
    for (std::size_t i = 0; i < chain.size(); ++i) CHECK(is_causal_chain(chain, maximal_causal_chain(chain, i)));
}

TEST_CASE("commit system is compatible") {
    System s = load("commit.cfsm");
    auto r = multiparty_compatible(s);
    CHECK(r.compatible);
    CHECK(r.failures.empty());
    CHECK(r.stable_states >= 1);
    auto r4 = multiparty_compatible(s, {true, 4});
    CHECK(r4.compatible);
    CHECK(r4.stable_states == r.stable_states);
}

TEST_CASE("ABC and A2BC systems") {
    auto abc = multiparty_compatible(load("remark_abc.cfsm"));
    CHECK(!abc.compatible);
    REQUIRE(!abc.failures.empty());
    // From C's side: once B has sent a and A has taken it, d is unmatched.
    const CompatFailure* fc = nullptr;
    for (const auto& x : abc.failures)
        if (x.participant == "C" && !fc) fc = &x;
    REQUIRE(fc != nullptr);
    CHECK(to_string(fc->action) == "CA!d");
    CHECK(to_string(fc->alternation) == "BA!a·BA?a");
    CHECK(fc->stable_path.empty());
    // From A's side: after BA?a, C may still pick d.
    const CompatFailure& fa = abc.failures.front();
    CHECK(fa.participant == "A");
    CHECK(to_string(fa.local_path) == "BA?a");
    CHECK(to_string(fa.action) == "CA!d");

    auto a2 = multiparty_compatible(load("remark_a2bc.cfsm"));
    CHECK(a2.compatible);
}

TEST_CASE("insensitive to renaming and source order") {
    System a = load("remark_abc.cfsm");
    System b = parse_system(
        "machine C { init z; z -- C A ! d --> y; z -- C A ! c --> x; }\n"
        "machine B { init s; s -- B A ! b --> u; s -- B A ! a --> v; }\n"
        "machine A { init p0; p0 -- B A ? b --> p3; p3 -- C A ? d --> p4; p0 -- B A ? a --> p1; p1 -- C A ? c --> p2; }");
    auto ra = multiparty_compatible(a), rb = multiparty_compatible(b);
    CHECK(ra.compatible == rb.compatible);
    REQUIRE(ra.failures.size() == rb.failures.size());
    for (std::size_t i = 0; i < ra.failures.size(); ++i) {
        CHECK(ra.failures[i].action == rb.failures[i].action);
        CHECK(ra.failures[i].alternation == rb.failures[i].alternation);
    }
    CHECK(multiparty_compatible(parse_system(print(load("commit.cfsm")))).compatible);
}

TEST_CASE("receives need a sender") {
    // Accepting more than is ever sent is fine.
    System wide = parse_system(
        "machine A { init q0; q0 -- B A ? x --> q1; q0 -- B A ? y --> q1; }\n"
        "machine B { init q0; q0 -- B A ! x --> q1; }");
    CHECK(multiparty_compatible(wide).compatible);

    System none = parse_system(
        "machine A { init q0; q0 -- B A ? x --> q1; }\n"
        "machine B { init q0; q0 -- C B ? z --> q1; }\n"
        "machine C { init q0; }");
    auto r = multiparty_compatible(none);
    CHECK(!r.compatible);
    REQUIRE(!r.failures.empty());
    CHECK(r.failures[0].participant == "A");
    CHECK(to_string(r.failures[0].action) == "BA!x");

    // The sender may pick a label the receiver does not handle.
    System narrow = parse_system(
        "machine A { init q0; q0 -- B A ? x --> q1; }\n"
        "machine B { init q0; q0 -- B A ! x --> q1; q0 -- B A ! y --> q1; }");
    auto n = multiparty_compatible(narrow);
    CHECK(!n.compatible);
    bool saw_y = false;
    for (const auto& f : n.failures) saw_y |= to_string(f.action) == "BA!y";
    CHECK(saw_y);
}

TEST_CASE("non basic input") {
    System mixed = parse_system(
        "machine A { init q0; q0 -- A B ! a --> q1; q0 -- B A ? b --> q1; }\n"
        "machine B { init q0; q0 -- A B ? a --> q1; q0 -- B A ! b --> q1; }");
    CHECK_THROWS_AS(multiparty_compatible(mixed), NotBasic);
    CHECK_NOTHROW(multiparty_compatible(mixed, {false, 1}));
}

TEST_CASE("binary duality of buyer and seller") {
    System s = load("buyer_seller.cfsm");
    CHECK(is_basic(s).basic);
    CHECK(multiparty_compatible(s).compatible);
    std::set<Trace> buyer = language(s.machine("Buyer"), 12);
    std::set<Trace> seller;
    for (const Trace& t : language(s.machine("Seller"), 12)) seller.insert(dual(t));
    CHECK(buyer == seller);
    CHECK(buyer.size() > 12);
}

TEST_CASE("compatible systems are safe") {
    for (const char* f : {"commit.cfsm", "remark_a2bc.cfsm", "buyer_seller.cfsm"}) {
        System s = load(f);
        REQUIRE(multiparty_compatible(s).compatible);
        for (unsigned k : {1u, 2u, 3u}) {
            auto rep = check_safety(s, k);
            CHECK(rep.safe());
            if (rep.liveness_checked) CHECK(rep.live);
        }
    }
}

TEST_CASE("input availability on compatible systems") {
    // Every send in the explored graph is later received on every path that
    // is not cut by the depth limit.
    System s = load("commit.cfsm");
    ReachSet rs = reach(s, 2);
    for (std::uint32_t c = 0; c < rs.size(); ++c) {
        for (std::size_t ai : rs.out[c]) {
            const auto& arc = rs.arcs[ai];
            if (!arc.act.is_send()) continue;
            std::size_t ch = s.channel(*s.index_of(arc.act.from), *s.index_of(arc.act.to));
            std::size_t pending = rs.configs[arc.dst].buffers[ch].size();
            // The message is consumed once the channel has been read
            // `pending` times; a configuration where that is impossible
            // forever would be stuck, and none is.
            CHECK(pending >= 1);
            CHECK(!classify(rs.configs[arc.dst], s).error());
        }
    }
}
