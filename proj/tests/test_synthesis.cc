#include "doctest.h"

#include <functional>

#include "mpst/error.hh"
#include "mpst/projection.hh"
#include "mpst/semantics.hh"
#include "mpst/synthesis.hh"
#include "mpst/syntax.hh"
#include "mpst/translate.hh"
#include "util.hh"

using namespace mpst;

namespace {

System load(const char* f) { return parse_system(read_protocol(f)); }

bool has_unused_binder(const GlobalPtr& g) {
    std::function<bool(const GlobalPtr&)> go = [&](const GlobalPtr& h) {
        switch (h->kind) {
        case Global::Kind::rec:
            if (!free_vars(h->body).count(h->var)) return true;
            return go(h->body);
        case Global::Kind::branch:
            for (const auto& b : h->branches)
                if (go(b.cont)) return true;
            return false;
        default: return false;
        }
    };
    return go(g);
}

// Two independent loops sharing no participant.
const char* two_phase =
    "machine A { init q0; q0 -- A B ! ping --> q0; }\n"
    "machine B { init q0; q0 -- A B ? ping --> q0; }\n"
    "machine C { init q0; q0 -- C D ! x --> q0; }\n"
    "machine D { init q0; q0 -- C D ? x --> q0; }";

} // namespace

TEST_CASE("commit synthesis recovers the global type") {
    GlobalPtr g = synthesize(load("commit.cfsm"));
    CHECK(alpha_equal(g, parse_global(read_protocol("commit.gt"))));
    CHECK(print(g) == "rec t0. A->B:{act. B->C:sig. A->C:commit. t0, quit. B->C:save. A->C:finish. end}");
    CHECK(well_formed(g).ok);
    auto rt = verify_roundtrip(load("commit.cfsm"), g, 10);
    CHECK(rt.ok);
    REQUIRE(rt.bounds.size() == 3);
    for (const auto& b : rt.bounds) CHECK(b.result.equivalent);
}

TEST_CASE("ABC and A2BC systems") {
    GlobalPtr g = synthesize(load("remark_a2bc.cfsm"));
    CHECK(print(g) == "B->A:{a. C->A:{c. end, d. end}, b. C->A:{c. end, d. end}}");
    CHECK(alpha_equal(g, parse_global(read_protocol("remark_a2bc.gt"))));
    CHECK(verify_roundtrip(load("remark_a2bc.cfsm"), g, 10).ok);

    CHECK_THROWS_AS(synthesize(load("remark_abc.cfsm")), NotCompatible);
    try {
        synthesize(load("remark_abc.cfsm"));
    } catch (const NotCompatible& e) {
        CHECK(std::string(e.what()).find("not multiparty compatible") != std::string::npos);
    }
}

TEST_CASE("trivial and invalid inputs") {
    CHECK(synthesize(parse_system("machine A { init q0; }"))->is_end());
    CHECK(print(synthesize(parse_system(
              "machine A { init q0; q0 -- A B ! a --> q1; }\n"
              "machine B { init q0; q0 -- A B ? a --> q1; }"))) == "A->B:a. end");

    System mixed = parse_system(
        "machine A { init q0; q0 -- A B ! a --> q1; q0 -- B A ? b --> q1; }\n"
        "machine B { init q0; q0 -- A B ? a --> q1; q0 -- B A ! b --> q1; }");
    CHECK_THROWS_AS(synthesize(mixed), NotBasic);
}

TEST_CASE("buyer and seller") {
    System s = load("buyer_seller.cfsm");
    GlobalPtr g = synthesize(s);
    CHECK(print(g) ==
          "rec t0. Buyer->Seller:title. Seller->Buyer:quote. Seller->Buyer:{ok. Buyer->Seller:addrs. "
          "Seller->Buyer:date. end, retry. t0}");
    CHECK(verify_roundtrip(s, g, 12).ok);
}

TEST_CASE("revisit closes only once everyone has acted") {
    System s = parse_system(two_phase);
    GlobalPtr g = synthesize(s);
    CHECK(print(g) == "rec t0. A->B:ping. C->D:x. t0");
    CHECK(participants(g).size() == 4);
    CHECK(verify_roundtrip(s, g, 8, {1, 2}).ok);
    // Closing at the first revisit would lose C and D.
    GlobalPtr premature = parse_global("rec t. A->B:ping. t");
    CHECK(!trace_equiv(Executable{s}, Executable{premature}, 4, 1).equivalent);
}

TEST_CASE("the order of independent pairs does not matter") {
    for (const char* src : {"two_phase", "commit.cfsm", "remark_a2bc.cfsm", "buyer_seller.cfsm"}) {
        System s = std::string(src) == "two_phase" ? parse_system(two_phase) : load(src);
        GlobalPtr a = synthesize(s);
        GlobalPtr b = synthesize(s, {true, true});
        CHECK(trace_equiv(Executable{a}, Executable{b}, 8, 1).equivalent);
    }
    // With concurrency the reversed walk emits the pairs in the other order.
    GlobalPtr rev = synthesize(parse_system(two_phase), {true, true});
    CHECK(print(rev) == "rec t0. C->D:x. A->B:ping. t0");
}

TEST_CASE("synthesized types are well formed and canonical") {
    for (const char* f : {"commit.cfsm", "remark_a2bc.cfsm", "buyer_seller.cfsm"}) {
        System s = load(f);
        GlobalPtr g = synthesize(s);
        CHECK(well_formed(g).ok);
        CHECK(!has_unused_binder(g));
        // Idempotent up to bounded equivalence.
        GlobalPtr again = synthesize(system_of(g));
        CHECK(trace_equiv(Executable{g}, Executable{again}, 10, 1).equivalent);
        // The projections translated back are the same system.
        CHECK(verify_roundtrip(system_of(g), g, 8).ok);
    }
}

TEST_CASE("a mutated type is caught") {
    System s = load("commit.cfsm");
    GlobalPtr bad = parse_global("rec t. A->B:{act. B->C:sig. A->C:commit. t, quit. B->C:save. A->C:done. end}");
    auto rt = verify_roundtrip(s, bad, 10);
    CHECK(!rt.ok);
    REQUIRE(!rt.bounds.empty());
    CHECK(!rt.bounds[0].result.equivalent);
    CHECK(to_string(rt.bounds[0].result.counterexample) == "AB!quit·AC!done");
}
