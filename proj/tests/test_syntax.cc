#include "doctest.h"

#include "mpst/error.hh"
#include "mpst/syntax.hh"
#include "mpst/system.hh"
#include "util.hh"

using namespace mpst;

namespace {

const char* commit_text =
    "rec t. A->B:{act. B->C:{sig. A->C:commit. t}, quit. B->C:{save. A->C:finish. end}}";

} // namespace

TEST_CASE("parse end") {
    CHECK(parse_global("end")->is_end());
    CHECK(parse_local("end")->is_end());
    CHECK(print(parse_global("  end // trailing\n")) == "end");
}

TEST_CASE("commit global type structure") {
    GlobalPtr g = parse_global(commit_text);
    REQUIRE(g->kind == Global::Kind::rec);
    CHECK(g->var == "t");
    const Global& top = *g->body;
    REQUIRE(top.kind == Global::Kind::branch);
    CHECK(top.from == "A");
    CHECK(top.to == "B");
    REQUIRE(top.branches.size() == 2);
    CHECK(top.branches[0].label == "act");
    CHECK(top.branches[1].label == "quit");
    const Global& sig = *top.branches[0].cont;
    CHECK(sig.from == "B");
    CHECK(sig.to == "C");
    CHECK(sig.branches[0].label == "sig");
    CHECK(sig.branches[0].cont->branches[0].label == "commit");
    CHECK(sig.branches[0].cont->branches[0].cont->kind == Global::Kind::var);
    CHECK(participants(g) == std::set<Participant>{"A", "B", "C"});
    CHECK(alphabet(g) == std::set<Label>{"act", "commit", "finish", "quit", "save", "sig"});
}

TEST_CASE("canonical printing and round trip") {
    GlobalPtr g = parse_global(commit_text);
    CHECK(print(g) == "rec t. A->B:{act. B->C:sig. A->C:commit. t, quit. B->C:save. A->C:finish. end}");
    CHECK(equal(parse_global(print(g)), g));

    LocalPtr c = parse_local("rec t. B?{sig. A?{commit. t}, save. A?{finish. end}}");
    CHECK(print(c) == "rec t. B?{save. A?finish. end, sig. A?commit. t}");
    CHECK(equal(parse_local(print(c)), c));

    // Source order does not matter; printing sorts labels.
    CHECK(equal(parse_global("A->B:{b. end, a. end}"), parse_global("A->B:{a. end, b. end}")));
    CHECK(print(parse_local("B!{y. end, x. end}")) == "B!{x. end, y. end}");
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(parse_global("rec t. t"), ParseError);
    CHECK_THROWS_AS(parse_local("A!{x. t}"), ParseError);
    CHECK_THROWS_AS(parse_global("A->A:a. end"), ParseError);
    CHECK_THROWS_AS(parse_global("A->B:{a. end, a. end}"), ParseError);
    CHECK_THROWS_AS(parse_global("rec t. A->B:a. rec t. B->A:b. t"), ParseError);
    CHECK_THROWS_AS(parse_global("rec t. rec u. t"), ParseError);
    CHECK_THROWS_AS(parse_global("A->B:a. end trailing"), ParseError);
    CHECK_THROWS_AS(parse_global("A->B"), ParseError);
    CHECK_THROWS_AS(parse_global("A->B:a. $"), ParseError);
    try {
        parse_local("A!{x.\n   t}");
        FAIL("expected an error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 4);
        CHECK(std::string(e.what()).find("unbound") != std::string::npos);
    }
    try {
        parse_global("rec t. t");
        FAIL("expected an error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("unguarded") != std::string::npos);
    }
}

TEST_CASE("in-flight form is debug only") {
    CHECK_THROWS_AS(parse_global("A~>B:[a]{a. end}"), ParseError);
    GlobalPtr g = parse_global("A~>B:[b]{a. end, b. C->A:c. end}", {true});
    REQUIRE(g->mid.has_value());
    CHECK(g->branches[*g->mid].label == "b");
    CHECK(print(g) == "A~>B:[b]{a. end, b. C->A:c. end}");
    CHECK(equal(parse_global(print(g), {true}), g));
}

TEST_CASE("unfold") {
    CHECK(unfold(g_end()) == g_end());
    GlobalPtr r = parse_global("rec t. A->B:a. t");
    CHECK(print(unfold(r)) == "A->B:a. rec t. A->B:a. t");

    // Independent substitution oracle on the commit type: two unfoldings
    // expose two concrete layers before the recursion reappears.
    GlobalPtr g = parse_global(commit_text);
    GlobalPtr once = unfold(g);
    CHECK(once->kind == Global::Kind::branch);
    GlobalPtr layer2 = once->branches[0].cont->branches[0].cont->branches[0].cont;
    CHECK(equal(layer2, g));
    GlobalPtr twice = g_msg("A", "B", "x", unfold(layer2));
    CHECK(twice->branches[0].cont->kind == Global::Kind::branch);
    CHECK(print(once) ==
          "A->B:{act. B->C:sig. A->C:commit. " + print(g) + ", quit. B->C:save. A->C:finish. end}");
}

TEST_CASE("alpha equivalence and canonical renaming") {
    GlobalPtr a = parse_global("rec x. A->B:a. x");
    GlobalPtr b = parse_global("rec y. A->B:a. y");
    CHECK(!equal(a, b));
    CHECK(alpha_equal(a, b));
    CHECK(print(rename_canonical(a)) == "rec t0. A->B:a. t0");
    CHECK(!alpha_equal(parse_global("rec x. A->B:a. rec y. B->A:b. x"),
                       parse_global("rec x. A->B:a. rec y. B->A:b. y")));
}

TEST_CASE("guardedness and closedness checks on built terms") {
    CHECK_THROWS_AS(check_closed_guarded(g_rec("t", g_var("t"))), ValidationError);
    CHECK_THROWS_AS(check_closed_guarded(g_var("t")), ValidationError);
    CHECK_NOTHROW(check_closed_guarded(parse_global(commit_text)));
    CHECK_THROWS_AS(g_msg("A", "A", "x", g_end()), ValidationError);
    CHECK(free_vars(g_msg("A", "B", "x", g_var("u"))) == std::set<std::string>{"u"});
}

TEST_CASE("parse the commit system") {
    System s = parse_system(read_protocol("commit.cfsm"));
    REQUIRE(s.size() == 3);
    CHECK(s.participants() == std::vector<Participant>{"A", "B", "C"});
    CHECK(s.machine("A").num_states() == 4);
    CHECK(s.machine("C").edges().size() == 4);
    CHECK(s.channels().size() == 6);
    CHECK(s.alphabet() == std::vector<Label>{"act", "commit", "finish", "quit", "save", "sig"});
    const Machine& a = s.machine("A");
    CHECK(a.is_sending(a.initial()));
    CHECK(a.is_final(*a.find_state("q3")));
    // Printing is canonical and re-parses to the same system.
    CHECK(print(parse_system(print(s))) == print(s));
}

TEST_CASE("system validation") {
    System one = parse_system("machine A { init q0; }");
    CHECK(one.size() == 1);
    CHECK(one.machine(0).num_states() == 1);
    CHECK(one.channels().empty());

    CHECK_THROWS_AS(parse_system("machine A { init q0; q0 -- B A ! x --> q1; }\nmachine B { init p; }"),
                    ParseError);
    CHECK_THROWS_AS(parse_system("machine A { init q0; q0 -- A Z ! x --> q1; }"), ParseError);
    CHECK_THROWS_AS(parse_system("machine A { init q0; q5 -- A B ! x --> q6; }\nmachine B { init p; }"),
                    ParseError);
    CHECK_THROWS_AS(parse_system("machine A { init q0; state q9; }"), ParseError);
    CHECK_THROWS_AS(parse_system("machine A { q0 -- A B ! x --> q1; }\nmachine B { init p; }"), ParseError);
    CHECK_THROWS_AS(parse_system("machine A { init q0; }\nmachine A { init q0; }"), ParseError);
    CHECK_THROWS_AS(parse_system(""), ParseError);
    std::string crlf = "machine A {\r\n  init q0;\r\n}\r\n";
    CHECK_NOTHROW(parse_system(crlf));
}

TEST_CASE("basic machines") {
    System s = parse_system(read_protocol("commit.cfsm"));
    for (const auto& m : s.machines()) CHECK(is_basic(m).basic);

    System mixed = parse_system(
        "machine B { init q0; q0 -- B A ! a --> q1; q0 -- C B ? x --> q2; }\n"
        "machine A { init p; }\nmachine C { init r; }");
    auto r = is_basic(mixed.machine("B"));
    CHECK(!r.basic);
    CHECK(r.reasons.at(0).find("mixed") != std::string::npos);

    System undirected = parse_system(
        "machine A { init q0; q0 -- A B ! a --> q1; q0 -- A C ! b --> q2; }\n"
        "machine B { init p; }\nmachine C { init r; }");
    auto u = is_basic(undirected.machine("A"));
    CHECK(!u.basic);
    CHECK(u.reasons.at(0).find("directed") != std::string::npos);

    System nondet = parse_system(
        "machine A { init q0; q0 -- A B ! a --> q1; q0 -- A B ! a --> q2; }\nmachine B { init p; }");
    CHECK(!is_basic(nondet.machine("A")).basic);
    CHECK(!is_deterministic(nondet.machine("A")));
}

TEST_CASE("isomorphism up to renaming") {
    System s = parse_system(read_protocol("commit.cfsm"));
    System r = parse_system(
        "machine A { init s; s -- A B ! quit --> u; u -- A C ! finish --> v;"
        " s -- A B ! act --> w; w -- A C ! commit --> s; }\n"
        "machine B { init x; }\nmachine C { init y; }");
    CHECK(isomorphic(s.machine("A"), r.machine("A")));
    CHECK(!isomorphic(s.machine("A"), s.machine("B")));
}
