// Command-line front end. Results go to standard output (or -o), diagnostics
// to standard error. Exit codes: 0 positive verdict, 1 negative verdict,
// 2 usage or input error, 3 resource limit.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "mpst/cfsm.hh"
#include "mpst/compat.hh"
#include "mpst/dot.hh"
#include "mpst/error.hh"
#include "mpst/generalized.hh"
#include "mpst/projection.hh"
#include "mpst/report.hh"
#include "mpst/semantics.hh"
#include "mpst/synthesis.hh"
#include "mpst/syntax.hh"
#include "mpst/translate.hh"

using namespace mpst;

namespace {

constexpr int ok = 0, negative = 1, usage = 2, limit = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string extension(const std::string& path) {
    auto dot = path.rfind('.');
    return dot == std::string::npos ? "" : path.substr(dot + 1);
}

void expect_ext(const std::string& path, std::initializer_list<const char*> exts) {
    std::string e = extension(path);
    for (const char* x : exts)
        if (e == x) return;
    std::string want;
    for (const char* x : exts) want += (want.empty() ? "." : ", .") + std::string(x);
    throw UsageError(path + ": expected a " + want + " file");
}

class Output {
public:
    explicit Output(const std::string& path) : path_(path) {}
    std::ostream& stream() { return path_.empty() ? std::cout : buf_; }
    void flush() {
        if (path_.empty()) return;
        std::ofstream out(path_);
        if (!out) throw UsageError("cannot write " + path_);
        out << buf_.str();
    }

private:
    std::string path_;
    std::ostringstream buf_;
};

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// Deterministic walk: the first enabled action that keeps every channel
// within the bound.
void simulate(Lts& l, std::size_t steps, Bound k, std::ostream& out) {
    Lts::Id s = l.initial();
    std::map<Channel, unsigned> depth;
    out << "0 " << l.describe(s) << "\n";
    for (std::size_t i = 1; i <= steps; ++i) {
        const Lts::Succ& next = l.successors(s);
        const std::pair<Action, Lts::Id>* pick = nullptr;
        for (const auto& x : next) {
            Channel ch{x.first.from, x.first.to};
            if (x.first.is_send() && k != unbounded && depth[ch] >= k) continue;
            pick = &x;
            break;
        }
        if (!pick) {
            out << (l.is_final(s) ? "final\n" : next.empty() ? "stuck\n" : "blocked by the bound\n");
            return;
        }
        Channel ch{pick->first.from, pick->first.to};
        if (pick->first.is_send()) {
            ++depth[ch];
        } else {
            --depth[ch];
        }
        s = pick->second;
        out << i << " " << to_string(pick->first) << " " << l.describe(s) << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiparty session types and communicating machines"};
    app.set_version_flag("--version", "mpst 0.1.0");
    app.require_subcommand(1);
    std::size_t threads = 1;
    app.add_option("--threads", threads, "Worker threads for exploration")->check(CLI::PositiveNumber);

    std::string input, output, participant, owner, verify;
    bool json = false, liveness = false, as_dot = false, lax = false;
    Bound bound = 1;
    std::size_t steps = 20, reach_bound = 0, gverify = 0;

    auto* parse = app.add_subcommand("parse", "Validate a file and print it normalized");
    parse->add_option("file", input)->required();

    auto* project_cmd = app.add_subcommand("project", "Project a global type");
    project_cmd->add_option("file", input)->required();
    project_cmd->add_option("-p,--participant", participant, "Participant (all when omitted)");
    project_cmd->add_option("-o,--output", output);

    auto* wf = app.add_subcommand("wf", "Check that every projection is defined");
    wf->add_option("file", input)->required();
    wf->add_flag("--json", json);

    auto* translate = app.add_subcommand("translate", "Local type to machine, or machines to local types");
    translate->add_option("file", input)->required();
    translate->add_option("--owner", owner, "Owner of a local type");
    translate->add_option("-o,--output", output);

    auto* compat = app.add_subcommand("compat", "Multiparty compatibility");
    compat->add_option("file", input)->required();
    compat->add_flag("--json", json);
    compat->add_flag("--any-deterministic", lax, "Accept deterministic machines that are not basic");

    auto* synth = app.add_subcommand("synth", "Synthesize a global type");
    synth->add_option("file", input)->required();
    synth->add_option("-o,--output", output);
    synth->add_option("--verify", verify, "N,K: check bounded equivalence to length N for bounds 1..K");
    synth->add_flag("--json", json, "With --verify, print one JSON report that includes the type");

    auto* check = app.add_subcommand("check", "Safety and liveness within a buffer bound");
    check->add_option("file", input)->required();
    check->add_option("--bound", bound)->required();
    check->add_flag("--liveness", liveness);
    check->add_flag("--json", json);

    auto* sim = app.add_subcommand("simulate", "Deterministic run of a global type or system");
    sim->add_option("file", input)->required();
    sim->add_option("--steps", steps);
    sim->add_option("--bound", bound, "0 for no bound");

    auto* session = app.add_subcommand("session", "Session compatibility of a system");
    session->add_option("file", input)->required();
    session->add_flag("--json", json);

    auto* gproject_cmd = app.add_subcommand("gproject", "Project a general global type");
    gproject_cmd->add_option("file", input)->required();
    gproject_cmd->add_option("-p,--participant", participant);
    gproject_cmd->add_option("-o,--output", output);
    bool machines = false;
    gproject_cmd->add_flag("--machines", machines, "Print the projected machines as a system");

    auto* gsynth = app.add_subcommand("gsynth", "Synthesize a general global type");
    gsynth->add_option("file", input)->required();
    gsynth->add_option("-o,--output", output);
    gsynth->add_option("--verify", gverify, "N: check 1-bounded equivalence to length N");

    auto* petri = app.add_subcommand("petri", "Petri net of a general local type");
    petri->add_option("file", input)->required();
    petri->add_option("-p,--participant", participant, "Project a .ggt file first");
    petri->add_flag("--dot", as_dot);

    auto* dot = app.add_subcommand("dot", "Graphviz export");
    dot->add_option("file", input)->required();
    dot->add_option("-p,--participant", participant);
    dot->add_option("--owner", owner);
    dot->add_option("--reach", reach_bound, "Export the reachable configurations within this bound");
    dot->add_flag("--petri", as_dot, "Export the Petri net of a general local type");
    dot->add_option("-o,--output", output);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    try {
        Output out(output);
        std::ostream& os = out.stream();
        int code = ok;
        ReachOptions ro{threads};

        if (parse->parsed()) {
            std::string text = read_file(input), e = extension(input);
            if (e == "gt") os << print(parse_global(text)) << "\n";
            else if (e == "lt") os << print(parse_local(text)) << "\n";
            else if (e == "cfsm") os << print(parse_system(text));
            else if (e == "ggt") os << print(parse_general_global(text));
            else if (e == "glt") os << print(parse_general_local(text));
            else throw UsageError(input + ": unknown file type");
        } else if (project_cmd->parsed()) {
            expect_ext(input, {"gt"});
            GlobalPtr g = parse_global(read_file(input));
            if (!participant.empty()) {
                os << print(project(g, participant)) << "\n";
            } else {
                for (const auto& p : participants(g)) os << p << ": " << print(project(g, p)) << "\n";
            }
        } else if (wf->parsed()) {
            expect_ext(input, {"gt"});
            auto r = well_formed(parse_global(read_file(input)));
            if (json) {
                os << to_json(r).dump(2) << "\n";
            } else {
                os << (r.ok ? "well formed" : "not well formed") << "\n";
                for (const auto& [p, t] : r.projections) os << p << ": " << print(t) << "\n";
                for (const auto& [p, e] : r.errors) os << p << ": " << e << "\n";
            }
            code = r.ok ? ok : negative;
        } else if (translate->parsed()) {
            expect_ext(input, {"lt", "cfsm"});
            std::string text = read_file(input);
            if (extension(input) == "lt") {
                if (owner.empty()) throw UsageError("translate: --owner is required for a local type");
                os << print(to_machine(parse_local(text), owner));
            } else {
                System s = parse_system(text);
                for (const Machine& m : s.machines()) os << m.owner() << ": " << print(to_local(m)) << "\n";
            }
        } else if (compat->parsed()) {
            expect_ext(input, {"cfsm"});
            System s = parse_system(read_file(input));
            auto r = multiparty_compatible(s, CompatOptions{!lax, threads});
            if (json) {
                os << to_json(r).dump(2) << "\n";
            } else if (r.compatible) {
                os << "compatible (" << r.stable_states << " stable configurations)\n";
            } else {
                os << "not multiparty compatible\n";
                for (const auto& f : r.failures)
                    os << "  " << f.participant << ": " << to_string(f.action) << ": " << f.reason << "\n";
            }
            code = r.compatible ? ok : negative;
        } else if (synth->parsed()) {
            expect_ext(input, {"cfsm"});
            System s = parse_system(read_file(input));
            GlobalPtr g = synthesize(s);
            if (!verify.empty()) {
                auto parts = split_commas(verify);
                if (parts.size() != 2) throw UsageError("--verify expects N,K");
                std::size_t n = std::stoul(parts[0]);
                Bound kmax = Bound(std::stoul(parts[1]));
                std::vector<Bound> ks;
                for (Bound k = 1; k <= kmax; ++k) ks.push_back(k);
                auto r = verify_roundtrip(s, g, n, ks);
                if (json) {
                    Json j = to_json(r);
                    j["type"] = print(g);
                    os << j.dump(2) << "\n";
                    out.flush();
                    return r.ok ? ok : negative;
                } else {
                    for (const auto& b : r.bounds)
                        std::cerr << "k=" << b.k << ": "
                                  << (b.result.equivalent ? "equivalent" : "differs on " + to_string(b.result.counterexample))
                                  << "\n";
                }
                code = r.ok ? ok : negative;
            }
            os << print(g) << "\n";
        } else if (check->parsed()) {
            expect_ext(input, {"cfsm"});
            System s = parse_system(read_file(input));
            auto r = check_safety(s, bound, liveness, ro);
            if (json) {
                os << to_json(r).dump(2) << "\n";
            } else {
                os << (r.safe() ? "safe" : "unsafe") << " (" << r.configurations << " configurations, bound "
                   << r.bound << ")\n";
                if (liveness)
                    os << "liveness: " << (!r.liveness_checked ? "not checked (no final state)" : r.live ? "live" : "not live")
                       << "\n";
                for (const auto& v : r.violations)
                    os << "  " << v.kind << " at " << v.configuration << " after " << to_string(v.path) << "\n";
            }
            code = r.safe() ? ok : negative;
        } else if (sim->parsed()) {
            expect_ext(input, {"gt", "cfsm", "ggt"});
            std::string text = read_file(input), e = extension(input);
            std::unique_ptr<Lts> l;
            if (e == "gt") l = make_lts(Executable{parse_global(text)});
            else if (e == "cfsm") l = make_lts(Executable{parse_system(text)});
            else l = gglobal_lts(parse_general_global(text));
            simulate(*l, steps, bound, os);
        } else if (session->parsed()) {
            expect_ext(input, {"cfsm"});
            auto r = session_compatible(parse_system(read_file(input)));
            if (json) {
                os << to_json(r).dump(2) << "\n";
            } else {
                os << (r.ok() ? "session compatible" : "not session compatible") << "\n";
                for (const auto& f : r.failures) os << "  " << f << "\n";
            }
            code = r.ok() ? ok : negative;
        } else if (gproject_cmd->parsed()) {
            expect_ext(input, {"ggt"});
            GeneralGlobal g = parse_general_global(read_file(input));
            if (machines) {
                os << print(gsystem_of(g));
            } else if (!participant.empty()) {
                os << print(gproject(g, participant));
            } else {
                bool first = true;
                for (const auto& p : participants(g)) {
                    if (!first) os << "\n";
                    first = false;
                    os << print(gproject(g, p));
                }
            }
        } else if (gsynth->parsed()) {
            expect_ext(input, {"cfsm"});
            System s = parse_system(read_file(input));
            GeneralGlobal g = gsynthesize(s);
            if (gverify) {
                auto a = gglobal_lts(g);
                auto b = make_lts(Executable{s});
                auto r = trace_equiv(*a, *b, gverify, 1);
                std::cerr << "k=1: " << (r.equivalent ? "equivalent" : "differs on " + to_string(r.counterexample))
                          << "\n";
                code = r.equivalent ? ok : negative;
            }
            os << print(g);
        } else if (petri->parsed()) {
            expect_ext(input, {"glt", "ggt"});
            std::string text = read_file(input);
            GeneralLocal t;
            if (extension(input) == "ggt") {
                if (participant.empty()) throw UsageError("petri: -p is required for a general global type");
                t = gproject(parse_general_global(text), participant);
            } else {
                t = parse_general_local(text);
            }
            LabelledNet n = to_petri(t);
            if (as_dot) {
                os << to_dot(n);
            } else {
                auto ex = explore_markings(n);
                os << n.places.size() << " places, " << n.transitions.size() << " transitions, " << ex.markings
                   << " reachable markings, " << (ex.safe ? "safe" : "not safe") << "\n";
                for (std::size_t i = 0; i < n.transitions.size(); ++i) {
                    const auto& tr = n.transitions[i];
                    os << "  t" << i << " ";
                    for (std::size_t p : tr.in) os << n.places[p] << " ";
                    os << "-> ";
                    for (std::size_t p : tr.out) os << n.places[p] << " ";
                    os << (tr.label ? to_string(*tr.label) : "(silent)") << "\n";
                }
                code = ex.safe ? ok : negative;
            }
        } else if (dot->parsed()) {
            std::string text = read_file(input), e = extension(input);
            if (e == "cfsm") {
                System s = parse_system(text);
                if (reach_bound) os << to_dot(reach(s, Bound(reach_bound), ro), s);
                else os << to_dot(s);
            } else if (e == "gt") {
                os << to_dot(system_of(parse_global(text)));
            } else if (e == "lt") {
                if (owner.empty()) throw UsageError("dot: --owner is required for a local type");
                os << to_dot(to_machine(parse_local(text), owner));
            } else if (e == "ggt") {
                GeneralGlobal g = parse_general_global(text);
                if (participant.empty()) os << to_dot(g);
                else if (as_dot) os << to_dot(to_petri(gproject(g, participant)));
                else os << to_dot(gto_machine(gproject(g, participant)));
            } else if (e == "glt") {
                GeneralLocal t = parse_general_local(text);
                os << (as_dot ? to_dot(to_petri(t)) : to_dot(t));
            } else {
                throw UsageError(input + ": unknown file type");
            }
        }
        out.flush();
        return code;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const ParseError& e) {
        std::cerr << input << ":" << e.what() << "\n";
        return usage;
    } catch (const ValidationError& e) {
        std::cerr << input << ": " << e.what() << "\n";
        return usage;
    } catch (const ResourceLimit& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return limit;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return negative;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: bad number in arguments\n";
        return usage;
    }
}
