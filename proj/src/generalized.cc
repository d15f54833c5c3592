#include "mpst/generalized.hh"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <memory>
#include <unordered_map>

#include "lexer.hh"
#include "mpst/compat.hh"
#include "mpst/error.hh"

namespace mpst {

using detail::Cursor;
using detail::Tok;
using detail::Token;
using K = Equation::Kind;

std::vector<Var> Equation::inputs() const {
    switch (kind) {
    case K::join:
    case K::merge: return {x, y};
    default: return {x};
    }
}

std::vector<Var> Equation::outputs() const {
    switch (kind) {
    case K::msg:
    case K::send:
    case K::recv:
    case K::indirect: return {y};
    case K::fork:
    case K::choice:
    case K::ichoice:
    case K::echoice: return {y, z};
    case K::join:
    case K::merge: return {z};
    case K::end: return {};
    }
    return {};
}

namespace {

/// Equations keyed by the variables they consume.
class EqIndex {
public:
    explicit EqIndex(const std::vector<Equation>& eqs) : eqs_(&eqs) {
        for (std::size_t i = 0; i < eqs.size(); ++i)
            for (const Var& v : eqs[i].inputs()) def_.emplace(v, i);
    }

    const Equation* def(const Var& v) const {
        auto it = def_.find(v);
        return it == def_.end() ? nullptr : &(*eqs_)[it->second];
    }
    bool is_end(const Var& v) const {
        const Equation* e = def(v);
        return e && e->kind == K::end;
    }

private:
    const std::vector<Equation>* eqs_;
    std::map<Var, std::size_t> def_;
};

void validate(const std::vector<Equation>& eqs, const Var& init, const Participant* owner) {
    std::map<Var, int> consumed, produced;
    for (const Equation& e : eqs) {
        for (const Var& v : e.inputs())
            if (++consumed[v] > 1) throw ValidationError("variable " + v + " is defined twice");
        for (const Var& v : e.outputs())
            if (++produced[v] > 1) throw ValidationError("variable " + v + " is the continuation of two equations");
        if (e.kind == K::join && e.x == e.y) throw ValidationError("join of " + e.x + " with itself");
        if (e.kind == K::msg && e.from == e.to) throw ValidationError("self-message " + e.from + " -> " + e.to);
        if (owner && (e.kind == K::send || e.kind == K::recv) && (e.kind == K::send ? e.to : e.from) == *owner)
            throw ValidationError("participant " + *owner + " talks to itself at " + e.x);
    }
    for (const auto& [v, n] : produced)
        if (!consumed.count(v)) throw ValidationError("variable " + v + " is used but never defined");
    if (!consumed.count(init)) throw ValidationError("init variable " + init + " is not defined");
}

bool at_binary_op(const Cursor& cur) {
    return cur.at(Tok::plus) || cur.at(Tok::oplus) || cur.at(Tok::amp) || cur.at(Tok::bar);
}

std::vector<Equation> parse_equations(Cursor& cur, bool global, Var& init) {
    std::vector<Equation> eqs;
    bool has_init = false;
    while (!cur.at(Tok::eof)) {
        if (cur.at_ident("init") && cur.peek(1).kind == Tok::ident) {
            const Token kw = cur.next();
            if (has_init) Cursor::fail_at(kw, "duplicate init");
            has_init = true;
            init = cur.ident();
            cur.expect(Tok::semi);
            continue;
        }
        Equation e;
        const Token head = cur.expect(Tok::ident);
        e.x = head.text;
        if (cur.at(Tok::plus) || cur.at(Tok::bar)) {
            e.kind = cur.next().kind == Tok::plus ? K::merge : K::join;
            e.y = cur.ident();
            if (at_binary_op(cur)) cur.fail("only binary forms are allowed; write a cascade");
            cur.expect(Tok::eq);
            e.z = cur.ident();
            cur.expect(Tok::semi);
            eqs.push_back(std::move(e));
            continue;
        }
        cur.expect(Tok::eq);
        if (cur.at_ident("end") && cur.peek(1).kind == Tok::semi) {
            cur.next();
            cur.next();
            e.kind = K::end;
            eqs.push_back(std::move(e));
            continue;
        }
        const Token first = cur.expect(Tok::ident);
        if (cur.at(Tok::arrow)) {
            if (!global) cur.fail("local messages are written 'p ! a' or 'p ? a'");
            cur.next();
            e.kind = K::msg;
            e.from = first.text;
            e.to = cur.ident();
            cur.expect(Tok::colon);
            e.label = cur.ident();
            cur.expect(Tok::semi);
            e.y = cur.ident();
        } else if (cur.at(Tok::bang) || cur.at(Tok::query)) {
            if (global) cur.fail("expected '->' in a global message");
            e.kind = cur.next().kind == Tok::bang ? K::send : K::recv;
            (e.kind == K::send ? e.to : e.from) = first.text;
            e.label = cur.ident();
            cur.expect(Tok::semi);
            e.y = cur.ident();
        } else {
            e.y = first.text;
            if (!cur.at(Tok::semi)) {
                const Token op = cur.next();
                switch (op.kind) {
                case Tok::bar: e.kind = K::fork; break;
                case Tok::plus:
                    if (!global) Cursor::fail_at(op, "local choices are written '(+)' or '&'");
                    e.kind = K::choice;
                    break;
                case Tok::oplus:
                case Tok::amp:
                    if (global) Cursor::fail_at(op, "global choices are written '+'");
                    e.kind = op.kind == Tok::oplus ? K::ichoice : K::echoice;
                    break;
                default: Cursor::fail_at(op, "expected ';', '|' or a choice operator");
                }
                e.z = cur.ident();
                if (at_binary_op(cur)) cur.fail("only binary forms are allowed; write a cascade");
            } else {
                e.kind = K::indirect;
            }
        }
        cur.expect(Tok::semi);
        eqs.push_back(std::move(e));
    }
    if (!has_init) throw ValidationError("missing init");
    return eqs;
}

std::string print_eq(const Equation& e) {
    switch (e.kind) {
    case K::msg: return e.x + " = " + e.from + " -> " + e.to + " : " + e.label + "; " + e.y + ";";
    case K::send: return e.x + " = " + e.to + " ! " + e.label + "; " + e.y + ";";
    case K::recv: return e.x + " = " + e.from + " ? " + e.label + "; " + e.y + ";";
    case K::fork: return e.x + " = " + e.y + " | " + e.z + ";";
    case K::join: return e.x + " | " + e.y + " = " + e.z + ";";
    case K::choice: return e.x + " = " + e.y + " + " + e.z + ";";
    case K::ichoice: return e.x + " = " + e.y + " (+) " + e.z + ";";
    case K::echoice: return e.x + " = " + e.y + " & " + e.z + ";";
    case K::merge: return e.x + " + " + e.y + " = " + e.z + ";";
    case K::indirect: return e.x + " = " + e.y + ";";
    case K::end: return e.x + " = end;";
    }
    return {};
}

Equation eq_msg(Var x, Participant p, Participant q, Label a, Var y) {
    Equation e;
    e.kind = K::msg;
    e.x = std::move(x);
    e.from = std::move(p);
    e.to = std::move(q);
    e.label = std::move(a);
    e.y = std::move(y);
    return e;
}

Equation eq_bin(K k, Var x, Var y, Var z) {
    Equation e;
    e.kind = k;
    e.x = std::move(x);
    e.y = std::move(y);
    e.z = std::move(z);
    return e;
}

} // namespace

GeneralGlobal parse_general_global(std::string_view text) {
    Cursor cur(detail::lex(text));
    GeneralGlobal g;
    g.eqs = parse_equations(cur, true, g.init);
    validate(g.eqs, g.init, nullptr);
    return g;
}

GeneralLocal parse_general_local(std::string_view text) {
    Cursor cur(detail::lex(text));
    GeneralLocal t;
    cur.expect_word("role");
    t.owner = cur.ident();
    cur.expect(Tok::semi);
    t.eqs = parse_equations(cur, false, t.init);
    validate(t.eqs, t.init, &t.owner);
    return t;
}

std::string print(const GeneralGlobal& g) {
    std::string out;
    for (const Equation& e : g.eqs) out += print_eq(e) + "\n";
    return out + "init " + g.init + ";\n";
}

std::string print(const GeneralLocal& t) {
    std::string out = "role " + t.owner + ";\n";
    for (const Equation& e : t.eqs) out += print_eq(e) + "\n";
    return out + "init " + t.init + ";\n";
}

std::set<Participant> participants(const GeneralGlobal& g) {
    std::set<Participant> out;
    for (const Equation& e : g.eqs)
        if (e.kind == K::msg) {
            out.insert(e.from);
            out.insert(e.to);
        }
    return out;
}

std::set<Var> variables(const std::vector<Equation>& eqs) {
    std::set<Var> out;
    for (const Equation& e : eqs) {
        for (const Var& v : e.inputs()) out.insert(v);
        for (const Var& v : e.outputs()) out.insert(v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parallel states and the state equivalence.

ParState::ParState(std::vector<Var> v) : vars(std::move(v)) { std::sort(vars.begin(), vars.end()); }

std::string to_string(const ParState& x) {
    std::string out;
    for (const Var& v : x.vars) {
        if (!out.empty()) out += "|";
        out += v;
    }
    return out;
}

namespace {

ParState replace(const ParState& x, std::size_t i, std::initializer_list<Var> with) {
    std::vector<Var> v = x.vars;
    v.erase(v.begin() + i);
    v.insert(v.end(), with);
    return ParState(std::move(v));
}

void check_cap(const ParState& x, std::size_t cap) {
    if (x.vars.size() > cap)
        throw ResourceLimit("parallel state " + to_string(x) + " exceeds " + std::to_string(cap) + " threads");
}

/// One silent step. `p` (when set) may also cross messages it is not part of.
std::vector<ParState> expand(const ParState& x, const EqIndex& ix, const Participant* p) {
    std::vector<ParState> out;
    for (std::size_t i = 0; i < x.vars.size(); ++i) {
        if (i > 0 && x.vars[i] == x.vars[i - 1]) continue;
        const Var& v = x.vars[i];
        const Equation* e = ix.def(v);
        if (!e) continue;
        switch (e->kind) {
        case K::indirect: out.push_back(replace(x, i, {e->y})); break;
        case K::fork: out.push_back(replace(x, i, {e->y, e->z})); break;
        case K::choice:
        case K::ichoice:
        case K::echoice:
            out.push_back(replace(x, i, {e->y}));
            out.push_back(replace(x, i, {e->z}));
            break;
        case K::merge: out.push_back(replace(x, i, {e->z})); break;
        case K::join: {
            if (v != e->x) break;  // fire once, from the left input
            auto it = std::find(x.vars.begin(), x.vars.end(), e->y);
            if (it == x.vars.end()) break;
            std::vector<Var> rest = x.vars;
            rest.erase(rest.begin() + (it - x.vars.begin()));
            rest.erase(std::find(rest.begin(), rest.end(), v));
            rest.push_back(e->z);
            out.emplace_back(std::move(rest));
            break;
        }
        case K::msg:
            if (p && e->from != *p && e->to != *p) out.push_back(replace(x, i, {e->y}));
            break;
        default: break;
        }
    }
    return out;
}

std::set<ParState> closure(const ParState& x, const EqIndex& ix, const Participant* p, std::size_t cap) {
    std::set<ParState> seen{x};
    std::deque<ParState> todo{x};
    while (!todo.empty()) {
        ParState cur = std::move(todo.front());
        todo.pop_front();
        for (ParState& y : expand(cur, ix, p)) {
            check_cap(y, cap);
            if (seen.size() >= node_cap()) throw_node_cap(node_cap());
            if (seen.insert(y).second) todo.push_back(std::move(y));
        }
    }
    return seen;
}

bool all_end(const ParState& x, const EqIndex& ix) {
    return std::all_of(x.vars.begin(), x.vars.end(), [&](const Var& v) { return ix.is_end(v); });
}

} // namespace

std::set<ParState> gequiv_expand(const ParState& x, const std::vector<Equation>& eqs) {
    EqIndex ix(eqs);
    auto v = expand(x, ix, nullptr);
    return {v.begin(), v.end()};
}

// ---------------------------------------------------------------------------
// Projection.

std::set<Participant> active_senders(const GeneralGlobal& g, const Var& x) {
    EqIndex ix(g.eqs);
    std::set<Participant> out;
    std::set<Var> seen;
    std::deque<Var> todo{x};
    while (!todo.empty()) {
        Var v = todo.front();
        todo.pop_front();
        if (!seen.insert(v).second) continue;
        const Equation* e = ix.def(v);
        if (!e) continue;
        if (e->kind == K::msg) {
            out.insert(e->from);
            continue;
        }
        for (const Var& w : e->outputs()) todo.push_back(w);
    }
    return out;
}

GeneralLocal gproject(const GeneralGlobal& g, const Participant& p) {
    GeneralLocal t;
    t.owner = p;
    t.init = g.init;
    for (const Equation& e : g.eqs) {
        Equation l = e;
        switch (e.kind) {
        case K::msg:
            if (e.from == p) {
                l.kind = K::send;
                l.from.clear();
            } else if (e.to == p) {
                l.kind = K::recv;
                l.to.clear();
            } else {
                l = Equation{};
                l.kind = K::indirect;
                l.x = e.x;
                l.y = e.y;
            }
            break;
        case K::choice: {
            auto senders = active_senders(g, e.x);
            if (senders.size() != 1) {
                std::string who;
                for (const auto& s : senders) who += (who.empty() ? "" : ", ") + s;
                throw ChoiceOwnership("choice at " + e.x + " has active senders {" + who +
                                      "}; exactly one participant must decide");
            }
            l.kind = *senders.begin() == p ? K::ichoice : K::echoice;
            break;
        }
        default: break;
        }
        t.eqs.push_back(std::move(l));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Global and local transition systems.

std::string to_string(const GState& s) {
    std::string out;
    for (const auto& [p, x] : s.parts) out += (out.empty() ? "" : " ") + p + "=" + to_string(x);
    for (const auto& [ch, w] : s.buffers) {
        out += " " + ch.first + ch.second + "=";
        for (std::size_t i = 0; i < w.size(); ++i) out += (i ? "." : "") + w[i];
    }
    return out;
}

GState ginitial(const GeneralGlobal& g) {
    GState s;
    for (const auto& p : participants(g)) s.parts[p] = ParState({g.init});
    return s;
}

GState ginitial(const std::map<Participant, GeneralLocal>& ts) {
    GState s;
    for (const auto& [p, t] : ts) s.parts[p] = ParState({t.init});
    return s;
}

namespace {

struct Move {
    Action act;
    Var next;
};

// Visible moves for p from a hole variable v.
std::optional<Move> global_move(const Participant& p, const Equation& e) {
    if (e.kind != K::msg) return std::nullopt;
    if (e.from == p) return Move{send(p, e.to, e.label), e.y};
    if (e.to == p) return Move{receive(e.from, p, e.label), e.y};
    return std::nullopt;
}

std::optional<Move> local_move(const Participant& p, const Equation& e) {
    if (e.kind == K::send) return Move{send(p, e.to, e.label), e.y};
    if (e.kind == K::recv) return Move{receive(e.from, p, e.label), e.y};
    return std::nullopt;
}

template <class MoveFn>
std::vector<std::pair<Action, GState>> step(const GState& s, const std::map<Participant, EqIndex>& ix,
                                            bool crossing, std::size_t cap, MoveFn move) {
    std::vector<std::pair<Action, GState>> out;
    for (const auto& [p, x] : s.parts) {
        const EqIndex& eqs = ix.at(p);
        for (const ParState& y : closure(x, eqs, crossing ? &p : nullptr, cap)) {
            for (std::size_t i = 0; i < y.vars.size(); ++i) {
                const Equation* e = eqs.def(y.vars[i]);
                if (!e) continue;
                auto m = move(p, *e);
                if (!m) continue;
                GState t = s;
                Channel ch{m->act.from, m->act.to};
                if (m->act.is_send()) {
                    t.buffers[ch].push_back(m->act.msg);
                } else {
                    auto it = t.buffers.find(ch);
                    if (it == t.buffers.end() || it->second.front() != m->act.msg) continue;
                    it->second.erase(it->second.begin());
                    if (it->second.empty()) t.buffers.erase(it);
                }
                t.parts[p] = replace(y, i, {m->next});
                out.emplace_back(m->act, std::move(t));
            }
        }
    }
    return out;
}

bool gfinal(const GState& s, const std::map<Participant, EqIndex>& ix, bool crossing, std::size_t cap) {
    if (!s.buffers.empty()) return false;
    for (const auto& [p, x] : s.parts) {
        auto c = closure(x, ix.at(p), crossing ? &p : nullptr, cap);
        if (std::none_of(c.begin(), c.end(), [&](const ParState& y) { return all_end(y, ix.at(p)); }))
            return false;
    }
    return true;
}

std::map<Participant, EqIndex> index_global(const GeneralGlobal& g) {
    std::map<Participant, EqIndex> ix;
    for (const auto& p : participants(g)) ix.emplace(p, EqIndex(g.eqs));
    return ix;
}

std::map<Participant, EqIndex> index_local(const std::map<Participant, GeneralLocal>& ts) {
    std::map<Participant, EqIndex> ix;
    for (const auto& [p, t] : ts) ix.emplace(p, EqIndex(t.eqs));
    return ix;
}

} // namespace

std::vector<std::pair<Action, GState>> gstep_global(const GState& s, const GeneralGlobal& g, std::size_t fork_cap) {
    return step(s, index_global(g), true, fork_cap, global_move);
}

std::vector<std::pair<Action, GState>> gstep_local_system(const GState& s,
                                                          const std::map<Participant, GeneralLocal>& ts,
                                                          std::size_t fork_cap) {
    return step(s, index_local(ts), false, fork_cap, local_move);
}

namespace {

// Each participant holds the set of its silently reachable states, so
// equivalent rewritings of one position are a single LTS state.
struct SetState {
    std::map<Participant, std::set<ParState>> parts;
    std::map<Channel, std::vector<Label>> buffers;
};

std::string key(const SetState& s) {
    std::string out;
    for (const auto& [p, xs] : s.parts) {
        out += p + "={";
        for (const auto& x : xs) out += to_string(x) + ",";
        out += "} ";
    }
    for (const auto& [ch, w] : s.buffers) {
        out += ch.first + "," + ch.second + "=";
        for (const auto& l : w) out += l + ".";
        out += " ";
    }
    return out;
}

template <class MoveFn>
std::unique_ptr<Lts> set_lts(std::map<Participant, EqIndex> ix0, std::map<Participant, Var> init, bool crossing,
                             MoveFn move, std::shared_ptr<const void> keep) {
    auto ix = std::make_shared<std::map<Participant, EqIndex>>(std::move(ix0));
    using Memo = std::map<std::pair<Participant, ParState>, std::set<ParState>>;
    auto memo = std::make_shared<Memo>();
    auto close = [ix, crossing, memo](const Participant& p, const ParState& x) -> const std::set<ParState>& {
        auto k = std::make_pair(p, x);
        auto it = memo->find(k);
        if (it == memo->end())
            it = memo->emplace(std::move(k), closure(x, ix->at(p), crossing ? &p : nullptr, default_fork_cap)).first;
        return it->second;
    };
    SetState s0;
    for (const auto& [p, v] : init) s0.parts[p] = close(p, ParState({v}));
    auto next = [ix, close, move, keep](const SetState& s) {
        std::vector<std::pair<Action, SetState>> out;
        for (const auto& [p, xs] : s.parts) {
            const EqIndex& eqs = ix->at(p);
            std::map<Action, std::set<ParState>> succ;
            for (const ParState& y : xs)
                for (std::size_t i = 0; i < y.vars.size(); ++i) {
                    const Equation* e = eqs.def(y.vars[i]);
                    if (!e) continue;
                    auto m = move(p, *e);
                    if (!m) continue;
                    if (m->act.is_receive()) {
                        auto it = s.buffers.find({m->act.from, m->act.to});
                        if (it == s.buffers.end() || it->second.front() != m->act.msg) continue;
                    }
                    const auto& c = close(p, replace(y, i, {m->next}));
                    succ[m->act].insert(c.begin(), c.end());
                }
            for (auto& [a, ys] : succ) {
                SetState t = s;
                Channel ch{a.from, a.to};
                if (a.is_send()) {
                    t.buffers[ch].push_back(a.msg);
                } else {
                    auto& w = t.buffers[ch];
                    w.erase(w.begin());
                    if (w.empty()) t.buffers.erase(ch);
                }
                t.parts[p] = std::move(ys);
                out.emplace_back(a, std::move(t));
            }
        }
        return out;
    };
    auto fin = [ix](const SetState& s) {
        if (!s.buffers.empty()) return false;
        for (const auto& [p, xs] : s.parts)
            if (std::none_of(xs.begin(), xs.end(), [&](const ParState& y) { return all_end(y, ix->at(p)); }))
                return false;
        return true;
    };
    return std::make_unique<InternedLts<SetState>>(std::move(s0), next, key, fin);
}

} // namespace

std::unique_ptr<Lts> gglobal_lts(const GeneralGlobal& g) {
    auto keep = std::make_shared<const GeneralGlobal>(g);
    std::map<Participant, Var> init;
    for (const auto& p : participants(*keep)) init[p] = keep->init;
    return set_lts(index_global(*keep), init, true, global_move, keep);
}

std::unique_ptr<Lts> glocal_lts(const std::map<Participant, GeneralLocal>& ts) {
    auto keep = std::make_shared<const std::map<Participant, GeneralLocal>>(ts);
    std::map<Participant, Var> init;
    for (const auto& [p, t] : *keep) init[p] = t.init;
    return set_lts(index_local(*keep), init, false, local_move, keep);
}

std::unique_ptr<Lts> gglobal_rule_lts(const GeneralGlobal& g) {
    auto keep = std::make_shared<const GeneralGlobal>(g);
    auto ix = std::make_shared<std::map<Participant, EqIndex>>(index_global(*keep));
    return std::make_unique<InternedLts<GState>>(
        ginitial(*keep),
        [keep, ix](const GState& s) { return step(s, *ix, true, default_fork_cap, global_move); },
        [](const GState& s) { return to_string(s); },
        [keep, ix](const GState& s) { return gfinal(s, *ix, true, default_fork_cap); });
}

// ---------------------------------------------------------------------------
// Machines and nets.

Machine gto_machine(const GeneralLocal& t, std::size_t fork_cap) {
    EqIndex ix(t.eqs);
    using Set = std::set<ParState>;
    Machine m(t.owner);
    std::map<Set, StateId> ids;
    std::deque<Set> todo;
    auto intern = [&](Set s) {
        auto it = ids.find(s);
        if (it != ids.end()) return it->second;
        if (ids.size() >= node_cap()) throw_node_cap(node_cap());
        StateId q = m.add_state("q" + std::to_string(ids.size()));
        ids.emplace(s, q);
        todo.push_back(std::move(s));
        return q;
    };
    m.set_initial(intern(closure(ParState({t.init}), ix, nullptr, fork_cap)));
    while (!todo.empty()) {
        Set cur = std::move(todo.front());
        todo.pop_front();
        StateId src = ids.at(cur);
        std::map<Action, Set> succ;
        for (const ParState& x : cur)
            for (std::size_t i = 0; i < x.vars.size(); ++i) {
                const Equation* e = ix.def(x.vars[i]);
                if (!e) continue;
                auto mv = local_move(t.owner, *e);
                if (!mv) continue;
                Set c = closure(replace(x, i, {mv->next}), ix, nullptr, fork_cap);
                succ[mv->act].insert(c.begin(), c.end());
            }
        for (auto& [a, s] : succ) {
            StateId dst = intern(std::move(s));
            m.add_edge(src, a, dst);
        }
    }
    return m;
}

System gsystem_of(const GeneralGlobal& g) {
    std::vector<Machine> ms;
    for (const auto& p : participants(g)) ms.push_back(gto_machine(gproject(g, p)));
    return System(std::move(ms));
}

std::size_t LabelledNet::place(const Var& v) const {
    auto it = std::find(places.begin(), places.end(), v);
    if (it == places.end()) throw ValidationError("no place " + v);
    return std::size_t(it - places.begin());
}

LabelledNet to_petri(const GeneralLocal& t) {
    LabelledNet n;
    std::map<Var, std::size_t> ix;
    auto pl = [&](const Var& v) {
        auto [it, fresh] = ix.emplace(v, n.places.size());
        if (fresh) n.places.push_back(v);
        return it->second;
    };
    pl(t.init);
    for (const Equation& e : t.eqs) {
        for (const Var& v : e.inputs()) pl(v);
        for (const Var& v : e.outputs()) pl(v);
    }
    auto tr = [&](std::vector<std::size_t> in, std::vector<std::size_t> out, std::optional<Action> a) {
        n.transitions.push_back({std::move(in), std::move(out), std::move(a)});
    };
    for (const Equation& e : t.eqs) {
        switch (e.kind) {
        case K::send:
        case K::recv: tr({pl(e.x)}, {pl(e.y)}, local_move(t.owner, e)->act); break;
        case K::fork: tr({pl(e.x)}, {pl(e.y), pl(e.z)}, std::nullopt); break;
        case K::join: tr({pl(e.x), pl(e.y)}, {pl(e.z)}, std::nullopt); break;
        case K::choice:
        case K::ichoice:
        case K::echoice:
            tr({pl(e.x)}, {pl(e.y)}, std::nullopt);
            tr({pl(e.x)}, {pl(e.z)}, std::nullopt);
            break;
        case K::merge:
            tr({pl(e.x)}, {pl(e.z)}, std::nullopt);
            tr({pl(e.y)}, {pl(e.z)}, std::nullopt);
            break;
        case K::indirect: tr({pl(e.x)}, {pl(e.y)}, std::nullopt); break;
        case K::msg:
        case K::end: break;
        }
    }
    n.initial.assign(n.places.size(), 0);
    n.initial[pl(t.init)] = 1;
    return n;
}

NetExploration explore_markings(const LabelledNet& n) {
    using Marking = std::vector<unsigned>;
    NetExploration r;
    std::set<Marking> seen{n.initial};
    std::deque<Marking> todo{n.initial};
    while (!todo.empty()) {
        Marking m = std::move(todo.front());
        todo.pop_front();
        if (r.safe && std::any_of(m.begin(), m.end(), [](unsigned k) { return k > 1; })) {
            r.safe = false;
            r.unsafe_marking = m;
        }
        for (const auto& t : n.transitions) {
            Marking next = m;
            bool enabled = true;
            for (std::size_t p : t.in) {
                if (next[p] == 0) {
                    enabled = false;
                    break;
                }
                --next[p];
            }
            if (!enabled) continue;
            for (std::size_t p : t.out) ++next[p];
            if (!seen.count(next)) {
                if (seen.size() >= node_cap()) throw_node_cap(node_cap());
                seen.insert(next);
                todo.push_back(std::move(next));
            }
        }
    }
    r.markings = seen.size();
    return r;
}

// ---------------------------------------------------------------------------
// Session compatibility.

MixedReport mixed_parallel(const Machine& m) {
    const auto& E = m.edges();
    for (StateId q = 0; q < m.num_states(); ++q) {
        if (!m.is_mixed(q)) continue;
        for (std::size_t i : m.out(q)) {
            if (!E[i].act.is_send()) continue;
            for (std::size_t j : m.out(q)) {
                if (!E[j].act.is_receive()) continue;
                auto a = m.step(E[i].dst, E[j].act);
                auto b = m.step(E[j].dst, E[i].act);
                if (!a || !b || *a != *b) {
                    MixedReport r;
                    r.ok = false;
                    r.offending = q;
                    r.reason = "state " + m.name(q) + " of " + m.owner() + ": " + to_string(E[i].act) + " and " +
                               to_string(E[j].act) + " do not commute";
                    return r;
                }
            }
        }
    }
    return {};
}

std::set<Participant> receivers(const Trace& phi) {
    std::set<Participant> out;
    for (const Action& a : phi)
        if (a.is_receive()) out.insert(a.to);
    return out;
}

std::set<Participant> active_senders(const Trace& phi) {
    std::set<Participant> out, received;
    for (const Action& a : phi) {
        if (a.is_receive()) {
            received.insert(a.to);
        } else if (!received.count(a.from)) {
            out.insert(a.from);
        }
    }
    return out;
}

namespace {

std::string names(const std::set<Participant>& ps) {
    std::string out = "{";
    for (const auto& p : ps) out += (out.size() > 1 ? ", " : "") + p;
    return out + "}";
}

void require_compatible(const System& s) {
    auto r = multiparty_compatible(s, CompatOptions{false, 1});
    if (!r.compatible) throw NotCompatible("system is not multiparty compatible");
}

/// Receivers on every 1-bounded continuation from each configuration.
class ReceiverSets {
public:
    explicit ReceiverSets(const ReachSet& rs) : rs_(rs) {}

    const std::set<Participant>& at(std::uint32_t c) {
        auto it = memo_.find(c);
        if (it != memo_.end()) return it->second;
        std::set<Participant> out;
        std::vector<bool> seen(rs_.size(), false);
        std::deque<std::uint32_t> todo{c};
        seen[c] = true;
        while (!todo.empty()) {
            std::uint32_t u = todo.front();
            todo.pop_front();
            for (std::size_t a : rs_.out[u]) {
                const auto& arc = rs_.arcs[a];
                if (arc.act.is_receive()) out.insert(arc.act.to);
                if (!seen[arc.dst]) {
                    seen[arc.dst] = true;
                    todo.push_back(arc.dst);
                }
            }
        }
        return memo_.emplace(c, std::move(out)).first->second;
    }

private:
    const ReachSet& rs_;
    std::map<std::uint32_t, std::set<Participant>> memo_;
};

// Greedy chain back from the last action, skipping the owner's earlier actions.
std::set<Participant> chain_senders(const Trace& phi, const Participant& owner) {
    std::size_t last = phi.size() - 1;
    std::vector<std::size_t> chain{last};
    for (std::size_t k = last; k-- > 0;) {
        if (phi[k].subject() == owner) continue;
        if (std::any_of(chain.begin(), chain.end(), [&](std::size_t i) { return depends(phi, k, i); }))
            chain.push_back(k);
    }
    std::sort(chain.begin(), chain.end());
    Trace sub;
    for (std::size_t i : chain) sub.push_back(phi[i]);
    return active_senders(sub);
}

} // namespace

ChoiceReport receiver_property(const System& s, bool checked) {
    if (!checked) require_compatible(s);
    ReachSet rs = reach(s, 1);
    ReceiverSets rcv(rs);
    for (std::uint32_t c = 0; c < rs.size(); ++c) {
        const auto& out = rs.out[c];
        for (std::size_t i = 0; i < out.size(); ++i) {
            const auto& a = rs.arcs[out[i]];
            if (!a.act.is_send()) continue;
            for (std::size_t j = i + 1; j < out.size(); ++j) {
                const auto& b = rs.arcs[out[j]];
                if (!b.act.is_send() || b.act.from != a.act.from) continue;
                const auto ra = rcv.at(a.dst);
                const auto& rb = rcv.at(b.dst);
                if (ra != rb) {
                    return {false, to_string(rs.configs[c], s) + ": " + to_string(a.act) + " reaches receivers " +
                                       names(ra) + " but " + to_string(b.act) + " reaches " + names(rb)};
                }
            }
        }
    }
    return {};
}

ChoiceReport unique_sender(const System& s, bool checked) {
    if (!checked) require_compatible(s);
    ReachSet rs = reach(s, 1);
    for (std::size_t mi = 0; mi < s.size(); ++mi) {
        const Machine& m = s.machine(mi);
        const auto& E = m.edges();
        for (StateId q = 0; q < m.num_states(); ++q) {
            for (std::size_t i : m.out(q))
                for (std::size_t j : m.out(q)) {
                    if (i >= j) continue;
                    const Action& a = E[i].act;
                    const Action& b = E[j].act;
                    if (!a.is_receive() || !b.is_receive() || a.msg == b.msg) continue;
                    auto ab = m.step(E[i].dst, b);
                    auto ba = m.step(E[j].dst, a);
                    if (ab && ba && *ab == *ba) continue;  // they commute
                    // Chains from every 1-bounded execution enabling each receive.
                    std::set<std::set<Participant>> seen;
                    std::optional<Trace> example;
                    for (std::uint32_t c = 0; c < rs.size(); ++c) {
                        if (rs.configs[c].control[mi] != q) continue;
                        for (std::size_t arc : rs.out[c]) {
                            const Action& x = rs.arcs[arc].act;
                            if (x != a && x != b) continue;
                            Trace phi = rs.path_to(c);
                            phi.push_back(x);
                            auto snd = chain_senders(phi, m.owner());
                            if (snd.size() != 1 || (!seen.empty() && !seen.count(snd))) {
                                return {false, m.owner() + " at " + m.name(q) + ": " + to_string(a) + " / " +
                                                   to_string(b) + " has causal chain " + to_string(phi) +
                                                   " with active senders " + names(snd)};
                            }
                            seen.insert(snd);
                        }
                    }
                }
        }
    }
    return {};
}

SessionReport session_compatible(const System& s) {
    SessionReport r;
    for (const Machine& m : s.machines())
        if (!is_deterministic(m)) {
            r.deterministic = false;
            r.failures.push_back("machine " + m.owner() + " is not deterministic");
        }
    if (r.deterministic) {
        auto c = multiparty_compatible(s, CompatOptions{false, 1});
        if (!c.compatible) {
            r.compatible = false;
            r.failures.push_back("not multiparty compatible: " + c.failures.front().reason);
        }
    } else {
        r.compatible = false;
        r.failures.push_back("multiparty compatibility not checked: machines must be deterministic");
    }
    for (const Machine& m : s.machines()) {
        auto mp = mixed_parallel(m);
        if (!mp.ok) {
            r.mixed_parallel = false;
            r.failures.push_back("not mixed parallel: " + mp.reason);
        }
    }
    if (r.deterministic) {
        auto u = unique_sender(s, true);
        if (!u.ok) {
            r.unique_sender = false;
            r.failures.push_back("unique sender: " + u.witness);
        }
        auto v = receiver_property(s, true);
        if (!v.ok) {
            r.receiver = false;
            r.failures.push_back("receiver property: " + v.witness);
        }
    } else {
        r.unique_sender = r.receiver = false;
        r.failures.push_back("choice conditions not checked: machines must be deterministic");
    }
    return r;
}

GeneralGlobal gsynthesize(const System& s) {
    SessionReport sr = session_compatible(s);
    if (!sr.ok()) {
        std::string why;
        for (const auto& f : sr.failures) why += (why.empty() ? "" : "; ") + f;
        throw NotSessionCompatible("not session compatible: " + why);
    }
    // Fused LTS: stable configurations joined by send/receive pairs.
    struct FEdge {
        Action send;
        std::size_t dst;
    };
    std::vector<Configuration> nodes{initial(s)};
    std::unordered_map<Configuration, std::size_t, ConfigHash> ids{{nodes[0], 0}};
    std::vector<std::vector<FEdge>> out(1);
    for (std::size_t u = 0; u < nodes.size(); ++u) {
        std::vector<FEdge> es;
        for (const Firing& f : fire(nodes[u], s)) {
            if (!f.act.is_send()) continue;
            for (const Firing& g : fire(f.target, s)) {
                if (g.act != dual(f.act)) continue;
                auto [it, fresh] = ids.emplace(g.target, nodes.size());
                if (fresh) {
                    if (nodes.size() >= node_cap()) throw_node_cap(node_cap());
                    nodes.push_back(g.target);
                    out.emplace_back();
                }
                es.push_back({f.act, it->second});
            }
        }
        out[u] = std::move(es);
    }

    std::size_t counter = 0;
    auto fresh = [&] { return "x" + std::to_string(counter++); };
    GeneralGlobal g;
    g.init = fresh();
    // References into each node: the entry, then edges in BFS order.
    std::vector<std::vector<Var>> refs(nodes.size());
    refs[0].push_back(g.init);
    std::vector<std::vector<Var>> edge_var(nodes.size());
    for (std::size_t u = 0; u < nodes.size(); ++u)
        for (const FEdge& e : out[u]) {
            Var v = fresh();
            edge_var[u].push_back(v);
            refs[e.dst].push_back(v);
        }
    for (std::size_t u = 0; u < nodes.size(); ++u) {
        Var node = refs[u][0];
        for (std::size_t i = 1; i < refs[u].size(); ++i) {
            Var m = fresh();
            g.eqs.push_back(eq_bin(K::merge, node, refs[u][i], m));
            node = m;
        }
        const auto& es = out[u];
        if (es.empty()) {
            Equation e;
            e.kind = K::end;
            e.x = node;
            g.eqs.push_back(std::move(e));
            continue;
        }
        for (std::size_t i = 0; i < es.size(); ++i) {
            Var here = node;
            if (i + 1 < es.size()) {
                here = fresh();
                Var rest = fresh();
                g.eqs.push_back(eq_bin(K::choice, node, here, rest));
                node = rest;
            }
            g.eqs.push_back(eq_msg(here, es[i].send.from, es[i].send.to, es[i].send.msg, edge_var[u][i]));
        }
    }
    return g;
}

} // namespace mpst
