#include "mpst/syntax.hh"

#include <algorithm>
#include <functional>
#include <map>
#include <type_traits>

#include "lexer.hh"
#include "mpst/error.hh"

namespace mpst {

std::vector<Action> dual(const std::vector<Action>& phi) {
    std::vector<Action> out;
    out.reserve(phi.size());
    for (const auto& a : phi) out.push_back(dual(a));
    return out;
}

std::string to_string(const Action& a) {
    std::string sep = (a.from.size() == 1 && a.to.size() == 1) ? "" : ".";
    return a.from + sep + a.to + (a.is_send() ? "!" : "?") + a.msg;
}

std::string to_string(const std::vector<Action>& phi) {
    if (phi.empty()) return "ε";
    std::string out;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (i) out += "·";
        out += to_string(phi[i]);
    }
    return out;
}

const GlobalBranch* Global::find(const Label& l) const {
    for (const auto& b : branches)
        if (b.label == l) return &b;
    return nullptr;
}

const LocalBranch* Local::find(const Label& l) const {
    for (const auto& b : branches)
        if (b.label == l) return &b;
    return nullptr;
}

namespace {

template <class B>
void sort_branches(std::vector<B>& bs) {
    std::sort(bs.begin(), bs.end(), [](const B& x, const B& y) { return x.label < y.label; });
    for (std::size_t i = 1; i < bs.size(); ++i)
        if (bs[i].label == bs[i - 1].label)
            throw ValidationError("duplicate branch label '" + bs[i].label + "'");
}

} // namespace

GlobalPtr g_end() {
    static const GlobalPtr e = std::make_shared<const Global>();
    return e;
}

GlobalPtr g_var(std::string v) {
    Global g;
    g.kind = Global::Kind::var;
    g.var = std::move(v);
    return std::make_shared<const Global>(std::move(g));
}

GlobalPtr g_rec(std::string v, GlobalPtr body) {
    Global g;
    g.kind = Global::Kind::rec;
    g.var = std::move(v);
    g.body = std::move(body);
    return std::make_shared<const Global>(std::move(g));
}

GlobalPtr g_branch(Participant from, Participant to, std::vector<GlobalBranch> bs,
                   std::optional<Label> in_flight) {
    if (bs.empty()) throw ValidationError("empty branch list");
    if (from == to) throw ValidationError("self-message " + from + "->" + to);
    sort_branches(bs);
    Global g;
    g.kind = Global::Kind::branch;
    g.from = std::move(from);
    g.to = std::move(to);
    if (in_flight) {
        auto it = std::find_if(bs.begin(), bs.end(),
                               [&](const GlobalBranch& b) { return b.label == *in_flight; });
        if (it == bs.end()) throw ValidationError("in-flight label '" + *in_flight + "' has no branch");
        g.mid = std::size_t(it - bs.begin());
    }
    g.branches = std::move(bs);
    return std::make_shared<const Global>(std::move(g));
}

GlobalPtr g_msg(Participant from, Participant to, Label l, GlobalPtr cont) {
    return g_branch(std::move(from), std::move(to), {{std::move(l), std::move(cont)}});
}

LocalPtr l_end() {
    static const LocalPtr e = std::make_shared<const Local>();
    return e;
}

LocalPtr l_var(std::string v) {
    Local t;
    t.kind = Local::Kind::var;
    t.var = std::move(v);
    return std::make_shared<const Local>(std::move(t));
}

LocalPtr l_rec(std::string v, LocalPtr body) {
    Local t;
    t.kind = Local::Kind::rec;
    t.var = std::move(v);
    t.body = std::move(body);
    return std::make_shared<const Local>(std::move(t));
}

namespace {

LocalPtr l_prefix(Local::Kind k, Participant peer, std::vector<LocalBranch> bs) {
    if (bs.empty()) throw ValidationError("empty branch list");
    sort_branches(bs);
    Local t;
    t.kind = k;
    t.peer = std::move(peer);
    t.branches = std::move(bs);
    return std::make_shared<const Local>(std::move(t));
}

} // namespace

LocalPtr l_send(Participant to, std::vector<LocalBranch> bs) {
    return l_prefix(Local::Kind::send, std::move(to), std::move(bs));
}

LocalPtr l_recv(Participant from, std::vector<LocalBranch> bs) {
    return l_prefix(Local::Kind::recv, std::move(from), std::move(bs));
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

using detail::Cursor;
using detail::Tok;
using detail::Token;

/// Tracks binders in scope and which of them are not yet under a prefix.
struct Scope {
    std::vector<std::string> bound;
    std::vector<std::string> unguarded;

    bool has(const std::string& v) const {
        return std::find(bound.begin(), bound.end(), v) != bound.end();
    }
    bool is_unguarded(const std::string& v) const {
        return std::find(unguarded.begin(), unguarded.end(), v) != unguarded.end();
    }
};

void check_var(const Token& tok, const Scope& sc) {
    if (!sc.has(tok.text)) Cursor::fail_at(tok, "unbound recursion variable '" + tok.text + "'");
    if (sc.is_unguarded(tok.text)) Cursor::fail_at(tok, "unguarded recursion on '" + tok.text + "'");
}

void check_binder(const Token& tok, const Scope& sc) {
    if (sc.has(tok.text)) Cursor::fail_at(tok, "recursion variable '" + tok.text + "' shadows an outer binder");
}

template <class B, class Sub>
std::vector<B> parse_branches(Cursor& cur, Scope sc, Sub&& sub) {
    sc.unguarded.clear();
    std::vector<B> bs;
    std::vector<Token> toks;
    auto one = [&] {
        toks.push_back(cur.peek());
        Label l = cur.ident();
        cur.expect(Tok::dot);
        bs.push_back({std::move(l), sub(cur, sc)});
    };
    if (cur.accept(Tok::lbrace)) {
        one();
        while (cur.accept(Tok::comma)) one();
        cur.expect(Tok::rbrace);
    } else {
        one();
    }
    for (std::size_t i = 0; i < bs.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (bs[i].label == bs[j].label)
                Cursor::fail_at(toks[i], "duplicate branch label '" + bs[i].label + "'");
    return bs;
}

struct GlobalParser {
    ParseOptions opts;

    GlobalPtr parse(Cursor& cur, Scope sc) {
        if (cur.at_ident("end")) {
            cur.next();
            return g_end();
        }
        if (cur.at_ident("rec")) {
            cur.next();
            const Token& v = cur.expect(Tok::ident);
            check_binder(v, sc);
            cur.expect(Tok::dot);
            sc.bound.push_back(v.text);
            sc.unguarded.push_back(v.text);
            return g_rec(v.text, parse(cur, sc));
        }
        const Token first = cur.expect(Tok::ident);
        if (cur.at(Tok::arrow) || cur.at(Tok::squiggle)) {
            bool flight = cur.at(Tok::squiggle);
            const Token arrow = cur.next();
            if (flight && !opts.allow_in_flight)
                Cursor::fail_at(arrow, "in-flight messages ('~>') are not allowed in source files");
            const Token to = cur.expect(Tok::ident);
            if (to.text == first.text) Cursor::fail_at(to, "self-message " + first.text + "->" + to.text);
            cur.expect(Tok::colon);
            std::optional<Label> sent;
            if (flight) {
                cur.expect(Tok::lbrack);
                sent = cur.ident();
                cur.expect(Tok::rbrack);
            }
            auto bs = parse_branches<GlobalBranch>(
                cur, sc, [this](Cursor& c, const Scope& s) { return parse(c, s); });
            try {
                return g_branch(first.text, to.text, std::move(bs), sent);
            } catch (const ValidationError& e) {
                Cursor::fail_at(arrow, e.what());
            }
        }
        check_var(first, sc);
        return g_var(first.text);
    }
};

LocalPtr parse_local_rec(Cursor& cur, Scope sc) {
    if (cur.at_ident("end")) {
        cur.next();
        return l_end();
    }
    if (cur.at_ident("rec")) {
        cur.next();
        const Token& v = cur.expect(Tok::ident);
        check_binder(v, sc);
        cur.expect(Tok::dot);
        sc.bound.push_back(v.text);
        sc.unguarded.push_back(v.text);
        return l_rec(v.text, parse_local_rec(cur, sc));
    }
    const Token first = cur.expect(Tok::ident);
    if (cur.at(Tok::bang) || cur.at(Tok::query)) {
        bool snd = cur.at(Tok::bang);
        cur.next();
        auto bs = parse_branches<LocalBranch>(cur, sc, parse_local_rec);
        return snd ? l_send(first.text, std::move(bs)) : l_recv(first.text, std::move(bs));
    }
    check_var(first, sc);
    return l_var(first.text);
}

} // namespace

GlobalPtr parse_global(std::string_view text, ParseOptions opts) {
    Cursor cur(detail::lex(text));
    GlobalParser p{opts};
    GlobalPtr g = p.parse(cur, {});
    if (!cur.at(Tok::eof)) cur.fail("expected end of input");
    return g;
}

LocalPtr parse_local(std::string_view text) {
    Cursor cur(detail::lex(text));
    LocalPtr t = parse_local_rec(cur, {});
    if (!cur.at(Tok::eof)) cur.fail("expected end of input");
    return t;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

template <class B, class F>
void print_branches(std::string& out, const std::vector<B>& bs, F&& sub) {
    if (bs.size() == 1) {
        out += bs[0].label + ". ";
        sub(bs[0].cont);
        return;
    }
    out += "{";
    for (std::size_t i = 0; i < bs.size(); ++i) {
        if (i) out += ", ";
        out += bs[i].label + ". ";
        sub(bs[i].cont);
    }
    out += "}";
}

void print_rec(std::string& out, const GlobalPtr& g) {
    switch (g->kind) {
    case Global::Kind::end: out += "end"; return;
    case Global::Kind::var: out += g->var; return;
    case Global::Kind::rec:
        out += "rec " + g->var + ". ";
        print_rec(out, g->body);
        return;
    case Global::Kind::branch:
        if (g->mid) {
            out += g->from + "~>" + g->to + ":[" + g->branches[*g->mid].label + "]{";
            for (std::size_t i = 0; i < g->branches.size(); ++i) {
                if (i) out += ", ";
                out += g->branches[i].label + ". ";
                print_rec(out, g->branches[i].cont);
            }
            out += "}";
            return;
        }
        out += g->from + "->" + g->to + ":";
        print_branches(out, g->branches, [&](const GlobalPtr& c) { print_rec(out, c); });
        return;
    }
}

void print_rec(std::string& out, const LocalPtr& t) {
    switch (t->kind) {
    case Local::Kind::end: out += "end"; return;
    case Local::Kind::var: out += t->var; return;
    case Local::Kind::rec:
        out += "rec " + t->var + ". ";
        print_rec(out, t->body);
        return;
    case Local::Kind::send:
    case Local::Kind::recv:
        out += t->peer + (t->kind == Local::Kind::send ? "!" : "?");
        print_branches(out, t->branches, [&](const LocalPtr& c) { print_rec(out, c); });
        return;
    }
}

} // namespace

std::string print(const GlobalPtr& g) {
    std::string out;
    print_rec(out, g);
    return out;
}

std::string print(const LocalPtr& t) {
    std::string out;
    print_rec(out, t);
    return out;
}

// ---------------------------------------------------------------------------
// Structural operations

namespace {

using Renaming = std::vector<std::pair<std::string, std::string>>;

bool same_var(const Renaming& env, const std::string& a, const std::string& b) {
    for (auto it = env.rbegin(); it != env.rend(); ++it) {
        if (it->first == a || it->second == b) return it->first == a && it->second == b;
    }
    return a == b;
}

bool geq(const GlobalPtr& a, const GlobalPtr& b, Renaming* env) {
    if (a == b) return true;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case Global::Kind::end: return true;
    case Global::Kind::var: return env ? same_var(*env, a->var, b->var) : a->var == b->var;
    case Global::Kind::rec: {
        if (!env) return a->var == b->var && geq(a->body, b->body, nullptr);
        env->emplace_back(a->var, b->var);
        bool r = geq(a->body, b->body, env);
        env->pop_back();
        return r;
    }
    case Global::Kind::branch:
        if (a->from != b->from || a->to != b->to || a->mid != b->mid) return false;
        if (a->branches.size() != b->branches.size()) return false;
        for (std::size_t i = 0; i < a->branches.size(); ++i) {
            if (a->branches[i].label != b->branches[i].label) return false;
            if (!geq(a->branches[i].cont, b->branches[i].cont, env)) return false;
        }
        return true;
    }
    return false;
}

bool leq(const LocalPtr& a, const LocalPtr& b, Renaming* env) {
    if (a == b) return true;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case Local::Kind::end: return true;
    case Local::Kind::var: return env ? same_var(*env, a->var, b->var) : a->var == b->var;
    case Local::Kind::rec: {
        if (!env) return a->var == b->var && leq(a->body, b->body, nullptr);
        env->emplace_back(a->var, b->var);
        bool r = leq(a->body, b->body, env);
        env->pop_back();
        return r;
    }
    case Local::Kind::send:
    case Local::Kind::recv:
        if (a->peer != b->peer || a->branches.size() != b->branches.size()) return false;
        for (std::size_t i = 0; i < a->branches.size(); ++i) {
            if (a->branches[i].label != b->branches[i].label) return false;
            if (!leq(a->branches[i].cont, b->branches[i].cont, env)) return false;
        }
        return true;
    }
    return false;
}

} // namespace

bool equal(const GlobalPtr& a, const GlobalPtr& b) { return geq(a, b, nullptr); }
bool equal(const LocalPtr& a, const LocalPtr& b) { return leq(a, b, nullptr); }

bool alpha_equal(const GlobalPtr& a, const GlobalPtr& b) {
    Renaming env;
    return geq(a, b, &env);
}

bool alpha_equal(const LocalPtr& a, const LocalPtr& b) {
    Renaming env;
    return leq(a, b, &env);
}

namespace {

GlobalPtr rename_g(const GlobalPtr& g, std::map<std::string, std::string>& env, int& counter) {
    switch (g->kind) {
    case Global::Kind::end: return g;
    case Global::Kind::var: {
        auto it = env.find(g->var);
        return it == env.end() ? g : g_var(it->second);
    }
    case Global::Kind::rec: {
        std::string fresh = "t" + std::to_string(counter++);
        auto saved = env.find(g->var) == env.end() ? std::nullopt : std::optional(env[g->var]);
        env[g->var] = fresh;
        auto body = rename_g(g->body, env, counter);
        if (saved) env[g->var] = *saved; else env.erase(g->var);
        return g_rec(fresh, body);
    }
    case Global::Kind::branch: {
        std::vector<GlobalBranch> bs;
        for (const auto& b : g->branches) bs.push_back({b.label, rename_g(b.cont, env, counter)});
        std::optional<Label> sent;
        if (g->mid) sent = g->branches[*g->mid].label;
        return g_branch(g->from, g->to, std::move(bs), sent);
    }
    }
    return g;
}

LocalPtr rename_l(const LocalPtr& t, std::map<std::string, std::string>& env, int& counter) {
    switch (t->kind) {
    case Local::Kind::end: return t;
    case Local::Kind::var: {
        auto it = env.find(t->var);
        return it == env.end() ? t : l_var(it->second);
    }
    case Local::Kind::rec: {
        std::string fresh = "t" + std::to_string(counter++);
        auto saved = env.find(t->var) == env.end() ? std::nullopt : std::optional(env[t->var]);
        env[t->var] = fresh;
        auto body = rename_l(t->body, env, counter);
        if (saved) env[t->var] = *saved; else env.erase(t->var);
        return l_rec(fresh, body);
    }
    case Local::Kind::send:
    case Local::Kind::recv: {
        std::vector<LocalBranch> bs;
        for (const auto& b : t->branches) bs.push_back({b.label, rename_l(b.cont, env, counter)});
        return t->kind == Local::Kind::send ? l_send(t->peer, std::move(bs))
                                            : l_recv(t->peer, std::move(bs));
    }
    }
    return t;
}

} // namespace

GlobalPtr rename_canonical(const GlobalPtr& g) {
    std::map<std::string, std::string> env;
    int counter = 0;
    return rename_g(g, env, counter);
}

LocalPtr rename_canonical(const LocalPtr& t) {
    std::map<std::string, std::string> env;
    int counter = 0;
    return rename_l(t, env, counter);
}

// Bound names never shadow each other in accepted input, and the substituted
// term is always closed, so capture cannot occur.
GlobalPtr substitute(const GlobalPtr& g, const std::string& v, const GlobalPtr& by) {
    switch (g->kind) {
    case Global::Kind::end: return g;
    case Global::Kind::var: return g->var == v ? by : g;
    case Global::Kind::rec:
        if (g->var == v) return g;
        return g_rec(g->var, substitute(g->body, v, by));
    case Global::Kind::branch: {
        std::vector<GlobalBranch> bs;
        bool changed = false;
        for (const auto& b : g->branches) {
            auto c = substitute(b.cont, v, by);
            changed |= c != b.cont;
            bs.push_back({b.label, c});
        }
        if (!changed) return g;
        auto out = std::make_shared<Global>(*g);
        out->branches = std::move(bs);
        return out;
    }
    }
    return g;
}

LocalPtr substitute(const LocalPtr& t, const std::string& v, const LocalPtr& by) {
    switch (t->kind) {
    case Local::Kind::end: return t;
    case Local::Kind::var: return t->var == v ? by : t;
    case Local::Kind::rec:
        if (t->var == v) return t;
        return l_rec(t->var, substitute(t->body, v, by));
    case Local::Kind::send:
    case Local::Kind::recv: {
        std::vector<LocalBranch> bs;
        bool changed = false;
        for (const auto& b : t->branches) {
            auto c = substitute(b.cont, v, by);
            changed |= c != b.cont;
            bs.push_back({b.label, c});
        }
        if (!changed) return t;
        auto out = std::make_shared<Local>(*t);
        out->branches = std::move(bs);
        return out;
    }
    }
    return t;
}

GlobalPtr unfold(const GlobalPtr& g) {
    if (g->kind != Global::Kind::rec) return g;
    return substitute(g->body, g->var, g);
}

LocalPtr unfold(const LocalPtr& t) {
    if (t->kind != Local::Kind::rec) return t;
    return substitute(t->body, t->var, t);
}

GlobalPtr unfold_all(const GlobalPtr& g) {
    GlobalPtr cur = g;
    // Guardedness bounds this by the number of leading binders.
    for (std::size_t guard = 0; cur->kind == Global::Kind::rec; ++guard) {
        if (guard > 1024) throw ValidationError("unguarded recursion");
        cur = unfold(cur);
    }
    return cur;
}

LocalPtr unfold_all(const LocalPtr& t) {
    LocalPtr cur = t;
    for (std::size_t guard = 0; cur->kind == Local::Kind::rec; ++guard) {
        if (guard > 1024) throw ValidationError("unguarded recursion");
        cur = unfold(cur);
    }
    return cur;
}

namespace {

template <class P>
void collect_free(const P& t, std::vector<std::string>& bound, std::set<std::string>& out) {
    using Kind = typename std::remove_cv_t<typename P::element_type>::Kind;
    if (t->kind == Kind::var) {
        if (std::find(bound.begin(), bound.end(), t->var) == bound.end()) out.insert(t->var);
    } else if (t->kind == Kind::rec) {
        bound.push_back(t->var);
        collect_free(t->body, bound, out);
        bound.pop_back();
    } else {
        for (const auto& b : t->branches) collect_free(b.cont, bound, out);
    }
}

template <class P>
void check_cg(const P& t, std::vector<std::string>& bound, std::vector<std::string>& unguarded) {
    using Kind = typename std::remove_cv_t<typename P::element_type>::Kind;
    if (t->kind == Kind::var) {
        if (std::find(bound.begin(), bound.end(), t->var) == bound.end())
            throw ValidationError("unbound recursion variable '" + t->var + "'");
        if (std::find(unguarded.begin(), unguarded.end(), t->var) != unguarded.end())
            throw ValidationError("unguarded recursion on '" + t->var + "'");
    } else if (t->kind == Kind::rec) {
        if (std::find(bound.begin(), bound.end(), t->var) != bound.end())
            throw ValidationError("recursion variable '" + t->var + "' shadows an outer binder");
        bound.push_back(t->var);
        unguarded.push_back(t->var);
        check_cg(t->body, bound, unguarded);
        unguarded.pop_back();
        bound.pop_back();
    } else if (t->kind != Kind::end) {
        std::vector<std::string> none;
        for (const auto& b : t->branches) check_cg(b.cont, bound, none);
    }
}

} // namespace

std::set<std::string> free_vars(const GlobalPtr& g) {
    std::vector<std::string> bound;
    std::set<std::string> out;
    collect_free(g, bound, out);
    return out;
}

std::set<std::string> free_vars(const LocalPtr& t) {
    std::vector<std::string> bound;
    std::set<std::string> out;
    collect_free(t, bound, out);
    return out;
}

void check_closed_guarded(const GlobalPtr& g) {
    std::vector<std::string> bound, unguarded;
    std::function<void(const GlobalPtr&)> self_check = [&](const GlobalPtr& n) {
        if (n->kind == Global::Kind::branch && n->from == n->to)
            throw ValidationError("self-message " + n->from + "->" + n->to);
        if (n->kind == Global::Kind::rec) self_check(n->body);
        for (const auto& b : n->branches) self_check(b.cont);
    };
    self_check(g);
    check_cg(g, bound, unguarded);
}

void check_closed_guarded(const LocalPtr& t) {
    std::vector<std::string> bound, unguarded;
    check_cg(t, bound, unguarded);
}

std::set<Participant> participants(const GlobalPtr& g) {
    std::set<Participant> out;
    std::function<void(const GlobalPtr&)> go = [&](const GlobalPtr& n) {
        if (n->kind == Global::Kind::branch) {
            out.insert(n->from);
            out.insert(n->to);
        }
        if (n->kind == Global::Kind::rec) go(n->body);
        for (const auto& b : n->branches) go(b.cont);
    };
    go(g);
    return out;
}

std::set<Label> alphabet(const GlobalPtr& g) {
    std::set<Label> out;
    std::function<void(const GlobalPtr&)> go = [&](const GlobalPtr& n) {
        if (n->kind == Global::Kind::rec) go(n->body);
        for (const auto& b : n->branches) {
            out.insert(b.label);
            go(b.cont);
        }
    };
    go(g);
    return out;
}

std::set<Label> alphabet(const LocalPtr& t) {
    std::set<Label> out;
    std::function<void(const LocalPtr&)> go = [&](const LocalPtr& n) {
        if (n->kind == Local::Kind::rec) go(n->body);
        for (const auto& b : n->branches) {
            out.insert(b.label);
            go(b.cont);
        }
    };
    go(t);
    return out;
}

std::size_t size(const GlobalPtr& g) {
    std::size_t n = 1;
    if (g->kind == Global::Kind::rec) n += size(g->body);
    for (const auto& b : g->branches) n += size(b.cont);
    return n;
}

std::size_t size(const LocalPtr& t) {
    std::size_t n = 1;
    if (t->kind == Local::Kind::rec) n += size(t->body);
    for (const auto& b : t->branches) n += size(b.cont);
    return n;
}

} // namespace mpst
