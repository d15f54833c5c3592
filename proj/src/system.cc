#include "mpst/system.hh"

#include <algorithm>
#include <deque>

#include "lexer.hh"
#include "mpst/error.hh"

namespace mpst {

bool Machine::is_sending(StateId q) const {
    const auto& o = out_.at(q);
    return !o.empty() && std::all_of(o.begin(), o.end(), [&](std::size_t e) { return edges_[e].act.is_send(); });
}

bool Machine::is_receiving(StateId q) const {
    const auto& o = out_.at(q);
    return !o.empty() &&
           std::all_of(o.begin(), o.end(), [&](std::size_t e) { return edges_[e].act.is_receive(); });
}

bool Machine::is_mixed(StateId q) const {
    return !is_final(q) && !is_sending(q) && !is_receiving(q);
}

std::optional<StateId> Machine::find_state(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<StateId> Machine::step(StateId q, const Action& a) const {
    for (std::size_t e : out_.at(q))
        if (edges_[e].act == a) return edges_[e].dst;
    return std::nullopt;
}

StateId Machine::add_state(std::string name) {
    if (index_.count(name)) throw ValidationError("duplicate state '" + name + "' in machine " + owner_);
    StateId id = StateId(names_.size());
    index_.emplace(name, id);
    names_.push_back(std::move(name));
    out_.emplace_back();
    return id;
}

StateId Machine::state(const std::string& name) {
    auto it = index_.find(name);
    return it != index_.end() ? it->second : add_state(name);
}

void Machine::add_edge(StateId src, Action a, StateId dst) {
    if (a.subject() != owner_)
        throw ValidationError("transition " + to_string(a) + " has subject " + a.subject() +
                              " but belongs to machine " + owner_);
    if (a.from == a.to) throw ValidationError("self-channel in " + to_string(a));
    if (src >= names_.size() || dst >= names_.size()) throw ValidationError("edge on unknown state");
    for (std::size_t e : out_[src])
        if (edges_[e].act == a && edges_[e].dst == dst) return;
    edges_.push_back({src, std::move(a), dst});
    auto& o = out_[src];
    o.push_back(edges_.size() - 1);
    std::sort(o.begin(), o.end(), [&](std::size_t x, std::size_t y) {
        if (edges_[x].act != edges_[y].act) return edges_[x].act < edges_[y].act;
        return edges_[x].dst < edges_[y].dst;
    });
}

std::vector<bool> Machine::reachable() const {
    std::vector<bool> seen(names_.size(), false);
    if (names_.empty()) return seen;
    std::deque<StateId> work{initial_};
    seen[initial_] = true;
    while (!work.empty()) {
        StateId q = work.front();
        work.pop_front();
        for (std::size_t e : out_[q]) {
            if (!seen[edges_[e].dst]) {
                seen[edges_[e].dst] = true;
                work.push_back(edges_[e].dst);
            }
        }
    }
    return seen;
}

Machine Machine::trimmed() const {
    auto seen = reachable();
    Machine m(owner_);
    std::vector<StateId> map(names_.size(), 0);
    for (StateId q = 0; q < names_.size(); ++q)
        if (seen[q]) map[q] = m.add_state(names_[q]);
    if (!names_.empty()) m.set_initial(map[initial_]);
    for (const auto& e : edges_)
        if (seen[e.src]) m.add_edge(map[e.src], e.act, map[e.dst]);
    return m;
}

std::set<Label> Machine::alphabet() const {
    std::set<Label> out;
    for (const auto& e : edges_) out.insert(e.act.msg);
    return out;
}

std::set<Participant> Machine::peers() const {
    std::set<Participant> out;
    for (const auto& e : edges_) out.insert(e.act.peer());
    return out;
}

// ---------------------------------------------------------------------------

System::System(std::vector<Machine> machines) : machines_(std::move(machines)) {
    std::sort(machines_.begin(), machines_.end(),
              [](const Machine& a, const Machine& b) { return a.owner() < b.owner(); });
    std::set<Label> labels;
    for (std::size_t i = 0; i < machines_.size(); ++i) {
        if (i && machines_[i].owner() == machines_[i - 1].owner())
            throw ValidationError("two machines for participant " + machines_[i].owner());
        if (machines_[i].num_states() == 0)
            throw ValidationError("machine " + machines_[i].owner() + " has no states");
        participants_.push_back(machines_[i].owner());
        auto al = machines_[i].alphabet();
        labels.insert(al.begin(), al.end());
    }
    for (const auto& m : machines_)
        for (const auto& p : m.peers())
            if (!index_of(p))
                throw ValidationError("machine " + m.owner() + " communicates with unknown participant " + p);
    alphabet_.assign(labels.begin(), labels.end());
}

const Machine& System::machine(const Participant& p) const {
    auto i = index_of(p);
    if (!i) throw ValidationError("no machine for participant " + p);
    return machines_[*i];
}

std::optional<std::size_t> System::index_of(const Participant& p) const {
    auto it = std::lower_bound(participants_.begin(), participants_.end(), p);
    if (it == participants_.end() || *it != p) return std::nullopt;
    return std::size_t(it - participants_.begin());
}

std::vector<std::pair<Participant, Participant>> System::channels() const {
    std::vector<std::pair<Participant, Participant>> out;
    for (const auto& p : participants_)
        for (const auto& q : participants_)
            if (p != q) out.emplace_back(p, q);
    return out;
}

std::uint32_t System::label_id(const Label& l) const {
    auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), l);
    if (it == alphabet_.end() || *it != l) throw ValidationError("label '" + l + "' not in alphabet");
    return std::uint32_t(it - alphabet_.begin());
}

System System::without(const Participant& p) const {
    std::vector<Machine> ms;
    for (const auto& m : machines_)
        if (m.owner() != p) ms.push_back(m);
    // Edges towards p remain; validation is bypassed by building directly.
    System s;
    s.machines_ = std::move(ms);
    for (const auto& m : s.machines_) s.participants_.push_back(m.owner());
    s.alphabet_ = alphabet_;
    return s;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

using detail::Cursor;
using detail::Tok;
using detail::Token;

struct PendingRef {
    Token tok;
    Participant who;
};

} // namespace

System parse_system(std::string_view text) {
    Cursor cur(detail::lex(text));
    std::vector<Machine> machines;
    std::vector<Token> owners;
    std::vector<PendingRef> refs;
    std::vector<std::map<StateId, Token>> first_mention;

    while (!cur.at(Tok::eof)) {
        cur.expect_word("machine");
        const Token owner = cur.expect(Tok::ident);
        for (std::size_t i = 0; i < owners.size(); ++i)
            if (owners[i].text == owner.text)
                Cursor::fail_at(owner, "duplicate machine for participant " + owner.text);
        owners.push_back(owner);
        Machine m(owner.text);
        std::map<StateId, Token> mentions;
        bool has_init = false;
        auto mention = [&](const Token& t) {
            StateId q = m.state(t.text);
            mentions.emplace(q, t);
            return q;
        };
        cur.expect(Tok::lbrace);
        while (!cur.accept(Tok::rbrace)) {
            if (cur.at_ident("init")) {
                const Token kw = cur.next();
                if (has_init) Cursor::fail_at(kw, "duplicate init in machine " + owner.text);
                has_init = true;
                m.set_initial(mention(cur.expect(Tok::ident)));
                cur.expect(Tok::semi);
                continue;
            }
            if (cur.at_ident("state") && cur.peek(1).kind == Tok::ident) {
                cur.next();
                mention(cur.expect(Tok::ident));
                cur.expect(Tok::semi);
                continue;
            }
            const Token src = cur.expect(Tok::ident);
            cur.expect(Tok::dash2);
            const Token from = cur.expect(Tok::ident);
            const Token to = cur.expect(Tok::ident);
            bool snd = cur.at(Tok::bang);
            if (!snd && !cur.at(Tok::query)) cur.fail("expected '!' or '?'");
            cur.next();
            std::string lbl = cur.ident();
            cur.expect(Tok::long_arrow);
            const Token dst = cur.expect(Tok::ident);
            cur.expect(Tok::semi);
            if (from.text == to.text) Cursor::fail_at(from, "self-channel " + from.text + to.text);
            Action a{from.text, to.text, snd ? Polarity::send : Polarity::receive, lbl};
            if (a.subject() != owner.text)
                Cursor::fail_at(from, "subject mismatch: " + to_string(a) + " has subject " + a.subject() +
                                          " inside machine " + owner.text);
            refs.push_back({a.is_send() ? to : from, a.peer()});
            StateId s = mention(src), d = mention(dst);
            m.add_edge(s, a, d);
        }
        if (!has_init) Cursor::fail_at(owner, "machine " + owner.text + " has no init state");
        machines.push_back(std::move(m));
        first_mention.push_back(std::move(mentions));
    }
    if (machines.empty()) cur.fail("expected at least one machine");

    for (const auto& r : refs) {
        bool known = std::any_of(owners.begin(), owners.end(), [&](const Token& o) { return o.text == r.who; });
        if (!known) Cursor::fail_at(r.tok, "unknown participant " + r.who);
    }
    for (std::size_t i = 0; i < machines.size(); ++i) {
        auto seen = machines[i].reachable();
        for (StateId q = 0; q < seen.size(); ++q)
            if (!seen[q])
                Cursor::fail_at(first_mention[i].at(q), "disconnected state " + machines[i].name(q) +
                                                            " in machine " + machines[i].owner());
    }
    return System(std::move(machines));
}

std::string print(const Machine& m) {
    std::string out = "machine " + m.owner() + " {\n";
    out += "  init " + m.name(m.initial()) + ";\n";
    for (StateId q = 0; q < m.num_states(); ++q) {
        bool touched = q == m.initial() || !m.out(q).empty() ||
                       std::any_of(m.edges().begin(), m.edges().end(), [&](const Edge& e) { return e.dst == q; });
        if (!touched) out += "  state " + m.name(q) + ";\n";
    }
    // Breadth-first order over sorted edges, so re-parsing the output and
    // printing again gives the same text.
    std::vector<StateId> order;
    std::vector<bool> seen(m.num_states(), false);
    auto visit = [&](StateId q) {
        if (!seen[q]) {
            seen[q] = true;
            order.push_back(q);
        }
    };
    visit(m.initial());
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t e : m.out(order[i])) visit(m.edges()[e].dst);
    for (StateId q = 0; q < m.num_states(); ++q) visit(q);
    for (StateId q : order) {
        for (std::size_t e : m.out(q)) {
            const Edge& ed = m.edges()[e];
            out += "  " + m.name(ed.src) + " -- " + ed.act.from + " " + ed.act.to + " " +
                   (ed.act.is_send() ? "!" : "?") + " " + ed.act.msg + " --> " + m.name(ed.dst) + ";\n";
        }
    }
    out += "}\n";
    return out;
}

std::string print(const System& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "\n";
        out += print(s.machine(i));
    }
    return out;
}

// ---------------------------------------------------------------------------

bool is_deterministic(const Machine& m) {
    for (StateId q = 0; q < m.num_states(); ++q) {
        const auto& o = m.out(q);
        for (std::size_t i = 1; i < o.size(); ++i)
            if (m.edges()[o[i]].act == m.edges()[o[i - 1]].act) return false;
    }
    return true;
}

BasicReport is_basic(const Machine& m) {
    BasicReport r;
    auto fail = [&](std::string why) {
        r.basic = false;
        r.reasons.push_back(m.owner() + ": " + std::move(why));
    };
    for (StateId q = 0; q < m.num_states(); ++q) {
        const auto& o = m.out(q);
        for (std::size_t i = 1; i < o.size(); ++i)
            if (m.edges()[o[i]].act == m.edges()[o[i - 1]].act)
                fail("state " + m.name(q) + " is not deterministic on " + to_string(m.edges()[o[i]].act));
        if (m.is_mixed(q)) fail("state " + m.name(q) + " is mixed");
        std::set<Participant> peers;
        for (std::size_t e : o) peers.insert(m.edges()[e].act.peer());
        if (peers.size() > 1) {
            std::string list;
            for (const auto& p : peers) list += (list.empty() ? "" : ", ") + p;
            fail("state " + m.name(q) + " is not directed (peers " + list + ")");
        }
    }
    return r;
}

BasicReport is_basic(const System& s) {
    BasicReport r;
    for (const auto& m : s.machines()) {
        auto one = is_basic(m);
        if (!one.basic) r.basic = false;
        r.reasons.insert(r.reasons.end(), one.reasons.begin(), one.reasons.end());
    }
    return r;
}

bool isomorphic(const Machine& a, const Machine& b) {
    if (a.owner() != b.owner()) return false;
    if (!is_deterministic(a) || !is_deterministic(b))
        throw ValidationError("isomorphism check requires deterministic machines");
    const std::size_t none = std::size_t(-1);
    std::vector<std::size_t> fwd(a.num_states(), none), bwd(b.num_states(), none);
    std::deque<std::pair<StateId, StateId>> work{{a.initial(), b.initial()}};
    fwd[a.initial()] = b.initial();
    bwd[b.initial()] = a.initial();
    while (!work.empty()) {
        auto [p, q] = work.front();
        work.pop_front();
        const auto& oa = a.out(p);
        const auto& ob = b.out(q);
        if (oa.size() != ob.size()) return false;
        for (std::size_t i = 0; i < oa.size(); ++i) {
            const Edge& ea = a.edges()[oa[i]];
            const Edge& eb = b.edges()[ob[i]];
            if (ea.act != eb.act) return false;
            if (fwd[ea.dst] == none && bwd[eb.dst] == none) {
                fwd[ea.dst] = eb.dst;
                bwd[eb.dst] = ea.dst;
                work.emplace_back(ea.dst, eb.dst);
            } else if (fwd[ea.dst] != eb.dst || bwd[eb.dst] != ea.dst) {
                return false;
            }
        }
    }
    return true;
}

} // namespace mpst
