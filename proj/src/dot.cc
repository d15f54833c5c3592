#include "mpst/dot.hh"

namespace mpst {

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

void machine_body(std::string& out, const Machine& m, const std::string& prefix, const std::string& indent) {
    for (StateId q = 0; q < m.num_states(); ++q) {
        out += indent + quote(prefix + m.name(q)) + " [label=" + quote(m.name(q));
        if (q == m.initial()) out += ", shape=doublecircle";
        out += "];\n";
    }
    for (const Edge& e : m.edges())
        out += indent + quote(prefix + m.name(e.src)) + " -> " + quote(prefix + m.name(e.dst)) +
               " [label=" + quote(to_string(e.act)) + "];\n";
}

std::string equation_label(const Equation& e) {
    using K = Equation::Kind;
    switch (e.kind) {
    case K::msg: return e.from + "->" + e.to + ":" + e.label;
    case K::send: return e.to + "!" + e.label;
    case K::recv: return e.from + "?" + e.label;
    case K::fork:
    case K::join: return "|";
    case K::choice: return "+";
    case K::ichoice: return "(+)";
    case K::echoice: return "&";
    case K::merge: return "+";
    case K::indirect: return "=";
    case K::end: return "end";
    }
    return {};
}

std::string equations_dot(const std::string& name, const std::vector<Equation>& eqs, const Var& init) {
    std::string out = "digraph " + quote(name) + " {\n  rankdir=TB;\n  node [shape=point];\n";
    for (const Var& v : variables(eqs)) {
        out += "  " + quote(v) + " [xlabel=" + quote(v);
        if (v == init) out += ", shape=doublecircle, width=0.15";
        out += "];\n";
    }
    for (std::size_t i = 0; i < eqs.size(); ++i) {
        std::string box = "e" + std::to_string(i);
        out += "  " + box + " [shape=box, label=" + quote(equation_label(eqs[i])) + "];\n";
        for (const Var& v : eqs[i].inputs()) out += "  " + quote(v) + " -> " + box + ";\n";
        for (const Var& v : eqs[i].outputs()) out += "  " + box + " -> " + quote(v) + ";\n";
    }
    return out + "}\n";
}

} // namespace

std::string to_dot(const Machine& m) {
    std::string out = "digraph " + quote(m.owner()) + " {\n  rankdir=LR;\n  node [shape=circle];\n";
    machine_body(out, m, "", "  ");
    return out + "}\n";
}

std::string to_dot(const System& s) {
    std::string out = "digraph system {\n  rankdir=LR;\n  node [shape=circle];\n";
    for (const Machine& m : s.machines()) {
        out += "  subgraph " + quote("cluster_" + m.owner()) + " {\n    label=" + quote(m.owner()) + ";\n";
        machine_body(out, m, m.owner() + ".", "    ");
        out += "  }\n";
    }
    return out + "}\n";
}

std::string to_dot(const ReachSet& rs, const System& s) {
    std::string out = "digraph reach {\n  node [shape=box];\n";
    for (std::size_t i = 0; i < rs.size(); ++i) {
        out += "  c" + std::to_string(i) + " [label=" + quote(to_string(rs.configs[i], s));
        if (i == 0) out += ", peripheries=2";
        out += "];\n";
    }
    for (const auto& a : rs.arcs)
        out += "  c" + std::to_string(a.src) + " -> c" + std::to_string(a.dst) + " [label=" + quote(to_string(a.act)) +
               "];\n";
    return out + "}\n";
}

std::string to_dot(const LabelledNet& n) {
    std::string out = "digraph net {\n  rankdir=TB;\n";
    for (std::size_t p = 0; p < n.places.size(); ++p) {
        out += "  p" + std::to_string(p) + " [shape=circle, label=" + quote(n.places[p]);
        if (n.initial[p]) out += ", style=filled, fillcolor=gray";
        out += "];\n";
    }
    for (std::size_t t = 0; t < n.transitions.size(); ++t) {
        const auto& tr = n.transitions[t];
        std::string id = "t" + std::to_string(t);
        out += "  " + id + " [shape=box, label=" + quote(tr.label ? to_string(*tr.label) : "") + "];\n";
        for (std::size_t p : tr.in) out += "  p" + std::to_string(p) + " -> " + id + ";\n";
        for (std::size_t p : tr.out) out += "  " + id + " -> p" + std::to_string(p) + ";\n";
    }
    return out + "}\n";
}

std::string to_dot(const GeneralGlobal& g) { return equations_dot("global", g.eqs, g.init); }
std::string to_dot(const GeneralLocal& t) { return equations_dot(t.owner, t.eqs, t.init); }

} // namespace mpst
