#include "mpst/report.hh"

#include "mpst/syntax.hh"

namespace mpst {

namespace {

Json trace(const Trace& t) {
    Json a = Json::array();
    for (const Action& x : t) a.push_back(to_string(x));
    return a;
}

} // namespace

Json to_json(const CompatReport& r) {
    Json j;
    j["kind"] = "compat";
    j["compatible"] = r.compatible;
    j["stable_states"] = r.stable_states;
    Json fs = Json::array();
    for (const auto& f : r.failures) {
        Json x;
        x["participant"] = f.participant;
        x["action"] = to_string(f.action);
        x["reason"] = f.reason;
        x["stable_state"] = f.stable_state;
        x["stable_path"] = trace(f.stable_path);
        x["local_path"] = trace(f.local_path);
        x["alternation"] = trace(f.alternation);
        fs.push_back(std::move(x));
    }
    j["failures"] = std::move(fs);
    return j;
}

Json to_json(const SafetyReport& r) {
    Json j;
    j["kind"] = "safety";
    j["bound"] = r.bound;
    j["configurations"] = r.configurations;
    j["safe"] = r.safe();
    j["liveness_checked"] = r.liveness_checked;
    j["live"] = r.live;
    Json vs = Json::array();
    for (const auto& v : r.violations) {
        Json x;
        x["kind"] = v.kind;
        x["configuration"] = v.configuration;
        x["path"] = trace(v.path);
        vs.push_back(std::move(x));
    }
    j["violations"] = std::move(vs);
    return j;
}

Json to_json(const WellFormedReport& r) {
    Json j;
    j["kind"] = "wf";
    j["well_formed"] = r.ok;
    Json ps = Json::object();
    for (const auto& [p, t] : r.projections) ps[p] = print(t);
    j["projections"] = std::move(ps);
    Json es = Json::object();
    for (const auto& [p, e] : r.errors) es[p] = e;
    j["errors"] = std::move(es);
    return j;
}

Json to_json(const SessionReport& r) {
    Json j;
    j["kind"] = "session";
    j["session_compatible"] = r.ok();
    j["deterministic"] = r.deterministic;
    j["compatible"] = r.compatible;
    j["mixed_parallel"] = r.mixed_parallel;
    j["unique_sender"] = r.unique_sender;
    j["receiver"] = r.receiver;
    j["failures"] = r.failures;
    return j;
}

Json to_json(const RoundTrip& r) {
    Json j;
    j["kind"] = "roundtrip";
    j["equivalent"] = r.ok;
    Json bs = Json::array();
    for (const auto& b : r.bounds) {
        Json x;
        x["bound"] = b.k;
        x["equivalent"] = b.result.equivalent;
        x["explored"] = b.result.explored;
        if (!b.result.equivalent) {
            x["counterexample"] = trace(b.result.counterexample);
            x["accepted_by"] = b.result.accepted_by == 0 ? "system" : "type";
        }
        bs.push_back(std::move(x));
    }
    j["bounds"] = std::move(bs);
    return j;
}

} // namespace mpst
