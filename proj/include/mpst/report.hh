#pragma once

#include "json.hpp"

#include "mpst/cfsm.hh"
#include "mpst/compat.hh"
#include "mpst/generalized.hh"
#include "mpst/projection.hh"
#include "mpst/synthesis.hh"

namespace mpst {

using Json = nlohmann::ordered_json;

/// Machine-readable reports. Every object carries a "kind" field; the
/// shapes are described by schemas/report.schema.json.
Json to_json(const CompatReport& r);
Json to_json(const SafetyReport& r);
Json to_json(const WellFormedReport& r);
Json to_json(const SessionReport& r);
Json to_json(const RoundTrip& r);

} // namespace mpst
