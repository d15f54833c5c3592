#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpst/syntax.hh"

namespace mpst {

/// Projection of `g` onto `p`. In-flight branches project to the full
/// branching for the receiver and to the chosen continuation for everyone
/// else. A participant that does not occur in `g` gets `end`. Throws
/// MergeFailure when some merge is undefined.
LocalPtr project(const GlobalPtr& g, const Participant& p);

/// Partial merge of two local types; throws MergeFailure.
LocalPtr merge(const LocalPtr& a, const LocalPtr& b);

/// Non-throwing variant.
std::optional<LocalPtr> try_merge(const LocalPtr& a, const LocalPtr& b);

struct WellFormedReport {
    bool ok = true;
    std::map<Participant, LocalPtr> projections;
    std::map<Participant, std::string> errors;
};

WellFormedReport well_formed(const GlobalPtr& g);

/// `a` is a subtype of `b`: same selections, and `b` may offer more
/// branches on every reception.
bool subtype(const LocalPtr& a, const LocalPtr& b);

} // namespace mpst
