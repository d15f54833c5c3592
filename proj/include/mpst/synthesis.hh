#pragma once

#include <vector>

#include "mpst/lts.hh"
#include "mpst/syntax.hh"
#include "mpst/system.hh"

namespace mpst {

struct SynthesisOptions {
    /// Check basic and multiparty compatible first (NotBasic, NotCompatible).
    bool check_preconditions = true;
    /// Prefer the lexicographically greatest enabled pair instead of the least.
    bool reverse_order = false;
};

/// Global type of a basic, multiparty compatible system, built by walking
/// joint control states with empty buffers. Throws SynthesisFailure when
/// the walk gets stuck or the result is not well formed.
GlobalPtr synthesize(const System& s, SynthesisOptions opts = {});

struct RoundTrip {
    bool ok = true;
    struct PerBound {
        Bound k;
        EquivResult result;
    };
    std::vector<PerBound> bounds;
};

/// Bounded trace equivalence of the system and the type for each bound.
RoundTrip verify_roundtrip(const System& s, const GlobalPtr& g, std::size_t n,
                           const std::vector<Bound>& ks = {1, 2, 3});

} // namespace mpst
