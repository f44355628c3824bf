#pragma once

#include "terrace/reaction.hpp"

namespace terrace::fixtures {

/// Bistable: f = 4(p - 1/2) on (0, 1), +2 below 0, -2 above 1.
inline ReactionCandidate example_a_raw() {
    ReactionCandidate r;
    r.steady_states = {{1.0, Stability::Stable}, {0.5, Stability::Unstable}, {0.0, Stability::Stable}};
    r.segments = {{0.0, 0.5, Polynomial{-2.0, 4.0}}, {0.5, 1.0, Polynomial{-2.0, 4.0}}};
    r.extension_below = Polynomial{2.0};
    r.extension_above = Polynomial{-2.0};
    return r;
}

/// Tristable, balanced halves: 16(p - 3/4) on (1/2, 1), 16(p - 1/4) on (0, 1/2).
inline ReactionCandidate example_b_raw() {
    ReactionCandidate r;
    r.steady_states = {{1.0, Stability::Stable},
                       {0.75, Stability::Unstable},
                       {0.5, Stability::Stable},
                       {0.25, Stability::Unstable},
                       {0.0, Stability::Stable}};
    r.segments = {{0.0, 0.25, Polynomial{-4.0, 16.0}},
                  {0.25, 0.5, Polynomial{-4.0, 16.0}},
                  {0.5, 0.75, Polynomial{-12.0, 16.0}},
                  {0.75, 1.0, Polynomial{-12.0, 16.0}}};
    r.extension_below = Polynomial{4.0};
    r.extension_above = Polynomial{-4.0};
    return r;
}

/// Tristable, unbalanced halves: integral of f over (1/2, 1) is -1/8 and over
/// (0, 1/2) is +1/8.
inline ReactionCandidate example_c_raw() {
    ReactionCandidate r;
    r.steady_states = {{1.0, Stability::Stable},
                       {0.75, Stability::Unstable},
                       {0.5, Stability::Stable},
                       {0.25, Stability::Unstable},
                       {0.0, Stability::Stable}};
    r.segments = {{0.0, 0.25, Polynomial{-0.5, 2.0}},
                  {0.25, 0.5, Polynomial{-1.5, 6.0}},
                  {0.5, 0.75, Polynomial{-4.5, 6.0}},
                  {0.75, 1.0, Polynomial{-1.5, 2.0}}};
    r.extension_below = Polynomial{0.5};
    r.extension_above = Polynomial{-0.5};
    return r;
}

inline ReactionSpec example_a() { return validate(example_a_raw()); }
inline ReactionSpec example_b() { return validate(example_b_raw()); }
inline ReactionSpec example_c() { return validate(example_c_raw()); }

}  // namespace terrace::fixtures
