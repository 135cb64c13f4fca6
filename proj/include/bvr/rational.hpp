#pragma once
#include <gmpxx.h>
#include <stdexcept>
#include <string>

namespace bvr {

// Exact rational scalar. All structural identities in the library are
// checked over this type; doubles only enter through spectral/quadrature
// paths.
using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline double to_double(const Rat& r) { return r.get_d(); }

// Parses "p", "-p", or "p/q".
inline Rat rat_parse(const std::string& s) {
    Rat r;
    if (r.set_str(s, 10) != 0)
        throw std::invalid_argument("rat_parse: bad rational '" + s + "'");
    r.canonicalize();
    return r;
}

inline std::string rat_str(const Rat& r) { return r.get_str(); }

}  // namespace bvr
