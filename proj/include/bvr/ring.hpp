#pragma once
#include <cmath>

#include "bvr/exp_ring.hpp"
#include "bvr/rational.hpp"

namespace bvr {

// Uniform scalar interface for the coefficient rings the engine is
// instantiated over: exact rationals, doubles, and the exponential ring.
template <class R>
struct RingOps;

template <>
struct RingOps<Rat> {
    static Rat zero() { return Rat(0); }
    static Rat one() { return Rat(1); }
    static bool is_zero(const Rat& a) { return a == 0; }
    static Rat from_rat(const Rat& q) { return q; }
    static Rat div_int(const Rat& a, long n) { return a / Rat(n); }
    static double approx(const Rat& a) { return a.get_d(); }
};

template <>
struct RingOps<double> {
    static double zero() { return 0.0; }
    static double one() { return 1.0; }
    static bool is_zero(double a) { return a == 0.0; }
    static double from_rat(const Rat& q) { return q.get_d(); }
    static double div_int(double a, long n) { return a / double(n); }
    static double approx(double a) { return a; }
};

template <>
struct RingOps<ExpRing> {
    static ExpRing zero() { return ExpRing(); }
    static ExpRing one() { return ExpRing(Rat(1)); }
    static bool is_zero(const ExpRing& a) { return a.is_zero(); }
    static ExpRing from_rat(const Rat& q) { return ExpRing(q); }
    static ExpRing div_int(const ExpRing& a, long n) { return a.div_rat(Rat(n)); }
    static double approx(const ExpRing& a) { return a.eval(); }
};

}  // namespace bvr
