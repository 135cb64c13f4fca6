#pragma once
#include <cmath>
#include <map>
#include <string>

#include "bvr/rational.hpp"

namespace bvr {

// Finite sums  sum_j c_j * e^{q_j}  with rational c_j, q_j: the group algebra
// of (Q,+).  Heat kernels at rational times live here, so identities like
// Q P(eps,T) = -K_T + K_eps hold exactly rather than to a tolerance.
class ExpRing {
  public:
    std::map<Rat, Rat> terms;  // exponent -> coefficient

    ExpRing() = default;
    /*implicit*/ ExpRing(const Rat& c) {
        if (c != 0) terms[Rat(0)] = c;
    }
    /*implicit*/ ExpRing(long c) : ExpRing(Rat(c)) {}

    static ExpRing exp_of(const Rat& q, const Rat& c = Rat(1)) {
        ExpRing r;
        if (c != 0) r.terms[q] = c;
        return r;
    }

    bool is_zero() const { return terms.empty(); }

    ExpRing& operator+=(const ExpRing& o) {
        for (const auto& [q, c] : o.terms) {
            Rat& slot = terms[q];
            slot += c;
            if (slot == 0) terms.erase(q);
        }
        return *this;
    }
    ExpRing& operator-=(const ExpRing& o) {
        for (const auto& [q, c] : o.terms) {
            Rat& slot = terms[q];
            slot -= c;
            if (slot == 0) terms.erase(q);
        }
        return *this;
    }
    friend ExpRing operator+(ExpRing a, const ExpRing& b) { return a += b; }
    friend ExpRing operator-(ExpRing a, const ExpRing& b) { return a -= b; }
    friend ExpRing operator-(const ExpRing& a) {
        ExpRing r;
        for (const auto& [q, c] : a.terms) r.terms[q] = -c;
        return r;
    }
    friend ExpRing operator*(const ExpRing& a, const ExpRing& b) {
        ExpRing r;
        for (const auto& [qa, ca] : a.terms)
            for (const auto& [qb, cb] : b.terms) {
                Rat& slot = r.terms[qa + qb];
                slot += ca * cb;
                if (slot == 0) r.terms.erase(qa + qb);
            }
        return r;
    }
    ExpRing& operator*=(const ExpRing& o) { return *this = *this * o; }

    friend bool operator==(const ExpRing& a, const ExpRing& b) { return a.terms == b.terms; }
    friend bool operator!=(const ExpRing& a, const ExpRing& b) { return !(a == b); }

    ExpRing div_rat(const Rat& d) const {
        ExpRing r;
        for (const auto& [q, c] : terms) r.terms[q] = c / d;
        return r;
    }

    double eval() const {
        double s = 0;
        for (const auto& [q, c] : terms) s += c.get_d() * std::exp(q.get_d());
        return s;
    }

    std::string str() const {
        if (terms.empty()) return "0";
        std::string s;
        for (const auto& [q, c] : terms) {
            if (!s.empty()) s += " + ";
            s += c.get_str();
            if (q != 0) s += "*e^(" + q.get_str() + ")";
        }
        return s;
    }
};

}  // namespace bvr
