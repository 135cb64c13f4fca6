#pragma once
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace bvr {

// Variables of the functional algebra.  Field variables are coordinates on
// the odd symplectic space and are the ones kernels contract; auxiliary
// variables (the interval parameter t, its differential dt, odd parameters
// like delta) carry homotopy/obstruction bookkeeping and do not count
// towards the polynomial degree k.
enum class VarKind : std::uint8_t { Field, Aux };

struct VarInfo {
    std::string name;
    bool odd = false;
    VarKind kind = VarKind::Field;
    int cap = 0;  // max exponent for even aux vars; 0 = uncapped; odd vars are capped at 1
};

class VarTable {
  public:
    std::vector<VarInfo> vars;
    int n_field = 0;

    static std::shared_ptr<VarTable> fields(const std::vector<VarInfo>& fs) {
        auto t = std::make_shared<VarTable>();
        t->vars = fs;
        t->n_field = int(fs.size());
        for (auto& v : t->vars) v.kind = VarKind::Field;
        return t;
    }

    // Returns the index of the new auxiliary variable.
    int add_aux(const std::string& name, bool odd, int cap = 0) {
        vars.push_back(VarInfo{name, odd, VarKind::Aux, cap});
        return int(vars.size()) - 1;
    }

    int size() const { return int(vars.size()); }
    bool odd(int v) const { return vars[size_t(v)].odd; }
    int find(const std::string& name) const {
        for (int i = 0; i < size(); ++i)
            if (vars[size_t(i)].name == name) return i;
        throw std::invalid_argument("VarTable: unknown variable " + name);
    }
};

// Exponent vector, one byte per variable, canonical order = table order.
using Mono = std::string;

inline Mono mono_unit(const VarTable& t) { return Mono(size_t(t.size()), char(0)); }

inline Mono mono_var(const VarTable& t, int v) {
    Mono m = mono_unit(t);
    m[size_t(v)] = 1;
    return m;
}

inline int mono_parity(const VarTable& t, const Mono& m) {
    int p = 0;
    for (int v = 0; v < t.size(); ++v)
        if (t.odd(v)) p += m[size_t(v)];
    return p & 1;
}

inline int mono_field_degree(const VarTable& t, const Mono& m) {
    int d = 0;
    for (int v = 0; v < t.n_field; ++v) d += m[size_t(v)];
    return d;
}

inline int mono_total_degree(const Mono& m) {
    int d = 0;
    for (char c : m) d += c;
    return d;
}

// Graded product of canonical monomials.  Returns false when the product is
// zero (odd variable squared) or violates an even-aux cap.  sign is +1/-1.
inline bool mono_mul(const VarTable& t, const Mono& a, const Mono& b, Mono& out, int& sign) {
    int n = t.size();
    sign = 1;
    out.assign(size_t(n), char(0));
    // Koszul sign: each odd factor of b at position w moves left past every
    // odd factor of a at position v > w.
    int swaps = 0;
    int odd_a_above = 0;  // running count of a's odd exponents with index > w
    // precompute suffix counts of a's odd exponents
    std::vector<int> suffix(size_t(n) + 1, 0);
    for (int v = n - 1; v >= 0; --v)
        suffix[size_t(v)] = suffix[size_t(v) + 1] + (t.odd(v) ? a[size_t(v)] : 0);
    (void)odd_a_above;
    for (int w = 0; w < n; ++w) {
        if (t.odd(w) && b[size_t(w)]) swaps += suffix[size_t(w) + 1];
        int e = a[size_t(w)] + b[size_t(w)];
        if (t.odd(w) && e > 1) return false;
        const VarInfo& vi = t.vars[size_t(w)];
        if (!vi.odd && vi.cap > 0 && e > vi.cap) return false;
        if (e > 120) throw std::overflow_error("mono_mul: exponent overflow");
        out[size_t(w)] = char(e);
    }
    if (swaps & 1) sign = -1;
    return true;
}

struct MonoDeriv {
    bool nonzero = false;
    int sign = 1;
    long mult = 0;
    Mono m;
};

// Graded left partial derivative with respect to variable v.
inline MonoDeriv mono_derive(const VarTable& t, const Mono& m, int v) {
    MonoDeriv d;
    if (m[size_t(v)] == 0) return d;
    d.nonzero = true;
    d.mult = m[size_t(v)];
    d.m = m;
    d.m[size_t(v)] = char(m[size_t(v)] - 1);
    if (t.odd(v)) {
        int left = 0;
        for (int w = 0; w < v; ++w)
            if (t.odd(w)) left += m[size_t(w)];
        d.sign = (left & 1) ? -1 : 1;
    }
    return d;
}

inline std::string mono_str(const VarTable& t, const Mono& m) {
    std::string s;
    for (int v = 0; v < t.size(); ++v) {
        int e = m[size_t(v)];
        if (!e) continue;
        if (!s.empty()) s += "*";
        s += t.vars[size_t(v)].name;
        if (e > 1) s += "^" + std::to_string(e);
    }
    return s.empty() ? "1" : s;
}

inline Mono mono_parse(const VarTable& t, const std::string& s) {
    Mono m = mono_unit(t);
    if (s == "1") return m;
    size_t pos = 0;
    while (pos < s.size()) {
        size_t star = s.find('*', pos);
        std::string fac = s.substr(pos, star == std::string::npos ? std::string::npos : star - pos);
        pos = star == std::string::npos ? s.size() : star + 1;
        size_t caret = fac.find('^');
        std::string name = caret == std::string::npos ? fac : fac.substr(0, caret);
        int e = caret == std::string::npos ? 1 : std::stoi(fac.substr(caret + 1));
        int v = t.find(name);
        m[size_t(v)] = char(m[size_t(v)] + e);
    }
    return m;
}

}  // namespace bvr
