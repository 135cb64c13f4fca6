#pragma once
#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bvr/rational.hpp"

namespace bvr {

struct VertexType {
    int hbar = 0;
    int valence = 0;
    friend auto operator<=>(const VertexType&, const VertexType&) = default;
};

// Connected multigraph with hbar-graded vertices, parallel edges, loops and
// external legs.  mult[u][v] is the number of edges between u and v (u != v);
// mult[v][v] counts loops at v (each loop uses two half edges).
struct FeynmanGraph {
    std::vector<VertexType> type;
    std::vector<std::vector<int>> mult;
    std::vector<int> legs;
    long aut = 1;  // |Aut|, filled by enumerate_graphs

    int n_vertices() const { return int(type.size()); }
    int n_edges() const {
        int e = 0;
        for (int u = 0; u < n_vertices(); ++u) {
            e += mult[size_t(u)][size_t(u)];
            for (int v = u + 1; v < n_vertices(); ++v) e += mult[size_t(u)][size_t(v)];
        }
        return e;
    }
    int n_legs() const { return std::accumulate(legs.begin(), legs.end(), 0); }
    int first_betti() const { return n_edges() - n_vertices() + 1; }
    int genus() const {
        int g = first_betti();
        for (const auto& t : type) g += t.hbar;
        return g;
    }
    // Explicit edge list; loops appear as (v,v).
    std::vector<std::pair<int, int>> edge_list() const {
        std::vector<std::pair<int, int>> es;
        for (int u = 0; u < n_vertices(); ++u) {
            for (int l = 0; l < mult[size_t(u)][size_t(u)]; ++l) es.push_back({u, u});
            for (int v = u + 1; v < n_vertices(); ++v)
                for (int m = 0; m < mult[size_t(u)][size_t(v)]; ++m) es.push_back({u, v});
        }
        return es;
    }
    bool connected() const {
        int V = n_vertices();
        std::vector<int> seen(size_t(V), 0);
        std::vector<int> stack = {0};
        seen[0] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < V; ++v)
                if (v != u && mult[size_t(u)][size_t(v)] > 0 && !seen[size_t(v)]) {
                    seen[size_t(v)] = 1;
                    stack.push_back(v);
                }
        }
        return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
    }

    std::string encode_with(const std::vector<int>& perm) const {
        // perm[new] = old
        std::string s;
        int V = n_vertices();
        for (int i = 0; i < V; ++i) {
            int o = perm[size_t(i)];
            s += std::to_string(type[size_t(o)].hbar) + "," + std::to_string(type[size_t(o)].valence) +
                 "," + std::to_string(legs[size_t(o)]) + ";";
        }
        for (int i = 0; i < V; ++i)
            for (int j = i; j < V; ++j)
                s += std::to_string(mult[size_t(perm[size_t(i)])][size_t(perm[size_t(j)])]) + ",";
        return s;
    }

    // Iterated colour refinement: isomorphism-invariant vertex classes.
    std::vector<int> refined_colors() const {
        int V = n_vertices();
        std::vector<int> color(size_t(V), 0);
        {
            std::vector<std::tuple<int, int, int, int>> key0{static_cast<size_t>(V)};
            for (int v = 0; v < V; ++v)
                key0[size_t(v)] = {type[size_t(v)].hbar, type[size_t(v)].valence, legs[size_t(v)],
                                   mult[size_t(v)][size_t(v)]};
            auto sorted = key0;
            std::sort(sorted.begin(), sorted.end());
            sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
            for (int v = 0; v < V; ++v)
                color[size_t(v)] =
                    int(std::lower_bound(sorted.begin(), sorted.end(), key0[size_t(v)]) - sorted.begin());
        }
        for (int round = 0; round < V; ++round) {
            std::vector<std::pair<int, std::vector<std::pair<int, int>>>> sig{static_cast<size_t>(V)};
            for (int v = 0; v < V; ++v) {
                sig[size_t(v)].first = color[size_t(v)];
                for (int u = 0; u < V; ++u)
                    if (u != v && mult[size_t(v)][size_t(u)] > 0)
                        sig[size_t(v)].second.push_back({color[size_t(u)], mult[size_t(v)][size_t(u)]});
                std::sort(sig[size_t(v)].second.begin(), sig[size_t(v)].second.end());
            }
            auto sorted = sig;
            std::sort(sorted.begin(), sorted.end());
            sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
            std::vector<int> nc(static_cast<size_t>(V));
            for (int v = 0; v < V; ++v)
                nc[size_t(v)] =
                    int(std::lower_bound(sorted.begin(), sorted.end(), sig[size_t(v)]) - sorted.begin());
            if (nc == color) break;
            color = nc;
        }
        return color;
    }

    // Canonical string over vertex permutations preserving the refined colour
    // classes; counts the permutations attaining the canonical labelling and
    // finishes the automorphism count with edge and loop symmetries.
    std::string canonicalize() {
        int V = n_vertices();
        std::vector<int> color = refined_colors();
        std::vector<int> base(static_cast<size_t>(V));
        std::iota(base.begin(), base.end(), 0);
        std::sort(base.begin(), base.end(),
                  [&](int a, int b) { return color[size_t(a)] < color[size_t(b)]; });
        std::vector<std::pair<int, int>> blocks;
        for (int s = 0; s < V;) {
            int e = s;
            while (e < V && color[size_t(base[size_t(s)])] == color[size_t(base[size_t(e)])]) ++e;
            blocks.push_back({s, e});
            s = e;
        }
        std::vector<int> cur = base;
        std::string best = encode_with(base);
        long stab = 0;
        struct Rec {
            std::vector<std::pair<int, int>>& blocks;
            std::vector<int>& cur;
            FeynmanGraph& g;
            std::string& best;
            long& stab;
            void go(size_t b) {
                if (b == blocks.size()) {
                    std::string e = g.encode_with(cur);
                    if (e < best) {
                        best = e;
                        stab = 1;
                    } else if (e == best) {
                        ++stab;
                    }
                    return;
                }
                auto [s, eend] = blocks[b];
                std::sort(cur.begin() + s, cur.begin() + eend);
                do {
                    go(b + 1);
                } while (std::next_permutation(cur.begin() + s, cur.begin() + eend));
            }
        } rec{blocks, cur, *this, best, stab};
        rec.go(0);
        long a = stab;
        for (int u = 0; u < V; ++u) {
            int l = mult[size_t(u)][size_t(u)];
            for (int q = 0; q < l; ++q) a *= 2;
            for (int q = 2; q <= l; ++q) a *= q;
            for (int v = u + 1; v < V; ++v)
                for (int q = 2; q <= mult[size_t(u)][size_t(v)]; ++q) a *= q;
        }
        aut = a;
        return best;
    }

    // Spec'd edge-list text format: "v i deg; e a b; l a".
    std::string serialize() const {
        std::string s;
        for (const auto& t : type)
            s += "v " + std::to_string(t.hbar) + " " + std::to_string(t.valence) + "; ";
        for (auto [u, v] : edge_list()) s += "e " + std::to_string(u) + " " + std::to_string(v) + "; ";
        for (int v = 0; v < n_vertices(); ++v)
            for (int l = 0; l < legs[size_t(v)]; ++l) s += "l " + std::to_string(v) + "; ";
        if (!s.empty()) s.pop_back();
        return s;
    }

    static FeynmanGraph parse(const std::string& text) {
        FeynmanGraph g;
        std::istringstream in(text);
        std::string stmt;
        std::vector<std::pair<int, int>> edges;
        std::vector<int> leg_at;
        while (std::getline(in, stmt, ';')) {
            std::istringstream ss(stmt);
            std::string tag;
            if (!(ss >> tag)) continue;
            if (tag == "v") {
                VertexType t;
                ss >> t.hbar >> t.valence;
                g.type.push_back(t);
            } else if (tag == "e") {
                int a, b;
                ss >> a >> b;
                edges.push_back({a, b});
            } else if (tag == "l") {
                int a;
                ss >> a;
                leg_at.push_back(a);
            } else {
                throw std::invalid_argument("FeynmanGraph::parse: bad statement '" + stmt + "'");
            }
        }
        int V = g.n_vertices();
        g.mult.assign(size_t(V), std::vector<int>(size_t(V), 0));
        g.legs.assign(size_t(V), 0);
        for (auto [a, b] : edges) {
            if (a == b)
                g.mult[size_t(a)][size_t(a)] += 1;
            else {
                g.mult[size_t(a)][size_t(b)] += 1;
                g.mult[size_t(b)][size_t(a)] += 1;
            }
        }
        for (int a : leg_at) g.legs[size_t(a)] += 1;
        return g;
    }
};

// All connected graphs with genus i and k legs over the given vertex menu,
// duplicate-free up to isomorphism, with exact |Aut|.
inline std::vector<FeynmanGraph> enumerate_graphs(int i, int k, std::vector<VertexType> menu) {
    for (const auto& t : menu)
        if (t.hbar == 0 && t.valence < 3)
            throw std::invalid_argument("enumerate_graphs: degree-0 vertices must have valence >= 3");
    std::sort(menu.begin(), menu.end());
    menu.erase(std::unique(menu.begin(), menu.end()), menu.end());
    std::map<std::string, FeynmanGraph> found;

    int Vmax = 5 * i + k + 2;
    std::vector<VertexType> pick;
    // choose a non-decreasing multiset of menu entries, then fill edges
    struct Ctx {
        int i, k;
        const std::vector<VertexType>& menu;
        std::map<std::string, FeynmanGraph>& found;
        int E_target = 0;

        void fill_edges(std::vector<VertexType>& vt) {
            int V = int(vt.size());
            int sum_val = 0, sum_h = 0;
            for (auto& t : vt) sum_val += t.valence, sum_h += t.hbar;
            int b1 = i - sum_h;
            if (b1 < 0) return;
            int E = V - 1 + b1;
            if (E < 0) return;
            if (sum_val != 2 * E + k) return;
            E_target = E;
            FeynmanGraph g;
            g.type = vt;
            g.mult.assign(size_t(V), std::vector<int>(size_t(V), 0));
            g.legs.assign(size_t(V), 0);
            std::vector<int> cap(static_cast<size_t>(V));
            for (int v = 0; v < V; ++v) cap[size_t(v)] = vt[size_t(v)].valence;
            rec_vertex(g, cap, 0, 0, 0);
        }

        void rec_vertex(FeynmanGraph& g, std::vector<int>& cap, int v, int edges, int legs_sum) {
            int V = g.n_vertices();
            if (v == V) {
                if (legs_sum != k || edges != E_target) return;
                if (!g.connected()) return;
                if (g.genus() != i) return;
                FeynmanGraph gg = g;
                std::string key = gg.canonicalize();
                found.emplace(key, gg);
                return;
            }
            // feasibility: remaining capacities must account for the edges and
            // legs still to be placed
            long rem = 0;
            for (int u = v; u < V; ++u) rem += cap[size_t(u)];
            if (rem != 2l * (E_target - edges) + (k - legs_sum)) return;
            for (int l = 0; 2 * l <= cap[size_t(v)]; ++l) {
                g.mult[size_t(v)][size_t(v)] = l;
                int save = cap[size_t(v)];
                cap[size_t(v)] -= 2 * l;
                rec_cross(g, cap, v, v + 1, edges + l, legs_sum);
                cap[size_t(v)] = save;
            }
            g.mult[size_t(v)][size_t(v)] = 0;
        }
        void rec_cross(FeynmanGraph& g, std::vector<int>& cap, int v, int u, int edges,
                       int legs_sum) {
            int V = g.n_vertices();
            if (edges > E_target) return;
            if (u == V) {
                g.legs[size_t(v)] = cap[size_t(v)];
                int new_legs = legs_sum + cap[size_t(v)];
                if (new_legs <= k) {
                    int save = cap[size_t(v)];
                    cap[size_t(v)] = 0;
                    rec_vertex(g, cap, v + 1, edges, new_legs);
                    cap[size_t(v)] = save;
                }
                g.legs[size_t(v)] = 0;
                return;
            }
            int maxm = std::min(cap[size_t(v)], cap[size_t(u)]);
            for (int m = 0; m <= maxm; ++m) {
                g.mult[size_t(v)][size_t(u)] = m;
                g.mult[size_t(u)][size_t(v)] = m;
                cap[size_t(v)] -= m;
                cap[size_t(u)] -= m;
                rec_cross(g, cap, v, u + 1, edges + m, legs_sum);
                cap[size_t(v)] += m;
                cap[size_t(u)] += m;
            }
            g.mult[size_t(v)][size_t(u)] = 0;
            g.mult[size_t(u)][size_t(v)] = 0;
        }
    } ctx{i, k, menu, found, 0};

    // multisets of vertex types
    std::vector<VertexType> vt;
    struct Pick {
        Ctx& ctx;
        const std::vector<VertexType>& menu;
        int Vmax;
        void go(std::vector<VertexType>& vt, size_t from) {
            if (!vt.empty()) ctx.fill_edges(vt);
            if (int(vt.size()) >= Vmax) return;
            for (size_t m = from; m < menu.size(); ++m) {
                vt.push_back(menu[m]);
                go(vt, m);
                vt.pop_back();
            }
        }
    } pick_rec{ctx, menu, Vmax};
    pick_rec.go(vt, 0);

    std::vector<FeynmanGraph> out;
    for (auto& [key, g] : found) out.push_back(g);
    return out;
}

}  // namespace bvr
