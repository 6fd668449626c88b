#pragma once

// Brute-force reference implementations. Deliberately naive and written
// without calling into the library's own graph algorithms.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

enum class St { P, R, C, F };
enum class Ty { Uncond, Success, Cond };

struct Edge {
    int from, to;
    Ty type;
    bool cond_value;  // predicate outcome for Cond edges
};

struct Graph {
    int n = 0;
    std::vector<Edge> edges;
    std::vector<St> st;
};

inline bool terminal(St s) { return s == St::C || s == St::F; }

// Ready predicate taken directly from its definition, one task at a time.
inline bool is_ready(const Graph& g, int t) {
    if (g.st[t] != St::P) return false;
    for (const auto& e : g.edges) {
        if (e.to != t) continue;
        St u = g.st[e.from];
        bool sat = false;
        switch (e.type) {
            case Ty::Uncond:  sat = terminal(u); break;
            case Ty::Success: sat = u == St::C; break;
            case Ty::Cond:    sat = terminal(u) && e.cond_value; break;
        }
        if (!sat) return false;
    }
    return true;
}

inline std::vector<int> ready_set(const Graph& g) {
    std::vector<int> out;
    for (int t = 0; t < g.n; ++t)
        if (is_ready(g, t)) out.push_back(t);
    return out;
}

// Random DAG: edges only go from lower to higher index in a random permutation.
inline Graph random_dag(std::mt19937_64& rng, int max_nodes, double p_edge = 0.35) {
    Graph g;
    g.n = std::uniform_int_distribution<int>(0, max_nodes)(rng);
    std::vector<int> perm(g.n);
    for (int i = 0; i < g.n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (u(rng) < p_edge) {
                Ty ty = static_cast<Ty>(std::uniform_int_distribution<int>(0, 2)(rng));
                g.edges.push_back({perm[i], perm[j], ty, u(rng) < 0.5});
            }
    g.st.assign(g.n, St::P);
    return g;
}

// Random status assignment that is reachable: a task is non-PENDING only if
// it could have been ready at some point (all upstream edges satisfied).
inline void random_reachable_statuses(Graph& g, std::mt19937_64& rng) {
    // Walk in a topological order derived from repeated scanning.
    std::vector<bool> placed(g.n, false);
    std::uniform_int_distribution<int> pick(0, 3);
    for (int round = 0; round < g.n; ++round) {
        for (int t = 0; t < g.n; ++t) {
            if (placed[t]) continue;
            bool preds_placed = true;
            for (const auto& e : g.edges)
                if (e.to == t && !placed[e.from]) preds_placed = false;
            if (!preds_placed) continue;
            placed[t] = true;
            if (is_ready(g, t)) {
                int k = pick(rng);
                g.st[t] = k == 0 ? St::P : k == 1 ? St::R : k == 2 ? St::C : St::F;
            } else {
                g.st[t] = St::P;
            }
        }
    }
}

inline bool has_cycle(int n, const std::vector<std::pair<int, int>>& edges) {
    // Reachability by repeated relaxation; a cycle exists iff some node reaches itself.
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    for (auto [a, b] : edges) r[a][b] = true;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (r[i][k] && r[k][j]) r[i][j] = true;
    for (int i = 0; i < n; ++i)
        if (r[i][i]) return true;
    return false;
}

// Longest duration-weighted path by enumerating every simple path.
inline double longest_path(int n, const std::vector<std::pair<int, int>>& edges, const std::vector<double>& dur) {
    double best = 0;
    std::function<void(int, double)> walk = [&](int v, double acc) {
        acc += dur[v];
        best = std::max(best, acc);
        for (auto [a, b] : edges)
            if (a == v) walk(b, acc);
    };
    for (int v = 0; v < n; ++v) walk(v, 0);
    return best;
}

// Infinite-device list schedule: each task starts when its last predecessor
// ends. Returns the peak number of tasks running at once, with [start, end)
// intervals; zero-length tasks never count as running.
inline int list_schedule_width(int n, const std::vector<std::pair<int, int>>& edges, const std::vector<double>& dur) {
    std::vector<double> start(n, 0), end(n, 0);
    std::vector<bool> done(n, false);
    for (int round = 0; round < n; ++round) {
        for (int v = 0; v < n; ++v) {
            if (done[v]) continue;
            bool ok = true;
            double s = 0;
            for (auto [a, b] : edges)
                if (b == v) {
                    if (!done[a]) ok = false;
                    else s = std::max(s, end[a]);
                }
            if (!ok) continue;
            start[v] = s;
            end[v] = s + dur[v];
            done[v] = true;
        }
    }
    int peak = 0;
    for (int v = 0; v < n; ++v) {
        if (dur[v] <= 0) continue;
        // Concurrency at the instant each task starts.
        int c = 0;
        for (int w = 0; w < n; ++w)
            if (dur[w] > 0 && start[w] <= start[v] && start[v] < end[w]) ++c;
        peak = std::max(peak, c);
    }
    return peak;
}

}  // namespace oracle

namespace oracle {

// Explores every future status evolution (ready -> R, R -> C|F) and reports
// whether task t is ever ready.
inline bool can_ever_be_ready(const Graph& g0, int t) {
    std::set<std::vector<St>> seen;
    std::vector<Graph> work{g0};
    while (!work.empty()) {
        Graph g = work.back();
        work.pop_back();
        if (!seen.insert(g.st).second) continue;
        if (is_ready(g, t)) return true;
        for (int v = 0; v < g.n; ++v) {
            if (is_ready(g, v)) {
                Graph n = g;
                n.st[v] = St::R;
                work.push_back(n);
            } else if (g.st[v] == St::R) {
                for (St s : {St::C, St::F}) {
                    Graph n = g;
                    n.st[v] = s;
                    work.push_back(n);
                }
            }
        }
    }
    return false;
}

// Quiescent: nothing running and no PENDING task can ever become ready.
inline bool quiescent(const Graph& g) {
    for (int v = 0; v < g.n; ++v)
        if (g.st[v] == St::R) return false;
    for (int v = 0; v < g.n; ++v)
        if (g.st[v] == St::P && can_ever_be_ready(g, v)) return false;
    return true;
}

}  // namespace oracle
