#include "vmc/centrality.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <vector>

namespace vmc {

namespace {

std::vector<std::vector<int>> symmetrized_neighbors(const CodeGraph& g) {
    int n = g.num_lines();
    std::vector<std::vector<int>> nb(n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            if (i != j && (g.adjacent(i, j) || g.adjacent(j, i))) nb[i - 1].push_back(j - 1);
    return nb;
}

} // namespace

std::vector<double> degree_centrality(const CodeGraph& graph) {
    int n = graph.num_lines();
    std::vector<double> out(n, 0.0);
    if (n <= 1) return out;
    auto nb = symmetrized_neighbors(graph);
    for (int i = 0; i < n; ++i)
        out[i] = static_cast<double>(nb[i].size()) / static_cast<double>(n - 1);
    return out;
}

namespace {

// Iterative Tarjan SCC over the collapsed adjacency (0-based nodes).
std::vector<std::vector<int>> strongly_connected_components(const CodeGraph& g) {
    int n = g.num_lines();
    std::vector<std::vector<int>> succ(n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            if (g.adjacent(i, j)) succ[i - 1].push_back(j - 1);

    std::vector<int> index(n, -1), low(n, 0);
    std::vector<uint8_t> on_stack(n, 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> sccs;
    int counter = 0;

    struct Frame {
        int v;
        size_t child;
    };
    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<Frame> frames{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.child < succ[f.v].size()) {
                int w = succ[f.v][f.child++];
                if (index[w] == -1) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                int v = f.v;
                frames.pop_back();
                if (!frames.empty())
                    low[frames.back().v] = std::min(low[frames.back().v], low[v]);
                if (low[v] == index[v]) {
                    std::vector<int> comp;
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp.push_back(w);
                        if (w == v) break;
                    }
                    sccs.push_back(std::move(comp));
                }
            }
        }
    }
    return sccs;
}

} // namespace

double katz_alpha_bound(const CodeGraph& graph) {
    int n = graph.num_lines();
    if (n == 0) return 0.0;

    // lambda_max(A) is the max over strongly connected components. Trivial
    // components (single node, no self-loop) contribute exactly 0, which
    // also covers edgeless and acyclic graphs without any iteration. On a
    // nontrivial component A is irreducible, so A + I is primitive and
    // power iteration converges geometrically; the shift adds exactly 1.
    double best = 0.0;
    const double tol = 1e-9;
    const int max_iter = 10000;
    for (const auto& comp : strongly_connected_components(graph)) {
        if (comp.size() == 1) continue; // no self-loops in the adjacency
        int m = static_cast<int>(comp.size());
        std::vector<double> x(m, 1.0 / std::sqrt(static_cast<double>(m))), y(m);
        double lambda = 0.0, prev = -1.0;
        bool converged = false;
        for (int it = 0; it < max_iter; ++it) {
            for (int i = 0; i < m; ++i) {
                double s = x[i]; // the +I term
                for (int j = 0; j < m; ++j)
                    if (graph.adjacent(comp[i] + 1, comp[j] + 1)) s += x[j];
                y[i] = s;
            }
            double norm = 0.0;
            for (double v : y) norm += v * v;
            norm = std::sqrt(norm);
            for (int i = 0; i < m; ++i) y[i] /= norm;
            lambda = norm;
            x.swap(y);
            if (it > 0 && std::abs(lambda - prev) <= tol) {
                converged = true;
                break;
            }
            prev = lambda;
        }
        if (!converged)
            throw NonConvergence(std::abs(lambda - prev),
                                 "power iteration did not converge; residual " +
                                     std::to_string(std::abs(lambda - prev)));
        best = std::max(best, lambda - 1.0);
    }
    return best;
}

std::vector<double> katz_centrality(const CodeGraph& graph, double alpha, double beta) {
    int n = graph.num_lines();
    double lambda = katz_alpha_bound(graph);
    if (lambda > 0.0 && alpha >= 1.0 / lambda)
        throw AlphaTooLarge("alpha " + std::to_string(alpha) + " >= 1/lambda_max " +
                            std::to_string(1.0 / lambda));

    // Dense solve of (I - alpha*A^T) x = beta*1 by Gaussian elimination with
    // partial pivoting; graphs here are a few hundred lines at most.
    std::vector<double> m(static_cast<size_t>(n) * (n + 1), 0.0);
    auto at = [&](int r, int c) -> double& { return m[static_cast<size_t>(r) * (n + 1) + c]; };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double a = graph.adjacent(j + 1, i + 1) ? 1.0 : 0.0; // A^T
            at(i, j) = (i == j ? 1.0 : 0.0) - alpha * a;
        }
        at(i, n) = beta;
    }
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(at(r, col)) > std::abs(at(piv, col))) piv = r;
        if (std::abs(at(piv, col)) < 1e-12)
            throw SingularSystem("singular Katz system at column " + std::to_string(col));
        if (piv != col)
            for (int c = col; c <= n; ++c) std::swap(at(piv, c), at(col, c));
        for (int r = col + 1; r < n; ++r) {
            double f = at(r, col) / at(col, col);
            if (f == 0.0) continue;
            for (int c = col; c <= n; ++c) at(r, c) -= f * at(col, c);
        }
    }
    std::vector<double> x(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = at(r, n);
        for (int c = r + 1; c < n; ++c) s -= at(r, c) * x[c];
        x[r] = s / at(r, r);
    }
    return x;
}

std::vector<double> closeness_centrality(const CodeGraph& graph) {
    int n = graph.num_lines();
    std::vector<double> out(n, 0.0);
    if (n <= 1) return out;
    auto nb = symmetrized_neighbors(graph);
    for (int s = 0; s < n; ++s) {
        std::vector<int> dist(n, -1);
        std::deque<int> q{s};
        dist[s] = 0;
        long long total = 0;
        int reachable = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (int v : nb[u])
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    total += dist[v];
                    ++reachable;
                    q.push_back(v);
                }
        }
        if (reachable <= 1 || total == 0) continue; // isolated line
        double r = static_cast<double>(reachable);
        out[s] = ((r - 1.0) / static_cast<double>(n - 1)) * ((r - 1.0) / static_cast<double>(total));
    }
    return out;
}

std::vector<CentralityTriple> centrality_triples(const CodeGraph& graph) {
    int n = graph.num_lines();
    double lambda = katz_alpha_bound(graph);
    double alpha = lambda > 0.0 ? std::min(0.1, 0.9 / lambda) : 0.1;
    auto deg = degree_centrality(graph);
    auto katz = katz_centrality(graph, alpha, 1.0);
    auto close = closeness_centrality(graph);
    std::vector<CentralityTriple> out(n);
    for (int i = 0; i < n; ++i) out[i] = {deg[i], katz[i], close[i]};
    return out;
}

std::string centrality_csv(const std::vector<CentralityTriple>& triples) {
    std::string out = "line,degree,katz,closeness\n";
    char buf[128];
    for (size_t i = 0; i < triples.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.9f,%.9f,%.9f\n", i + 1, triples[i].degree,
                      triples[i].katz, triples[i].closeness);
        out += buf;
    }
    return out;
}

} // namespace vmc
