#pragma once

#include <string>
#include <vector>

#include "vmc/common.hpp"
#include "vmc/cpg.hpp"

namespace vmc {

struct CentralityTriple {
    double degree = 0.0;    // deg(v)/(N-1) on the symmetrized graph
    double katz = 0.0;      // fixpoint of x = alpha*A^T*x + beta*1
    double closeness = 0.0; // (N-1)/sum_j d(v,j), component-scaled
};

// deg(v)/(N-1) per line on the symmetrized adjacency; 0 for N == 1.
std::vector<double> degree_centrality(const CodeGraph& graph);

// Largest eigenvalue of the (directed) adjacency matrix by power iteration
// on A + I, tolerance 1e-9, at most 10000 iterations. 0 for edgeless graphs.
// Throws NonConvergence with the residual if iteration fails to settle.
double katz_alpha_bound(const CodeGraph& graph);

// Solves (I - alpha*A^T) x = beta*1 directly. Requires alpha*lambda_max < 1
// (AlphaTooLarge otherwise). A_ij follows the "j points into i" convention,
// so a line inherits score from the lines pointing at it.
std::vector<double> katz_centrality(const CodeGraph& graph, double alpha, double beta = 1.0);

// BFS distances on the symmetrized graph. Disconnected graphs use the
// component-scaled form ((r-1)/(N-1)) * ((r-1)/sum d); isolated lines get 0.
std::vector<double> closeness_centrality(const CodeGraph& graph);

// Default alpha = min(0.1, 0.9/lambda_max), beta = 1.
std::vector<CentralityTriple> centrality_triples(const CodeGraph& graph);

// CSV dump (line,degree,katz,closeness), 9 decimals, for test snapshots.
std::string centrality_csv(const std::vector<CentralityTriple>& triples);

} // namespace vmc
