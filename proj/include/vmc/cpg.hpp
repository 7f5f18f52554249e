#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vmc/common.hpp"
#include "vmc/ingest.hpp"

namespace vmc {

enum class EdgeKind : uint8_t { AST = 0, CFG = 1, CDG = 2, DDG = 3 };

const char* edge_kind_name(EdgeKind k);

struct GraphEdge {
    int src; // 1-based line numbers
    int dst;
    EdgeKind kind;

    friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
    friend auto operator<=>(const GraphEdge&, const GraphEdge&) = default;
};

// Line-granularity code property graph of one function. Nodes are the lines
// 1..L; the adjacency matrix collapses all edge kinds and drops self-loops.
class CodeGraph {
public:
    CodeGraph() = default;
    CodeGraph(int num_lines, std::vector<GraphEdge> edges);

    int num_lines() const { return num_lines_; }
    const std::vector<GraphEdge>& edges() const { return edges_; }

    bool adjacent(int src, int dst) const { return adj_[idx(src, dst)] != 0; }

    // Row-major L*L binary matrix; entry (i, j) is adjacent(i+1, j+1).
    const std::vector<uint8_t>& adjacency() const { return adj_; }

    // Debug/test dump: one "src kind dst" line per edge, sorted.
    std::string dump_edges() const;

private:
    size_t idx(int src, int dst) const {
        return static_cast<size_t>(src - 1) * num_lines_ + (dst - 1);
    }

    int num_lines_ = 0;
    std::vector<GraphEdge> edges_;
    std::vector<uint8_t> adj_;
};

// Builds the combined graph for one normalized function:
//   CFG  statement sequencing and structured branch/loop flow
//   CDG  branch line -> controlled lines, via post-dominance on the CFG
//   DDG  definition line -> use line, via reaching definitions on the CFG
//   AST  block-opening line -> lines directly inside its block
// Unstructured control flow (goto, switch, do-while) is rejected with
// MalformedControlStructure.
CodeGraph build_cpg(const FunctionSample& sample);

// The statement-level CFG including the virtual exit node (num_lines + 1),
// exposed for the post-dominance and reaching-definition test oracles.
// succ is indexed by line (1-based; index 0 unused).
struct StatementCfg {
    int exit_node = 0;
    std::vector<std::vector<int>> succ;
};
StatementCfg build_statement_cfg(const FunctionSample& sample);

struct DegreeProfile {
    int in_degree;
    int out_degree;
    int degree; // in + out on the collapsed adjacency
};

std::vector<DegreeProfile> degree_profile(const CodeGraph& graph);

// The per-line def/use classification the DDG is built from; exposed so
// tests can check the "written at i, read at j" invariant independently.
struct LineDefUse {
    std::vector<std::string> defs;
    std::vector<std::string> uses;
};
LineDefUse line_def_use(const std::string& line);

} // namespace vmc
