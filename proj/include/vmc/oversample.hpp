#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vmc/centrality.hpp"
#include "vmc/common.hpp"
#include "vmc/embed.hpp"

namespace vmc {

enum class RowKind : uint8_t { original, spliced };

// One pixel row of the eventual image: a (possibly spliced) line of text,
// its embedding and its centrality triple.
struct Row {
    std::string text;
    std::vector<float> vector;
    CentralityTriple centrality;
    RowKind kind = RowKind::original;
};

// Character counts taken from the two neighbor lines for splice step n of k:
// floor(left_length*(k-n)/k) trailing characters of line i and
// floor(right_length*n/k) leading characters of line i+1. Spaces count.
std::pair<int, int> token_counts(int left_length, int right_length, int k, int n);

// The k-1 spliced texts between two adjacent lines. A cut that lands inside
// a character run (letters or digits) is widened outward to the end of that
// run; runs break between letters and digits.
std::vector<std::string> splice_lines(const std::string& line_i, const std::string& line_i1,
                                      int k);

// Componentwise convex combination ((k-n)/k)*left + (n/k)*right.
CentralityTriple interpolate_centrality(const CentralityTriple& left,
                                        const CentralityTriple& right, int k, int n);

// Interleaves original rows with their k-1 spliced rows. Spliced rows are
// embedded fresh from the spliced text; their centralities interpolate the
// neighbors'. Output length is L + (L-1)(k-1).
std::vector<Row> oversample_function(const std::vector<std::string>& lines,
                                     const std::vector<std::vector<float>>& vectors,
                                     const std::vector<CentralityTriple>& centralities, int k,
                                     const EmbeddingModel& embed);

} // namespace vmc
