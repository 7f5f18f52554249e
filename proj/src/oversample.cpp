#include "vmc/oversample.hpp"

#include <algorithm>
#include <cctype>

namespace vmc {

namespace {

// Character classes for cut widening: a maximal run of letters (or '_') or
// of digits must not be cut in the middle. Runs change class between the
// alphabetic and numeric part of an identifier like VAR2, so widening stops
// where the letters end.
enum class RunClass { letters, digits, other };

RunClass run_class(char c) {
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return RunClass::letters;
    if (std::isdigit(static_cast<unsigned char>(c))) return RunClass::digits;
    return RunClass::other;
}

bool inside_run(const std::string& s, size_t cut) {
    if (cut == 0 || cut >= s.size()) return false;
    RunClass a = run_class(s[cut - 1]);
    if (a == RunClass::other) return false;
    return a == run_class(s[cut]);
}

} // namespace

std::pair<int, int> token_counts(int left_length, int right_length, int k, int n) {
    if (k < 2 || n < 1 || n >= k)
        throw InvalidSplice("splice step n=" + std::to_string(n) + " outside [1," +
                            std::to_string(k) + ")");
    if (left_length < 0 || right_length < 0) throw InvalidSplice("negative line length");
    int num_left = static_cast<int>((static_cast<long long>(left_length) * (k - n)) / k);
    int num_right = static_cast<int>((static_cast<long long>(right_length) * n) / k);
    return {num_left, num_right};
}

std::vector<std::string> splice_lines(const std::string& line_i, const std::string& line_i1,
                                      int k) {
    std::vector<std::string> out;
    if (k <= 1) return out;
    int left_length = static_cast<int>(line_i.size());
    int right_length = static_cast<int>(line_i1.size());
    for (int n = 1; n < k; ++n) {
        auto [num_left, num_right] = token_counts(left_length, right_length, k, n);

        // left part: trailing num_left characters; widen leftward if the cut
        // falls inside a run
        size_t lcut = line_i.size() - static_cast<size_t>(num_left);
        while (lcut > 0 && inside_run(line_i, lcut)) --lcut;

        // right part: leading num_right characters; widen rightward
        size_t rcut = static_cast<size_t>(num_right);
        while (rcut < line_i1.size() && inside_run(line_i1, rcut)) ++rcut;

        out.push_back(line_i.substr(lcut) + line_i1.substr(0, rcut));
    }
    return out;
}

CentralityTriple interpolate_centrality(const CentralityTriple& left,
                                        const CentralityTriple& right, int k, int n) {
    if (k < 2 || n < 1 || n >= k)
        throw InvalidSplice("splice step n=" + std::to_string(n) + " outside [1," +
                            std::to_string(k) + ")");
    double wl = static_cast<double>(k - n);
    double wr = static_cast<double>(n);
    auto mix = [&](double a, double b) {
        double v = (wl * a + wr * b) / static_cast<double>(k);
        return std::clamp(v, std::min(a, b), std::max(a, b));
    };
    return {mix(left.degree, right.degree), mix(left.katz, right.katz),
            mix(left.closeness, right.closeness)};
}

std::vector<Row> oversample_function(const std::vector<std::string>& lines,
                                     const std::vector<std::vector<float>>& vectors,
                                     const std::vector<CentralityTriple>& centralities, int k,
                                     const EmbeddingModel& embed) {
    size_t n = lines.size();
    if (vectors.size() != n || centralities.size() != n)
        throw LengthMismatch("lines/vectors/centralities lengths differ: " + std::to_string(n) +
                             "/" + std::to_string(vectors.size()) + "/" +
                             std::to_string(centralities.size()));
    if (n == 0) throw LengthMismatch("empty function");
    if (k < 1) throw InvalidSplice("k must be >= 1");

    std::vector<Row> out;
    out.reserve(n + (n - 1) * static_cast<size_t>(k - 1));
    for (size_t i = 0; i < n; ++i) {
        out.push_back({lines[i], vectors[i], centralities[i], RowKind::original});
        if (i + 1 == n || k == 1) continue;
        auto texts = splice_lines(lines[i], lines[i + 1], k);
        for (int step = 1; step < k; ++step) {
            Row r;
            r.text = texts[step - 1];
            r.vector = embed_sentence(embed, r.text);
            r.centrality = interpolate_centrality(centralities[i], centralities[i + 1], k, step);
            r.kind = RowKind::spliced;
            out.push_back(std::move(r));
        }
    }
    return out;
}

} // namespace vmc
