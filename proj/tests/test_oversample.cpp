#include <doctest.h>

#include <cmath>

#include "vmc/oversample.hpp"
#include "vmc/rand_util.hpp"

using namespace vmc;

TEST_SUITE("oversample") {

TEST_CASE("token counts: worked example and floor arithmetic") {
    CHECK(token_counts(12, 15, 2, 1) == std::pair(6, 7));
    CHECK(token_counts(0, 0, 3, 1) == std::pair(0, 0));
    CHECK(token_counts(10, 10, 5, 1) == std::pair(8, 2));
    CHECK(token_counts(10, 10, 5, 4) == std::pair(2, 8));
    CHECK_THROWS_AS(token_counts(5, 5, 4, 0), InvalidSplice);
    CHECK_THROWS_AS(token_counts(5, 5, 4, 4), InvalidSplice);
    CHECK_THROWS_AS(token_counts(5, 5, 4, 7), InvalidSplice);
}

TEST_CASE("splice golden example") {
    auto spliced = splice_lines("char * VAR1;", "char VAR2[100];", 2);
    REQUIRE(spliced.size() == 1);
    CHECK(spliced[0] == " VAR1;char VAR");
}

TEST_CASE("splice edge cases") {
    CHECK(splice_lines("anything", "else", 1).empty());
    auto empty = splice_lines("", "", 3);
    REQUIRE(empty.size() == 2);
    CHECK(empty[0] == "");
    CHECK(empty[1] == "");
}

TEST_CASE("substring fidelity at token-aligned cuts") {
    // punctuation-only strings: every character is its own run, so word
    // completion never widens a cut and the parts are pure suffix + prefix
    std::string left = "+-*/%=&|!<;";  // length 11
    std::string right = ">(){}[].,:?"; // length 11
    for (int k = 2; k <= 5; ++k) {
        auto spliced = splice_lines(left, right, k);
        for (int n = 1; n < k; ++n) {
            auto [nl, nr] = token_counts(11, 11, k, n);
            CHECK(spliced[n - 1] ==
                  left.substr(left.size() - nl) + right.substr(0, nr));
        }
    }
    // an aligned cut between letter tokens: no widening either
    auto s = splice_lines("aa bb", "cc dd", 2); // counts (2, 2)
    REQUIRE(s.size() == 1);
    CHECK(s[0] == "bbcc");
}

TEST_CASE("interpolation: midpoint, equal endpoints, quarter point") {
    CentralityTriple left{0.4, 1.2, 0.8}, right{0.2, 1.0, 0.6};
    auto mid = interpolate_centrality(left, right, 2, 1);
    CHECK(mid.degree == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(mid.katz == doctest::Approx(1.1).epsilon(1e-12));
    CHECK(mid.closeness == doctest::Approx(0.7).epsilon(1e-12));

    CentralityTriple same{0.5, 2.0, 0.25};
    for (int n = 1; n < 4; ++n) {
        auto r = interpolate_centrality(same, same, 4, n);
        CHECK(r.degree == same.degree);
        CHECK(r.katz == same.katz);
        CHECK(r.closeness == same.closeness);
    }

    auto quarter = interpolate_centrality({0.8, 0, 0}, {0.0, 0, 0}, 4, 1);
    CHECK(quarter.degree == doctest::Approx(0.6).epsilon(1e-12));

    CHECK_THROWS_AS(interpolate_centrality(left, right, 3, 3), InvalidSplice);
    CHECK_THROWS_AS(interpolate_centrality(left, right, 3, 0), InvalidSplice);
}

TEST_CASE("interpolation endpoints extend to the neighbors") {
    // n = 0 and n = k are outside the loop bounds, but the formula evaluated
    // there must give the endpoints exactly
    CentralityTriple left{0.9, 3.5, 0.1}, right{0.3, 1.5, 0.7};
    int k = 5;
    auto eval = [&](int n, double a, double b) {
        return ((k - n) * a + n * b) / static_cast<double>(k);
    };
    CHECK(eval(0, left.degree, right.degree) == left.degree);
    CHECK(eval(k, left.degree, right.degree) == right.degree);
    CHECK(eval(0, left.katz, right.katz) == left.katz);
    CHECK(eval(k, left.katz, right.katz) == right.katz);
}

TEST_CASE("oversample row counts and ordering") {
    auto model = make_hashed_model(16);
    std::vector<std::string> lines = {"int VAR1 = 0;", "VAR1 = VAR1 + 1;", "return VAR1;"};
    std::vector<std::vector<float>> vecs(3, std::vector<float>(16, 0.5f));
    std::vector<CentralityTriple> cents = {{0.1, 1.0, 0.2}, {0.2, 1.1, 0.3}, {0.3, 1.2, 0.4}};

    auto rows = oversample_function(lines, vecs, cents, 3, model);
    REQUIRE(rows.size() == 7); // L + (L-1)(k-1) = 3 + 2*2
    CHECK(rows[0].kind == RowKind::original);
    CHECK(rows[1].kind == RowKind::spliced);
    CHECK(rows[2].kind == RowKind::spliced);
    CHECK(rows[3].kind == RowKind::original);
    CHECK(rows[6].kind == RowKind::original);
    CHECK(rows[0].text == lines[0]);
    CHECK(rows[3].text == lines[1]);

    // spliced centralities interpolate their neighbors
    CHECK(rows[1].centrality.degree ==
          doctest::Approx((2.0 * 0.1 + 1.0 * 0.2) / 3.0).epsilon(1e-12));
    CHECK(rows[2].centrality.degree ==
          doctest::Approx((1.0 * 0.1 + 2.0 * 0.2) / 3.0).epsilon(1e-12));

    // k = 1 is the identity
    auto plain = oversample_function(lines, vecs, cents, 1, model);
    REQUIRE(plain.size() == 3);
    for (const auto& r : plain) CHECK(r.kind == RowKind::original);

    // single line: no adjacent pair
    auto single = oversample_function({lines[0]}, {vecs[0]}, {cents[0]}, 9, model);
    CHECK(single.size() == 1);
}

TEST_CASE("row-count law across L and k") {
    auto model = make_hashed_model(8);
    for (int L = 1; L <= 12; ++L) {
        std::vector<std::string> lines(L, "x = x + 1;");
        std::vector<std::vector<float>> vecs(L, std::vector<float>(8, 0.1f));
        std::vector<CentralityTriple> cents(L, {0.5, 1.0, 0.5});
        for (int k = 1; k <= 7; ++k) {
            auto rows = oversample_function(lines, vecs, cents, k, model);
            CHECK(static_cast<int>(rows.size()) == L + (L - 1) * (k - 1));
        }
    }
}

TEST_CASE("interpolation stays within neighbor bounds on random triples") {
    Rng rng(1357);
    for (int t = 0; t < 2000; ++t) {
        CentralityTriple a{rng.next_unit(), rng.next_uniform(0, 5), rng.next_unit()};
        CentralityTriple b{rng.next_unit(), rng.next_uniform(0, 5), rng.next_unit()};
        int k = rng.next_int(2, 8);
        int n = rng.next_int(1, k - 1);
        auto r = interpolate_centrality(a, b, k, n);
        CHECK(r.degree >= std::min(a.degree, b.degree));
        CHECK(r.degree <= std::max(a.degree, b.degree));
        CHECK(r.katz >= std::min(a.katz, b.katz));
        CHECK(r.katz <= std::max(a.katz, b.katz));
        CHECK(r.closeness >= std::min(a.closeness, b.closeness));
        CHECK(r.closeness <= std::max(a.closeness, b.closeness));
    }
}

TEST_CASE("length mismatches are rejected") {
    auto model = make_hashed_model(8);
    std::vector<std::string> lines = {"a;", "b;"};
    std::vector<std::vector<float>> vecs(1, std::vector<float>(8, 0.0f));
    std::vector<CentralityTriple> cents(2);
    CHECK_THROWS_AS(oversample_function(lines, vecs, cents, 2, model), LengthMismatch);
}

} // TEST_SUITE
