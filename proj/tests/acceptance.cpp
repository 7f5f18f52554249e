// Acceptance suite: every criterion prints one PASS/FAIL line; the process
// exits nonzero if any criterion fails. A criterion number may be passed as
// argv[1] to run just that one.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vmc/harness.hpp"
#include "vmc/oversample.hpp"
#include "vmc/parallel.hpp"

namespace fs = std::filesystem;
using namespace vmc;

namespace {

struct Checker {
    int failures = 0;
    std::string detail;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            ++failures;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

// ---- criterion 1: splicing golden example ---------------------------------

void criterion_splice_golden(Checker& c) {
    auto counts = token_counts(12, 15, 2, 1);
    c.expect(counts.first == 6, "num_left != 6");
    c.expect(counts.second == 7, "num_right != 7");
    auto spliced = splice_lines("char * VAR1;", "char VAR2[100];", 2);
    c.expect(spliced.size() == 1, "expected exactly one spliced line");
    c.expect(!spliced.empty() && spliced[0] == " VAR1;char VAR",
             "spliced text '" + (spliced.empty() ? "" : spliced[0]) + "'");
}

// ---- criterion 2: row-count law --------------------------------------------

void criterion_row_count(Checker& c) {
    auto model = make_hashed_model(16);
    for (int L = 1; L <= 50; ++L) {
        std::vector<std::string> lines;
        for (int i = 0; i < L; ++i) lines.push_back("VAR1 = VAR1 + " + std::to_string(i) + ";");
        std::vector<std::vector<float>> vecs(L, std::vector<float>(16, 0.25f));
        std::vector<CentralityTriple> cents(L, {0.5, 1.0, 0.5});
        for (int k = 1; k <= 7; ++k) {
            auto rows = oversample_function(lines, vecs, cents, k, model);
            if (static_cast<int>(rows.size()) != L + (L - 1) * (k - 1)) {
                c.expect(false, "row count mismatch at L=" + std::to_string(L) +
                                    " k=" + std::to_string(k));
                return;
            }
        }
    }
}

// ---- criterion 3: centrality oracles ---------------------------------------

void criterion_centrality(Checker& c) {
    Rng rng(424242);
    int graphs = 0;
    double worst_deg = 0, worst_close = 0, worst_fix = 0, worst_oracle = 0;
    bool alpha_enforced = false;
    while (graphs < 200) {
        auto g = oracles::random_code_graph(rng, 20);
        ++graphs;
        auto dg = oracles::Digraph::from_code_graph(g);

        auto deg = degree_centrality(g);
        auto dege = oracles::degree_oracle(dg);
        for (int i = 0; i < g.num_lines(); ++i)
            worst_deg = std::max(worst_deg, std::abs(deg[i] - dege[i]));

        auto close = closeness_centrality(g);
        auto closee = oracles::closeness_oracle(dg);
        for (int i = 0; i < g.num_lines(); ++i)
            worst_close = std::max(worst_close, std::abs(close[i] - closee[i]));

        double lambda = katz_alpha_bound(g);
        double alpha = lambda > 0.0 ? std::min(0.1, 0.9 / lambda) : 0.1;
        auto katz = katz_centrality(g, alpha, 1.0);
        // fixpoint residual of C_K = alpha*A^T*C_K + beta*1
        for (int i = 1; i <= g.num_lines(); ++i) {
            double s = 1.0;
            for (int j = 1; j <= g.num_lines(); ++j)
                if (g.adjacent(j, i)) s += alpha * katz[j - 1];
            worst_fix = std::max(worst_fix, std::abs(katz[i - 1] - s));
        }
        auto katze = oracles::katz_oracle(dg, alpha, 1.0);
        for (int i = 0; i < g.num_lines(); ++i)
            worst_oracle = std::max(worst_oracle, std::abs(katz[i] - katze[i]) /
                                                      std::max(1.0, std::abs(katze[i])));

        if (!alpha_enforced && lambda > 0.0) {
            try {
                katz_centrality(g, 1.0 / lambda + 0.1, 1.0);
            } catch (const AlphaTooLarge&) {
                alpha_enforced = true;
            }
        }
    }
    c.expect(worst_deg <= 1e-12, "degree error " + std::to_string(worst_deg));
    c.expect(worst_close <= 1e-12, "closeness error " + std::to_string(worst_close));
    c.expect(worst_fix <= 1e-9, "katz fixpoint residual " + std::to_string(worst_fix));
    c.expect(worst_oracle <= 1e-6, "katz oracle error " + std::to_string(worst_oracle));
    c.expect(alpha_enforced, "AlphaTooLarge never raised");
}

// ---- criterion 4: interpolation bounds --------------------------------------

void criterion_interpolation(Checker& c) {
    Rng rng(777777);
    for (int t = 0; t < 10000; ++t) {
        CentralityTriple a{rng.next_unit(), rng.next_uniform(0, 10), rng.next_unit()};
        CentralityTriple b{rng.next_unit(), rng.next_uniform(0, 10), rng.next_unit()};
        int k = rng.next_int(2, 9);
        int n = rng.next_int(1, k - 1);
        auto r = interpolate_centrality(a, b, k, n);
        bool ok = r.degree >= std::min(a.degree, b.degree) &&
                  r.degree <= std::max(a.degree, b.degree) &&
                  r.katz >= std::min(a.katz, b.katz) && r.katz <= std::max(a.katz, b.katz) &&
                  r.closeness >= std::min(a.closeness, b.closeness) &&
                  r.closeness <= std::max(a.closeness, b.closeness);
        if (!ok) {
            c.expect(false, "bounds violated at trial " + std::to_string(t));
            return;
        }
    }
    auto mid = interpolate_centrality({0.4, 1.2, 0.8}, {0.2, 1.0, 0.6}, 2, 1);
    c.expect(std::abs(mid.degree - 0.3) <= 1e-12, "midpoint degree");
    c.expect(std::abs(mid.katz - 1.1) <= 1e-12, "midpoint katz");
    c.expect(std::abs(mid.closeness - 0.7) <= 1e-12, "midpoint closeness");
}

// ---- criterion 5: CNN gradient check ----------------------------------------

void criterion_gradcheck(Checker& c) {
    Rng rng(5150);
    auto model = init_model(31415, 12, 8, {1, 2, 3}, 2);
    double worst = 0.0;
    for (int batch_no = 0; batch_no < 5; ++batch_no) {
        std::vector<CodeImage> images;
        std::vector<int> labels;
        for (int i = 0; i < 3; ++i) {
            images.push_back(oracles::random_image(rng, model.rows, model.dim));
            labels.push_back(static_cast<int>(rng.next_below(2)));
        }
        std::vector<const CodeImage*> ptrs;
        for (const auto& img : images) ptrs.push_back(&img);

        auto bg = loss_and_grad(model, ptrs, labels);
        const double eps = 1e-3;
        for (size_t i = 0; i < model.params.size(); ++i) {
            double saved = model.params[i];
            model.params[i] = saved + eps;
            double up = mean_loss(model, ptrs, labels);
            model.params[i] = saved - eps;
            double down = mean_loss(model, ptrs, labels);
            model.params[i] = saved;
            double fd = (up - down) / (2.0 * eps);
            double denom = std::max({std::abs(fd), std::abs(bg.grads[i]), 1e-6});
            worst = std::max(worst, std::abs(fd - bg.grads[i]) / denom);
        }
        // fresh parameters per batch so the checks are not all at one point
        model = init_model(31415 + batch_no + 1, 12, 8, {1, 2, 3}, 2);
    }
    c.expect(worst <= 1e-3, "max relative gradient error " + std::to_string(worst));
}

// ---- criterion 6: forward-pass oracle ----------------------------------------

void criterion_forward_oracle(Checker& c) {
    Rng rng(6021023);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        int rows = 12 + static_cast<int>(rng.next_below(8));
        auto model = init_model(rng.next_u64(), rows, 128);
        for (int b = 0; b < model.num_banks(); ++b)
            for (int j = 0; j < model.maps_per_bank; ++j)
                model.params[model.bias_offset(b) + j] = rng.next_uniform(-0.05, 0.05);
        auto img = oracles::random_image(rng, rows, 128);
        auto got = forward(model, img);
        auto expect = oracles::cnn_forward_oracle(model, img);
        for (int cls = 0; cls < model.num_classes; ++cls)
            worst = std::max(worst, std::abs(got.logits[cls] - expect[cls]) /
                                        std::max(1.0, std::abs(expect[cls])));
    }
    c.expect(worst <= 1e-6, "forward error " + std::to_string(worst));
}

// ---- criteria 7/8 share the 200-pair corpus -----------------------------------

std::vector<FunctionSample> the_corpus() { return generate_synthetic_corpus(200, 20240501); }

void criterion_continuity(Checker& c) {
    auto samples = the_corpus();
    std::vector<std::vector<std::string>> token_corpus;
    for (const auto& s : samples)
        for (const auto& line : s.lines) token_corpus.push_back(tokenize(line));
    EmbedTrainConfig ec;
    ec.epochs = 12;
    ec.seed = 1;
    auto embedding = train_embedding(token_corpus, ec).model;

    auto artifacts = build_artifacts(samples, default_threads());
    int improved = 0;
    std::vector<double> gap1(samples.size()), gap2(samples.size());
    parallel_for_index(samples.size(), default_threads(), [&](size_t i) {
        auto img1 = image_for_sample(samples[i], artifacts[i], embedding, 1);
        auto img2 = image_for_sample(samples[i], artifacts[i], embedding, 2);
        gap1[i] = continuity_gap_scalar(img1);
        gap2[i] = continuity_gap_scalar(img2);
    });
    for (size_t i = 0; i < samples.size(); ++i)
        if (gap2[i] < gap1[i]) ++improved;
    double fraction = static_cast<double>(improved) / static_cast<double>(samples.size());
    std::printf("  [continuity] k=2 mean gap below k=1 for %.1f%% of functions\n",
                100.0 * fraction);
    c.expect(fraction >= 0.90, "improved fraction " + std::to_string(fraction));
}

void criterion_end_to_end(Checker& c) {
    auto samples = the_corpus();
    EvalConfig cfg;
    cfg.k = 1;
    cfg.epochs = 30;
    cfg.batch_size = 32;
    cfg.learning_rate = 0.001;
    cfg.embed_mode = EmbedMode::trained;
    cfg.embed_epochs = 12;
    cfg.master_seed = 7;
    cfg.threads = default_threads();
    auto report = evaluate_kfold(samples, cfg);
    std::printf("  [end-to-end] mean test ACC %.3f%%\n", report.mean.accuracy);
    c.expect(report.mean.accuracy >= 80.0,
             "mean ACC " + std::to_string(report.mean.accuracy));
    for (size_t f = 0; f < report.folds.size(); ++f) {
        const auto& trace = report.folds[f].trace;
        if (trace.back().loss >= trace.front().loss)
            c.expect(false, "fold " + std::to_string(f + 1) + " loss did not decrease");
    }
}

// ---- criterion 9: CLI determinism ----------------------------------------------

int run_cli(const std::string& args) {
    std::string cmd = std::string(VMC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void criterion_determinism(Checker& c) {
    fs::path base = fs::temp_directory_path() / "vmc_acceptance_det";
    fs::remove_all(base);
    fs::create_directories(base);
    auto corpus = (base / "corpus").string();
    c.expect(run_cli("generate --pairs 40 --seed 11 --out " + corpus) == 0, "generate failed");

    for (int run = 1; run <= 2; ++run) {
        auto dir = (base / ("run" + std::to_string(run))).string();
        fs::create_directories(dir);
        c.expect(run_cli("pipeline --in " + corpus + " --k 2 --rows 100 --embed trained"
                         " --seed 42 --out " + dir + "/images --threads 2") == 0,
                 "pipeline run failed");
        c.expect(run_cli("train --images " + dir + "/images --folds 5 --epochs 3 --batch 32"
                         " --lr 0.001 --seed 42 --report " + dir + "/report.csv"
                         " --threads 2") == 0,
                 "train run failed");
    }
    auto r1 = slurp(base / "run1" / "report.csv");
    auto r2 = slurp(base / "run2" / "report.csv");
    c.expect(!r1.empty(), "empty report");
    c.expect(r1 == r2, "reports differ between identical runs");
    // the per-epoch traces must agree too
    for (int f = 1; f <= 5; ++f) {
        auto t1 = slurp(base / "run1" / ("report_trace_fold" + std::to_string(f) + ".csv"));
        auto t2 = slurp(base / "run2" / ("report_trace_fold" + std::to_string(f) + ".csv"));
        c.expect(!t1.empty() && t1 == t2, "trace fold " + std::to_string(f) + " differs");
    }
    fs::remove_all(base);
}

// ---- criterion 10: metrics arithmetic --------------------------------------------

void criterion_metrics(Checker& c) {
    auto m = compute_metrics({90, 20, 80, 10});
    auto close3 = [](double got, double want) { return std::abs(got - want) < 5e-4; };
    c.expect(close3(m.fpr, 20.000), "FPR " + std::to_string(m.fpr));
    c.expect(close3(m.fnr, 10.000), "FNR " + std::to_string(m.fnr));
    c.expect(close3(m.precision, 81.818), "Pr " + std::to_string(m.precision));
    c.expect(close3(m.recall, 90.000), "Re " + std::to_string(m.recall));
    c.expect(close3(m.f1, 85.714), "F1 " + std::to_string(m.f1));
    c.expect(close3(m.accuracy, 85.000), "ACC " + std::to_string(m.accuracy));
}

struct Criterion {
    int number;
    const char* name;
    std::function<void(Checker&)> run;
};

} // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> criteria = {
        {1, "splicing golden example", criterion_splice_golden},
        {2, "row-count law", criterion_row_count},
        {3, "centrality oracles", criterion_centrality},
        {4, "interpolation bounds", criterion_interpolation},
        {5, "CNN gradient check", criterion_gradcheck},
        {6, "forward-pass oracle", criterion_forward_oracle},
        {7, "continuity improvement", criterion_continuity},
        {8, "end-to-end learning", criterion_end_to_end},
        {9, "pipeline+train determinism", criterion_determinism},
        {10, "metrics arithmetic", criterion_metrics},
    };

    int only = argc > 1 ? std::atoi(argv[1]) : 0;
    int failed = 0;
    for (auto& crit : criteria) {
        if (only != 0 && crit.number != only) continue;
        Checker checker;
        auto t0 = std::chrono::steady_clock::now();
        try {
            crit.run(checker);
        } catch (const std::exception& e) {
            checker.expect(false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (checker.failures == 0) {
            std::printf("PASS  criterion %2d  %-28s (%.1fs)\n", crit.number, crit.name, secs);
        } else {
            ++failed;
            std::printf("FAIL  criterion %2d  %-28s (%.1fs): %s\n", crit.number, crit.name,
                        secs, checker.detail.c_str());
        }
        std::fflush(stdout);
    }
    if (failed != 0) std::printf("%d criterion(s) failed\n", failed);
    return failed == 0 ? 0 : 1;
}
