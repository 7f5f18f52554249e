#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vmc/cnn.hpp"
#include "vmc/common.hpp"
#include "vmc/embed.hpp"
#include "vmc/imagegen.hpp"
#include "vmc/ingest.hpp"

namespace vmc {

// --- synthetic corpus ---------------------------------------------------

struct CorpusPair {
    std::string source_vulnerable; // raw source text, one function each
    std::string source_safe;
};

// Template-based paired functions (off-by-one bounds, unchecked copies,
// missing null checks, ...). Each function is 10..60 lines; the two sides
// of a pair differ in 1..4 lines.
std::vector<CorpusPair> generate_corpus_pairs(int num_pairs, uint64_t seed);

// Same corpus as extracted + normalized samples, labels assigned.
std::vector<FunctionSample> generate_synthetic_corpus(int num_pairs, uint64_t seed);

// Writes out/vulnerable/pair_NNNNN.c and out/safe/pair_NNNNN.c.
void write_corpus_tree(const std::vector<CorpusPair>& pairs, const std::string& out_dir);

// --- folds and metrics ----------------------------------------------------

struct FoldSplit {
    int num_folds = 5;
    uint64_t seed = 0;
    std::map<std::string, int> assignments; // sample id -> fold
};

// Label-stratified seeded split; folds partition the ids and differ in size
// by at most one.
FoldSplit kfold_split(const std::vector<FunctionSample>& dataset, int num_folds, uint64_t seed);

struct Confusion {
    long tp = 0, fp = 0, tn = 0, fn = 0;
    long total() const { return tp + fp + tn + fn; }
};

struct Metrics {
    double fpr = 0, fnr = 0, precision = 0, recall = 0, f1 = 0, accuracy = 0; // percentages
    Confusion confusion;
    bool had_undefined_ratio = false; // some denominator was zero
};

Metrics compute_metrics(const Confusion& confusion);

// --- evaluation protocol --------------------------------------------------

struct EvalConfig {
    int k = 5;                 // splice factor
    int num_folds = 5;
    int epochs = 100;
    int batch_size = 32;
    double learning_rate = 0.001;
    EmbedMode embed_mode = EmbedMode::trained;
    int embed_epochs = 12;
    uint64_t master_seed = 1;
    unsigned threads = 1;
    int min_lines = 10;
    double vulnerable_class_weight = 1.0; // 1.0 = no reweighting
};

struct FoldResult {
    Metrics metrics;
    std::vector<EpochStat> trace;
    std::set<std::string> train_ids;
    std::set<std::string> test_ids;
    std::set<std::string> embed_train_ids; // ids whose lines trained the embedding
};

struct KfoldReport {
    std::vector<FoldResult> folds;
    Metrics mean; // metric fields averaged over folds; confusion summed
};

// Per-fold protocol: train the embedding on the training fold only (trained
// mode), build images for train and test with it, train the CNN, evaluate.
// Everything is derived from the master seed.
KfoldReport evaluate_kfold(const std::vector<FunctionSample>& samples, const EvalConfig& config);

// Full pipeline re-run per k; rows mirror the k-sweep table columns.
struct KsweepRow {
    int k;
    Metrics mean;
};
std::vector<KsweepRow> run_ksweep(const std::vector<FunctionSample>& samples,
                                  const std::vector<int>& k_values, EvalConfig config);

struct RepeatResult {
    std::vector<double> per_repeat_mean_acc;
    std::vector<double> per_repeat_std_acc; // std of fold ACCs within a repeat
    double overall_mean = 0.0;
    double overall_std = 0.0; // std of the per-repeat means
};
RepeatResult run_repeated(const std::vector<FunctionSample>& samples, int repeats,
                          EvalConfig config);

// --- image building (shared by CLI and evaluation) -------------------------

struct SampleArtifacts {
    std::vector<CentralityTriple> centralities; // per line
};

// Graph + centrality for every sample (fold independent), parallel over
// samples, ordered by input index.
std::vector<SampleArtifacts> build_artifacts(const std::vector<FunctionSample>& samples,
                                             unsigned threads);

CodeImage image_for_sample(const FunctionSample& sample, const SampleArtifacts& artifacts,
                           const EmbeddingModel& embedding, int k);

std::vector<CodeImage> build_images(const std::vector<FunctionSample>& samples,
                                    const std::vector<SampleArtifacts>& artifacts,
                                    const EmbeddingModel& embedding, int k, unsigned threads);

// --- report formatting ------------------------------------------------------

std::string metrics_csv_header();                 // fold,TP,... header
std::string metrics_csv_row(const std::string& tag, const Metrics& m);
std::string ksweep_csv(const std::vector<KsweepRow>& rows); // k,FPR,FNR,Pr,Re,F1,ACC
std::string repeat_csv(const RepeatResult& r);
std::string trace_csv(const std::vector<EpochStat>& trace); // epoch,loss,train_acc

} // namespace vmc
