#include "vmc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "vmc/centrality.hpp"
#include "vmc/cpg.hpp"
#include "vmc/oversample.hpp"
#include "vmc/parallel.hpp"
#include "vmc/rand_util.hpp"

namespace fs = std::filesystem;

namespace vmc {

// --- synthetic corpus -------------------------------------------------------

namespace {

struct TemplateParts {
    std::string params;
    std::vector<std::string> decls;
    std::vector<std::string> core_vulnerable;
    std::vector<std::string> core_safe;
    std::string return_expr;
};

class PairBuilder {
public:
    PairBuilder(Rng& rng) : rng_(rng) {}

    std::string fresh(const char* base) {
        return std::string(base) + std::to_string(rng_.next_int(1, 97)) +
               std::to_string(++counter_);
    }

    TemplateParts make_template(int which) {
        TemplateParts t;
        switch (which) {
        case 0: { // off-by-one index guard
            std::string idx = fresh("idx"), val = fresh("val"), buf = fresh("buf"),
                        ok = fresh("ok");
            t.params = "int " + idx + ", int " + val;
            t.decls = {"char " + buf + "[64];", "int " + ok + " = 0;"};
            t.core_vulnerable = {"if (" + idx + " <= 64) {",
                                 "    " + buf + "[" + idx + "] = " + val + ";",
                                 "    " + ok + " = 1;", "}"};
            t.core_safe = t.core_vulnerable;
            t.core_safe[0] = "if (" + idx + " < 64) {";
            t.return_expr = ok;
            break;
        }
        case 1: { // off-by-one loop bound
            std::string src = fresh("src"), dst = fresh("dst"), i = fresh("i");
            t.params = "char * " + src;
            t.decls = {"char " + dst + "[50];", "int " + i + " = 0;"};
            t.core_vulnerable = {"for (" + i + " = 0; " + i + " <= 50; " + i + " = " + i +
                                     " + 1) {",
                                 "    " + dst + "[" + i + "] = " + src + "[" + i + "];", "}"};
            t.core_safe = t.core_vulnerable;
            t.core_safe[0] =
                "for (" + i + " = 0; " + i + " < 50; " + i + " = " + i + " + 1) {";
            t.return_expr = i;
            break;
        }
        case 2: { // unchecked copy length
            std::string src = fresh("src"), len = fresh("len"), dst = fresh("dst"),
                        done = fresh("done");
            t.params = "char * " + src + ", int " + len;
            t.decls = {"char " + dst + "[128];", "int " + done + " = 0;"};
            t.core_vulnerable = {"memcpy(" + dst + ", " + src + ", " + len + ");",
                                 done + " = 1;"};
            t.core_safe = {"if (" + len + " < 128) {",
                           "    memcpy(" + dst + ", " + src + ", " + len + ");",
                           "    " + done + " = 1;", "}"};
            t.return_expr = done;
            break;
        }
        case 3: { // missing null check before use
            std::string ptr = fresh("ptr"), len = fresh("len");
            t.params = "char * " + ptr;
            t.decls = {"int " + len + " = 0;"};
            t.core_vulnerable = {len + " = strlen(" + ptr + ");"};
            t.core_safe = {"if (" + ptr + " == 0) {", "    return -1;", "}",
                           len + " = strlen(" + ptr + ");"};
            t.return_expr = len;
            break;
        }
        case 4: { // format string
            std::string msg = fresh("msg"), n = fresh("n");
            t.params = "char * " + msg;
            t.decls = {"int " + n + " = 1;"};
            t.core_vulnerable = {"printf(" + msg + ");", n + " = " + n + " + 1;"};
            t.core_safe = {"printf(\"%s\", " + msg + ");", n + " = " + n + " + 1;"};
            t.return_expr = n;
            break;
        }
        default: { // unbounded strcpy
            std::string input = fresh("input"), buf = fresh("buf");
            t.params = "char * " + input;
            t.decls = {"char " + buf + "[32];"};
            t.core_vulnerable = {"strcpy(" + buf + ", " + input + ");"};
            t.core_safe = {"strncpy(" + buf + ", " + input + ", 31);",
                           buf + "[31] = 0;"};
            t.return_expr = "0";
            break;
        }
        }
        return t;
    }

    // Filler statements over two scratch variables; `salt` varies constants
    // so adjacent lines never repeat verbatim.
    std::vector<std::string> filler(const std::string& a, const std::string& b, int count) {
        std::vector<std::string> out;
        while (static_cast<int>(out.size()) < count) {
            int remaining = count - static_cast<int>(out.size());
            int kind = rng_.next_int(0, remaining >= 3 ? 5 : 3);
            int c1 = rng_.next_int(2, 9), c2 = rng_.next_int(10, 99);
            switch (kind) {
            case 0: out.push_back(a + " = " + a + " + " + std::to_string(c1) + ";"); break;
            case 1: out.push_back(b + " = " + b + " * 2 + " + std::to_string(c1) + ";"); break;
            case 2: out.push_back(a + " = " + a + " ^ " + std::to_string(c2) + ";"); break;
            case 3: out.push_back(b + " = " + b + " % " + std::to_string(c2 + 1) + " + " + a + ";"); break;
            case 4:
                out.push_back("if (" + a + " > " + std::to_string(c2) + ") {");
                out.push_back("    " + b + " = " + b + " - " + std::to_string(c1) + ";");
                out.push_back("}");
                break;
            default:
                out.push_back("while (" + b + " > " + std::to_string(c2 + 100) + ") {");
                out.push_back("    " + b + " = " + b + " - " + std::to_string(c1 + 1) + ";");
                out.push_back("}");
                break;
            }
        }
        return out;
    }

private:
    Rng& rng_;
    int counter_ = 0;
};

std::string assemble_function(const std::string& name, const TemplateParts& t,
                              const std::vector<std::string>& decls_extra,
                              const std::vector<std::string>& fill_before,
                              const std::vector<std::string>& fill_after,
                              const std::vector<std::string>& core) {
    std::string out = "int " + name + "(" + t.params + ") {\n";
    for (const auto& d : t.decls) out += "    " + d + "\n";
    for (const auto& d : decls_extra) out += "    " + d + "\n";
    for (const auto& l : fill_before) out += "    " + l + "\n";
    for (const auto& l : core) out += "    " + l + "\n";
    for (const auto& l : fill_after) out += "    " + l + "\n";
    out += "    return " + t.return_expr + ";\n";
    out += "}\n";
    return out;
}

} // namespace

std::vector<CorpusPair> generate_corpus_pairs(int num_pairs, uint64_t seed) {
    std::vector<CorpusPair> out;
    out.reserve(num_pairs);
    static const char* kNames[] = {"process_input", "copy_block", "parse_record",
                                   "handle_packet", "read_field",  "update_entry"};
    for (int p = 0; p < num_pairs; ++p) {
        Rng rng(derive_seed(seed, "corpus-pair", static_cast<uint64_t>(p)));
        PairBuilder builder(rng);
        TemplateParts t = builder.make_template(p % 6);
        std::string a = builder.fresh("acc"), b = builder.fresh("tmp");
        std::vector<std::string> decls_extra = {
            "int " + a + " = " + std::to_string(rng.next_int(1, 40)) + ";",
            "int " + b + " = " + std::to_string(rng.next_int(41, 90)) + ";"};

        int fixed = 1 /*sig*/ + static_cast<int>(t.decls.size() + decls_extra.size()) +
                    static_cast<int>(t.core_vulnerable.size()) + 2 /*return + close*/;
        int target = rng.next_int(12, 56);
        int filler_total = std::max(0, target - fixed);
        int before = filler_total == 0 ? 0 : rng.next_int(0, filler_total);
        auto fill_before = builder.filler(a, b, before);
        auto fill_after = builder.filler(a, b, filler_total - before);

        std::string name = std::string(kNames[p % 6]) + "_" + std::to_string(p + 1);
        CorpusPair pair;
        pair.source_vulnerable = assemble_function(name, t, decls_extra, fill_before,
                                                   fill_after, t.core_vulnerable);
        pair.source_safe =
            assemble_function(name, t, decls_extra, fill_before, fill_after, t.core_safe);
        out.push_back(std::move(pair));
    }
    return out;
}

std::vector<FunctionSample> generate_synthetic_corpus(int num_pairs, uint64_t seed) {
    auto pairs = generate_corpus_pairs(num_pairs, seed);
    std::vector<FunctionSample> out;
    out.reserve(2 * pairs.size());
    char idbuf[32];
    for (size_t p = 0; p < pairs.size(); ++p) {
        auto handle = [&](const std::string& src, Label label, const char* side) {
            auto samples = extract_functions(src, "synthetic");
            if (samples.size() != 1) throw PipelineError("template produced != 1 function");
            samples[0].label = label;
            auto norm = normalize(samples[0]);
            std::snprintf(idbuf, sizeof(idbuf), "pair%05zu_%s", p + 1, side);
            norm.id = idbuf;
            out.push_back(std::move(norm));
        };
        handle(pairs[p].source_vulnerable, Label::vulnerable, "vuln");
        handle(pairs[p].source_safe, Label::safe, "safe");
    }
    return out;
}

void write_corpus_tree(const std::vector<CorpusPair>& pairs, const std::string& out_dir) {
    fs::create_directories(fs::path(out_dir) / "vulnerable");
    fs::create_directories(fs::path(out_dir) / "safe");
    char name[32];
    for (size_t p = 0; p < pairs.size(); ++p) {
        std::snprintf(name, sizeof(name), "pair_%05zu.c", p + 1);
        std::ofstream(fs::path(out_dir) / "vulnerable" / name) << pairs[p].source_vulnerable;
        std::ofstream(fs::path(out_dir) / "safe" / name) << pairs[p].source_safe;
    }
}

// --- folds and metrics ------------------------------------------------------

FoldSplit kfold_split(const std::vector<FunctionSample>& dataset, int num_folds,
                      uint64_t seed) {
    if (static_cast<int>(dataset.size()) < num_folds)
        throw TooFewSamples("dataset of " + std::to_string(dataset.size()) + " < " +
                            std::to_string(num_folds) + " folds");
    FoldSplit split;
    split.num_folds = num_folds;
    split.seed = seed;

    std::vector<std::string> by_class[3];
    for (const auto& s : dataset) by_class[static_cast<int>(s.label)].push_back(s.id);

    Rng rng(seed);
    int next_fold = 0;
    for (auto& ids : by_class) {
        std::sort(ids.begin(), ids.end());
        rng.shuffle(ids);
        for (auto& id : ids) {
            split.assignments[id] = next_fold;
            next_fold = (next_fold + 1) % num_folds;
        }
    }
    return split;
}

Metrics compute_metrics(const Confusion& c) {
    if (c.total() == 0) throw EmptyConfusion("empty confusion matrix");
    Metrics m;
    m.confusion = c;
    auto ratio = [&](double num, double den) {
        if (den == 0.0) {
            m.had_undefined_ratio = true;
            return 0.0;
        }
        return 100.0 * num / den;
    };
    m.fpr = ratio(static_cast<double>(c.fp), static_cast<double>(c.fp + c.tn));
    m.fnr = ratio(static_cast<double>(c.fn), static_cast<double>(c.fn + c.tp));
    m.precision = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
    m.recall = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    else {
        m.f1 = 0.0;
        m.had_undefined_ratio = true;
    }
    m.accuracy = ratio(static_cast<double>(c.tp + c.tn), static_cast<double>(c.total()));
    return m;
}

// --- image building ----------------------------------------------------------

std::vector<SampleArtifacts> build_artifacts(const std::vector<FunctionSample>& samples,
                                             unsigned threads) {
    std::vector<SampleArtifacts> out(samples.size());
    parallel_for_index(samples.size(), threads, [&](size_t i) {
        CodeGraph graph = build_cpg(samples[i]);
        out[i].centralities = centrality_triples(graph);
    });
    return out;
}

CodeImage image_for_sample(const FunctionSample& sample, const SampleArtifacts& artifacts,
                           const EmbeddingModel& embedding, int k) {
    std::vector<std::vector<float>> vectors(sample.lines.size());
    for (size_t i = 0; i < sample.lines.size(); ++i)
        vectors[i] = embed_sentence(embedding, sample.lines[i]);
    auto rows = oversample_function(sample.lines, vectors, artifacts.centralities, k, embedding);
    return build_image(rows, k, sample.id, sample.label, embedding.dim);
}

std::vector<CodeImage> build_images(const std::vector<FunctionSample>& samples,
                                    const std::vector<SampleArtifacts>& artifacts,
                                    const EmbeddingModel& embedding, int k, unsigned threads) {
    if (samples.size() != artifacts.size()) throw LengthMismatch("samples/artifacts mismatch");
    std::vector<CodeImage> out(samples.size());
    parallel_for_index(samples.size(), threads, [&](size_t i) {
        out[i] = image_for_sample(samples[i], artifacts[i], embedding, k);
    });
    return out;
}

// --- evaluation protocol -------------------------------------------------------

namespace {

int label_to_class(Label l) {
    if (l == Label::unlabeled) throw PipelineError("unlabeled sample in evaluation dataset");
    return l == Label::vulnerable ? 1 : 0;
}

std::vector<std::vector<std::string>> tokenized_lines(const std::vector<FunctionSample>& samples,
                                                      const std::vector<size_t>& idx) {
    std::vector<std::vector<std::string>> corpus;
    for (size_t i : idx)
        for (const auto& line : samples[i].lines) corpus.push_back(tokenize(line));
    return corpus;
}

} // namespace

KfoldReport evaluate_kfold(const std::vector<FunctionSample>& all_samples,
                           const EvalConfig& config) {
    auto samples = filter_short(all_samples, config.min_lines);
    if (samples.empty()) throw TooFewSamples("no samples after length filter");

    auto artifacts = build_artifacts(samples, config.threads);
    auto split = kfold_split(samples, config.num_folds,
                             derive_seed(config.master_seed, "kfold"));

    KfoldReport report;
    Confusion total;
    for (int fold = 0; fold < config.num_folds; ++fold) {
        std::vector<size_t> train_idx, test_idx;
        for (size_t i = 0; i < samples.size(); ++i)
            (split.assignments.at(samples[i].id) == fold ? test_idx : train_idx).push_back(i);

        FoldResult result;
        for (size_t i : train_idx) result.train_ids.insert(samples[i].id);
        for (size_t i : test_idx) result.test_ids.insert(samples[i].id);

        EmbeddingModel embedding;
        if (config.embed_mode == EmbedMode::trained) {
            EmbedTrainConfig ec;
            ec.epochs = config.embed_epochs;
            ec.seed = derive_seed(config.master_seed, "embed", static_cast<uint64_t>(fold));
            embedding = train_embedding(tokenized_lines(samples, train_idx), ec).model;
            result.embed_train_ids = result.train_ids;
        } else {
            embedding = make_hashed_model();
        }
        for (const auto& id : result.embed_train_ids)
            if (result.test_ids.count(id))
                throw PipelineError("fold leakage: embedding saw test sample " + id);

        auto subset = [&](const std::vector<size_t>& idx) {
            std::vector<FunctionSample> ss;
            std::vector<SampleArtifacts> aa;
            ss.reserve(idx.size());
            aa.reserve(idx.size());
            for (size_t i : idx) {
                ss.push_back(samples[i]);
                aa.push_back(artifacts[i]);
            }
            return std::pair(std::move(ss), std::move(aa));
        };
        auto [train_samples, train_art] = subset(train_idx);
        auto [test_samples, test_art] = subset(test_idx);

        auto train_images =
            build_images(train_samples, train_art, embedding, config.k, config.threads);
        auto test_images =
            build_images(test_samples, test_art, embedding, config.k, config.threads);

        std::vector<const CodeImage*> train_ptrs;
        std::vector<int> train_labels;
        for (const auto& img : train_images) {
            train_ptrs.push_back(&img);
            train_labels.push_back(label_to_class(img.label));
        }

        CnnModel model = init_model(
            derive_seed(config.master_seed, "cnn", static_cast<uint64_t>(fold)),
            row_threshold(config.k), embedding.dim);
        TrainConfig tc;
        tc.batch_size = config.batch_size;
        tc.learning_rate = config.learning_rate;
        tc.epochs = config.epochs;
        tc.threads = config.threads;
        if (config.vulnerable_class_weight != 1.0)
            tc.class_weights = {1.0, config.vulnerable_class_weight};
        result.trace = train(model, train_ptrs, train_labels, tc,
                             derive_seed(config.master_seed, "shuffle",
                                         static_cast<uint64_t>(fold)));

        Confusion c;
        for (const auto& img : test_images) {
            int truth = label_to_class(img.label);
            int pred = predict(model, img).label == Label::vulnerable ? 1 : 0;
            if (truth == 1 && pred == 1) ++c.tp;
            else if (truth == 0 && pred == 1) ++c.fp;
            else if (truth == 0 && pred == 0) ++c.tn;
            else ++c.fn;
        }
        result.metrics = compute_metrics(c);
        total.tp += c.tp;
        total.fp += c.fp;
        total.tn += c.tn;
        total.fn += c.fn;
        report.folds.push_back(std::move(result));
    }

    Metrics mean;
    mean.confusion = total;
    for (const auto& f : report.folds) {
        mean.fpr += f.metrics.fpr;
        mean.fnr += f.metrics.fnr;
        mean.precision += f.metrics.precision;
        mean.recall += f.metrics.recall;
        mean.f1 += f.metrics.f1;
        mean.accuracy += f.metrics.accuracy;
        mean.had_undefined_ratio |= f.metrics.had_undefined_ratio;
    }
    double n = static_cast<double>(report.folds.size());
    mean.fpr /= n;
    mean.fnr /= n;
    mean.precision /= n;
    mean.recall /= n;
    mean.f1 /= n;
    mean.accuracy /= n;
    report.mean = mean;
    return report;
}

std::vector<KsweepRow> run_ksweep(const std::vector<FunctionSample>& samples,
                                  const std::vector<int>& k_values, EvalConfig config) {
    if (k_values.empty()) throw PipelineError("empty k list");
    std::vector<KsweepRow> rows;
    for (int k : k_values) {
        config.k = k;
        rows.push_back({k, evaluate_kfold(samples, config).mean});
    }
    return rows;
}

RepeatResult run_repeated(const std::vector<FunctionSample>& samples, int repeats,
                          EvalConfig config) {
    if (repeats < 2) throw PipelineError("repeats must be >= 2");
    RepeatResult result;
    uint64_t master = config.master_seed;
    for (int r = 0; r < repeats; ++r) {
        config.master_seed = derive_seed(master, "repeat", static_cast<uint64_t>(r));
        auto report = evaluate_kfold(samples, config);
        double mean = 0.0;
        for (const auto& f : report.folds) mean += f.metrics.accuracy;
        mean /= static_cast<double>(report.folds.size());
        double var = 0.0;
        for (const auto& f : report.folds) {
            double d = f.metrics.accuracy - mean;
            var += d * d;
        }
        var /= std::max<size_t>(1, report.folds.size() - 1);
        result.per_repeat_mean_acc.push_back(mean);
        result.per_repeat_std_acc.push_back(std::sqrt(var));
    }
    double mean = std::accumulate(result.per_repeat_mean_acc.begin(),
                                  result.per_repeat_mean_acc.end(), 0.0) /
                  static_cast<double>(repeats);
    double var = 0.0;
    for (double a : result.per_repeat_mean_acc) var += (a - mean) * (a - mean);
    var /= std::max(1, repeats - 1);
    result.overall_mean = mean;
    result.overall_std = std::sqrt(var);
    return result;
}

// --- report formatting ------------------------------------------------------

std::string metrics_csv_header() { return "fold,TP,FP,TN,FN,FPR,FNR,Pr,Re,F1,ACC\n"; }

std::string metrics_csv_row(const std::string& tag, const Metrics& m) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%ld,%ld,%ld,%ld,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f\n",
                  tag.c_str(), m.confusion.tp, m.confusion.fp, m.confusion.tn, m.confusion.fn,
                  m.fpr, m.fnr, m.precision, m.recall, m.f1, m.accuracy);
    return buf;
}

std::string ksweep_csv(const std::vector<KsweepRow>& rows) {
    std::string out = "k,FPR,FNR,Pr,Re,F1,ACC\n";
    char buf[192];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f\n", r.k, r.mean.fpr,
                      r.mean.fnr, r.mean.precision, r.mean.recall, r.mean.f1, r.mean.accuracy);
        out += buf;
    }
    return out;
}

std::string repeat_csv(const RepeatResult& r) {
    std::string out = "repeat,mean_acc,std_acc\n";
    char buf[128];
    for (size_t i = 0; i < r.per_repeat_mean_acc.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.3f,%.3f\n", i + 1, r.per_repeat_mean_acc[i],
                      r.per_repeat_std_acc[i]);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "overall,%.3f,%.3f\n", r.overall_mean, r.overall_std);
    out += buf;
    return out;
}

std::string trace_csv(const std::vector<EpochStat>& trace) {
    std::string out = "epoch,loss,train_acc\n";
    char buf[128];
    for (size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.3f\n", i + 1, trace[i].loss,
                      100.0 * trace[i].train_accuracy);
        out += buf;
    }
    return out;
}

} // namespace vmc
