// Command-line front end for the code-image vulnerability detection
// pipeline: corpus generation, image building, k-fold training, the k-sweep
// study and the repeated-runs error-bar study.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "vmc/harness.hpp"
#include "vmc/parallel.hpp"
#include "vmc/rand_util.hpp"

namespace fs = std::filesystem;
using namespace vmc;

namespace {

std::string sanitize_id(const std::string& id) {
    std::string out;
    for (char c : id)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw PipelineError("cannot write " + path);
    os << text;
}

struct LabeledId {
    std::string id;
    Label label;
};

// Stratified fold assignment over bare (id, label) pairs; mirrors
// kfold_split but without requiring full samples.
std::map<std::string, int> fold_ids(const std::vector<LabeledId>& items, int folds,
                                    uint64_t seed) {
    std::vector<FunctionSample> shim(items.size());
    for (size_t i = 0; i < items.size(); ++i) {
        shim[i].id = items[i].id;
        shim[i].label = items[i].label;
    }
    return kfold_split(shim, folds, seed).assignments;
}

int cmd_generate(int pairs, uint64_t seed, const std::string& out) {
    auto corpus = generate_corpus_pairs(pairs, seed);
    write_corpus_tree(corpus, out);
    std::cout << "wrote " << 2 * corpus.size() << " functions (" << corpus.size()
              << " vulnerable/safe pairs) under " << out << "\n";
    return 0;
}

int cmd_pipeline(const std::string& in, int k, int rows, const std::string& embed_mode,
                 uint64_t seed, const std::string& out, unsigned threads, int min_lines) {
    if (rows != 100)
        throw PipelineError("the image geometry is fixed at 100*k rows; --rows must be 100");

    auto samples = filter_short(load_corpus(in), min_lines);
    if (samples.empty()) throw PipelineError("no samples of >= " + std::to_string(min_lines) +
                                             " lines under " + in);
    std::cout << "loaded " << samples.size() << " function samples\n";

    fs::create_directories(out);
    write_text((fs::path(out) / "samples.jsonl").string(), samples_to_jsonl(samples));

    EmbeddingModel embedding;
    if (embed_mode == "trained") {
        std::vector<std::vector<std::string>> corpus;
        for (const auto& s : samples)
            for (const auto& line : s.lines) corpus.push_back(tokenize(line));
        EmbedTrainConfig ec;
        ec.seed = derive_seed(seed, "embed-global");
        embedding = train_embedding(corpus, ec).model;
    } else if (embed_mode == "hashed") {
        embedding = make_hashed_model();
    } else {
        throw PipelineError("--embed must be trained or hashed");
    }
    save_embedding(embedding, (fs::path(out) / "embedding.vmcemb").string());

    auto artifacts = build_artifacts(samples, threads);
    auto images = build_images(samples, artifacts, embedding, k, threads);
    char suffix[16];
    for (size_t i = 0; i < images.size(); ++i) {
        std::snprintf(suffix, sizeof(suffix), "_%05zu", i);
        save_image(images[i],
                   (fs::path(out) / (sanitize_id(images[i].id) + suffix + ".img")).string());
    }
    std::cout << "wrote " << images.size() << " images (3x" << row_threshold(k) << "x"
              << embedding.dim << ") to " << out << "\n";
    return 0;
}

int cmd_train(const std::string& images_dir, int folds, int epochs, int batch, double lr,
              uint64_t seed, const std::string& report, unsigned threads,
              const std::string& save_model_path, double vuln_weight) {
    std::vector<fs::path> files;
    for (auto& e : fs::directory_iterator(images_dir))
        if (e.is_regular_file() && e.path().extension() == ".img") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw PipelineError("no .img files under " + images_dir);

    std::vector<CodeImage> images;
    images.reserve(files.size());
    for (const auto& f : files) images.push_back(load_image(f.string()));

    std::vector<LabeledId> ids;
    for (const auto& img : images) {
        if (img.label == Label::unlabeled)
            throw PipelineError("unlabeled image " + img.id + " cannot be trained on");
        ids.push_back({img.id, img.label});
    }
    auto assignment = fold_ids(ids, folds, derive_seed(seed, "kfold"));

    std::string csv = metrics_csv_header();
    Confusion total;
    double acc_sum = 0, fpr_sum = 0, fnr_sum = 0, pr_sum = 0, re_sum = 0, f1_sum = 0;
    fs::path report_path(report);
    std::string stem = (report_path.parent_path() / report_path.stem()).string();

    for (int fold = 0; fold < folds; ++fold) {
        std::vector<const CodeImage*> train_ptrs, test_ptrs;
        std::vector<int> train_labels, test_labels;
        for (const auto& img : images) {
            bool test = assignment.at(img.id) == fold;
            int cls = img.label == Label::vulnerable ? 1 : 0;
            if (test) {
                test_ptrs.push_back(&img);
                test_labels.push_back(cls);
            } else {
                train_ptrs.push_back(&img);
                train_labels.push_back(cls);
            }
        }
        CnnModel model = init_model(derive_seed(seed, "cnn", static_cast<uint64_t>(fold)),
                                    images[0].rows, images[0].dim);
        TrainConfig tc;
        tc.batch_size = batch;
        tc.learning_rate = lr;
        tc.epochs = epochs;
        tc.threads = threads;
        if (vuln_weight != 1.0) tc.class_weights = {1.0, vuln_weight};
        auto trace = train(model, train_ptrs, train_labels, tc,
                           derive_seed(seed, "shuffle", static_cast<uint64_t>(fold)));
        write_text(stem + "_trace_fold" + std::to_string(fold + 1) + ".csv", trace_csv(trace));

        Confusion c;
        for (size_t i = 0; i < test_ptrs.size(); ++i) {
            int pred = predict(model, *test_ptrs[i]).label == Label::vulnerable ? 1 : 0;
            if (test_labels[i] == 1 && pred == 1) ++c.tp;
            else if (test_labels[i] == 0 && pred == 1) ++c.fp;
            else if (test_labels[i] == 0 && pred == 0) ++c.tn;
            else ++c.fn;
        }
        auto m = compute_metrics(c);
        csv += metrics_csv_row(std::to_string(fold + 1), m);
        std::cout << "fold " << fold + 1 << ": ACC " << m.accuracy << "% F1 " << m.f1 << "%\n";
        total.tp += c.tp;
        total.fp += c.fp;
        total.tn += c.tn;
        total.fn += c.fn;
        acc_sum += m.accuracy;
        fpr_sum += m.fpr;
        fnr_sum += m.fnr;
        pr_sum += m.precision;
        re_sum += m.recall;
        f1_sum += m.f1;
    }
    Metrics mean;
    mean.confusion = total;
    double n = folds;
    mean.fpr = fpr_sum / n;
    mean.fnr = fnr_sum / n;
    mean.precision = pr_sum / n;
    mean.recall = re_sum / n;
    mean.f1 = f1_sum / n;
    mean.accuracy = acc_sum / n;
    csv += metrics_csv_row("mean", mean);
    write_text(report, csv);
    std::cout << "mean ACC " << mean.accuracy << "% -> " << report << "\n";

    if (!save_model_path.empty()) {
        std::vector<const CodeImage*> all_ptrs;
        std::vector<int> all_labels;
        for (const auto& img : images) {
            all_ptrs.push_back(&img);
            all_labels.push_back(img.label == Label::vulnerable ? 1 : 0);
        }
        CnnModel final_model =
            init_model(derive_seed(seed, "cnn-final"), images[0].rows, images[0].dim);
        TrainConfig tc;
        tc.batch_size = batch;
        tc.learning_rate = lr;
        tc.epochs = epochs;
        tc.threads = threads;
        if (vuln_weight != 1.0) tc.class_weights = {1.0, vuln_weight};
        train(final_model, all_ptrs, all_labels, tc, derive_seed(seed, "shuffle-final"));
        save_model(final_model, save_model_path);
        std::cout << "saved full-data model to " << save_model_path << "\n";
    }
    return 0;
}

EvalConfig eval_config(int k, int folds, int epochs, int batch, double lr,
                       const std::string& embed_mode, int embed_epochs, uint64_t seed,
                       unsigned threads) {
    EvalConfig cfg;
    cfg.k = k;
    cfg.num_folds = folds;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.learning_rate = lr;
    cfg.embed_mode = embed_mode == "hashed" ? EmbedMode::hashed : EmbedMode::trained;
    cfg.embed_epochs = embed_epochs;
    cfg.master_seed = seed;
    cfg.threads = threads;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"code-image vulnerability detection pipeline"};
    app.require_subcommand(1);

    // generate
    int pairs = 100;
    uint64_t seed = 1;
    std::string out_dir = "corpus";
    auto* gen = app.add_subcommand("generate", "emit a synthetic vulnerable/safe corpus");
    gen->add_option("--pairs", pairs, "number of vulnerable/safe pairs")->default_val(100);
    gen->add_option("--seed", seed, "generator seed")->default_val(1);
    gen->add_option("--out", out_dir, "output directory")->required();

    // pipeline
    std::string in_path, embed_mode = "trained", img_out = "images";
    int k = 5, rows = 100, min_lines = 10;
    unsigned threads = default_threads();
    uint64_t pseed = 1;
    auto* pipe = app.add_subcommand("pipeline", "convert a corpus into code images");
    pipe->alias("imagesize");
    pipe->add_option("--in", in_path, "corpus dir, manifest.csv or samples.jsonl")->required();
    pipe->add_option("--k", k, "splice factor")->default_val(5);
    pipe->add_option("--rows", rows, "base row threshold (fixed at 100)")->default_val(100);
    pipe->add_option("--embed", embed_mode, "trained|hashed")->default_val("trained");
    pipe->add_option("--seed", pseed, "master seed")->default_val(1);
    pipe->add_option("--out", img_out, "image output directory")->required();
    pipe->add_option("--threads", threads, "worker threads");
    pipe->add_option("--min-lines", min_lines, "short-function filter")->default_val(10);

    // train
    std::string images_dir, report = "report.csv", save_model_path;
    int folds = 5, epochs = 100, batch = 32;
    double lr = 0.001, vuln_weight = 1.0;
    uint64_t tseed = 1;
    unsigned tthreads = default_threads();
    auto* tr = app.add_subcommand("train", "k-fold train/evaluate on built images");
    tr->add_option("--images", images_dir, "directory of .img files")->required();
    tr->add_option("--folds", folds)->default_val(5);
    tr->add_option("--epochs", epochs)->default_val(100);
    tr->add_option("--batch", batch)->default_val(32);
    tr->add_option("--lr", lr)->default_val(0.001);
    tr->add_option("--seed", tseed)->default_val(1);
    tr->add_option("--report", report, "metrics CSV path")->required();
    tr->add_option("--threads", tthreads, "worker threads");
    tr->add_option("--save-model", save_model_path, "train on all data and save a checkpoint");
    tr->add_option("--class-weight", vuln_weight,
                   "loss weight for the vulnerable class (1 = off)")
        ->default_val(1.0);

    // ksweep
    std::string ks_in, ks_report = "ksweep.csv", ks_embed = "trained";
    std::vector<int> k_values = {1, 2, 3, 4, 5, 6, 7};
    int ks_folds = 5, ks_epochs = 100, ks_batch = 32, ks_embed_epochs = 12;
    double ks_lr = 0.001;
    uint64_t ks_seed = 1;
    unsigned ks_threads = default_threads();
    auto* ks = app.add_subcommand("ksweep", "re-run the pipeline per k and tabulate metrics");
    ks->add_option("--in", ks_in, "corpus dir, manifest.csv or samples.jsonl")->required();
    ks->add_option("--k", k_values, "k values")->delimiter(',');
    ks->add_option("--folds", ks_folds)->default_val(5);
    ks->add_option("--epochs", ks_epochs)->default_val(100);
    ks->add_option("--batch", ks_batch)->default_val(32);
    ks->add_option("--lr", ks_lr)->default_val(0.001);
    ks->add_option("--embed", ks_embed, "trained|hashed")->default_val("trained");
    ks->add_option("--embed-epochs", ks_embed_epochs)->default_val(12);
    ks->add_option("--seed", ks_seed)->default_val(1);
    ks->add_option("--report", ks_report)->required();
    ks->add_option("--threads", ks_threads);

    // repeat
    std::string rp_in, rp_report = "errorbars.csv", rp_embed = "trained";
    int repeats = 5, rp_k = 5, rp_folds = 5, rp_epochs = 100, rp_batch = 32,
        rp_embed_epochs = 12;
    double rp_lr = 0.001;
    uint64_t rp_seed = 1;
    unsigned rp_threads = default_threads();
    auto* rp = app.add_subcommand("repeat", "repeat the evaluation with fresh fold seeds");
    rp->add_option("--in", rp_in, "corpus dir, manifest.csv or samples.jsonl")->required();
    rp->add_option("--repeats", repeats)->default_val(5);
    rp->add_option("--k", rp_k)->default_val(5);
    rp->add_option("--folds", rp_folds)->default_val(5);
    rp->add_option("--epochs", rp_epochs)->default_val(100);
    rp->add_option("--batch", rp_batch)->default_val(32);
    rp->add_option("--lr", rp_lr)->default_val(0.001);
    rp->add_option("--embed", rp_embed, "trained|hashed")->default_val("trained");
    rp->add_option("--embed-epochs", rp_embed_epochs)->default_val(12);
    rp->add_option("--seed", rp_seed)->default_val(1);
    rp->add_option("--report", rp_report)->required();
    rp->add_option("--threads", rp_threads);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_generate(pairs, seed, out_dir);
        if (pipe->parsed())
            return cmd_pipeline(in_path, k, rows, embed_mode, pseed, img_out, threads,
                                min_lines);
        if (tr->parsed())
            return cmd_train(images_dir, folds, epochs, batch, lr, tseed, report, tthreads,
                             save_model_path, vuln_weight);
        if (ks->parsed()) {
            auto samples = load_corpus(ks_in);
            auto cfg = eval_config(1, ks_folds, ks_epochs, ks_batch, ks_lr, ks_embed,
                                   ks_embed_epochs, ks_seed, ks_threads);
            auto rows_out = run_ksweep(samples, k_values, cfg);
            write_text(ks_report, ksweep_csv(rows_out));
            std::cout << ksweep_csv(rows_out);
            return 0;
        }
        if (rp->parsed()) {
            auto samples = load_corpus(rp_in);
            auto cfg = eval_config(rp_k, rp_folds, rp_epochs, rp_batch, rp_lr, rp_embed,
                                   rp_embed_epochs, rp_seed, rp_threads);
            auto result = run_repeated(samples, repeats, cfg);
            write_text(rp_report, repeat_csv(result));
            std::cout << repeat_csv(result);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
