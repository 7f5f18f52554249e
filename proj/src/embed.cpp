#include "vmc/embed.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>

#include "vmc/io_util.hpp"
#include "vmc/rand_util.hpp"

namespace vmc {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }
// numbers keep alphanumerics and dots after a leading digit (0x1F, 1.5f)
bool number_char(char c) { return ident_char(c) || c == '.'; }

uint64_t seeded_hash(uint64_t seed, const std::string& token) {
    uint64_t h = seed ^ fnv1a64(token);
    return splitmix64(h);
}

} // namespace

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '"' || c == '\'') {
            size_t j = i + 1;
            while (j < line.size()) {
                if (line[j] == '\\' && j + 1 < line.size()) j += 2;
                else if (line[j] == c) {
                    ++j;
                    break;
                } else ++j;
            }
            toks.push_back(line.substr(i, j - i));
            i = j;
        } else if (ident_start(c)) {
            size_t j = i;
            while (j < line.size() && ident_char(line[j])) ++j;
            toks.push_back(line.substr(i, j - i));
            i = j;
        } else if (digit(c)) {
            size_t j = i;
            while (j < line.size() && number_char(line[j])) ++j;
            toks.push_back(line.substr(i, j - i));
            i = j;
        } else {
            toks.push_back(std::string(1, c));
            ++i;
        }
    }
    return toks;
}

EmbeddingModel make_hashed_model(int dim, uint64_t hash_seed) {
    EmbeddingModel m;
    m.mode = EmbedMode::hashed;
    m.dim = dim;
    m.hash_seed = hash_seed;
    return m;
}

std::vector<float> embed_tokens(const EmbeddingModel& model,
                                const std::vector<std::string>& toks) {
    std::vector<float> out(model.dim, 0.0f);
    if (model.mode == EmbedMode::hashed) {
        std::vector<double> acc(model.dim, 0.0);
        for (const auto& t : toks) {
            uint64_t h = seeded_hash(model.hash_seed, t);
            int idx = static_cast<int>(h % static_cast<uint64_t>(model.dim));
            double sign = (h >> 63) ? -1.0 : 1.0;
            acc[idx] += sign;
        }
        double norm = 0.0;
        for (double v : acc) norm += v * v;
        if (norm > 0.0) {
            norm = std::sqrt(norm);
            for (int d = 0; d < model.dim; ++d) out[d] = static_cast<float>(acc[d] / norm);
        }
        return out;
    }
    std::vector<double> acc(model.dim, 0.0);
    int hits = 0;
    for (const auto& t : toks) {
        auto it = model.vocabulary.find(t);
        if (it == model.vocabulary.end()) continue;
        const float* row = model.word_vectors.data() + static_cast<size_t>(it->second) * model.dim;
        for (int d = 0; d < model.dim; ++d) acc[d] += row[d];
        ++hits;
    }
    if (hits == 0) return out;
    for (int d = 0; d < model.dim; ++d) out[d] = static_cast<float>(acc[d] / hits);
    return out;
}

std::vector<float> embed_sentence(const EmbeddingModel& model, const std::string& line) {
    return embed_tokens(model, tokenize(line));
}

EmbedTrainResult train_embedding(const std::vector<std::vector<std::string>>& corpus,
                                 const EmbedTrainConfig& config) {
    // vocabulary: tokens with frequency >= min_token_frequency, indexed in
    // first-appearance order for determinism
    std::unordered_map<std::string, long> freq;
    long total_tokens = 0;
    for (const auto& sent : corpus)
        for (const auto& t : sent) {
            ++freq[t];
            ++total_tokens;
        }
    if (total_tokens == 0) throw EmptyCorpus("no tokens in embedding corpus");

    EmbeddingModel model;
    model.mode = EmbedMode::trained;
    model.dim = config.dim;
    for (const auto& sent : corpus)
        for (const auto& t : sent)
            if (freq[t] >= config.min_token_frequency && !model.vocabulary.count(t)) {
                model.vocabulary[t] = static_cast<int>(model.tokens.size());
                model.tokens.push_back(t);
            }
    int vocab = model.vocab_size();
    if (vocab == 0) throw EmptyCorpus("vocabulary empty after frequency pruning");

    // sentences as vocab indices; drop OOV tokens, need >= 2 tokens to form
    // (context, target) pairs
    std::vector<std::vector<int>> sents;
    for (const auto& sent : corpus) {
        std::vector<int> ids;
        for (const auto& t : sent) {
            auto it = model.vocabulary.find(t);
            if (it != model.vocabulary.end()) ids.push_back(it->second);
        }
        if (ids.size() >= 2) sents.push_back(std::move(ids));
    }
    if (sents.empty()) throw EmptyCorpus("no usable sentences after pruning");

    // held-out shard: every 10th usable sentence
    std::vector<std::vector<int>> train, held;
    for (size_t i = 0; i < sents.size(); ++i)
        (i % 10 == 9 ? held : train).push_back(std::move(sents[i]));
    if (train.empty()) train.swap(held);

    // noise distribution: unigram^noise_power over the vocabulary, sampled
    // by cumulative table
    std::vector<double> noise_cdf(vocab, 0.0);
    {
        double acc = 0.0;
        for (int v = 0; v < vocab; ++v) {
            acc += std::pow(static_cast<double>(freq[model.tokens[v]]), config.noise_power);
            noise_cdf[v] = acc;
        }
        for (int v = 0; v < vocab; ++v) noise_cdf[v] /= acc;
    }

    Rng rng(config.seed);
    auto sample_noise = [&]() {
        double u = rng.next_unit();
        auto it = std::lower_bound(noise_cdf.begin(), noise_cdf.end(), u);
        return static_cast<int>(std::min<size_t>(it - noise_cdf.begin(), vocab - 1));
    };

    int dim = config.dim;
    std::vector<double> in_vec(static_cast<size_t>(vocab) * dim);  // word vectors
    std::vector<double> out_vec(static_cast<size_t>(vocab) * dim, 0.0); // target vectors
    double init_scale = 0.5 / dim;
    for (auto& w : in_vec) w = (rng.next_unit() - 0.5) * 2.0 * init_scale;

    auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };

    std::vector<double> ctx(dim), grad_ctx(dim);

    // binary logistic loss of one (sentence, target) pair with fixed
    // negatives; used for the held-out measurements
    auto pair_loss = [&](const std::vector<int>& sent, size_t target_pos, Rng& noise_rng) {
        for (int d = 0; d < dim; ++d) ctx[d] = 0.0;
        int count = 0;
        for (size_t p = 0; p < sent.size(); ++p) {
            if (p == target_pos) continue;
            const double* row = in_vec.data() + static_cast<size_t>(sent[p]) * dim;
            for (int d = 0; d < dim; ++d) ctx[d] += row[d];
            ++count;
        }
        for (int d = 0; d < dim; ++d) ctx[d] /= count;
        double loss = 0.0;
        const double* tgt = out_vec.data() + static_cast<size_t>(sent[target_pos]) * dim;
        double dot = 0.0;
        for (int d = 0; d < dim; ++d) dot += tgt[d] * ctx[d];
        loss -= std::log(std::max(sigmoid(dot), 1e-12));
        for (int k = 0; k < config.negatives; ++k) {
            int neg = static_cast<int>(noise_rng.next_below(vocab));
            const double* nv = out_vec.data() + static_cast<size_t>(neg) * dim;
            double ndot = 0.0;
            for (int d = 0; d < dim; ++d) ndot += nv[d] * ctx[d];
            loss -= std::log(std::max(sigmoid(-ndot), 1e-12));
        }
        return loss;
    };

    auto heldout_loss = [&]() {
        Rng noise_rng(derive_seed(config.seed, "heldout-negatives"));
        double sum = 0.0;
        long count = 0;
        for (const auto& sent : held)
            for (size_t t = 0; t < sent.size(); ++t) {
                sum += pair_loss(sent, t, noise_rng);
                ++count;
            }
        return count == 0 ? 0.0 : sum / count;
    };

    std::vector<size_t> order(train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    long long steps_total = static_cast<long long>(config.epochs) * train.size();
    long long step = 0;
    std::vector<double> held_trace;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (size_t oi : order) {
            const auto& sent = train[oi];
            double lr = config.lr_initial +
                        (config.lr_final - config.lr_initial) *
                            (static_cast<double>(step) / std::max<long long>(1, steps_total - 1));
            ++step;
            for (size_t tpos = 0; tpos < sent.size(); ++tpos) {
                // context = mean of the sentence minus the target
                for (int d = 0; d < dim; ++d) ctx[d] = 0.0;
                int count = 0;
                for (size_t p = 0; p < sent.size(); ++p) {
                    if (p == tpos) continue;
                    const double* row = in_vec.data() + static_cast<size_t>(sent[p]) * dim;
                    for (int d = 0; d < dim; ++d) ctx[d] += row[d];
                    ++count;
                }
                for (int d = 0; d < dim; ++d) ctx[d] /= count;
                for (int d = 0; d < dim; ++d) grad_ctx[d] = 0.0;

                auto push = [&](int word, double label) {
                    double* tgt = out_vec.data() + static_cast<size_t>(word) * dim;
                    double dot = 0.0;
                    for (int d = 0; d < dim; ++d) dot += tgt[d] * ctx[d];
                    double g = (sigmoid(dot) - label) * lr;
                    for (int d = 0; d < dim; ++d) {
                        grad_ctx[d] += g * tgt[d];
                        tgt[d] -= g * ctx[d];
                    }
                };
                push(sent[tpos], 1.0);
                for (int k = 0; k < config.negatives; ++k) push(sample_noise(), 0.0);

                for (size_t p = 0; p < sent.size(); ++p) {
                    if (p == tpos) continue;
                    double* row = in_vec.data() + static_cast<size_t>(sent[p]) * dim;
                    for (int d = 0; d < dim; ++d) row[d] -= grad_ctx[d] / count;
                }
            }
        }
        held_trace.push_back(heldout_loss());
    }

    model.word_vectors.resize(in_vec.size());
    for (size_t i = 0; i < in_vec.size(); ++i)
        model.word_vectors[i] = static_cast<float>(in_vec[i]);

    return {std::move(model), std::move(held_trace)};
}

void save_embedding(const EmbeddingModel& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw PipelineError("cannot write " + path);
    write_magic(os, "VMCEMB1");
    write_u32(os, static_cast<uint32_t>(model.dim));
    uint32_t v = model.mode == EmbedMode::hashed ? 0 : static_cast<uint32_t>(model.vocab_size());
    write_u32(os, v);
    for (uint32_t i = 0; i < v; ++i) {
        const std::string& t = model.tokens[i];
        write_u32(os, static_cast<uint32_t>(t.size()));
        os.write(t.data(), static_cast<std::streamsize>(t.size()));
    }
    for (uint32_t i = 0; i < v; ++i)
        for (int d = 0; d < model.dim; ++d)
            write_f32(os, model.word_vectors[static_cast<size_t>(i) * model.dim + d]);
}

EmbeddingModel load_embedding(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw PipelineError("cannot read " + path);
    expect_magic(is, "VMCEMB1");
    EmbeddingModel m;
    m.dim = static_cast<int>(read_u32(is, "dim"));
    uint32_t v = read_u32(is, "vocab size");
    if (v == 0) {
        m.mode = EmbedMode::hashed;
        return m;
    }
    m.mode = EmbedMode::trained;
    for (uint32_t i = 0; i < v; ++i) {
        uint32_t len = read_u32(is, "token length");
        std::string t(len, '\0');
        is.read(t.data(), len);
        if (!is) throw TruncatedFile("truncated token in " + path);
        m.vocabulary[t] = static_cast<int>(i);
        m.tokens.push_back(std::move(t));
    }
    m.word_vectors.resize(static_cast<size_t>(v) * m.dim);
    for (size_t i = 0; i < m.word_vectors.size(); ++i)
        m.word_vectors[i] = read_f32(is, "word vector");
    return m;
}

} // namespace vmc
