#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "vmc/common.hpp"

namespace vmc {

enum class EmbedMode : uint8_t { trained, hashed };

// Maps a code line to a fixed-size real vector. Trained mode averages the
// learned word vectors of in-vocabulary tokens; hashed mode is a
// deterministic feature-hashing fallback used by structural tests.
struct EmbeddingModel {
    EmbedMode mode = EmbedMode::hashed;
    int dim = 128;
    std::vector<std::string> tokens;                  // index -> token
    std::unordered_map<std::string, int> vocabulary;  // token -> index
    std::vector<float> word_vectors;                  // V x dim, row-major
    uint64_t hash_seed = kDefaultHashSeed;

    static constexpr uint64_t kDefaultHashSeed = 0x564D43454D420001ULL;

    int vocab_size() const { return static_cast<int>(tokens.size()); }
};

EmbeddingModel make_hashed_model(int dim = 128,
                                 uint64_t hash_seed = EmbeddingModel::kDefaultHashSeed);

// Splits on whitespace and punctuation. Identifiers, numbers and string
// literals stay whole; every other punctuation character is its own token.
std::vector<std::string> tokenize(const std::string& line);

struct EmbedTrainConfig {
    int dim = 128;
    int epochs = 10;
    uint64_t seed = 1;
    int negatives = 5;          // negative samples per target
    int min_token_frequency = 2;
    double noise_power = 0.75;  // unigram^0.75 noise distribution
    double lr_initial = 0.05;
    double lr_final = 1e-4;
};

struct EmbedTrainResult {
    EmbeddingModel model;
    std::vector<double> heldout_loss; // one entry per epoch (10% shard)
};

// Simplified unigram sent2vec: the context for a target token is the mean
// of the other word vectors of its sentence, trained with negative sampling
// and a binary logistic loss. Deterministic for a fixed seed.
EmbedTrainResult train_embedding(const std::vector<std::vector<std::string>>& corpus,
                                 const EmbedTrainConfig& config = {});

// Trained: mean of in-vocabulary word vectors (OOV skipped). Hashed: signed
// bucket accumulation, L2-normalized. Empty / all-OOV lines give the zero
// vector.
std::vector<float> embed_sentence(const EmbeddingModel& model, const std::string& line);
std::vector<float> embed_tokens(const EmbeddingModel& model,
                                const std::vector<std::string>& tokens);

// File format VMCEMB1: dim, V, length-prefixed tokens, V*dim f32 rows.
// V == 0 round-trips as a hashed-mode model.
void save_embedding(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_embedding(const std::string& path);

} // namespace vmc
