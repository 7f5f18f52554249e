#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vmc/common.hpp"
#include "vmc/imagegen.hpp"

namespace vmc {

// Convolutional classifier: one bank per filter height, each bank holding
// `maps_per_bank` filters that span the full embedding width, ReLU, global
// max pooling per map, and an affine head over the concatenated features.
// Parameters live in one flat vector so the optimizer, the checkpoint format
// and the finite-difference tests all share the same layout:
//   for each bank (ascending height): filters [map][row][channel][dim],
//   then biases [map]; then fc weights [class][feature]; then fc bias.
struct CnnModel {
    int rows = 0;
    int dim = 128;
    int in_channels = 3;
    int num_classes = 2;
    std::vector<int> bank_heights; // default 1..10
    int maps_per_bank = 32;
    uint64_t seed = 0;
    std::vector<double> params;

    int num_banks() const { return static_cast<int>(bank_heights.size()); }
    int features() const { return num_banks() * maps_per_bank; }
    int filter_size(int bank) const { return bank_heights[bank] * in_channels * dim; }

    size_t bank_offset(int bank) const;   // start of the bank's filters
    size_t bias_offset(int bank) const;   // start of the bank's biases
    size_t fc_weight_offset() const;
    size_t fc_bias_offset() const;
    size_t param_count() const;
};

// Uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) weights, zero biases,
// deterministic per seed. Throws RowsTooSmall if the tallest filter does
// not fit.
CnnModel init_model(uint64_t seed, int rows, int dim = 128,
                    std::vector<int> bank_heights = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10},
                    int maps_per_bank = 32);

struct ForwardCache {
    std::vector<double> x;        // image rows as [rows][channels*dim]
    std::vector<double> features; // pooled activations, length features()
    std::vector<int> winner;      // argmax position per feature, -1 if pooled 0
    std::vector<double> logits;   // length num_classes
};

ForwardCache forward(const CnnModel& model, const CodeImage& image);

struct BatchGrad {
    double loss = 0.0;                // mean cross-entropy
    std::vector<double> grads;        // same layout/length as model.params
    int correct = 0;                  // argmax matches label
};

// Mean cross-entropy over the batch and exact gradients for every
// parameter. Max-pool backprop routes to the first-index winner; ReLU
// passes no gradient at 0. Optional per-class weights w turn the loss into
// sum(w[y_i] * CE_i) / sum(w[y_i]); empty weights mean uniform.
BatchGrad loss_and_grad(const CnnModel& model, const std::vector<const CodeImage*>& images,
                        const std::vector<int>& labels, unsigned threads = 1,
                        const std::vector<double>& class_weights = {});

double mean_loss(const CnnModel& model, const std::vector<const CodeImage*>& images,
                 const std::vector<int>& labels, unsigned threads = 1,
                 const std::vector<double>& class_weights = {});

struct AdamState {
    std::vector<double> m, v;
    long step = 0;
};

AdamState make_adam_state(const CnnModel& model);

// Standard Adam (beta1 0.9, beta2 0.999, eps 1e-8) with bias correction.
void adam_step(CnnModel& model, const std::vector<double>& grads, AdamState& state,
               double lr = 0.001);

struct TrainConfig {
    int batch_size = 32;
    double learning_rate = 0.001;
    int epochs = 100;
    unsigned threads = 1;
    std::vector<double> class_weights = {}; // empty = uniform
};

struct EpochStat {
    double loss = 0.0;
    double train_accuracy = 0.0;
};

// Seeded per-epoch shuffle, remainder trained as a smaller final batch.
// Returns one EpochStat per epoch; throws SingleClassDataset unless both
// classes are present.
std::vector<EpochStat> train(CnnModel& model, const std::vector<const CodeImage*>& images,
                             const std::vector<int>& labels, const TrainConfig& config,
                             uint64_t seed);

struct Prediction {
    Label label;
    double probability; // of the predicted class
};

Prediction predict(const CnnModel& model, const CodeImage& image);

// Checkpoint format VMCNET1; parameters stored as little-endian f32 in the
// flat layout above.
void save_model(const CnnModel& model, const std::string& path);
CnnModel load_model(const std::string& path);

} // namespace vmc
