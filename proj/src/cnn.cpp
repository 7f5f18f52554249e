#include "vmc/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "vmc/io_util.hpp"
#include "vmc/parallel.hpp"
#include "vmc/rand_util.hpp"

namespace vmc {

size_t CnnModel::bank_offset(int bank) const {
    size_t off = 0;
    for (int b = 0; b < bank; ++b)
        off += static_cast<size_t>(maps_per_bank) * filter_size(b) + maps_per_bank;
    return off;
}

size_t CnnModel::bias_offset(int bank) const {
    return bank_offset(bank) + static_cast<size_t>(maps_per_bank) * filter_size(bank);
}

size_t CnnModel::fc_weight_offset() const { return bank_offset(num_banks()); }

size_t CnnModel::fc_bias_offset() const {
    return fc_weight_offset() + static_cast<size_t>(num_classes) * features();
}

size_t CnnModel::param_count() const { return fc_bias_offset() + num_classes; }

CnnModel init_model(uint64_t seed, int rows, int dim, std::vector<int> bank_heights,
                    int maps_per_bank) {
    CnnModel m;
    m.rows = rows;
    m.dim = dim;
    m.bank_heights = std::move(bank_heights);
    m.maps_per_bank = maps_per_bank;
    m.seed = seed;
    int max_h = *std::max_element(m.bank_heights.begin(), m.bank_heights.end());
    if (rows < max_h)
        throw RowsTooSmall("rows " + std::to_string(rows) + " < tallest filter " +
                           std::to_string(max_h));
    m.params.assign(m.param_count(), 0.0);
    Rng rng(seed);
    for (int b = 0; b < m.num_banks(); ++b) {
        double bound = std::sqrt(1.0 / m.filter_size(b));
        double* f = m.params.data() + m.bank_offset(b);
        size_t n = static_cast<size_t>(m.maps_per_bank) * m.filter_size(b);
        for (size_t i = 0; i < n; ++i) f[i] = rng.next_uniform(-bound, bound);
        // biases stay zero
    }
    {
        double bound = std::sqrt(1.0 / m.features());
        double* w = m.params.data() + m.fc_weight_offset();
        size_t n = static_cast<size_t>(m.num_classes) * m.features();
        for (size_t i = 0; i < n; ++i) w[i] = rng.next_uniform(-bound, bound);
    }
    return m;
}

namespace {

void check_shape(const CnnModel& model, const CodeImage& image) {
    if (image.rows != model.rows || image.dim != model.dim)
        throw ShapeMismatch("image " + std::to_string(image.rows) + "x" +
                            std::to_string(image.dim) + " vs model " +
                            std::to_string(model.rows) + "x" + std::to_string(model.dim));
}

std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

} // namespace

ForwardCache forward(const CnnModel& model, const CodeImage& image) {
    check_shape(model, image);
    int rows = model.rows, dim = model.dim, ch = model.in_channels;
    int width = ch * dim;
    ForwardCache cache;
    cache.x.assign(static_cast<size_t>(rows) * width, 0.0);
    // rows laid out as [channel0 | channel1 | channel2] so a filter window
    // is one contiguous span
    int populated = std::clamp(image.populated, 0, rows);
    for (int r = 0; r < populated; ++r)
        for (int c = 0; c < ch; ++c)
            for (int d = 0; d < dim; ++d)
                cache.x[static_cast<size_t>(r) * width + c * dim + d] = image.at(c, r, d);

    cache.features.assign(model.features(), 0.0);
    cache.winner.assign(model.features(), -1);

    for (int b = 0; b < model.num_banks(); ++b) {
        int h = model.bank_heights[b];
        int fsize = model.filter_size(b);
        int positions = rows - h + 1;
        const double* bias = model.params.data() + model.bias_offset(b);
        for (int j = 0; j < model.maps_per_bank; ++j) {
            const double* filt =
                model.params.data() + model.bank_offset(b) + static_cast<size_t>(j) * fsize;
            double best = -std::numeric_limits<double>::infinity();
            int best_p = 0;
            for (int p = 0; p < positions; ++p) {
                // rows at or past `populated` are all zero and contribute
                // nothing, so the dot product stops early
                int live_rows = std::min(h, populated - p);
                double z = bias[j];
                if (live_rows > 0) {
                    const double* win = cache.x.data() + static_cast<size_t>(p) * width;
                    int len = live_rows * width;
                    double acc = 0.0;
                    for (int i = 0; i < len; ++i) acc += filt[i] * win[i];
                    z += acc;
                }
                double a = z > 0.0 ? z : 0.0;
                if (a > best) {
                    best = a;
                    best_p = p;
                }
            }
            int f = b * model.maps_per_bank + j;
            cache.features[f] = best;
            cache.winner[f] = best > 0.0 ? best_p : -1;
        }
    }

    cache.logits.assign(model.num_classes, 0.0);
    const double* w = model.params.data() + model.fc_weight_offset();
    const double* fcb = model.params.data() + model.fc_bias_offset();
    for (int c = 0; c < model.num_classes; ++c) {
        double s = fcb[c];
        const double* wc = w + static_cast<size_t>(c) * model.features();
        for (int f = 0; f < model.features(); ++f) s += wc[f] * cache.features[f];
        cache.logits[c] = s;
    }
    return cache;
}

BatchGrad loss_and_grad(const CnnModel& model, const std::vector<const CodeImage*>& images,
                        const std::vector<int>& labels, unsigned threads,
                        const std::vector<double>& class_weights) {
    if (images.empty() || images.size() != labels.size())
        throw ShapeMismatch("batch images/labels mismatch");
    size_t batch = images.size();

    std::vector<ForwardCache> caches(batch);
    parallel_for_index(batch, threads,
                       [&](size_t i) { caches[i] = forward(model, *images[i]); });

    BatchGrad out;
    out.grads.assign(model.param_count(), 0.0);
    double weight_total = 0.0;
    for (size_t i = 0; i < batch; ++i)
        weight_total += class_weights.empty() ? 1.0 : class_weights.at(labels[i]);
    int width = model.in_channels * model.dim;

    // accumulate in sample order: results do not depend on thread count
    for (size_t i = 0; i < batch; ++i) {
        const ForwardCache& cache = caches[i];
        auto probs = softmax(cache.logits);
        int label = labels[i];
        double sample_w =
            (class_weights.empty() ? 1.0 : class_weights.at(label)) / weight_total;
        out.loss -= std::log(std::max(probs[label], 1e-300)) * sample_w;
        int arg = static_cast<int>(std::max_element(cache.logits.begin(), cache.logits.end()) -
                                   cache.logits.begin());
        if (arg == label) ++out.correct;

        std::vector<double> dlogits(model.num_classes);
        for (int c = 0; c < model.num_classes; ++c)
            dlogits[c] = (probs[c] - (c == label ? 1.0 : 0.0)) * sample_w;

        double* gw = out.grads.data() + model.fc_weight_offset();
        double* gb = out.grads.data() + model.fc_bias_offset();
        const double* w = model.params.data() + model.fc_weight_offset();
        std::vector<double> dfeat(model.features(), 0.0);
        for (int c = 0; c < model.num_classes; ++c) {
            double dc = dlogits[c];
            gb[c] += dc;
            double* gwc = gw + static_cast<size_t>(c) * model.features();
            const double* wc = w + static_cast<size_t>(c) * model.features();
            for (int f = 0; f < model.features(); ++f) {
                gwc[f] += dc * cache.features[f];
                dfeat[f] += dc * wc[f];
            }
        }

        int populated = std::clamp(images[i]->populated, 0, model.rows);
        for (int b = 0; b < model.num_banks(); ++b) {
            int h = model.bank_heights[b];
            int fsize = model.filter_size(b);
            for (int j = 0; j < model.maps_per_bank; ++j) {
                int f = b * model.maps_per_bank + j;
                int p = cache.winner[f];
                if (p < 0) continue; // pooled activation was 0: no gradient
                double dz = dfeat[f];
                if (dz == 0.0) continue;
                double* gf =
                    out.grads.data() + model.bank_offset(b) + static_cast<size_t>(j) * fsize;
                out.grads[model.bias_offset(b) + j] += dz;
                int live_rows = std::min(h, populated - p);
                if (live_rows > 0) {
                    const double* win = cache.x.data() + static_cast<size_t>(p) * width;
                    int len = live_rows * width;
                    for (int t = 0; t < len; ++t) gf[t] += dz * win[t];
                }
            }
        }
    }
    return out;
}

double mean_loss(const CnnModel& model, const std::vector<const CodeImage*>& images,
                 const std::vector<int>& labels, unsigned threads,
                 const std::vector<double>& class_weights) {
    if (images.empty() || images.size() != labels.size())
        throw ShapeMismatch("batch images/labels mismatch");
    std::vector<double> losses(images.size(), 0.0);
    parallel_for_index(images.size(), threads, [&](size_t i) {
        auto cache = forward(model, *images[i]);
        auto probs = softmax(cache.logits);
        losses[i] = -std::log(std::max(probs[labels[i]], 1e-300));
    });
    double sum = 0.0, weight_total = 0.0;
    for (size_t i = 0; i < losses.size(); ++i) {
        double w = class_weights.empty() ? 1.0 : class_weights.at(labels[i]);
        sum += w * losses[i];
        weight_total += w;
    }
    return sum / weight_total;
}

AdamState make_adam_state(const CnnModel& model) {
    AdamState s;
    s.m.assign(model.param_count(), 0.0);
    s.v.assign(model.param_count(), 0.0);
    return s;
}

void adam_step(CnnModel& model, const std::vector<double>& grads, AdamState& state, double lr) {
    if (grads.size() != model.params.size() || state.m.size() != grads.size())
        throw ShapeMismatch("adam state/gradient size mismatch");
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++state.step;
    double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < grads.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
        double mhat = state.m[i] / c1;
        double vhat = state.v[i] / c2;
        model.params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

std::vector<EpochStat> train(CnnModel& model, const std::vector<const CodeImage*>& images,
                             const std::vector<int>& labels, const TrainConfig& config,
                             uint64_t seed) {
    if (images.empty() || images.size() != labels.size())
        throw ShapeMismatch("dataset images/labels mismatch");
    bool has0 = false, has1 = false;
    for (int l : labels) (l == 0 ? has0 : has1) = true;
    if (!has0 || !has1) throw SingleClassDataset("training set has a single class");

    AdamState state = make_adam_state(model);
    Rng rng(seed);
    std::vector<size_t> order(images.size());
    std::iota(order.begin(), order.end(), size_t{0});

    std::vector<EpochStat> trace;
    trace.reserve(config.epochs);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        long correct = 0;
        size_t done = 0;
        while (done < order.size()) {
            size_t take = std::min<size_t>(config.batch_size, order.size() - done);
            std::vector<const CodeImage*> batch(take);
            std::vector<int> blabels(take);
            for (size_t i = 0; i < take; ++i) {
                batch[i] = images[order[done + i]];
                blabels[i] = labels[order[done + i]];
            }
            auto bg = loss_and_grad(model, batch, blabels, config.threads,
                                    config.class_weights);
            adam_step(model, bg.grads, state, config.learning_rate);
            loss_sum += bg.loss * static_cast<double>(take);
            correct += bg.correct;
            done += take;
        }
        trace.push_back({loss_sum / static_cast<double>(order.size()),
                         static_cast<double>(correct) / static_cast<double>(order.size())});
    }
    return trace;
}

Prediction predict(const CnnModel& model, const CodeImage& image) {
    auto cache = forward(model, image);
    auto probs = softmax(cache.logits);
    int arg = static_cast<int>(std::max_element(cache.logits.begin(), cache.logits.end()) -
                               cache.logits.begin());
    return {arg == 1 ? Label::vulnerable : Label::safe, probs[arg]};
}

void save_model(const CnnModel& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw PipelineError("cannot write " + path);
    write_magic(os, "VMCNET1");
    write_u32(os, static_cast<uint32_t>(model.rows));
    write_u32(os, static_cast<uint32_t>(model.dim));
    write_u32(os, static_cast<uint32_t>(model.in_channels));
    write_u32(os, static_cast<uint32_t>(model.num_classes));
    write_u32(os, static_cast<uint32_t>(model.num_banks()));
    write_u32(os, static_cast<uint32_t>(model.maps_per_bank));
    for (int h : model.bank_heights) write_u32(os, static_cast<uint32_t>(h));
    write_u64(os, model.seed);
    for (double p : model.params) write_f32(os, static_cast<float>(p));
}

CnnModel load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw PipelineError("cannot read " + path);
    expect_magic(is, "VMCNET1");
    CnnModel m;
    m.rows = static_cast<int>(read_u32(is, "rows"));
    m.dim = static_cast<int>(read_u32(is, "dim"));
    m.in_channels = static_cast<int>(read_u32(is, "channels"));
    m.num_classes = static_cast<int>(read_u32(is, "classes"));
    int banks = static_cast<int>(read_u32(is, "banks"));
    m.maps_per_bank = static_cast<int>(read_u32(is, "maps"));
    for (int b = 0; b < banks; ++b)
        m.bank_heights.push_back(static_cast<int>(read_u32(is, "height")));
    m.seed = read_u64(is, "seed");
    m.params.resize(m.param_count());
    for (size_t i = 0; i < m.params.size(); ++i)
        m.params[i] = static_cast<double>(read_f32(is, "parameter"));
    return m;
}

} // namespace vmc
