#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "vmc/cnn.hpp"

using namespace vmc;

namespace {

// Downsized model for gradient checks; full-width checks run separately.
CnnModel tiny_model(uint64_t seed, int rows = 12, int dim = 8,
                    std::vector<int> heights = {1, 2, 3}, int maps = 2) {
    return init_model(seed, rows, dim, std::move(heights), maps);
}

std::vector<CodeImage> random_batch(Rng& rng, int count, int rows, int dim) {
    std::vector<CodeImage> out;
    for (int i = 0; i < count; ++i) out.push_back(oracles::random_image(rng, rows, dim));
    return out;
}

std::vector<const CodeImage*> ptrs(const std::vector<CodeImage>& images) {
    std::vector<const CodeImage*> p;
    for (const auto& i : images) p.push_back(&i);
    return p;
}

} // namespace

TEST_SUITE("cnn") {

TEST_CASE("init: determinism, bounds, zero biases, rows check") {
    auto a = init_model(99, 12, 16, {1, 2, 3}, 4);
    auto b = init_model(99, 12, 16, {1, 2, 3}, 4);
    CHECK(a.params == b.params);
    auto c = init_model(100, 12, 16, {1, 2, 3}, 4);
    CHECK(a.params != c.params);

    for (int bank = 0; bank < a.num_banks(); ++bank) {
        double bound = std::sqrt(1.0 / a.filter_size(bank));
        CHECK(a.filter_size(bank) == a.bank_heights[bank] * 3 * 16);
        const double* f = a.params.data() + a.bank_offset(bank);
        for (int i = 0; i < a.maps_per_bank * a.filter_size(bank); ++i) {
            CHECK(f[i] <= bound);
            CHECK(f[i] >= -bound);
        }
        for (int j = 0; j < a.maps_per_bank; ++j)
            CHECK(a.params[a.bias_offset(bank) + j] == 0.0);
    }
    CHECK_THROWS_AS(init_model(1, 9, 128), RowsTooSmall); // height-10 filter cannot fit
}

TEST_CASE("full-size model has 10 banks, 32 maps, 320 features") {
    auto m = init_model(7, 100);
    CHECK(m.num_banks() == 10);
    CHECK(m.maps_per_bank == 32);
    CHECK(m.features() == 320);
    CHECK(m.filter_size(9) == 10 * 3 * 128);
    CHECK(m.params.size() == m.param_count());
}

TEST_CASE("zero image with zero head gives uniform softmax") {
    auto m = tiny_model(3);
    // zero out the fc weights; conv biases are already zero
    for (size_t i = m.fc_weight_offset(); i < m.param_count(); ++i) m.params[i] = 0.0;
    CodeImage img;
    img.rows = m.rows;
    img.dim = m.dim;
    img.populated = 0;
    img.data.assign(static_cast<size_t>(3) * m.rows * m.dim, 0.0f);
    auto cache = forward(m, img);
    CHECK(cache.logits[0] == 0.0);
    CHECK(cache.logits[1] == 0.0);
    auto pred = predict(m, img);
    CHECK(pred.probability == doctest::Approx(0.5));
}

TEST_CASE("positive homogeneity of pre-pool activations under image scaling") {
    Rng rng(12);
    auto m = tiny_model(5);
    auto img = oracles::random_image(rng, m.rows, m.dim);
    auto scaled = img;
    for (auto& v : scaled.data) v *= 3.0f;
    // biases are zero after init, so features scale linearly too
    auto f1 = forward(m, img);
    auto f2 = forward(m, scaled);
    // image cells are f32, so the scale factor itself rounds at ~1e-7
    for (int f = 0; f < m.features(); ++f)
        CHECK(f2.features[f] == doctest::Approx(3.0 * f1.features[f]).epsilon(1e-6));
}

TEST_CASE("forward matches the naive triple-loop oracle (full-width banks)") {
    Rng rng(4242);
    for (int t = 0; t < 20; ++t) {
        auto m = init_model(rng.next_u64(), 12 + static_cast<int>(rng.next_below(6)), 128);
        // randomize biases too so the oracle exercises them
        for (int b = 0; b < m.num_banks(); ++b)
            for (int j = 0; j < m.maps_per_bank; ++j)
                m.params[m.bias_offset(b) + j] = rng.next_uniform(-0.05, 0.05);
        auto img = oracles::random_image(rng, m.rows, m.dim);
        auto got = forward(m, img);
        auto expect = oracles::cnn_forward_oracle(m, img);
        for (int c = 0; c < m.num_classes; ++c)
            CHECK(got.logits[c] == doctest::Approx(expect[c]).epsilon(1e-6));
    }
}

TEST_CASE("padding-aware forward equals forward over the dense zero rows") {
    Rng rng(88);
    auto m = init_model(21, 40, 32, {1, 2, 3, 4}, 3);
    auto img = oracles::random_image(rng, 40, 32);
    // zero everything past row 17, once via populated and once densely
    for (int c = 0; c < 3; ++c)
        for (int r = 17; r < 40; ++r)
            for (int d = 0; d < 32; ++d) img.at(c, r, d) = 0.0f;
    auto dense = img;
    dense.populated = 40;
    auto sparse = img;
    sparse.populated = 17;
    auto a = forward(m, dense);
    auto b = forward(m, sparse);
    CHECK(a.logits == b.logits);
    CHECK(a.features == b.features);
    CHECK(a.winner == b.winner);
}

TEST_CASE("loss at uniform prediction is ln 2 and batches are mean-invariant") {
    auto m = tiny_model(31);
    for (size_t i = m.fc_weight_offset(); i < m.param_count(); ++i) m.params[i] = 0.0;
    Rng rng(5);
    auto images = random_batch(rng, 2, m.rows, m.dim);
    auto bg = loss_and_grad(m, ptrs(images), {0, 1});
    CHECK(bg.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // duplicating every sample leaves loss and gradients unchanged
    auto m2 = tiny_model(32);
    std::vector<CodeImage> doubled = {images[0], images[1], images[0], images[1]};
    auto g1 = loss_and_grad(m2, ptrs(images), {0, 1});
    auto g2 = loss_and_grad(m2, ptrs(doubled), {0, 1, 0, 1});
    CHECK(g1.loss == doctest::Approx(g2.loss).epsilon(1e-12));
    for (size_t i = 0; i < g1.grads.size(); ++i)
        CHECK(g1.grads[i] == doctest::Approx(g2.grads[i]).epsilon(1e-9));
}

TEST_CASE("class weights: uniform scaling cancels, weighting equals duplication") {
    Rng rng(606);
    auto m = tiny_model(60);
    auto images = random_batch(rng, 3, m.rows, m.dim);
    std::vector<int> labels = {0, 1, 0};
    auto imgs = ptrs(images);

    auto plain = loss_and_grad(m, imgs, labels);
    auto scaled = loss_and_grad(m, imgs, labels, 1, {3.0, 3.0});
    CHECK(plain.loss == doctest::Approx(scaled.loss).epsilon(1e-12));

    // weight 2 on class 0 behaves like duplicating the class-0 samples
    auto weighted = loss_and_grad(m, imgs, labels, 1, {2.0, 1.0});
    std::vector<CodeImage> dup = {images[0], images[1], images[2], images[0], images[2]};
    auto dup_bg = loss_and_grad(m, ptrs(dup), {0, 1, 0, 0, 0});
    CHECK(weighted.loss == doctest::Approx(dup_bg.loss).epsilon(1e-9));
    for (size_t i = 0; i < weighted.grads.size(); ++i)
        CHECK(weighted.grads[i] == doctest::Approx(dup_bg.grads[i]).epsilon(1e-8));

    // the weighted gradient also passes a finite-difference check (small
    // eps keeps the perturbation inside one max-pool winner region)
    auto bg = loss_and_grad(m, imgs, labels, 1, {2.0, 0.5});
    const double eps = 1e-4;
    double worst = 0.0;
    for (size_t i = 0; i < m.params.size(); i += 7) { // sampled subset
        double saved = m.params[i];
        m.params[i] = saved + eps;
        double up = mean_loss(m, imgs, labels, 1, {2.0, 0.5});
        m.params[i] = saved - eps;
        double down = mean_loss(m, imgs, labels, 1, {2.0, 0.5});
        m.params[i] = saved;
        double fd = (up - down) / (2 * eps);
        double denom = std::max({std::abs(fd), std::abs(bg.grads[i]), 1e-6});
        worst = std::max(worst, std::abs(fd - bg.grads[i]) / denom);
    }
    CHECK(worst <= 1e-3);
}

TEST_CASE("gradients match central finite differences on a tiny model") {
    Rng rng(2718);
    auto m = tiny_model(77);
    auto images = random_batch(rng, 3, m.rows, m.dim);
    std::vector<int> labels = {0, 1, 1};
    auto imgptrs = ptrs(images);

    auto bg = loss_and_grad(m, imgptrs, labels);
    const double eps = 1e-3;
    double worst = 0.0;
    for (size_t i = 0; i < m.params.size(); ++i) {
        double saved = m.params[i];
        m.params[i] = saved + eps;
        double up = mean_loss(m, imgptrs, labels);
        m.params[i] = saved - eps;
        double down = mean_loss(m, imgptrs, labels);
        m.params[i] = saved;
        double fd = (up - down) / (2.0 * eps);
        double denom = std::max({std::abs(fd), std::abs(bg.grads[i]), 1e-6});
        worst = std::max(worst, std::abs(fd - bg.grads[i]) / denom);
    }
    CHECK(worst <= 1e-3);
}

TEST_CASE("multithreaded batches give byte-identical gradients") {
    Rng rng(1001);
    auto m = tiny_model(55, 16, 12, {1, 2, 3, 4}, 3);
    auto images = random_batch(rng, 7, m.rows, m.dim);
    std::vector<int> labels = {0, 1, 0, 1, 1, 0, 1};
    auto a = loss_and_grad(m, ptrs(images), labels, 1);
    auto b = loss_and_grad(m, ptrs(images), labels, 4);
    CHECK(a.loss == b.loss);
    CHECK(a.grads == b.grads); // bitwise
}

TEST_CASE("adam: zero gradient keeps parameters, first step bounded by lr") {
    auto m = tiny_model(41);
    auto before = m.params;
    auto state = make_adam_state(m);
    std::vector<double> zeros(m.params.size(), 0.0);
    for (int i = 0; i < 5; ++i) adam_step(m, zeros, state);
    CHECK(m.params == before);

    auto m2 = tiny_model(42);
    auto st2 = make_adam_state(m2);
    std::vector<double> grads(m2.params.size());
    Rng rng(6);
    for (auto& g : grads) g = rng.next_uniform(-2.0, 2.0);
    auto prev = m2.params;
    adam_step(m2, grads, st2, 0.001);
    for (size_t i = 0; i < prev.size(); ++i) {
        double delta = m2.params[i] - prev[i];
        CHECK(std::abs(delta) <= 0.001 * (1.0 + 1e-6));
        if (std::abs(grads[i]) > 1e-4) {
            CHECK(std::abs(delta) >= 0.001 * 0.99);
            CHECK((delta < 0) == (grads[i] > 0));
        }
    }
}

TEST_CASE("training separates a separable toy set and is deterministic") {
    // class 1 images carry a strong positive block, class 0 a negative one
    Rng rng(2025);
    std::vector<CodeImage> images;
    std::vector<int> labels;
    for (int i = 0; i < 20; ++i) {
        auto img = oracles::random_image(rng, 12, 8, 0.05);
        int label = i % 2;
        for (int d = 0; d < 8; ++d)
            img.at(0, 3, d) = label == 1 ? 0.9f : -0.9f;
        images.push_back(img);
        labels.push_back(label);
    }
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.epochs = 50;
    auto m = tiny_model(4096);
    auto trace = train(m, ptrs(images), labels, cfg, 11);
    REQUIRE(static_cast<int>(trace.size()) == cfg.epochs);
    CHECK(trace.back().train_accuracy == doctest::Approx(1.0));
    CHECK(trace.back().loss < trace.front().loss);
    for (size_t i = 0; i < images.size(); ++i) {
        auto pred = predict(m, images[i]);
        CHECK((pred.label == Label::vulnerable ? 1 : 0) == labels[i]);
    }

    // same seed, same data: identical parameters
    auto m2 = tiny_model(4096);
    train(m2, ptrs(images), labels, cfg, 11);
    CHECK(m.params == m2.params);
}

TEST_CASE("single-class training is rejected") {
    Rng rng(8);
    auto m = tiny_model(1);
    auto images = random_batch(rng, 4, m.rows, m.dim);
    TrainConfig cfg;
    cfg.epochs = 1;
    CHECK_THROWS_AS(train(m, ptrs(images), {1, 1, 1, 1}, cfg, 0), SingleClassDataset);
}

TEST_CASE("predict: softmax value and shift invariance") {
    // build a model that always produces logits (3, -1): zero conv params,
    // fc bias (3, -1)
    auto m = tiny_model(0);
    for (auto& p : m.params) p = 0.0;
    m.params[m.fc_bias_offset() + 0] = 3.0;
    m.params[m.fc_bias_offset() + 1] = -1.0;
    CodeImage img;
    img.rows = m.rows;
    img.dim = m.dim;
    img.populated = 0;
    img.data.assign(static_cast<size_t>(3) * m.rows * m.dim, 0.0f);
    auto pred = predict(m, img);
    CHECK(pred.label == Label::safe); // class 0
    CHECK(pred.probability == doctest::Approx(1.0 / (1.0 + std::exp(-4.0))).epsilon(1e-6));

    // shifting both logits by a constant changes nothing
    m.params[m.fc_bias_offset() + 0] = 3.0 + 7.5;
    m.params[m.fc_bias_offset() + 1] = -1.0 + 7.5;
    auto shifted = predict(m, img);
    CHECK(shifted.label == pred.label);
    CHECK(shifted.probability == doctest::Approx(pred.probability).epsilon(1e-9));
}

TEST_CASE("checkpoint round trip preserves the quantized parameters") {
    namespace fs = std::filesystem;
    auto path = (fs::temp_directory_path() / "vmc_cnn_test.bin").string();
    auto m = init_model(17, 14, 16, {1, 2, 3, 4, 5}, 3);
    save_model(m, path);
    auto back = load_model(path);
    CHECK(back.rows == m.rows);
    CHECK(back.dim == m.dim);
    CHECK(back.bank_heights == m.bank_heights);
    CHECK(back.maps_per_bank == m.maps_per_bank);
    CHECK(back.seed == m.seed);
    REQUIRE(back.params.size() == m.params.size());
    for (size_t i = 0; i < m.params.size(); ++i)
        CHECK(back.params[i] == static_cast<double>(static_cast<float>(m.params[i])));
    // saving the loaded model reproduces the same bytes
    auto path2 = (fs::temp_directory_path() / "vmc_cnn_test2.bin").string();
    save_model(back, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
    fs::remove(path);
    fs::remove(path2);
}

TEST_CASE("shape mismatches are rejected") {
    Rng rng(3);
    auto m = tiny_model(2);
    auto img = oracles::random_image(rng, m.rows + 1, m.dim);
    CHECK_THROWS_AS(forward(m, img), ShapeMismatch);
}

} // TEST_SUITE
