#pragma once

#include <array>
#include <string>
#include <vector>

#include "vmc/common.hpp"
#include "vmc/oversample.hpp"

namespace vmc {

// Fixed-size 3-channel code image. Channel order: degree, katz, closeness.
// Each populated cell is centrality(channel, row) * embedding[row][d];
// everything past `populated` is zero padding.
struct CodeImage {
    int k = 1;
    int rows = 0; // 100*k for pipeline images
    int dim = 128;
    int populated = 0;
    std::string id;
    Label label = Label::unlabeled;
    std::vector<float> data; // [3][rows][dim], channel-major, row-major

    float at(int c, int r, int d) const {
        return data[(static_cast<size_t>(c) * rows + r) * dim + d];
    }
    float& at(int c, int r, int d) {
        return data[(static_cast<size_t>(c) * rows + r) * dim + d];
    }

    friend bool operator==(const CodeImage&, const CodeImage&) = default;
};

inline int row_threshold(int k) { return 100 * k; }

// Writes the first min(|rows|, 100*k) rows in order, zero-pads the rest,
// truncates overflow.
CodeImage build_image(const std::vector<Row>& rows, int k, const std::string& id = "",
                      Label label = Label::unlabeled, int dim = 128);

struct ContinuityGap {
    double mean_gap = 0.0;
    double max_gap = 0.0;
};

// Definition-1 style gap between adjacent populated rows: per pair the max
// absolute elementwise difference; aggregated as mean and max over pairs.
std::array<ContinuityGap, 3> continuity_gap(const CodeImage& image);

// Mean over the three channels' mean gaps; the scalar used by the
// oversampling continuity studies.
double continuity_gap_scalar(const CodeImage& image);

// File format VMCIMG1: k, R, dim, label byte, id, then 3*R*dim f32 payload.
std::vector<unsigned char> serialize_image(const CodeImage& image);
CodeImage deserialize_image(const std::vector<unsigned char>& bytes);

void save_image(const CodeImage& image, const std::string& path);
CodeImage load_image(const std::string& path);

} // namespace vmc
