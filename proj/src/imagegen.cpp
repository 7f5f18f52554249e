#include "vmc/imagegen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vmc/io_util.hpp"

namespace vmc {

CodeImage build_image(const std::vector<Row>& rows, int k, const std::string& id, Label label,
                      int dim) {
    CodeImage img;
    img.k = k;
    img.rows = row_threshold(k);
    img.dim = dim;
    img.id = id;
    img.label = label;
    img.data.assign(static_cast<size_t>(3) * img.rows * dim, 0.0f);
    img.populated = std::min<int>(static_cast<int>(rows.size()), img.rows);
    for (int r = 0; r < img.populated; ++r) {
        const Row& row = rows[r];
        double cent[3] = {row.centrality.degree, row.centrality.katz, row.centrality.closeness};
        for (int c = 0; c < 3; ++c)
            for (int d = 0; d < dim; ++d)
                img.at(c, r, d) = static_cast<float>(cent[c] * row.vector[d]);
    }
    return img;
}

std::array<ContinuityGap, 3> continuity_gap(const CodeImage& image) {
    std::array<ContinuityGap, 3> out{};
    if (image.populated <= 1) return out;
    for (int c = 0; c < 3; ++c) {
        double sum = 0.0, max_gap = 0.0;
        for (int r = 0; r + 1 < image.populated; ++r) {
            double pair_gap = 0.0;
            for (int d = 0; d < image.dim; ++d) {
                double diff = std::abs(static_cast<double>(image.at(c, r + 1, d)) -
                                       static_cast<double>(image.at(c, r, d)));
                pair_gap = std::max(pair_gap, diff);
            }
            sum += pair_gap;
            max_gap = std::max(max_gap, pair_gap);
        }
        out[c].mean_gap = sum / (image.populated - 1);
        out[c].max_gap = max_gap;
    }
    return out;
}

double continuity_gap_scalar(const CodeImage& image) {
    auto gaps = continuity_gap(image);
    return (gaps[0].mean_gap + gaps[1].mean_gap + gaps[2].mean_gap) / 3.0;
}

std::vector<unsigned char> serialize_image(const CodeImage& image) {
    std::ostringstream os(std::ios::binary);
    write_magic(os, "VMCIMG1");
    write_u32(os, static_cast<uint32_t>(image.k));
    write_u32(os, static_cast<uint32_t>(image.rows));
    write_u32(os, static_cast<uint32_t>(image.dim));
    os.put(static_cast<char>(image.label));
    write_u32(os, static_cast<uint32_t>(image.id.size()));
    os.write(image.id.data(), static_cast<std::streamsize>(image.id.size()));
    for (float f : image.data) write_f32(os, f);
    std::string s = os.str();
    return {s.begin(), s.end()};
}

namespace {

CodeImage read_image(std::istream& is, const char* what) {
    expect_magic(is, what);
    CodeImage img;
    img.k = static_cast<int>(read_u32(is, "k"));
    img.rows = static_cast<int>(read_u32(is, "rows"));
    img.dim = static_cast<int>(read_u32(is, "dim"));
    if (img.k < 1 || img.rows != row_threshold(img.k) || img.dim < 1)
        throw ShapeMismatch("image header shape " + std::to_string(img.rows) + "x" +
                            std::to_string(img.dim) + " inconsistent with k=" +
                            std::to_string(img.k));
    int lb = is.get();
    if (lb < 0) throw TruncatedFile("truncated label byte");
    img.label = static_cast<Label>(lb);
    uint32_t idlen = read_u32(is, "id length");
    img.id.resize(idlen);
    is.read(img.id.data(), idlen);
    if (!is) throw TruncatedFile("truncated image id");
    size_t count = static_cast<size_t>(3) * img.rows * img.dim;
    img.data.resize(count);
    for (size_t i = 0; i < count; ++i) img.data[i] = read_f32(is, "image payload");

    // populated-row count is not part of the format; infer the last row that
    // carries any signal (diagnostics only, training reads the full tensor)
    img.populated = 0;
    for (int r = img.rows - 1; r >= 0 && img.populated == 0; --r)
        for (int c = 0; c < 3 && img.populated == 0; ++c)
            for (int d = 0; d < img.dim; ++d)
                if (img.at(c, r, d) != 0.0f) {
                    img.populated = r + 1;
                    break;
                }
    return img;
}

} // namespace

CodeImage deserialize_image(const std::vector<unsigned char>& bytes) {
    std::string s(bytes.begin(), bytes.end());
    std::istringstream is(s, std::ios::binary);
    return read_image(is, "VMCIMG1");
}

void save_image(const CodeImage& image, const std::string& path) {
    auto bytes = serialize_image(image);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw PipelineError("cannot write " + path);
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
}

CodeImage load_image(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw PipelineError("cannot read " + path);
    return read_image(is, "VMCIMG1");
}

} // namespace vmc
