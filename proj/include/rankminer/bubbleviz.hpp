#pragma once

#include "rankminer/embeddings.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rankminer {

// Small dense row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// d(i,j) = 1 - cos(v_i, v_j). Needs at least two nonzero vectors.
Matrix distance_matrix(const std::vector<TermVector>& terms);

struct SymmetricEigen {
    std::vector<double> values; // descending
    Matrix vectors;             // column k pairs with values[k]
};

// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
// `tolerance` (relative to the matrix norm when that exceeds 1).
SymmetricEigen jacobi_eigen(Matrix a, double tolerance = 1e-10, int max_sweeps = 100);

struct MdsResult {
    Matrix coordinates; // n x dims, centered at the origin
    std::vector<double> eigenvalues;
    double stress = 0.0; // sqrt(sum (dhat - d)^2 / sum d^2)
};

// Torgerson scaling of B = -1/2 J D^2 J. Negative eigenvalues are truncated
// to zero; each axis is flipped so that its first nonzero coordinate is positive.
MdsResult classical_mds(const Matrix& distances, std::size_t dims = 2);
double kruskal_stress(const Matrix& coordinates, const Matrix& distances);

struct Bubble {
    std::string term;
    double x = 0.0;
    double y = 0.0;
    double radius = 0.0;
    std::optional<std::string> group;
};

struct BubbleLayout {
    std::vector<Bubble> bubbles;
    double stress = 0.0;
    // Target distances the layout approximates; when present, rendering
    // reports stress after overlap removal.
    Matrix target_distances;
};

struct StyleConfig {
    double width = 900.0;
    double height = 700.0;
    double r_min = 8.0;
    double r_max = 60.0;
    double margin = 0.05; // fraction of each side
    bool resolve_overlaps = true;
    std::string font_family = "sans-serif";

    void validate() const;
};

// MDS coordinates for the terms; radii are left at zero until rendering.
BubbleLayout layout_bubbles(const std::vector<TermVector>& terms,
                            const std::map<std::string, std::string>& groups = {});

// r_min + (r_max - r_min) * sqrt(concern / max_concern), i.e. area grows
// linearly with concern. All-zero concerns give r_min.
double bubble_radius(double concern, double max_concern, const StyleConfig& style);

struct RenderOutput {
    std::string svg;
    std::string json;
    BubbleLayout placed; // viewbox coordinates and final radii
};

// Scales the layout into the viewbox, sizes bubbles by concern, pushes
// overlapping pairs apart in one ascending-index pass, and emits standalone
// SVG plus a JSON mirror. Throws ValidationError on a missing or negative concern.
RenderOutput render(const BubbleLayout& layout, const std::map<std::string, double>& concerns,
                    const StyleConfig& style);

std::map<std::string, std::string> parse_labels(std::string_view contents);

} // namespace rankminer
