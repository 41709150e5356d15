#include "rankminer/bubbleviz.hpp"

#include "rankminer/error.hpp"
#include "rankminer/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace rankminer {

namespace {

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

double off_diagonal_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

double frobenius(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

} // namespace

Matrix distance_matrix(const std::vector<TermVector>& terms) {
    if (terms.size() < 2) throw ValidationError("distance matrix needs at least two terms");
    const auto n = terms.size();
    Matrix d(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = std::clamp(1.0 - cosine_similarity(terms[i].vector, terms[j].vector), 0.0, 2.0);
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

SymmetricEigen jacobi_eigen(Matrix a, double tolerance, int max_sweeps) {
    const auto n = a.rows();
    if (n == 0 || a.cols() != n) throw ValidationError("eigendecomposition needs a square matrix");
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;
    const double threshold = tolerance * std::max(1.0, frobenius(a));

    for (int sweep = 0; sweep < max_sweeps && off_diagonal_norm(a) > threshold; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (off_diagonal_norm(a) > threshold) throw Error("Jacobi eigendecomposition did not converge");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) > a(y, y); });
    SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

double kruskal_stress(const Matrix& coordinates, const Matrix& distances) {
    const auto n = distances.rows();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double sq = 0.0;
            for (std::size_t k = 0; k < coordinates.cols(); ++k) {
                const double diff = coordinates(i, k) - coordinates(j, k);
                sq += diff * diff;
            }
            const double e = std::sqrt(sq) - distances(i, j);
            num += e * e;
            den += distances(i, j) * distances(i, j);
        }
    }
    return den == 0.0 ? 0.0 : std::sqrt(num / den);
}

MdsResult classical_mds(const Matrix& d, std::size_t dims) {
    const auto n = d.rows();
    if (n < 2 || d.cols() != n) throw ValidationError("MDS needs a square distance matrix with n >= 2");
    if (dims < 1) throw ValidationError("MDS needs dims >= 1");
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(d(i, j)) || d(i, j) < 0.0)
                throw ValidationError("distances must be finite and non-negative");
            scale = std::max(scale, d(i, j));
        }
    for (std::size_t i = 0; i < n; ++i) {
        if (d(i, i) != 0.0) throw ValidationError("distance matrix diagonal must be zero");
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(d(i, j) - d(j, i)) > 1e-12 * std::max(1.0, scale))
                throw ValidationError("distance matrix is not symmetric");
    }

    Matrix sq(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) sq(i, j) = d(i, j) * d(i, j);
    std::vector<double> row_mean(n, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) row_mean[i] += sq(i, j);
        grand += row_mean[i];
        row_mean[i] /= static_cast<double>(n);
    }
    grand /= static_cast<double>(n * n);
    Matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b(i, j) = -0.5 * (sq(i, j) - row_mean[i] - row_mean[j] + grand);

    auto eig = jacobi_eigen(b);
    MdsResult out;
    out.eigenvalues = eig.values;
    out.coordinates = Matrix(n, dims);
    for (std::size_t k = 0; k < dims && k < n; ++k) {
        const double lambda = std::max(eig.values[k], 0.0);
        const double root = std::sqrt(lambda);
        for (std::size_t i = 0; i < n; ++i) out.coordinates(i, k) = eig.vectors(i, k) * root;
    }
    for (std::size_t k = 0; k < dims; ++k) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += out.coordinates(i, k);
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) out.coordinates(i, k) -= mean;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = out.coordinates(i, k);
            if (std::abs(c) <= 1e-12 * std::max(1.0, scale)) continue;
            if (c < 0.0)
                for (std::size_t r = 0; r < n; ++r) out.coordinates(r, k) = -out.coordinates(r, k);
            break;
        }
    }
    out.stress = kruskal_stress(out.coordinates, d);
    return out;
}

void StyleConfig::validate() const {
    if (!(width > 0.0 && height > 0.0)) throw ValidationError("chart size must be positive");
    if (!(r_min > 0.0 && r_max >= r_min)) throw ValidationError("radii need 0 < r_min <= r_max");
    if (!(margin >= 0.0 && margin < 0.5)) throw ValidationError("margin must lie in [0, 0.5)");
}

BubbleLayout layout_bubbles(const std::vector<TermVector>& terms, const std::map<std::string, std::string>& groups) {
    auto d = distance_matrix(terms);
    auto mds = classical_mds(d, 2);
    BubbleLayout layout;
    layout.stress = mds.stress;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        Bubble b;
        b.term = term_text(terms[i].term);
        b.x = mds.coordinates(i, 0);
        b.y = mds.coordinates(i, 1);
        if (auto g = groups.find(b.term); g != groups.end()) b.group = g->second;
        layout.bubbles.push_back(std::move(b));
    }
    layout.target_distances = std::move(d);
    return layout;
}

double bubble_radius(double concern, double max_concern, const StyleConfig& style) {
    if (!(concern >= 0.0)) throw ValidationError("concern must be non-negative");
    if (max_concern <= 0.0) return style.r_min;
    return style.r_min + (style.r_max - style.r_min) * std::sqrt(std::min(concern / max_concern, 1.0));
}

RenderOutput render(const BubbleLayout& layout, const std::map<std::string, double>& concerns,
                    const StyleConfig& style) {
    style.validate();
    if (layout.bubbles.empty()) throw ValidationError("nothing to render");
    double max_concern = 0.0;
    for (const auto& b : layout.bubbles) {
        auto it = concerns.find(b.term);
        if (it == concerns.end()) throw ValidationError("no concern value for '" + b.term + "'");
        if (!(it->second >= 0.0) || !std::isfinite(it->second))
            throw ValidationError("concern for '" + b.term + "' must be finite and non-negative");
        max_concern = std::max(max_concern, it->second);
    }

    double min_x = layout.bubbles[0].x, max_x = min_x, min_y = layout.bubbles[0].y, max_y = min_y;
    for (const auto& b : layout.bubbles) {
        min_x = std::min(min_x, b.x);
        max_x = std::max(max_x, b.x);
        min_y = std::min(min_y, b.y);
        max_y = std::max(max_y, b.y);
    }
    const double inner_w = style.width * (1.0 - 2.0 * style.margin);
    const double inner_h = style.height * (1.0 - 2.0 * style.margin);
    const double span_x = max_x - min_x, span_y = max_y - min_y;
    double scale = 1.0;
    if (span_x > 0.0 || span_y > 0.0)
        scale = std::min(span_x > 0.0 ? inner_w / span_x : INFINITY, span_y > 0.0 ? inner_h / span_y : INFINITY);
    const double off_x = style.width / 2.0 - scale * (min_x + max_x) / 2.0;
    const double off_y = style.height / 2.0 - scale * (min_y + max_y) / 2.0;

    RenderOutput out;
    out.placed = layout;
    auto& bubbles = out.placed.bubbles;
    for (auto& b : bubbles) {
        b.x = off_x + scale * b.x;
        b.y = off_y + scale * b.y;
        b.radius = bubble_radius(concerns.at(b.term), max_concern, style);
    }

    if (style.resolve_overlaps) {
        for (std::size_t i = 0; i < bubbles.size(); ++i) {
            for (std::size_t j = i + 1; j < bubbles.size(); ++j) {
                double dx = bubbles[j].x - bubbles[i].x, dy = bubbles[j].y - bubbles[i].y;
                double dist = std::hypot(dx, dy);
                const double need = bubbles[i].radius + bubbles[j].radius;
                if (dist >= need) continue;
                if (dist == 0.0) {
                    dx = 1.0;
                    dy = 0.0;
                    dist = 1.0;
                }
                const double push = (need - std::hypot(bubbles[j].x - bubbles[i].x, bubbles[j].y - bubbles[i].y)) / 2.0;
                const double ux = dx / dist, uy = dy / dist;
                bubbles[i].x -= push * ux;
                bubbles[i].y -= push * uy;
                bubbles[j].x += push * ux;
                bubbles[j].y += push * uy;
            }
        }
    }

    if (!layout.target_distances.empty() && layout.target_distances.rows() == bubbles.size()) {
        Matrix coords(bubbles.size(), 2);
        for (std::size_t i = 0; i < bubbles.size(); ++i) {
            coords(i, 0) = (bubbles[i].x - off_x) / scale;
            coords(i, 1) = (bubbles[i].y - off_y) / scale;
        }
        out.placed.stress = kruskal_stress(coords, layout.target_distances);
    }

    std::set<std::string> group_names;
    for (const auto& b : bubbles)
        if (b.group) group_names.insert(*b.group);
    std::map<std::string, std::string> color;
    std::size_t next = 0;
    for (const auto& g : group_names) color[g] = kPalette[next++ % std::size(kPalette)];

    const auto w = format_fixed(style.width, 0), h = format_fixed(style.height, 0);
    std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- rankminer bubbles v1 -->\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w + "\" height=\"" + h + "\" viewBox=\"0 0 " + w +
           " " + h + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    for (const auto& b : bubbles) {
        const auto fill = b.group ? color[*b.group] : std::string(kPalette[0]);
        svg += "<circle cx=\"" + format_fixed(b.x, 2) + "\" cy=\"" + format_fixed(b.y, 2) + "\" r=\"" +
               format_fixed(b.radius, 2) + "\" fill=\"" + fill + "\" fill-opacity=\"0.6\" stroke=\"#333333\"/>\n";
        svg += "<text x=\"" + format_fixed(b.x, 2) + "\" y=\"" + format_fixed(b.y, 2) +
               "\" text-anchor=\"middle\" dominant-baseline=\"middle\" font-family=\"" + xml_escape(style.font_family) +
               "\" font-size=\"12\">" + xml_escape(b.term) + "</text>\n";
    }
    svg += "</svg>\n";
    out.svg = std::move(svg);

    nlohmann::ordered_json doc;
    doc["format"] = "rankminer.bubbles";
    doc["version"] = 1;
    doc["width"] = style.width;
    doc["height"] = style.height;
    doc["stress"] = out.placed.stress;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& b : bubbles) {
        nlohmann::ordered_json j;
        j["term"] = b.term;
        j["x"] = b.x;
        j["y"] = b.y;
        j["radius"] = b.radius;
        j["group"] = b.group ? nlohmann::ordered_json(*b.group) : nlohmann::ordered_json(nullptr);
        arr.push_back(std::move(j));
    }
    doc["bubbles"] = std::move(arr);
    out.json = doc.dump(2) + "\n";
    return out;
}

std::map<std::string, std::string> parse_labels(std::string_view contents) {
    std::map<std::string, std::string> out;
    for (const auto& line : content_lines(contents)) {
        auto cols = split(line, '\t');
        if (cols.size() < 2) throw ValidationError("label line without a tab: '" + line + "'");
        out[std::string(trim(cols[0]))] = std::string(trim(cols[1]));
    }
    return out;
}

} // namespace rankminer
