#include "rankminer/evalstats.hpp"

#include "rankminer/corpus.hpp"
#include "rankminer/distributions.hpp"
#include "rankminer/error.hpp"
#include "rankminer/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace rankminer {

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void require_finite(const std::vector<double>& v, const char* what) {
    if (!std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); }))
        throw ValidationError(std::string(what) + " holds non-finite values");
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = mean_of(x), my = mean_of(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateSampleError("correlation of a sample with zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

TestResult correlation_result(double r, std::size_t n) {
    const double df = static_cast<double>(n) - 2.0;
    TestResult out;
    out.statistic = r;
    const double denom = 1.0 - r * r;
    out.p_value = denom <= 0.0 ? 0.0 : dist::student_t_two_sided(r * std::sqrt(df / denom), df);
    out.interpretation = interpret_correlation(r);
    return out;
}

void check_pairs(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("correlation inputs differ in length");
    if (x.size() < 3) throw ValidationError("correlation needs at least 3 pairs");
    require_finite(x, "x");
    require_finite(y, "y");
}

// cc[0] + cc[1] x + cc[2] x^2 + ...
double poly(const double* cc, int nord, double x) {
    double ret = cc[0];
    if (nord > 1) {
        double p = x * cc[nord - 1];
        for (int j = nord - 2; j > 0; --j) p = (p + cc[j]) * x;
        ret += p;
    }
    return ret;
}

// Two-sided normal-approximation p-value with a 0.5 continuity correction.
double continuity_p(double deviation, double sigma) {
    const double z = std::max(0.0, std::abs(deviation) - 0.5) / sigma;
    return std::min(1.0, 2.0 * dist::normal_sf(z));
}

} // namespace

void RankedList::validate() const {
    std::set<std::string> seen;
    for (const auto& it : items)
        if (!seen.insert(it.label).second) throw ValidationError("duplicate label '" + it.label + "' in ranking");
}

double ndcg_at_k(const RankedList& predicted, const std::map<std::string, double>& ground_truth, std::size_t k,
                 Gain gain) {
    predicted.validate();
    if (k < 1 || k > predicted.items.size())
        throw ValidationError("k=" + std::to_string(k) + " outside 1.." + std::to_string(predicted.items.size()));
    std::vector<double> relevance;
    for (const auto& it : predicted.items) {
        auto g = ground_truth.find(it.label);
        if (g == ground_truth.end()) throw ValidationError("no ground-truth score for '" + it.label + "'");
        if (!(g->second >= 0.0) || !std::isfinite(g->second))
            throw ValidationError("ground-truth score for '" + it.label + "' must be finite and non-negative");
        relevance.push_back(gain == Gain::linear ? g->second : std::exp2(g->second) - 1.0);
    }
    auto dcg = [k](const std::vector<double>& rel) {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += rel[i] / std::log2(static_cast<double>(i) + 2.0);
        return s;
    };
    const double actual = dcg(relevance);
    std::sort(relevance.begin(), relevance.end(), std::greater<>());
    const double ideal = dcg(relevance);
    if (ideal == 0.0) return 1.0;
    return std::clamp(actual / ideal, 0.0, 1.0);
}

void PairedSample::validate() const {
    if (with_condition.size() != without_condition.size() || labels.size() != with_condition.size())
        throw ValidationError("paired sample columns differ in length");
    if (labels.size() < 3) throw ValidationError("paired sample needs at least 3 pairs");
    std::set<std::string> seen;
    for (const auto& l : labels)
        if (!seen.insert(l).second) throw ValidationError("duplicate label '" + l + "' in paired sample");
    require_finite(with_condition, "with_condition");
    require_finite(without_condition, "without_condition");
}

std::string interpret_correlation(double r) {
    if (!(std::abs(r) <= 1.0)) throw ValidationError("correlation must lie in [-1, 1]");
    const double a = std::abs(r);
    if (a < 0.2) return "very weak";
    if (a < 0.4) return "weak";
    if (a < 0.6) return "moderate";
    if (a < 0.8) return "strong";
    return "very strong";
}

std::string interpret_a12(double a12) {
    const double d = std::abs(a12 - 0.5);
    if (d < 0.06) return "negligible";
    if (d < 0.14) return "small";
    if (d < 0.21) return "medium";
    return "large";
}

TestResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    check_pairs(x, y);
    return correlation_result(correlation(x, y), x.size());
}

std::vector<double> fractional_ranks(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (auto t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

TestResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
    check_pairs(x, y);
    return correlation_result(correlation(fractional_ranks(x), fractional_ranks(y)), x.size());
}

TestResult shapiro_wilk(std::vector<double> x) {
    const auto n = x.size();
    if (n < 3 || n > 5000) throw ValidationError("Shapiro-Wilk needs 3 <= n <= 5000");
    require_finite(x, "sample");
    std::sort(x.begin(), x.end());
    if (x.back() - x.front() < 1e-19 * std::max(1.0, std::abs(x.front())))
        throw DegenerateSampleError("Shapiro-Wilk of an all-equal sample");

    static constexpr double g[2] = {-2.273, .459};
    static constexpr double c1[6] = {0., .221157, -.147981, -2.07119, 4.434685, -2.706056};
    static constexpr double c2[6] = {0., .042981, -.293762, -1.752461, 5.682633, -3.582633};
    static constexpr double c3[4] = {.544, -.39978, .025054, -6.714e-4};
    static constexpr double c4[4] = {1.3822, -.77857, .062767, -.0020322};
    static constexpr double c5[4] = {-1.5861, -.31082, -.083751, .0038915};
    static constexpr double c6[3] = {-.4803, -.082676, .0030302};

    const auto half = n / 2;
    const double an = static_cast<double>(n);
    std::vector<double> a(half + 1, 0.0); // 1-based

    if (n == 3) {
        a[1] = std::sqrt(0.5);
    } else {
        std::vector<double> m(half + 1);
        double summ2 = 0.0;
        for (std::size_t i = 1; i <= half; ++i) {
            m[i] = dist::normal_quantile((static_cast<double>(i) - .375) / (an + .25));
            summ2 += m[i] * m[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, 6, rsn) - m[1] / ssumm2;
        std::size_t first;
        double fac;
        if (n > 5) {
            first = 3;
            const double a2 = -m[2] / ssumm2 + poly(c2, 6, rsn);
            fac = std::sqrt((summ2 - 2.0 * m[1] * m[1] - 2.0 * m[2] * m[2]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[2] = a2;
        } else {
            first = 2;
            fac = std::sqrt((summ2 - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1));
        }
        a[1] = a1;
        for (std::size_t i = first; i <= half; ++i) a[i] = -m[i] / fac;
    }

    const double mean = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    double num = 0.0;
    for (std::size_t i = 1; i <= half; ++i) num += a[i] * (x[n - i] - x[i - 1]);
    double w = std::min(1.0, num * num / ss);

    TestResult out;
    if (n == 3) {
        w = std::max(w, 0.75);
        constexpr double pi6 = 1.90985931710274, stqr = 1.04719755119660;
        out.statistic = w;
        out.p_value = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
    } else {
        const double w1 = 1.0 - w;
        double y = std::log(w1);
        const double xx = std::log(an);
        double mu, sigma;
        double pw;
        if (n <= 11) {
            const double gamma = poly(g, 2, an);
            if (y >= gamma) {
                pw = 1e-99;
                out.statistic = w;
                out.p_value = pw;
                out.interpretation = "significantly different from normal distribution";
                return out;
            }
            y = -std::log(gamma - y);
            mu = poly(c3, 4, an);
            sigma = std::exp(poly(c4, 4, an));
        } else {
            mu = poly(c5, 4, xx);
            sigma = std::exp(poly(c6, 3, xx));
        }
        pw = dist::normal_sf((y - mu) / sigma);
        out.statistic = w;
        out.p_value = std::clamp(pw, 0.0, 1.0);
    }
    out.interpretation = out.p_value < 0.05 ? "significantly different from normal distribution"
                                            : "not significantly different from normal distribution";
    return out;
}

TestResult paired_t_test(const PairedSample& sample) {
    sample.validate();
    std::vector<double> d(sample.labels.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = sample.with_condition[i] - sample.without_condition[i];
    const double sd = sample_sd(d);
    if (sd == 0.0) throw DegenerateSampleError("paired t-test with zero variance of differences");
    const double m = mean_of(d);
    const double n = static_cast<double>(d.size());
    TestResult out;
    out.statistic = m / (sd / std::sqrt(n));
    out.p_value = dist::student_t_two_sided(out.statistic, n - 1.0);
    out.effect_size = m / sd;
    out.interpretation = out.p_value < 0.05 ? "significant" : "not significant";
    return out;
}

WilcoxonResult wilcoxon_signed_rank(const PairedSample& sample) {
    sample.validate();
    std::vector<double> d;
    for (std::size_t i = 0; i < sample.labels.size(); ++i) {
        const double diff = sample.with_condition[i] - sample.without_condition[i];
        if (diff != 0.0) d.push_back(diff);
    }
    if (d.empty()) throw DegenerateSampleError("Wilcoxon signed-rank with all differences zero");
    if (d.size() < 6) throw ValidationError("Wilcoxon signed-rank needs at least 6 nonzero differences");

    std::vector<double> magnitude(d.size());
    std::transform(d.begin(), d.end(), magnitude.begin(), [](double v) { return std::abs(v); });
    const auto ranks = fractional_ranks(magnitude);

    WilcoxonResult out;
    out.n_used = d.size();
    for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? out.w_plus : out.w_minus) += ranks[i];

    // tie correction: sum over groups of tied |d| of (t^3 - t)
    std::vector<double> sorted = magnitude;
    std::sort(sorted.begin(), sorted.end());
    double ties = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        ties += t * t * t - t;
        i = j;
    }
    const double n = static_cast<double>(d.size());
    const double mu = n * (n + 1.0) / 4.0;
    const double sigma = std::sqrt(n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - ties / 48.0);
    const double w = std::min(out.w_plus, out.w_minus);
    out.z = std::max(0.0, std::abs(out.w_plus - mu) - 0.5) / sigma;
    out.result.statistic = w;
    out.result.p_value = continuity_p(out.w_plus - mu, sigma);
    out.result.effect_size = (out.w_plus - out.w_minus) / (out.w_plus + out.w_minus);
    out.result.interpretation = out.result.p_value < 0.05 ? "significant" : "not significant";
    return out;
}

TestResult vargha_delaney_a12(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw ValidationError("A12 needs two non-empty samples");
    require_finite(a, "a");
    require_finite(b, "b");
    double wins = 0.0;
    for (double x : a)
        for (double y : b) wins += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    const double m = static_cast<double>(a.size()), n = static_cast<double>(b.size());
    const double a12 = wins / (m * n);

    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());
    double ties = 0.0;
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
        const double t = static_cast<double>(j - i);
        ties += t * t * t - t;
        i = j;
    }
    const double total = m + n;
    const double var = total > 1.0 ? m * n / 12.0 * ((total + 1.0) - ties / (total * (total - 1.0))) : 0.0;

    TestResult out;
    out.statistic = a12;
    out.effect_size = a12;
    out.p_value = var > 0.0 ? continuity_p(wins - m * n / 2.0, std::sqrt(var)) : 1.0;
    out.interpretation = interpret_a12(a12);
    return out;
}

IncreaseRateSummary increase_rate_summary(const PairedSample& sample) {
    if (sample.with_condition.size() != sample.without_condition.size() ||
        sample.labels.size() != sample.with_condition.size())
        throw ValidationError("paired sample columns differ in length");
    if (sample.labels.empty()) throw ValidationError("increase rate of an empty sample");
    IncreaseRateSummary out;
    for (std::size_t i = 0; i < sample.labels.size(); ++i) {
        if (!(sample.without_condition[i] > 0.0))
            throw ValidationError("baseline for '" + sample.labels[i] + "' is not positive");
        out.per_label.push_back((sample.with_condition[i] - sample.without_condition[i]) / sample.without_condition[i]);
    }
    out.mean = mean_of(out.per_label);
    out.stdev = sample_sd(out.per_label);
    return out;
}

std::map<std::string, PairedSample> read_measurements_csv(std::string_view contents) {
    auto rows = parse_csv(contents);
    if (rows.empty()) throw ValidationError("empty measurement file");
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < rows[0].size(); ++i) col[std::string(trim(rows[0][i]))] = i;
    for (const char* key : {"app_id", "cost_type", "with_ads", "no_ads"})
        if (!col.count(key)) throw ValidationError(std::string("measurement file lacks column '") + key + "'");
    static const std::set<std::string> kCostTypes{"memory", "cpu", "network", "battery"};
    std::map<std::string, PairedSample> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        if (row.size() < rows[0].size())
            throw ValidationError("measurement row " + std::to_string(r + 1) + " has too few columns");
        auto cost = std::string(trim(row[col["cost_type"]]));
        if (!kCostTypes.count(cost))
            throw ValidationError("measurement row " + std::to_string(r + 1) + ": unknown cost_type '" + cost + "'");
        double with = 0.0, without = 0.0;
        try {
            with = std::stod(std::string(trim(row[col["with_ads"]])));
            without = std::stod(std::string(trim(row[col["no_ads"]])));
        } catch (const std::exception&) {
            throw ValidationError("measurement row " + std::to_string(r + 1) + ": bad number");
        }
        auto& s = out[cost];
        s.labels.emplace_back(trim(row[col["app_id"]]));
        s.with_condition.push_back(with);
        s.without_condition.push_back(without);
    }
    return out;
}

std::string to_json(const TestResult& r) {
    nlohmann::ordered_json j;
    j["statistic"] = r.statistic;
    j["p_value"] = r.p_value;
    j["effect_size"] = r.effect_size ? nlohmann::ordered_json(*r.effect_size) : nlohmann::ordered_json(nullptr);
    j["interpretation"] = r.interpretation;
    return j.dump();
}

} // namespace rankminer
