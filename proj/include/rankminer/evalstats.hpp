#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rankminer {

struct RankedItem {
    std::string label;
    double score = 0.0;
};

// Items in predicted order, best first. Labels must be unique.
struct RankedList {
    std::vector<RankedItem> items;

    void validate() const;
};

enum class Gain {
    linear,     // gain = ground-truth score
    exponential // gain = 2^score - 1
};

// DCG@k = sum_i gain(i) / log2(i + 1) over the first k predicted items,
// normalized by the DCG of the same items in ground-truth order. Returns 1
// when every ground-truth score is zero. Throws ValidationError for k out of
// range, labels without a ground-truth score, or negative scores.
double ndcg_at_k(const RankedList& predicted, const std::map<std::string, double>& ground_truth, std::size_t k,
                 Gain gain = Gain::linear);

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::optional<double> effect_size;
    std::string interpretation;
};

struct PairedSample {
    std::vector<std::string> labels;
    std::vector<double> with_condition;
    std::vector<double> without_condition;

    // Equal lengths, at least 3 pairs, unique labels.
    void validate() const;
};

// |r| bands: very weak < 0.2 <= weak < 0.4 <= moderate < 0.6 <= strong < 0.8 <= very strong.
std::string interpret_correlation(double r);
// |A12 - 0.5| bands: negligible < 0.06 <= small < 0.14 <= medium < 0.21 <= large.
std::string interpret_a12(double a12);

// Two-sided p-values from t = r*sqrt((n-2)/(1-r^2)) against Student-t(n-2).
TestResult pearson(const std::vector<double>& x, const std::vector<double>& y);
TestResult spearman(const std::vector<double>& x, const std::vector<double>& y);
// 1-based ranks; tied values share their average rank.
std::vector<double> fractional_ranks(const std::vector<double>& values);

// Royston's AS R94 W statistic and p-value, 3 <= n <= 5000.
TestResult shapiro_wilk(std::vector<double> x);

// t on the differences with - without, two-sided against Student-t(n-1).
// Effect size is mean(d)/sd(d).
TestResult paired_t_test(const PairedSample& sample);

struct WilcoxonResult {
    TestResult result; // statistic = min(W+, W-)
    double w_plus = 0.0;
    double w_minus = 0.0;
    std::size_t n_used = 0; // pairs left after dropping zero differences
    double z = 0.0;
};

// Normal approximation with continuity and tie corrections. Needs at least
// six nonzero differences. Effect size is the matched-pairs rank-biserial
// correlation (W+ - W-)/(W+ + W-).
WilcoxonResult wilcoxon_signed_rank(const PairedSample& sample);

// A12 = (#{a > b} + 0.5 #{a = b}) / (|a| |b|). The p-value is the
// Mann-Whitney U normal approximation (U = A12 |a| |b|).
TestResult vargha_delaney_a12(const std::vector<double>& a, const std::vector<double>& b);

struct IncreaseRateSummary {
    double mean = 0.0;
    double stdev = 0.0; // sample standard deviation
    std::vector<double> per_label;
};

// rate = (with - without) / without. Throws ValidationError naming the
// label when a baseline is not positive.
IncreaseRateSummary increase_rate_summary(const PairedSample& sample);

// CSV with columns app_id, cost_type, with_ads, no_ads; one sample per cost type.
std::map<std::string, PairedSample> read_measurements_csv(std::string_view contents);

std::string to_json(const TestResult& r);

} // namespace rankminer
