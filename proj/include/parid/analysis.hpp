#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "parid/engine.hpp"
#include "parid/stats.hpp"
#include "parid/theory.hpp"
#include "parid/weights.hpp"

namespace parid {

/// Per-degree mean and variance of p_k(t) over independent replications.
class ReplicationAggregate {
public:
    ReplicationAggregate() = default;
    explicit ReplicationAggregate(std::span<const EmpiricalStats> reps);

    void add(const EmpiricalStats& rep);

    std::uint64_t rep_count() const noexcept { return reps_; }
    std::uint64_t t() const noexcept { return t_; }
    double mean(std::uint64_t k) const;
    /// Unbiased sample variance; 0 with fewer than two replications.
    double variance(std::uint64_t k) const;
    double standard_error(std::uint64_t k) const;
    /// N_k summed over all replications.
    std::uint64_t total_count(std::uint64_t k) const;
    std::vector<std::uint64_t> degrees() const;
    double mean_sum() const;

private:
    struct Moments {
        long double sum = 0;
        long double sum_sq = 0;
        std::uint64_t count = 0;
    };
    std::uint64_t reps_ = 0;
    std::uint64_t t_ = 0;
    std::map<std::uint64_t, Moments> per_k_;
};

/// max_k |p_k(t) - p_k|. Observed degrees beyond the theory's k_max
/// contribute max(p_k(t), tail_mass).
double sup_norm_deviation(const EmpiricalStats& emp, const TheoreticalDegreeDistribution& theory);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Negative log-log slope of (t, value) pairs; zero values are dropped.
/// Requires three distinct t and at least two usable points.
double decay_exponent(std::span<const std::pair<double, double>> sup_norms);

/// Hill estimate of the degree exponent tau from the top_k largest values:
/// 1 + [mean_i ln(X_(i) / X_(top_k + 1))]^{-1}. +inf when the top values tie.
double hill_estimator(std::span<const std::uint64_t> sample, std::size_t top_k);
/// Hill estimate on the top `fraction` of the sample (at least one value).
double hill_estimator_fraction(std::span<const std::uint64_t> sample, double fraction);

struct LowerBoundRow {
    std::uint64_t k = 0;
    double p_at_least = 0;
    double bound = 0;
    double slack = 0;
};

struct LowerBoundReport {
    std::vector<LowerBoundRow> rows;
    /// Largest bound - slack - p_at_least over all k, clipped at 0.
    double max_violation = 0;
    std::size_t violations = 0;
    bool pass() const noexcept { return violations == 0; }
};

/// Checks p_{>=k}(t) >= P(W >= k) t/(t+1) - 3 sigma for k = 1..max degree + 1,
/// sigma the binomial standard deviation of the bound's fraction. Rows cover
/// every k up to 1e5 and, above that, each observed degree plus one (the
/// binding k of each gap), so the verdict equals the full scan.
LowerBoundReport ccdf_lower_bound_check(const EmpiricalStats& emp, const WeightDistribution& weights);

struct MomentRow {
    std::uint64_t i = 0;
    double mean = 0;
    double stderr_ = 0;
};

struct MomentScalingReport {
    double s = 0;
    std::vector<MomentRow> rows;
    /// Fitted slope of log E[d_i(t)^s] against log i.
    double slope = 0;
    /// -s / (tau_W - 1).
    double expected_slope = 0;
};

/// Monte-Carlo E[d_i(t_max)^s] at each probe vertex, one fresh run per
/// replication. Requires tau_W in (1, 2) and s < tau_W - 1.
MomentScalingReport fractional_moment_scaling(const ModelParams& params, double s,
                                              std::span<const std::uint64_t> probes, std::uint64_t reps,
                                              unsigned workers = 1);

struct NormingRow {
    std::uint64_t t = 0;
    std::uint64_t a_t = 0;
    double mean_pos = 0;  // E[L_t^s]
    double mean_neg = 0;  // E[L_t^{-s}]
    double upper_ratio = 0;  // E[L_t^s] / a_t^s
    double lower_ratio = 0;  // E[L_t^{-s}] a_t^s
};

struct NormingReport {
    double s = 0;
    std::vector<NormingRow> rows;
    /// max / min of upper_ratio across t.
    double upper_spread = 0;
    double lower_max = 0;
    bool pass(double spread_limit = 2.0, double lower_limit = 10.0) const noexcept {
        return upper_spread < spread_limit && lower_max <= lower_limit;
    }
};

/// Monte-Carlo moments of L_t = W_1 + ... + W_t against the norming quantile
/// a_t. Requires tau_W in (1, 2) and 0 < s < tau_W - 1.
NormingReport norming_moment_check(const WeightDistribution& weights, double s,
                                   std::span<const std::uint64_t> t_values, std::uint64_t reps,
                                   std::uint64_t seed, unsigned workers = 1);

struct CouplingRow {
    std::uint64_t t = 0;
    double mean_u = 0;
    double stderr_ = 0;
};

struct CouplingGrowthReport {
    double a = 0;
    std::vector<CouplingRow> rows;
    /// Fitted exponent b of E[U_t] ~ K t^b.
    double slope = 0;
};

/// E[U_t] for each horizon t (each run uses truncation floor(t^a)).
CouplingGrowthReport coupling_growth(const ModelParams& params, double a, std::span<const std::uint64_t> horizons,
                                     std::uint64_t reps, unsigned workers = 1);

struct MarginalComparison {
    std::size_t compared = 0;
    double max_z = 0;
    std::uint64_t worst_k = 0;
    bool pass(double z_limit = 3.0) const noexcept { return max_z <= z_limit; }
};

/// Compares per-k means of two aggregates at every k whose pooled count is at
/// least `min_count` in both; z = |difference| / combined standard error.
MarginalComparison compare_aggregates(const ReplicationAggregate& a, const ReplicationAggregate& b,
                                      std::uint64_t min_count = 100);

}  // namespace parid
