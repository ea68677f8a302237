#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "parid/rng.hpp"

namespace parid {

struct ConstantWeights {
    std::uint64_t m = 1;
    bool operator==(const ConstantWeights&) const = default;
};

/// r_k proportional to k^{-tau} on k >= k_min.
struct ZetaWeights {
    double tau = 2.5;
    std::uint64_t k_min = 1;
    bool operator==(const ZetaWeights&) const = default;
};

/// Finite pmf table, support listed in strictly increasing k.
struct ExplicitWeights {
    std::vector<std::pair<std::uint64_t, double>> table;
    bool operator==(const ExplicitWeights&) const = default;
};

using WeightKind = std::variant<ConstantWeights, ZetaWeights, ExplicitWeights>;

/// Result of norming_quantile: a_n = sup{x : P(W > x) >= 1/n}, i.e. the
/// largest integer a with P(W >= a) >= 1/n.
struct NormingQuantile {
    std::uint64_t value = 0;
    /// Set when a_n is clamped to the maximum of a bounded support.
    bool at_support_max = false;
};

/// Law of the i.i.d. initial degrees W_i. Immutable after construction and
/// safe to share between threads; sampling state lives in the caller's Stream.
class WeightDistribution {
public:
    static WeightDistribution constant(std::uint64_t m);
    static WeightDistribution zeta(double tau, std::uint64_t k_min = 1);
    static WeightDistribution explicit_pmf(std::vector<std::pair<std::uint64_t, double>> table);

    /// Parses `const:m=3`, `zeta:tau=2.5,kmin=1` or `explicit:1=0.5,2=0.5`.
    static WeightDistribution parse(std::string_view spec);
    std::string to_string() const;

    const WeightKind& kind() const noexcept { return kind_; }

    double pmf(std::uint64_t k) const;
    /// P(W > x).
    double ccdf(double x) const;
    /// P(W >= k).
    double tail_at_least(std::uint64_t k) const;
    /// +inf when the mean diverges.
    double mean() const noexcept { return mean_; }
    bool has_finite_mean() const noexcept;
    std::uint64_t min_support() const noexcept { return min_support_; }
    std::optional<std::uint64_t> max_support() const noexcept;
    /// Power-law exponent of r_k; +inf for laws with a lighter tail.
    double tail_exponent() const noexcept;

    std::uint64_t sample(Stream& rng) const;
    /// Same draw as sample() (consuming the same variates) as a real number;
    /// zeta draws beyond 2^62, where sample() throws, are returned through the
    /// continuous inverse of the tail.
    double sample_real(Stream& rng) const;

    NormingQuantile norming_quantile(std::uint64_t n) const;

    bool operator==(const WeightDistribution& other) const { return kind_ == other.kind_; }

private:
    struct ZetaTables;

    explicit WeightDistribution(WeightKind kind);

    /// P(W > k) for integer k.
    double survival(std::uint64_t k) const;
    std::uint64_t zeta_inverse(double v) const;

    WeightKind kind_;
    double mean_ = 0;
    std::uint64_t min_support_ = 1;
    // Explicit: cumulative and suffix sums aligned with table.
    std::vector<double> cdf_;
    std::vector<double> suffix_;
    std::shared_ptr<const ZetaTables> zeta_;
};

/// sum_{k >= n} k^{-s} for s > 1, n >= 1, relative error below 1e-13.
double hurwitz_zeta(double s, double n);

}  // namespace parid
