#include "parid/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "parid/error.hpp"
#include "parid/parallel.hpp"

namespace parid {

ReplicationAggregate::ReplicationAggregate(std::span<const EmpiricalStats> reps) {
    for (const auto& r : reps) {
        add(r);
    }
}

void ReplicationAggregate::add(const EmpiricalStats& rep) {
    if (reps_ == 0) {
        t_ = rep.t;
    } else if (rep.t != t_) {
        throw PreconditionError("aggregated snapshots must share t");
    }
    ++reps_;
    const auto n = static_cast<long double>(rep.vertex_count());
    for (const auto& [k, c] : rep.counts) {
        auto& m = per_k_[k];
        const long double p = static_cast<long double>(c) / n;
        m.sum += p;
        m.sum_sq += p * p;
        m.count += c;
    }
}

double ReplicationAggregate::mean(std::uint64_t k) const {
    const auto it = per_k_.find(k);
    if (it == per_k_.end() || reps_ == 0) {
        return 0.0;
    }
    return static_cast<double>(it->second.sum / reps_);
}

double ReplicationAggregate::variance(std::uint64_t k) const {
    const auto it = per_k_.find(k);
    if (it == per_k_.end() || reps_ < 2) {
        return 0.0;
    }
    const long double n = reps_;
    const long double m = it->second.sum / n;
    const long double v = (it->second.sum_sq - n * m * m) / (n - 1);
    return static_cast<double>(std::max<long double>(v, 0));
}

double ReplicationAggregate::standard_error(std::uint64_t k) const {
    return reps_ == 0 ? 0.0 : std::sqrt(variance(k) / static_cast<double>(reps_));
}

std::uint64_t ReplicationAggregate::total_count(std::uint64_t k) const {
    const auto it = per_k_.find(k);
    return it == per_k_.end() ? 0 : it->second.count;
}

std::vector<std::uint64_t> ReplicationAggregate::degrees() const {
    std::vector<std::uint64_t> out;
    out.reserve(per_k_.size());
    for (const auto& [k, m] : per_k_) {
        out.push_back(k);
    }
    return out;
}

double ReplicationAggregate::mean_sum() const {
    long double s = 0;
    for (const auto& [k, m] : per_k_) {
        s += m.sum;
    }
    return reps_ == 0 ? 0.0 : static_cast<double>(s / reps_);
}

double sup_norm_deviation(const EmpiricalStats& emp, const TheoreticalDegreeDistribution& theory) {
    double worst = 0.0;
    const std::uint64_t k_max = theory.k_max();
    for (std::uint64_t k = 1; k <= k_max; ++k) {
        worst = std::max(worst, std::abs(emp.p(k) - theory.p[k]));
    }
    for (auto it = emp.counts.upper_bound(k_max); it != emp.counts.end(); ++it) {
        if (it->first == 0) {
            continue;
        }
        worst = std::max({worst, emp.p(it->first), theory.tail_mass});
    }
    return worst;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw PreconditionError("log-log regression needs at least two paired points");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    if (sxx == 0.0) {
        throw PreconditionError("log-log regression needs distinct x values");
    }
    return sxy / sxx;
}

double decay_exponent(std::span<const std::pair<double, double>> sup_norms) {
    std::set<double> distinct;
    for (const auto& [t, v] : sup_norms) {
        distinct.insert(t);
    }
    if (distinct.size() < 3) {
        throw PreconditionError("decay exponent needs at least three distinct t values");
    }
    std::vector<double> xs, ys;
    for (const auto& [t, v] : sup_norms) {
        if (v > 0.0) {
            xs.push_back(t);
            ys.push_back(v);
        }
    }
    if (xs.size() < 2) {
        throw PreconditionError("fewer than two positive sup-norm values remain");
    }
    return -loglog_slope(xs, ys);
}

double hill_estimator(std::span<const std::uint64_t> sample, std::size_t top_k) {
    if (top_k < 1) {
        throw PreconditionError("Hill estimator needs top_k >= 1");
    }
    if (top_k + 1 > sample.size()) {
        throw PreconditionError("Hill estimator needs top_k + 1 <= sample size");
    }
    std::vector<std::uint64_t> values(sample.begin(), sample.end());
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(top_k), values.end(),
                     std::greater<>{});
    const std::uint64_t threshold = values[top_k];
    if (threshold < 1) {
        throw PreconditionError("Hill estimator needs positive order statistics");
    }
    const double log_threshold = std::log(static_cast<double>(threshold));
    double acc = 0.0;
    for (std::size_t i = 0; i < top_k; ++i) {
        acc += std::log(static_cast<double>(values[i])) - log_threshold;
    }
    const double mean_spacing = acc / static_cast<double>(top_k);
    if (mean_spacing <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 1.0 + 1.0 / mean_spacing;
}

double hill_estimator_fraction(std::span<const std::uint64_t> sample, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw PreconditionError("Hill fraction must lie in (0, 1)");
    }
    const auto top_k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(sample.size()))));
    return hill_estimator(sample, top_k);
}

LowerBoundReport ccdf_lower_bound_check(const EmpiricalStats& emp, const WeightDistribution& weights) {
    LowerBoundReport report;
    const double t = static_cast<double>(emp.t);
    const double n = static_cast<double>(emp.vertex_count());
    const std::uint64_t k_end = emp.max_degree() + 1;
    // Every k up to kDenseRows gets a row. Beyond it N_{>=k} is constant
    // between consecutive observed degrees d < d', while bound - slack =
    // (q t - 3 sqrt(q (1 - q) t)) / n decreases in k wherever it is positive,
    // so k = d + 1 is the binding point of (d, d'] and checking only those
    // keeps heavy-tailed runs (max degree ~ 1e10) linear in distinct degrees.
    constexpr std::uint64_t kDenseRows = 100'000;
    std::vector<std::uint64_t> ks;
    for (std::uint64_t k = 1; k <= std::min(k_end, kDenseRows); ++k) {
        ks.push_back(k);
    }
    for (const auto& [d, c] : emp.counts) {
        if (d + 1 > kDenseRows) {
            ks.push_back(d + 1);
        }
    }
    report.rows.reserve(ks.size());
    // N_{>=k} for ascending k: subtract counts below k from the total.
    auto it = emp.counts.begin();
    std::uint64_t below = 0;
    const std::uint64_t total = emp.total_count();
    for (const auto k : ks) {
        while (it != emp.counts.end() && it->first < k) {
            below += it->second;
            ++it;
        }
        LowerBoundRow row;
        row.k = k;
        row.p_at_least = static_cast<double>(total - below) / n;
        const double q = weights.tail_at_least(k);
        row.bound = q * t / n;
        row.slack = 3.0 * std::sqrt(std::max(q * (1.0 - q), 0.0) * t) / n;
        const double gap = row.bound - row.slack - row.p_at_least;
        if (gap > 0.0) {
            ++report.violations;
            report.max_violation = std::max(report.max_violation, gap);
        }
        report.rows.push_back(row);
    }
    return report;
}

namespace {

void require_infinite_mean_regime(const WeightDistribution& weights, double s, bool allow_zero) {
    const double tau_w = weights.tail_exponent();
    if (!(tau_w > 1.0 && tau_w < 2.0)) {
        throw PreconditionError("analysis requires a power-law weight exponent tau_W in (1, 2)");
    }
    if (!(s < tau_w - 1.0) || (allow_zero ? s < 0.0 : !(s > 0.0))) {
        throw PreconditionError("moment order s must satisfy " + std::string(allow_zero ? "0 <= " : "0 < ") +
                                "s < tau_W - 1");
    }
}

}  // namespace

MomentScalingReport fractional_moment_scaling(const ModelParams& params, double s,
                                              std::span<const std::uint64_t> probes, std::uint64_t reps,
                                              unsigned workers) {
    require_infinite_mean_regime(params.weights, s, true);
    if (probes.empty() || reps < 1) {
        throw PreconditionError("moment scaling needs probe vertices and reps >= 1");
    }
    for (const auto i : probes) {
        if (i > params.t_max) {
            throw PreconditionError("probe vertex beyond t_max");
        }
    }
    const std::vector<std::uint64_t> probe_list(probes.begin(), probes.end());
    const auto per_rep = run_replications<std::vector<double>>(
        reps, workers, [&](std::uint64_t r) {
            const auto result = run(params, {}, r);
            const auto deg = result.final_state.degrees();
            std::vector<double> out;
            out.reserve(probe_list.size());
            for (const auto i : probe_list) {
                out.push_back(std::pow(static_cast<double>(deg[i]), s));
            }
            return out;
        });

    MomentScalingReport report;
    report.s = s;
    report.expected_slope = -s / (params.weights.tail_exponent() - 1.0);
    std::vector<double> xs, ys;
    for (std::size_t j = 0; j < probe_list.size(); ++j) {
        long double sum = 0, sum_sq = 0;
        for (const auto& rep : per_rep) {
            sum += rep[j];
            sum_sq += static_cast<long double>(rep[j]) * rep[j];
        }
        const long double n = static_cast<long double>(reps);
        const long double mean = sum / n;
        const long double var = reps > 1 ? std::max<long double>((sum_sq - n * mean * mean) / (n - 1), 0) : 0;
        report.rows.push_back({probe_list[j], static_cast<double>(mean), static_cast<double>(std::sqrt(var / n))});
        if (probe_list[j] >= 1) {
            xs.push_back(static_cast<double>(probe_list[j]));
            ys.push_back(static_cast<double>(mean));
        }
    }
    std::set<double> distinct(xs.begin(), xs.end());
    report.slope = distinct.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
    return report;
}

NormingReport norming_moment_check(const WeightDistribution& weights, double s,
                                   std::span<const std::uint64_t> t_values, std::uint64_t reps,
                                   std::uint64_t seed, unsigned workers) {
    require_infinite_mean_regime(weights, s, false);
    if (t_values.empty() || reps < 1 || !std::is_sorted(t_values.begin(), t_values.end()) || t_values.front() < 1) {
        throw PreconditionError("norming check needs sorted t values >= 1 and reps >= 1");
    }
    const std::vector<std::uint64_t> times(t_values.begin(), t_values.end());
    // Each replication records L_t at every requested t along one sequence.
    const auto per_rep = run_replications<std::vector<long double>>(reps, workers, [&](std::uint64_t r) {
        Stream rng(seed, r, Stream::kWeights);
        std::vector<long double> sums;
        sums.reserve(times.size());
        long double total = 0;
        std::uint64_t drawn = 0;
        for (const auto t : times) {
            for (; drawn < t; ++drawn) {
                total += static_cast<long double>(weights.sample_real(rng));
            }
            sums.push_back(total);
        }
        return sums;
    });

    NormingReport report;
    report.s = s;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0;
    for (std::size_t j = 0; j < times.size(); ++j) {
        long double pos = 0, neg = 0;
        for (const auto& rep : per_rep) {
            pos += std::pow(rep[j], static_cast<long double>(s));
            neg += std::pow(rep[j], static_cast<long double>(-s));
        }
        NormingRow row;
        row.t = times[j];
        row.a_t = weights.norming_quantile(times[j]).value;
        row.mean_pos = static_cast<double>(pos / reps);
        row.mean_neg = static_cast<double>(neg / reps);
        const double a_s = std::pow(static_cast<double>(row.a_t), s);
        row.upper_ratio = row.mean_pos / a_s;
        row.lower_ratio = row.mean_neg * a_s;
        lo = std::min(lo, row.upper_ratio);
        hi = std::max(hi, row.upper_ratio);
        report.lower_max = std::max(report.lower_max, row.lower_ratio);
        report.rows.push_back(row);
    }
    report.upper_spread = hi / lo;
    return report;
}

CouplingGrowthReport coupling_growth(const ModelParams& params, double a, std::span<const std::uint64_t> horizons,
                                     std::uint64_t reps, unsigned workers) {
    if (horizons.empty() || reps < 1) {
        throw PreconditionError("coupling growth needs horizons and reps >= 1");
    }
    CouplingGrowthReport report;
    report.a = a;
    std::vector<double> xs, ys;
    for (const auto t : horizons) {
        ModelParams p = params;
        p.t_max = t;
        const auto finals = run_replications<std::uint64_t>(
            reps, workers, [&](std::uint64_t r) { return coupled_run(p, a, r).u.back(); });
        long double sum = 0, sum_sq = 0;
        for (const auto u : finals) {
            sum += u;
            sum_sq += static_cast<long double>(u) * u;
        }
        const long double n = static_cast<long double>(reps);
        const long double mean = sum / n;
        const long double var = reps > 1 ? std::max<long double>((sum_sq - n * mean * mean) / (n - 1), 0) : 0;
        report.rows.push_back({t, static_cast<double>(mean), static_cast<double>(std::sqrt(var / n))});
        if (mean > 0) {
            xs.push_back(static_cast<double>(t));
            ys.push_back(static_cast<double>(mean));
        }
    }
    report.slope = xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
    return report;
}

MarginalComparison compare_aggregates(const ReplicationAggregate& a, const ReplicationAggregate& b,
                                      std::uint64_t min_count) {
    MarginalComparison cmp;
    for (const auto k : a.degrees()) {
        if (a.total_count(k) < min_count || b.total_count(k) < min_count) {
            continue;
        }
        ++cmp.compared;
        const double se = std::hypot(a.standard_error(k), b.standard_error(k));
        const double diff = std::abs(a.mean(k) - b.mean(k));
        const double z = se > 0.0 ? diff / se : (diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        if (z > cmp.max_z) {
            cmp.max_z = z;
            cmp.worst_k = k;
        }
    }
    return cmp;
}

}  // namespace parid
