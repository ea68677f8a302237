#include <algorithm>
#include <cmath>
#include <limits>

#include "parid/engine.hpp"
#include "parid/error.hpp"

namespace parid {

namespace {

// Joint state of G and G'. Vertices whose degrees agree in both graphs share
// one weight in `common_`; the set `diff_` of disagreeing vertices is small
// and handled explicitly each step.
class CoupledGraphs {
public:
    CoupledGraphs(const ModelParams& params, std::uint64_t level)
        : delta_(params.delta), level_(level) {
        d_.reserve(params.t_max + 1);
        dp_.reserve(params.t_max + 1);
        slot_.reserve(params.t_max + 1);
        g_.reserve(params.t_max + 1);
        common_.reserve(params.t_max + 1);
    }

    std::uint64_t truncate(std::uint64_t w) const noexcept { return std::min(w, level_); }

    void add_vertex(std::uint64_t w) {
        const std::uint64_t wp = truncate(w);
        d_.push_back(w);
        dp_.push_back(wp);
        slot_.push_back(kNotInDiff);
        g_.push_back(static_cast<double>(w) + delta_);
        common_.push_back(0.0);
        l_ += w;
        lp_ += wp;
        sync(d_.size() - 1);
    }

    void init(std::uint64_t w) {
        const std::uint64_t wp = truncate(w);
        for (int v = 0; v < 2; ++v) {
            d_.push_back(w);
            dp_.push_back(wp);
            slot_.push_back(kNotInDiff);
            g_.push_back(static_cast<double>(w) + delta_);
            common_.push_back(0.0);
            sync(d_.size() - 1);
        }
        l_ = w;
        lp_ = wp;
    }

    /// Attaches the edges of vertex s (initial degree w) in both graphs and
    /// returns the increase of the miscoupling count.
    std::uint64_t step(std::uint64_t w, Stream& coupling_rng, Stream& endpoint_rng) {
        const std::uint64_t wp = truncate(w);
        const double n = static_cast<double>(d_.size());
        const double z = 2.0 * static_cast<double>(l_) + n * delta_;
        const double zp = 2.0 * static_cast<double>(lp_) + n * delta_;
        prepare_diff(z, zp);

        const double common_total = std::max(common_.total(), 0.0);
        const double common_mass = common_total / z;
        const double overlap = common_mass + min_prefix_back();
        // Residual of G' on agreeing vertices: x_i (1/Z' - 1/Z) >= 0 as L' <= L.
        const double common_residual = common_total * (1.0 / zp - 1.0 / z);
        const double residual_p_total = common_residual + back(res_p_prefix_);

        std::uint64_t added = 0;
        hits_.clear();
        hits_p_.clear();
        excess_.clear();
        for (std::uint64_t l = 0; l < wp; ++l) {
            const double u = coupling_rng.uniform();
            if (diff_.empty() || u < overlap || !(back(res_g_prefix_) > 0.0)) {
                const double v = diff_.empty() ? u * common_mass : u;
                std::size_t i = 0;
                if (v < common_mass || min_prefix_back() <= 0.0) {
                    i = common_.find(std::min(v, common_mass) * z);
                } else {
                    i = pick(min_prefix_, v - common_mass);
                }
                hits_.push_back(i);
                hits_p_.push_back(i);
                continue;
            }
            ++added;
            hits_.push_back(pick(res_g_prefix_, coupling_rng.uniform() * back(res_g_prefix_)));
            const double r = coupling_rng.uniform() * residual_p_total;
            if (r < common_residual) {
                hits_p_.push_back(common_.find(r / (1.0 / zp - 1.0 / z)));
            } else {
                hits_p_.push_back(pick(res_p_prefix_, r - common_residual));
            }
        }
        if (w > wp) {
            g_.sample_multinomial(w - wp, endpoint_rng,
                                  [this](std::size_t i, std::uint64_t c) { excess_.emplace_back(i, c); });
            added += 2 * (w - wp);
        }

        for (const auto i : hits_) {
            ++d_[i];
        }
        for (const auto& [i, c] : excess_) {
            d_[i] += c;
        }
        for (const auto i : hits_p_) {
            ++dp_[i];
        }
        for (const auto i : hits_) {
            g_.set(i, static_cast<double>(d_[i]) + delta_);
            sync(i);
        }
        for (const auto& [i, c] : excess_) {
            g_.set(i, static_cast<double>(d_[i]) + delta_);
            sync(i);
        }
        for (const auto i : hits_p_) {
            sync(i);
        }
        add_vertex(w);
        g_.refresh(2.0 * static_cast<double>(l_) + static_cast<double>(d_.size()) * delta_);
        common_.refresh(common_exact_);
        return added;
    }

    std::span<const std::uint64_t> degrees() const noexcept { return d_; }
    std::span<const std::uint64_t> degrees_prime() const noexcept { return dp_; }
    std::uint64_t edges() const noexcept { return l_; }
    std::uint64_t edges_prime() const noexcept { return lp_; }

private:
    static constexpr std::size_t kNotInDiff = std::numeric_limits<std::size_t>::max();

    static double back(const std::vector<double>& v) { return v.empty() ? 0.0 : v.back(); }
    double min_prefix_back() const { return back(min_prefix_); }

    std::size_t pick(const std::vector<double>& prefix, double target) const {
        auto it = std::upper_bound(prefix.begin(), prefix.end(), target);
        if (it == prefix.end()) {
            --it;  // target rounded past the last boundary
        }
        return diff_[static_cast<std::size_t>(it - prefix.begin())];
    }

    // Keeps the common weight and diff-set membership of vertex i current.
    void sync(std::size_t i) {
        const bool differs = d_[i] != dp_[i];
        const double weight = differs ? 0.0 : static_cast<double>(d_[i]) + delta_;
        if (common_.value(i) != weight) {
            common_exact_ += static_cast<long double>(weight) - common_.value(i);
            common_.set(i, weight);
        }
        if (differs && slot_[i] == kNotInDiff) {
            slot_[i] = diff_.size();
            diff_.push_back(i);
        } else if (!differs && slot_[i] != kNotInDiff) {
            const std::size_t s = slot_[i];
            diff_[s] = diff_.back();
            slot_[diff_[s]] = s;
            diff_.pop_back();
            slot_[i] = kNotInDiff;
        }
    }

    void prepare_diff(double z, double zp) {
        min_prefix_.resize(diff_.size());
        res_g_prefix_.resize(diff_.size());
        res_p_prefix_.resize(diff_.size());
        double acc_min = 0;
        double acc_g = 0;
        double acc_p = 0;
        for (std::size_t j = 0; j < diff_.size(); ++j) {
            const std::size_t i = diff_[j];
            const double p = (static_cast<double>(d_[i]) + delta_) / z;
            const double q = (static_cast<double>(dp_[i]) + delta_) / zp;
            const double m = std::min(p, q);
            acc_min += m;
            acc_g += p - m;
            acc_p += q - m;
            min_prefix_[j] = acc_min;
            res_g_prefix_[j] = acc_g;
            res_p_prefix_[j] = acc_p;
        }
    }

    double delta_;
    std::uint64_t level_;
    std::vector<std::uint64_t> d_;
    std::vector<std::uint64_t> dp_;
    std::uint64_t l_ = 0;
    std::uint64_t lp_ = 0;
    FenwickSampler g_;
    FenwickSampler common_;
    long double common_exact_ = 0;
    std::vector<std::size_t> diff_;
    std::vector<std::size_t> slot_;
    std::vector<double> min_prefix_;
    std::vector<double> res_g_prefix_;
    std::vector<double> res_p_prefix_;
    std::vector<std::size_t> hits_;
    std::vector<std::size_t> hits_p_;
    std::vector<std::pair<std::size_t, std::uint64_t>> excess_;
};

}  // namespace

CouplingStats coupled_run(const ModelParams& params, double a, std::uint64_t replication) {
    params.validate();
    if (!std::holds_alternative<ParidRule>(params.rule)) {
        throw ConfigError("coupled_run supports the parid attachment rule only");
    }
    if (!(a > 0.0 && a < 0.5)) {
        throw ConfigError("coupling exponent a must lie in (0, 1/2)");
    }
    const auto level = static_cast<std::uint64_t>(std::floor(std::pow(static_cast<double>(params.t_max), a)));
    if (level < params.weights.min_support() ||
        !(static_cast<double>(level) + params.delta > 0.0)) {
        throw ConfigError("truncation level floor(t_max^a) = " + std::to_string(level) +
                          " lies below the weight support; the truncated graph would be invalid");
    }

    EngineStreams rng(params.seed, replication);
    Stream coupling_rng(params.seed, replication, Stream::kCoupling);

    CouplingStats stats;
    stats.a = a;
    stats.truncation_level = level;
    stats.u.assign(params.t_max + 1, 0);
    stats.weights.assign(params.t_max + 1, 0);

    CoupledGraphs graphs(params, level);
    const std::uint64_t w1 = params.weights.sample(rng.weights);
    stats.weights[1] = w1;
    graphs.init(w1);
    std::uint64_t u = 2 * (w1 - graphs.truncate(w1));
    stats.u[1] = u;
    for (std::uint64_t s = 2; s <= params.t_max; ++s) {
        const std::uint64_t w = params.weights.sample(rng.weights);
        stats.weights[s] = w;
        u += graphs.step(w, coupling_rng, rng.endpoints);
        stats.u[s] = u;
    }
    stats.g_final = EmpiricalStats::from_degrees(params.t_max, graphs.edges(), graphs.degrees());
    stats.g_prime_final = EmpiricalStats::from_degrees(params.t_max, graphs.edges_prime(), graphs.degrees_prime());
    return stats;
}

}  // namespace parid
