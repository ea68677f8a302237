#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "parid/rng.hpp"
#include "parid/sampler.hpp"
#include "parid/stats.hpp"
#include "parid/weights.hpp"

namespace parid {

/// Non-negative real law for the fitness parameters eta and zeta.
/// Spec strings: `const:c=1`, `uniform:lo=0,hi=1`, `exp:rate=1`.
struct FitnessLaw {
    enum class Kind { Constant, Uniform, Exponential };
    Kind kind = Kind::Constant;
    double a = 1.0;  // c, lo or rate
    double b = 0.0;  // hi (uniform only)

    static FitnessLaw constant(double c) { return {Kind::Constant, c, 0.0}; }
    static FitnessLaw uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
    static FitnessLaw exponential(double rate) { return {Kind::Exponential, rate, 0.0}; }

    static FitnessLaw parse(std::string_view spec);
    std::string to_string() const;
    double sample(Stream& rng) const;
    /// Throws ConfigError unless the law is supported on [0, inf).
    void validate(std::string_view name) const;
    bool positive_with_positive_probability() const noexcept;

    bool operator==(const FitnessLaw&) const = default;
};

struct ParidRule {
    bool operator==(const ParidRule&) const = default;
};

/// Attachment proportional to eta_i d_i + zeta_i with per-vertex fitness drawn
/// at birth.
struct FitnessRule {
    FitnessLaw eta = FitnessLaw::constant(1.0);
    FitnessLaw zeta = FitnessLaw::constant(0.0);
    bool operator==(const FitnessRule&) const = default;
};

using AttachmentRule = std::variant<ParidRule, FitnessRule>;

/// Parses `parid` or `fitness(eta=<law>;zeta=<law>)`.
AttachmentRule parse_rule(std::string_view spec);
std::string rule_to_string(const AttachmentRule& rule);

struct ModelParams {
    double delta = 0.0;
    WeightDistribution weights = WeightDistribution::constant(1);
    std::uint64_t t_max = 1;
    std::uint64_t seed = 0;
    AttachmentRule rule = ParidRule{};
    /// Apply each edge's degree increment before drawing the next edge of the
    /// same vertex, instead of freezing degrees for the whole step.
    bool sequential_update = false;
    bool record_edges = false;

    /// Throws ConfigError on a violated delta + min-support constraint, a
    /// zero horizon or an invalid fitness law.
    void validate() const;

    bool operator==(const ModelParams&) const = default;
};

/// The engine's random sources for one replication. Weight and endpoint draws
/// use separate substreams of the same (seed, replication) address.
struct EngineStreams {
    Stream weights;
    Stream endpoints;
    Stream fitness;

    EngineStreams(std::uint64_t seed, std::uint64_t replication)
        : weights(seed, replication, Stream::kWeights),
          endpoints(seed, replication, Stream::kEndpoints),
          fitness(seed, replication, Stream::kFitness) {}
};

struct Edge {
    std::uint64_t source = 0;
    std::uint64_t target = 0;
    bool operator==(const Edge&) const = default;
};

/// The graph G(t): degrees, initial degrees, L_t and the attachment sampler.
class GraphState {
public:
    /// G(1): vertices v_0 and v_1 joined by W_1 parallel edges.
    static GraphState init(const ModelParams& params, EngineStreams& rng);

    /// Adds v_{t+1} under the configured attachment rule.
    void step(EngineStreams& rng);

    std::uint64_t time() const noexcept { return t_; }
    std::uint64_t vertex_count() const noexcept { return degrees_.size(); }
    std::uint64_t total_initial_degree() const noexcept { return total_weight_; }
    std::span<const std::uint64_t> degrees() const noexcept { return degrees_; }
    /// W_i at index i; index 0 holds 0 since v_0 carries no own weight.
    std::span<const std::uint64_t> initial_degrees() const noexcept { return initial_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const ModelParams& params() const noexcept { return params_; }

    /// Attachment weight of vertex i for the next step (d_i + delta, or
    /// eta_i d_i + zeta_i under the fitness rule).
    double attachment_weight(std::size_t i) const;
    /// Sum of attachment weights as tracked exactly by the engine.
    double expected_total_weight() const;
    double sampler_total_weight() const noexcept { return sampler_.total(); }
    /// One endpoint draw from the frozen state, as the next step would make.
    std::size_t draw_endpoint(Stream& rng) const { return sampler_.sample(rng); }

    EmpiricalStats histogram() const;

    /// Verifies the degree-sum identity, vertex count, d_i >= W_i and the
    /// sampler total; throws std::logic_error on violation.
    void check_invariants() const;

private:
    explicit GraphState(const ModelParams& params) : params_(params) {}

    void step_parid(EngineStreams& rng, std::uint64_t w);
    void step_fitness(EngineStreams& rng, std::uint64_t w);
    void draw_frozen(std::uint64_t w, Stream& rng);
    void commit_hits(std::uint64_t source);
    void add_vertex(std::uint64_t w, Stream& fitness_rng);
    void refresh_sampler();

    ModelParams params_;
    std::uint64_t t_ = 0;
    std::uint64_t total_weight_ = 0;
    std::vector<std::uint64_t> degrees_;
    std::vector<std::uint64_t> initial_;
    std::vector<double> eta_;
    std::vector<double> zeta_;
    long double fitness_total_ = 0;
    FenwickSampler sampler_;
    std::vector<Edge> edges_;
    std::vector<std::pair<std::size_t, std::uint64_t>> hits_;
};

/// Degree histograms captured during one replication.
struct RunResult {
    GraphState final_state;
    std::vector<EmpiricalStats> snapshots;
};

/// Evolves replication `replication` of the process to params.t_max,
/// recording a histogram at each time in `snapshot_times` (sorted, within
/// [1, t_max]). Deterministic in (params, replication).
RunResult run(const ModelParams& params, std::span<const std::uint64_t> snapshot_times,
              std::uint64_t replication = 0);

/// Truncation coupling between G (weights W_i) and G' (weights
/// min(W_i, floor(t_max^a))).
struct CouplingStats {
    double a = 0.0;
    std::uint64_t truncation_level = 0;
    /// U_s for s = 0..t_max.
    std::vector<std::uint64_t> u;
    /// W_s for s = 1..t_max at index s; index 0 unused.
    std::vector<std::uint64_t> weights;
    EmpiricalStats g_final;
    EmpiricalStats g_prime_final;
};

CouplingStats coupled_run(const ModelParams& params, double a, std::uint64_t replication = 0);

}  // namespace parid
