#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "parid/engine.hpp"

namespace parid {

/// Snapshot times: an explicit list, or a geometric ladder base^0, base^1, ...
/// capped at t_max (t_max itself is always included).
struct SnapshotSchedule {
    std::vector<std::uint64_t> times;
    std::optional<double> geometric_base;

    static SnapshotSchedule parse(std::string_view text);
    std::string to_string() const;
    std::vector<std::uint64_t> resolve(std::uint64_t t_max) const;

    bool operator==(const SnapshotSchedule&) const = default;
};

/// Sup-norm distance to the limiting law at every snapshot, with a fitted
/// decay exponent. Optional spot checks compare mean p_k at the last snapshot
/// to the theory within three standard errors.
struct SupNormAnalysis {
    std::uint64_t k_max = 1'000'000;
    double gamma_lo = 0.0;
    double gamma_hi = std::numeric_limits<double>::infinity();
    double min_ratio = 1.0;
    std::vector<std::uint64_t> spot;
    bool operator==(const SupNormAnalysis&) const = default;
};

/// Hill estimate on the top fraction of degrees at the last snapshot,
/// averaged over replications. Without `expect`, the target is the theoretical
/// tau (tau_W for infinite-mean weights).
struct HillAnalysis {
    double top = 0.01;
    std::optional<double> expect;
    double tol = 0.3;
    bool operator==(const HillAnalysis&) const = default;
};

struct CcdfBoundAnalysis {
    bool operator==(const CcdfBoundAnalysis&) const = default;
};

/// Growth of E[U_t] across horizons; passes when the fitted exponent is below
/// `b_max`. With marginal_t > 0 the G-marginal of the coupled run at that
/// horizon is compared to uncoupled runs.
struct CouplingAnalysis {
    std::optional<double> a;
    std::vector<std::uint64_t> horizons;
    std::uint64_t marginal_t = 0;
    double b_max = 1.0;
    bool operator==(const CouplingAnalysis&) const = default;
};

/// Fractional-moment scaling of d_i(t) and, when norming_times is set, the
/// L_t norming-moment check.
struct MomentsAnalysis {
    double s = 0.4;
    std::vector<std::uint64_t> probes;
    double tol = 0.2;
    std::vector<std::uint64_t> norming_times;
    std::uint64_t norming_reps = 0;  // 0: use the experiment's reps
    bool operator==(const MomentsAnalysis&) const = default;
};

/// Limiting p_k table; with slope_hi > 0 also checks the log-log slope over
/// [slope_lo, slope_hi] against -tau within `tol`.
struct TheoryTableAnalysis {
    std::uint64_t k_max = 1000;
    std::uint64_t slope_lo = 0;
    std::uint64_t slope_hi = 0;
    double tol = 0.1;
    bool operator==(const TheoryTableAnalysis&) const = default;
};

using Analysis = std::variant<SupNormAnalysis, HillAnalysis, CcdfBoundAnalysis, CouplingAnalysis, MomentsAnalysis,
                              TheoryTableAnalysis>;

std::string analysis_name(const Analysis& a);

struct ExperimentSpec {
    std::string name = "experiment";
    ModelParams params;
    std::uint64_t reps = 1;
    SnapshotSchedule snapshots;
    std::optional<double> coupling_a;
    std::vector<Analysis> analyses;
    std::string out_dir = "out";

    bool operator==(const ExperimentSpec&) const = default;
};

struct ConfigDiagnostic {
    std::size_t line = 0;  // 0 when not tied to one line
    std::string message;
};

struct ConfigParseResult {
    std::optional<ExperimentSpec> spec;
    std::vector<ConfigDiagnostic> errors;
    bool ok() const noexcept { return spec.has_value(); }
};

/// Parses `key = value` lines (`#` starts a comment). Every error found is
/// reported with its line number, not just the first.
ConfigParseResult parse_config(std::string_view text);

/// Canonical text form; parse_config(print_config(s)) reproduces s.
std::string print_config(const ExperimentSpec& spec);

/// Parses one analysis item such as `hill(top=0.01)`.
Analysis parse_analysis(std::string_view text);
std::string print_analysis(const Analysis& a);

/// Parameter-level checks shared by the config parser and the CLI; each entry
/// names the offending key.
std::vector<std::pair<std::string, std::string>> check_spec(const ExperimentSpec& spec);

}  // namespace parid
