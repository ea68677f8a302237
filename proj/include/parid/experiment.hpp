#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "parid/config.hpp"
#include "parid/parallel.hpp"
#include "parid/stats.hpp"
#include "parid/theory.hpp"

namespace parid {

inline constexpr std::string_view kVersion = "0.1.0";

struct AnalysisOutcome {
    std::string name;
    bool pass = false;
    /// JSON object with the fitted quantities behind the verdict.
    std::string detail_json;
};

struct ExperimentOutcome {
    std::filesystem::path directory;
    std::vector<AnalysisOutcome> analyses;
    bool pass() const noexcept {
        for (const auto& a : analyses) {
            if (!a.pass) {
                return false;
            }
        }
        return true;
    }
};

struct RunOptions {
    unsigned workers = default_workers();
};

/// Runs every analysis of `spec` and writes its artifacts below
/// out_dir/name: per-snapshot histograms, analysis CSVs, report.json (all
/// verdicts, deterministic) and manifest.json (provenance and timings).
ExperimentOutcome run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// Writes through a temporary sibling and renames it into place, so readers
/// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// `k,N_k,p_k` rows (plus `p_geq_k` when with_ccdf) for every observed degree.
std::string histogram_csv(const EmpiricalStats& stats, bool with_ccdf);

/// `k,p_k` rows for k = 1..k_max.
std::string theory_csv(const TheoreticalDegreeDistribution& dist);
/// JSON header for a theory table: theta, exponents and truncated tail mass.
std::string theory_json(const TheoreticalDegreeDistribution& dist, const WeightDistribution& weights);

/// FNV-1a 64-bit hash, rendered as 16 hex digits.
std::string content_hash(std::string_view text);

}  // namespace parid
