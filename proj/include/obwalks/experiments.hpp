#pragma once

#include <optional>
#include <string>
#include <vector>

#include "obwalks/arith.hpp"
#include "obwalks/fibration.hpp"
#include "obwalks/stats.hpp"

namespace obwalks {

// One verification run: a sampled number-theory ensemble, its independent-model
// counterpart, and the matching closed-form law, compared in a fixed report.
enum class ExperimentKind {
    clt,
    moments,
    least_prime,
    max_law,
    absmax_law,
    l2_law,
    arcsine,
    feynman_kac,
    sigma_asymptotics,
    klapaklapa,
};

ExperimentKind parse_experiment_kind(const std::string& name); // validation_error
std::string format_experiment_kind(ExperimentKind kind);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::clt;
    std::string family = "s,t";
    double B = 1e6;              // height bound of the sampled ensemble
    std::size_t n_samples = 10'000;
    arith::u64 seed = 1;
    std::size_t grid_m = 256;    // path grid resolution
    unsigned threads = 0;        // 0 = hardware concurrency

    // Law experiments draw the model ensemble at its own, usually larger,
    // height; 0 means reuse B. Walk references use walk_steps steps.
    double model_B = 0;
    std::size_t walk_steps = 10'000;

    unsigned r_max = 4;                          // moments
    std::vector<double> xi = {5, 10, 20, 50};    // least-prime thresholds
    double fk_u = 1.0;                           // exponential-weight rate
    std::string fk_kernel = "indicator";         // zero | indicator | xsq
    std::size_t fk_walks_n = 20'000;             // transform-side walk count
    std::size_t fk_steps_per_unit = 1'024;

    std::string family_b; // second family, compare_delta_effect only
};

// One comparison: a named statistic, its value on whichever of the three sides
// applies, the comparison method and value, and the recorded threshold.
struct ReportRow {
    std::string stat;
    std::optional<double> nt;
    std::optional<double> model;
    std::optional<double> law;
    std::string method; // "ks", "abs_diff", "nonincreasing", ...
    double metric = 0;
    std::optional<double> threshold;
    std::optional<bool> pass; // empty = informational row
};

struct NamedDistribution {
    std::string name;
    EmpiricalDistribution dist;
};

struct ExperimentReport {
    std::string name; // experiment kind, or "compare_delta_effect"
    ExperimentConfig config;
    std::vector<ReportRow> rows;
    std::vector<NamedDistribution> ecdfs; // CSV sidecars, one file per entry
    double beta_hat = 0;                  // fitted constant S(B) - delta loglog B
    std::size_t dropped_degenerate = 0;   // sampled points with F(s,t) = 0
    std::size_t not_applicable = 0;       // functional undefined (tiny heights)
    double runtime_seconds = 0;

    bool all_pass() const; // informational rows do not count
};

// Deterministic given (config, seed): per-sample rng streams are derived from
// the index, so thread count never changes the report.
ExperimentReport run(const ExperimentConfig& config);

// Least-prime exceedance side by side for config.family vs config.family_b.
ExperimentReport compare_delta_effect(const ExperimentConfig& config);

// Stable schema; runtime_seconds is the only field that varies between
// identical runs.
std::string report_to_json(const ExperimentReport& report);

// report.json plus one <name>.csv per ECDF, written under out_dir.
void write_report_files(const ExperimentReport& report, const std::string& out_dir);

// Sieve bound covering both the prime grid up to B and full factorization of
// every form value on the height-B box.
arith::u64 required_sieve_limit(const ConicBundleFamily& family, double B);

} // namespace obwalks
