#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "advreg/analysis.hpp"
#include "advreg/io.hpp"
#include "advreg/solver.hpp"
#include "advreg/tuning.hpp"

namespace advreg {

enum class DeltaRuleKind { corollary, scaled_corollary, fixed };

struct DeltaRule {
    DeltaRuleKind kind = DeltaRuleKind::corollary;
    double scale = 1.0;  // scaled_corollary
    double value = 0.0;  // fixed: same delta for both methods, unit group weights
};

struct ModelSpec {
    std::vector<Index> n_list = {50, 100, 150, 200, 250, 300, 350, 400};
    Index p = 500;
    Vector beta_star = reference_beta_star(500);
    double sigma = 0.1;
    /// Contiguous equal groups unless `partition` is given.
    Index group_size = 4;
    std::optional<GroupPartition> partition;

    GroupPartition groups() const;
};

struct PathSpec {
    Index n = 200;
    double lo = 0.01;  // multiples of the rule delta
    double hi = 10.0;
    int count = 20;
};

struct ExperimentConfig {
    ModelSpec model;
    int replications = 5;
    DeltaRule delta_rule;
    SolverOptions solver;
    std::uint64_t seed = 2024;
    std::filesystem::path output_dir = "out";
    PathSpec path;

    void validate() const;
    static ExperimentConfig from_json(const io::json& j);
    io::json to_json() const;
};

SolverOptions solver_options_from_json(const io::json& j, SolverOptions base = {});
io::json to_json(const SolverOptions& o);
io::json to_json(const DeltaRule& r);

/// Seed of replication `rep` at sample size n; independent of worker count.
std::uint64_t replication_seed(std::uint64_t base, Index n, int rep);

SyntheticDraw draw_replication(const ExperimentConfig& cfg, Index n, int rep);

struct TunedObjective {
    double delta = 0.0;
    std::optional<GroupPartition> partition;  // group variant, with weights
};

TunedObjective choose_delta(const DeltaRule& rule, Variant variant, Index n, Index p,
                            const GroupPartition& groups);

AdvObjectiveSpec make_spec(std::shared_ptr<const Dataset> data, Variant variant,
                           const TunedObjective& tuned);

struct RunRecord {
    Index n = 0;
    int rep = 0;
    std::uint64_t seed = 0;
    Variant method = Variant::classic;
    double delta = 0.0;
    double objective = 0.0;
    double certificate = 0.0;
    bool converged = false;
    PredictionError error;
    DeltaCondition condition;
    ShrinkageReport shrinkage;
};

struct CurveRow {
    Variant method = Variant::classic;
    Index n = 0;
    int replications = 0;
    double mean_half = 0.0;
    double sd_half = 0.0;
    double min_half = 0.0;
    double max_half = 0.0;
    double mean_full = 0.0;
};

struct SlopeFit {
    std::optional<double> slope;
    std::optional<double> intercept;
};

/// Least-squares line through (log x, log y); empty with fewer than two
/// distinct x values.
SlopeFit log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ExperimentResult {
    std::vector<RunRecord> runs;  // sorted by (n, rep, method)
    std::vector<CurveRow> curves;  // sorted by (method, n)
    SlopeFit classic;
    SlopeFit group;
    bool all_converged = true;
};

/// Writes X.csv, Y.csv, truth.json, partition.json per (n, rep) under
/// output_dir/data/n<n>_r<rep>/.
void generate_files(const ExperimentConfig& cfg);

/// Generate, tune, fit both variants and score every (n, rep). When
/// `write_files` is set, runs.csv and error_curves.csv are rewritten after
/// each n and slopes.json at the end.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files);

std::string curves_csv(const std::vector<CurveRow>& rows);
std::string runs_csv(const std::vector<RunRecord>& runs);
io::json slopes_json(const ExperimentResult& res, const ExperimentConfig& cfg);

io::json fit_to_json(const FitResult& fit, const AdvObjectiveSpec& spec);

struct PathResult {
    std::vector<double> deltas;
    std::vector<FitResult> fits;
};

/// deltas = log_grid(lo, hi, count) times the rule delta of the variant.
std::vector<double> default_path_grid(Variant variant, Index n, Index p, const GroupPartition& groups,
                                      const PathSpec& spec);

struct BoundCheck {
    DeltaCondition condition;
    ShrinkageReport shrinkage;
    ReEstimate constant;  // gamma(s, 3) or kappa(g, 3)
    BoundReport report;
    /// Lemma and domination are asserted only when the oracle condition passes
    /// and the constant is exact; otherwise they are reported.
    bool asserted = false;
    bool violated = false;
};

/// Oracle check of a fit against the truth. Throws OracleUnavailable when the
/// truth carries no noise vector.
BoundCheck check_bounds(const Dataset& data, const GroundTruth& truth, const Vector& beta_hat,
                        Variant variant, double delta, const std::optional<GroupPartition>& partition,
                        BoundForm form, const ReOptions& re = {});

io::json to_json(const BoundCheck& c);

/// One row per (delta, coordinate), coordinates 1-based.
std::string path_csv(const PathResult& path);
io::json path_json(const PathResult& path, Variant variant);

}  // namespace advreg
