// advreg: data generation, fitting, delta paths, bound checks and the
// sample-size experiment. Exit codes: 0 ok, 2 not converged, 3 asserted
// violation, 4 I/O or missing oracle data, 5 bad config or arguments.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "advreg/experiment.hpp"

namespace fs = std::filesystem;
using namespace advreg;

namespace {

enum Exit { kOk = 0, kNotConverged = 2, kViolation = 3, kIo = 4, kConfig = 5 };

struct DataArgs {
    std::string x;
    std::string y;
    std::string partition;
    Index group_size = 0;
    std::string variant = "classic";
};

void add_data_args(CLI::App* cmd, DataArgs& a)
{
    cmd->add_option("--x", a.x, "design matrix CSV (n rows, p columns, header row)")->required();
    cmd->add_option("--y", a.y, "response CSV (n rows, header row)")->required();
    cmd->add_option("--variant", a.variant, "classic or group")
        ->check(CLI::IsMember({"classic", "group"}));
    cmd->add_option("--partition", a.partition, "partition JSON (group variant)");
    cmd->add_option("--group-size", a.group_size, "contiguous groups of this size (group variant)");
}

std::optional<GroupPartition> load_partition(const DataArgs& a, Index p)
{
    if (parse_variant(a.variant) == Variant::classic) return std::nullopt;
    if (!a.partition.empty()) return io::partition_from_json(io::read_json(a.partition));
    if (a.group_size > 0) return GroupPartition::contiguous(p, a.group_size);
    throw InvalidArgument("group variant needs --partition or --group-size");
}

SolverOptions load_solver(const std::string& config)
{
    if (config.empty()) return {};
    const io::json j = io::read_json(config);
    try {
        return solver_options_from_json(j.contains("solver") ? j.at("solver") : j);
    } catch (const io::json::exception& e) {
        throw InvalidArgument(std::string("solver config: ") + e.what());
    }
}

ExperimentConfig load_config(const std::string& path, const std::optional<std::uint64_t>& seed,
                             const std::string& out)
{
    ExperimentConfig cfg;
    if (!path.empty()) cfg = ExperimentConfig::from_json(io::read_json(path));
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.output_dir = out;
    cfg.validate();
    return cfg;
}

// Corollary-rule delta (and tuned weights) unless --delta is given, in which
// case the partition keeps the weights it was read with.
TunedObjective resolve_delta(Variant v, const Dataset& d, const std::optional<GroupPartition>& part,
                             const std::optional<double>& delta)
{
    TunedObjective t;
    if (delta) {
        t.delta = *delta;
        t.partition = part;
        return t;
    }
    const TuningRule r = tune(v, d.n(), d.p(), part);
    t.delta = r.delta;
    t.partition = v == Variant::group ? r.partition : std::nullopt;
    return t;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adversarial training for sparse and group-sparse linear regression"};
    app.require_subcommand(1);

    // generate
    std::string gen_config;
    std::optional<std::uint64_t> gen_seed;
    std::string gen_out;
    auto* gen = app.add_subcommand("generate", "write synthetic datasets for every (n, replication)");
    gen->add_option("--config", gen_config, "experiment config JSON");
    gen->add_option("--seed", gen_seed, "base seed");
    gen->add_option("--out", gen_out, "output directory");

    // fit
    DataArgs fit_data;
    std::optional<double> fit_delta;
    std::string fit_config;
    std::string fit_out = "fit.json";
    auto* fitc = app.add_subcommand("fit", "fit one dataset");
    add_data_args(fitc, fit_data);
    fitc->add_option("--delta", fit_delta, "perturbation radius (default: corollary rule)")
        ->check(CLI::NonNegativeNumber);
    fitc->add_option("--config", fit_config, "JSON with solver options (or a full experiment config)");
    fitc->add_option("--out", fit_out, "output fit JSON");

    // path
    DataArgs path_data;
    std::vector<double> path_deltas;
    double path_lo = 0.01;
    double path_hi = 10.0;
    int path_count = 20;
    std::string path_config;
    std::string path_out = ".";
    auto* pathc = app.add_subcommand("path", "coefficient path over a delta grid");
    add_data_args(pathc, path_data);
    pathc->add_option("--deltas", path_deltas, "explicit ascending delta grid")->delimiter(',');
    pathc->add_option("--lo", path_lo, "grid start, multiple of the rule delta");
    pathc->add_option("--hi", path_hi, "grid end, multiple of the rule delta");
    pathc->add_option("--count", path_count, "grid size");
    pathc->add_option("--config", path_config, "JSON with solver options");
    pathc->add_option("--out", path_out, "output directory for path.csv and path.json");

    // experiment
    std::string exp_config;
    std::optional<std::uint64_t> exp_seed;
    std::string exp_out;
    auto* expc = app.add_subcommand("experiment", "prediction error versus sample size, both methods");
    expc->add_option("--config", exp_config, "experiment config JSON");
    expc->add_option("--seed", exp_seed, "base seed");
    expc->add_option("--out", exp_out, "output directory");

    // check-bounds
    DataArgs cb_data;
    std::string cb_truth;
    std::string cb_fit;
    std::string cb_form = "theorem";
    std::string cb_out = "bound_report.json";
    std::uint64_t cb_seed = 0;
    auto* cbc = app.add_subcommand("check-bounds", "oracle checks of a fit against the truth");
    add_data_args(cbc, cb_data);
    cbc->add_option("--truth", cb_truth, "truth JSON")->required();
    cbc->add_option("--fit", cb_fit, "fit JSON")->required();
    cbc->add_option("--form", cb_form, "theorem, corollary-highprob or corollary-simplified");
    cbc->add_option("--seed", cb_seed, "seed for the sampled RE estimate");
    cbc->add_option("--out", cb_out, "output report JSON");

    // re-estimate
    std::string re_x;
    std::string re_variant = "classic";
    std::string re_partition;
    Index re_group_size = 0;
    Index re_size = 1;
    double re_cone = 3.0;
    ReOptions re_opts;
    std::string re_out = "re_estimate.json";
    auto* rec = app.add_subcommand("re-estimate", "restricted eigenvalue estimate of a design");
    rec->add_option("--x", re_x, "design matrix CSV")->required();
    rec->add_option("--variant", re_variant, "classic (RE) or group (GRE)")
        ->check(CLI::IsMember({"classic", "group"}));
    rec->add_option("--partition", re_partition, "partition JSON (group)");
    rec->add_option("--group-size", re_group_size, "contiguous groups (group)");
    rec->add_option("--size", re_size, "support size s or number of groups g");
    rec->add_option("--cone", re_cone, "cone constant");
    rec->add_option("--samples", re_opts.samples_per_support, "random cone vectors per support");
    rec->add_option("--max-supports", re_opts.max_supports, "sampled supports when not enumerated");
    rec->add_option("--seed", re_opts.seed, "seed");
    rec->add_option("--out", re_out, "output JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*gen) {
            const ExperimentConfig cfg = load_config(gen_config, gen_seed, gen_out);
            generate_files(cfg);
            io::write_json(cfg.output_dir / "config.json", cfg.to_json());
            return kOk;
        }

        if (*fitc) {
            const Variant v = parse_variant(fit_data.variant);
            auto data = std::make_shared<const Dataset>(io::read_dataset(fit_data.x, fit_data.y));
            const auto part = load_partition(fit_data, data->p());
            const SolverOptions opts = load_solver(fit_config);
            const TunedObjective t = resolve_delta(v, *data, part, fit_delta);
            const AdvObjectiveSpec spec = make_spec(data, v, t);
            const FitResult r = fit(spec, opts);
            io::write_json(fit_out, fit_to_json(r, spec));
            std::printf("objective %.10g certificate %.3g iters %d converged %s\n", r.objective,
                        r.certificate, r.iters, r.converged ? "true" : "false");
            return r.converged ? kOk : kNotConverged;
        }

        if (*pathc) {
            const Variant v = parse_variant(path_data.variant);
            auto data = std::make_shared<const Dataset>(io::read_dataset(path_data.x, path_data.y));
            const auto part = load_partition(path_data, data->p());
            const SolverOptions opts = load_solver(path_config);
            const TunedObjective t = resolve_delta(v, *data, part, std::nullopt);
            PathResult res;
            if (!path_deltas.empty()) {
                res.deltas = path_deltas;
            } else {
                res.deltas = log_grid(path_lo, path_hi, path_count);
                for (double& d : res.deltas) d *= t.delta;
            }
            res.fits = coefficient_path(make_spec(data, v, t), res.deltas, opts);
            const fs::path dir = path_out;
            io::write_text(dir / "path.csv", path_csv(res));
            io::write_json(dir / "path.json", path_json(res, v));
            for (const auto& f : res.fits)
                if (!f.converged) return kNotConverged;
            return kOk;
        }

        if (*expc) {
            const ExperimentConfig cfg = load_config(exp_config, exp_seed, exp_out);
            const ExperimentResult res = run_experiment(cfg, true);
            for (const auto& c : res.curves) {
                std::printf("%-7s n=%-4lld error %.6g (sd %.3g)\n", to_string(c.method),
                            static_cast<long long>(c.n), c.mean_half, c.sd_half);
            }
            auto show = [](const char* name, const SlopeFit& f) {
                if (f.slope) std::printf("%s slope %.4f\n", name, *f.slope);
                else std::printf("%s slope undefined\n", name);
            };
            show("classic", res.classic);
            show("group", res.group);
            return res.all_converged ? kOk : kNotConverged;
        }

        if (*cbc) {
            const Dataset data = io::read_dataset(cb_data.x, cb_data.y);
            if (!fs::exists(cb_truth)) throw OracleUnavailable("truth file not found: " + cb_truth);
            const GroundTruth truth = io::truth_from_json(io::read_json(cb_truth));
            const io::json fj = io::read_json(cb_fit);
            Variant v;
            double delta;
            Vector beta_hat;
            std::optional<GroupPartition> part;
            try {
                v = parse_variant(fj.at("variant").get<std::string>());
                delta = fj.at("delta").get<double>();
                beta_hat = io::vector_from_json(fj.at("beta_hat"));
                if (fj.contains("partition")) part = io::partition_from_json(fj.at("partition"));
            } catch (const io::json::exception& e) {
                throw InvalidArgument(std::string("fit file: ") + e.what());
            }
            if (v == Variant::group && !part) part = load_partition(cb_data, data.p());
            ReOptions re;
            re.seed = cb_seed;
            const BoundCheck c = check_bounds(data, truth, beta_hat, v, delta, part, parse_bound_form(cb_form), re);
            io::write_json(cb_out, to_json(c));
            std::printf("bound %.6g empirical %.6g condition %s %s\n", c.report.bound,
                        c.report.empirical->half_mean, c.condition.pass ? "pass" : "fail",
                        c.violated ? "VIOLATED" : (c.asserted ? "ok" : "not asserted"));
            return c.violated ? kViolation : kOk;
        }

        if (*rec) {
            const Matrix X = io::read_matrix_csv(re_x);
            ReEstimate e;
            if (parse_variant(re_variant) == Variant::classic) {
                e = re_constant(X, re_size, re_cone, re_opts);
            } else {
                DataArgs a;
                a.variant = re_variant;
                a.partition = re_partition;
                a.group_size = re_group_size;
                e = gre_constant(X, *load_partition(a, X.cols()), re_size, re_cone, re_opts);
            }
            io::write_json(re_out, to_json(e));
            std::printf("%s %.6g (%s)\n", to_string(e.kind), e.value, to_string(e.mode));
            return kOk;
        }
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s (row %zu, column %zu)\n", e.what(), e.row(), e.column());
        return kIo;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kIo;
    } catch (const OracleUnavailable& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kIo;
    } catch (const NumericalFailure& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNotConverged;
    } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kConfig;
    }
    return kOk;
}
