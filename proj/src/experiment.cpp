#include "advreg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace advreg {

using io::json;

GroupPartition ModelSpec::groups() const
{
    if (partition) return *partition;
    return GroupPartition::contiguous(p, group_size);
}

void ExperimentConfig::validate() const
{
    if (model.n_list.empty()) throw InvalidArgument("config: n_list must be non-empty");
    for (std::size_t k = 0; k < model.n_list.size(); ++k) {
        if (model.n_list[k] < 1) throw InvalidArgument("config: sample sizes must be positive");
        if (k > 0 && model.n_list[k] <= model.n_list[k - 1]) {
            throw InvalidArgument("config: n_list must be strictly ascending");
        }
    }
    if (model.p < 2) throw InvalidArgument("config: p must be >= 2");
    if (model.beta_star.size() != model.p) throw InvalidArgument("config: beta_star must have length p");
    if (!(model.sigma >= 0.0)) throw InvalidArgument("config: sigma must be non-negative");
    if (replications < 1) throw InvalidArgument("config: replications must be >= 1");
    if (delta_rule.kind == DeltaRuleKind::scaled_corollary && !(delta_rule.scale > 0.0)) {
        throw InvalidArgument("config: delta scale must be positive");
    }
    if (delta_rule.kind == DeltaRuleKind::fixed && !(delta_rule.value >= 0.0)) {
        throw InvalidArgument("config: fixed delta must be non-negative");
    }
    if (path.count < 1 || !(path.lo > 0.0) || !(path.hi >= path.lo) || path.n < 1) {
        throw InvalidArgument("config: bad path grid");
    }
    (void)model.groups();  // throws on an incompatible group size
    solver.validate();
}

SolverOptions solver_options_from_json(const json& j, SolverOptions o)
{
    if (!j.is_object()) throw InvalidArgument("config: solver must be an object");
    for (const auto& [key, val] : j.items()) {
        if (key == "max_iters") o.max_iters = val.get<int>();
        else if (key == "tol_rel_obj") o.tol_rel_obj = val.get<double>();
        else if (key == "tol_cert") o.tol_cert = val.get<double>();
        else if (key == "window") o.window = val.get<int>();
        else if (key == "polish") o.polish = val.get<bool>();
        else if (key == "max_polish_iters") o.max_polish_iters = val.get<int>();
        else if (key == "step_rule") {
            const auto s = val.get<std::string>();
            if (s == "diminishing") o.step_rule = StepRule::diminishing;
            else if (s == "backtracking") o.step_rule = StepRule::backtracking;
            else throw InvalidArgument("config: unknown step_rule '" + s + "'");
        } else {
            throw InvalidArgument("config: unknown solver option '" + key + "'");
        }
    }
    o.validate();
    return o;
}

json to_json(const SolverOptions& o)
{
    return {{"max_iters", o.max_iters},
            {"tol_rel_obj", o.tol_rel_obj},
            {"tol_cert", o.tol_cert},
            {"step_rule", o.step_rule == StepRule::diminishing ? "diminishing" : "backtracking"},
            {"window", o.window},
            {"polish", o.polish},
            {"max_polish_iters", o.max_polish_iters}};
}

json to_json(const DeltaRule& r)
{
    switch (r.kind) {
    case DeltaRuleKind::corollary: return {{"kind", "corollary"}};
    case DeltaRuleKind::scaled_corollary: return {{"kind", "scaled-corollary"}, {"scale", r.scale}};
    case DeltaRuleKind::fixed: return {{"kind", "fixed"}, {"value", r.value}};
    }
    return nullptr;
}

namespace {

DeltaRule delta_rule_from_json(const json& j)
{
    DeltaRule r;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "corollary") {
        r.kind = DeltaRuleKind::corollary;
    } else if (kind == "scaled-corollary") {
        r.kind = DeltaRuleKind::scaled_corollary;
        r.scale = j.at("scale").get<double>();
    } else if (kind == "fixed") {
        r.kind = DeltaRuleKind::fixed;
        r.value = j.at("value").get<double>();
    } else {
        throw InvalidArgument("config: unknown delta_rule kind '" + kind + "'");
    }
    return r;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j)
{
    ExperimentConfig c;
    try {
        if (j.contains("model")) {
            const auto& m = j.at("model");
            if (m.contains("n_list")) c.model.n_list = m.at("n_list").get<std::vector<Index>>();
            if (m.contains("p")) c.model.p = m.at("p").get<Index>();
            if (m.contains("sigma")) c.model.sigma = m.at("sigma").get<double>();
            if (m.contains("group_size")) c.model.group_size = m.at("group_size").get<Index>();
            c.model.beta_star = reference_beta_star(c.model.p);
            if (m.contains("beta_star")) {
                const auto& b = m.at("beta_star");
                if (b.is_string()) {
                    if (b.get<std::string>() != "reference") {
                        throw InvalidArgument("config: beta_star must be \"reference\" or an array");
                    }
                } else {
                    c.model.beta_star = io::vector_from_json(b);
                }
            }
            if (m.contains("partition")) c.model.partition = io::partition_from_json(m.at("partition"));
        }
        if (j.contains("replications")) c.replications = j.at("replications").get<int>();
        if (j.contains("delta_rule")) c.delta_rule = delta_rule_from_json(j.at("delta_rule"));
        if (j.contains("solver")) c.solver = solver_options_from_json(j.at("solver"));
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("path")) {
            const auto& p = j.at("path");
            if (p.contains("n")) c.path.n = p.at("n").get<Index>();
            if (p.contains("lo")) c.path.lo = p.at("lo").get<double>();
            if (p.contains("hi")) c.path.hi = p.at("hi").get<double>();
            if (p.contains("count")) c.path.count = p.at("count").get<int>();
        }
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

json ExperimentConfig::to_json() const
{
    json m = {{"n_list", model.n_list},
              {"p", model.p},
              {"sigma", model.sigma},
              {"group_size", model.group_size},
              {"beta_star", io::vector_to_json(model.beta_star)}};
    if (model.partition) m["partition"] = io::to_json(*model.partition);
    return {{"schema_version", io::kSchemaVersion},
            {"model", m},
            {"replications", replications},
            {"delta_rule", advreg::to_json(delta_rule)},
            {"solver", advreg::to_json(solver)},
            {"seed", seed},
            {"output_dir", output_dir.string()},
            {"path", {{"n", path.n}, {"lo", path.lo}, {"hi", path.hi}, {"count", path.count}}}};
}

std::uint64_t replication_seed(std::uint64_t base, Index n, int rep)
{
    auto mix = [](std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    };
    return mix(mix(mix(base) ^ static_cast<std::uint64_t>(n)) ^ static_cast<std::uint64_t>(rep));
}

SyntheticDraw draw_replication(const ExperimentConfig& cfg, Index n, int rep)
{
    return generate_synthetic(n, cfg.model.p, cfg.model.beta_star, cfg.model.sigma,
                              replication_seed(cfg.seed, n, rep));
}

TunedObjective choose_delta(const DeltaRule& rule, Variant variant, Index n, Index p,
                            const GroupPartition& groups)
{
    TunedObjective t;
    if (rule.kind == DeltaRuleKind::fixed) {
        t.delta = rule.value;
        if (variant == Variant::group) t.partition = groups.with_weights(Vector::Ones(groups.num_groups()));
        return t;
    }
    const double scale = rule.kind == DeltaRuleKind::scaled_corollary ? rule.scale : 1.0;
    if (variant == Variant::classic) {
        t.delta = scale * delta_classic(n, p);
    } else {
        // Scaling delta with fixed weights scales every ratio delta/omega_l.
        const TuningRule r = delta_group(n, groups);
        t.delta = scale * r.delta;
        t.partition = r.partition;
    }
    return t;
}

AdvObjectiveSpec make_spec(std::shared_ptr<const Dataset> data, Variant variant,
                           const TunedObjective& tuned)
{
    if (variant == Variant::classic) return AdvObjectiveSpec::classic(std::move(data), tuned.delta);
    return AdvObjectiveSpec::group(std::move(data), *tuned.partition, tuned.delta);
}

SlopeFit log_log_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    SlopeFit out;
    if (x.size() != y.size() || x.size() < 2) return out;
    const double k = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]) / k;
        my += std::log(y[i]) / k;
    }
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    if (!(sxx > 0.0)) return out;
    out.slope = sxy / sxx;
    out.intercept = my - *out.slope * mx;
    return out;
}

namespace {

std::string data_dir_name(Index n, int rep)
{
    return "n" + std::to_string(n) + "_r" + std::to_string(rep);
}

std::vector<CurveRow> summarize(const std::vector<RunRecord>& runs)
{
    std::map<std::pair<int, Index>, std::vector<const RunRecord*>> by;
    for (const auto& r : runs) by[{static_cast<int>(r.method), r.n}].push_back(&r);
    std::vector<CurveRow> rows;
    for (const auto& [key, rs] : by) {
        CurveRow c;
        c.method = static_cast<Variant>(key.first);
        c.n = key.second;
        c.replications = static_cast<int>(rs.size());
        c.min_half = std::numeric_limits<double>::infinity();
        c.max_half = -std::numeric_limits<double>::infinity();
        for (const auto* r : rs) {
            c.mean_half += r->error.half_mean;
            c.mean_full += r->error.mean;
            c.min_half = std::min(c.min_half, r->error.half_mean);
            c.max_half = std::max(c.max_half, r->error.half_mean);
        }
        const double k = static_cast<double>(rs.size());
        c.mean_half /= k;
        c.mean_full /= k;
        double ss = 0.0;
        for (const auto* r : rs) ss += (r->error.half_mean - c.mean_half) * (r->error.half_mean - c.mean_half);
        c.sd_half = rs.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
        rows.push_back(c);
    }
    return rows;
}

SlopeFit slope_for(const std::vector<CurveRow>& rows, Variant method)
{
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& r : rows) {
        if (r.method != method) continue;
        x.push_back(static_cast<double>(r.n));
        y.push_back(r.mean_half);
    }
    return log_log_slope(x, y);
}

}  // namespace

void generate_files(const ExperimentConfig& cfg)
{
    cfg.validate();
    const GroupPartition groups = cfg.model.groups();
    for (Index n : cfg.model.n_list) {
        for (int rep = 0; rep < cfg.replications; ++rep) {
            const SyntheticDraw d = draw_replication(cfg, n, rep);
            const auto dir = cfg.output_dir / "data" / data_dir_name(n, rep);
            io::write_matrix_csv(dir / "X.csv", d.data.X);
            io::write_vector_csv(dir / "Y.csv", d.data.Y);
            json truth = io::to_json(d.truth);
            truth["seed"] = replication_seed(cfg.seed, n, rep);
            io::write_json(dir / "truth.json", truth);
            io::write_json(dir / "partition.json", io::to_json(groups));
        }
    }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files)
{
    cfg.validate();
    const GroupPartition groups = cfg.model.groups();
    ExperimentResult res;
    const Variant methods[2] = {Variant::classic, Variant::group};

    for (Index n : cfg.model.n_list) {
        const int reps = cfg.replications;
        std::vector<SyntheticDraw> draws(static_cast<std::size_t>(reps));
        for (int rep = 0; rep < reps; ++rep) draws[static_cast<std::size_t>(rep)] = draw_replication(cfg, n, rep);

        const int tasks = 2 * reps;
        std::vector<RunRecord> out(static_cast<std::size_t>(tasks));
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(tasks));
#pragma omp parallel for schedule(dynamic)
        for (int t = 0; t < tasks; ++t) {
            try {
                const int rep = t / 2;
                const Variant method = methods[t % 2];
                const auto& d = draws[static_cast<std::size_t>(rep)];
                auto data = std::make_shared<const Dataset>(d.data);
                const TunedObjective tuned = choose_delta(cfg.delta_rule, method, n, cfg.model.p, groups);
                const AdvObjectiveSpec spec = make_spec(data, method, tuned);
                const FitResult fit = advreg::fit(spec, cfg.solver);

                RunRecord& r = out[static_cast<std::size_t>(t)];
                r.n = n;
                r.rep = rep;
                r.seed = replication_seed(cfg.seed, n, rep);
                r.method = method;
                r.delta = tuned.delta;
                r.objective = fit.objective;
                r.certificate = fit.certificate;
                r.converged = fit.converged;
                r.error = prediction_error(d.data, fit.beta_hat, d.truth.beta_star);
                r.condition = check_delta_condition(d.truth, d.data, tuned.delta, method, tuned.partition);
                r.shrinkage = shrinkage_check(fit.beta_hat, d.truth.beta_star, method, tuned.partition);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        }
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);

        for (auto& r : out) {
            res.all_converged = res.all_converged && r.converged;
            res.runs.push_back(std::move(r));
        }
        res.curves = summarize(res.runs);
        if (write_files) {
            io::write_text(cfg.output_dir / "runs.csv", runs_csv(res.runs));
            io::write_text(cfg.output_dir / "error_curves.csv", curves_csv(res.curves));
        }
    }
    std::sort(res.runs.begin(), res.runs.end(), [](const RunRecord& a, const RunRecord& b) {
        return std::tie(a.n, a.rep, a.method) < std::tie(b.n, b.rep, b.method);
    });
    res.classic = slope_for(res.curves, Variant::classic);
    res.group = slope_for(res.curves, Variant::group);
    if (write_files) io::write_json(cfg.output_dir / "slopes.json", slopes_json(res, cfg));
    return res;
}

std::string curves_csv(const std::vector<CurveRow>& rows)
{
    using io::format_double;
    std::string s = "method,n,replications,mean_error,sd_error,min_error,max_error,mean_error_1n\r\n";
    for (const auto& r : rows) {
        s += std::string(to_string(r.method)) + "," + std::to_string(r.n) + "," +
             std::to_string(r.replications) + "," + format_double(r.mean_half) + "," +
             format_double(r.sd_half) + "," + format_double(r.min_half) + "," +
             format_double(r.max_half) + "," + format_double(r.mean_full) + "\r\n";
    }
    return s;
}

std::string runs_csv(const std::vector<RunRecord>& runs)
{
    using io::format_double;
    std::string s =
        "n,rep,seed,method,delta,objective,certificate,converged,error,error_1n,"
        "delta_condition,shrinkage_ratio\r\n";
    for (const auto& r : runs) {
        const std::string cond = r.condition.degenerate ? "degenerate" : (r.condition.pass ? "pass" : "fail");
        s += std::to_string(r.n) + "," + std::to_string(r.rep) + "," + std::to_string(r.seed) + "," +
             to_string(r.method) + "," + format_double(r.delta) + "," + format_double(r.objective) + "," +
             format_double(r.certificate) + "," + (r.converged ? "true" : "false") + "," +
             format_double(r.error.half_mean) + "," + format_double(r.error.mean) + "," + cond + "," +
             (std::isfinite(r.shrinkage.ratio) ? format_double(r.shrinkage.ratio) : std::string()) + "\r\n";
    }
    return s;
}

json slopes_json(const ExperimentResult& res, const ExperimentConfig& cfg)
{
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {{"schema_version", io::kSchemaVersion},
            {"error_scaling", "half_mean"},
            {"n_list", cfg.model.n_list},
            {"replications", cfg.replications},
            {"delta_rule", to_json(cfg.delta_rule)},
            {"classic", {{"slope", opt(res.classic.slope)}, {"intercept", opt(res.classic.intercept)}}},
            {"group", {{"slope", opt(res.group.slope)}, {"intercept", opt(res.group.intercept)}}},
            {"all_converged", res.all_converged}};
}

json fit_to_json(const FitResult& fit, const AdvObjectiveSpec& spec)
{
    // Trace is the best objective per iteration; long traces are thinned.
    const std::size_t max_points = 1000;
    const std::size_t stride = std::max<std::size_t>(1, (fit.trace.size() + max_points - 1) / max_points);
    std::vector<double> thin;
    for (std::size_t i = 0; i < fit.trace.size(); i += stride) thin.push_back(fit.trace[i]);
    if (!fit.trace.empty() && (fit.trace.size() - 1) % stride != 0) thin.push_back(fit.trace.back());

    json j = {{"schema_version", io::kSchemaVersion},
              {"variant", to_string(spec.variant)},
              {"delta", spec.delta},
              {"n", spec.n()},
              {"p", spec.p()},
              {"beta_hat", io::vector_to_json(fit.beta_hat)},
              {"objective", fit.objective},
              {"certificate", fit.certificate},
              {"iters", fit.iters},
              {"converged", fit.converged},
              {"trace", thin},
              {"trace_stride", stride}};
    if (spec.partition) j["partition"] = io::to_json(*spec.partition);
    return j;
}

std::vector<double> default_path_grid(Variant variant, Index n, Index p, const GroupPartition& groups,
                                      const PathSpec& spec)
{
    const double base = variant == Variant::classic ? delta_classic(n, p) : delta_group(n, groups).delta;
    std::vector<double> g = log_grid(spec.lo, spec.hi, spec.count);
    for (double& d : g) d *= base;
    return g;
}

std::string path_csv(const PathResult& path)
{
    std::string s = "delta,coordinate,beta_hat\r\n";
    for (std::size_t k = 0; k < path.fits.size(); ++k) {
        const auto d = io::format_double(path.deltas[k]);
        const Vector& b = path.fits[k].beta_hat;
        for (Index j = 0; j < b.size(); ++j) s += d + "," + std::to_string(j + 1) + "," + io::format_double(b[j]) + "\r\n";
    }
    return s;
}

json path_json(const PathResult& path, Variant variant)
{
    json pts = json::array();
    for (std::size_t k = 0; k < path.fits.size(); ++k) {
        const auto& f = path.fits[k];
        pts.push_back({{"delta", path.deltas[k]},
                       {"objective", f.objective},
                       {"certificate", f.certificate},
                       {"iters", f.iters},
                       {"converged", f.converged},
                       {"l1_norm", f.beta_hat.lpNorm<1>()}});
    }
    return {{"schema_version", io::kSchemaVersion}, {"variant", to_string(variant)}, {"points", pts}};
}

}  // namespace advreg

namespace advreg {

BoundCheck check_bounds(const Dataset& data, const GroundTruth& truth, const Vector& beta_hat,
                        Variant variant, double delta, const std::optional<GroupPartition>& partition,
                        BoundForm form, const ReOptions& re)
{
    BoundCheck c;
    c.condition = check_delta_condition(truth, data, delta, variant, partition);
    c.shrinkage = shrinkage_check(beta_hat, truth.beta_star, variant, partition);
    const PredictionError err = prediction_error(data, beta_hat, truth.beta_star);
    const double e1 = truth.epsilon.lpNorm<1>();
    const double b2 = truth.beta_star.norm();

    if (variant == Variant::classic) {
        const Index s = std::max<Index>(truth.s(), 1);
        c.constant = re_constant(data.X, s, 3.0, re);
        ClassicBoundInputs in;
        in.s = truth.s();
        in.p = data.p();
        in.n = data.n();
        in.delta = delta;
        in.gamma = c.constant.value;
        in.eps_l1 = e1;
        in.beta_star_l2 = b2;
        in.sigma = truth.sigma;
        c.report = bound_classic(in, form);
    } else {
        if (!partition) throw InvalidArgument("check_bounds: group variant needs a partition");
        const SupportGroups sg = support_groups(truth.beta_star, *partition);
        c.constant = gre_constant(data.X, *partition, std::max<Index>(sg.g, 1), 3.0, re);
        GroupBoundInputs in;
        in.g = sg.g;
        in.size_GJ = sg.size_GJ;
        in.L = partition->num_groups();
        in.n = data.n();
        in.delta = delta;
        in.omega_J.resize(sg.g);
        for (Index k = 0; k < sg.g; ++k) in.omega_J[k] = partition->weight(sg.groups[static_cast<std::size_t>(k)]);
        in.kappa = c.constant.value;
        in.eps_l1 = e1;
        in.beta_star_l2 = b2;
        in.sigma = truth.sigma;
        in.blocks_orthonormal = blocks_orthonormal(data.X, *partition);
        c.report = bound_group(in, form);
    }
    attach_empirical(c.report, err);

    c.asserted = c.condition.pass && !c.condition.degenerate;
    if (c.asserted && !c.shrinkage.holds) c.violated = true;
    // Domination only where the constant is exact: a sampled estimate can
    // exceed the true constant and make the evaluated bound too small.
    const bool exact = c.constant.mode == ReMode::exact_orthonormal;
    if (c.asserted && exact && c.report.applicable && c.report.dominated && !*c.report.dominated) {
        c.violated = true;
    }
    return c;
}

io::json to_json(const BoundCheck& c)
{
    io::json j = to_json(c.report);
    io::json margins = io::json::array();
    for (Index k = 0; k < c.condition.margins.size(); ++k) {
        const double m = c.condition.margins[k];
        margins.push_back(std::isfinite(m) ? io::json(m) : io::json(nullptr));
    }
    j["delta_condition"] = {{"pass", c.condition.pass},
                            {"degenerate", c.condition.degenerate},
                            {"min_margin", margins.empty() ? io::json(nullptr) : io::json(c.condition.margins.minCoeff())},
                            {"margins", margins}};
    if (c.condition.degenerate) j["delta_condition"]["min_margin"] = nullptr;
    j["shrinkage"] = to_json(c.shrinkage);
    io::json re = to_json(c.constant);
    re.erase("schema_version");
    j["constant"] = re;
    j["asserted"] = c.asserted;
    j["violated"] = c.violated;
    return j;
}

}  // namespace advreg
