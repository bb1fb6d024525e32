#include "semopt/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "semopt/modelfile.hpp"
#include "semopt/report.hpp"

namespace semopt {

namespace {

using Json = nlohmann::json;

double parse_double_token(const std::string& token, const std::string& context) {
    if (token.empty()) throw ParseError(context + ": empty number");
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == nullptr || *end != '\0') {
        throw ParseError(context + ": '" + token + "' is not a number");
    }
    return v;
}

std::pair<std::string, std::string> split_assignment(const std::string& arg,
                                                     const std::string& context) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ParseError(context + ": expected name=value, got '" + arg + "'");
    }
    return {arg.substr(0, eq), arg.substr(eq + 1)};
}

void write_report_file(const OrderedJson& report, const std::string& out_path) {
    if (out_path.empty()) return;
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw SemError("cannot open '" + out_path + "' for writing");
    write_json(report, f);
}

int output_row(const SemModel& model, const std::string& name, const std::string& context) {
    VariableRole role;
    int idx = 0;
    if (!model.find(name, &role, &idx) || role != VariableRole::Output) {
        throw UnknownVariableError(context + ": '" + name + "' is not an output variable");
    }
    return idx;
}

void print_model_summary(std::ostream& out, const SemModel& model) {
    auto join = [](const std::vector<std::string>& names) {
        std::string s;
        for (const auto& n : names) {
            if (!s.empty()) s += " ";
            s += n;
        }
        return s.empty() ? std::string("(none)") : s;
    };
    out << "model: " << model.nz() << " covariates, " << model.nx() << " treatments, "
        << model.ny() << " outputs\n";
    out << "  covariates: " << join(model.names_z) << "\n";
    out << "  treatments: " << join(model.names_x) << "\n";
    out << "  outputs:    " << join(model.names_y) << "\n";
}

void print_effects_summary(std::ostream& out, const SemModel& model, const TotalEffects& te) {
    out << "total effects:\n";
    print_labeled_matrix(out, "t_yz (covariates -> outputs)", te.t_yz, model.names_y,
                         model.names_z);
    print_labeled_matrix(out, "t_yz_through (via treatments)", te.t_yz_through, model.names_y,
                         model.names_z);
    print_labeled_matrix(out, "t_yz_avoid (no treatments)", te.t_yz_avoid, model.names_y,
                         model.names_z);
    print_labeled_matrix(out, "t_xz (covariates -> treatments)", te.t_xz, model.names_x,
                         model.names_z);
    print_labeled_matrix(out, "t_yx (treatments -> outputs)", te.t_yx, model.names_y,
                         model.names_x);
}

void print_moments_summary(std::ostream& out, const SemModel& model, const Moments& mo,
                           const std::string& title) {
    out << title << ":\n";
    print_labeled_vector(out, "mean_z", mo.mean_z, model.names_z);
    print_labeled_vector(out, "mean_x", mo.mean_x, model.names_x);
    print_labeled_vector(out, "mean_y", mo.mean_y, model.names_y);
    print_labeled_matrix(out, "var_z", mo.var_z, model.names_z, model.names_z);
    print_labeled_matrix(out, "var_x", mo.var_x, model.names_x, model.names_x);
    print_labeled_matrix(out, "var_y", mo.var_y, model.names_y, model.names_y);
}

void print_solution_summary(std::ostream& out, const BoxQp& qp, const QpSolution& sol) {
    out << "solution (objective " << format_number(sol.objective) << ", " << sol.iterations
        << " iterations):\n";
    for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
        out << "  " << (i < qp.labels.size() ? qp.labels[i] : "alpha[" + std::to_string(i) + "]")
            << " = " << format_number(sol.alpha[i]) << "\n";
    }
    const KktReport& k = sol.kkt;
    out << "kkt: stationarity " << format_number(k.stationarity_residual) << ", primal "
        << format_number(k.primal_violation) << ", dual " << format_number(k.dual_violation)
        << ", complementarity " << format_number(k.complementarity) << " -> "
        << (k.satisfied ? "satisfied" : "NOT satisfied") << "\n";
}

// ---------------------------------------------------------------- analyze --

struct AnalyzeOptions {
    std::string model_path;
    std::string out_path;
};

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out) {
    const ModelFile mf = load_model_file(opt.model_path);
    const TotalEffects te = total_effects(mf.model);
    const Moments mo = moments(mf.model);

    OrderedJson report;
    report["command"] = "analyze";
    report["model_path"] = opt.model_path;
    report["model"] = to_json(mf.model);
    report["total_effects"] = to_json(te);
    report["moments"] = to_json(mo);
    write_report_file(report, opt.out_path);

    print_model_summary(out, mf.model);
    print_effects_summary(out, mf.model, te);
    print_moments_summary(out, mf.model, mo, "moments");
    return 0;
}

// ------------------------------------------------------- optimize-variance --

struct OptimizeVarianceOptions {
    std::string model_path;
    std::string out_path;
    std::vector<std::string> weight_args;
    bool allow_unbounded = false;
};

int cmd_optimize_variance(const OptimizeVarianceOptions& opt, std::ostream& out) {
    const ModelFile mf = load_model_file(opt.model_path);
    const SemModel& model = mf.model;

    std::map<std::string, double> weight_map;
    for (const WeightSpec& w : mf.weights) weight_map[w.output] = w.weight;
    for (const std::string& arg : opt.weight_args) {
        const auto [name, value_str] = split_assignment(arg, "--weights");
        const double value = parse_double_token(value_str, "--weights " + name);
        output_row(model, name, "--weights");
        if (!(value > 0.0)) throw PreconditionError("--weights: weight for '" + name +
                                                    "' must be positive");
        weight_map[name] = value;
    }

    std::vector<std::string> outputs;
    std::vector<double> weights;
    for (const std::string& name : model.names_y) {
        if (weight_map.empty()) {
            outputs.push_back(name);
            weights.push_back(1.0);
        } else if (auto it = weight_map.find(name); it != weight_map.end()) {
            outputs.push_back(name);
            weights.push_back(it->second);
        }
    }

    const Bounds bounds = resolve_coef_bounds(mf, opt.allow_unbounded);
    const BoxQp qp = build_variance_qp(model, outputs, weights, bounds);
    const QpSolution sol = solve_box_qp(qp);

    Intervention iv;
    iv.new_a_xz = unvec(sol.alpha, model.nx(), model.nz());
    const SemModel post = apply_intervention(model, iv);
    const Moments mo_pre = moments(model);
    const Moments mo_post = moments(post);

    OrderedJson report;
    report["command"] = "optimize-variance";
    report["model_path"] = opt.model_path;
    {
        OrderedJson options;
        OrderedJson selected = OrderedJson::array();
        for (std::size_t i = 0; i < outputs.size(); ++i) {
            OrderedJson w;
            w["output"] = outputs[i];
            w["weight"] = weights[i];
            selected.push_back(std::move(w));
        }
        options["weights"] = std::move(selected);
        options["allow_unbounded"] = opt.allow_unbounded;
        report["options"] = std::move(options);
    }
    report["model"] = to_json(model);
    report["total_effects"] = to_json(total_effects(model));
    {
        OrderedJson qp_json = to_json(qp);
        report["qp"] = std::move(qp_json);
    }
    {
        OrderedJson sol_json = to_json(sol);
        sol_json["labels"] = qp.labels;
        OrderedJson coefficients = OrderedJson::array();
        const Matrix a_new = *iv.new_a_xz;
        for (int j = 0; j < model.nz(); ++j) {
            for (int i = 0; i < model.nx(); ++i) {
                OrderedJson c;
                c["from"] = model.names_z[j];
                c["to"] = model.names_x[i];
                c["value"] = a_new(i, j);
                coefficients.push_back(std::move(c));
            }
        }
        sol_json["coefficients"] = std::move(coefficients);
        report["solution"] = std::move(sol_json);
    }
    report["moments_pre"] = to_json(mo_pre);
    report["moments_post"] = to_json(mo_post);
    {
        OrderedJson per_output = OrderedJson::array();
        for (const std::string& name : outputs) {
            const int k = output_row(model, name, "optimize-variance");
            OrderedJson o;
            o["output"] = name;
            o["variance_pre"] = mo_pre.var_y(k, k);
            o["variance_post"] = mo_post.var_y(k, k);
            per_output.push_back(std::move(o));
        }
        report["per_output"] = std::move(per_output);
    }
    write_report_file(report, opt.out_path);

    print_model_summary(out, model);
    out << "variance optimization over vec(a_xz), dimension " << qp.h.rows() << "\n";
    print_labeled_matrix(out, "qp.h", qp.h, qp.labels, qp.labels);
    print_labeled_vector(out, "qp.g", qp.g, qp.labels);
    out << "qp.c (intervention-invariant constant): " << format_number(qp.c) << "\n";
    print_solution_summary(out, qp, sol);
    for (const std::string& name : outputs) {
        const int k = output_row(model, name, "optimize-variance");
        out << "var(" << name << "): " << format_number(mo_pre.var_y(k, k)) << " -> "
            << format_number(mo_post.var_y(k, k)) << "\n";
    }
    return sol.kkt.satisfied ? 0 : 4;
}

// ----------------------------------------------------------- optimize-mean --

struct OptimizeMeanOptions {
    std::string model_path;
    std::string out_path;
    std::vector<std::string> target_args;
    std::string apply_coefficients_path;
    bool allow_unbounded = false;
};

Matrix coefficients_from_file(const SemModel& model, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }

    const Json* arr = nullptr;
    if (doc.is_object()) {
        if (doc.contains("coefficients") && doc["coefficients"].is_array()) {
            arr = &doc["coefficients"];
        } else if (doc.contains("solution") && doc["solution"].is_object() &&
                   doc["solution"].contains("coefficients") &&
                   doc["solution"]["coefficients"].is_array()) {
            arr = &doc["solution"]["coefficients"];
        }
    }
    if (arr == nullptr) {
        throw ParseError(path + ": no 'coefficients' array found (expected at top level or "
                                "under 'solution')");
    }

    Matrix a_new = model.a_xz;
    for (const Json& entry : *arr) {
        if (!entry.is_object() || !entry.contains("from") || !entry.contains("to") ||
            !entry.contains("value") || !entry["from"].is_string() || !entry["to"].is_string() ||
            !entry["value"].is_number()) {
            throw ParseError(path + ": coefficients entries must be {from, to, value}");
        }
        const std::string from = entry["from"].get<std::string>();
        const std::string to = entry["to"].get<std::string>();
        VariableRole from_role, to_role;
        int from_idx = 0, to_idx = 0;
        if (!model.find(from, &from_role, &from_idx) || from_role != VariableRole::Covariate) {
            throw UnknownVariableError(path + ": '" + from + "' is not a covariate");
        }
        if (!model.find(to, &to_role, &to_idx) || to_role != VariableRole::Treatment) {
            throw UnknownVariableError(path + ": '" + to + "' is not a treatment");
        }
        a_new(to_idx, from_idx) = entry["value"].get<double>();
    }
    return a_new;
}

int cmd_optimize_mean(const OptimizeMeanOptions& opt, std::ostream& out) {
    const ModelFile mf = load_model_file(opt.model_path);
    SemModel model = mf.model;

    if (!opt.apply_coefficients_path.empty()) {
        Intervention iv;
        iv.new_a_xz = coefficients_from_file(model, opt.apply_coefficients_path);
        model = apply_intervention(model, iv);
    }

    std::vector<TargetSpec> targets = mf.targets;
    for (const std::string& arg : opt.target_args) {
        const auto [name, rest] = split_assignment(arg, "--targets");
        std::string value_str = rest;
        std::optional<bool> linear;
        if (const auto colon = rest.find(':'); colon != std::string::npos) {
            value_str = rest.substr(0, colon);
            const std::string scale = rest.substr(colon + 1);
            if (scale == "linear") {
                linear = true;
            } else if (scale == "log") {
                linear = false;
            } else {
                throw ParseError("--targets: scale must be 'linear' or 'log', got '" + scale +
                                 "'");
            }
        }
        const double value = parse_double_token(value_str, "--targets " + name);
        output_row(model, name, "--targets");

        bool updated = false;
        for (TargetSpec& spec : targets) {
            if (spec.output == name) {
                spec.value = value;
                if (linear.has_value()) spec.linear_scale = *linear;
                updated = true;
            }
        }
        if (!updated) {
            TargetSpec spec;
            spec.output = name;
            spec.value = value;
            spec.linear_scale = linear.value_or(false);
            targets.push_back(spec);
        }
    }
    if (targets.empty()) {
        throw PreconditionError("optimize-mean: no targets given (file 'targets' or --targets)");
    }

    std::vector<MeanTarget> resolved;
    for (const TargetSpec& spec : targets) {
        MeanTarget t;
        t.output = spec.output;
        t.weight = spec.weight;
        if (spec.linear_scale) {
            if (!(spec.value > 0.0)) {
                throw ModelError("optimize-mean: linear-scale target for '" + spec.output +
                                 "' must be positive, got " + std::to_string(spec.value));
            }
            t.value = std::log(spec.value);
        } else {
            t.value = spec.value;
        }
        resolved.push_back(t);
    }

    const Bounds bounds = resolve_intercept_bounds(mf, opt.allow_unbounded);
    const BoxQp qp = build_mean_qp(model, resolved, bounds);
    const QpSolution sol = solve_box_qp(qp);

    Intervention iv;
    iv.new_mu_x = sol.alpha;
    const SemModel post = apply_intervention(model, iv);
    const Moments mo_pre = moments(model);
    const Moments mo_post = moments(post);

    OrderedJson report;
    report["command"] = "optimize-mean";
    report["model_path"] = opt.model_path;
    {
        OrderedJson options;
        options["apply_coefficients"] = opt.apply_coefficients_path;
        options["allow_unbounded"] = opt.allow_unbounded;
        OrderedJson target_echo = OrderedJson::array();
        for (std::size_t i = 0; i < targets.size(); ++i) {
            OrderedJson t;
            t["output"] = targets[i].output;
            t["value"] = targets[i].value;
            t["scale"] = targets[i].linear_scale ? "linear" : "log";
            t["weight"] = targets[i].weight;
            t["value_log_scale"] = resolved[i].value;
            target_echo.push_back(std::move(t));
        }
        options["targets"] = std::move(target_echo);
        report["options"] = std::move(options);
    }
    report["model"] = to_json(model);
    report["total_effects"] = to_json(total_effects(model));
    report["qp"] = to_json(qp);
    {
        OrderedJson sol_json = to_json(sol);
        sol_json["labels"] = qp.labels;
        OrderedJson intercepts = OrderedJson::array();
        for (int i = 0; i < model.nx(); ++i) {
            OrderedJson entry;
            entry["treatment"] = model.names_x[i];
            entry["value"] = sol.alpha[i];
            intercepts.push_back(std::move(entry));
        }
        sol_json["intercepts"] = std::move(intercepts);
        report["solution"] = std::move(sol_json);
    }
    report["moments_pre"] = to_json(mo_pre);
    report["moments_post"] = to_json(mo_post);
    {
        OrderedJson achieved = OrderedJson::array();
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const int k = output_row(model, targets[i].output, "optimize-mean");
            OrderedJson a;
            a["output"] = targets[i].output;
            a["target_log_scale"] = resolved[i].value;
            a["mean_pre"] = mo_pre.mean_y[k];
            a["mean_post"] = mo_post.mean_y[k];
            if (targets[i].linear_scale) {
                a["target_linear_scale"] = targets[i].value;
                a["mean_pre_linear_scale"] = std::exp(mo_pre.mean_y[k]);
                a["mean_post_linear_scale"] = std::exp(mo_post.mean_y[k]);
            }
            achieved.push_back(std::move(a));
        }
        report["achieved"] = std::move(achieved);
    }
    write_report_file(report, opt.out_path);

    print_model_summary(out, model);
    out << "mean adjustment over treatment intercepts, dimension " << qp.h.rows() << "\n";
    print_labeled_matrix(out, "qp.h", qp.h, qp.labels, qp.labels);
    print_labeled_vector(out, "qp.g", qp.g, qp.labels);
    print_solution_summary(out, qp, sol);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const int k = output_row(model, targets[i].output, "optimize-mean");
        out << "mean(" << targets[i].output << "): " << format_number(mo_pre.mean_y[k]) << " -> "
            << format_number(mo_post.mean_y[k]) << " (target " << format_number(resolved[i].value)
            << ")";
        if (targets[i].linear_scale) {
            out << "; linear scale " << format_number(std::exp(mo_pre.mean_y[k])) << " -> "
                << format_number(std::exp(mo_post.mean_y[k])) << " (target "
                << format_number(targets[i].value) << ")";
        }
        out << "\n";
    }
    return sol.kkt.satisfied ? 0 : 4;
}

// ------------------------------------------------------------------ paths --

struct PathsOptions {
    std::string model_path;
    std::string out_path;
    std::string from, to;
};

int cmd_paths(const PathsOptions& opt, std::ostream& out) {
    const ModelFile mf = load_model_file(opt.model_path);
    const std::vector<PathEffect> paths = enumerate_path_effects(mf.model, opt.from, opt.to);

    double through_total = 0.0, avoid_total = 0.0;
    for (const PathEffect& p : paths) {
        (p.through_treatment ? through_total : avoid_total) += p.effect;
    }

    OrderedJson report;
    report["command"] = "paths";
    report["model_path"] = opt.model_path;
    report["from"] = opt.from;
    report["to"] = opt.to;
    {
        OrderedJson rows = OrderedJson::array();
        for (const PathEffect& p : paths) {
            OrderedJson row;
            row["path"] = p.path;
            row["effect"] = p.effect;
            row["through_treatment"] = p.through_treatment;
            rows.push_back(std::move(row));
        }
        report["paths"] = std::move(rows);
    }
    report["through_total"] = through_total;
    report["avoid_total"] = avoid_total;
    report["total"] = through_total + avoid_total;
    write_report_file(report, opt.out_path);

    out << "paths " << opt.from << " -> " << opt.to << ": " << paths.size() << "\n";
    std::size_t width = 0;
    std::vector<std::string> joined;
    for (const PathEffect& p : paths) {
        std::string s;
        for (const std::string& name : p.path) {
            if (!s.empty()) s += " -> ";
            s += name;
        }
        width = std::max(width, s.size());
        joined.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < paths.size(); ++i) {
        out << "  " << joined[i] << std::string(width - joined[i].size() + 2, ' ')
            << format_number(paths[i].effect)
            << (paths[i].through_treatment ? "  [through treatments]" : "") << "\n";
    }
    out << "through-treatments subtotal: " << format_number(through_total) << "\n";
    out << "avoiding-treatments subtotal: " << format_number(avoid_total) << "\n";
    out << "total effect: " << format_number(through_total + avoid_total) << "\n";
    return 0;
}

// --------------------------------------------------------------- simulate --

struct SimulateOptions {
    std::string model_path;
    std::string out_path;
    long long n_samples = 1000000;
    std::uint64_t seed = 20250401;
    double z_threshold = 4.0;
    bool antithetic = false;
};

int cmd_simulate(const SimulateOptions& opt, std::ostream& out) {
    const ModelFile mf = load_model_file(opt.model_path);
    const Moments mo = moments(mf.model);

    SimConfig config;
    config.n_samples = opt.n_samples;
    config.seed = opt.seed;
    config.antithetic = opt.antithetic;
    const SampleMoments sm = simulate(mf.model, config);
    const CompareReport rep = compare(mo, sm, opt.z_threshold);

    OrderedJson report;
    report["command"] = "simulate";
    report["model_path"] = opt.model_path;
    {
        OrderedJson options;
        options["n"] = opt.n_samples;
        options["seed"] = opt.seed;
        options["z"] = opt.z_threshold;
        options["antithetic"] = opt.antithetic;
        report["options"] = std::move(options);
    }
    report["model"] = to_json(mf.model);
    report["analytic"] = to_json(mo);
    report["sampled"] = to_json(sm);
    report["compare"] = to_json(rep);
    write_report_file(report, opt.out_path);

    out << "simulate: n=" << opt.n_samples << " seed=" << opt.seed << " z=" << opt.z_threshold
        << (opt.antithetic ? " antithetic" : "") << "\n";
    out << "compared " << rep.entries.size() << " quantities, max |z| = "
        << format_number(rep.max_z) << "\n";
    for (const CompareEntry& e : rep.entries) {
        if (!e.pass) {
            out << "  FAIL " << e.quantity << ": analytic " << format_number(e.analytic)
                << ", estimate " << format_number(e.estimate) << ", se " << format_number(e.se)
                << ", z " << format_number(e.z) << "\n";
        }
    }
    out << (rep.pass ? "PASS" : "FAIL") << " at z threshold " << format_number(rep.z_threshold)
        << "\n";
    return rep.pass ? 0 : 5;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Total effects, moments and bounded optimal interventions for linear SEMs"};
    app.name("semopt");
    app.require_subcommand(1);

    AnalyzeOptions analyze_opt;
    CLI::App* analyze = app.add_subcommand("analyze", "Total effects and analytic moments");
    analyze->add_option("model", analyze_opt.model_path, "model JSON file")->required();
    analyze->add_option("--out", analyze_opt.out_path, "write the JSON report to this path");

    OptimizeVarianceOptions var_opt;
    CLI::App* var_cmd = app.add_subcommand(
        "optimize-variance", "Variance-minimizing covariate->treatment coefficients");
    var_cmd->add_option("model", var_opt.model_path, "model JSON file")->required();
    var_cmd->add_option("--out", var_opt.out_path, "write the JSON report to this path");
    var_cmd->add_option("--weights", var_opt.weight_args,
                        "output=weight (repeatable; overrides the file's weights)");
    var_cmd->add_flag("--allow-unbounded", var_opt.allow_unbounded,
                      "treat slots without bounds as unbounded instead of fixed");

    OptimizeMeanOptions mean_opt;
    CLI::App* mean_cmd =
        app.add_subcommand("optimize-mean", "Target-tracking treatment intercepts");
    mean_cmd->add_option("model", mean_opt.model_path, "model JSON file")->required();
    mean_cmd->add_option("--out", mean_opt.out_path, "write the JSON report to this path");
    mean_cmd->add_option("--targets", mean_opt.target_args,
                         "output=value[:linear|:log] (repeatable)");
    mean_cmd->add_option("--apply-coefficients", mean_opt.apply_coefficients_path,
                         "JSON file with a 'coefficients' array to apply first");
    mean_cmd->add_flag("--allow-unbounded", mean_opt.allow_unbounded,
                       "treat intercepts without bounds as unbounded instead of fixed");

    PathsOptions paths_opt;
    CLI::App* paths_cmd = app.add_subcommand("paths", "Path-level effect decomposition");
    paths_cmd->add_option("model", paths_opt.model_path, "model JSON file")->required();
    paths_cmd->add_option("--out", paths_opt.out_path, "write the JSON report to this path");
    paths_cmd->add_option("--from", paths_opt.from, "source variable")->required();
    paths_cmd->add_option("--to", paths_opt.to, "target variable")->required();

    SimulateOptions sim_opt;
    CLI::App* sim_cmd =
        app.add_subcommand("simulate", "Monte-Carlo check of the analytic moments");
    sim_cmd->add_option("model", sim_opt.model_path, "model JSON file")->required();
    sim_cmd->add_option("--out", sim_opt.out_path, "write the JSON report to this path");
    sim_cmd->add_option("--n", sim_opt.n_samples, "sample count");
    sim_cmd->add_option("--seed", sim_opt.seed, "random seed");
    sim_cmd->add_option("--z", sim_opt.z_threshold, "z-score threshold");
    sim_cmd->add_flag("--antithetic", sim_opt.antithetic, "use antithetic pairs");

    std::vector<const char*> argv;
    argv.push_back("semopt");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand(analyze)) return cmd_analyze(analyze_opt, out);
        if (app.got_subcommand(var_cmd)) return cmd_optimize_variance(var_opt, out);
        if (app.got_subcommand(mean_cmd)) return cmd_optimize_mean(mean_opt, out);
        if (app.got_subcommand(paths_cmd)) return cmd_paths(paths_opt, out);
        if (app.got_subcommand(sim_cmd)) return cmd_simulate(sim_opt, out);
        err << "error: no command given\n";
        return 2;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const ModelError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace semopt
