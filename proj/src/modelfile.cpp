#include "semopt/modelfile.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace semopt {

namespace {

using Json = nlohmann::json;

void require_object(const Json& j, const std::string& context) {
    if (!j.is_object()) throw ParseError(context + ": expected an object");
}

void require_keys(const Json& obj, const std::string& context,
                  std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) throw ParseError(context + ": unknown key '" + item.key() + "'");
    }
}

double get_number(const Json& obj, const char* key, const std::string& context) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(context + ": missing required key '" + key + "'");
    if (!it->is_number()) throw ParseError(context + ": key '" + key + "' must be a number");
    return it->get<double>();
}

double get_number_or(const Json& obj, const char* key, const std::string& context,
                     double fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number()) throw ParseError(context + ": key '" + key + "' must be a number");
    return it->get<double>();
}

std::string get_string(const Json& obj, const char* key, const std::string& context) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(context + ": missing required key '" + key + "'");
    if (!it->is_string()) throw ParseError(context + ": key '" + key + "' must be a string");
    return it->get<std::string>();
}

const Json* get_array(const Json& obj, const char* key, const std::string& context) {
    const auto it = obj.find(key);
    if (it == obj.end()) return nullptr;
    if (!it->is_array()) throw ParseError(context + ": key '" + key + "' must be an array");
    return &*it;
}

struct RawVariable {
    std::string name;
    std::string role;
    double intercept = 0.0;
    bool has_variance = false;
    double variance = 0.0;
    bool has_cov_row = false;
    std::vector<double> cov_row;
};

}  // namespace

ModelFile parse_model_file(const std::string& text, const std::string& origin) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    require_object(root, origin);
    require_keys(root, origin, {"variables", "edges", "treatments", "bounds", "targets", "weights"});

    const Json* variables = get_array(root, "variables", origin);
    if (variables == nullptr) throw ParseError(origin + ": missing required key 'variables'");

    std::vector<RawVariable> raw;
    for (std::size_t i = 0; i < variables->size(); ++i) {
        const Json& v = (*variables)[i];
        const std::string context = origin + ": variables[" + std::to_string(i) + "]";
        require_object(v, context);
        require_keys(v, context, {"name", "role", "intercept", "error_variance", "error_cov_row"});

        RawVariable rv;
        rv.name = get_string(v, "name", context);
        rv.role = get_string(v, "role", context);
        if (rv.role != "covariate" && rv.role != "treatment" && rv.role != "output" &&
            rv.role != "auto") {
            throw ParseError(context + ": role must be covariate, treatment, output or auto");
        }
        rv.intercept = get_number_or(v, "intercept", context, 0.0);

        const bool has_var = v.contains("error_variance");
        const bool has_row = v.contains("error_cov_row");
        if (has_var == has_row) {
            throw ParseError(context + ": exactly one of error_variance or error_cov_row required");
        }
        if (has_var) {
            rv.has_variance = true;
            rv.variance = get_number(v, "error_variance", context);
        } else {
            rv.has_cov_row = true;
            const Json& row = v["error_cov_row"];
            if (!row.is_array()) throw ParseError(context + ": error_cov_row must be an array");
            for (const Json& entry : row) {
                if (!entry.is_number()) {
                    throw ParseError(context + ": error_cov_row entries must be numbers");
                }
                rv.cov_row.push_back(entry.get<double>());
            }
        }
        raw.push_back(std::move(rv));
    }

    if (raw.empty()) throw ModelError(origin + ": variables must declare at least one variable");

    const int n = static_cast<int>(raw.size());
    bool any_auto = false, all_auto = true;
    for (const RawVariable& rv : raw) {
        if (rv.role == "auto") {
            any_auto = true;
        } else {
            all_auto = false;
        }
    }
    if (any_auto && !all_auto) {
        throw ModelError(origin + ": role 'auto' must be used for all variables or none");
    }

    WeightedGraph graph;
    graph.error_cov = Matrix(n, n);
    for (int i = 0; i < n; ++i) {
        graph.names.push_back(raw[i].name);
        graph.intercepts.push_back(raw[i].intercept);
        if (raw[i].has_variance) {
            graph.error_cov(i, i) = raw[i].variance;
        } else {
            if (static_cast<int>(raw[i].cov_row.size()) != n) {
                throw ModelError(origin + ": variables[" + std::to_string(i) +
                                 "].error_cov_row must have length " + std::to_string(n));
            }
            for (int j = 0; j < n; ++j) graph.error_cov(i, j) = raw[i].cov_row[j];
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(graph.error_cov(i, j) - graph.error_cov(j, i)) > 1e-12) {
                throw ModelError(origin + ": error covariance between " + raw[i].name + " and " +
                                 raw[j].name + " is asymmetric");
            }
        }
    }

    if (const Json* edges = get_array(root, "edges", origin)) {
        for (std::size_t i = 0; i < edges->size(); ++i) {
            const Json& e = (*edges)[i];
            const std::string context = origin + ": edges[" + std::to_string(i) + "]";
            require_object(e, context);
            require_keys(e, context, {"from", "to", "coef"});
            graph.edges.push_back(
                {get_string(e, "from", context), get_string(e, "to", context),
                 get_number(e, "coef", context)});
        }
    }

    ModelFile mf;
    if (all_auto) {
        const Json* treatments = get_array(root, "treatments", origin);
        if (treatments == nullptr || treatments->empty()) {
            throw ModelError(origin +
                             ": roles are 'auto', so a nonempty 'treatments' list is required");
        }
        std::vector<std::string> names;
        for (const Json& t : *treatments) {
            if (!t.is_string()) throw ParseError(origin + ": treatments entries must be strings");
            names.push_back(t.get<std::string>());
        }
        mf.model = partition_by_treatment(graph, names);
    } else {
        if (root.contains("treatments")) {
            throw ModelError(origin + ": 'treatments' is only valid when roles are 'auto'");
        }
        std::vector<VariableRole> roles;
        for (const RawVariable& rv : raw) {
            roles.push_back(rv.role == "covariate" ? VariableRole::Covariate
                            : rv.role == "treatment" ? VariableRole::Treatment
                                                      : VariableRole::Output);
        }
        mf.model = assemble_from_roles(graph, roles);
    }

    {
        const std::vector<std::string> violations = validate(mf.model);
        if (!violations.empty()) {
            std::ostringstream os;
            os << origin << ": model is invalid:";
            for (const auto& v : violations) os << "\n  " << v;
            throw ModelError(os.str());
        }
    }

    auto role_of = [&](const std::string& name, const char* context) {
        VariableRole role;
        int idx = 0;
        if (!mf.model.find(name, &role, &idx)) {
            throw UnknownVariableError(origin + ": " + context + ": unknown variable '" + name +
                                       "'");
        }
        return role;
    };

    if (root.contains("bounds")) {
        const Json& bounds = root["bounds"];
        require_object(bounds, origin + ": bounds");
        require_keys(bounds, origin + ": bounds", {"coef", "intercept"});

        std::set<std::pair<std::string, std::string>> coef_seen;
        if (const Json* coef = get_array(bounds, "coef", origin + ": bounds")) {
            for (std::size_t i = 0; i < coef->size(); ++i) {
                const Json& b = (*coef)[i];
                const std::string context = origin + ": bounds.coef[" + std::to_string(i) + "]";
                require_object(b, context);
                require_keys(b, context, {"from", "to", "lower", "upper"});
                CoefBoundSpec spec;
                spec.from = get_string(b, "from", context);
                spec.to = get_string(b, "to", context);
                spec.lower = get_number_or(b, "lower", context, spec.lower);
                spec.upper = get_number_or(b, "upper", context, spec.upper);
                if (role_of(spec.from, "bounds.coef") != VariableRole::Covariate ||
                    role_of(spec.to, "bounds.coef") != VariableRole::Treatment) {
                    throw ModelError(context +
                                     ": coefficient bounds apply to covariate -> treatment slots only");
                }
                if (spec.lower > spec.upper) {
                    throw ModelError(context + ": lower exceeds upper");
                }
                if (!coef_seen.emplace(spec.from, spec.to).second) {
                    throw ModelError(context + ": duplicate bound for " + spec.from + " -> " +
                                     spec.to);
                }
                mf.coef_bounds.push_back(spec);
            }
        }

        std::set<std::string> mu_seen;
        if (const Json* mu = get_array(bounds, "intercept", origin + ": bounds")) {
            for (std::size_t i = 0; i < mu->size(); ++i) {
                const Json& b = (*mu)[i];
                const std::string context = origin + ": bounds.intercept[" + std::to_string(i) + "]";
                require_object(b, context);
                require_keys(b, context, {"treatment", "lower", "upper"});
                InterceptBoundSpec spec;
                spec.treatment = get_string(b, "treatment", context);
                spec.lower = get_number_or(b, "lower", context, spec.lower);
                spec.upper = get_number_or(b, "upper", context, spec.upper);
                if (role_of(spec.treatment, "bounds.intercept") != VariableRole::Treatment) {
                    throw ModelError(context + ": intercept bounds apply to treatments only");
                }
                if (spec.lower > spec.upper) {
                    throw ModelError(context + ": lower exceeds upper");
                }
                if (!mu_seen.insert(spec.treatment).second) {
                    throw ModelError(context + ": duplicate bound for " + spec.treatment);
                }
                mf.intercept_bounds.push_back(spec);
            }
        }
    }

    if (const Json* targets = get_array(root, "targets", origin)) {
        for (std::size_t i = 0; i < targets->size(); ++i) {
            const Json& t = (*targets)[i];
            const std::string context = origin + ": targets[" + std::to_string(i) + "]";
            require_object(t, context);
            require_keys(t, context, {"output", "value", "scale", "weight"});
            TargetSpec spec;
            spec.output = get_string(t, "output", context);
            spec.value = get_number(t, "value", context);
            spec.weight = get_number_or(t, "weight", context, 1.0);
            if (t.contains("scale")) {
                const std::string scale = get_string(t, "scale", context);
                if (scale != "linear" && scale != "log") {
                    throw ParseError(context + ": scale must be 'linear' or 'log'");
                }
                spec.linear_scale = scale == "linear";
            }
            if (role_of(spec.output, "targets") != VariableRole::Output) {
                throw ModelError(context + ": '" + spec.output + "' is not an output variable");
            }
            if (!(spec.weight > 0.0)) throw ModelError(context + ": weight must be positive");
            mf.targets.push_back(spec);
        }
    }

    if (const Json* weights = get_array(root, "weights", origin)) {
        std::set<std::string> seen;
        for (std::size_t i = 0; i < weights->size(); ++i) {
            const Json& w = (*weights)[i];
            const std::string context = origin + ": weights[" + std::to_string(i) + "]";
            require_object(w, context);
            require_keys(w, context, {"output", "weight"});
            WeightSpec spec;
            spec.output = get_string(w, "output", context);
            spec.weight = get_number(w, "weight", context);
            if (role_of(spec.output, "weights") != VariableRole::Output) {
                throw ModelError(context + ": '" + spec.output + "' is not an output variable");
            }
            if (!(spec.weight > 0.0)) throw ModelError(context + ": weight must be positive");
            if (!seen.insert(spec.output).second) {
                throw ModelError(context + ": duplicate weight for '" + spec.output + "'");
            }
            mf.weights.push_back(spec);
        }
    }

    return mf;
}

ModelFile load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_model_file(buffer.str(), path);
}

Bounds resolve_coef_bounds(const ModelFile& mf, bool allow_unbounded) {
    const SemModel& m = mf.model;
    const double inf = std::numeric_limits<double>::infinity();
    Bounds b;
    b.lower = Matrix(m.nx(), m.nz());
    b.upper = Matrix(m.nx(), m.nz());
    for (int i = 0; i < m.nx(); ++i) {
        for (int j = 0; j < m.nz(); ++j) {
            if (allow_unbounded) {
                b.lower(i, j) = -inf;
                b.upper(i, j) = inf;
            } else {
                // Unlisted slots stay fixed at the current coefficient.
                b.lower(i, j) = m.a_xz(i, j);
                b.upper(i, j) = m.a_xz(i, j);
            }
        }
    }
    for (const CoefBoundSpec& spec : mf.coef_bounds) {
        VariableRole role;
        int from_idx = 0, to_idx = 0;
        m.find(spec.from, &role, &from_idx);
        m.find(spec.to, &role, &to_idx);
        b.lower(to_idx, from_idx) = spec.lower;
        b.upper(to_idx, from_idx) = spec.upper;
    }
    return b;
}

Bounds resolve_intercept_bounds(const ModelFile& mf, bool allow_unbounded) {
    const SemModel& m = mf.model;
    const double inf = std::numeric_limits<double>::infinity();
    Bounds b;
    b.lower = Matrix(m.nx(), 1);
    b.upper = Matrix(m.nx(), 1);
    for (int i = 0; i < m.nx(); ++i) {
        b.lower(i, 0) = allow_unbounded ? -inf : m.mu_x[i];
        b.upper(i, 0) = allow_unbounded ? inf : m.mu_x[i];
    }
    for (const InterceptBoundSpec& spec : mf.intercept_bounds) {
        VariableRole role;
        int idx = 0;
        m.find(spec.treatment, &role, &idx);
        b.lower(idx, 0) = spec.lower;
        b.upper(idx, 0) = spec.upper;
    }
    return b;
}

}  // namespace semopt
