#include "semopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace semopt {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPsdTol = -1e-10;

std::string entry_path(const std::string& block, int i, int j, const std::vector<std::string>& row_names,
                       const std::vector<std::string>& col_names) {
    std::ostringstream os;
    os << block << "(" << i << "," << j << ")";
    if (i < static_cast<int>(row_names.size()) && j < static_cast<int>(col_names.size())) {
        os << " [" << row_names[i] << " <- " << col_names[j] << "]";
    }
    return os.str();
}

void check_shape(std::vector<std::string>* out, const std::string& name, const Matrix& m,
                 int rows, int cols) {
    if (m.rows() != rows || m.cols() != cols) {
        std::ostringstream os;
        os << name << ": expected " << rows << "x" << cols << ", got " << m.rows() << "x"
           << m.cols();
        out->push_back(os.str());
    }
}

void check_strictly_lower(std::vector<std::string>* out, const std::string& name, const Matrix& m,
                          const std::vector<std::string>& names) {
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = i; j < m.cols(); ++j) {
            if (m(i, j) != 0.0) {
                std::ostringstream os;
                os << entry_path(name, i, j, names, names) << ": diagonal/upper entry must be exactly 0, got "
                   << m(i, j);
                out->push_back(os.str());
            }
        }
    }
}

void check_covariance(std::vector<std::string>* out, const std::string& name, const Matrix& m,
                      const std::vector<std::string>& names) {
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = i + 1; j < m.cols(); ++j) {
            if (std::abs(m(i, j) - m(j, i)) > kSymmetryTol) {
                std::ostringstream os;
                os << entry_path(name, i, j, names, names) << ": asymmetry " << std::abs(m(i, j) - m(j, i))
                   << " exceeds 1e-12";
                out->push_back(os.str());
            }
        }
    }
    if (m.rows() > 0) {
        const SymmetricEigen eig = symmetric_eigen(m);
        if (eig.values.front() < kPsdTol) {
            std::ostringstream os;
            os << name << ": not positive semidefinite (min eigenvalue " << eig.values.front()
               << ")";
            out->push_back(os.str());
        }
    }
}

void check_finite(std::vector<std::string>* out, const std::string& name, const Matrix& m) {
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (!std::isfinite(m(i, j))) out->push_back(entry_path(name, i, j, {}, {}) + ": not finite");
}

// Directed cycle as a list of member indices, empty when acyclic.
std::vector<int> find_cycle(int n, const std::vector<std::vector<int>>& adj) {
    std::vector<int> color(n, 0);  // 0 unvisited, 1 on stack, 2 done
    std::vector<int> stack;
    std::vector<int> cycle;
    std::function<bool(int)> dfs = [&](int u) {
        color[u] = 1;
        stack.push_back(u);
        for (int v : adj[u]) {
            if (color[v] == 1) {
                auto it = std::find(stack.begin(), stack.end(), v);
                cycle.assign(it, stack.end());
                return true;
            }
            if (color[v] == 0 && dfs(v)) return true;
        }
        color[u] = 2;
        stack.pop_back();
        return false;
    };
    for (int s = 0; s < n; ++s) {
        if (color[s] == 0 && dfs(s)) return cycle;
    }
    return {};
}

struct GraphIndex {
    std::map<std::string, int> by_name;
    std::vector<std::vector<int>> adj;   // forward edges
    std::vector<std::vector<int>> radj;  // reverse edges
};

GraphIndex index_graph(const WeightedGraph& graph) {
    const int n = static_cast<int>(graph.names.size());
    if (static_cast<int>(graph.intercepts.size()) != n) {
        throw DimensionError("graph: intercept count " + std::to_string(graph.intercepts.size()) +
                             " does not match " + std::to_string(n) + " variables");
    }
    if (graph.error_cov.rows() != n || graph.error_cov.cols() != n) {
        throw DimensionError("graph: error covariance must be " + std::to_string(n) + "x" +
                             std::to_string(n));
    }

    GraphIndex gi;
    gi.adj.resize(n);
    gi.radj.resize(n);
    for (int i = 0; i < n; ++i) {
        if (!gi.by_name.emplace(graph.names[i], i).second) {
            throw ModelError("graph: duplicate variable name '" + graph.names[i] + "'");
        }
    }

    std::set<std::pair<int, int>> seen;
    for (const auto& e : graph.edges) {
        auto from_it = gi.by_name.find(e.from);
        auto to_it = gi.by_name.find(e.to);
        if (from_it == gi.by_name.end()) {
            throw UnknownVariableError("edge " + e.from + " -> " + e.to + ": unknown variable '" +
                                       e.from + "'");
        }
        if (to_it == gi.by_name.end()) {
            throw UnknownVariableError("edge " + e.from + " -> " + e.to + ": unknown variable '" +
                                       e.to + "'");
        }
        if (!seen.emplace(from_it->second, to_it->second).second) {
            throw ModelError("graph: duplicate edge " + e.from + " -> " + e.to);
        }
        gi.adj[from_it->second].push_back(to_it->second);
        gi.radj[to_it->second].push_back(from_it->second);
    }

    const std::vector<int> cycle = find_cycle(n, gi.adj);
    if (!cycle.empty()) {
        std::vector<std::string> names;
        std::ostringstream os;
        os << "graph contains a directed cycle:";
        for (int v : cycle) {
            names.push_back(graph.names[v]);
            os << " " << graph.names[v];
        }
        os << " -> " << graph.names[cycle.front()];
        throw CycleError(os.str(), names);
    }
    return gi;
}

// Members ordered by topological level in the induced subgraph, name-breaking
// ties; this makes the within-block matrix strictly lower triangular and the
// result independent of edge input order.
std::vector<int> order_block(const WeightedGraph& graph, const GraphIndex& gi,
                             const std::vector<int>& members) {
    std::map<int, int> level;
    for (int v : members) level[v] = -1;

    std::function<int(int)> level_of = [&](int v) {
        int& l = level[v];
        if (l >= 0) return l;
        l = 0;  // breaks nothing: graph is acyclic by now
        int best = 0;
        for (int p : gi.radj[v]) {
            if (level.count(p)) best = std::max(best, level_of(p) + 1);
        }
        l = best;
        return l;
    };

    std::vector<int> ordered = members;
    for (int v : ordered) level_of(v);
    std::sort(ordered.begin(), ordered.end(), [&](int a, int b) {
        if (level[a] != level[b]) return level[a] < level[b];
        return graph.names[a] < graph.names[b];
    });
    return ordered;
}

SemModel build_model(const WeightedGraph& graph, const GraphIndex& gi,
                     const std::vector<VariableRole>& roles) {
    const int n = static_cast<int>(graph.names.size());

    std::vector<int> group_z, group_x, group_y;
    for (int i = 0; i < n; ++i) {
        switch (roles[i]) {
            case VariableRole::Covariate: group_z.push_back(i); break;
            case VariableRole::Treatment: group_x.push_back(i); break;
            case VariableRole::Output: group_y.push_back(i); break;
        }
    }
    group_z = order_block(graph, gi, group_z);
    group_x = order_block(graph, gi, group_x);
    group_y = order_block(graph, gi, group_y);

    std::vector<int> pos(n, -1);
    SemModel m;
    for (int k = 0; k < static_cast<int>(group_z.size()); ++k) {
        pos[group_z[k]] = k;
        m.names_z.push_back(graph.names[group_z[k]]);
        m.mu_z.push_back(graph.intercepts[group_z[k]]);
    }
    for (int k = 0; k < static_cast<int>(group_x.size()); ++k) {
        pos[group_x[k]] = k;
        m.names_x.push_back(graph.names[group_x[k]]);
        m.mu_x.push_back(graph.intercepts[group_x[k]]);
    }
    for (int k = 0; k < static_cast<int>(group_y.size()); ++k) {
        pos[group_y[k]] = k;
        m.names_y.push_back(graph.names[group_y[k]]);
        m.mu_y.push_back(graph.intercepts[group_y[k]]);
    }

    const int nz = m.nz(), nx = m.nx(), ny = m.ny();
    m.a_zz = Matrix(nz, nz);
    m.a_xz = Matrix(nx, nz);
    m.a_xx = Matrix(nx, nx);
    m.a_yz = Matrix(ny, nz);
    m.a_yx = Matrix(ny, nx);
    m.a_yy = Matrix(ny, ny);

    for (const auto& e : graph.edges) {
        const int from = gi.by_name.at(e.from);
        const int to = gi.by_name.at(e.to);
        const VariableRole rf = roles[from];
        const VariableRole rt = roles[to];
        Matrix* block = nullptr;
        if (rt == VariableRole::Covariate) {
            if (rf != VariableRole::Covariate) {
                throw ModelError("edge " + e.from + " -> " + e.to + ": edges from " +
                                 role_name(rf) + " variables into covariates are not allowed");
            }
            block = &m.a_zz;
        } else if (rt == VariableRole::Treatment) {
            if (rf == VariableRole::Output) {
                throw ModelError("edge " + e.from + " -> " + e.to +
                                 ": edges from outputs into treatments are not allowed");
            }
            block = rf == VariableRole::Covariate ? &m.a_xz : &m.a_xx;
        } else {
            block = rf == VariableRole::Covariate ? &m.a_yz
                    : rf == VariableRole::Treatment ? &m.a_yx
                                                    : &m.a_yy;
        }
        (*block)(pos[to], pos[from]) = e.coef;
    }

    auto fill_cov = [&](const std::vector<int>& group) {
        const int k = static_cast<int>(group.size());
        Matrix s(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) s(i, j) = graph.error_cov(group[i], group[j]);
        return s;
    };
    m.s_zz = fill_cov(group_z);
    m.s_xx = fill_cov(group_x);
    m.s_yy = fill_cov(group_y);

    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (roles[a] != roles[b] && graph.error_cov(a, b) != 0.0) {
                throw ModelError("error covariance between " + graph.names[a] + " (" +
                                 role_name(roles[a]) + ") and " + graph.names[b] + " (" +
                                 role_name(roles[b]) + ") must be zero, got " +
                                 std::to_string(graph.error_cov(a, b)));
            }
        }
    }
    return m;
}

}  // namespace

const char* role_name(VariableRole role) {
    switch (role) {
        case VariableRole::Covariate: return "covariate";
        case VariableRole::Treatment: return "treatment";
        case VariableRole::Output: return "output";
    }
    return "?";
}

std::vector<std::string> SemModel::all_names() const {
    std::vector<std::string> out = names_z;
    out.insert(out.end(), names_x.begin(), names_x.end());
    out.insert(out.end(), names_y.begin(), names_y.end());
    return out;
}

bool SemModel::find(const std::string& name, VariableRole* role, int* index) const {
    for (int i = 0; i < nz(); ++i) {
        if (names_z[i] == name) {
            *role = VariableRole::Covariate;
            *index = i;
            return true;
        }
    }
    for (int i = 0; i < nx(); ++i) {
        if (names_x[i] == name) {
            *role = VariableRole::Treatment;
            *index = i;
            return true;
        }
    }
    for (int i = 0; i < ny(); ++i) {
        if (names_y[i] == name) {
            *role = VariableRole::Output;
            *index = i;
            return true;
        }
    }
    return false;
}

bool operator==(const SemModel& a, const SemModel& b) {
    return a.names_z == b.names_z && a.names_x == b.names_x && a.names_y == b.names_y &&
           a.a_zz == b.a_zz && a.a_xz == b.a_xz && a.a_xx == b.a_xx && a.a_yz == b.a_yz &&
           a.a_yx == b.a_yx && a.a_yy == b.a_yy && a.mu_z == b.mu_z && a.mu_x == b.mu_x &&
           a.mu_y == b.mu_y && a.s_zz == b.s_zz && a.s_xx == b.s_xx && a.s_yy == b.s_yy;
}

std::vector<std::string> validate(const SemModel& model) {
    std::vector<std::string> out;
    const int nz = model.nz(), nx = model.nx(), ny = model.ny();

    if (nx < 1) out.push_back("model must have at least one treatment variable (n_x >= 1)");

    std::set<std::string> seen;
    for (const std::string& name : model.all_names()) {
        if (!seen.insert(name).second) out.push_back("duplicate variable name '" + name + "'");
    }

    check_shape(&out, "a_zz", model.a_zz, nz, nz);
    check_shape(&out, "a_xz", model.a_xz, nx, nz);
    check_shape(&out, "a_xx", model.a_xx, nx, nx);
    check_shape(&out, "a_yz", model.a_yz, ny, nz);
    check_shape(&out, "a_yx", model.a_yx, ny, nx);
    check_shape(&out, "a_yy", model.a_yy, ny, ny);
    check_shape(&out, "s_zz", model.s_zz, nz, nz);
    check_shape(&out, "s_xx", model.s_xx, nx, nx);
    check_shape(&out, "s_yy", model.s_yy, ny, ny);
    if (static_cast<int>(model.mu_z.size()) != nz)
        out.push_back("mu_z: expected length " + std::to_string(nz));
    if (static_cast<int>(model.mu_x.size()) != nx)
        out.push_back("mu_x: expected length " + std::to_string(nx));
    if (static_cast<int>(model.mu_y.size()) != ny)
        out.push_back("mu_y: expected length " + std::to_string(ny));
    if (!out.empty()) return out;  // entry checks below assume consistent shapes

    check_strictly_lower(&out, "a_zz", model.a_zz, model.names_z);
    check_strictly_lower(&out, "a_xx", model.a_xx, model.names_x);
    check_strictly_lower(&out, "a_yy", model.a_yy, model.names_y);

    check_covariance(&out, "s_zz", model.s_zz, model.names_z);
    check_covariance(&out, "s_xx", model.s_xx, model.names_x);
    check_covariance(&out, "s_yy", model.s_yy, model.names_y);

    for (const auto* m : {&model.a_zz, &model.a_xz, &model.a_xx, &model.a_yz, &model.a_yx,
                          &model.a_yy}) {
        check_finite(&out, "coefficient block", *m);
    }
    for (const auto* m : {&model.s_zz, &model.s_xx, &model.s_yy}) {
        check_finite(&out, "error covariance", *m);
    }
    for (const auto* v : {&model.mu_z, &model.mu_x, &model.mu_y}) {
        for (double x : *v)
            if (!std::isfinite(x)) out.push_back("intercept entry not finite");
    }
    return out;
}

SemModel partition_by_treatment(const WeightedGraph& graph,
                                const std::vector<std::string>& treatments) {
    if (treatments.empty()) throw PreconditionError("treatment set must be nonempty");
    const GraphIndex gi = index_graph(graph);
    const int n = static_cast<int>(graph.names.size());

    std::vector<bool> is_treatment(n, false);
    for (const std::string& t : treatments) {
        auto it = gi.by_name.find(t);
        if (it == gi.by_name.end()) {
            throw UnknownVariableError("treatment set: unknown variable '" + t + "'");
        }
        is_treatment[it->second] = true;
    }

    // Strict ancestors of the treatment set via reverse reachability.
    std::vector<bool> is_ancestor(n, false);
    std::vector<int> frontier;
    for (int i = 0; i < n; ++i)
        if (is_treatment[i]) frontier.push_back(i);
    while (!frontier.empty()) {
        const int v = frontier.back();
        frontier.pop_back();
        for (int p : gi.radj[v]) {
            if (!is_treatment[p] && !is_ancestor[p]) {
                is_ancestor[p] = true;
                frontier.push_back(p);
            }
        }
    }

    std::vector<VariableRole> roles(n, VariableRole::Output);
    for (int i = 0; i < n; ++i) {
        if (is_treatment[i]) {
            roles[i] = VariableRole::Treatment;
        } else if (is_ancestor[i]) {
            roles[i] = VariableRole::Covariate;
        }
    }
    return build_model(graph, gi, roles);
}

SemModel assemble_from_roles(const WeightedGraph& graph, const std::vector<VariableRole>& roles) {
    if (roles.size() != graph.names.size()) {
        throw DimensionError("assemble_from_roles: role count does not match variable count");
    }
    const GraphIndex gi = index_graph(graph);
    return build_model(graph, gi, roles);
}

WeightedGraph flatten(const SemModel& model) {
    WeightedGraph g;
    g.names = model.all_names();
    g.intercepts = model.mu_z;
    g.intercepts.insert(g.intercepts.end(), model.mu_x.begin(), model.mu_x.end());
    g.intercepts.insert(g.intercepts.end(), model.mu_y.begin(), model.mu_y.end());

    const int nz = model.nz(), nx = model.nx(), ny = model.ny();
    const int n = model.total();
    g.error_cov = Matrix(n, n);
    for (int i = 0; i < nz; ++i)
        for (int j = 0; j < nz; ++j) g.error_cov(i, j) = model.s_zz(i, j);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nx; ++j) g.error_cov(nz + i, nz + j) = model.s_xx(i, j);
    for (int i = 0; i < ny; ++i)
        for (int j = 0; j < ny; ++j) g.error_cov(nz + nx + i, nz + nx + j) = model.s_yy(i, j);

    auto emit = [&](const Matrix& block, const std::vector<std::string>& row_names,
                    const std::vector<std::string>& col_names) {
        for (int i = 0; i < block.rows(); ++i)
            for (int j = 0; j < block.cols(); ++j)
                if (block(i, j) != 0.0) g.edges.push_back({col_names[j], row_names[i], block(i, j)});
    };
    emit(model.a_zz, model.names_z, model.names_z);
    emit(model.a_xz, model.names_x, model.names_z);
    emit(model.a_xx, model.names_x, model.names_x);
    emit(model.a_yz, model.names_y, model.names_z);
    emit(model.a_yx, model.names_y, model.names_x);
    emit(model.a_yy, model.names_y, model.names_y);
    return g;
}

}  // namespace semopt
