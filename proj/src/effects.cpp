#include "semopt/effects.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

namespace semopt {

namespace {

Matrix plus_identity(Matrix m) {
    for (int i = 0; i < m.rows(); ++i) m(i, i) += 1.0;
    return m;
}

Matrix sandwich(const Matrix& t, const Matrix& s) { return t * s * t.transposed(); }

}  // namespace

TotalEffects total_effects(const SemModel& model) {
    const Matrix inv_zz = unit_lower_inverse(model.a_zz);  // (I - a_zz)^{-1}
    const Matrix inv_xx = unit_lower_inverse(model.a_xx);
    const Matrix inv_yy = unit_lower_inverse(model.a_yy);

    TotalEffects te;
    te.t_zz = inv_zz * model.a_zz;
    te.t_xx = inv_xx * model.a_xx;
    te.t_yy = inv_yy * model.a_yy;
    te.t_xz = inv_xx * model.a_xz * inv_zz;
    te.t_yx = inv_yy * model.a_yx * inv_xx;
    te.t_yz_through = te.t_yx * model.a_xz * inv_zz;
    te.t_yz_avoid = inv_yy * model.a_yz * inv_zz;
    te.t_yz = te.t_yz_through + te.t_yz_avoid;
    return te;
}

Moments moments(const SemModel& model) {
    const TotalEffects te = total_effects(model);
    const Matrix tzz_i = plus_identity(te.t_zz);
    const Matrix txx_i = plus_identity(te.t_xx);
    const Matrix tyy_i = plus_identity(te.t_yy);

    Moments mo;
    mo.mean_z = tzz_i * model.mu_z;
    mo.mean_x = add(te.t_xz * model.mu_z, txx_i * model.mu_x);
    mo.mean_y = add(add(te.t_yz * model.mu_z, te.t_yx * model.mu_x), tyy_i * model.mu_y);

    mo.var_z = sandwich(tzz_i, model.s_zz);
    mo.var_x = sandwich(te.t_xz, model.s_zz) + sandwich(txx_i, model.s_xx);
    mo.var_y = sandwich(te.t_yz, model.s_zz) + sandwich(te.t_yx, model.s_xx) +
               sandwich(tyy_i, model.s_yy);
    // Cov[x, z] = (I - a_xx)^{-1} a_xz V[z]; equals t_xz s_zz (t_zz + I)^T.
    mo.cov_xz = unit_lower_inverse(model.a_xx) * model.a_xz * mo.var_z;
    return mo;
}

SemModel apply_intervention(const SemModel& model, const Intervention& iv) {
    if (!iv.new_a_xz.has_value() && !iv.new_mu_x.has_value()) {
        throw PreconditionError("intervention must replace the coefficient block or the intercepts");
    }
    SemModel out = model;
    if (iv.new_a_xz.has_value()) {
        const Matrix& a = *iv.new_a_xz;
        if (a.rows() != model.nx() || a.cols() != model.nz()) {
            throw DimensionError("intervention coefficients must be " + std::to_string(model.nx()) +
                                 "x" + std::to_string(model.nz()) + ", got " +
                                 std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
        }
        out.a_xz = a;
    }
    if (iv.new_mu_x.has_value()) {
        if (iv.new_mu_x->size() != model.mu_x.size()) {
            throw DimensionError("intervention intercepts must have length " +
                                 std::to_string(model.mu_x.size()) + ", got " +
                                 std::to_string(iv.new_mu_x->size()));
        }
        out.mu_x = *iv.new_mu_x;
    }
    return out;
}

std::vector<PathEffect> enumerate_path_effects(const SemModel& model, const std::string& source,
                                               const std::string& target) {
    VariableRole src_role, tgt_role;
    int src_block_idx = 0, tgt_block_idx = 0;
    if (!model.find(source, &src_role, &src_block_idx)) {
        throw UnknownVariableError("enumerate_path_effects: unknown variable '" + source + "'");
    }
    if (!model.find(target, &tgt_role, &tgt_block_idx)) {
        throw UnknownVariableError("enumerate_path_effects: unknown variable '" + target + "'");
    }
    if (source == target) {
        throw PreconditionError("enumerate_path_effects: source and target must differ");
    }

    // Combined graph in z, x, y order; this concatenation is a topological
    // order because within-block matrices are strictly lower triangular and
    // cross-block edges only point forward.
    const int nz = model.nz(), nx = model.nx();
    const int n = model.total();
    const std::vector<std::string> names = model.all_names();

    std::vector<std::vector<std::pair<int, double>>> adj(n);
    auto connect = [&](const Matrix& block, int row_base, int col_base) {
        for (int i = 0; i < block.rows(); ++i)
            for (int j = 0; j < block.cols(); ++j)
                if (block(i, j) != 0.0) adj[col_base + j].push_back({row_base + i, block(i, j)});
    };
    connect(model.a_zz, 0, 0);
    connect(model.a_xz, nz, 0);
    connect(model.a_xx, nz, nz);
    connect(model.a_yz, nz + nx, 0);
    connect(model.a_yx, nz + nx, nz);
    connect(model.a_yy, nz + nx, nz + nx);
    for (auto& list : adj) std::sort(list.begin(), list.end());

    auto global_index = [&](VariableRole role, int block_idx) {
        switch (role) {
            case VariableRole::Covariate: return block_idx;
            case VariableRole::Treatment: return nz + block_idx;
            case VariableRole::Output: return nz + nx + block_idx;
        }
        return -1;
    };
    const int src = global_index(src_role, src_block_idx);
    const int tgt = global_index(tgt_role, tgt_block_idx);

    // Count paths first so we can refuse explosions before enumerating.
    constexpr double kMaxPaths = 1e6;
    std::vector<double> count(n, 0.0);
    count[src] = 1.0;
    for (int u = 0; u < n; ++u) {
        if (count[u] == 0.0) continue;
        for (const auto& [v, coef] : adj[u]) count[v] += count[u];
    }
    if (count[tgt] > kMaxPaths) {
        throw PathExplosionError("enumerate_path_effects: " + std::to_string(count[tgt]) +
                                 " paths from " + source + " to " + target + " exceed the 1e6 cap");
    }

    auto is_treatment = [&](int v) { return v >= nz && v < nz + nx; };

    std::vector<PathEffect> out;
    std::vector<int> stack = {src};
    std::vector<double> products = {1.0};

    std::function<void()> dfs = [&]() {
        const int u = stack.back();
        if (u == tgt) {
            PathEffect pe;
            pe.effect = products.back();
            for (int v : stack) {
                pe.path.push_back(names[v]);
                pe.through_treatment = pe.through_treatment || is_treatment(v);
            }
            out.push_back(std::move(pe));
            return;
        }
        for (const auto& [v, coef] : adj[u]) {
            stack.push_back(v);
            products.push_back(products.back() * coef);
            dfs();
            stack.pop_back();
            products.pop_back();
        }
    };
    dfs();
    return out;
}

}  // namespace semopt
