#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "semopt/effects.hpp"
#include "semopt/model.hpp"
#include "semopt/qp.hpp"

namespace semtest {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Well-conditioned random SPD matrix: A A^T / n + base I.
inline semopt::Matrix random_spd(Rng& rng, int n, double base = 0.2) {
    semopt::Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = uniform(rng, -1.0, 1.0);
    semopt::Matrix s = a * a.transposed();
    const double scale = 1.0 / std::max(n, 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) s(i, j) *= scale;
        s(i, i) += base;
    }
    return s;
}

struct RandomModelOptions {
    int nz = -1, nx = -1, ny = -1;  // -1 draws nz,ny in 0..3 and nx in 1..3
    double edge_prob = 0.6;
    bool full_cov = false;  // SPD error blocks instead of diagonal
};

inline semopt::SemModel random_model(Rng& rng, const RandomModelOptions& opt = {}) {
    const int nz = opt.nz >= 0 ? opt.nz : uniform_int(rng, 0, 3);
    const int nx = opt.nx >= 0 ? opt.nx : uniform_int(rng, 1, 3);
    const int ny = opt.ny >= 0 ? opt.ny : uniform_int(rng, 0, 3);

    semopt::SemModel m;
    for (int i = 0; i < nz; ++i) m.names_z.push_back("z" + std::to_string(i));
    for (int i = 0; i < nx; ++i) m.names_x.push_back("x" + std::to_string(i));
    for (int i = 0; i < ny; ++i) m.names_y.push_back("y" + std::to_string(i));

    auto strict_lower = [&](int n) {
        semopt::Matrix a(n, n);
        for (int i = 1; i < n; ++i)
            for (int j = 0; j < i; ++j)
                if (uniform(rng, 0.0, 1.0) < opt.edge_prob) a(i, j) = uniform(rng, -1.0, 1.0);
        return a;
    };
    auto cross = [&](int rows, int cols) {
        semopt::Matrix a(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                if (uniform(rng, 0.0, 1.0) < opt.edge_prob) a(i, j) = uniform(rng, -1.0, 1.0);
        return a;
    };
    m.a_zz = strict_lower(nz);
    m.a_xx = strict_lower(nx);
    m.a_yy = strict_lower(ny);
    m.a_xz = cross(nx, nz);
    m.a_yz = cross(ny, nz);
    m.a_yx = cross(ny, nx);

    auto intercepts = [&](int n) {
        std::vector<double> v(n);
        for (double& x : v) x = uniform(rng, -1.0, 1.0);
        return v;
    };
    m.mu_z = intercepts(nz);
    m.mu_x = intercepts(nx);
    m.mu_y = intercepts(ny);

    auto cov = [&](int n) {
        if (opt.full_cov) return random_spd(rng, n);
        semopt::Matrix s(n, n);
        for (int i = 0; i < n; ++i) s(i, i) = uniform(rng, 0.1, 1.0);
        return s;
    };
    m.s_zz = cov(nz);
    m.s_xx = cov(nx);
    m.s_yy = cov(ny);
    return m;
}

// The journal fixture: two covariates (log campaigns, log submissions), one
// treatment (log acceptance rate), one output (log pages); all error
// variances 0.1 and the covariate->treatment coefficients initially zero.
inline semopt::SemModel journal_model() {
    using semopt::Matrix;
    semopt::SemModel m;
    m.names_z = {"z1", "z2"};
    m.names_x = {"x"};
    m.names_y = {"y"};
    m.a_zz = Matrix{{0, 0}, {0.1, 0}};
    m.a_xz = Matrix(1, 2);
    m.a_xx = Matrix(1, 1);
    m.a_yz = Matrix{{0, 1}};
    m.a_yx = Matrix{{1}};
    m.a_yy = Matrix(1, 1);
    m.mu_z = {std::log(10.0), std::log(100.0)};
    m.mu_x = {std::log(0.3)};
    m.mu_y = {std::log(10.0)};
    m.s_zz = Matrix{{0.1, 0}, {0, 0.1}};
    m.s_xx = Matrix{{0.1}};
    m.s_yy = Matrix{{0.1}};
    return m;
}

// Full-matrix total effects (I - L)^{-1} L over the assembled coefficient
// matrix; the independent oracle for per-block formulas and path sums.
inline semopt::Matrix assemble_full_coefficients(const semopt::SemModel& m) {
    const int nz = m.nz(), nx = m.nx(), ny = m.ny();
    const int n = m.total();
    semopt::Matrix full(n, n);
    auto put = [&](const semopt::Matrix& block, int row0, int col0) {
        for (int i = 0; i < block.rows(); ++i)
            for (int j = 0; j < block.cols(); ++j) full(row0 + i, col0 + j) = block(i, j);
    };
    put(m.a_zz, 0, 0);
    put(m.a_xz, nz, 0);
    put(m.a_xx, nz, nz);
    put(m.a_yz, nz + nx, 0);
    put(m.a_yx, nz + nx, nz);
    put(m.a_yy, nz + nx, nz + nx);
    return full;
}

inline semopt::Matrix full_total_effects(const semopt::SemModel& m) {
    const semopt::Matrix full = assemble_full_coefficients(m);
    return semopt::unit_lower_inverse(full) * full;
}

// Exhaustive active-set enumeration: solves the equality-constrained
// subproblem for every lower/upper/free sign pattern and keeps the best
// feasible stationary point. Requires strictly convex H and finite bounds.
struct BruteForceResult {
    std::vector<double> alpha;
    double objective = 0.0;
    bool found = false;
};

inline BruteForceResult brute_force_box_qp(const semopt::BoxQp& qp) {
    const int d = qp.h.rows();
    BruteForceResult best;

    std::vector<int> pattern(d, 0);  // 0 = at lower, 1 = at upper, 2 = free
    long long combos = 1;
    for (int i = 0; i < d; ++i) combos *= 3;

    for (long long code = 0; code < combos; ++code) {
        long long c = code;
        for (int i = 0; i < d; ++i) {
            pattern[i] = static_cast<int>(c % 3);
            c /= 3;
        }

        std::vector<double> alpha(d, 0.0);
        std::vector<int> free_idx;
        for (int i = 0; i < d; ++i) {
            if (pattern[i] == 0) {
                alpha[i] = qp.lower[i];
            } else if (pattern[i] == 1) {
                alpha[i] = qp.upper[i];
            } else {
                free_idx.push_back(i);
            }
        }

        const int nf = static_cast<int>(free_idx.size());
        if (nf > 0) {
            semopt::Matrix hff(nf, nf);
            std::vector<double> rhs(nf, 0.0);
            for (int a = 0; a < nf; ++a) {
                const int i = free_idx[a];
                rhs[a] = -0.5 * qp.g[i];
                for (int j = 0; j < d; ++j) {
                    if (pattern[j] != 2) rhs[a] -= qp.h(i, j) * alpha[j];
                }
                for (int b = 0; b < nf; ++b) hff(a, b) = qp.h(i, free_idx[b]);
            }
            semopt::Matrix inv;
            try {
                inv = semopt::inverse(hff);
            } catch (const semopt::SingularMatrixError&) {
                continue;
            }
            const std::vector<double> x = inv * rhs;
            bool feasible = true;
            for (int a = 0; a < nf; ++a) {
                const int i = free_idx[a];
                if (x[a] < qp.lower[i] - 1e-10 || x[a] > qp.upper[i] + 1e-10) {
                    feasible = false;
                    break;
                }
                alpha[i] = x[a];
            }
            if (!feasible) continue;
        }

        const double obj = semopt::qp_objective(qp, alpha);
        if (!best.found || obj < best.objective) {
            best.found = true;
            best.objective = obj;
            best.alpha = alpha;
        }
    }
    return best;
}

// 1-d golden-section minimizer on [lo, hi].
inline double golden_section(const std::function<double(double)>& f, double lo, double hi,
                             double tol = 1e-12) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

inline std::string models_dir() { return SEMOPT_MODELS_DIR; }

}  // namespace semtest
