#include "semopt/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace semopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class BoundState { Free, AtLower, AtUpper, Fixed };

int output_index(const SemModel& model, const std::string& name, const char* who) {
    VariableRole role;
    int idx = 0;
    if (!model.find(name, &role, &idx) || role != VariableRole::Output) {
        throw UnknownVariableError(std::string(who) + ": '" + name + "' is not an output variable");
    }
    return idx;
}

void validate_box_qp(const BoxQp& qp) {
    const int d = qp.h.rows();
    if (qp.h.cols() != d) throw DimensionError("box qp: hessian must be square");
    if (static_cast<int>(qp.g.size()) != d || static_cast<int>(qp.lower.size()) != d ||
        static_cast<int>(qp.upper.size()) != d) {
        throw DimensionError("box qp: g/lower/upper must match the hessian dimension");
    }
    if (!qp.labels.empty() && static_cast<int>(qp.labels.size()) != d) {
        throw DimensionError("box qp: labels must be empty or match the dimension");
    }
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            if (std::abs(qp.h(i, j) - qp.h(j, i)) > 1e-10) {
                throw PreconditionError("box qp: hessian asymmetry at (" + std::to_string(i) + "," +
                                        std::to_string(j) + ") exceeds 1e-10");
            }
        }
    }
    if (d > 0) {
        const SymmetricEigen eig = symmetric_eigen(qp.h);
        if (eig.values.front() < -1e-8) {
            throw PreconditionError("box qp: hessian is not PSD (min eigenvalue " +
                                    std::to_string(eig.values.front()) + ")");
        }
    }
    for (int i = 0; i < d; ++i) {
        if (std::isnan(qp.lower[i]) || std::isnan(qp.upper[i])) {
            throw PreconditionError("box qp: bound " + std::to_string(i) + " is NaN");
        }
        if (qp.lower[i] > qp.upper[i]) {
            throw PreconditionError("box qp: lower > upper at index " + std::to_string(i));
        }
        if (qp.lower[i] == qp.upper[i] && !std::isfinite(qp.lower[i])) {
            throw PreconditionError("box qp: equal infinite bounds at index " + std::to_string(i));
        }
    }
}

std::vector<double> gradient(const BoxQp& qp, const std::vector<double>& alpha) {
    std::vector<double> grad = qp.h * alpha;
    for (double& v : grad) v *= 2.0;
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += qp.g[i];
    return grad;
}

QpSolution finish(const BoxQp& qp, const std::vector<double>& alpha,
                  const std::vector<BoundState>& st, const std::vector<double>& grad,
                  int passes) {
    const int d = qp.h.rows();
    QpSolution sol;
    sol.alpha = alpha;
    sol.lambda_lower.assign(d, 0.0);
    sol.lambda_upper.assign(d, 0.0);
    for (int i = 0; i < d; ++i) {
        switch (st[i]) {
            case BoundState::AtLower: sol.lambda_lower[i] = grad[i]; break;
            case BoundState::AtUpper: sol.lambda_upper[i] = -grad[i]; break;
            case BoundState::Fixed:
                // Equality constraint: put the multiplier on whichever side
                // keeps it nonnegative.
                if (grad[i] >= 0.0) {
                    sol.lambda_lower[i] = grad[i];
                } else {
                    sol.lambda_upper[i] = -grad[i];
                }
                break;
            case BoundState::Free: break;
        }
    }
    sol.objective = qp_objective(qp, alpha);
    sol.kkt = check_kkt(qp, alpha, sol.lambda_lower, sol.lambda_upper);
    sol.iterations = passes;
    return sol;
}

}  // namespace

VarianceQpInputs variance_qp_inputs(const SemModel& model, const std::vector<std::string>& outputs,
                                    const std::vector<double>& weights) {
    if (outputs.empty()) throw PreconditionError("variance qp: outputs must be nonempty");
    if (weights.size() != outputs.size()) {
        throw DimensionError("variance qp: weight count does not match output count");
    }
    for (double w : weights) {
        if (!(w > 0.0)) throw PreconditionError("variance qp: weights must be positive");
    }

    const TotalEffects te = total_effects(model);
    const Matrix mzz_inv_t = unit_lower_inverse(model.a_zz).transposed();

    VarianceQpInputs in;
    in.weights = weights;
    for (const std::string& name : outputs) {
        const int k = output_index(model, name, "variance qp");
        in.output_indices.push_back(k);
        in.q.push_back(kron(mzz_inv_t, te.t_yx.row(k)));
        const Matrix avoid_row = te.t_yz_avoid.row(k);
        std::vector<double> r(model.nz());
        for (int j = 0; j < model.nz(); ++j) r[j] = avoid_row(0, j);
        in.r.push_back(std::move(r));
    }
    return in;
}

BoxQp build_variance_qp(const SemModel& model, const std::vector<std::string>& outputs,
                        const std::vector<double>& weights, const Bounds& coef_bounds) {
    const VarianceQpInputs in = variance_qp_inputs(model, outputs, weights);
    const int nx = model.nx(), nz = model.nz();
    const int d = nx * nz;

    if (coef_bounds.lower.rows() != nx || coef_bounds.lower.cols() != nz ||
        coef_bounds.upper.rows() != nx || coef_bounds.upper.cols() != nz) {
        throw DimensionError("variance qp: bounds must be " + std::to_string(nx) + "x" +
                             std::to_string(nz));
    }

    const TotalEffects te = total_effects(model);
    Matrix tyy_i = te.t_yy;
    for (int i = 0; i < tyy_i.rows(); ++i) tyy_i(i, i) += 1.0;
    const Matrix var_from_x = te.t_yx * model.s_xx * te.t_yx.transposed();
    const Matrix var_from_y = tyy_i * model.s_yy * tyy_i.transposed();

    BoxQp qp;
    qp.h = Matrix(d, d);
    qp.g.assign(d, 0.0);
    qp.c = 0.0;
    for (std::size_t i = 0; i < in.q.size(); ++i) {
        const double w = in.weights[i];
        const int k = in.output_indices[i];
        const Matrix qt_s = in.q[i].transposed() * model.s_zz;
        qp.h += w * (qt_s * in.q[i]);
        const std::vector<double> qsr = qt_s * in.r[i];
        for (int j = 0; j < d; ++j) qp.g[j] += 2.0 * w * qsr[j];
        double r_s_r = 0.0;
        const std::vector<double> sr = model.s_zz * in.r[i];
        for (int j = 0; j < nz; ++j) r_s_r += in.r[i][j] * sr[j];
        qp.c += w * (r_s_r + var_from_x(k, k) + var_from_y(k, k));
    }

    qp.lower = vec(coef_bounds.lower);
    qp.upper = vec(coef_bounds.upper);
    qp.labels.resize(d);
    for (int j = 0; j < nz; ++j)
        for (int i = 0; i < nx; ++i)
            qp.labels[j * nx + i] = "coef:" + model.names_z[j] + "->" + model.names_x[i];
    for (int i = 0; i < d; ++i) {
        if (qp.lower[i] > qp.upper[i]) {
            throw PreconditionError("variance qp: bound lower > upper for " + qp.labels[i]);
        }
    }
    return qp;
}

BoxQp build_mean_qp(const SemModel& model, const std::vector<MeanTarget>& targets,
                    const Bounds& intercept_bounds) {
    if (targets.empty()) throw PreconditionError("mean qp: targets must be nonempty");
    const int nx = model.nx();
    if (intercept_bounds.lower.rows() != nx || intercept_bounds.lower.cols() != 1 ||
        intercept_bounds.upper.rows() != nx || intercept_bounds.upper.cols() != 1) {
        throw DimensionError("mean qp: intercept bounds must be " + std::to_string(nx) + "x1");
    }

    const TotalEffects te = total_effects(model);
    Matrix tyy_i = te.t_yy;
    for (int i = 0; i < tyy_i.rows(); ++i) tyy_i(i, i) += 1.0;

    BoxQp qp;
    qp.h = Matrix(nx, nx);
    qp.g.assign(nx, 0.0);
    qp.c = 0.0;
    for (const MeanTarget& target : targets) {
        if (!(target.weight > 0.0)) throw PreconditionError("mean qp: weights must be positive");
        const int k = output_index(model, target.output, "mean qp");
        const Matrix row = te.t_yx.row(k);  // 1 x nx
        double resid = -target.value;
        for (int j = 0; j < model.nz(); ++j) resid += te.t_yz(k, j) * model.mu_z[j];
        for (int j = 0; j < model.ny(); ++j) resid += tyy_i(k, j) * model.mu_y[j];
        for (int a = 0; a < nx; ++a) {
            for (int b = 0; b < nx; ++b) qp.h(a, b) += target.weight * row(0, a) * row(0, b);
            qp.g[a] += 2.0 * target.weight * resid * row(0, a);
        }
        qp.c += target.weight * resid * resid;
    }

    qp.lower = vec(intercept_bounds.lower);
    qp.upper = vec(intercept_bounds.upper);
    qp.labels.resize(nx);
    for (int i = 0; i < nx; ++i) qp.labels[i] = "intercept:" + model.names_x[i];
    for (int i = 0; i < nx; ++i) {
        if (qp.lower[i] > qp.upper[i]) {
            throw PreconditionError("mean qp: bound lower > upper for " + qp.labels[i]);
        }
    }
    return qp;
}

QpSolution solve_box_qp(const BoxQp& qp, const SolveOptions& options) {
    validate_box_qp(qp);
    const int d = qp.h.rows();
    if (d == 0) {
        QpSolution sol;
        sol.objective = qp.c;
        sol.kkt.satisfied = true;
        return sol;
    }
    if (!options.warm_start.empty() && static_cast<int>(options.warm_start.size()) != d) {
        throw DimensionError("solve_box_qp: warm start length does not match dimension");
    }

    std::vector<BoundState> st(d, BoundState::Free);
    std::vector<double> alpha(d, 0.0);
    for (int i = 0; i < d; ++i) {
        if (qp.lower[i] == qp.upper[i]) {
            st[i] = BoundState::Fixed;
            alpha[i] = qp.lower[i];
            continue;
        }
        double a0 = options.warm_start.empty() ? 0.0 : options.warm_start[i];
        a0 = std::min(std::max(a0, qp.lower[i]), qp.upper[i]);
        alpha[i] = a0;
        if (a0 == qp.lower[i]) {
            st[i] = BoundState::AtLower;
        } else if (a0 == qp.upper[i]) {
            st[i] = BoundState::AtUpper;
        }
    }

    const long long max_changes =
        options.max_changes >= 0 ? options.max_changes : 10LL * d * d;
    long long changes = 0;
    int passes = 0;

    while (true) {
        ++passes;
        std::vector<int> free_idx;
        for (int i = 0; i < d; ++i) {
            if (st[i] == BoundState::Free) free_idx.push_back(i);
        }
        const int nf = static_cast<int>(free_idx.size());
        bool stepped = false;

        if (nf > 0) {
            // Equality-constrained subproblem over the free block:
            //   h_ff x = -g_f/2 - h_f,rest alpha_rest
            Matrix hff(nf, nf);
            std::vector<double> rhs(nf);
            for (int a = 0; a < nf; ++a) {
                const int i = free_idx[a];
                double r = -0.5 * qp.g[i];
                for (int j = 0; j < d; ++j) {
                    if (st[j] != BoundState::Free) r -= qp.h(i, j) * alpha[j];
                }
                rhs[a] = r;
                for (int b = 0; b < nf; ++b) hff(a, b) = qp.h(i, free_idx[b]);
            }

            const SymmetricEigen eig = symmetric_eigen(hff);
            double lam_abs_max = 0.0;
            for (double v : eig.values) lam_abs_max = std::max(lam_abs_max, std::abs(v));
            const double cutoff = 1e-10 * lam_abs_max;

            // Minimum-norm stationary point via the pseudo-inverse.
            std::vector<double> xhat(nf, 0.0);
            for (int k = 0; k < nf; ++k) {
                if (std::abs(eig.values[k]) <= cutoff) continue;
                double proj = 0.0;
                for (int a = 0; a < nf; ++a) proj += eig.vectors(a, k) * rhs[a];
                const double scale = proj / eig.values[k];
                for (int a = 0; a < nf; ++a) xhat[a] += scale * eig.vectors(a, k);
            }
            std::vector<double> resid(nf, 0.0);
            for (int a = 0; a < nf; ++a) {
                double hx = 0.0;
                for (int b = 0; b < nf; ++b) hx += hff(a, b) * xhat[b];
                resid[a] = rhs[a] - hx;
            }

            if (max_abs(resid) > 1e-9 * (1.0 + max_abs(rhs))) {
                // rhs has a null-space component: the objective decreases
                // linearly along resid. Walk to the first blocking bound.
                double t_best = kInf;
                int block = -1;
                for (int a = 0; a < nf; ++a) {
                    const int i = free_idx[a];
                    double t = kInf;
                    if (resid[a] > 0.0 && std::isfinite(qp.upper[i])) {
                        t = (qp.upper[i] - alpha[i]) / resid[a];
                    } else if (resid[a] < 0.0 && std::isfinite(qp.lower[i])) {
                        t = (qp.lower[i] - alpha[i]) / resid[a];
                    }
                    if (t < t_best) {
                        t_best = t;
                        block = a;
                    }
                }
                if (block < 0) {
                    std::vector<double> ray(d, 0.0);
                    const double norm = max_abs(resid);
                    for (int a = 0; a < nf; ++a) ray[free_idx[a]] = resid[a] / norm;
                    throw UnboundedError(
                        "solve_box_qp: objective is unbounded below along a feasible ray", ray);
                }
                t_best = std::max(t_best, 0.0);
                for (int a = 0; a < nf; ++a) alpha[free_idx[a]] += t_best * resid[a];
                const int bi = free_idx[block];
                if (resid[block] > 0.0) {
                    alpha[bi] = qp.upper[bi];
                    st[bi] = BoundState::AtUpper;
                } else {
                    alpha[bi] = qp.lower[bi];
                    st[bi] = BoundState::AtLower;
                }
                ++changes;
                stepped = true;
            } else {
                std::vector<double> p(nf);
                double pnorm = 0.0, anorm = 0.0;
                for (int a = 0; a < nf; ++a) {
                    p[a] = xhat[a] - alpha[free_idx[a]];
                    pnorm = std::max(pnorm, std::abs(p[a]));
                    anorm = std::max(anorm, std::abs(alpha[free_idx[a]]));
                }
                if (pnorm > 1e-13 * (1.0 + anorm)) {
                    double t_best = 1.0;
                    int block = -1;
                    for (int a = 0; a < nf; ++a) {
                        const int i = free_idx[a];
                        double t = kInf;
                        if (p[a] > 0.0 && std::isfinite(qp.upper[i])) {
                            t = (qp.upper[i] - alpha[i]) / p[a];
                        } else if (p[a] < 0.0 && std::isfinite(qp.lower[i])) {
                            t = (qp.lower[i] - alpha[i]) / p[a];
                        }
                        if (t < t_best) {
                            t_best = t;
                            block = a;
                        }
                    }
                    if (block >= 0) {
                        t_best = std::max(t_best, 0.0);
                        for (int a = 0; a < nf; ++a) alpha[free_idx[a]] += t_best * p[a];
                        const int bi = free_idx[block];
                        if (p[block] > 0.0) {
                            alpha[bi] = qp.upper[bi];
                            st[bi] = BoundState::AtUpper;
                        } else {
                            alpha[bi] = qp.lower[bi];
                            st[bi] = BoundState::AtLower;
                        }
                        ++changes;
                        stepped = true;
                    } else {
                        for (int a = 0; a < nf; ++a) alpha[free_idx[a]] = xhat[a];
                    }
                }
            }
            // Keep every coordinate inside its box against rounding drift.
            for (int i = 0; i < d; ++i) {
                alpha[i] = std::min(std::max(alpha[i], qp.lower[i]), qp.upper[i]);
            }
        }

        if (!stepped) {
            const std::vector<double> grad = gradient(qp, alpha);
            const double mult_tol = 1e-10 * (1.0 + max_abs(grad));
            double worst = -mult_tol;
            int worst_i = -1;
            for (int i = 0; i < d; ++i) {
                double m;
                if (st[i] == BoundState::AtLower) {
                    m = grad[i];
                } else if (st[i] == BoundState::AtUpper) {
                    m = -grad[i];
                } else {
                    continue;
                }
                if (m < worst) {
                    worst = m;
                    worst_i = i;
                }
            }
            if (worst_i < 0) return finish(qp, alpha, st, grad, passes);
            st[worst_i] = BoundState::Free;
            ++changes;
        }

        if (changes > max_changes) {
            throw MaxIterationsError("solve_box_qp: exceeded " + std::to_string(max_changes) +
                                     " working-set changes");
        }
    }
}

KktReport check_kkt(const BoxQp& qp, const std::vector<double>& alpha,
                    const std::vector<double>& lambda_lower,
                    const std::vector<double>& lambda_upper) {
    const int d = qp.h.rows();
    if (static_cast<int>(alpha.size()) != d || static_cast<int>(lambda_lower.size()) != d ||
        static_cast<int>(lambda_upper.size()) != d) {
        throw DimensionError("check_kkt: vector lengths do not match the qp dimension");
    }

    KktReport rep;
    const std::vector<double> grad = gradient(qp, alpha);
    for (int i = 0; i < d; ++i) {
        rep.stationarity_residual = std::max(
            rep.stationarity_residual, std::abs(grad[i] - lambda_lower[i] + lambda_upper[i]));

        if (std::isfinite(qp.lower[i])) {
            rep.primal_violation = std::max(rep.primal_violation, qp.lower[i] - alpha[i]);
        }
        if (std::isfinite(qp.upper[i])) {
            rep.primal_violation = std::max(rep.primal_violation, alpha[i] - qp.upper[i]);
        }

        rep.dual_violation = std::max(rep.dual_violation, -lambda_lower[i]);
        rep.dual_violation = std::max(rep.dual_violation, -lambda_upper[i]);

        if (lambda_lower[i] != 0.0) {
            rep.complementarity =
                std::max(rep.complementarity, std::abs(lambda_lower[i] * (qp.lower[i] - alpha[i])));
        }
        if (lambda_upper[i] != 0.0) {
            rep.complementarity =
                std::max(rep.complementarity, std::abs(lambda_upper[i] * (alpha[i] - qp.upper[i])));
        }
    }
    rep.primal_violation = std::max(rep.primal_violation, 0.0);
    rep.dual_violation = std::max(rep.dual_violation, 0.0);
    rep.satisfied = rep.stationarity_residual <= kKktTolerance &&
                    rep.primal_violation <= kKktTolerance &&
                    rep.dual_violation <= kKktTolerance && rep.complementarity <= kKktTolerance;
    return rep;
}

double qp_objective(const BoxQp& qp, const std::vector<double>& alpha) {
    const std::vector<double> ha = qp.h * alpha;
    double obj = qp.c;
    for (std::size_t i = 0; i < alpha.size(); ++i) obj += alpha[i] * ha[i] + qp.g[i] * alpha[i];
    return obj;
}

std::vector<double> offset_certificate(const SemModel& model, const QpSolution& solution,
                                       const std::string& output) {
    const int k = output_index(model, output, "offset_certificate");
    const int nx = model.nx(), nz = model.nz();
    if (static_cast<int>(solution.alpha.size()) != nx * nz) {
        throw DimensionError("offset_certificate: solution is not a vec(a_xz) of this model");
    }

    const TotalEffects te = total_effects(model);
    if (te.t_yx.row(k).max_abs() == 0.0) {
        throw PreconditionError("offset_certificate: treatment->output effect row is zero");
    }
    if (nz > 0) {
        const SymmetricEigen eig = symmetric_eigen(model.s_zz);
        if (eig.values.front() <= 1e-12 * std::max(std::abs(eig.values.back()), 1e-300)) {
            throw PreconditionError("offset_certificate: s_zz is singular");
        }
    }
    for (int i = 0; i < nx * nz; ++i) {
        if (std::abs(solution.lambda_lower[i]) > 1e-12 ||
            std::abs(solution.lambda_upper[i]) > 1e-12) {
            throw PreconditionError(
                "offset_certificate: solution has active bounds; requires an unconstrained solve");
        }
    }

    const Matrix a_new = unvec(solution.alpha, nx, nz);
    const Matrix residual =
        te.t_yx.row(k) * a_new * unit_lower_inverse(model.a_zz) + te.t_yz_avoid.row(k);
    std::vector<double> out(nz);
    for (int j = 0; j < nz; ++j) out[j] = residual(0, j);
    return out;
}

}  // namespace semopt
