#pragma once

#include <string>
#include <vector>

#include "semopt/effects.hpp"
#include "semopt/model.hpp"

namespace semopt {

// minimize  alpha^T H alpha + g^T alpha + c  subject to  lower <= alpha <= upper.
// The constant c is carried so reported objectives are true variances or true
// squared deviations, not just the optimizable part.
struct BoxQp {
    Matrix h;                     // symmetric PSD
    std::vector<double> g;
    double c = 0.0;
    std::vector<double> lower, upper;  // entries may be +/-infinity
    std::vector<std::string> labels;   // decision index -> coefficient/intercept slot
};

// Residuals of the KKT conditions: stationarity 2 H a + g - lam_lo + lam_up,
// primal bound violations, negative multipliers, and complementary slackness.
struct KktReport {
    double stationarity_residual = 0.0;
    double primal_violation = 0.0;
    double dual_violation = 0.0;
    double complementarity = 0.0;
    bool satisfied = false;  // all four residuals <= 1e-8
};

constexpr double kKktTolerance = 1e-8;

struct QpSolution {
    std::vector<double> alpha;
    double objective = 0.0;  // includes the constant c
    std::vector<double> lambda_lower, lambda_upper;
    KktReport kkt;
    int iterations = 0;
};

// Per-output carriers for the variance QP: q[i] and r[i] are defined so that
// the post-intervention covariate->output total effect row for output i is
// (q[i] * vec(new_a_xz) + r[i])^T.
struct VarianceQpInputs {
    std::vector<Matrix> q;                 // n_z x (n_x * n_z) each
    std::vector<std::vector<double>> r;    // length n_z each
    std::vector<double> weights;
    std::vector<int> output_indices;       // rows of the y block
};

VarianceQpInputs variance_qp_inputs(const SemModel& model,
                                    const std::vector<std::string>& outputs,
                                    const std::vector<double>& weights);

// Weighted variance minimization over the covariate->treatment coefficients.
// Decision vector is vec(new_a_xz); bounds are vectorized the same way.
BoxQp build_variance_qp(const SemModel& model, const std::vector<std::string>& outputs,
                        const std::vector<double>& weights, const Bounds& coef_bounds);

struct MeanTarget {
    std::string output;
    double value = 0.0;   // target on the model (log/raw) scale
    double weight = 1.0;
};

// Weighted squared deviation of output means from targets, over the treatment
// intercepts. Uses the model's current coefficient block, so applying a
// coefficient intervention first yields the two-step flow.
BoxQp build_mean_qp(const SemModel& model, const std::vector<MeanTarget>& targets,
                    const Bounds& intercept_bounds);

struct SolveOptions {
    // <0 means the default cap of 10 d^2 working-set changes.
    int max_changes = -1;
    std::vector<double> warm_start;  // empty or length d; clamped into bounds
};

// Primal active-set solver for box-constrained convex QPs. Indices with
// lower == upper are fixed and excluded from the working set. Singular PSD
// blocks take the minimum-norm step (eigendecomposition pseudo-inverse,
// cutoff 1e-10 * lambda_max). Throws UnboundedError with the descent ray, or
// MaxIterationsError past the working-set change cap.
QpSolution solve_box_qp(const BoxQp& qp, const SolveOptions& options = {});

KktReport check_kkt(const BoxQp& qp, const std::vector<double>& alpha,
                    const std::vector<double>& lambda_lower,
                    const std::vector<double>& lambda_upper);

double qp_objective(const BoxQp& qp, const std::vector<double>& alpha);

// Residual covariate->output total effect after an unconstrained single-output
// variance optimization; must vanish when s_zz is nonsingular and the
// treatment->output effect row is nonzero. Requires a solution with no active
// bounds. Throws PreconditionError when the certificate does not apply.
std::vector<double> offset_certificate(const SemModel& model, const QpSolution& solution,
                                       const std::string& output);

}  // namespace semopt
