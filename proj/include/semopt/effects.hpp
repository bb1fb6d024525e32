#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semopt/model.hpp"

namespace semopt {

// Total-effect matrices of a partitioned model. t_yz splits into the
// component through the treatments and the component avoiding them;
// t_yz == t_yz_through + t_yz_avoid.
struct TotalEffects {
    Matrix t_zz, t_xx, t_yy;  // within-block, strictly lower triangular
    Matrix t_xz;              // covariates -> treatments
    Matrix t_yx;              // treatments -> outputs
    Matrix t_yz_through;      // covariates -> outputs, via at least one treatment
    Matrix t_yz_avoid;        // covariates -> outputs, via no treatment
    Matrix t_yz;              // sum of the two components
};

TotalEffects total_effects(const SemModel& model);

// Analytic means and covariance blocks implied by the model.
struct Moments {
    std::vector<double> mean_z, mean_x, mean_y;
    Matrix var_z, var_x, var_y;
    Matrix cov_xz;  // n_x x n_z
};

Moments moments(const SemModel& model);

// Replacement covariate->treatment coefficient block and/or replacement
// treatment intercepts. Error covariances never change.
struct Intervention {
    std::optional<Matrix> new_a_xz;
    std::optional<std::vector<double>> new_mu_x;
};

SemModel apply_intervention(const SemModel& model, const Intervention& iv);

// One directed path and its coefficient product. through_treatment is set
// when the path visits at least one treatment variable (endpoints included).
struct PathEffect {
    std::vector<std::string> path;
    double effect = 0.0;
    bool through_treatment = false;
};

// All directed paths from source to target over the nonzero coefficients,
// in depth-first order. Refuses graphs with more than 10^6 paths
// (PathExplosionError); a desk-scale oracle, not a production algorithm.
std::vector<PathEffect> enumerate_path_effects(const SemModel& model, const std::string& source,
                                               const std::string& target);

}  // namespace semopt
