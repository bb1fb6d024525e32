#pragma once

#include <string>
#include <vector>

#include "semopt/linalg.hpp"

namespace semopt {

enum class VariableRole { Covariate, Treatment, Output };

const char* role_name(VariableRole role);

// Linear SEM partitioned into covariates (z), treatments (x) and outputs (y):
//
//   [z]   [mu_z]   [a_zz   0    0 ] [z]   [eps_z]
//   [x] = [mu_x] + [a_xz  a_xx  0 ] [x] + [eps_x]
//   [y]   [mu_y]   [a_yz  a_yx a_yy] [y]  [eps_y]
//
// Within-block matrices are strictly lower triangular (acyclicity after
// topological ordering); error terms have block-diagonal covariance with
// symmetric PSD blocks s_zz, s_xx, s_yy and zero cross-block covariance.
// Immutable value type: operations elsewhere return modified copies.
struct SemModel {
    std::vector<std::string> names_z, names_x, names_y;
    Matrix a_zz, a_xz, a_xx, a_yz, a_yx, a_yy;
    std::vector<double> mu_z, mu_x, mu_y;
    Matrix s_zz, s_xx, s_yy;

    int nz() const { return static_cast<int>(names_z.size()); }
    int nx() const { return static_cast<int>(names_x.size()); }
    int ny() const { return static_cast<int>(names_y.size()); }
    int total() const { return nz() + nx() + ny(); }

    std::vector<std::string> all_names() const;  // z, x, y concatenated

    // Locates a variable; returns false when the name is unknown.
    bool find(const std::string& name, VariableRole* role, int* index) const;
};

bool operator==(const SemModel& a, const SemModel& b);

// Every invariant violation with a human-readable path to the offending
// entry; empty means the model is valid.
std::vector<std::string> validate(const SemModel& model);

// Elementwise bounds on an intervened block; entries may be +/-infinity.
struct Bounds {
    Matrix lower, upper;
};

// Raw input for partitioning: a weighted directed graph over named variables
// plus intercepts and a full error-covariance matrix in declaration order.
struct WeightedGraph {
    struct Edge {
        std::string from, to;
        double coef = 0.0;
    };

    std::vector<std::string> names;
    std::vector<double> intercepts;  // parallel to names
    Matrix error_cov;                // names.size() square, symmetric
    std::vector<Edge> edges;
};

// Partitions by the treatment set: z = strict ancestors of the treatments,
// x = treatments, y = everything else. Blocks are topologically ordered with
// ties broken by name, so within-block matrices come out strictly lower
// triangular. Throws CycleError, UnknownVariableError or ModelError.
SemModel partition_by_treatment(const WeightedGraph& graph,
                                const std::vector<std::string>& treatments);

// Same assembly but with caller-chosen roles (the model-file path). Edges
// from x or y into z, or from y into x, are rejected.
SemModel assemble_from_roles(const WeightedGraph& graph, const std::vector<VariableRole>& roles);

// Inverse of partitioning: emit one edge per structurally nonzero coefficient
// plus the block-diagonal error covariance.
WeightedGraph flatten(const SemModel& model);

}  // namespace semopt
