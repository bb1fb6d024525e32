#pragma once

#include <limits>
#include <string>
#include <vector>

#include "semopt/model.hpp"

namespace semopt {

struct CoefBoundSpec {
    std::string from, to;  // covariate -> treatment
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

struct InterceptBoundSpec {
    std::string treatment;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

struct TargetSpec {
    std::string output;
    double value = 0.0;        // as written; log-transformed later when linear
    bool linear_scale = false;
    double weight = 1.0;
};

struct WeightSpec {
    std::string output;
    double weight = 1.0;
};

// A parsed and semantically validated model document: the resolved model plus
// the optional bound/target/weight sections.
struct ModelFile {
    SemModel model;
    std::vector<CoefBoundSpec> coef_bounds;
    std::vector<InterceptBoundSpec> intercept_bounds;
    std::vector<TargetSpec> targets;
    std::vector<WeightSpec> weights;
};

// Throws ParseError for malformed documents (bad JSON, unknown keys, wrong
// types) and ModelError/CycleError/UnknownVariableError for semantic problems.
ModelFile parse_model_file(const std::string& text, const std::string& origin);
ModelFile load_model_file(const std::string& path);

// Full bound matrices for the coefficient block. Slots without an entry are
// fixed at their current value; with allow_unbounded they become infinite.
Bounds resolve_coef_bounds(const ModelFile& mf, bool allow_unbounded);

// Same for the treatment intercepts (n_x x 1 matrices).
Bounds resolve_intercept_bounds(const ModelFile& mf, bool allow_unbounded);

}  // namespace semopt
