#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace semopt {

// Base class for every error thrown by the library.
class SemError : public std::runtime_error {
public:
    explicit SemError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input documents or command lines (CLI exit code 2).
class ParseError : public SemError {
    using SemError::SemError;
};

// Semantic problems: invalid structure, unknown names, broken preconditions
// (CLI exit code 3).
class ModelError : public SemError {
    using SemError::SemError;
};

class UnknownVariableError : public ModelError {
    using ModelError::ModelError;
};

class PreconditionError : public ModelError {
    using ModelError::ModelError;
};

class DimensionError : public ModelError {
    using ModelError::ModelError;
};

class CycleError : public ModelError {
public:
    CycleError(const std::string& what, std::vector<std::string> cycle_names)
        : ModelError(what), cycle(std::move(cycle_names)) {}

    std::vector<std::string> cycle;
};

// Error-covariance factorization failure (eigenvalue below -1e-8).
class CholeskyError : public ModelError {
    using ModelError::ModelError;
};

// Numeric failure inside a matrix routine.
class SingularMatrixError : public SemError {
    using SemError::SemError;
};

// Optimizer failures (CLI exit code 4).
class SolverError : public SemError {
    using SemError::SemError;
};

class UnboundedError : public SolverError {
public:
    UnboundedError(const std::string& what, std::vector<double> descent_ray)
        : SolverError(what), ray(std::move(descent_ray)) {}

    // Feasible direction along which the objective decreases without bound.
    std::vector<double> ray;
};

class MaxIterationsError : public SolverError {
    using SolverError::SolverError;
};

class PathExplosionError : public SolverError {
    using SolverError::SolverError;
};

}  // namespace semopt
