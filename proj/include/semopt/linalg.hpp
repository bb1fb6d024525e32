#pragma once

#include <initializer_list>
#include <optional>
#include <vector>

#include "semopt/errors.hpp"

namespace semopt {

// Dense row-major matrix of doubles. Zero-sized dimensions are legal and all
// operations degrade to empty results for them.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols);  // zero-filled
    Matrix(int rows, int cols, std::vector<double> entries);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& operator()(int i, int j);
    double operator()(int i, int j) const;

    const std::vector<double>& entries() const { return entries_; }

    Matrix transposed() const;
    Matrix row(int i) const;  // 1 x cols copy
    Matrix col(int j) const;  // rows x 1 copy

    double max_abs() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> entries_;
};

bool operator==(const Matrix& a, const Matrix& b);

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, Matrix a);

// Matrix * column vector.
std::vector<double> operator*(const Matrix& a, const std::vector<double>& v);

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b);

double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs(const std::vector<double>& v);

// Columns of b stacked top-to-bottom, first column first.
std::vector<double> vec(const Matrix& b);

// Inverse of vec: rebuild a rows x cols matrix from its column stacking.
Matrix unvec(const std::vector<double>& v, int rows, int cols);

// Kronecker product: block (i,j) of the result is b(i,j) * c.
Matrix kron(const Matrix& b, const Matrix& c);

// General inverse via LU with scaled partial pivoting. Throws
// SingularMatrixError when no pivot exceeds 1e-12 relative to its row max.
Matrix inverse(const Matrix& b);

// (I - a)^{-1} for strictly lower triangular a, by forward substitution.
// Always exists; the result is unit lower triangular.
Matrix unit_lower_inverse(const Matrix& a);

// Nonzero blocks of the inverse of a 3x3 block lower triangular matrix
// [[b11, 0, 0], [b21, b22, 0], [b31, b32, b33]].
struct BlockLowerInverse {
    Matrix b11, b21, b22, b31, b32, b33;
};

BlockLowerInverse block_lower_inverse(const Matrix& b11, const Matrix& b21,
                                      const Matrix& b22, const Matrix& b31,
                                      const Matrix& b32, const Matrix& b33);

// Eigendecomposition of a symmetric matrix via cyclic Jacobi rotations.
// Eigenvalues ascending; vectors.col(k) is the unit eigenvector for values[k].
struct SymmetricEigen {
    std::vector<double> values;
    Matrix vectors;
};

SymmetricEigen symmetric_eigen(const Matrix& s);

// Lower Cholesky factor of a symmetric positive definite matrix, or nullopt
// when a pivot drops below 1e-12 relative to the largest diagonal entry.
std::optional<Matrix> cholesky_lower(const Matrix& s);

}  // namespace semopt
