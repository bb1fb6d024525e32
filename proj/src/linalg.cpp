#include "semopt/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <string>

namespace semopt {

namespace {

std::size_t checked_index(int rows, int cols, int i, int j) {
    assert(i >= 0 && i < rows && j >= 0 && j < cols);
    (void)rows;
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) +
           static_cast<std::size_t>(j);
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": shapes " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()) + " differ");
    }
}

void require_square(const Matrix& a, const char* op) {
    if (a.rows() != a.cols()) {
        throw DimensionError(std::string(op) + ": matrix is " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + ", expected square");
    }
}

void require_strictly_lower(const Matrix& a, const char* op) {
    require_square(a, op);
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = i; j < a.cols(); ++j) {
            if (a(i, j) != 0.0) {
                throw PreconditionError(std::string(op) + ": entry (" + std::to_string(i) + "," +
                                        std::to_string(j) + ") must be exactly zero");
            }
        }
    }
}

}  // namespace

Matrix::Matrix(int rows, int cols)
    : rows_(rows), cols_(cols), entries_(static_cast<std::size_t>(rows) * cols, 0.0) {
    assert(rows >= 0 && cols >= 0);
}

Matrix::Matrix(int rows, int cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
        throw DimensionError("matrix: entry count " + std::to_string(entries_.size()) +
                             " does not match " + std::to_string(rows) + "x" +
                             std::to_string(cols));
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = static_cast<int>(rows.size());
    cols_ = rows_ == 0 ? 0 : static_cast<int>(rows.begin()->size());
    entries_.reserve(static_cast<std::size_t>(rows_) * cols_);
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != cols_) {
            throw DimensionError("matrix: ragged initializer rows");
        }
        entries_.insert(entries_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double& Matrix::operator()(int i, int j) { return entries_[checked_index(rows_, cols_, i, j)]; }

double Matrix::operator()(int i, int j) const {
    return entries_[checked_index(rows_, cols_, i, j)];
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::row(int i) const {
    Matrix r(1, cols_);
    for (int j = 0; j < cols_; ++j) r(0, j) = (*this)(i, j);
    return r;
}

Matrix Matrix::col(int j) const {
    Matrix c(rows_, 1);
    for (int i = 0; i < rows_; ++i) c(i, 0) = (*this)(i, j);
    return c;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : entries_) m = std::max(m, std::abs(v));
    return m;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    require_same_shape(*this, other, "add");
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += other.entries_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    require_same_shape(*this, other, "subtract");
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= other.entries_[k];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : entries_) v *= s;
    return *this;
}

bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a.entries() == b.entries();
}

Matrix operator+(Matrix a, const Matrix& b) {
    a += b;
    return a;
}

Matrix operator-(Matrix a, const Matrix& b) {
    a -= b;
    return a;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("multiply: inner dimensions " + std::to_string(a.cols()) + " and " +
                             std::to_string(b.rows()) + " differ");
    }
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

Matrix operator*(double s, Matrix a) {
    a *= s;
    return a;
}

std::vector<double> operator*(const Matrix& a, const std::vector<double>& v) {
    if (a.cols() != static_cast<int>(v.size())) {
        throw DimensionError("matrix-vector: dimensions " + std::to_string(a.cols()) + " and " +
                             std::to_string(v.size()) + " differ");
    }
    std::vector<double> out(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols(); ++j) s += a(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimensionError("vector add: sizes differ");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t k = 0; k < a.entries().size(); ++k)
        m = std::max(m, std::abs(a.entries()[k] - b.entries()[k]));
    return m;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

std::vector<double> vec(const Matrix& b) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(b.rows()) * b.cols());
    for (int j = 0; j < b.cols(); ++j)
        for (int i = 0; i < b.rows(); ++i) out.push_back(b(i, j));
    return out;
}

Matrix unvec(const std::vector<double>& v, int rows, int cols) {
    if (static_cast<int>(v.size()) != rows * cols) {
        throw DimensionError("unvec: vector length " + std::to_string(v.size()) +
                             " does not match " + std::to_string(rows) + "x" +
                             std::to_string(cols));
    }
    Matrix m(rows, cols);
    std::size_t k = 0;
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = v[k++];
    return m;
}

Matrix kron(const Matrix& b, const Matrix& c) {
    Matrix out(b.rows() * c.rows(), b.cols() * c.cols());
    for (int i = 0; i < b.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j) {
            const double bij = b(i, j);
            if (bij == 0.0) continue;
            for (int k = 0; k < c.rows(); ++k)
                for (int l = 0; l < c.cols(); ++l)
                    out(i * c.rows() + k, j * c.cols() + l) = bij * c(k, l);
        }
    return out;
}

Matrix inverse(const Matrix& b) {
    require_square(b, "inverse");
    const int n = b.rows();
    if (n == 0) return Matrix();

    Matrix a = b;
    Matrix x = Matrix::identity(n);
    std::vector<double> scale(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) scale[i] = std::max(scale[i], std::abs(b(i, j)));
    }

    constexpr double kPivotTol = 1e-12;  // relative to row max
    for (int k = 0; k < n; ++k) {
        int pivot_row = -1;
        double best = 0.0;
        for (int r = k; r < n; ++r) {
            if (scale[r] == 0.0) continue;
            const double rel = std::abs(a(r, k)) / scale[r];
            if (rel > best) {
                best = rel;
                pivot_row = r;
            }
        }
        if (pivot_row < 0 || best <= kPivotTol) {
            throw SingularMatrixError("inverse: no pivot above 1e-12 (relative) in column " +
                                      std::to_string(k));
        }
        if (pivot_row != k) {
            for (int j = 0; j < n; ++j) {
                std::swap(a(pivot_row, j), a(k, j));
                std::swap(x(pivot_row, j), x(k, j));
            }
            std::swap(scale[pivot_row], scale[k]);
        }
        const double inv_pivot = 1.0 / a(k, k);
        for (int j = 0; j < n; ++j) {
            a(k, j) *= inv_pivot;
            x(k, j) *= inv_pivot;
        }
        for (int r = 0; r < n; ++r) {
            if (r == k) continue;
            const double f = a(r, k);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                a(r, j) -= f * a(k, j);
                x(r, j) -= f * x(k, j);
            }
        }
    }
    return x;
}

Matrix unit_lower_inverse(const Matrix& a) {
    require_strictly_lower(a, "unit_lower_inverse");
    const int n = a.rows();
    Matrix m = Matrix::identity(n);
    // Column j of (I - a)^{-1} solves (I - a) m_j = e_j by forward substitution.
    for (int j = 0; j < n; ++j) {
        for (int i = j + 1; i < n; ++i) {
            double s = 0.0;
            for (int k = j; k < i; ++k) s += a(i, k) * m(k, j);
            m(i, j) = s;
        }
    }
    return m;
}

BlockLowerInverse block_lower_inverse(const Matrix& b11, const Matrix& b21, const Matrix& b22,
                                      const Matrix& b31, const Matrix& b32, const Matrix& b33) {
    require_square(b11, "block_lower_inverse: b11");
    require_square(b22, "block_lower_inverse: b22");
    require_square(b33, "block_lower_inverse: b33");
    if (b21.rows() != b22.rows() || b21.cols() != b11.cols() || b31.rows() != b33.rows() ||
        b31.cols() != b11.cols() || b32.rows() != b33.rows() || b32.cols() != b22.cols()) {
        throw DimensionError("block_lower_inverse: off-diagonal block shapes inconsistent");
    }

    BlockLowerInverse r;
    r.b11 = inverse(b11);
    r.b22 = inverse(b22);
    r.b33 = inverse(b33);
    r.b21 = -1.0 * (r.b22 * b21 * r.b11);
    r.b32 = -1.0 * (r.b33 * b32 * r.b22);
    r.b31 = r.b33 * b32 * r.b22 * b21 * r.b11 - r.b33 * b31 * r.b11;
    return r;
}

SymmetricEigen symmetric_eigen(const Matrix& s) {
    require_square(s, "symmetric_eigen");
    const int n = s.rows();
    Matrix a = s;
    // Work on the symmetrized matrix so tiny asymmetries cannot stall sweeps.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double m = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = m;
            a(j, i) = m;
        }
    Matrix v = Matrix::identity(n);

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        double diag = 0.0;
        for (int i = 0; i < n; ++i) {
            diag = std::max(diag, std::abs(a(i, i)));
            for (int j = i + 1; j < n; ++j) off = std::max(off, std::abs(a(i, j)));
        }
        if (off <= 1e-15 * std::max(diag, 1e-300)) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (int k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (int i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

std::optional<Matrix> cholesky_lower(const Matrix& s) {
    require_square(s, "cholesky_lower");
    const int n = s.rows();
    Matrix l(n, n);
    double max_diag = 0.0;
    for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(s(i, i)));
    const double tol = 1e-12 * std::max(max_diag, 1e-300);

    for (int j = 0; j < n; ++j) {
        double d = s(j, j);
        for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= tol) return std::nullopt;
        l(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double v = s(i, j);
            for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / l(j, j);
        }
    }
    return l;
}

}  // namespace semopt
