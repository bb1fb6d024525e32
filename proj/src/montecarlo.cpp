#include "semopt/montecarlo.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <sstream>

namespace semopt {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
constexpr long long kChunk = 16384;  // fixed accumulation granularity

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

// SplitMix64 output at a counter position: a pure function of (seed, counter),
// so sample i sees the same draws regardless of work partitioning.
std::uint64_t stream_at(std::uint64_t seed, std::uint64_t counter) {
    return mix64(seed + (counter + 1) * kGamma);
}

double to_unit_open(std::uint64_t bits) {  // (0, 1]
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

double to_unit_half(std::uint64_t bits) {  // [0, 1)
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

Matrix sampling_factor(const Matrix& s, const char* name) {
    if (s.rows() == 0) return s;
    if (auto chol = cholesky_lower(s)) return *chol;
    const SymmetricEigen eig = symmetric_eigen(s);
    if (eig.values.front() < -1e-8) {
        std::ostringstream os;
        os << name << ": covariance eigenvalue " << eig.values.front() << " below -1e-8";
        throw CholeskyError(os.str());
    }
    Matrix f = eig.vectors;
    for (int k = 0; k < f.cols(); ++k) {
        const double scale = std::sqrt(std::max(eig.values[k], 0.0));
        for (int i = 0; i < f.rows(); ++i) f(i, k) *= scale;
    }
    return f;
}

// Sums are accumulated around a fixed shift (the first sample), which keeps
// the covariance free of catastrophic cancellation and exactly zero for
// degenerate noise-free models.
struct Accumulator {
    std::vector<double> sum;
    Matrix sum_sq;

    explicit Accumulator(int m) : sum(m, 0.0), sum_sq(m, m) {}

    void add(const std::vector<double>& v, const std::vector<double>& shift) {
        const int m = static_cast<int>(sum.size());
        for (int i = 0; i < m; ++i) {
            const double di = v[i] - shift[i];
            sum[i] += di;
            for (int j = 0; j <= i; ++j) sum_sq(i, j) += di * (v[j] - shift[j]);
        }
    }

    void merge(const Accumulator& other) {
        const int m = static_cast<int>(sum.size());
        for (int i = 0; i < m; ++i) {
            sum[i] += other.sum[i];
            for (int j = 0; j <= i; ++j) sum_sq(i, j) += other.sum_sq(i, j);
        }
    }
};

struct Generator {
    const SemModel* model;
    std::uint64_t seed;
    bool antithetic;
    int m;                 // total variables
    int uniforms;          // 64-bit draws per base sample, even
    Matrix fz, fx, fy;     // sampling factors

    std::vector<double> normals(long long index) const {
        const long long base = antithetic ? index / 2 : index;
        const double sign = (antithetic && (index & 1)) ? -1.0 : 1.0;
        std::vector<double> out(m);
        const std::uint64_t counter0 =
            static_cast<std::uint64_t>(base) * static_cast<std::uint64_t>(uniforms);
        for (int p = 0; 2 * p < m; ++p) {
            const double u1 = to_unit_open(stream_at(seed, counter0 + 2 * p));
            const double u2 = to_unit_half(stream_at(seed, counter0 + 2 * p + 1));
            const double radius = std::sqrt(-2.0 * std::log(u1));
            const double angle = 2.0 * 3.14159265358979323846 * u2;
            out[2 * p] = sign * radius * std::cos(angle);
            if (2 * p + 1 < m) out[2 * p + 1] = sign * radius * std::sin(angle);
        }
        return out;
    }

    // One draw of (z, x, y) concatenated, evaluated in topological order.
    std::vector<double> sample(long long index) const {
        const int nz = model->nz(), nx = model->nx(), ny = model->ny();
        const std::vector<double> n = normals(index);

        std::vector<double> eps_z(nz, 0.0), eps_x(nx, 0.0), eps_y(ny, 0.0);
        for (int i = 0; i < nz; ++i)
            for (int j = 0; j < nz; ++j) eps_z[i] += fz(i, j) * n[j];
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < nx; ++j) eps_x[i] += fx(i, j) * n[nz + j];
        for (int i = 0; i < ny; ++i)
            for (int j = 0; j < ny; ++j) eps_y[i] += fy(i, j) * n[nz + nx + j];

        std::vector<double> v(m);
        for (int i = 0; i < nz; ++i) {
            double s = model->mu_z[i] + eps_z[i];
            for (int j = 0; j < i; ++j) s += model->a_zz(i, j) * v[j];
            v[i] = s;
        }
        for (int i = 0; i < nx; ++i) {
            double s = model->mu_x[i] + eps_x[i];
            for (int j = 0; j < nz; ++j) s += model->a_xz(i, j) * v[j];
            for (int j = 0; j < i; ++j) s += model->a_xx(i, j) * v[nz + j];
            v[nz + i] = s;
        }
        for (int i = 0; i < ny; ++i) {
            double s = model->mu_y[i] + eps_y[i];
            for (int j = 0; j < nz; ++j) s += model->a_yz(i, j) * v[j];
            for (int j = 0; j < nx; ++j) s += model->a_yx(i, j) * v[nz + j];
            for (int j = 0; j < i; ++j) s += model->a_yy(i, j) * v[nz + nx + j];
            v[nz + nx + i] = s;
        }
        return v;
    }
};

BlockSampleMoments slice_block(const std::vector<double>& mean, const Matrix& cov, int offset,
                               int size, long long n) {
    BlockSampleMoments b;
    b.mean.resize(size);
    b.mean_se.resize(size);
    b.cov = Matrix(size, size);
    b.cov_se = Matrix(size, size);
    for (int i = 0; i < size; ++i) {
        b.mean[i] = mean[offset + i];
        for (int j = 0; j < size; ++j) b.cov(i, j) = cov(offset + i, offset + j);
    }
    for (int i = 0; i < size; ++i) {
        b.mean_se[i] = std::sqrt(std::max(b.cov(i, i), 0.0) / static_cast<double>(n));
        for (int j = 0; j < size; ++j) {
            const double v =
                (std::max(b.cov(i, i), 0.0) * std::max(b.cov(j, j), 0.0) + b.cov(i, j) * b.cov(i, j)) /
                static_cast<double>(n - 1);
            b.cov_se(i, j) = std::sqrt(std::max(v, 0.0));
        }
    }
    return b;
}

void push_entry(CompareReport* rep, const std::string& quantity, double analytic, double estimate,
                double se) {
    CompareEntry e;
    e.quantity = quantity;
    e.analytic = analytic;
    e.estimate = estimate;
    e.se = se;
    const double diff = std::abs(analytic - estimate);
    if (se > 0.0) {
        e.z = diff / se;
    } else {
        // Degenerate noise-free quantity: only rounding noise may separate
        // the two arithmetic routes.
        const bool equal = diff <= 1e-12 * (1.0 + std::abs(analytic));
        e.z = equal ? 0.0 : std::numeric_limits<double>::infinity();
    }
    e.pass = e.z <= rep->z_threshold;
    rep->max_z = std::max(rep->max_z, e.z);
    rep->pass = rep->pass && e.pass;
    rep->entries.push_back(std::move(e));
}

}  // namespace

SampleMoments simulate(const SemModel& model, const SimConfig& config, int n_threads) {
    if (config.n_samples < 2) {
        throw PreconditionError("simulate: n_samples must be at least 2");
    }
    if (n_threads < 1) throw PreconditionError("simulate: n_threads must be at least 1");
    {
        const std::vector<std::string> violations = validate(model);
        if (!violations.empty()) {
            std::ostringstream os;
            os << "simulate: model is invalid:";
            for (const auto& v : violations) os << "\n  " << v;
            throw ModelError(os.str());
        }
    }

    const int m = model.total();
    Generator gen;
    gen.model = &model;
    gen.seed = config.seed;
    gen.antithetic = config.antithetic;
    gen.m = m;
    gen.uniforms = 2 * ((m + 1) / 2);
    gen.fz = sampling_factor(model.s_zz, "s_zz");
    gen.fx = sampling_factor(model.s_xx, "s_xx");
    gen.fy = sampling_factor(model.s_yy, "s_yy");

    const long long n = config.n_samples;
    const long long n_chunks = (n + kChunk - 1) / kChunk;
    const std::vector<double> shift = gen.sample(0);

    auto run_chunk = [&](long long chunk) {
        Accumulator acc(m);
        const long long begin = chunk * kChunk;
        const long long end = std::min(begin + kChunk, n);
        for (long long i = begin; i < end; ++i) acc.add(gen.sample(i), shift);
        return acc;
    };

    Accumulator total(m);
    if (n_threads == 1) {
        for (long long chunk = 0; chunk < n_chunks; ++chunk) total.merge(run_chunk(chunk));
    } else {
        // Chunks are merged strictly in index order, so the result is
        // independent of the thread count.
        for (long long base = 0; base < n_chunks; base += n_threads) {
            std::vector<std::future<Accumulator>> futures;
            for (long long chunk = base; chunk < std::min(base + n_threads, n_chunks); ++chunk) {
                futures.push_back(std::async(std::launch::async, run_chunk, chunk));
            }
            for (auto& f : futures) total.merge(f.get());
        }
    }

    std::vector<double> shifted_mean(m), mean(m);
    for (int i = 0; i < m; ++i) {
        shifted_mean[i] = total.sum[i] / static_cast<double>(n);
        mean[i] = shift[i] + shifted_mean[i];
    }
    Matrix cov(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double v = (total.sum_sq(i, j) -
                              static_cast<double>(n) * shifted_mean[i] * shifted_mean[j]) /
                             static_cast<double>(n - 1);
            cov(i, j) = v;
            cov(j, i) = v;
        }
    }

    const int nz = model.nz(), nx = model.nx(), ny = model.ny();
    SampleMoments out;
    out.n_samples = n;
    out.z = slice_block(mean, cov, 0, nz, n);
    out.x = slice_block(mean, cov, nz, nx, n);
    out.y = slice_block(mean, cov, nz + nx, ny, n);
    out.cov_xz = Matrix(nx, nz);
    out.cov_xz_se = Matrix(nx, nz);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nz; ++j) {
            out.cov_xz(i, j) = cov(nz + i, j);
            const double v = (std::max(cov(nz + i, nz + i), 0.0) * std::max(cov(j, j), 0.0) +
                              cov(nz + i, j) * cov(nz + i, j)) /
                             static_cast<double>(n - 1);
            out.cov_xz_se(i, j) = std::sqrt(std::max(v, 0.0));
        }
    }
    return out;
}

CompareReport compare(const Moments& analytic, const SampleMoments& sampled, double z_threshold) {
    if (!(z_threshold > 0.0)) throw PreconditionError("compare: z threshold must be positive");

    CompareReport rep;
    rep.z_threshold = z_threshold;
    rep.pass = true;

    auto index_name = [](const char* base, int i) {
        return std::string(base) + "[" + std::to_string(i) + "]";
    };
    auto entry_name = [](const char* base, int i, int j) {
        return std::string(base) + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
    };

    auto compare_block = [&](const char* mean_name, const char* var_name,
                             const std::vector<double>& a_mean, const Matrix& a_var,
                             const BlockSampleMoments& s) {
        if (a_mean.size() != s.mean.size() || a_var.rows() != s.cov.rows()) {
            throw DimensionError("compare: analytic and sampled block shapes differ");
        }
        for (std::size_t i = 0; i < a_mean.size(); ++i) {
            push_entry(&rep, index_name(mean_name, static_cast<int>(i)), a_mean[i], s.mean[i],
                       s.mean_se[i]);
        }
        for (int i = 0; i < a_var.rows(); ++i) {
            for (int j = 0; j <= i; ++j) {
                push_entry(&rep, entry_name(var_name, i, j), a_var(i, j), s.cov(i, j),
                           s.cov_se(i, j));
            }
        }
    };

    compare_block("mean_z", "var_z", analytic.mean_z, analytic.var_z, sampled.z);
    compare_block("mean_x", "var_x", analytic.mean_x, analytic.var_x, sampled.x);
    compare_block("mean_y", "var_y", analytic.mean_y, analytic.var_y, sampled.y);

    if (analytic.cov_xz.rows() != sampled.cov_xz.rows() ||
        analytic.cov_xz.cols() != sampled.cov_xz.cols()) {
        throw DimensionError("compare: cov_xz shapes differ");
    }
    for (int i = 0; i < analytic.cov_xz.rows(); ++i) {
        for (int j = 0; j < analytic.cov_xz.cols(); ++j) {
            push_entry(&rep, entry_name("cov_xz", i, j), analytic.cov_xz(i, j), sampled.cov_xz(i, j),
                       sampled.cov_xz_se(i, j));
        }
    }
    return rep;
}

}  // namespace semopt
