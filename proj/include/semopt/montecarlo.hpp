#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semopt/effects.hpp"
#include "semopt/model.hpp"

namespace semopt {

struct SimConfig {
    long long n_samples = 0;
    std::uint64_t seed = 0;
    bool antithetic = false;
};

struct BlockSampleMoments {
    std::vector<double> mean, mean_se;
    Matrix cov, cov_se;
};

// Unbiased sample moments with standard errors. Variance standard errors use
// the normal-theory formula var(s_ij) = (s_ii s_jj + s_ij^2)/(n-1); the error
// terms are Gaussian by construction here.
struct SampleMoments {
    long long n_samples = 0;
    BlockSampleMoments z, x, y;
    Matrix cov_xz, cov_xz_se;
};

// Simulates the model with Gaussian errors: per-sample draws come from a
// counter-based SplitMix64 stream (Gaussian via Box-Muller), so the values
// for sample i depend only on (seed, i). Accumulation runs over fixed-size
// chunks merged in index order, which makes the result identical for any
// thread count. Throws CholeskyError when an error covariance has an
// eigenvalue below -1e-8.
SampleMoments simulate(const SemModel& model, const SimConfig& config, int n_threads = 1);

struct CompareEntry {
    std::string quantity;
    double analytic = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    double z = 0.0;
    bool pass = false;
};

struct CompareReport {
    std::vector<CompareEntry> entries;
    double z_threshold = 0.0;
    double max_z = 0.0;
    bool pass = false;
};

// Per-entry z-scores |analytic - estimate| / SE over all mean and covariance
// blocks; passes iff every score is within the threshold.
CompareReport compare(const Moments& analytic, const SampleMoments& sampled, double z_threshold);

}  // namespace semopt
