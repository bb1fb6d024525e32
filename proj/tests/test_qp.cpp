#include <doctest.h>

#include <cmath>
#include <limits>

#include "semopt/effects.hpp"
#include "semopt/qp.hpp"
#include "test_support.hpp"

using namespace semopt;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Bounds unbounded_coef_bounds(const SemModel& m) {
    Bounds b;
    b.lower = Matrix(m.nx(), m.nz());
    b.upper = Matrix(m.nx(), m.nz());
    for (int i = 0; i < m.nx(); ++i)
        for (int j = 0; j < m.nz(); ++j) {
            b.lower(i, j) = -kInf;
            b.upper(i, j) = kInf;
        }
    return b;
}

// The journal fixture's first program: single output, unit weight, both
// coefficients bounded below by -0.2.
BoxQp journal_variance_qp() {
    const SemModel m = semtest::journal_model();
    Bounds b = unbounded_coef_bounds(m);
    b.lower(0, 0) = -0.2;
    b.lower(0, 1) = -0.2;
    return build_variance_qp(m, {"y"}, {1.0}, b);
}

BoxQp random_strictly_convex_qp(semtest::Rng& rng, int d) {
    BoxQp qp;
    qp.h = semtest::random_spd(rng, d, 0.5);
    qp.g.resize(d);
    qp.lower.resize(d);
    qp.upper.resize(d);
    for (int i = 0; i < d; ++i) {
        qp.g[i] = semtest::uniform(rng, -2, 2);
        qp.lower[i] = semtest::uniform(rng, -2, 0);
        qp.upper[i] = qp.lower[i] + semtest::uniform(rng, 0.5, 3.0);
    }
    qp.c = semtest::uniform(rng, -1, 1);
    return qp;
}

}  // namespace

TEST_SUITE_BEGIN("qp");

TEST_CASE("journal variance qp matrices are exact") {
    const BoxQp qp = journal_variance_qp();

    const Matrix h_expected{{0.1, 0.01}, {0.01, 0.101}};
    CHECK(max_abs_diff(qp.h, h_expected) <= 1e-12);
    CHECK(std::abs(qp.g[0] - 0.2 * 0.1) <= 1e-12);
    CHECK(std::abs(qp.g[1] - 0.2 * 1.01) <= 1e-12);

    // Constant carries the full variance: objective(0) is the pre-intervention
    // variance 0.301.
    CHECK(qp_objective(qp, {0.0, 0.0}) == doctest::Approx(0.301).epsilon(1e-12));

    CHECK(qp.lower == std::vector<double>{-0.2, -0.2});
    CHECK(qp.upper == std::vector<double>{kInf, kInf});
    CHECK(qp.labels == std::vector<std::string>{"coef:z1->x", "coef:z2->x"});
}

TEST_CASE("zero covariate noise gives a zero quadratic") {
    SemModel m = semtest::journal_model();
    m.s_zz = Matrix(2, 2);
    const BoxQp qp = build_variance_qp(m, {"y"}, {1.0}, unbounded_coef_bounds(m));
    CHECK(qp.h.max_abs() == 0.0);
    CHECK(max_abs(qp.g) == 0.0);
}

TEST_CASE("variance qp input validation") {
    const SemModel m = semtest::journal_model();
    const Bounds b = unbounded_coef_bounds(m);
    CHECK_THROWS_AS(build_variance_qp(m, {}, {}, b), PreconditionError);
    CHECK_THROWS_AS(build_variance_qp(m, {"y"}, {0.0}, b), PreconditionError);
    CHECK_THROWS_AS(build_variance_qp(m, {"y"}, {1.0, 2.0}, b), DimensionError);
    CHECK_THROWS_AS(build_variance_qp(m, {"x"}, {1.0}, b), UnknownVariableError);
    CHECK_THROWS_AS(build_variance_qp(m, {"nope"}, {1.0}, b), UnknownVariableError);

    Bounds crossed = unbounded_coef_bounds(m);
    crossed.lower(0, 0) = 1.0;
    crossed.upper(0, 0) = -1.0;
    CHECK_THROWS_AS(build_variance_qp(m, {"y"}, {1.0}, crossed), PreconditionError);
}

TEST_CASE("variance qp objective equals the weighted post-intervention variances") {
    semtest::Rng rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        const SemModel m = semtest::random_model(rng, {.ny = 3, .full_cov = true});
        const std::vector<std::string> outputs = m.names_y;
        std::vector<double> weights;
        for (std::size_t i = 0; i < outputs.size(); ++i)
            weights.push_back(semtest::uniform(rng, 0.25, 2.0));

        const BoxQp qp = build_variance_qp(m, outputs, weights, unbounded_coef_bounds(m));
        for (int probe = 0; probe < 20; ++probe) {
            std::vector<double> alpha(m.nx() * m.nz());
            for (double& a : alpha) a = semtest::uniform(rng, -1, 1);

            Intervention iv;
            iv.new_a_xz = unvec(alpha, m.nx(), m.nz());
            const Moments mo = moments(apply_intervention(m, iv));
            double expected = 0.0;
            for (std::size_t i = 0; i < outputs.size(); ++i)
                expected += weights[i] * mo.var_y(static_cast<int>(i), static_cast<int>(i));

            const double got = qp_objective(qp, alpha);
            CHECK(std::abs(got - expected) <= 1e-9 * (1.0 + std::abs(expected)));
        }
    }
}

TEST_CASE("journal mean qp matches the second program") {
    SemModel m = semtest::journal_model();
    Intervention iv;
    iv.new_a_xz = Matrix{{-0.08, -0.20}};
    m = apply_intervention(m, iv);

    Bounds b;
    b.lower = Matrix{{-kInf}};
    b.upper = Matrix{{std::log(0.5)}};
    const BoxQp qp = build_mean_qp(m, {{"y", std::log(200.0), 1.0}}, b);

    CHECK(qp.h == Matrix{{1.0}});
    // 2 ((0, 0.8) mu_z + log 10 - log 200)
    const double expected_g =
        2.0 * (0.8 * std::log(100.0) + std::log(10.0) - std::log(200.0));
    CHECK(qp.g[0] == doctest::Approx(expected_g).epsilon(1e-12));
    CHECK(qp.labels == std::vector<std::string>{"intercept:x"});

    const QpSolution sol = solve_box_qp(qp);
    CHECK(sol.alpha[0] == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(sol.kkt.satisfied);

    // Objective reports the true squared deviation at the bound.
    Intervention mu_iv;
    mu_iv.new_mu_x = sol.alpha;
    const double achieved = moments(apply_intervention(m, mu_iv)).mean_y[0];
    CHECK(sol.objective ==
          doctest::Approx((achieved - std::log(200.0)) * (achieved - std::log(200.0)))
              .epsilon(1e-9));
    CHECK(std::exp(achieved) == doctest::Approx(199.0536).epsilon(1e-6));
}

TEST_CASE("mean qp with an attainable target reaches zero objective") {
    const SemModel m = semtest::journal_model();
    const double current = moments(m).mean_y[0];

    Bounds b;
    b.lower = Matrix{{-kInf}};
    b.upper = Matrix{{kInf}};
    const BoxQp qp = build_mean_qp(m, {{"y", current, 1.0}}, b);
    const QpSolution sol = solve_box_qp(qp);
    CHECK(sol.kkt.satisfied);
    CHECK(std::abs(sol.objective) <= 1e-12);
    CHECK(sol.alpha[0] == doctest::Approx(m.mu_x[0]).epsilon(1e-9));
}

TEST_CASE("mean qp with proportional effect rows is a consistent singular program") {
    // Two outputs whose treatment->output rows are proportional: rank-1 H.
    SemModel m;
    m.names_z = {};
    m.names_x = {"x1", "x2"};
    m.names_y = {"y1", "y2"};
    m.a_zz = Matrix(0, 0);
    m.a_xz = Matrix(2, 0);
    m.a_xx = Matrix(2, 2);
    m.a_yz = Matrix(2, 0);
    m.a_yx = Matrix{{1, 2}, {2, 4}};
    m.a_yy = Matrix(2, 2);
    m.mu_z = {};
    m.mu_x = {0.4, -0.3};
    m.mu_y = {0.0, 0.5};
    m.s_zz = Matrix(0, 0);
    m.s_xx = Matrix::identity(2);
    m.s_yy = Matrix::identity(2);

    Bounds b;
    b.lower = Matrix{{-kInf}, {-kInf}};
    b.upper = Matrix{{kInf}, {kInf}};
    const std::vector<MeanTarget> targets = {{"y1", 1.0, 1.0}, {"y2", 2.5, 0.7}};
    const BoxQp qp = build_mean_qp(m, targets, b);

    const SymmetricEigen eig = symmetric_eigen(qp.h);
    CHECK(std::abs(eig.values[0]) <= 1e-12);  // rank deficient
    CHECK(eig.values[1] > 1.0);

    const QpSolution sol = solve_box_qp(qp);
    CHECK(sol.kkt.satisfied);

    // Objective at the solution matches the effects-module oracle, and no
    // probe beats it.
    semtest::Rng rng(55);
    auto true_objective = [&](const std::vector<double>& mu) {
        Intervention iv;
        iv.new_mu_x = mu;
        const Moments mo = moments(apply_intervention(m, iv));
        double obj = 0.0;
        obj += 1.0 * (mo.mean_y[0] - 1.0) * (mo.mean_y[0] - 1.0);
        obj += 0.7 * (mo.mean_y[1] - 2.5) * (mo.mean_y[1] - 2.5);
        return obj;
    };
    CHECK(sol.objective == doctest::Approx(true_objective(sol.alpha)).epsilon(1e-9));
    for (int probe = 0; probe < 20; ++probe) {
        std::vector<double> mu = {semtest::uniform(rng, -2, 2), semtest::uniform(rng, -2, 2)};
        const double probe_obj = true_objective(mu);
        CHECK(qp_objective(qp, mu) == doctest::Approx(probe_obj).epsilon(1e-9));
        CHECK(sol.objective <= probe_obj + 1e-9);
    }
}

TEST_CASE("journal variance qp solves to the reported optimum") {
    const BoxQp qp = journal_variance_qp();
    const QpSolution sol = solve_box_qp(qp);

    CHECK(std::abs(sol.alpha[0] - (-0.08)) <= 1e-9);
    CHECK(std::abs(sol.alpha[1] - (-0.20)) <= 1e-9);
    CHECK(sol.objective == doctest::Approx(0.264).epsilon(1e-12));
    CHECK(sol.kkt.satisfied);
    CHECK(sol.lambda_lower[1] > 0.0);   // second coordinate sits on its bound
    CHECK(sol.lambda_lower[0] == 0.0);  // first is free
}

TEST_CASE("solver matches exhaustive enumeration on random strictly convex QPs") {
    semtest::Rng rng(57);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = semtest::uniform_int(rng, 1, 3);
        const BoxQp qp = random_strictly_convex_qp(rng, d);

        const QpSolution sol = solve_box_qp(qp);
        const semtest::BruteForceResult brute = semtest::brute_force_box_qp(qp);
        REQUIRE(brute.found);

        CHECK(std::abs(sol.objective - brute.objective) <= 1e-8);
        for (int i = 0; i < d; ++i) CHECK(std::abs(sol.alpha[i] - brute.alpha[i]) <= 1e-7);
        CHECK(sol.kkt.satisfied);
    }
}

TEST_CASE("warm starts converge to the same optimum") {
    semtest::Rng rng(58);
    const BoxQp qp = random_strictly_convex_qp(rng, 3);
    const QpSolution cold = solve_box_qp(qp);

    SolveOptions opts;
    opts.warm_start = cold.alpha;
    const QpSolution warm = solve_box_qp(qp, opts);
    CHECK(std::abs(warm.objective - cold.objective) <= 1e-12);
    CHECK(warm.iterations <= cold.iterations);
}

TEST_CASE("widening bounds never increases the optimal objective") {
    semtest::Rng rng(59);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = semtest::uniform_int(rng, 1, 4);
        BoxQp qp = random_strictly_convex_qp(rng, d);
        const double tight = solve_box_qp(qp).objective;

        for (int i = 0; i < d; ++i) {
            qp.lower[i] -= semtest::uniform(rng, 0.0, 2.0);
            qp.upper[i] += semtest::uniform(rng, 0.0, 2.0);
        }
        const double wide = solve_box_qp(qp).objective;
        CHECK(wide <= tight + 1e-10);
    }
}

TEST_CASE("pinning a coordinate equals eliminating it") {
    semtest::Rng rng(60);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = semtest::uniform_int(rng, 2, 4);
        BoxQp qp = random_strictly_convex_qp(rng, d);
        const int pin = semtest::uniform_int(rng, 0, d - 1);
        const double v = semtest::uniform(rng, qp.lower[pin], qp.upper[pin]);
        qp.lower[pin] = v;
        qp.upper[pin] = v;

        const QpSolution full = solve_box_qp(qp);
        CHECK(full.alpha[pin] == v);

        // Reduced problem with the pinned coordinate folded into g and c.
        BoxQp reduced;
        reduced.h = Matrix(d - 1, d - 1);
        reduced.g.resize(d - 1);
        reduced.lower.resize(d - 1);
        reduced.upper.resize(d - 1);
        reduced.c = qp.c + qp.h(pin, pin) * v * v + qp.g[pin] * v;
        int a = 0;
        for (int i = 0; i < d; ++i) {
            if (i == pin) continue;
            reduced.g[a] = qp.g[i] + 2.0 * qp.h(i, pin) * v;
            reduced.lower[a] = qp.lower[i];
            reduced.upper[a] = qp.upper[i];
            int b = 0;
            for (int j = 0; j < d; ++j) {
                if (j == pin) continue;
                reduced.h(a, b) = qp.h(i, j);
                ++b;
            }
            ++a;
        }
        const QpSolution small = solve_box_qp(reduced);

        CHECK(std::abs(full.objective - small.objective) <= 1e-9);
        a = 0;
        for (int i = 0; i < d; ++i) {
            if (i == pin) continue;
            CHECK(std::abs(full.alpha[i] - small.alpha[a]) <= 1e-8);
            ++a;
        }
    }
}

TEST_CASE("unbounded programs raise with a descent ray") {
    BoxQp qp;
    qp.h = Matrix(1, 1);
    qp.g = {1.0};
    qp.lower = {-kInf};
    qp.upper = {kInf};
    try {
        solve_box_qp(qp);
        FAIL("expected UnboundedError");
    } catch (const UnboundedError& e) {
        REQUIRE(e.ray.size() == 1);
        CHECK(e.ray[0] < 0.0);  // objective decreases toward -infinity
    }

    // Singular 2-d Hessian with a linear term along the null direction.
    BoxQp flat;
    flat.h = Matrix{{1, 0}, {0, 0}};
    flat.g = {0.0, -1.0};
    flat.lower = {-1.0, -kInf};
    flat.upper = {1.0, kInf};
    CHECK_THROWS_AS(solve_box_qp(flat), UnboundedError);

    // The same ray blocked by a bound is solvable.
    flat.upper[1] = 5.0;
    const QpSolution sol = solve_box_qp(flat);
    CHECK(sol.alpha[1] == doctest::Approx(5.0));
    CHECK(sol.kkt.satisfied);
}

TEST_CASE("iteration cap raises MaxIterationsError") {
    semtest::Rng rng(61);
    const BoxQp qp = random_strictly_convex_qp(rng, 3);
    SolveOptions opts;
    opts.max_changes = 0;
    CHECK_THROWS_AS(solve_box_qp(qp, opts), MaxIterationsError);
}

TEST_CASE("box qp validation rejects malformed programs") {
    BoxQp quadratic;
    quadratic.h = Matrix{{1, 0.5}, {0, 1}};  // asymmetric
    quadratic.g = {0, 0};
    quadratic.lower = {-1, -1};
    quadratic.upper = {1, 1};
    CHECK_THROWS_AS(solve_box_qp(quadratic), PreconditionError);

    BoxQp indefinite;
    indefinite.h = Matrix{{-1}};
    indefinite.g = {0};
    indefinite.lower = {-1};
    indefinite.upper = {1};
    CHECK_THROWS_AS(solve_box_qp(indefinite), PreconditionError);

    BoxQp crossed;
    crossed.h = Matrix{{1}};
    crossed.g = {0};
    crossed.lower = {2};
    crossed.upper = {-2};
    CHECK_THROWS_AS(solve_box_qp(crossed), PreconditionError);
}

TEST_CASE("empty decision vector returns the constant") {
    BoxQp qp;
    qp.c = 3.25;
    const QpSolution sol = solve_box_qp(qp);
    CHECK(sol.objective == 3.25);
    CHECK(sol.kkt.satisfied);
}

TEST_CASE("check_kkt flags perturbed and blessed points correctly") {
    const BoxQp qp = journal_variance_qp();
    const QpSolution sol = solve_box_qp(qp);

    CHECK(check_kkt(qp, sol.alpha, sol.lambda_lower, sol.lambda_upper).satisfied);

    // Perturbing the free coordinate breaks stationarity.
    std::vector<double> bumped = sol.alpha;
    bumped[0] += 1e-3 * (1.0 + std::abs(bumped[0]));
    const KktReport broken = check_kkt(qp, bumped, sol.lambda_lower, sol.lambda_upper);
    CHECK(broken.stationarity_residual > 1e-8);
    CHECK_FALSE(broken.satisfied);

    // An interior optimum has exactly zero multipliers and complementarity.
    BoxQp interior;
    interior.h = Matrix{{1}};
    interior.g = {-1.0};
    interior.lower = {-10};
    interior.upper = {10};
    const QpSolution mid = solve_box_qp(interior);
    CHECK(mid.lambda_lower[0] == 0.0);
    CHECK(mid.lambda_upper[0] == 0.0);
    CHECK(mid.kkt.complementarity == 0.0);
    CHECK(mid.alpha[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("kkt soundness holds across random solves") {
    semtest::Rng rng(62);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = semtest::uniform_int(rng, 1, 4);
        const BoxQp qp = random_strictly_convex_qp(rng, d);
        const QpSolution sol = solve_box_qp(qp);
        CHECK(sol.kkt.satisfied);

        for (int i = 0; i < d; ++i) {
            if (sol.lambda_lower[i] != 0.0 || sol.lambda_upper[i] != 0.0) continue;
            std::vector<double> bumped = sol.alpha;
            bumped[i] += 1e-3 * (1.0 + std::abs(bumped[i]));
            CHECK_FALSE(check_kkt(qp, bumped, sol.lambda_lower, sol.lambda_upper).satisfied);
        }
    }
}

TEST_CASE("unconstrained journal optimum offsets the avoiding-path effect") {
    const SemModel m = semtest::journal_model();
    const BoxQp qp = build_variance_qp(m, {"y"}, {1.0}, unbounded_coef_bounds(m));
    const QpSolution sol = solve_box_qp(qp);

    CHECK(std::abs(sol.alpha[0] - 0.0) <= 1e-9);
    CHECK(std::abs(sol.alpha[1] - (-1.0)) <= 1e-9);
    CHECK(sol.objective == doctest::Approx(0.2).epsilon(1e-9));

    const std::vector<double> residual = offset_certificate(m, sol, "y");
    CHECK(max_abs(residual) <= 1e-8);
}

TEST_CASE("offset certificate vanishes on random single-output models") {
    semtest::Rng rng(63);
    int tested = 0;
    while (tested < 50) {
        SemModel m = semtest::random_model(
            rng, {.nz = semtest::uniform_int(rng, 1, 3), .ny = 1, .full_cov = true});
        if (total_effects(m).t_yx.row(0).max_abs() == 0.0) {
            m.a_yx(0, 0) = 1.0;  // keep the certificate applicable
        }
        const BoxQp qp = build_variance_qp(m, {m.names_y[0]}, {1.0}, unbounded_coef_bounds(m));
        const QpSolution sol = solve_box_qp(qp);
        const std::vector<double> residual = offset_certificate(m, sol, m.names_y[0]);
        CHECK(max_abs(residual) <= 1e-8);
        ++tested;
    }
}

TEST_CASE("offset certificate trivial case: nothing to offset") {
    SemModel m = semtest::journal_model();
    m.a_yz = Matrix(1, 2);  // no covariate -> output edges at all
    const BoxQp qp = build_variance_qp(m, {"y"}, {1.0}, unbounded_coef_bounds(m));
    const QpSolution sol = solve_box_qp(qp);
    CHECK(max_abs(sol.alpha) <= 1e-12);
    CHECK(max_abs(offset_certificate(m, sol, "y")) <= 1e-12);
}

TEST_CASE("offset certificate preconditions") {
    const SemModel m = semtest::journal_model();

    // Bounded solve: multipliers are active, certificate not applicable.
    const QpSolution bounded = solve_box_qp(journal_variance_qp());
    CHECK_THROWS_AS(offset_certificate(m, bounded, "y"), PreconditionError);

    const BoxQp qp = build_variance_qp(m, {"y"}, {1.0}, unbounded_coef_bounds(m));
    const QpSolution sol = solve_box_qp(qp);

    CHECK_THROWS_AS(offset_certificate(m, sol, "x"), UnknownVariableError);

    SemModel singular = m;
    singular.s_zz = Matrix{{0.1, 0.1}, {0.1, 0.1}};  // rank 1
    CHECK_THROWS_AS(offset_certificate(singular, sol, "y"), PreconditionError);

    SemModel no_effect = m;
    no_effect.a_yx = Matrix(1, 1);
    CHECK_THROWS_AS(offset_certificate(no_effect, sol, "y"), PreconditionError);
}

TEST_SUITE_END();
