// Copyright 2026 the zpfp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "zpfp/errors.hpp"
#include "zpfp/fisher.hpp"
#include "zpfp/hash.hpp"
#include "zpfp/rng.hpp"

using namespace zpfp;

namespace {

// Finite-difference oracles for the activation derivatives.
double fd1(Activation f, double z) {
    const double h = 1e-5;
    return (act(f, z + h) - act(f, z - h)) / (2.0 * h);
}

double fd2(Activation f, double z) {
    const double h = 1e-4;
    return (act(f, z + h) - 2.0 * act(f, z) + act(f, z - h)) / (h * h);
}

double normal_logpdf(double x, double mean, double var) {
    return -0.5 * std::log(2.0 * std::numbers::pi * var) -
           (x - mean) * (x - mean) / (2.0 * var);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_SUITE_BEGIN("fisher");

TEST_CASE("activation names round trip") {
    for (Activation f : {Activation::kTanh, Activation::kSoftplus, Activation::kGeluLike})
        CHECK(parse_activation(activation_name(f)) == f);
    CHECK_THROWS_AS(parse_activation("relu"), DomainError);
}

TEST_CASE("activation derivatives match finite differences") {
    Rng rng(301);
    for (Activation f : {Activation::kTanh, Activation::kSoftplus, Activation::kGeluLike}) {
        for (int trial = 0; trial < 30; ++trial) {
            const double z = 6.0 * rng.uniform() - 3.0;
            CHECK(act_d1(f, z) == doctest::Approx(fd1(f, z)).epsilon(1e-7));
            CHECK(act_d2(f, z) == doctest::Approx(fd2(f, z)).epsilon(1e-4));
        }
    }
}

TEST_CASE("known activation values") {
    CHECK(act(Activation::kTanh, 0.0) == 0.0);
    CHECK(act_d1(Activation::kTanh, 0.0) == 1.0);
    CHECK(act_d2(Activation::kTanh, 0.0) == 0.0);  // odd function, no curvature at 0
    CHECK(act(Activation::kSoftplus, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(act_d1(Activation::kSoftplus, 0.0) == 0.5);
    CHECK(act_d2(Activation::kSoftplus, 0.0) == 0.25);
    CHECK(act(Activation::kGeluLike, 0.0) == 0.0);
    // Large positive input: gelu-like tends to the identity.
    CHECK(act(Activation::kGeluLike, 20.0) == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("gelu-like activation is visibly non-monotonic") {
    // f(-1) < f(-2) even though -1 > -2, so no global inverse exists.
    CHECK(act(Activation::kGeluLike, -1.0) < act(Activation::kGeluLike, -2.0));
    CHECK_FALSE(act_monotonic(Activation::kGeluLike));
    CHECK(act_monotonic(Activation::kTanh));
    CHECK(act_monotonic(Activation::kSoftplus));
    CHECK_THROWS_AS(act_inverse(Activation::kGeluLike, 0.5), TheoryError);
}

TEST_CASE("inverses round trip across their ranges") {
    Rng rng(302);
    for (int trial = 0; trial < 200; ++trial) {
        // tanh saturates to within an ulp of 1 past |z| of about 19, and the
        // inverse amplifies that rounding by 1 / (1 - y^2), so the round trip
        // is only meaningful at moderate arguments.
        const double zt = 10.0 * rng.uniform() - 5.0;
        CHECK(act_inverse(Activation::kTanh, act(Activation::kTanh, zt)) ==
              doctest::Approx(zt).epsilon(1e-9));
        const double zs = 30.0 * rng.uniform() - 15.0;
        const double ys = act(Activation::kSoftplus, zs);
        if (ys > 0.0)  // softplus underflows to 0 for very negative z
            CHECK(act_inverse(Activation::kSoftplus, ys) == doctest::Approx(zs).epsilon(1e-9));
    }
    // Stability at both ends of the softplus range.
    CHECK(act(Activation::kSoftplus, act_inverse(Activation::kSoftplus, 1e-8)) ==
          doctest::Approx(1e-8).epsilon(1e-10));
    CHECK(act_inverse(Activation::kSoftplus, 40.0) == doctest::Approx(40.0).epsilon(1e-12));
    CHECK_THROWS_AS(act_inverse(Activation::kTanh, 1.0), DomainError);
    CHECK_THROWS_AS(act_inverse(Activation::kTanh, -1.5), DomainError);
    CHECK_THROWS_AS(act_inverse(Activation::kSoftplus, 0.0), DomainError);
}

TEST_CASE("scalar model validation and curvature guard") {
    ScalarModel m;
    CHECK_NOTHROW(m.validate());
    m.w = 0.0;
    CHECK_THROWS_AS(m.validate(), DomainError);
    m.w = 1.0;
    m.sigma_x = 0.0;
    CHECK_THROWS_AS(m.validate(), DomainError);
    m.sigma_x = 1.0;
    m.k = 0.0;  // tanh has zero curvature at the origin
    CHECK_THROWS_AS(m.require_curvature(), TheoryError);
    m.k = 0.5;
    CHECK_NOTHROW(m.require_curvature());
}

TEST_CASE("gaussian fisher closed form reproduces the pre-activation value") {
    // z = w x + k is N(k, w^2 sigma_x^2): mean does not move with w, the
    // variance derivative is 2 w sigma_x^2, and the information is 2 / w^2
    // for every sigma_x.
    Rng rng(303);
    for (int trial = 0; trial < 20; ++trial) {
        const double w = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.2 + 3.0 * rng.uniform());
        const double sigma = 0.1 + 2.0 * rng.uniform();
        const double var = w * w * sigma * sigma;
        const double from_parts = fisher_normal_closed(0.0, 2.0 * w * sigma * sigma, var);
        const double direct = fisher_z_closed(w);
        CHECK(std::abs(from_parts - direct) <= 1e-12 * direct);
    }
    CHECK_THROWS_AS(fisher_normal_closed(1.0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(fisher_z_closed(0.0), DomainError);
}

TEST_CASE("closed-form output information equals the two-moment gaussian value") {
    // A Gaussian whose mean moves like c1 * w and whose variance is
    // c2^2 sigma_x^2 w^4 has exactly the surrogate information
    // (2 / w^2) * (c1^2 / (2 w^2 c2^2 sigma_x^2) + 4); deriving it through
    // fisher_normal_closed is an independent route to the same number.
    Rng rng(304);
    for (int trial = 0; trial < 20; ++trial) {
        ScalarModel m;
        m.f = rng.uniform() < 0.5 ? Activation::kTanh : Activation::kSoftplus;
        m.w = 0.3 + 2.0 * rng.uniform();
        m.k = 0.2 + 1.5 * rng.uniform();  // away from zero-curvature points
        m.sigma_x = 0.3 + 1.5 * rng.uniform();
        const double c1 = m.c1();
        const double c2 = m.c2();
        const double var = c2 * c2 * m.sigma_x * m.sigma_x * std::pow(m.w, 4);
        const double dvar = 4.0 * c2 * c2 * m.sigma_x * m.sigma_x * std::pow(m.w, 3);
        const double expected = fisher_normal_closed(c1, dvar, var);
        const FisherDClosed got = fisher_d_closed(m);
        CHECK(got.value == doctest::Approx(expected).epsilon(1e-12));
        CHECK(got.coefficient == doctest::Approx(expected / fisher_z_closed(m.w)).epsilon(1e-12));
    }
}

TEST_CASE("surrogate information at the unit reference point") {
    // With w = c1 = c2 = sigma_x = 1 the coefficient is 1/2 + 4 and the
    // closed value is 9; checked against a Monte Carlo run on the matching
    // two-moment Gaussian family.
    const double c1 = 1.0, c2 = 1.0, sigma_x = 1.0, w0 = 1.0;
    McOptions opt;
    opt.samples = 1'000'000;
    opt.seed = 17;
    const auto sampler = [&](Rng& rng) {
        const double mean = c1 * w0;
        const double sd = c2 * sigma_x * w0 * w0;
        return mean + sd * rng.normal();
    };
    const auto log_density = [&](double x, double w) {
        return normal_logpdf(x, c1 * w, c2 * c2 * sigma_x * sigma_x * std::pow(w, 4));
    };
    const FisherEstimate est = mc_fisher(sampler, log_density, w0, opt);
    CHECK(est.value == doctest::Approx(9.0).epsilon(0.02));
}

TEST_CASE("monte carlo fisher recovers the unit-information normal family") {
    McOptions opt;
    opt.samples = 1'000'000;
    opt.seed = 5;
    const double theta = 0.7;
    const auto sampler = [theta](Rng& rng) { return theta + rng.normal(); };
    const auto log_density = [](double x, double t) { return normal_logpdf(x, t, 1.0); };
    const FisherEstimate est = mc_fisher(sampler, log_density, theta, opt);
    CHECK(std::abs(est.value - 1.0) <= 3.0 * est.std_error);
    // The squared score has variance 2, so the standard error should sit
    // near sqrt(2 / n).
    const double expected_se = std::sqrt(2.0 / static_cast<double>(opt.samples));
    CHECK(est.std_error > 0.5 * expected_se);
    CHECK(est.std_error < 2.0 * expected_se);
    CHECK(est.samples == opt.samples);
    CHECK(est.fd_step == doctest::Approx(1e-4).epsilon(1e-12));  // 1e-4 * max(1, 0.7)
}

TEST_CASE("monte carlo fisher on the scaled pre-activation family") {
    // Observing z ~ N(k, w^2 sigma_x^2) directly: information 2 / w^2,
    // which is 0.888... at w = 1.5.
    const double w0 = 1.5, k = 0.4, sigma_x = 0.8;
    McOptions opt;
    opt.samples = 1'000'000;
    opt.seed = 6;
    const auto sampler = [&](Rng& rng) { return k + w0 * sigma_x * rng.normal(); };
    const auto log_density = [&](double z, double w) {
        return normal_logpdf(z, k, w * w * sigma_x * sigma_x);
    };
    const FisherEstimate est = mc_fisher(sampler, log_density, w0, opt);
    const double expected = fisher_z_closed(w0);
    CHECK(expected == doctest::Approx(2.0 / 2.25).epsilon(1e-15));
    CHECK(std::abs(est.value - expected) <= 3.0 * est.std_error);
    CHECK(est.value == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("monte carlo error shrinks like the square root of the sample count") {
    const auto log_density = [](double x, double t) { return normal_logpdf(x, t, 1.0); };
    auto run = [&](std::int64_t n, std::uint64_t seed) {
        McOptions opt;
        opt.samples = n;
        opt.seed = seed;
        const auto sampler = [](Rng& rng) { return 0.3 + rng.normal(); };
        return std::abs(mc_fisher(sampler, log_density, 0.3, opt).value - 1.0);
    };
    std::vector<double> err_small, err_large;
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        err_small.push_back(run(100'000, derive_seed(40, "small", trial)));
        err_large.push_back(run(400'000, derive_seed(40, "large", trial)));
    }
    // Quadrupling the sample count should halve the typical error; allow
    // slack for the randomness of a 10-trial median.
    CHECK(median(err_large) < 0.8 * median(err_small));
}

TEST_CASE("estimates are identical across thread counts") {
    const auto sampler = [](Rng& rng) { return 1.1 + rng.normal(); };
    const auto log_density = [](double x, double t) { return normal_logpdf(x, t, 1.0); };
    McOptions opt;
    opt.samples = 200'000;  // three full chunks plus a partial one
    opt.seed = 8;
    opt.threads = 1;
    const FisherEstimate single = mc_fisher(sampler, log_density, 1.1, opt);
    for (int threads : {2, 3, 8}) {
        opt.threads = threads;
        const FisherEstimate multi = mc_fisher(sampler, log_density, 1.1, opt);
        CHECK(multi.value == single.value);
        CHECK(multi.std_error == single.std_error);
    }
}

TEST_CASE("non-finite scores name the offending sample") {
    const auto sampler = [](Rng&) { return 5.0; };
    const auto log_density = [](double, double) { return std::nan(""); };
    McOptions opt;
    opt.samples = 10;
    CHECK_THROWS_WITH_AS(mc_fisher(sampler, log_density, 1.0, opt),
                         doctest::Contains("x=5"), TheoryError);
}

TEST_CASE("monte carlo option validation") {
    const auto sampler = [](Rng& rng) { return rng.normal(); };
    const auto log_density = [](double x, double t) { return normal_logpdf(x, t, 1.0); };
    McOptions opt;
    opt.samples = 0;
    CHECK_THROWS_AS(mc_fisher(sampler, log_density, 0.0, opt), DomainError);
    opt.samples = 10;
    opt.threads = 0;
    CHECK_THROWS_AS(mc_fisher(sampler, log_density, 0.0, opt), DomainError);
    opt.threads = 1;
    opt.fd_step = 0.01;
    const FisherEstimate est = mc_fisher(sampler, log_density, 0.0, opt);
    CHECK(est.fd_step == 0.01);  // explicit step is honored
}

TEST_CASE("near-affine softplus output carries almost all the information") {
    // Around k = 8 softplus is indistinguishable from the identity, so
    // observing y loses essentially nothing relative to observing z.
    ScalarModel m;
    m.f = Activation::kSoftplus;
    m.w = 1.0;
    m.k = 8.0;
    m.sigma_x = 0.5;
    McOptions opt;
    opt.samples = 200'000;
    opt.seed = 9;
    const FisherEstimate est = fisher_y_mc(m, opt);
    CHECK(est.value == doctest::Approx(fisher_z_closed(m.w)).epsilon(0.05));
}

TEST_CASE("tanh output information respects the processing bound") {
    ScalarModel m;
    m.f = Activation::kTanh;
    m.w = 1.0;
    m.k = 0.5;
    m.sigma_x = 0.5;
    McOptions opt;
    opt.samples = 1'000'000;
    opt.seed = 10;
    const FisherEstimate est = fisher_y_mc(m, opt);
    // A deterministic transform cannot create information about w.
    CHECK(est.value <= fisher_z_closed(m.w) * 1.02);
    CHECK(est.value > 0.0);
    CHECK(3.0 * est.std_error <= 0.1 * est.value);
}

TEST_CASE("output information refuses the non-monotonic activation") {
    ScalarModel m;
    m.f = Activation::kGeluLike;
    m.k = 0.5;
    McOptions opt;
    opt.samples = 100;
    CHECK_THROWS_AS(fisher_y_mc(m, opt), TheoryError);
}

TEST_CASE("retention bound verification passes for curved models") {
    McOptions opt;
    opt.samples = 400'000;
    opt.seed = 11;
    for (const ScalarModel m : {
             ScalarModel{1.0, 0.5, 0.5, Activation::kTanh},
             ScalarModel{1.3, 0.4, 0.8, Activation::kTanh},
             ScalarModel{0.8, 0.2, 1.0, Activation::kSoftplus},
             ScalarModel{1.5, 0.6, 0.7, Activation::kSoftplus},
         }) {
        const RetentionReport report = verify_retention(m, opt);
        CHECK(report.inequality_holds);
        CHECK(report.dpi_holds);
        CHECK(report.mc_conclusive);
        CHECK(report.i_d_closed ==
              doctest::Approx(report.i_z * report.coefficient).epsilon(1e-15));
        CHECK(report.coefficient > 4.0);  // the additive floor in the closed form
        CHECK(report.lower_bound <= report.i_d_closed);
    }
}

TEST_CASE("zero curvature is rejected before any sampling") {
    ScalarModel m;
    m.f = Activation::kTanh;
    m.k = 0.0;
    McOptions opt;
    opt.samples = -5;  // would raise DomainError if the sampler were reached
    CHECK_THROWS_AS(verify_retention(m, opt), TheoryError);
}

TEST_CASE("a small sample budget is flagged as inconclusive") {
    ScalarModel m;
    m.f = Activation::kTanh;
    m.w = 1.0;
    m.k = 0.5;
    m.sigma_x = 0.5;
    McOptions opt;
    opt.samples = 1'000;
    opt.seed = 12;
    const RetentionReport report = verify_retention(m, opt);
    CHECK_FALSE(report.mc_conclusive);
}

TEST_SUITE_END();
