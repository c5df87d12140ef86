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

#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "zpfp/rng.hpp"

namespace zpfp {

/// Scalar activations for the one-neuron analysis model.
enum class Activation { kTanh, kSoftplus, kGeluLike };

Activation parse_activation(const std::string& name);  // "tanh", "softplus", "gelu"
std::string activation_name(Activation f);

double act(Activation f, double z);
double act_d1(Activation f, double z);
double act_d2(Activation f, double z);

/// True for activations that are strictly increasing on all of R.
bool act_monotonic(Activation f);

/// Inverse of a monotonic activation. Throws DomainError outside the range,
/// TheoryError for the non-monotonic gelu-like activation.
double act_inverse(Activation f, double y);

/// One neuron y = f(w x + k) driven by x ~ N(0, sigma_x^2); the parameter of
/// interest is w.
struct ScalarModel {
    double w = 1.0;
    double k = 0.0;
    double sigma_x = 1.0;
    Activation f = Activation::kTanh;

    double c1() const { return act_d1(f, k); }  // local slope at the bias point
    double c2() const { return act_d2(f, k); }  // local curvature at the bias point

    void validate() const;           // w nonzero, sigma_x positive, all finite
    void require_curvature() const;  // TheoryError when c2() == 0
};

/// Fisher information of a scalar Gaussian family from the derivatives of its
/// mean and variance: dmu^2 / var + dvar^2 / (2 var^2).
double fisher_normal_closed(double dmu, double dvar, double var);

/// Fisher information about w carried by the pre-activation z = w x + k,
/// which is N(k, w^2 sigma_x^2): exactly 2 / w^2.
double fisher_z_closed(double w);

/// Closed form for the information retained by the quadratic surrogate of
/// the activation output: value = (2 / w^2) * coefficient with
/// coefficient = c1^2 / (2 w^2 c2^2 sigma_x^2) + 4.
struct FisherDClosed {
    double coefficient = 0.0;
    double value = 0.0;
};

FisherDClosed fisher_d_closed(const ScalarModel& m);

/// Monte Carlo Fisher estimate: sample mean of the squared central-difference
/// score, with the standard error of that mean.
struct FisherEstimate {
    double value = 0.0;
    double std_error = 0.0;  // "stderr" collides with the C macro
    std::int64_t samples = 0;
    double fd_step = 0.0;
};

struct McOptions {
    std::int64_t samples = 1'000'000;
    double fd_step = -1.0;  // <= 0 means 1e-4 * max(1, |theta|)
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Generic estimator: draws x from `sampler`, scores it with the central
/// difference of `log_density` in theta, and averages the squared scores.
/// Sampling is chunked with one derived seed per chunk and the partial sums
/// are combined in chunk order, so the result is independent of the thread
/// count. Throws TheoryError naming the sample if a score is non-finite.
FisherEstimate mc_fisher(const std::function<double(Rng&)>& sampler,
                         const std::function<double(double, double)>& log_density,
                         double theta, const McOptions& opt);

/// Monte Carlo information about w carried by the observed activation output
/// y = f(z). Uses the exact pushforward density, so f must be strictly
/// monotonic (TheoryError otherwise).
FisherEstimate fisher_y_mc(const ScalarModel& m, const McOptions& opt);

/// Numerical check of the information-retention bound for one model.
struct RetentionReport {
    ScalarModel model;
    double i_z = 0.0;             // 2 / w^2
    double coefficient = 0.0;     // c1^2 / (2 w^2 c2^2 sigma_x^2) + 4
    double i_d_closed = 0.0;      // i_z * coefficient
    FisherEstimate i_y;           // Monte Carlo estimate for the output
    double lower_bound = 0.0;     // coefficient * (i_y.value - 3 * i_y.std_error)
    bool inequality_holds = false;  // i_d_closed >= lower_bound
    bool dpi_holds = false;         // i_y.value <= i_z * 1.02
    bool mc_conclusive = false;     // 3 * i_y.std_error <= 0.1 * i_y.value
};

RetentionReport verify_retention(const ScalarModel& m, const McOptions& opt);

}  // namespace zpfp
