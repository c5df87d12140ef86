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

#include "zpfp/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>
#include <vector>

#include "zpfp/errors.hpp"
#include "zpfp/hash.hpp"

namespace zpfp {

namespace {

constexpr double kGeluScale = 1.702;

double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace

Activation parse_activation(const std::string& name) {
    if (name == "tanh") return Activation::kTanh;
    if (name == "softplus") return Activation::kSoftplus;
    if (name == "gelu") return Activation::kGeluLike;
    throw DomainError("unknown activation '" + name + "' (expected tanh, softplus, or gelu)");
}

std::string activation_name(Activation f) {
    switch (f) {
        case Activation::kTanh: return "tanh";
        case Activation::kSoftplus: return "softplus";
        case Activation::kGeluLike: return "gelu";
    }
    throw DomainError("invalid activation value");
}

double act(Activation f, double z) {
    switch (f) {
        case Activation::kTanh: return std::tanh(z);
        case Activation::kSoftplus: return softplus(z);
        case Activation::kGeluLike: return z * sigmoid(kGeluScale * z);
    }
    throw DomainError("invalid activation value");
}

double act_d1(Activation f, double z) {
    switch (f) {
        case Activation::kTanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Activation::kSoftplus: return sigmoid(z);
        case Activation::kGeluLike: {
            const double s = sigmoid(kGeluScale * z);
            return s + z * kGeluScale * s * (1.0 - s);
        }
    }
    throw DomainError("invalid activation value");
}

double act_d2(Activation f, double z) {
    switch (f) {
        case Activation::kTanh: {
            const double t = std::tanh(z);
            return -2.0 * t * (1.0 - t * t);
        }
        case Activation::kSoftplus: {
            const double s = sigmoid(z);
            return s * (1.0 - s);
        }
        case Activation::kGeluLike: {
            const double s = sigmoid(kGeluScale * z);
            const double s1 = s * (1.0 - s);          // sigma'
            const double s2 = s1 * (1.0 - 2.0 * s);   // sigma''
            return 2.0 * kGeluScale * s1 + z * kGeluScale * kGeluScale * s2;
        }
    }
    throw DomainError("invalid activation value");
}

bool act_monotonic(Activation f) {
    return f != Activation::kGeluLike;
}

double act_inverse(Activation f, double y) {
    switch (f) {
        case Activation::kTanh:
            if (!(y > -1.0) || !(y < 1.0))
                throw DomainError("tanh inverse needs y in (-1, 1), got " + std::to_string(y));
            return std::atanh(y);
        case Activation::kSoftplus:
            if (!(y > 0.0))
                throw DomainError("softplus inverse needs y > 0, got " + std::to_string(y));
            // log(exp(y) - 1), written to stay accurate at both ends.
            return y < 1.0 ? std::log(std::expm1(y)) : y + std::log1p(-std::exp(-y));
        case Activation::kGeluLike:
            throw TheoryError("gelu-like activation is not monotonic and has no inverse");
    }
    throw DomainError("invalid activation value");
}

void ScalarModel::validate() const {
    if (!std::isfinite(w) || w == 0.0) throw DomainError("scalar model: w must be finite and nonzero");
    if (!std::isfinite(k)) throw DomainError("scalar model: k must be finite");
    if (!std::isfinite(sigma_x) || !(sigma_x > 0.0))
        throw DomainError("scalar model: sigma_x must be finite and positive");
}

void ScalarModel::require_curvature() const {
    if (c2() == 0.0)
        throw TheoryError("activation " + activation_name(f) + " has zero curvature at k=" +
                          std::to_string(k) + "; the quadratic surrogate is degenerate");
}

double fisher_normal_closed(double dmu, double dvar, double var) {
    if (!(var > 0.0)) throw DomainError("fisher_normal_closed: variance must be positive");
    if (!std::isfinite(dmu) || !std::isfinite(dvar))
        throw DomainError("fisher_normal_closed: derivatives must be finite");
    return dmu * dmu / var + dvar * dvar / (2.0 * var * var);
}

double fisher_z_closed(double w) {
    if (!std::isfinite(w) || w == 0.0) throw DomainError("fisher_z_closed: w must be finite and nonzero");
    return 2.0 / (w * w);
}

FisherDClosed fisher_d_closed(const ScalarModel& m) {
    m.validate();
    m.require_curvature();
    const double c1 = m.c1();
    const double c2 = m.c2();
    FisherDClosed out;
    out.coefficient =
        c1 * c1 / (2.0 * m.w * m.w * c2 * c2 * m.sigma_x * m.sigma_x) + 4.0;
    out.value = fisher_z_closed(m.w) * out.coefficient;
    return out;
}

FisherEstimate mc_fisher(const std::function<double(Rng&)>& sampler,
                         const std::function<double(double, double)>& log_density,
                         double theta, const McOptions& opt) {
    if (opt.samples < 1) throw DomainError("mc_fisher: need at least one sample");
    if (opt.threads < 1) throw DomainError("mc_fisher: thread count must be positive");
    if (!std::isfinite(theta)) throw DomainError("mc_fisher: theta must be finite");
    const double h =
        opt.fd_step > 0.0 ? opt.fd_step : 1e-4 * std::max(1.0, std::abs(theta));

    constexpr std::int64_t kChunk = 65536;
    const std::int64_t num_chunks = (opt.samples + kChunk - 1) / kChunk;

    struct Partial {
        double sum = 0.0;
        double sumsq = 0.0;
    };
    std::vector<Partial> partial(static_cast<std::size_t>(num_chunks));
    std::vector<std::exception_ptr> chunk_error(static_cast<std::size_t>(num_chunks));

    auto run_chunk = [&](std::int64_t c) {
        const std::int64_t count = std::min(kChunk, opt.samples - c * kChunk);
        Rng rng(derive_seed(opt.seed, "mc", static_cast<std::uint64_t>(c)));
        Partial p;
        for (std::int64_t i = 0; i < count; ++i) {
            const double x = sampler(rng);
            const double score =
                (log_density(x, theta + h) - log_density(x, theta - h)) / (2.0 * h);
            const double v = score * score;
            if (!std::isfinite(v)) {
                std::ostringstream msg;
                msg << "non-finite score at sample x=" << x << " (chunk " << c << ", index " << i
                    << ")";
                throw TheoryError(msg.str());
            }
            p.sum += v;
            p.sumsq += v * v;
        }
        partial[static_cast<std::size_t>(c)] = p;
    };

    const int threads = static_cast<int>(
        std::min<std::int64_t>(opt.threads, num_chunks));
    if (threads <= 1) {
        for (std::int64_t c = 0; c < num_chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        for (int tid = 0; tid < threads; ++tid) {
            pool.emplace_back([&, tid] {
                for (std::int64_t c = tid; c < num_chunks; c += threads) {
                    try {
                        run_chunk(c);
                    } catch (...) {
                        chunk_error[static_cast<std::size_t>(c)] = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (std::thread& t : pool) t.join();
        // Report the earliest failing chunk so the error matches what a
        // single-threaded run would have raised first.
        for (const std::exception_ptr& e : chunk_error)
            if (e) std::rethrow_exception(e);
    }

    // Combine in chunk order; this sum is what makes the estimate identical
    // across thread counts.
    double sum = 0.0, sumsq = 0.0;
    for (const Partial& p : partial) {
        sum += p.sum;
        sumsq += p.sumsq;
    }
    const double n = static_cast<double>(opt.samples);
    const double mean = sum / n;
    const double var = std::max(0.0, sumsq / n - mean * mean);

    FisherEstimate out;
    out.value = mean;
    out.std_error = std::sqrt(var / n);
    out.samples = opt.samples;
    out.fd_step = h;
    return out;
}

FisherEstimate fisher_y_mc(const ScalarModel& m, const McOptions& opt) {
    m.validate();
    if (!act_monotonic(m.f))
        throw TheoryError("activation " + activation_name(m.f) +
                          " is not monotonic; the output density has no closed pushforward form");

    const auto sampler = [m](Rng& rng) {
        const double x = m.sigma_x * rng.normal();
        return act(m.f, m.w * x + m.k);
    };
    // Pushforward density of y = f(z) with z ~ N(k, w^2 sigma_x^2):
    // log p_Y(y) = log p_Z(f^{-1}(y)) - log f'(f^{-1}(y)).
    const auto log_density = [m](double y, double w) {
        const double z = act_inverse(m.f, y);
        const double var = w * w * m.sigma_x * m.sigma_x;
        const double resid = z - m.k;
        const double log_pz =
            -0.5 * std::log(2.0 * std::numbers::pi * var) - resid * resid / (2.0 * var);
        return log_pz - std::log(std::abs(act_d1(m.f, z)));
    };
    McOptions local = opt;
    if (local.fd_step <= 0.0) local.fd_step = 1e-4 * std::max(1.0, std::abs(m.w));
    return mc_fisher(sampler, log_density, m.w, local);
}

RetentionReport verify_retention(const ScalarModel& m, const McOptions& opt) {
    m.validate();
    m.require_curvature();  // rejected before any sampling happens

    RetentionReport report;
    report.model = m;
    const FisherDClosed closed = fisher_d_closed(m);
    report.i_z = fisher_z_closed(m.w);
    report.coefficient = closed.coefficient;
    report.i_d_closed = closed.value;
    report.i_y = fisher_y_mc(m, opt);
    report.lower_bound = closed.coefficient * (report.i_y.value - 3.0 * report.i_y.std_error);
    report.inequality_holds = report.i_d_closed >= report.lower_bound;
    report.dpi_holds = report.i_y.value <= report.i_z * 1.02;
    report.mc_conclusive = 3.0 * report.i_y.std_error <= 0.1 * report.i_y.value;
    return report;
}

}  // namespace zpfp
