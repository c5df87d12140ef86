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

#include "zpfp/compare.hpp"

#include <algorithm>
#include <cmath>

#include "zpfp/errors.hpp"

namespace zpfp {

namespace {

// Row-major traversal is the documented flattening order. The sums are
// order-sensitive in floating point, so both passes walk entries the same way.
template <typename Fn>
void for_each_entry(const Eigen::MatrixXd& m, Fn&& fn) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) fn(m(r, c));
}

bool is_constant(const Eigen::MatrixXd& m) {
    return m.minCoeff() == m.maxCoeff();
}

}  // namespace

double pearson(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("pearson: shapes differ (" + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()) + ")");
    if (a.size() == 0) throw DimensionError("pearson: empty input");
    if (!a.allFinite() || !b.allFinite()) throw DomainError("pearson: non-finite input");
    if (is_constant(a) || is_constant(b))
        throw ZeroVarianceError("pearson: constant input has no defined correlation");

    const double n = static_cast<double>(a.size());
    double sum_a = 0.0, sum_b = 0.0;
    for_each_entry(a, [&](double v) { sum_a += v; });
    for_each_entry(b, [&](double v) { sum_b += v; });
    const double mean_a = sum_a / n;
    const double mean_b = sum_b / n;

    // Second pass over centered values. cov picks up terms (a-ma)*(b-mb) in the
    // same order regardless of argument order, so pearson(a,b) == pearson(b,a)
    // bit for bit.
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            const double da = a(r, c) - mean_a;
            const double db = b(r, c) - mean_b;
            cov += da * db;
            var_a += da * da;
            var_b += db * db;
        }
    }
    if (var_a == 0.0 || var_b == 0.0)
        throw ZeroVarianceError("pearson: input variance vanished after centering");
    const double r = cov / std::sqrt(var_a * var_b);
    return std::clamp(r, -1.0, 1.0);
}

void DecisionConfig::validate() const {
    if (!std::isfinite(tau)) throw DomainError("decision threshold tau must be finite");
}

bool decide(double score, const DecisionConfig& cfg) {
    cfg.validate();
    if (!std::isfinite(score)) throw DomainError("similarity score must be finite");
    return score > cfg.tau;
}

void require_comparable(const Fingerprint& a, const Fingerprint& b) {
    if (a.meta.embedder_id != b.meta.embedder_id)
        throw ComparabilityError("fingerprints use different embedders: '" + a.meta.embedder_id +
                                 "' vs '" + b.meta.embedder_id + "'");
    if (a.meta.dim != b.meta.dim)
        throw ComparabilityError("fingerprints have different dimensions: " +
                                 std::to_string(a.meta.dim) + " vs " + std::to_string(b.meta.dim));
}

double fingerprint_similarity(const Fingerprint& a, const Fingerprint& b) {
    require_comparable(a, b);
    return pearson(a.jacobian, b.jacobian);
}

}  // namespace zpfp
