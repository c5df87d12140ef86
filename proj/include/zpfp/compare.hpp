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

#include <Eigen/Core>
#include <string>

#include "zpfp/fingerprint.hpp"

namespace zpfp {

/// Pearson correlation of two equally shaped matrices flattened row-major.
/// Exactly symmetric in its arguments; the result is clamped to [-1, 1].
/// A constant input (zero variance) makes the correlation undefined.
double pearson(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Decision threshold for flagging a suspect model as derived.
struct DecisionConfig {
    double tau = 0.0;

    void validate() const;  // tau must be finite
};

/// True iff the similarity score strictly exceeds tau.
bool decide(double score, const DecisionConfig& cfg);

/// Similarity score together with the identities of the two fingerprints.
struct SimilarityScore {
    double value = 0.0;
    std::string first;
    std::string second;
};

/// Throws ComparabilityError unless the two fingerprints come from the same
/// embedder and have matching dimensions.
void require_comparable(const Fingerprint& a, const Fingerprint& b);

/// require_comparable, then pearson over the two Jacobians.
double fingerprint_similarity(const Fingerprint& a, const Fingerprint& b);

}  // namespace zpfp
