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
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "zpfp/clients.hpp"
#include "zpfp/lexical.hpp"

namespace zpfp {

/// Input/output embedding differences for one base query: row j holds the
/// perturbation j minus the base, for inputs (dx) and mean outputs (dy).
struct DifferencePairs {
    int base_index = 0;
    Eigen::MatrixXd dx;  // m x d
    Eigen::MatrixXd dy;  // m x d
};

/// Ridge regularization strength for the Jacobian fit.
struct RidgeConfig {
    double alpha = 0.001;

    void validate() const;
};

/// Componentwise differences (perturbed minus base) for both sides.
DifferencePairs difference_pairs(const Eigen::VectorXd& base_in,
                                 const std::vector<Eigen::VectorXd>& pert_in,
                                 const Eigen::VectorXd& base_out,
                                 const std::vector<Eigen::VectorXd>& pert_out,
                                 int base_index = 0);

/// Unique minimizer J of sum_j |dy_j - J dx_j|^2 + alpha |J|_F^2.
///
/// The primal form solves a d x d system, the dual an m x m system; they are
/// algebraically identical and ridge_jacobian picks the smaller one.
Eigen::MatrixXd ridge_jacobian_primal(const DifferencePairs& dp, const RidgeConfig& cfg);
Eigen::MatrixXd ridge_jacobian_dual(const DifferencePairs& dp, const RidgeConfig& cfg);
Eigen::MatrixXd ridge_jacobian(const DifferencePairs& dp, const RidgeConfig& cfg);

/// Entrywise mean of equally shaped matrices, summed in list order.
Eigen::MatrixXd aggregate(const std::vector<Eigen::MatrixXd>& jacobians);

/// Arithmetic mean of equally sized vectors, summed in list order.
Eigen::VectorXd mean_vectors(const std::vector<Eigen::VectorXd>& vectors);

/// Mean embedding of a batch of texts.
Eigen::VectorXd mean_embedding(const std::vector<std::string>& texts, const Embedder& embedder);

/// Provenance carried alongside the fingerprint matrix.
struct FingerprintMeta {
    int dim = 0;
    int n = 0;
    int m = 0;
    int t = 0;
    double alpha = 0.0;
    std::string embedder_id;
    std::string query_set_hash;
    std::int64_t created_unix = 0;
    int format_version = 1;
};

/// The model's signature: an aggregated d x d Jacobian estimate plus the
/// metadata needed to decide comparability.
struct Fingerprint {
    Eigen::MatrixXd jacobian;
    FingerprintMeta meta;
};

struct ExtractOptions {
    int t = 20;
    std::int64_t budget = 200;
    RidgeConfig ridge;
    /// Timestamp recorded in the fingerprint; -1 means wall clock now. Pin
    /// it for byte-identical output files.
    std::int64_t created_unix = -1;
};

/// Full pipeline: embed queries, collect t oracle responses per query, mean,
/// difference, ridge-fit one Jacobian per base query, aggregate.
///
/// Refuses before the first oracle call when total queries x t exceeds
/// opt.budget. A base query whose dx matrix is entirely zero (every
/// perturbation embeds identically to the base) is dropped with a note in
/// *warnings; if every base query is dropped the fingerprint is undefined.
Fingerprint extract_fingerprint(const ModelOracle& oracle, const Embedder& embedder,
                                const QuerySet& qs, const ExtractOptions& opt,
                                std::vector<std::string>* warnings = nullptr);

/// Binary fingerprint file: magic "ZPFP", one version byte (1), a 32-bit
/// little-endian length followed by that many bytes of UTF-8 key-value
/// metadata lines, then dim*dim IEEE-754 doubles, 8-byte little-endian,
/// row-major. Round trips are bit-exact.
void save_fingerprint(const Fingerprint& fp, const std::filesystem::path& path);
Fingerprint load_fingerprint(const std::filesystem::path& path);

}  // namespace zpfp
