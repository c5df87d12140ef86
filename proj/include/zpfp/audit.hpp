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
#include <string>
#include <vector>

#include "zpfp/clients.hpp"
#include "zpfp/fingerprint.hpp"
#include "zpfp/lexical.hpp"

namespace zpfp {

/// Similarity scores with a positive (same lineage) / negative (different
/// lineage) label per entry. Every metric below needs at least one of each.
struct LabeledScores {
    std::vector<double> scores;
    std::vector<int> labels;  // 1 = same lineage, 0 = different lineage

    void add(double score, bool positive);
    std::size_t positives() const;
    std::size_t negatives() const;
    void validate() const;
};

/// Area under the ROC curve. Ties contribute half, exactly as in the
/// Mann-Whitney pair count; the sweep keeps integer arithmetic until the
/// final division so it matches the brute-force pair count bit for bit.
double auc(const LabeledScores& ls);

/// Partial AUC over the false-positive range [0, fpr_max], normalized by
/// fpr_max so chance level is fpr_max/2. Trapezoids over the tie-grouped
/// ROC, linearly interpolating at the cut. pauc(ls, 1.0) equals auc(ls).
double pauc(const LabeledScores& ls, double fpr_max = 0.05);

/// Largest true-positive rate achievable with empirical FPR <= fpr.
double tpr_at_fpr(const LabeledScores& ls, double fpr = 0.01);

/// |mean+ - mean-| / pooled standard deviation with the unbiased pooled
/// variance. Needs at least two scores per class; throws ZeroVarianceError
/// when the pooled variance vanishes.
double mahalanobis_sep(const LabeledScores& ls);

/// A family of linear oracles: for each lineage, one random base map and
/// num_derivatives perturbed copies base + eps * P with fresh random P of the
/// same entry scale. Models are stored lineage by lineage, base first.
struct SynthLineages {
    std::vector<LinearStubModel> models;
    std::vector<int> lineage;        // lineage index per model
    std::vector<std::string> names;  // e.g. "L0-base", "L0-der1"
};

SynthLineages synth_lineages(int num_lineages, int num_derivatives, int dim, double eps,
                             std::uint64_t seed);

/// Query set with deterministic synthetic texts, all distinct, for driving
/// stub pipelines where the actual wording is irrelevant.
QuerySet synthetic_query_set(int n, int m, std::uint64_t seed);

/// Metric configuration snapshot carried into reports.
struct AuditConfig {
    double fpr_max = 0.05;  // partial-AUC range
    double fpr = 0.01;      // operating point for the TPR metric
    void validate() const;
};

/// Metrics plus the full pairwise similarity matrix for a set of
/// fingerprints.
struct AuditReport {
    double auc = 0.0;
    double pauc = 0.0;
    double tpr_at_1pct_fpr = 0.0;
    double md = 0.0;
    Eigen::MatrixXd pairwise;  // symmetric, unit diagonal
    std::vector<std::string> names;
    std::vector<int> lineage;
    AuditConfig config;
};

/// Scores all pairs i < j with pearson over the Jacobians, labels them by
/// lineage equality, and computes the four separability metrics. All
/// fingerprints must share one embedder (ComparabilityError otherwise).
AuditReport audit_fingerprints(const std::vector<Fingerprint>& fps,
                               const std::vector<int>& lineage,
                               const std::vector<std::string>& names,
                               const AuditConfig& cfg = {});

std::string report_text(const AuditReport& report);
std::string report_json(const AuditReport& report);

/// End-to-end synthetic benchmark: build lineages, fingerprint every model
/// with a shared stub embedder and query set, and audit the results.
struct BenchConfig {
    int num_lineages = 4;
    int num_derivatives = 3;
    int dim = 16;          // oracle and embedder dimension
    double eps = 0.1;      // derivative perturbation scale
    int n = 2;             // base queries
    int m = 8;             // perturbations per base query
    int t = 20;            // repeats per query
    double alpha = 0.001;  // ridge strength
    double noise_sigma = 0.0;  // response noise applied to every model
    std::uint64_t seed = 0;
    AuditConfig metrics;
    void validate() const;
};

AuditReport run_synth_benchmark(const BenchConfig& cfg);

/// For each sigma, fingerprint the oracle clean and wrapped in Gaussian
/// response noise of that scale, using the identical query set, embedder,
/// and options, and report the similarity of the two fingerprints.
std::vector<double> attack_robustness(const ModelOracle& oracle, const Embedder& embedder,
                                      const QuerySet& qs, const std::vector<double>& sigmas,
                                      const ExtractOptions& opt, std::uint64_t noise_seed);

}  // namespace zpfp
