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

#include "zpfp/audit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "zpfp/compare.hpp"
#include "zpfp/errors.hpp"
#include "zpfp/hash.hpp"
#include "zpfp/rng.hpp"

namespace zpfp {

void LabeledScores::add(double score, bool positive) {
    scores.push_back(score);
    labels.push_back(positive ? 1 : 0);
}

std::size_t LabeledScores::positives() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

std::size_t LabeledScores::negatives() const {
    return labels.size() - positives();
}

void LabeledScores::validate() const {
    if (scores.size() != labels.size())
        throw DomainError("labeled scores: size mismatch between scores and labels");
    for (int l : labels)
        if (l != 0 && l != 1) throw DomainError("labeled scores: labels must be 0 or 1");
    for (double s : scores)
        if (!std::isfinite(s)) throw DomainError("labeled scores: non-finite score");
    if (positives() == 0 || negatives() == 0)
        throw DomainError("labeled scores: need at least one score in each class");
}

namespace {

// Cumulative (false positive, true positive) counts after each tie group,
// scanning scores from highest to lowest. Starts at (0, 0). Scores tie only
// when they are exactly equal.
struct TieGroup {
    std::uint64_t dp = 0;  // positives in the group
    std::uint64_t dn = 0;  // negatives in the group
};

std::vector<TieGroup> tie_groups(const LabeledScores& ls) {
    std::vector<std::size_t> order(ls.scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ls.scores[a] > ls.scores[b]; });
    std::vector<TieGroup> groups;
    for (std::size_t pos = 0; pos < order.size();) {
        TieGroup g;
        const double s = ls.scores[order[pos]];
        while (pos < order.size() && ls.scores[order[pos]] == s) {
            if (ls.labels[order[pos]]) ++g.dp; else ++g.dn;
            ++pos;
        }
        groups.push_back(g);
    }
    return groups;
}

}  // namespace

double auc(const LabeledScores& ls) {
    ls.validate();
    const std::uint64_t p = ls.positives();
    const std::uint64_t n = ls.negatives();
    // Twice the Mann-Whitney count: a positive above a negative scores 2, a
    // tie scores 1. Integer arithmetic throughout, one division at the end.
    std::uint64_t num2 = 0;
    std::uint64_t tp_before = 0;
    for (const TieGroup& g : tie_groups(ls)) {
        num2 += 2 * g.dn * tp_before + g.dp * g.dn;
        tp_before += g.dp;
    }
    return static_cast<double>(num2) / (2.0 * static_cast<double>(p) * static_cast<double>(n));
}

double pauc(const LabeledScores& ls, double fpr_max) {
    ls.validate();
    if (!(fpr_max > 0.0) || fpr_max > 1.0)
        throw DomainError("pauc: fpr_max must lie in (0, 1]");
    const double p = static_cast<double>(ls.positives());
    const double n = static_cast<double>(ls.negatives());
    double area = 0.0;
    double f0 = 0.0, t0 = 0.0;
    std::uint64_t fp_cum = 0, tp_cum = 0;
    for (const TieGroup& g : tie_groups(ls)) {
        fp_cum += g.dn;
        tp_cum += g.dp;
        const double f1 = static_cast<double>(fp_cum) / n;
        const double t1 = static_cast<double>(tp_cum) / p;
        if (f1 <= fpr_max) {
            area += (f1 - f0) * (t0 + t1) / 2.0;
        } else if (f0 < fpr_max) {
            // The cut lands inside this segment; interpolate the ROC height.
            const double t_cut = t0 + (t1 - t0) * (fpr_max - f0) / (f1 - f0);
            area += (fpr_max - f0) * (t0 + t_cut) / 2.0;
        }
        f0 = f1;
        t0 = t1;
        if (f0 >= fpr_max) break;
    }
    return area / fpr_max;
}

double tpr_at_fpr(const LabeledScores& ls, double fpr) {
    ls.validate();
    if (!(fpr >= 0.0) || fpr > 1.0) throw DomainError("tpr_at_fpr: fpr must lie in [0, 1]");
    const double p = static_cast<double>(ls.positives());
    const double n = static_cast<double>(ls.negatives());
    // Integer false-positive counts are at least 1 apart, so the epsilon only
    // absorbs rounding in fpr * n, never admits an extra false positive.
    const double fp_bound = fpr * n + 1e-9;
    double best = 0.0;
    std::uint64_t fp_cum = 0, tp_cum = 0;
    for (const TieGroup& g : tie_groups(ls)) {
        fp_cum += g.dn;
        tp_cum += g.dp;
        if (static_cast<double>(fp_cum) <= fp_bound)
            best = std::max(best, static_cast<double>(tp_cum) / p);
    }
    return best;
}

double mahalanobis_sep(const LabeledScores& ls) {
    ls.validate();
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < ls.scores.size(); ++i)
        (ls.labels[i] ? pos : neg).push_back(ls.scores[i]);
    if (pos.size() < 2 || neg.size() < 2)
        throw DomainError("mahalanobis_sep: need at least two scores per class");
    auto mean = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    auto ssq = [](const std::vector<double>& v, double m) {
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return s;
    };
    const double mp = mean(pos), mn = mean(neg);
    const double pooled_var = (ssq(pos, mp) + ssq(neg, mn)) /
                              static_cast<double>(pos.size() + neg.size() - 2);
    if (pooled_var == 0.0)
        throw ZeroVarianceError("mahalanobis_sep: pooled variance is zero");
    return std::abs(mp - mn) / std::sqrt(pooled_var);
}

SynthLineages synth_lineages(int num_lineages, int num_derivatives, int dim, double eps,
                             std::uint64_t seed) {
    if (num_lineages < 2) throw DomainError("synth_lineages: need at least two lineages");
    if (num_derivatives < 1) throw DomainError("synth_lineages: need at least one derivative");
    if (dim < 1) throw DomainError("synth_lineages: dimension must be positive");
    if (!(eps >= 0.0)) throw DomainError("synth_lineages: eps must be non-negative");

    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    auto random_map = [&](std::uint64_t s) {
        Rng rng(s);
        Eigen::MatrixXd m(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) m(r, c) = rng.normal() * scale;
        return m;
    };

    SynthLineages out;
    const Eigen::VectorXd zero_b = Eigen::VectorXd::Zero(dim);
    for (int l = 0; l < num_lineages; ++l) {
        const Eigen::MatrixXd base =
            random_map(derive_seed(seed, "lineage", static_cast<std::uint64_t>(l)));
        out.models.emplace_back(base, zero_b, 0.0, 0);
        out.lineage.push_back(l);
        out.names.push_back("L" + std::to_string(l) + "-base");
        for (int d = 0; d < num_derivatives; ++d) {
            const Eigen::MatrixXd bump = random_map(derive_seed(
                seed, "derivative", static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(d)));
            out.models.emplace_back(base + eps * bump, zero_b, 0.0, 0);
            out.lineage.push_back(l);
            out.names.push_back("L" + std::to_string(l) + "-der" + std::to_string(d + 1));
        }
    }
    return out;
}

QuerySet synthetic_query_set(int n, int m, std::uint64_t seed) {
    if (n < 1 || m < 1) throw DomainError("synthetic_query_set: n and m must be positive");
    QuerySet qs;
    qs.spec.n = n;
    qs.spec.m = m;
    qs.spec.seed = seed;
    const std::string tag = hex64(seed);
    for (int i = 0; i < n; ++i) {
        qs.base.push_back("synthetic base " + tag + " " + std::to_string(i));
        std::vector<std::string> row;
        for (int j = 0; j < m; ++j)
            row.push_back("synthetic perturbation " + tag + " " + std::to_string(i) + " " +
                          std::to_string(j));
        qs.perturbed.push_back(std::move(row));
    }
    qs.content_hash = query_content_hash(qs.base, qs.perturbed);
    return qs;
}

void AuditConfig::validate() const {
    if (!(fpr_max > 0.0) || fpr_max > 1.0) throw DomainError("audit config: fpr_max in (0, 1]");
    if (!(fpr >= 0.0) || fpr > 1.0) throw DomainError("audit config: fpr in [0, 1]");
}

AuditReport audit_fingerprints(const std::vector<Fingerprint>& fps,
                               const std::vector<int>& lineage,
                               const std::vector<std::string>& names,
                               const AuditConfig& cfg) {
    cfg.validate();
    if (fps.size() < 2) throw DomainError("audit: need at least two fingerprints");
    if (lineage.size() != fps.size() || names.size() != fps.size())
        throw DomainError("audit: lineage and name lists must match the fingerprint count");
    for (std::size_t i = 1; i < fps.size(); ++i) require_comparable(fps[0], fps[i]);

    const Eigen::Index k = static_cast<Eigen::Index>(fps.size());
    AuditReport report;
    report.names = names;
    report.lineage = lineage;
    report.config = cfg;
    report.pairwise = Eigen::MatrixXd::Identity(k, k);

    LabeledScores ls;
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i + 1; j < k; ++j) {
            const double s = pearson(fps[i].jacobian, fps[j].jacobian);
            report.pairwise(i, j) = s;
            report.pairwise(j, i) = s;
            ls.add(s, lineage[i] == lineage[j]);
        }
    }
    report.auc = auc(ls);
    report.pauc = pauc(ls, cfg.fpr_max);
    report.tpr_at_1pct_fpr = tpr_at_fpr(ls, cfg.fpr);
    report.md = mahalanobis_sep(ls);
    return report;
}

std::string report_text(const AuditReport& report) {
    std::ostringstream out;
    out << "fingerprints: " << report.names.size() << "\n";
    out << std::fixed << std::setprecision(6);
    out << "auc: " << report.auc << "\n";
    out << "pauc(fpr<=" << report.config.fpr_max << "): " << report.pauc << "\n";
    out << "tpr(fpr<=" << report.config.fpr << "): " << report.tpr_at_1pct_fpr << "\n";
    out << "separation: " << report.md << "\n";
    out << "pairwise similarity:\n";
    for (std::size_t i = 0; i < report.names.size(); ++i) {
        out << "  " << report.names[i] << " (lineage " << report.lineage[i] << "):";
        out << std::setprecision(4);
        for (Eigen::Index j = 0; j < report.pairwise.cols(); ++j)
            out << " " << report.pairwise(static_cast<Eigen::Index>(i), j);
        out << std::setprecision(6) << "\n";
    }
    return out.str();
}

std::string report_json(const AuditReport& report) {
    nlohmann::ordered_json j;
    j["auc"] = report.auc;
    j["pauc"] = report.pauc;
    j["tpr_at_1pct_fpr"] = report.tpr_at_1pct_fpr;
    j["md"] = report.md;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < report.pairwise.rows(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index c = 0; c < report.pairwise.cols(); ++c)
            row.push_back(report.pairwise(r, c));
        rows.push_back(std::move(row));
    }
    j["pairwise"] = std::move(rows);
    j["names"] = report.names;
    j["lineage"] = report.lineage;
    j["config"] = {{"fpr_max", report.config.fpr_max},
                   {"fpr", report.config.fpr},
                   {"fingerprints", report.names.size()}};
    return j.dump(2) + "\n";
}

void BenchConfig::validate() const {
    if (num_lineages < 2) throw DomainError("benchmark: need at least two lineages");
    if (num_derivatives < 1) throw DomainError("benchmark: need at least one derivative");
    if (dim < 1) throw DomainError("benchmark: dimension must be positive");
    if (!(eps >= 0.0)) throw DomainError("benchmark: eps must be non-negative");
    if (n < 1 || m < 1 || t < 1) throw DomainError("benchmark: n, m, t must be positive");
    if (!(alpha > 0.0)) throw DomainError("benchmark: alpha must be positive");
    if (!(noise_sigma >= 0.0)) throw DomainError("benchmark: noise sigma must be non-negative");
    metrics.validate();
}

AuditReport run_synth_benchmark(const BenchConfig& cfg) {
    cfg.validate();
    const SynthLineages sl =
        synth_lineages(cfg.num_lineages, cfg.num_derivatives, cfg.dim, cfg.eps, cfg.seed);
    const QuerySet qs = synthetic_query_set(cfg.n, cfg.m, derive_seed(cfg.seed, "bench-queries"));
    const StubEmbedder embedder(derive_seed(cfg.seed, "bench-embedder"), cfg.dim);

    ExtractOptions opt;
    opt.t = cfg.t;
    opt.budget = static_cast<std::int64_t>(qs.total()) * cfg.t;
    opt.ridge.alpha = cfg.alpha;
    opt.created_unix = 0;

    std::vector<Fingerprint> fps;
    for (std::size_t idx = 0; idx < sl.models.size(); ++idx) {
        std::optional<NoiseWrapper> noisy;
        const ModelOracle* oracle = &sl.models[idx];
        if (cfg.noise_sigma > 0.0) {
            noisy.emplace(sl.models[idx], cfg.noise_sigma,
                          derive_seed(cfg.seed, "bench-noise", idx));
            oracle = &*noisy;
        }
        fps.push_back(extract_fingerprint(*oracle, embedder, qs, opt));
    }
    return audit_fingerprints(fps, sl.lineage, sl.names, cfg.metrics);
}

std::vector<double> attack_robustness(const ModelOracle& oracle, const Embedder& embedder,
                                      const QuerySet& qs, const std::vector<double>& sigmas,
                                      const ExtractOptions& opt, std::uint64_t noise_seed) {
    if (sigmas.empty()) throw DomainError("attack_robustness: no noise levels given");
    for (double s : sigmas)
        if (!(s >= 0.0) || !std::isfinite(s))
            throw DomainError("attack_robustness: noise levels must be finite and non-negative");

    const Fingerprint clean = extract_fingerprint(oracle, embedder, qs, opt);
    std::vector<double> out;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        const NoiseWrapper noisy(oracle, sigmas[i], derive_seed(noise_seed, "attack", i));
        const Fingerprint fp = extract_fingerprint(noisy, embedder, qs, opt);
        out.push_back(pearson(clean.jacobian, fp.jacobian));
    }
    return out;
}

}  // namespace zpfp
