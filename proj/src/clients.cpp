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

#include "zpfp/clients.hpp"

#include <cmath>
#include <utility>

#include "zpfp/errors.hpp"
#include "zpfp/hash.hpp"
#include "zpfp/rng.hpp"

namespace zpfp {

void ChatEndpoint::validate() const {
    if (base_url.empty()) throw DomainError("chat endpoint: base_url must be non-empty");
    if (max_tokens < 1) throw DomainError("chat endpoint: max_tokens must be >= 1");
    if (temperature < 0) throw DomainError("chat endpoint: temperature must be >= 0");
    if (timeout_seconds <= 0) throw DomainError("chat endpoint: timeout must be positive");
}

void EmbeddingEndpoint::validate() const {
    if (base_url.empty()) throw DomainError("embedding endpoint: base_url must be non-empty");
    if (dim < 1) throw DomainError("embedding endpoint: dim must be >= 1");
    if (timeout_seconds <= 0) throw DomainError("embedding endpoint: timeout must be positive");
}

StubEmbedder::StubEmbedder(std::uint64_t seed, int dim) : seed_(seed), dim_(dim) {
    if (dim < 1) throw DomainError("stub embedder: dim must be >= 1");
}

Eigen::VectorXd StubEmbedder::embed(const std::string& text) const {
    Rng rng(derive_seed(seed_, "stub-embed", fnv1a64(text)));
    Eigen::VectorXd v(dim_);
    for (int i = 0; i < dim_; ++i) v(i) = rng.normal();
    double norm = v.norm();
    if (norm == 0.0) {
        // All-zero draw is essentially impossible; keep the unit-norm
        // contract anyway.
        v(0) = 1.0;
        norm = 1.0;
    }
    return v / norm;
}

std::string StubEmbedder::id() const {
    return "stub:" + std::to_string(seed_) + ":" + std::to_string(dim_);
}

HttpEmbedder::HttpEmbedder(EmbeddingEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    endpoint_.validate();
}

Eigen::VectorXd HttpEmbedder::embed(const std::string& text) const {
    return embed_text(endpoint_, text);
}

std::string HttpEmbedder::id() const {
    return "http:" + endpoint_.model_id + ":" + std::to_string(endpoint_.dim);
}

LinearStubModel::LinearStubModel(Eigen::MatrixXd a, Eigen::VectorXd b, double noise_sigma,
                                 std::uint64_t seed)
    : a_(std::move(a)), b_(std::move(b)), noise_sigma_(noise_sigma), seed_(seed) {
    if (a_.rows() != a_.cols()) throw DimensionError("linear stub: A must be square");
    if (b_.size() != a_.rows()) throw DimensionError("linear stub: b must match A");
    if (noise_sigma_ < 0) throw DomainError("linear stub: noise sigma must be >= 0");
}

LinearStubModel LinearStubModel::random(int dim, std::uint64_t seed, double noise_sigma) {
    if (dim < 1) throw DomainError("linear stub: dim must be >= 1");
    Rng rng(derive_seed(seed, "linstub-init"));
    Eigen::MatrixXd a(dim, dim);
    double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) a(i, j) = rng.normal() * scale;
    }
    Eigen::VectorXd b(dim);
    for (int i = 0; i < dim; ++i) b(i) = rng.normal();
    return LinearStubModel(std::move(a), std::move(b), noise_sigma, seed);
}

Eigen::VectorXd LinearStubModel::respond(std::size_t query_index, int repeat,
                                         const std::string& /*query_text*/,
                                         const Eigen::VectorXd& input_embedding) const {
    if (input_embedding.size() != a_.cols()) {
        throw DimensionError("linear stub: input embedding has wrong length");
    }
    Eigen::VectorXd out = a_ * input_embedding + b_;
    if (noise_sigma_ > 0) {
        Rng rng(derive_seed(seed_, "linstub", query_index, static_cast<std::uint64_t>(repeat)));
        for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += noise_sigma_ * rng.normal();
    }
    return out;
}

NoiseWrapper::NoiseWrapper(const ModelOracle& inner, double sigma, std::uint64_t seed)
    : inner_(&inner), sigma_(sigma), seed_(seed) {
    if (sigma < 0) throw DomainError("noise wrapper: sigma must be >= 0");
}

Eigen::VectorXd NoiseWrapper::respond(std::size_t query_index, int repeat,
                                      const std::string& query_text,
                                      const Eigen::VectorXd& input_embedding) const {
    Eigen::VectorXd out = inner_->respond(query_index, repeat, query_text, input_embedding);
    if (sigma_ == 0.0) return out;
    Rng rng(derive_seed(seed_, "noise", query_index, static_cast<std::uint64_t>(repeat)));
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += sigma_ * rng.normal();
    return out;
}

TextModelOracle::TextModelOracle(ChatEndpoint chat, const Embedder& embedder)
    : chat_(std::move(chat)), embedder_(&embedder) {
    chat_.validate();
}

Eigen::VectorXd TextModelOracle::respond(std::size_t /*query_index*/, int /*repeat*/,
                                         const std::string& query_text,
                                         const Eigen::VectorXd& /*input_embedding*/) const {
    return embedder_->embed(complete(chat_, query_text));
}

ResponseSet collect_responses(const ChatEndpoint& endpoint, const QuerySet& qs, int t,
                              std::int64_t budget) {
    endpoint.validate();
    if (t < 1) throw DomainError("collect_responses: t must be >= 1");
    std::int64_t total = static_cast<std::int64_t>(qs.total());
    std::int64_t planned = total * t;
    if (planned > budget) {
        throw BudgetError("planned " + std::to_string(planned) + " calls (" +
                          std::to_string(total) + " queries x " + std::to_string(t) +
                          " repeats) exceed budget " + std::to_string(budget) +
                          "; refusing before any network call");
    }
    std::vector<std::string> flat = qs.flatten();
    ResponseSet rs;
    rs.responses.resize(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        rs.responses[i].reserve(static_cast<std::size_t>(t));
        for (int rep = 0; rep < t; ++rep) {
            try {
                rs.responses[i].push_back(complete(endpoint, flat[i]));
            } catch (const WireError& e) {
                throw WireError("query " + std::to_string(i) + " repeat " + std::to_string(rep) +
                                " failed after " + std::to_string(rs.total_calls) + " of " +
                                std::to_string(planned) + " planned calls: " + e.what());
            }
            ++rs.total_calls;
        }
    }
    return rs;
}

}  // namespace zpfp
