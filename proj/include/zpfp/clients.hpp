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

#include "zpfp/lexical.hpp"

namespace zpfp {

/// Descriptor of a chat-completion API. Immutable once validated.
struct ChatEndpoint {
    std::string base_url;
    std::string model_id;
    double temperature = 0.7;
    int max_tokens = 256;
    double timeout_seconds = 30.0;
    std::string auth_token_env;  // env var holding the bearer token, "" = none
    int max_retries = 3;         // extra attempts after the first
    int backoff_ms = 500;        // first retry delay, doubled per retry

    void validate() const;
};

/// Descriptor of an embedding API with its expected output dimensionality.
struct EmbeddingEndpoint {
    std::string base_url;
    std::string model_id;
    double timeout_seconds = 30.0;
    std::string auth_token_env;
    int dim = 768;
    int max_retries = 3;
    int backoff_ms = 500;

    void validate() const;
};

/// POST {base_url}/v1/chat/completions and return choices[0].message.content.
/// Retries transport failures and 5xx responses with exponential backoff.
std::string complete(const ChatEndpoint& endpoint, const std::string& prompt);

/// POST {base_url}/v1/embeddings and return data[0].embedding as a vector of
/// length endpoint.dim (length mismatches are an error).
Eigen::VectorXd embed_text(const EmbeddingEndpoint& endpoint, const std::string& text);

/// Text-to-vector embedding behind which remote APIs and local stubs are
/// interchangeable. Implementations must be thread-safe and deterministic
/// per id: equal (id, text) implies equal vectors.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual Eigen::VectorXd embed(const std::string& text) const = 0;
    virtual int dim() const = 0;
    /// Stable identity recorded in fingerprints; fingerprints from different
    /// embedder ids are not comparable.
    virtual std::string id() const = 0;
};

/// Deterministic local embedder: text maps to a unit-norm pseudo-random
/// vector keyed by a digest of (seed, text).
class StubEmbedder : public Embedder {
public:
    StubEmbedder(std::uint64_t seed, int dim);
    Eigen::VectorXd embed(const std::string& text) const override;
    int dim() const override { return dim_; }
    std::string id() const override;

private:
    std::uint64_t seed_;
    int dim_;
};

/// Embedder backed by an EmbeddingEndpoint.
class HttpEmbedder : public Embedder {
public:
    explicit HttpEmbedder(EmbeddingEndpoint endpoint);
    Eigen::VectorXd embed(const std::string& text) const override;
    int dim() const override { return endpoint_.dim; }
    std::string id() const override;

private:
    EmbeddingEndpoint endpoint_;
};

/// The model under audit, reduced to what fingerprinting needs: an output
/// embedding per (query, repeat). Implementations must be thread-safe;
/// repeats may differ (sampling noise) but reruns with the same indices must
/// reproduce bit-identically for stub oracles.
class ModelOracle {
public:
    virtual ~ModelOracle() = default;
    virtual int dim() const = 0;
    virtual Eigen::VectorXd respond(std::size_t query_index, int repeat,
                                    const std::string& query_text,
                                    const Eigen::VectorXd& input_embedding) const = 0;
};

/// Vector-level oracle with known ground truth: output = A * e_x + b plus
/// optional per-(query, repeat) Gaussian noise.
class LinearStubModel : public ModelOracle {
public:
    LinearStubModel(Eigen::MatrixXd a, Eigen::VectorXd b, double noise_sigma, std::uint64_t seed);
    /// A has i.i.d. N(0, 1/dim) entries and b i.i.d. N(0, 1), seeded.
    static LinearStubModel random(int dim, std::uint64_t seed, double noise_sigma = 0.0);

    int dim() const override { return static_cast<int>(a_.rows()); }
    Eigen::VectorXd respond(std::size_t query_index, int repeat, const std::string& query_text,
                            const Eigen::VectorXd& input_embedding) const override;

    const Eigen::MatrixXd& a() const { return a_; }
    const Eigen::VectorXd& b() const { return b_; }

private:
    Eigen::MatrixXd a_;
    Eigen::VectorXd b_;
    double noise_sigma_;
    std::uint64_t seed_;
};

/// Adds i.i.d. N(0, sigma^2) noise to an inner oracle's output embeddings;
/// emulates an output-perturbation evasion attack at the embedding level.
/// sigma = 0 is a bitwise pass-through.
class NoiseWrapper : public ModelOracle {
public:
    NoiseWrapper(const ModelOracle& inner, double sigma, std::uint64_t seed);

    int dim() const override { return inner_->dim(); }
    Eigen::VectorXd respond(std::size_t query_index, int repeat, const std::string& query_text,
                            const Eigen::VectorXd& input_embedding) const override;

private:
    const ModelOracle* inner_;
    double sigma_;
    std::uint64_t seed_;
};

/// Text-level oracle: ask the chat endpoint, then embed its reply.
class TextModelOracle : public ModelOracle {
public:
    TextModelOracle(ChatEndpoint chat, const Embedder& embedder);

    int dim() const override { return embedder_->dim(); }
    Eigen::VectorXd respond(std::size_t query_index, int repeat, const std::string& query_text,
                            const Eigen::VectorXd& input_embedding) const override;

private:
    ChatEndpoint chat_;
    const Embedder* embedder_;
};

/// Raw chat responses, t per query, keyed by flat query index in the query
/// set's canonical order.
struct ResponseSet {
    std::vector<std::vector<std::string>> responses;
    std::int64_t total_calls = 0;
};

/// Sends every query in qs to the endpoint t times. Refuses before the first
/// call when N * t would exceed budget (N = total query count); a per-call
/// failure aborts with the progress so far in the error message.
ResponseSet collect_responses(const ChatEndpoint& endpoint, const QuerySet& qs, int t,
                              std::int64_t budget);

}  // namespace zpfp
