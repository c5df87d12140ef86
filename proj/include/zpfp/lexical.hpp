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
#include <string_view>
#include <unordered_map>
#include <vector>

namespace zpfp {

/// Vocabulary of word vectors used to pick substitution candidates.
///
/// Immutable after load; safe to share across threads. Entries keep the
/// file's insertion order so that scans are reproducible.
struct WordVectorTable {
    int dim = 0;
    std::vector<std::string> words;
    std::vector<Eigen::VectorXd> vectors;
    std::vector<double> norms;  // cached Euclidean norms, all > 0
    std::unordered_map<std::string, std::size_t> index;

    std::size_t size() const { return words.size(); }
    bool contains(std::string_view word) const {
        return index.find(std::string(word)) != index.end();
    }
    /// Throws WordNotFoundError when absent.
    const Eigen::VectorXd& vector(const std::string& word) const;
};

/// Parses a text file of `word v1 v2 ... vd` lines (single-space separated).
/// The first line fixes the dimensionality; later duplicates of a word are
/// ignored. Zero vectors, dimension mismatches, and unparseable floats are
/// rejected with the offending line number.
WordVectorTable load_word_vectors(const std::filesystem::path& path);

/// The k words most cosine-similar to `word`, best first, excluding the word
/// itself. Ties break toward the lexicographically smaller word. Returns
/// fewer than k only when the vocabulary is exhausted.
std::vector<std::string> nearest_words(const WordVectorTable& table, const std::string& word,
                                       std::size_t k);

/// Splits text into tokens: each maximal run of ASCII [A-Za-z0-9_] is one
/// token, every other non-whitespace code point is its own token.
std::vector<std::string> tokenize(std::string_view text);

/// Joins tokens with single spaces.
std::string detokenize(const std::vector<std::string>& tokens);

/// Parameters controlling query construction.
struct QuerySpec {
    int n = 2;                  // base queries
    int m = 4;                  // perturbed queries per base
    int r = 3;                  // words replaced per perturbation
    int k = 10;                 // substitution candidates per word
    int words_per_snippet = 20; // snippet truncation length
    std::string prefix = "Complete the following code: ";
    std::uint64_t seed = 0;

    /// Throws DomainError unless n, m, r, k, words_per_snippet >= 1.
    void validate() const;
};

/// Base queries plus their perturbed variants, with the generating spec and
/// a content hash over all query strings in serialization order.
struct QuerySet {
    QuerySpec spec;
    std::vector<std::string> base;                   // n entries
    std::vector<std::vector<std::string>> perturbed; // n x m entries
    std::string content_hash;                        // 16 hex digits

    int total() const { return spec.n * (spec.m + 1); }

    /// Canonical flat order: base 0, its m perturbations, base 1, ...
    std::vector<std::string> flatten() const;
    int base_flat_index(int i) const { return i * (spec.m + 1); }
    int perturbed_flat_index(int i, int j) const { return i * (spec.m + 1) + 1 + j; }
};

/// Reads a line-delimited snippet file; literal newlines inside a snippet are
/// escaped as \n (and backslashes as \\). Blank lines are skipped.
std::vector<std::string> load_corpus(const std::filesystem::path& path);

/// Samples spec.n distinct snippets (seeded), truncates each to the first
/// spec.words_per_snippet whitespace-delimited words joined by single spaces,
/// and prepends spec.prefix.
std::vector<std::string> build_base_queries(const std::vector<std::string>& corpus,
                                            const QuerySpec& spec);

/// One perturbed variant of `base`: picks min(r, available) replaceable word
/// positions and swaps each for one of its top-k cosine neighbours. A token
/// is replaceable when it is letters-only, length >= 2, found in the table
/// after lowercasing, and not part of the instruction prefix. Deterministic
/// in (base, table, spec, draw_index); throws PerturbError when nothing can
/// be replaced.
std::string perturb_query(const std::string& base, const WordVectorTable& table,
                          const QuerySpec& spec, std::uint64_t draw_index);

/// Full query set: n base queries, m perturbations each (draw_index i*m+j).
QuerySet build_query_set(const std::vector<std::string>& corpus, const WordVectorTable& table,
                         const QuerySpec& spec);

/// Content hash of query strings in canonical order (length-delimited FNV-1a).
std::string query_content_hash(const std::vector<std::string>& base,
                               const std::vector<std::vector<std::string>>& perturbed);

void save_query_set(const QuerySet& qs, const std::filesystem::path& path);
QuerySet load_query_set(const std::filesystem::path& path);

}  // namespace zpfp
