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

#include "zpfp/lexical.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "zpfp/errors.hpp"
#include "zpfp/hash.hpp"
#include "zpfp/rng.hpp"

namespace zpfp {

namespace {

bool is_word_char(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_ascii_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool letters_only(const std::string& s) {
    for (unsigned char c : s) {
        if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'))) return false;
    }
    return !s.empty();
}

std::string to_lower_ascii(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

double parse_double_field(std::string_view field, int lineno) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ParseError("line " + std::to_string(lineno) + ": unparseable float '" +
                             std::string(field) + "'",
                         lineno);
    }
    if (!std::isfinite(value)) {
        throw ParseError("line " + std::to_string(lineno) + ": non-finite value '" +
                             std::string(field) + "'",
                         lineno);
    }
    return value;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::string escape_line(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '\\') {
            out += "\\\\";
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out += c;
        }
    }
    return out;
}

std::string unescape_line(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            char next = s[i + 1];
            if (next == 'n') {
                out += '\n';
                ++i;
                continue;
            }
            if (next == '\\') {
                out += '\\';
                ++i;
                continue;
            }
        }
        out += s[i];
    }
    return out;
}

bool all_whitespace(const std::string& s) {
    for (unsigned char c : s) {
        if (!is_ascii_space(c)) return false;
    }
    return true;
}

}  // namespace

const Eigen::VectorXd& WordVectorTable::vector(const std::string& word) const {
    auto it = index.find(word);
    if (it == index.end()) {
        throw WordNotFoundError("word not in vector table: '" + word + "'");
    }
    return vectors[it->second];
}

WordVectorTable load_word_vectors(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open word-vector file: " + path.string());
    }
    WordVectorTable table;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty()) {
            throw ParseError("line " + std::to_string(lineno) + ": empty line", lineno);
        }
        std::vector<std::string_view> fields;
        std::string_view rest = line;
        while (true) {
            std::size_t pos = rest.find(' ');
            if (pos == std::string_view::npos) {
                fields.push_back(rest);
                break;
            }
            fields.push_back(rest.substr(0, pos));
            rest = rest.substr(pos + 1);
        }
        if (fields.size() < 2) {
            throw ParseError("line " + std::to_string(lineno) + ": expected word and vector",
                             lineno);
        }
        std::string word(fields[0]);
        if (word.empty()) {
            throw ParseError("line " + std::to_string(lineno) + ": empty word", lineno);
        }
        for (unsigned char c : word) {
            if (is_ascii_space(c)) {
                throw ParseError(
                    "line " + std::to_string(lineno) + ": word contains whitespace", lineno);
            }
        }
        int d = static_cast<int>(fields.size()) - 1;
        if (table.dim == 0) {
            table.dim = d;
        } else if (d != table.dim) {
            throw ParseError("line " + std::to_string(lineno) + ": expected " +
                                 std::to_string(table.dim) + " components, got " +
                                 std::to_string(d),
                             lineno);
        }
        Eigen::VectorXd v(d);
        bool nonzero = false;
        for (int i = 0; i < d; ++i) {
            v[i] = parse_double_field(fields[static_cast<std::size_t>(i) + 1], lineno);
            if (v[i] != 0.0) nonzero = true;
        }
        if (!nonzero) {
            throw ParseError("line " + std::to_string(lineno) + ": zero vector for word '" +
                                 word + "'",
                             lineno);
        }
        if (table.index.find(word) != table.index.end()) {
            continue;  // first occurrence wins
        }
        table.index.emplace(word, table.words.size());
        table.words.push_back(std::move(word));
        table.norms.push_back(v.norm());
        table.vectors.push_back(std::move(v));
    }
    if (table.words.empty()) {
        throw ParseError("empty word-vector file: " + path.string());
    }
    return table;
}

std::vector<std::string> nearest_words(const WordVectorTable& table, const std::string& word,
                                       std::size_t k) {
    auto it = table.index.find(word);
    if (it == table.index.end()) {
        throw WordNotFoundError("word not in vector table: '" + word + "'");
    }
    std::size_t self = it->second;
    const Eigen::VectorXd& q = table.vectors[self];
    double qn = table.norms[self];

    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(table.size() - 1);
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (i == self) continue;
        double cos = q.dot(table.vectors[i]) / (qn * table.norms[i]);
        scored.emplace_back(cos, i);
    }
    std::size_t take = std::min(k, scored.size());
    auto better = [&table](const std::pair<double, std::size_t>& a,
                           const std::pair<double, std::size_t>& b) {
        if (a.first != b.first) return a.first > b.first;
        return table.words[a.second] < table.words[b.second];
    };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                      scored.end(), better);
    std::vector<std::string> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        out.push_back(table.words[scored[i].second]);
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string run;
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (is_word_char(c)) {
            run += static_cast<char>(c);
            ++i;
            continue;
        }
        if (!run.empty()) {
            tokens.push_back(run);
            run.clear();
        }
        if (is_ascii_space(c)) {
            ++i;
            continue;
        }
        // One token per code point; multi-byte UTF-8 sequences stay intact.
        std::size_t len = 1;
        if (c >= 0xF0) {
            len = 4;
        } else if (c >= 0xE0) {
            len = 3;
        } else if (c >= 0xC0) {
            len = 2;
        }
        len = std::min(len, text.size() - i);
        tokens.emplace_back(text.substr(i, len));
        i += len;
    }
    if (!run.empty()) tokens.push_back(run);
    return tokens;
}

std::string detokenize(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

void QuerySpec::validate() const {
    if (n < 1) throw DomainError("query spec: n must be >= 1");
    if (m < 1) throw DomainError("query spec: m must be >= 1");
    if (r < 1) throw DomainError("query spec: r must be >= 1");
    if (k < 1) throw DomainError("query spec: k must be >= 1");
    if (words_per_snippet < 1) throw DomainError("query spec: words_per_snippet must be >= 1");
}

std::vector<std::string> QuerySet::flatten() const {
    std::vector<std::string> flat;
    flat.reserve(static_cast<std::size_t>(total()));
    for (std::size_t i = 0; i < base.size(); ++i) {
        flat.push_back(base[i]);
        for (const std::string& p : perturbed[i]) flat.push_back(p);
    }
    return flat;
}

std::vector<std::string> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open corpus file: " + path.string());
    }
    std::vector<std::string> snippets;
    std::string line;
    while (std::getline(in, line)) {
        strip_cr(line);
        std::string snippet = unescape_line(line);
        if (snippet.empty() || all_whitespace(snippet)) continue;
        snippets.push_back(std::move(snippet));
    }
    return snippets;
}

std::vector<std::string> build_base_queries(const std::vector<std::string>& corpus,
                                            const QuerySpec& spec) {
    spec.validate();
    if (corpus.size() < static_cast<std::size_t>(spec.n)) {
        throw DomainError("corpus has " + std::to_string(corpus.size()) +
                          " snippets but " + std::to_string(spec.n) +
                          " base queries requested");
    }
    Rng rng(derive_seed(spec.seed, "base-queries"));
    std::vector<std::size_t> picks = rng.sample_without_replacement(
        corpus.size(), static_cast<std::size_t>(spec.n));
    std::vector<std::string> out;
    out.reserve(picks.size());
    for (std::size_t idx : picks) {
        std::istringstream words(corpus[idx]);
        std::string word;
        std::string body;
        int kept = 0;
        while (kept < spec.words_per_snippet && words >> word) {
            if (kept) body += ' ';
            body += word;
            ++kept;
        }
        out.push_back(spec.prefix + body);
    }
    return out;
}

namespace {

/// Token positions eligible for substitution, each with its candidate list
/// (top-k cosine neighbours minus any candidate equal to the original token,
/// so every substitution changes the text).
std::vector<std::pair<std::size_t, std::vector<std::string>>> replaceable_positions(
    const std::vector<std::string>& tokens, const WordVectorTable& table,
    const QuerySpec& spec) {
    std::vector<std::string> prefix_tokens = tokenize(spec.prefix);
    std::size_t start = 0;
    if (prefix_tokens.size() <= tokens.size() &&
        std::equal(prefix_tokens.begin(), prefix_tokens.end(), tokens.begin())) {
        start = prefix_tokens.size();
    }
    std::vector<std::pair<std::size_t, std::vector<std::string>>> out;
    for (std::size_t p = start; p < tokens.size(); ++p) {
        const std::string& tok = tokens[p];
        if (tok.size() < 2 || !letters_only(tok)) continue;
        std::string lower = to_lower_ascii(tok);
        if (!table.contains(lower)) continue;
        std::vector<std::string> cands =
            nearest_words(table, lower, static_cast<std::size_t>(spec.k));
        cands.erase(std::remove(cands.begin(), cands.end(), tok), cands.end());
        if (cands.empty()) continue;
        out.emplace_back(p, std::move(cands));
    }
    return out;
}

}  // namespace

std::string perturb_query(const std::string& base, const WordVectorTable& table,
                          const QuerySpec& spec, std::uint64_t draw_index) {
    spec.validate();
    if (base.empty()) {
        throw DomainError("cannot perturb an empty query");
    }
    std::vector<std::string> tokens = tokenize(base);
    auto eligible = replaceable_positions(tokens, table, spec);
    if (eligible.empty()) {
        throw PerturbError("no replaceable word in query: '" + base + "'");
    }
    Rng rng(derive_seed(spec.seed, "perturb", draw_index));
    std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(spec.r), eligible.size());
    std::vector<std::size_t> chosen = rng.sample_without_replacement(eligible.size(), count);
    // Candidate draws happen in ascending token position, not draw order, so
    // the output depends only on the chosen set.
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t e : chosen) {
        const auto& [pos, cands] = eligible[e];
        tokens[pos] = cands[static_cast<std::size_t>(rng.below(cands.size()))];
    }
    return detokenize(tokens);
}

QuerySet build_query_set(const std::vector<std::string>& corpus, const WordVectorTable& table,
                         const QuerySpec& spec) {
    spec.validate();
    QuerySet qs;
    qs.spec = spec;
    qs.base = build_base_queries(corpus, spec);
    qs.perturbed.resize(qs.base.size());
    for (std::size_t i = 0; i < qs.base.size(); ++i) {
        qs.perturbed[i].reserve(static_cast<std::size_t>(spec.m));
        for (int j = 0; j < spec.m; ++j) {
            std::uint64_t draw_index =
                static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(spec.m) +
                static_cast<std::uint64_t>(j);
            qs.perturbed[i].push_back(perturb_query(qs.base[i], table, spec, draw_index));
        }
    }
    qs.content_hash = query_content_hash(qs.base, qs.perturbed);
    return qs;
}

std::string query_content_hash(const std::vector<std::string>& base,
                               const std::vector<std::vector<std::string>>& perturbed) {
    // Length-delimited fold so ("ab","c") and ("a","bc") cannot collide.
    std::uint64_t h = kFnvOffset;
    auto fold = [&h](const std::string& s) {
        h = fnv1a64_u64(s.size(), h);
        h = fnv1a64(s, h);
    };
    for (std::size_t i = 0; i < base.size(); ++i) {
        fold(base[i]);
        if (i < perturbed.size()) {
            for (const std::string& p : perturbed[i]) fold(p);
        }
    }
    return hex64(h);
}

void save_query_set(const QuerySet& qs, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open query-set file for writing: " + path.string());
    }
    out << "zpfp-queryset 1\n";
    out << "n " << qs.spec.n << "\n";
    out << "m " << qs.spec.m << "\n";
    out << "r " << qs.spec.r << "\n";
    out << "k " << qs.spec.k << "\n";
    out << "words-per-snippet " << qs.spec.words_per_snippet << "\n";
    out << "seed " << qs.spec.seed << "\n";
    out << "prefix " << escape_line(qs.spec.prefix) << "\n";
    out << "hash " << qs.content_hash << "\n";
    for (const std::string& q : qs.flatten()) {
        out << "query " << escape_line(q) << "\n";
    }
    if (!out) {
        throw IoError("failed writing query-set file: " + path.string());
    }
}

namespace {

std::string expect_field(std::istream& in, const std::string& key, int& lineno) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("query-set file ends before '" + key + "' line", lineno);
    }
    ++lineno;
    strip_cr(line);
    if (line.compare(0, key.size() + 1, key + " ") != 0) {
        throw ParseError("line " + std::to_string(lineno) + ": expected '" + key + " ...'",
                         lineno);
    }
    return line.substr(key.size() + 1);
}

long parse_count(const std::string& text, const std::string& key, int lineno) {
    long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value < 1) {
        throw ParseError("line " + std::to_string(lineno) + ": bad value for '" + key + "'",
                         lineno);
    }
    return value;
}

}  // namespace

QuerySet load_query_set(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open query-set file: " + path.string());
    }
    int lineno = 0;
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty query-set file: " + path.string(), 1);
    }
    ++lineno;
    strip_cr(line);
    if (line != "zpfp-queryset 1") {
        throw ParseError("line 1: not a version-1 query-set file", 1);
    }

    QuerySet qs;
    qs.spec.n = static_cast<int>(parse_count(expect_field(in, "n", lineno), "n", lineno));
    qs.spec.m = static_cast<int>(parse_count(expect_field(in, "m", lineno), "m", lineno));
    qs.spec.r = static_cast<int>(parse_count(expect_field(in, "r", lineno), "r", lineno));
    qs.spec.k = static_cast<int>(parse_count(expect_field(in, "k", lineno), "k", lineno));
    qs.spec.words_per_snippet = static_cast<int>(parse_count(
        expect_field(in, "words-per-snippet", lineno), "words-per-snippet", lineno));
    {
        std::string text = expect_field(in, "seed", lineno);
        std::uint64_t seed = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
            throw ParseError("line " + std::to_string(lineno) + ": bad value for 'seed'", lineno);
        }
        qs.spec.seed = seed;
    }
    qs.spec.prefix = unescape_line(expect_field(in, "prefix", lineno));
    std::string stored_hash = expect_field(in, "hash", lineno);

    int total = qs.spec.n * (qs.spec.m + 1);
    std::vector<std::string> flat;
    flat.reserve(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) {
        flat.push_back(unescape_line(expect_field(in, "query", lineno)));
    }
    qs.base.reserve(static_cast<std::size_t>(qs.spec.n));
    qs.perturbed.resize(static_cast<std::size_t>(qs.spec.n));
    for (int i = 0; i < qs.spec.n; ++i) {
        qs.base.push_back(flat[static_cast<std::size_t>(qs.base_flat_index(i))]);
        for (int j = 0; j < qs.spec.m; ++j) {
            qs.perturbed[static_cast<std::size_t>(i)].push_back(
                flat[static_cast<std::size_t>(qs.perturbed_flat_index(i, j))]);
        }
    }
    qs.content_hash = query_content_hash(qs.base, qs.perturbed);
    if (qs.content_hash != stored_hash) {
        throw ParseError("query-set content hash mismatch: stored " + stored_hash +
                         ", recomputed " + qs.content_hash);
    }
    return qs;
}

}  // namespace zpfp
