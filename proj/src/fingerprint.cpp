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

#include "zpfp/fingerprint.hpp"

#include <Eigen/Cholesky>

#include <bit>
#include <charconv>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <utility>

#include "zpfp/errors.hpp"

namespace zpfp {

void RidgeConfig::validate() const {
    if (!(alpha > 0)) throw DomainError("ridge config: alpha must be > 0");
}

DifferencePairs difference_pairs(const Eigen::VectorXd& base_in,
                                 const std::vector<Eigen::VectorXd>& pert_in,
                                 const Eigen::VectorXd& base_out,
                                 const std::vector<Eigen::VectorXd>& pert_out,
                                 int base_index) {
    if (pert_in.size() != pert_out.size()) {
        throw DimensionError("difference_pairs: got " + std::to_string(pert_in.size()) +
                             " perturbed inputs but " + std::to_string(pert_out.size()) +
                             " perturbed outputs");
    }
    if (pert_in.empty()) throw DomainError("difference_pairs: need at least one perturbation");
    Eigen::Index din = base_in.size();
    Eigen::Index dout = base_out.size();
    DifferencePairs dp;
    dp.base_index = base_index;
    dp.dx.resize(static_cast<Eigen::Index>(pert_in.size()), din);
    dp.dy.resize(static_cast<Eigen::Index>(pert_in.size()), dout);
    for (std::size_t j = 0; j < pert_in.size(); ++j) {
        if (pert_in[j].size() != din || pert_out[j].size() != dout) {
            throw DimensionError("difference_pairs: embedding length mismatch at perturbation " +
                                 std::to_string(j));
        }
        dp.dx.row(static_cast<Eigen::Index>(j)) = (pert_in[j] - base_in).transpose();
        dp.dy.row(static_cast<Eigen::Index>(j)) = (pert_out[j] - base_out).transpose();
    }
    return dp;
}

namespace {

void check_ridge_inputs(const DifferencePairs& dp, const RidgeConfig& cfg) {
    cfg.validate();
    if (dp.dx.rows() != dp.dy.rows()) {
        throw DimensionError("ridge: dx and dy row counts differ");
    }
    if (dp.dx.rows() < 1) throw DomainError("ridge: need at least one difference row");
    if (!dp.dx.allFinite() || !dp.dy.allFinite()) {
        throw DomainError("ridge: non-finite difference inputs");
    }
}

}  // namespace

Eigen::MatrixXd ridge_jacobian_primal(const DifferencePairs& dp, const RidgeConfig& cfg) {
    check_ridge_inputs(dp, cfg);
    Eigen::MatrixXd m = dp.dx.transpose() * dp.dx;
    m.diagonal().array() += cfg.alpha;
    // J (dXᵀdX + aI) = dYᵀdX, transposed so one symmetric solve suffices.
    return m.ldlt().solve(dp.dx.transpose() * dp.dy).transpose();
}

Eigen::MatrixXd ridge_jacobian_dual(const DifferencePairs& dp, const RidgeConfig& cfg) {
    check_ridge_inputs(dp, cfg);
    Eigen::MatrixXd g = dp.dx * dp.dx.transpose();
    g.diagonal().array() += cfg.alpha;
    return (g.ldlt().solve(dp.dy)).transpose() * dp.dx;
}

Eigen::MatrixXd ridge_jacobian(const DifferencePairs& dp, const RidgeConfig& cfg) {
    if (dp.dx.rows() < dp.dx.cols()) return ridge_jacobian_dual(dp, cfg);
    return ridge_jacobian_primal(dp, cfg);
}

Eigen::MatrixXd aggregate(const std::vector<Eigen::MatrixXd>& jacobians) {
    if (jacobians.empty()) throw DomainError("aggregate: empty Jacobian list");
    Eigen::MatrixXd sum = jacobians[0];
    for (std::size_t i = 1; i < jacobians.size(); ++i) {
        if (jacobians[i].rows() != sum.rows() || jacobians[i].cols() != sum.cols()) {
            throw DimensionError("aggregate: Jacobian " + std::to_string(i) +
                                 " has a different shape");
        }
        sum += jacobians[i];
    }
    return sum / static_cast<double>(jacobians.size());
}

Eigen::VectorXd mean_vectors(const std::vector<Eigen::VectorXd>& vectors) {
    if (vectors.empty()) throw DomainError("mean_vectors: empty list");
    Eigen::VectorXd sum = vectors[0];
    for (std::size_t i = 1; i < vectors.size(); ++i) {
        if (vectors[i].size() != sum.size()) {
            throw DimensionError("mean_vectors: vector " + std::to_string(i) +
                                 " has a different length");
        }
        sum += vectors[i];
    }
    return sum / static_cast<double>(vectors.size());
}

Eigen::VectorXd mean_embedding(const std::vector<std::string>& texts, const Embedder& embedder) {
    if (texts.empty()) throw DomainError("mean_embedding: empty text list");
    std::vector<Eigen::VectorXd> embedded;
    embedded.reserve(texts.size());
    for (const std::string& t : texts) embedded.push_back(embedder.embed(t));
    return mean_vectors(embedded);
}

Fingerprint extract_fingerprint(const ModelOracle& oracle, const Embedder& embedder,
                                const QuerySet& qs, const ExtractOptions& opt,
                                std::vector<std::string>* warnings) {
    qs.spec.validate();
    opt.ridge.validate();
    if (opt.t < 1) throw DomainError("extract_fingerprint: t must be >= 1");
    if (embedder.dim() != oracle.dim()) {
        throw DimensionError("extract_fingerprint: embedder dim " +
                             std::to_string(embedder.dim()) + " != oracle dim " +
                             std::to_string(oracle.dim()));
    }
    std::int64_t total = qs.total();
    std::int64_t planned = total * opt.t;
    if (planned > opt.budget) {
        throw BudgetError("planned " + std::to_string(planned) + " model calls (" +
                          std::to_string(total) + " queries x " + std::to_string(opt.t) +
                          " repeats) exceed budget " + std::to_string(opt.budget) +
                          "; refusing before any call");
    }

    std::vector<std::string> flat = qs.flatten();
    std::vector<Eigen::VectorXd> in_emb(flat.size());
    std::vector<Eigen::VectorXd> out_mean(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        in_emb[i] = embedder.embed(flat[i]);
        std::vector<Eigen::VectorXd> outs;
        outs.reserve(static_cast<std::size_t>(opt.t));
        for (int rep = 0; rep < opt.t; ++rep) {
            outs.push_back(oracle.respond(i, rep, flat[i], in_emb[i]));
        }
        out_mean[i] = mean_vectors(outs);
    }

    std::vector<Eigen::MatrixXd> jacobians;
    for (int i = 0; i < qs.spec.n; ++i) {
        std::size_t bi = static_cast<std::size_t>(qs.base_flat_index(i));
        std::vector<Eigen::VectorXd> pin;
        std::vector<Eigen::VectorXd> pout;
        for (int j = 0; j < qs.spec.m; ++j) {
            std::size_t pj = static_cast<std::size_t>(qs.perturbed_flat_index(i, j));
            pin.push_back(in_emb[pj]);
            pout.push_back(out_mean[pj]);
        }
        DifferencePairs dp = difference_pairs(in_emb[bi], pin, out_mean[bi], pout, i);
        if (dp.dx.isZero(0.0)) {
            if (warnings != nullptr) {
                warnings->push_back("base query " + std::to_string(i) +
                                    " dropped: every perturbation embeds identically to it");
            }
            continue;
        }
        jacobians.push_back(ridge_jacobian(dp, opt.ridge));
    }
    if (jacobians.empty()) {
        throw DegenerateInputError(
            "every base query was dropped as degenerate; fingerprint is undefined");
    }

    Fingerprint fp;
    fp.jacobian = aggregate(jacobians);
    if (!fp.jacobian.allFinite()) {
        throw DomainError("extract_fingerprint: aggregated Jacobian has non-finite entries");
    }
    fp.meta.dim = oracle.dim();
    fp.meta.n = qs.spec.n;
    fp.meta.m = qs.spec.m;
    fp.meta.t = opt.t;
    fp.meta.alpha = opt.ridge.alpha;
    fp.meta.embedder_id = embedder.id();
    fp.meta.query_set_hash = qs.content_hash;
    fp.meta.created_unix =
        opt.created_unix >= 0 ? opt.created_unix : static_cast<std::int64_t>(std::time(nullptr));
    fp.meta.format_version = 1;
    return fp;
}

namespace {

constexpr char kMagic[4] = {'Z', 'P', 'F', 'P'};
constexpr unsigned char kVersion = 1;

void append_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

std::uint64_t read_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string meta_document(const FingerprintMeta& meta) {
    if (meta.embedder_id.find('\n') != std::string::npos ||
        meta.query_set_hash.find('\n') != std::string::npos) {
        throw DomainError("fingerprint meta fields must not contain newlines");
    }
    std::ostringstream os;
    os << "dim " << meta.dim << "\n"
       << "n " << meta.n << "\n"
       << "m " << meta.m << "\n"
       << "t " << meta.t << "\n"
       << "alpha " << format_double(meta.alpha) << "\n"
       << "embedder " << meta.embedder_id << "\n"
       << "queryset " << meta.query_set_hash << "\n"
       << "created " << meta.created_unix << "\n";
    return os.str();
}

FingerprintMeta parse_meta(const std::string& doc) {
    FingerprintMeta meta;
    bool have_dim = false;
    std::istringstream in(doc);
    std::string line;
    while (std::getline(in, line)) {
        std::size_t sp = line.find(' ');
        if (sp == std::string::npos) {
            throw FormatError("fingerprint metadata line without a value: '" + line + "'");
        }
        std::string key = line.substr(0, sp);
        std::string value = line.substr(sp + 1);
        auto as_long = [&](const char* name) {
            long out = 0;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
            if (ec != std::errc() || ptr != value.data() + value.size()) {
                throw FormatError(std::string("fingerprint metadata: bad ") + name + " value '" +
                                  value + "'");
            }
            return out;
        };
        if (key == "dim") {
            meta.dim = static_cast<int>(as_long("dim"));
            have_dim = true;
        } else if (key == "n") {
            meta.n = static_cast<int>(as_long("n"));
        } else if (key == "m") {
            meta.m = static_cast<int>(as_long("m"));
        } else if (key == "t") {
            meta.t = static_cast<int>(as_long("t"));
        } else if (key == "alpha") {
            try {
                meta.alpha = std::stod(value);
            } catch (const std::exception&) {
                throw FormatError("fingerprint metadata: bad alpha value '" + value + "'");
            }
        } else if (key == "embedder") {
            meta.embedder_id = value;
        } else if (key == "queryset") {
            meta.query_set_hash = value;
        } else if (key == "created") {
            meta.created_unix = as_long("created");
        }
        // Unknown keys are ignored for forward compatibility.
    }
    if (!have_dim || meta.dim < 1) {
        throw FormatError("fingerprint metadata lacks a positive dim");
    }
    return meta;
}

}  // namespace

void save_fingerprint(const Fingerprint& fp, const std::filesystem::path& path) {
    if (fp.jacobian.rows() != fp.meta.dim || fp.jacobian.cols() != fp.meta.dim) {
        throw DimensionError("save_fingerprint: matrix shape disagrees with meta dim");
    }
    std::string meta = meta_document(fp.meta);
    std::string out;
    out.reserve(5 + 4 + meta.size() +
                static_cast<std::size_t>(fp.meta.dim) * static_cast<std::size_t>(fp.meta.dim) * 8);
    out.append(kMagic, 4);
    out += static_cast<char>(kVersion);
    std::uint32_t len = static_cast<std::uint32_t>(meta.size());
    for (int i = 0; i < 4; ++i) out += static_cast<char>((len >> (8 * i)) & 0xff);
    out += meta;
    for (int r = 0; r < fp.meta.dim; ++r) {
        for (int c = 0; c < fp.meta.dim; ++c) {
            append_u64_le(out, std::bit_cast<std::uint64_t>(fp.jacobian(r, c)));
        }
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open fingerprint file for writing: " + path.string());
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw IoError("failed writing fingerprint file: " + path.string());
}

Fingerprint load_fingerprint(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open fingerprint file: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());

    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw BadMagicError("not a fingerprint file (bad magic): " + path.string());
    }
    if (bytes.size() < 5) {
        throw TruncatedError("fingerprint file ends before the version byte");
    }
    if (p[4] != kVersion) {
        throw BadVersionError("unsupported fingerprint version " + std::to_string(p[4]));
    }
    if (bytes.size() < 9) {
        throw TruncatedError("fingerprint file ends inside the metadata length");
    }
    std::uint32_t meta_len = 0;
    for (int i = 0; i < 4; ++i) meta_len |= static_cast<std::uint32_t>(p[5 + i]) << (8 * i);
    std::size_t meta_end = 9 + static_cast<std::size_t>(meta_len);
    if (bytes.size() < meta_end) {
        throw TruncatedError("fingerprint file ends inside the metadata document");
    }

    Fingerprint fp;
    fp.meta = parse_meta(bytes.substr(9, meta_len));
    fp.meta.format_version = kVersion;

    std::size_t want = static_cast<std::size_t>(fp.meta.dim) *
                       static_cast<std::size_t>(fp.meta.dim) * 8;
    std::size_t have = bytes.size() - meta_end;
    if (have != want) {
        throw TruncatedError("fingerprint matrix: expected " + std::to_string(want) +
                             " bytes for dim " + std::to_string(fp.meta.dim) + ", got " +
                             std::to_string(have));
    }
    fp.jacobian.resize(fp.meta.dim, fp.meta.dim);
    const unsigned char* q = p + meta_end;
    for (int r = 0; r < fp.meta.dim; ++r) {
        for (int c = 0; c < fp.meta.dim; ++c) {
            fp.jacobian(r, c) = std::bit_cast<double>(read_u64_le(q));
            q += 8;
        }
    }
    if (!fp.jacobian.allFinite()) {
        throw FormatError("fingerprint matrix contains non-finite entries");
    }
    return fp;
}

}  // namespace zpfp
