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

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "zpfp/audit.hpp"
#include "zpfp/clients.hpp"
#include "zpfp/compare.hpp"
#include "zpfp/errors.hpp"
#include "zpfp/fingerprint.hpp"
#include "zpfp/fisher.hpp"
#include "zpfp/lexical.hpp"

#include <CLI11.hpp>

namespace {

using namespace zpfp;

/// Exit codes: 0 success (compare: not flagged), 1 unexpected failure,
/// 2 bad input, 3 budget refusal, 4 endpoint failure, 5 incomparable
/// fingerprints, 6 theory violation, 10 compare flagged the model.
int run_guarded(const std::function<int()>& action) {
    try {
        return action();
    } catch (const BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const WireError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ComparabilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const TheoryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 6;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const WordNotFoundError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const PerturbError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DegenerateInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ZeroVarianceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

bool is_stub_descriptor(const std::string& s) { return s.rfind("stub:", 0) == 0; }

bool is_url_descriptor(const std::string& s) {
    return s.rfind("http://", 0) == 0 || s.rfind("https://", 0) == 0;
}

std::uint64_t stub_descriptor_seed(const std::string& s) {
    const std::string digits = s.substr(5);
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
    if (ec != std::errc{} || ptr != digits.data() + digits.size())
        throw DomainError("bad stub descriptor '" + s + "': expected stub:<seed>");
    return seed;
}

void require_descriptor(const std::string& s, const std::string& what) {
    if (!is_stub_descriptor(s) && !is_url_descriptor(s))
        throw DomainError(what + " must be 'stub:<seed>' or an http(s) URL, got '" + s + "'");
}

/// Timestamp for fingerprint metadata. SOURCE_DATE_EPOCH wins when set so
/// builds can be reproduced; otherwise stub targets pin 0 and live targets
/// record the wall clock.
std::int64_t resolve_created_unix(bool stub_target) {
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
        const std::string text(sde);
        std::int64_t value = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size())
            throw DomainError("SOURCE_DATE_EPOCH is not an integer: '" + text + "'");
        return value;
    }
    return stub_target ? 0 : -1;
}

std::string format_double(double v, int precision = 6) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << v;
    return out.str();
}

/// Per-subcommand option files. CLI11 applies a config file only on the app
/// that parse() ran on, never on a subcommand, so each subcommand takes a
/// plain --config option and the file is merged here after parsing: a
/// key=value line feeds its option through the option's own converter, but
/// only when neither a flag nor an environment variable set it first. That
/// gives the precedence flags > environment > file. Required options are
/// also enforced here rather than with CLI11's required(), which would fire
/// during the parse, before the file could satisfy them.
class SubcommandConfigs {
public:
    void attach(CLI::App* sub) {
        entries_.push_back(std::make_unique<Entry>());
        Entry& e = *entries_.back();
        e.sub = sub;
        sub->add_option("--config", e.path,
                        "Key=value option file; lines starting with # are comments");
    }

    /// Marks the most recently attached subcommand's option as required.
    CLI::Option* require(CLI::Option* op) {
        entries_.back()->required.push_back(op);
        return op;
    }

    /// Merges the file of the parsed subcommand, then checks requirements.
    void finalize() const {
        for (const auto& e : entries_) {
            if (!e->sub->parsed()) continue;
            if (!e->path.empty()) merge_file(*e->sub, e->path);
            for (const CLI::Option* op : e->required)
                if (op->count() == 0) throw DomainError(op->get_name() + " is required");
        }
    }

private:
    struct Entry {
        CLI::App* sub = nullptr;
        std::string path;
        std::vector<CLI::Option*> required;
    };

    static std::string trim(const std::string& s) {
        const std::size_t a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
    }

    static void merge_file(CLI::App& sub, const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file: " + path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string text = trim(line);
            if (text.empty() || text[0] == '#') continue;
            const std::size_t eq = text.find('=');
            if (eq == std::string::npos)
                throw ParseError(path + ": expected key=value on line " +
                                     std::to_string(lineno),
                                 lineno);
            const std::string key = trim(text.substr(0, eq));
            const std::string value = trim(text.substr(eq + 1));
            if (key.empty())
                throw ParseError(path + ": empty key on line " + std::to_string(lineno), lineno);
            CLI::Option* op = sub.get_option_no_throw("--" + key);
            if (op == nullptr)
                throw ParseError(path + ": unknown key '" + key + "' on line " +
                                     std::to_string(lineno),
                                 lineno);
            if (op->count() > 0) continue;
            try {
                // Flags in a file read key=true; bare values pass through.
                op->add_result(value.empty() && op->get_expected_min() == 0 ? "true" : value);
                op->run_callback();
            } catch (const CLI::Error& err) {
                throw ParseError(path + ": bad value for '" + key + "': " + err.what(), lineno);
            }
        }
    }

    std::vector<std::unique_ptr<Entry>> entries_;
};

// ---------------------------------------------------------------------------
// build-queries

struct BuildQueriesArgs {
    std::string corpus;
    std::string vectors;
    std::string out;
    QuerySpec spec;
};

void setup_build_queries(CLI::App& app, SubcommandConfigs& cfg, BuildQueriesArgs& args,
                         std::function<int()>& action) {
    CLI::App* sub =
        app.add_subcommand("build-queries", "Build a perturbed query set from a snippet corpus");
    cfg.attach(sub);
    cfg.require(sub->add_option("--corpus", args.corpus, "Snippet corpus, one snippet per line"));
    cfg.require(
        sub->add_option("--vectors", args.vectors, "Word vector table (word v1 v2 ... per line)"));
    cfg.require(sub->add_option("--out", args.out, "Output query-set file"));
    sub->add_option("--n", args.spec.n, "Number of base queries")->capture_default_str();
    sub->add_option("--m", args.spec.m, "Perturbed variants per base query")
        ->capture_default_str();
    sub->add_option("--r", args.spec.r, "Words replaced per variant")->capture_default_str();
    sub->add_option("--k", args.spec.k, "Nearest-neighbor candidates per word")
        ->capture_default_str();
    sub->add_option("--words-per-snippet", args.spec.words_per_snippet,
                    "Snippet truncation length in words")
        ->capture_default_str();
    sub->add_option("--prefix", args.spec.prefix, "Instruction prepended to every query")
        ->capture_default_str();
    sub->add_option("--seed", args.spec.seed, "Root seed for sampling and perturbation")
        ->envname("ZPFP_SEED")
        ->capture_default_str();
    sub->callback([&args, &action] {
        action = [&args] {
            const WordVectorTable table = load_word_vectors(args.vectors);
            const std::vector<std::string> corpus = load_corpus(args.corpus);
            const QuerySet qs = build_query_set(corpus, table, args.spec);
            save_query_set(qs, args.out);
            std::cout << "queries: " << qs.total() << " (n=" << qs.spec.n << ", m=" << qs.spec.m
                      << ")\n";
            std::cout << "hash: " << qs.content_hash << "\n";
            std::cout << "wrote: " << args.out << "\n";
            return 0;
        };
    });
}

// ---------------------------------------------------------------------------
// fingerprint

struct FingerprintArgs {
    std::string queries;
    std::string out;
    std::string target;
    std::string embedder = "stub:0";
    std::string target_model;
    std::string embed_model;
    std::string auth_env = "ZPFP_API_TOKEN";
    std::string embed_auth_env = "ZPFP_API_TOKEN";
    int dim = 768;
    double temperature = 0.7;
    int max_tokens = 256;
    double timeout_seconds = 30.0;
    double noise_sigma = 0.0;
    std::uint64_t noise_seed = 0;
    ExtractOptions opt;
};

std::unique_ptr<Embedder> make_embedder(const FingerprintArgs& args) {
    require_descriptor(args.embedder, "--embedder");
    if (is_stub_descriptor(args.embedder))
        return std::make_unique<StubEmbedder>(stub_descriptor_seed(args.embedder), args.dim);
    EmbeddingEndpoint ep;
    ep.base_url = args.embedder;
    ep.model_id = args.embed_model;
    ep.timeout_seconds = args.timeout_seconds;
    ep.auth_token_env = args.embed_auth_env;
    ep.dim = args.dim;
    return std::make_unique<HttpEmbedder>(ep);
}

void setup_fingerprint(CLI::App& app, SubcommandConfigs& cfg, FingerprintArgs& args,
                       std::function<int()>& action) {
    CLI::App* sub = app.add_subcommand(
        "fingerprint", "Estimate a Jacobian fingerprint of a target model");
    cfg.attach(sub);
    cfg.require(sub->add_option("--queries", args.queries, "Query-set file from build-queries"));
    cfg.require(sub->add_option("--out", args.out, "Output fingerprint file"));
    cfg.require(
        sub->add_option("--target", args.target, "Target model: stub:<seed> or chat API base URL")
            ->envname("ZPFP_TARGET"));
    sub->add_option("--embedder", args.embedder, "Embedder: stub:<seed> or embedding API base URL")
        ->envname("ZPFP_EMBEDDER")
        ->capture_default_str();
    sub->add_option("--target-model", args.target_model, "Model id sent to the chat API");
    sub->add_option("--embed-model", args.embed_model, "Model id sent to the embedding API");
    sub->add_option("--auth-env", args.auth_env, "Env var holding the chat API bearer token")
        ->capture_default_str();
    sub->add_option("--embed-auth-env", args.embed_auth_env,
                    "Env var holding the embedding API bearer token")
        ->capture_default_str();
    sub->add_option("--dim", args.dim, "Embedding dimension")
        ->envname("ZPFP_DIM")
        ->capture_default_str();
    sub->add_option("--t", args.opt.t, "Repeats per query")->capture_default_str();
    sub->add_option("--budget", args.opt.budget, "Maximum number of target model calls")
        ->envname("ZPFP_BUDGET")
        ->capture_default_str();
    sub->add_option("--alpha", args.opt.ridge.alpha, "Ridge regularization strength")
        ->envname("ZPFP_ALPHA")
        ->capture_default_str();
    sub->add_option("--temperature", args.temperature, "Chat sampling temperature")
        ->capture_default_str();
    sub->add_option("--max-tokens", args.max_tokens, "Chat completion length limit")
        ->capture_default_str();
    sub->add_option("--timeout", args.timeout_seconds, "HTTP timeout in seconds")
        ->capture_default_str();
    sub->add_option("--noise-sigma", args.noise_sigma,
                    "Wrap the target in Gaussian response noise of this scale")
        ->capture_default_str();
    sub->add_option("--noise-seed", args.noise_seed, "Seed for the response noise")
        ->capture_default_str();
    sub->callback([&args, &action] {
        action = [&args] {
            require_descriptor(args.target, "--target");
            const QuerySet qs = load_query_set(args.queries);
            const std::unique_ptr<Embedder> embedder = make_embedder(args);

            std::unique_ptr<ModelOracle> oracle;
            if (is_stub_descriptor(args.target)) {
                oracle = std::make_unique<LinearStubModel>(
                    LinearStubModel::random(args.dim, stub_descriptor_seed(args.target)));
            } else {
                ChatEndpoint chat;
                chat.base_url = args.target;
                chat.model_id = args.target_model;
                chat.temperature = args.temperature;
                chat.max_tokens = args.max_tokens;
                chat.timeout_seconds = args.timeout_seconds;
                chat.auth_token_env = args.auth_env;
                oracle = std::make_unique<TextModelOracle>(chat, *embedder);
            }
            std::optional<NoiseWrapper> noisy;
            const ModelOracle* effective = oracle.get();
            if (args.noise_sigma > 0.0) {
                noisy.emplace(*oracle, args.noise_sigma, args.noise_seed);
                effective = &*noisy;
            }

            ExtractOptions opt = args.opt;
            opt.created_unix = resolve_created_unix(is_stub_descriptor(args.target));

            std::vector<std::string> warnings;
            const Fingerprint fp = extract_fingerprint(*effective, *embedder, qs, opt, &warnings);
            for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
            save_fingerprint(fp, args.out);
            std::cout << "fingerprint: dim=" << fp.meta.dim << " n=" << fp.meta.n
                      << " m=" << fp.meta.m << " t=" << fp.meta.t << "\n";
            std::cout << "embedder: " << fp.meta.embedder_id << "\n";
            std::cout << "queries-hash: " << fp.meta.query_set_hash << "\n";
            std::cout << "wrote: " << args.out << "\n";
            return 0;
        };
    });
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
    std::string a;
    std::string b;
    double tau = 0.0;
};

void setup_compare(CLI::App& app, SubcommandConfigs& cfg, CompareArgs& args,
                   std::function<int()>& action) {
    CLI::App* sub =
        app.add_subcommand("compare", "Compare two fingerprints against a decision threshold");
    cfg.attach(sub);
    cfg.require(sub->add_option("--a", args.a, "First fingerprint file"));
    cfg.require(sub->add_option("--b", args.b, "Second fingerprint file"));
    cfg.require(
        sub->add_option("--tau", args.tau, "Similarity threshold; flagged means similarity > tau")
            ->envname("ZPFP_TAU"));
    sub->callback([&args, &action] {
        action = [&args] {
            const Fingerprint fa = load_fingerprint(args.a);
            const Fingerprint fb = load_fingerprint(args.b);
            const double sim = fingerprint_similarity(fa, fb);
            const bool flagged = decide(sim, DecisionConfig{args.tau});
            std::cout << "similarity: " << format_double(sim) << "\n";
            std::cout << "tau: " << format_double(args.tau) << "\n";
            std::cout << "verdict: " << (flagged ? "flagged" : "not flagged") << "\n";
            return flagged ? 10 : 0;
        };
    });
}

// ---------------------------------------------------------------------------
// audit

struct AuditArgs {
    std::string dir;
    AuditConfig metrics;
    bool json = false;
};

/// Lineage label: the part of the file stem before the first "__", so
/// "gpt__chat-v2.zpfp" and "gpt__base.zpfp" share the lineage "gpt". A stem
/// without "__" is its own lineage.
std::string lineage_label(const std::string& stem) {
    const std::size_t pos = stem.find("__");
    return pos == std::string::npos ? stem : stem.substr(0, pos);
}

void setup_audit(CLI::App& app, SubcommandConfigs& cfg, AuditArgs& args,
                 std::function<int()>& action) {
    CLI::App* sub = app.add_subcommand(
        "audit", "Audit a directory of fingerprints; lineages come from file-name prefixes");
    cfg.attach(sub);
    cfg.require(sub->add_option("--dir", args.dir,
                                "Directory of .zpfp files named <lineage>__<name>.zpfp"));
    sub->add_option("--fpr-max", args.metrics.fpr_max, "Partial-AUC false-positive cut")
        ->capture_default_str();
    sub->add_option("--fpr", args.metrics.fpr, "Operating point for the TPR metric")
        ->capture_default_str();
    sub->add_flag("--json", args.json, "Emit the report as JSON");
    sub->callback([&args, &action] {
        action = [&args] {
            const std::filesystem::path dir(args.dir);
            if (!std::filesystem::is_directory(dir))
                throw IoError("not a directory: " + args.dir);
            std::vector<std::filesystem::path> files;
            for (const auto& entry : std::filesystem::directory_iterator(dir))
                if (entry.is_regular_file() && entry.path().extension() == ".zpfp")
                    files.push_back(entry.path());
            std::sort(files.begin(), files.end());
            if (files.size() < 2)
                throw DomainError("audit needs at least two .zpfp files in " + args.dir);

            std::vector<Fingerprint> fps;
            std::vector<std::string> names;
            std::vector<std::string> labels;
            for (const std::filesystem::path& f : files) {
                fps.push_back(load_fingerprint(f));
                names.push_back(f.stem().string());
                labels.push_back(lineage_label(f.stem().string()));
            }
            // Map lineage labels to dense ids in first-appearance order.
            std::vector<std::string> seen;
            std::vector<int> lineage;
            for (const std::string& l : labels) {
                const auto it = std::find(seen.begin(), seen.end(), l);
                if (it == seen.end()) {
                    lineage.push_back(static_cast<int>(seen.size()));
                    seen.push_back(l);
                } else {
                    lineage.push_back(static_cast<int>(it - seen.begin()));
                }
            }
            const AuditReport report = audit_fingerprints(fps, lineage, names, args.metrics);
            std::cout << (args.json ? report_json(report) : report_text(report));
            return 0;
        };
    });
}

// ---------------------------------------------------------------------------
// synth-bench

struct SynthBenchArgs {
    BenchConfig cfg;
    bool json = false;
};

void setup_synth_bench(CLI::App& app, SubcommandConfigs& cfg, SynthBenchArgs& args,
                       std::function<int()>& action) {
    CLI::App* sub = app.add_subcommand(
        "synth-bench", "Audit synthetic lineages of linear models end to end");
    cfg.attach(sub);
    sub->add_option("--lineages", args.cfg.num_lineages, "Number of independent lineages")
        ->capture_default_str();
    sub->add_option("--derivatives", args.cfg.num_derivatives, "Derived models per lineage")
        ->capture_default_str();
    sub->add_option("--dim", args.cfg.dim, "Model and embedding dimension")
        ->capture_default_str();
    sub->add_option("--eps", args.cfg.eps, "Derivative perturbation scale")
        ->capture_default_str();
    sub->add_option("--n", args.cfg.n, "Base queries")->capture_default_str();
    sub->add_option("--m", args.cfg.m, "Perturbed variants per base query")
        ->capture_default_str();
    sub->add_option("--t", args.cfg.t, "Repeats per query")->capture_default_str();
    sub->add_option("--alpha", args.cfg.alpha, "Ridge regularization strength")
        ->envname("ZPFP_ALPHA")
        ->capture_default_str();
    sub->add_option("--noise-sigma", args.cfg.noise_sigma, "Response noise scale")
        ->capture_default_str();
    sub->add_option("--seed", args.cfg.seed, "Root seed")
        ->envname("ZPFP_SEED")
        ->capture_default_str();
    sub->add_option("--fpr-max", args.cfg.metrics.fpr_max, "Partial-AUC false-positive cut")
        ->capture_default_str();
    sub->add_option("--fpr", args.cfg.metrics.fpr, "Operating point for the TPR metric")
        ->capture_default_str();
    sub->add_flag("--json", args.json, "Emit the report as JSON");
    sub->callback([&args, &action] {
        action = [&args] {
            const AuditReport report = run_synth_benchmark(args.cfg);
            std::cout << (args.json ? report_json(report) : report_text(report));
            return 0;
        };
    });
}

// ---------------------------------------------------------------------------
// fisher-sim

struct FisherSimArgs {
    std::string activation;  // empty = run the default model suite
    double w = 1.0;
    double k = 0.5;
    double sigma_x = 0.5;
    McOptions mc;
};

void print_retention_report(const RetentionReport& r) {
    std::cout << "model: " << activation_name(r.model.f) << " w=" << format_double(r.model.w, 3)
              << " k=" << format_double(r.model.k, 3)
              << " sigma_x=" << format_double(r.model.sigma_x, 3) << "\n";
    std::cout << "  i_z: " << format_double(r.i_z) << "\n";
    std::cout << "  coefficient: " << format_double(r.coefficient) << "\n";
    std::cout << "  i_d_closed: " << format_double(r.i_d_closed) << "\n";
    std::cout << "  i_y_mc: " << format_double(r.i_y.value) << " +/- "
              << format_double(r.i_y.std_error) << " (samples=" << r.i_y.samples
              << ", step=" << r.i_y.fd_step << ")\n";
    std::cout << "  lower_bound: " << format_double(r.lower_bound) << "\n";
    std::cout << "  retention_inequality: " << (r.inequality_holds ? "holds" : "VIOLATED") << "\n";
    std::cout << "  data_processing_bound: " << (r.dpi_holds ? "holds" : "VIOLATED") << "\n";
    std::cout << "  conclusive: " << (r.mc_conclusive ? "yes" : "no") << "\n";
    if (!r.mc_conclusive)
        std::cout << "  note: standard error above 10% of the estimate; increase --samples\n";
}

void setup_fisher_sim(CLI::App& app, SubcommandConfigs& cfg, FisherSimArgs& args,
                      std::function<int()>& action) {
    CLI::App* sub = app.add_subcommand(
        "fisher-sim", "Verify the information-retention bound by Monte Carlo");
    cfg.attach(sub);
    sub->add_option("--activation", args.activation,
                    "Activation (tanh|softplus|gelu); omit to run the default suite");
    sub->add_option("--w", args.w, "Weight parameter")->capture_default_str();
    sub->add_option("--k", args.k, "Bias parameter")->capture_default_str();
    sub->add_option("--sigma-x", args.sigma_x, "Input standard deviation")
        ->capture_default_str();
    sub->add_option("--samples", args.mc.samples, "Monte Carlo sample count")
        ->envname("ZPFP_SAMPLES")
        ->capture_default_str();
    sub->add_option("--fd-step", args.mc.fd_step,
                    "Finite-difference step; non-positive picks 1e-4*max(1,|w|)");
    sub->add_option("--threads", args.mc.threads, "Worker threads (result is thread-invariant)")
        ->envname("ZPFP_THREADS")
        ->capture_default_str();
    sub->add_option("--seed", args.mc.seed, "Root seed for sampling")
        ->envname("ZPFP_SEED")
        ->capture_default_str();
    sub->callback([&args, &action] {
        action = [&args] {
            std::vector<ScalarModel> models;
            if (args.activation.empty()) {
                models = {
                    ScalarModel{1.0, 0.5, 0.5, Activation::kTanh},
                    ScalarModel{1.3, 0.4, 0.8, Activation::kTanh},
                    ScalarModel{0.8, 0.2, 1.0, Activation::kSoftplus},
                    ScalarModel{1.5, 0.6, 0.7, Activation::kSoftplus},
                };
            } else {
                models = {ScalarModel{args.w, args.k, args.sigma_x,
                                      parse_activation(args.activation)}};
            }
            bool all_hold = true;
            for (const ScalarModel& m : models) {
                const RetentionReport report = verify_retention(m, args.mc);
                print_retention_report(report);
                all_hold = all_hold && report.inequality_holds && report.dpi_holds;
            }
            if (!all_hold) throw TheoryError("a numerical check violated the stated bounds");
            std::cout << "all bounds hold (" << models.size() << " model"
                      << (models.size() == 1 ? "" : "s") << ")\n";
            return 0;
        };
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Black-box model fingerprinting via output-embedding Jacobians"};
    app.require_subcommand(1);

    BuildQueriesArgs build_args;
    FingerprintArgs fp_args;
    CompareArgs cmp_args;
    AuditArgs audit_args;
    SynthBenchArgs bench_args;
    FisherSimArgs fisher_args;
    SubcommandConfigs configs;
    std::function<int()> action;

    setup_build_queries(app, configs, build_args, action);
    setup_fingerprint(app, configs, fp_args, action);
    setup_compare(app, configs, cmp_args, action);
    setup_audit(app, configs, audit_args, action);
    setup_synth_bench(app, configs, bench_args, action);
    setup_fisher_sim(app, configs, fisher_args, action);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (!action) {
        std::cerr << "error: no subcommand selected\n";
        return 2;
    }
    return run_guarded([&] {
        configs.finalize();
        return action();
    });
}
