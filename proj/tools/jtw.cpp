// jtw: command-line front end for training and evaluating the joint
// topic / word-embedding model.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 I/O error,
// 3 training diverged, 4 checkpoint and vocabulary do not match.

#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "jtw/corpus.hpp"
#include "jtw/densemode.hpp"
#include "jtw/errors.hpp"
#include "jtw/eval.hpp"
#include "jtw/inference.hpp"
#include "jtw/io.hpp"
#include "jtw/model.hpp"
#include "jtw/trainer.hpp"

namespace {

using namespace jtw;

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitVocabMismatch = 4;

class VocabMismatch : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Global {
    std::uint64_t seed = 1;
    std::string mode = "bow";
};

struct CorpusArgs {
    std::string corpus;
    std::string stopwords;
    std::size_t window = 10;
};

struct ModelArgs {
    std::string checkpoint;
    std::string vocab;
    std::string vectors;  // dense mode only
};

StopwordSet load_stopwords(const std::string& path) {
    return path.empty() ? default_stopwords() : parse_stopwords(read_file(path));
}

std::vector<std::vector<std::string>> load_documents(const std::string& path, const StopwordSet& stop) {
    std::vector<std::vector<std::string>> docs;
    for (const auto& line : split_lines(read_file(path))) docs.push_back(tokenize(line, stop));
    return docs;
}

void add_corpus_options(CLI::App* cmd, CorpusArgs& a, bool required = true) {
    auto* opt = cmd->add_option("--corpus", a.corpus, "UTF-8 text, one document per line");
    if (required) opt->required();
    cmd->add_option("--stopwords", a.stopwords, "Stopword file, one token per line (default: bundled list)");
    cmd->add_option("--window", a.window, "Context window size (half on each side)")->capture_default_str();
}

void add_model_options(CLI::App* cmd, ModelArgs& a) {
    cmd->add_option("--checkpoint", a.checkpoint, "Trained checkpoint")->required();
    cmd->add_option("--vocab", a.vocab, "Vocabulary TSV used for training")->required();
    cmd->add_option("--vectors", a.vectors, "Pre-trained vectors (word2vec text), dense mode");
}

struct Loaded {
    Checkpoint ckpt;
    Vocabulary vocab;
};

Loaded load_model(const ModelArgs& a, const Global& g, const CLI::App& app) {
    Loaded m;
    m.vocab = Vocabulary::from_tsv(read_file(a.vocab));
    m.ckpt = load_checkpoint(a.checkpoint);
    if (m.ckpt.vocab_hash != m.vocab.hash()) {
        throw VocabMismatch("vocabulary " + a.vocab + " does not match the one " + a.checkpoint +
                            " was trained with");
    }
    if (app.count("--mode") && parse_input_mode(g.mode) != m.ckpt.model.mode) {
        throw ConfigError("--mode " + g.mode + " but the checkpoint was trained in " +
                          std::string(to_string(m.ckpt.model.mode)) + " mode");
    }
    if (m.ckpt.model.mode == InputMode::dense && a.vectors.empty()) {
        throw ConfigError("dense-mode checkpoint: --vectors is required");
    }
    return m;
}

// Instances of the corpus in the checkpoint's input mode.
struct Occurrences {
    Corpus corpus;
    std::vector<DenseInstance> dense;
};

Occurrences load_occurrences(const CorpusArgs& c, const Loaded& m, const std::string& vectors_path) {
    Occurrences o;
    const auto docs = load_documents(c.corpus, load_stopwords(c.stopwords));
    o.corpus = build_corpus(docs, m.vocab, c.window);
    if (m.ckpt.model.mode == InputMode::dense) {
        const auto vectors = load_dense_vectors(vectors_path);
        if (vectors.dim() != m.ckpt.model.dense_dim) {
            throw ConfigError("vectors have dimension " + std::to_string(vectors.dim()) +
                              ", checkpoint expects " + std::to_string(m.ckpt.model.dense_dim));
        }
        o.dense = build_dense_instances(o.corpus, m.vocab, vectors, c.window);
    }
    return o;
}

std::map<std::uint32_t, UniversalEmbedding> universal(const Occurrences& o, const Loaded& m) {
    if (m.ckpt.model.mode == InputMode::dense) return universal_embed(o.dense, m.ckpt.params);
    return universal_embed(o.corpus.instances, m.ckpt.params);
}

void write_output(const std::string& path, const std::string& content) {
    write_file_atomic(path, content);
    std::cerr << "wrote " << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint topic and contextual word-embedding model"};
    app.set_config("--config", "", "TOML/INI file with option defaults (command-line flags win)");
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    Global g;
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--mode", g.mode, "Input representation")
        ->check(CLI::IsMember({"bow", "dense"}))
        ->capture_default_str();

    // build-vocab
    auto* bv = app.add_subcommand("build-vocab", "Build the vocabulary from a corpus");
    CorpusArgs bv_corpus;
    std::size_t bv_size = 8000;
    std::string bv_out;
    add_corpus_options(bv, bv_corpus);
    bv->add_option("--vocab-size", bv_size, "Maximum number of types (V)");
    bv->add_option("--out", bv_out, "Output vocabulary TSV")->required();

    // train
    auto* tr = app.add_subcommand("train", "Train a model");
    CorpusArgs tr_corpus;
    std::string tr_vocab, tr_out, tr_report, tr_vectors;
    ModelConfig mc;
    TrainConfig tc;
    std::string tr_optimizer = "adam";
    std::size_t tr_ckpt_every = 0;
    add_corpus_options(tr, tr_corpus);
    tr->add_option("--vocab", tr_vocab, "Vocabulary TSV")->required();
    tr->add_option("--out", tr_out, "Output checkpoint")->required();
    tr->add_option("--report", tr_report, "Per-epoch CSV report");
    tr->add_option("--vectors", tr_vectors, "Pre-trained vectors (word2vec text), dense mode");
    tr->add_option("--latent-dim", mc.latent_dim, "Latent dimension D");
    tr->add_option("--topics", mc.topics, "Number of topics T");
    tr->add_option("--hidden", mc.hidden, "Encoder hidden width H");
    tr->add_option("--samples", mc.samples, "Noise samples per instance S");
    tr->add_option("--eta0", tc.eta0, "Initial learning rate");
    tr->add_option("--lr-decay", tc.lr_decay, "Per-epoch learning-rate factor");
    tr->add_option("--max-iter", tc.max_iter, "Maximum number of epochs");
    tr->add_option("--batch-size", tc.batch_size, "Minibatch size B");
    tr->add_option("--optimizer", tr_optimizer, "sgd or adam")->check(CLI::IsMember({"sgd", "adam"}));
    tr->add_option("--convergence-tol", tc.convergence_tol, "Relative loss change that counts as converged (0 = off)");
    tr->add_option("--threads", tc.threads, "Worker threads per batch");
    tr->add_option("--checkpoint-every", tr_ckpt_every, "Also write the checkpoint every K epochs (0 = only at the end)");

    // embed
    auto* em = app.add_subcommand("embed", "Export universal word embeddings (word2vec text)");
    ModelArgs em_model;
    CorpusArgs em_corpus;
    std::string em_out;
    add_model_options(em, em_model);
    add_corpus_options(em, em_corpus);
    em->add_option("--out", em_out, "Output file")->required();

    // topics
    auto* tp = app.add_subcommand("topics", "Export the top words of every topic (TSV)");
    ModelArgs tp_model;
    std::size_t tp_k = 10;
    std::string tp_out;
    add_model_options(tp, tp_model);
    tp->add_option("--k", tp_k, "Words per topic");
    tp->add_option("--out", tp_out, "Output file")->required();

    // word-topics
    auto* wt = app.add_subcommand("word-topics", "Export aggregated topic distributions of words (CSV)");
    ModelArgs wt_model;
    CorpusArgs wt_corpus;
    std::vector<std::string> wt_words;
    std::string wt_out;
    add_model_options(wt, wt_model);
    add_corpus_options(wt, wt_corpus);
    wt->add_option("--words", wt_words, "Words to export (default: every word seen as pivot)")->delimiter(',');
    wt->add_option("--out", wt_out, "Output file")->required();

    // sentence-topics
    auto* st = app.add_subcommand("sentence-topics", "Export topic distributions of sentences (CSV)");
    ModelArgs st_model;
    std::string st_sentences, st_stopwords, st_out;
    add_model_options(st, st_model);
    st->add_option("--sentences", st_sentences, "One sentence per line")->required();
    st->add_option("--stopwords", st_stopwords, "Stopword file");
    st->add_option("--out", st_out, "Output file")->required();

    // eval-sim
    auto* es = app.add_subcommand("eval-sim", "Word-similarity benchmarks (Spearman)");
    ModelArgs es_model;
    CorpusArgs es_corpus;
    std::vector<std::string> es_bench;
    std::string es_out;
    add_model_options(es, es_model);
    add_corpus_options(es, es_corpus);
    es->add_option("--benchmark", es_bench, "TSV word1<TAB>word2<TAB>score (repeatable)")->required();
    es->add_option("--out", es_out, "Results CSV")->required();

    // eval-lexsub
    auto* el = app.add_subcommand("eval-lexsub", "Lexical substitution accuracy");
    ModelArgs el_model;
    CorpusArgs el_corpus;
    std::string el_data, el_mode = "contextual", el_out;
    add_model_options(el, el_model);
    add_corpus_options(el, el_corpus, false);
    el->add_option("--data", el_data, "Lexsub instances file")->required();
    el->add_option("--lexsub-mode", el_mode, "contextual or baladd")
        ->check(CLI::IsMember({"contextual", "baladd"}));
    el->add_option("--out", el_out, "Results CSV")->required();

    // eval-coherence
    auto* ec = app.add_subcommand("eval-coherence", "NPMI topic coherence");
    ModelArgs ec_model;
    CorpusArgs ec_corpus;
    std::size_t ec_k = 10, ec_window = kCoherenceWindow;
    std::string ec_out;
    add_model_options(ec, ec_model);
    add_corpus_options(ec, ec_corpus);
    ec->add_option("--k", ec_k, "Top words per topic");
    ec->add_option("--coherence-window", ec_window, "Sliding window for co-occurrence counts");
    ec->add_option("--out", ec_out, "Results CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    {
        // Echo globals plus the chosen subcommand's options.
        const std::string prefix = app.get_subcommands().front()->get_name() + ".";
        std::istringstream all(app.config_to_str(true, false));
        std::cerr << "# resolved configuration\n";
        for (std::string line; std::getline(all, line);) {
            const auto eq = line.find('=');
            const auto dot = line.find('.');
            if (line.rfind(prefix, 0) == 0 || dot == std::string::npos || dot > eq) std::cerr << line << "\n";
        }
    }

    try {
        if (*bv) {
            const auto docs = load_documents(bv_corpus.corpus, load_stopwords(bv_corpus.stopwords));
            const auto vocab = Vocabulary::build(docs, bv_size, load_stopwords(bv_corpus.stopwords));
            write_output(bv_out, vocab.to_tsv());
            std::cerr << "vocabulary: " << vocab.size() << " types from " << docs.size() << " documents\n";
        } else if (*tr) {
            const auto vocab = Vocabulary::from_tsv(read_file(tr_vocab));
            const auto docs = load_documents(tr_corpus.corpus, load_stopwords(tr_corpus.stopwords));
            const auto corpus = build_corpus(docs, vocab, tr_corpus.window);
            mc.vocab_size = vocab.size();
            mc.mode = parse_input_mode(g.mode);
            tc.seed = g.seed;
            tc.optimizer = parse_optimizer(tr_optimizer);
            std::cerr << "corpus: " << corpus.stats.n_documents << " documents, "
                      << corpus.stats.n_tokens << " tokens, " << corpus.stats.n_instances
                      << " instances\n";

            Checkpoint ckpt{mc, {}, vocab.hash(), g.seed};
            auto on_epoch = [&](const EpochStats& s, const ParamSet& params) {
                std::cerr << "epoch " << s.epoch << " loss " << s.loss << " kl " << s.kl << " lr "
                          << s.lr << " (" << s.seconds << " s)\n";
                if (tr_ckpt_every > 0 && (s.epoch + 1) % tr_ckpt_every == 0) {
                    ckpt.params = params;
                    save_checkpoint(tr_out, ckpt);
                }
            };
            TrainResult result;
            try {
                if (mc.mode == InputMode::dense) {
                    if (tr_vectors.empty()) throw ConfigError("--mode dense requires --vectors");
                    const auto vectors = load_dense_vectors(tr_vectors);
                    ckpt.model.dense_dim = mc.dense_dim = vectors.dim();
                    const auto dense = build_dense_instances(corpus, vocab, vectors, tr_corpus.window);
                    std::cerr << "dense instances: " << dense.size() << "\n";
                    result = train_dense(dense, mc, tc, on_epoch);
                } else {
                    result = train(corpus.instances, mc, tc, on_epoch);
                }
            } catch (const TrainingDiverged& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitDiverged;
            }
            ckpt.params = std::move(result.params);
            save_checkpoint(tr_out, ckpt);
            std::cerr << "wrote " << tr_out << (result.report.converged ? " (converged)" : "") << "\n";
            if (!tr_report.empty()) write_output(tr_report, result.report.to_csv());
        } else if (*em) {
            const auto m = load_model(em_model, g, app);
            const auto occ = load_occurrences(em_corpus, m, em_model.vectors);
            write_output(em_out, to_word2vec_text(embedding_table(universal(occ, m), m.vocab)));
        } else if (*tp) {
            const auto m = load_model(tp_model, g, app);
            if (m.ckpt.model.mode == InputMode::dense) {
                throw ConfigError("topics: dense-mode topic rows live in vector space, not over words");
            }
            write_output(tp_out, topic_table_tsv(topic_top_words(m.ckpt.params, tp_k), m.vocab));
        } else if (*wt) {
            const auto m = load_model(wt_model, g, app);
            const auto occ = load_occurrences(wt_corpus, m, wt_model.vectors);
            const auto dists = m.ckpt.model.mode == InputMode::dense
                                   ? word_topic_distributions(occ.dense, m.ckpt.params)
                                   : word_topic_distributions(occ.corpus.instances, m.ckpt.params);
            std::vector<std::string> labels;
            std::vector<std::vector<double>> rows;
            if (wt_words.empty()) {
                for (const auto& [id, d] : dists) {
                    labels.push_back(m.vocab.token(id));
                    rows.push_back(d.zeta);
                }
            } else {
                for (const auto& w : wt_words) {
                    const auto id = m.vocab.id(normalize_token(w));
                    const auto it = dists.find(id);
                    if (it == dists.end()) throw ConfigError("word '" + w + "' never occurs in the corpus");
                    labels.push_back(w);
                    rows.push_back(it->second.zeta);
                }
            }
            write_output(wt_out, distribution_csv(labels, rows));
        } else if (*st) {
            const auto m = load_model(st_model, g, app);
            if (m.ckpt.model.mode == InputMode::dense) {
                throw ConfigError("sentence-topics needs a bag-of-words checkpoint");
            }
            const auto stop = load_stopwords(st_stopwords);
            std::vector<std::string> labels;
            std::vector<std::vector<double>> rows;
            for (const auto& line : split_lines(read_file(st_sentences))) {
                if (line.empty()) continue;
                labels.push_back(line);
                rows.push_back(sentence_topic_distribution(tokenize(line, stop), m.vocab, m.ckpt.params).zeta);
            }
            write_output(st_out, distribution_csv(labels, rows));
        } else if (*es) {
            const auto m = load_model(es_model, g, app);
            const auto occ = load_occurrences(es_corpus, m, es_model.vectors);
            const auto vectors = word_vectors(embedding_table(universal(occ, m), m.vocab));
            std::string out = "benchmark,rho,covered,total,coverage\n";
            for (const auto& path : es_bench) {
                const auto bench = parse_sim_benchmark(read_file(path), std::filesystem::path(path).stem().string());
                const auto r = eval_word_similarity(bench, vectors);
                out += csv_escape(bench.name) + "," + format_double(r.rho) + "," + std::to_string(r.covered) +
                       "," + std::to_string(r.total) + "," + format_double(r.coverage()) + "\n";
                std::cerr << bench.name << ": rho " << r.rho << " on " << r.covered << "/" << r.total << " pairs\n";
            }
            write_output(es_out, out);
        } else if (*el) {
            const auto m = load_model(el_model, g, app);
            if (m.ckpt.model.mode == InputMode::dense) {
                throw ConfigError("eval-lexsub needs a bag-of-words checkpoint");
            }
            LexsubOptions opt;
            opt.mode = parse_lexsub_mode(el_mode);
            opt.window = el_corpus.window;
            std::optional<WordVectors> uv;
            if (opt.mode == LexsubMode::baladd) {
                if (el_corpus.corpus.empty()) throw ConfigError("baladd mode needs --corpus for universal vectors");
                const auto occ = load_occurrences(el_corpus, m, el_model.vectors);
                uv = word_vectors(embedding_table(universal(occ, m), m.vocab));
            }
            const auto data = parse_lexsub(read_file(el_data));
            const auto r = eval_lexsub(data, m.ckpt.params, m.vocab, opt, uv ? &*uv : nullptr);
            std::string out = "dataset,mode,accuracy,hits,evaluated,excluded,skipped_candidates\n";
            out += csv_escape(std::filesystem::path(el_data).stem().string()) + "," + el_mode + "," +
                   format_double(r.accuracy()) + "," + std::to_string(r.hits) + "," +
                   std::to_string(r.evaluated) + "," + std::to_string(r.excluded) + "," +
                   std::to_string(r.skipped_candidates) + "\n";
            std::cerr << "lexsub accuracy " << r.accuracy() << " (" << r.hits << "/" << r.evaluated
                      << ", excluded " << r.excluded << ")\n";
            write_output(el_out, out);
        } else if (*ec) {
            const auto m = load_model(ec_model, g, app);
            if (m.ckpt.model.mode == InputMode::dense) {
                throw ConfigError("eval-coherence needs a bag-of-words checkpoint");
            }
            const auto docs = load_documents(ec_corpus.corpus, load_stopwords(ec_corpus.stopwords));
            const auto corpus = build_corpus(docs, m.vocab, ec_corpus.window);
            std::vector<std::vector<std::uint32_t>> words;
            for (const auto& topic : topic_top_words(m.ckpt.params, ec_k)) {
                words.emplace_back();
                for (const auto& w : topic) words.back().push_back(w.id);
            }
            const auto r = npmi_coherence(words, corpus.documents, ec_window);
            std::string out = "topic,coherence\n";
            for (std::size_t t = 0; t < r.per_topic.size(); ++t)
                out += std::to_string(t) + "," + format_double(r.per_topic[t]) + "\n";
            out += "mean," + format_double(r.mean) + "\n";
            for (auto id : r.absent_words)
                std::cerr << "warning: '" << m.vocab.token(id) << "' never occurs in the reference corpus\n";
            std::cerr << "mean coherence " << r.mean << "\n";
            write_output(ec_out, out);
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const VocabMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitVocabMismatch;
    } catch (const TrainingDiverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return 0;
}
