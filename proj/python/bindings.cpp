// Python bindings for the bag-of-words model, training, inference and the
// evaluation utilities.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "jtw/corpus.hpp"
#include "jtw/densemode.hpp"
#include "jtw/errors.hpp"
#include "jtw/eval.hpp"
#include "jtw/inference.hpp"
#include "jtw/io.hpp"
#include "jtw/model.hpp"
#include "jtw/synthetic.hpp"
#include "jtw/trainer.hpp"

namespace py = pybind11;
using namespace jtw;

namespace {

StopwordSet stopwords_or_default(const std::optional<std::vector<std::string>>& words) {
    if (!words) return default_stopwords();
    return StopwordSet(words->begin(), words->end());
}

py::dict embedding_dict(const ContextualEmbedding& e) {
    py::dict d;
    d["mu"] = e.posterior.mu;
    d["sigma"] = e.posterior.sigma;
    d["zeta"] = e.topics.zeta;
    return d;
}

// A trained (or freshly initialized) bag-of-words model with its vocabulary.
struct Model {
    ModelConfig config;
    ParamSet params;
    Vocabulary vocab;
    std::uint64_t seed = 0;

    Corpus corpus_of(const std::vector<std::vector<std::string>>& docs, std::size_t window) const {
        return build_corpus(docs, vocab, window);
    }
};

Model train_model(const std::vector<std::vector<std::string>>& docs, const Vocabulary& vocab,
                  ModelConfig config, const TrainConfig& tc, std::size_t window,
                  const EpochCallback& on_epoch) {
    config.vocab_size = vocab.size();
    config.mode = InputMode::bow;
    const auto corpus = build_corpus(docs, vocab, window);
    TrainResult r;
    {
        py::gil_scoped_release release;
        r = train(corpus.instances, config, tc,
                  on_epoch ? EpochCallback([&](const EpochStats& s, const ParamSet& p) {
                      py::gil_scoped_acquire acquire;
                      on_epoch(s, p);
                  })
                           : EpochCallback{});
    }
    return Model{config, std::move(r.params), vocab, tc.seed};
}

}  // namespace

PYBIND11_MODULE(_jtw, m) {
    m.doc() = "Joint topic and contextual word-embedding model";

    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<OovError>(m, "OovError", PyExc_KeyError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<TrainingDiverged>(m, "TrainingDiverged", PyExc_ArithmeticError);

    // ---------------------------------------------------------------- corpus
    m.def("default_stopwords", [] {
        std::vector<std::string> v(default_stopwords().begin(), default_stopwords().end());
        std::sort(v.begin(), v.end());
        return v;
    });
    m.def("tokenize", [](const std::string& text, const std::optional<std::vector<std::string>>& stop) {
        return tokenize(text, stopwords_or_default(stop));
    }, py::arg("text"), py::arg("stopwords") = py::none());

    py::class_<Vocabulary>(m, "Vocabulary")
        .def_static("build", [](const std::vector<std::vector<std::string>>& docs, std::size_t size) {
            return Vocabulary::build(docs, size);
        }, py::arg("documents"), py::arg("max_size") = 8000)
        .def_static("from_tsv", &Vocabulary::from_tsv)
        .def("to_tsv", &Vocabulary::to_tsv)
        .def("hash", &Vocabulary::hash)
        .def("id", &Vocabulary::id)
        .def("token", &Vocabulary::token)
        .def("tokens", &Vocabulary::tokens)
        .def("__len__", &Vocabulary::size)
        .def("__contains__", [](const Vocabulary& v, const std::string& t) { return v.find(t).has_value(); });

    // ---------------------------------------------------------------- configs
    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("latent_dim", &ModelConfig::latent_dim)
        .def_readwrite("topics", &ModelConfig::topics)
        .def_readwrite("hidden", &ModelConfig::hidden)
        .def_readwrite("samples", &ModelConfig::samples)
        .def_readonly("vocab_size", &ModelConfig::vocab_size);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("eta0", &TrainConfig::eta0)
        .def_readwrite("lr_decay", &TrainConfig::lr_decay)
        .def_readwrite("max_iter", &TrainConfig::max_iter)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("convergence_tol", &TrainConfig::convergence_tol)
        .def_readwrite("threads", &TrainConfig::threads)
        .def_property("optimizer",
                      [](const TrainConfig& c) { return std::string(to_string(c.optimizer)); },
                      [](TrainConfig& c, const std::string& s) { c.optimizer = parse_optimizer(s); });
    m.def("learning_rate", &learning_rate, py::arg("config"), py::arg("epoch"));

    py::class_<EpochStats>(m, "EpochStats")
        .def_readonly("epoch", &EpochStats::epoch)
        .def_readonly("loss", &EpochStats::loss)
        .def_readonly("kl", &EpochStats::kl)
        .def_readonly("recon", &EpochStats::recon)
        .def_readonly("lr", &EpochStats::lr)
        .def_readonly("seconds", &EpochStats::seconds);

    // ---------------------------------------------------------------- model
    py::class_<Model>(m, "Model")
        .def_static("train",
                    [](const std::vector<std::vector<std::string>>& docs, const Vocabulary& vocab,
                       const ModelConfig& config, const TrainConfig& tc, std::size_t window,
                       const std::function<void(const EpochStats&)>& on_epoch) {
                        EpochCallback cb;
                        if (on_epoch) cb = [on_epoch](const EpochStats& s, const ParamSet&) { on_epoch(s); };
                        return train_model(docs, vocab, config, tc, window, cb);
                    },
                    py::arg("documents"), py::arg("vocab"), py::arg("config") = ModelConfig{},
                    py::arg("train_config") = TrainConfig{}, py::arg("window") = 10,
                    py::arg("on_epoch") = nullptr)
        .def_static("load", [](const std::filesystem::path& path, const Vocabulary& vocab) {
            auto ckpt = load_checkpoint(path);
            if (ckpt.vocab_hash != vocab.hash()) throw ConfigError("vocabulary does not match the checkpoint");
            if (ckpt.model.mode != InputMode::bow) throw ConfigError("only bag-of-words checkpoints are supported");
            return Model{ckpt.model, std::move(ckpt.params), vocab, ckpt.seed};
        }, py::arg("path"), py::arg("vocab"))
        .def("save", [](const Model& self, const std::filesystem::path& path) {
            save_checkpoint(path, {self.config, self.params, self.vocab.hash(), self.seed});
        })
        .def("checkpoint_bytes", [](const Model& self) {
            return py::bytes(serialize_checkpoint({self.config, self.params, self.vocab.hash(), self.seed}));
        })
        .def("param_names", [](const Model& self) {
            std::vector<std::string> names;
            for (const auto& e : self.params) names.push_back(e.name);
            return names;
        })
        .def("get_param", [](const Model& self, const std::string& name) {
            const Tensor& t = self.params[name];
            return std::make_pair(t.shape(), std::vector<double>(t.values().begin(), t.values().end()));
        }, "(shape, row-major values) of a parameter tensor")
        .def("set_param", [](Model& self, const std::string& name, const std::vector<double>& values) {
            Tensor& t = self.params[name];
            if (values.size() != t.size()) throw ConfigError("set_param: expected " + std::to_string(t.size()) + " values");
            std::copy(values.begin(), values.end(), t.values().begin());
        })
        .def_readonly("config", &Model::config)
        .def_readonly("vocab", &Model::vocab)
        .def("contextual_embed", [](const Model& self, const std::string& pivot,
                                    const std::vector<std::string>& context) {
            return embedding_dict(contextual_embed(normalize_token(pivot), context, self.vocab, self.params));
        }, py::arg("pivot"), py::arg("context"))
        .def("universal_embeddings", [](const Model& self, const std::vector<std::vector<std::string>>& docs,
                                        std::size_t window) {
            const auto corpus = self.corpus_of(docs, window);
            std::map<std::string, std::vector<double>> out;
            for (const auto& [id, u] : universal_embed(corpus.instances, self.params))
                out[self.vocab.token(id)] = u.mean;
            return out;
        }, py::arg("documents"), py::arg("window") = 10)
        .def("word_topics", [](const Model& self, const std::vector<std::vector<std::string>>& docs,
                               std::size_t window) {
            const auto corpus = self.corpus_of(docs, window);
            std::map<std::string, std::vector<double>> out;
            for (const auto& [id, d] : word_topic_distributions(corpus.instances, self.params))
                out[self.vocab.token(id)] = d.zeta;
            return out;
        }, py::arg("documents"), py::arg("window") = 10)
        .def("sentence_topics", [](const Model& self, const std::vector<std::string>& tokens) {
            return sentence_topic_distribution(tokens, self.vocab, self.params).zeta;
        })
        .def("topics", [](const Model& self, std::size_t k) {
            std::vector<std::vector<std::pair<std::string, double>>> out;
            for (const auto& topic : topic_top_words(self.params, k)) {
                out.emplace_back();
                for (const auto& w : topic) out.back().emplace_back(self.vocab.token(w.id), w.prob);
            }
            return out;
        }, py::arg("k") = 10)
        .def("coherence", [](const Model& self, const std::vector<std::vector<std::string>>& reference,
                             std::size_t k, std::size_t window) {
            std::vector<std::vector<std::uint32_t>> words, docs;
            for (const auto& topic : topic_top_words(self.params, k)) {
                words.emplace_back();
                for (const auto& w : topic) words.back().push_back(w.id);
            }
            for (const auto& d : reference) docs.push_back(self.vocab.map(d));
            const auto r = npmi_coherence(words, docs, window);
            return std::make_pair(r.per_topic, r.mean);
        }, py::arg("reference"), py::arg("k") = 10, py::arg("window") = kCoherenceWindow);

    // ---------------------------------------------------------------- evaluation
    m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return spearman(x, y); });
    m.def("npmi", &npmi, py::arg("n_a"), py::arg("n_b"), py::arg("n_ab"), py::arg("windows"));
    m.def("baladd", [](const std::vector<double>& x, const std::vector<double>& y,
                       const std::vector<std::vector<double>>& ctx) { return baladd(x, y, ctx); });
    m.def("cos_half_angle", [](const std::vector<double>& u, const std::vector<double>& v) {
        return cos_half_angle(u, v);
    });
    m.def("kl_to_prior", [](const std::vector<double>& mu, const std::vector<double>& sigma) {
        return kl_to_prior({mu, sigma});
    }, py::arg("mu"), py::arg("sigma"));

    // ---------------------------------------------------------------- synthetic data
    m.def("generate_synthetic", [](std::size_t topics, std::size_t words_per_topic, std::size_t documents,
                                   std::size_t doc_length, std::uint64_t seed, const std::string& shared_word,
                                   const std::vector<std::size_t>& shared_topics, double shared_rate) {
        SyntheticConfig c{topics, words_per_topic, documents, doc_length, seed, shared_word, shared_topics,
                          shared_rate};
        const auto s = generate_synthetic(c);
        return std::make_pair(s.documents, s.doc_topic);
    }, py::arg("topics") = 3, py::arg("words_per_topic") = 30, py::arg("documents") = 5000,
       py::arg("doc_length") = 40, py::arg("seed") = 7, py::arg("shared_word") = "",
       py::arg("shared_topics") = std::vector<std::size_t>{}, py::arg("shared_rate") = 0.05);
}
