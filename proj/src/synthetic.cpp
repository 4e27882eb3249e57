#include "jtw/synthetic.hpp"

#include <random>

#include "jtw/errors.hpp"

namespace jtw {

SyntheticCorpus generate_synthetic(const SyntheticConfig& config) {
    if (config.topics == 0 || config.words_per_topic == 0 || config.doc_length == 0) {
        throw ConfigError("synthetic: topics, words_per_topic and doc_length must be >= 1");
    }
    for (std::size_t t : config.shared_topics) {
        if (t >= config.topics) throw ConfigError("synthetic: shared topic out of range");
    }
    if (config.shared_rate < 0.0 || config.shared_rate > 1.0) {
        throw ConfigError("synthetic: shared_rate must be in [0, 1]");
    }

    SyntheticCorpus out;
    out.topic_words.resize(config.topics);
    for (std::size_t t = 0; t < config.topics; ++t) {
        for (std::size_t j = 0; j < config.words_per_topic; ++j) {
            auto w = "t" + std::to_string(t) + "w" + std::to_string(j);
            out.word_topic[w] = t;
            out.topic_words[t].push_back(std::move(w));
        }
    }
    std::vector<bool> shares(config.topics, false);
    if (!config.shared_word.empty())
        for (std::size_t t : config.shared_topics) shares[t] = true;

    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<std::size_t> pick_topic(0, config.topics - 1);
    std::uniform_int_distribution<std::size_t> pick_word(0, config.words_per_topic - 1);
    std::bernoulli_distribution replace(config.shared_rate);
    for (std::size_t d = 0; d < config.documents; ++d) {
        const std::size_t t = pick_topic(rng);
        std::vector<std::string> doc;
        doc.reserve(config.doc_length);
        for (std::size_t i = 0; i < config.doc_length; ++i) {
            if (shares[t] && replace(rng)) {
                doc.push_back(config.shared_word);
            } else {
                doc.push_back(out.topic_words[t][pick_word(rng)]);
            }
        }
        out.documents.push_back(std::move(doc));
        out.doc_topic.push_back(t);
    }
    return out;
}

std::string synthetic_text(const SyntheticCorpus& corpus) {
    std::string out;
    for (const auto& doc : corpus.documents) {
        for (std::size_t i = 0; i < doc.size(); ++i) {
            if (i) out += ' ';
            out += doc[i];
        }
        out += '\n';
    }
    return out;
}

}  // namespace jtw
