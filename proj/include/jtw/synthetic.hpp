#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace jtw {

// Documents drawn from topics with disjoint word lists. Each document picks
// one topic uniformly and samples its tokens uniformly from that topic's words.
struct SyntheticConfig {
    std::size_t topics = 3;
    std::size_t words_per_topic = 30;
    std::size_t documents = 5000;
    std::size_t doc_length = 40;
    std::uint64_t seed = 7;
    // Optional word shared by several topics. In a document of one of these
    // topics, each token is replaced by it with probability `shared_rate`.
    std::string shared_word;
    std::vector<std::size_t> shared_topics;
    double shared_rate = 0.05;
};

struct SyntheticCorpus {
    std::vector<std::vector<std::string>> documents;
    std::vector<std::size_t> doc_topic;
    std::vector<std::vector<std::string>> topic_words;
    std::unordered_map<std::string, std::size_t> word_topic;  // shared word excluded
};

// Word j of topic t is named "t<t>w<j>".
SyntheticCorpus generate_synthetic(const SyntheticConfig& config);

// One space-separated document per line.
std::string synthetic_text(const SyntheticCorpus& corpus);

}  // namespace jtw
