#include "jtw/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>

#include "jtw/errors.hpp"
#include "stopwords_data.hpp"

namespace jtw {

namespace {

bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(unsigned char c) {
    return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
           (c >= 123 && c <= 126);
}

}  // namespace

StopwordSet parse_stopwords(std::string_view text) {
    StopwordSet out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        while (!line.empty() && is_ascii_space(line.back())) line.remove_suffix(1);
        while (!line.empty() && is_ascii_space(line.front())) line.remove_prefix(1);
        if (!line.empty() && line.front() != '#') {
            std::string w(line);
            std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) {
                return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
            });
            out.insert(std::move(w));
        }
        start = end + 1;
    }
    return out;
}

const StopwordSet& default_stopwords() {
    static const StopwordSet words = parse_stopwords(detail::kStopwordsEn);
    return words;
}

std::vector<std::string> tokenize(std::string_view document, const StopwordSet& stopwords) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (!current.empty() && !stopwords.contains(current)) out.push_back(current);
        current.clear();
    };
    for (char ch : document) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_ascii_space(ch)) {
            flush();
        } else if (is_ascii_punct(c)) {
            continue;
        } else if (c >= 'A' && c <= 'Z') {
            current.push_back(static_cast<char>(c - 'A' + 'a'));
        } else {
            current.push_back(ch);
        }
    }
    flush();
    return out;
}

std::string normalize_token(std::string_view token) {
    std::string out;
    for (char ch : token) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_ascii_punct(c)) continue;
        out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    }
    return out;
}

// ---------------------------------------------------------------- Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> frequencies)
    : id_to_token_(std::move(tokens)), frequency_(std::move(frequencies)) {
    if (id_to_token_.size() != frequency_.size()) {
        throw ConfigError("vocabulary: token and frequency counts differ");
    }
    token_to_id_.reserve(id_to_token_.size());
    for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
        if (!token_to_id_.emplace(id_to_token_[i], static_cast<std::uint32_t>(i)).second) {
            throw ConfigError("vocabulary: duplicate token '" + id_to_token_[i] + "'");
        }
    }
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> documents,
                             std::size_t max_size, const StopwordSet& stopwords) {
    if (max_size < 1) throw ConfigError("vocabulary size must be >= 1");
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& doc : documents)
        for (const auto& tok : doc)
            if (!stopwords.contains(tok)) ++counts[tok];

    std::vector<std::pair<std::string, std::uint64_t>> entries(counts.begin(), counts.end());
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (entries.size() > max_size) entries.resize(max_size);

    std::vector<std::string> tokens;
    std::vector<std::uint64_t> freqs;
    tokens.reserve(entries.size());
    freqs.reserve(entries.size());
    for (auto& [tok, n] : entries) {
        tokens.push_back(std::move(tok));
        freqs.push_back(n);
    }
    return Vocabulary(std::move(tokens), std::move(freqs));
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view token) const {
    auto it = token_to_id_.find(std::string(token));
    if (it == token_to_id_.end()) return std::nullopt;
    return it->second;
}

std::uint32_t Vocabulary::id(std::string_view token) const {
    if (auto id = find(token)) return *id;
    throw OovError(std::string(token));
}

std::vector<std::uint32_t> Vocabulary::map(std::span<const std::string> tokens) const {
    std::vector<std::uint32_t> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens)
        if (auto id = find(t)) ids.push_back(*id);
    return ids;
}

std::string Vocabulary::to_tsv() const {
    std::string out;
    for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
        out += id_to_token_[i];
        out += '\t';
        out += std::to_string(i);
        out += '\t';
        out += std::to_string(frequency_[i]);
        out += '\n';
    }
    return out;
}

Vocabulary Vocabulary::from_tsv(std::string_view text) {
    std::vector<std::string> tokens;
    std::vector<std::uint64_t> freqs;
    std::size_t start = 0, line_no = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string_view::npos) {
            throw ConfigError("vocabulary line " + std::to_string(line_no) +
                              ": expected token<TAB>id<TAB>frequency");
        }
        std::uint64_t id = 0, freq = 0;
        const auto id_sv = line.substr(t1 + 1, t2 - t1 - 1);
        const auto fq_sv = line.substr(t2 + 1);
        auto r1 = std::from_chars(id_sv.data(), id_sv.data() + id_sv.size(), id);
        auto r2 = std::from_chars(fq_sv.data(), fq_sv.data() + fq_sv.size(), freq);
        if (r1.ec != std::errc{} || r2.ec != std::errc{} || r1.ptr != id_sv.data() + id_sv.size() ||
            r2.ptr != fq_sv.data() + fq_sv.size()) {
            throw ConfigError("vocabulary line " + std::to_string(line_no) + ": bad number");
        }
        if (id != tokens.size()) {
            throw ConfigError("vocabulary line " + std::to_string(line_no) +
                              ": ids must be dense and sorted");
        }
        tokens.emplace_back(line.substr(0, t1));
        freqs.push_back(freq);
    }
    return Vocabulary(std::move(tokens), std::move(freqs));
}

std::uint64_t Vocabulary::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : to_tsv()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// ---------------------------------------------------------------- windows

std::uint32_t TrainingInstance::context_size() const noexcept {
    std::uint32_t c = 0;
    for (const auto& cc : context) c += cc.count;
    return c;
}

std::vector<ContextCount> make_bow(std::span<const std::uint32_t> ids) {
    std::vector<std::uint32_t> sorted(ids.begin(), ids.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<ContextCount> bow;
    for (std::uint32_t id : sorted) {
        if (!bow.empty() && bow.back().id == id)
            ++bow.back().count;
        else
            bow.push_back({id, 1});
    }
    return bow;
}

std::vector<TrainingInstance> extract_windows(std::span<const std::uint32_t> doc,
                                              std::size_t window_size, std::uint32_t doc_index) {
    const std::size_t half = window_size / 2;
    std::vector<TrainingInstance> out;
    out.reserve(doc.size());
    std::vector<std::uint32_t> ctx;
    for (std::size_t n = 0; n < doc.size(); ++n) {
        const std::size_t lo = n >= half ? n - half : 0;
        const std::size_t hi = std::min(doc.size(), n + half + 1);
        ctx.clear();
        for (std::size_t k = lo; k < hi; ++k)
            if (k != n) ctx.push_back(doc[k]);
        TrainingInstance inst;
        inst.pivot = doc[n];
        inst.context = make_bow(ctx);
        inst.doc = doc_index;
        inst.position = static_cast<std::uint32_t>(n);
        out.push_back(std::move(inst));
    }
    return out;
}

Corpus build_corpus(std::span<const std::vector<std::string>> tokenized, const Vocabulary& vocab,
                    std::size_t window_size) {
    Corpus corpus;
    corpus.documents.reserve(tokenized.size());
    for (std::size_t d = 0; d < tokenized.size(); ++d) {
        auto ids = vocab.map(tokenized[d]);
        auto inst = extract_windows(ids, window_size, static_cast<std::uint32_t>(d));
        corpus.stats.n_tokens += ids.size();
        corpus.instances.insert(corpus.instances.end(), std::make_move_iterator(inst.begin()),
                                std::make_move_iterator(inst.end()));
        corpus.documents.push_back(std::move(ids));
    }
    corpus.stats.n_documents = tokenized.size();
    corpus.stats.n_instances = corpus.instances.size();
    return corpus;
}

// ---------------------------------------------------------------- batches

MinibatchStream::MinibatchStream(std::size_t n_instances, std::size_t batch_size,
                                 std::uint64_t seed)
    : batch_size_(batch_size), seed_(seed), order_(n_instances) {
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    cursor_ = order_.size();
}

void MinibatchStream::start_epoch(std::size_t epoch) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(epoch), 0x5eedU};
    std::mt19937_64 rng(seq);
    std::shuffle(order_.begin(), order_.end(), rng);
    cursor_ = 0;
}

std::span<const std::size_t> MinibatchStream::next() {
    if (cursor_ >= order_.size()) return {};
    const std::size_t len = std::min(batch_size_, order_.size() - cursor_);
    std::span<const std::size_t> batch(order_.data() + cursor_, len);
    cursor_ += len;
    return batch;
}

std::size_t MinibatchStream::batches_per_epoch() const noexcept {
    return (order_.size() + batch_size_ - 1) / batch_size_;
}

}  // namespace jtw
