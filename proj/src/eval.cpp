#include "jtw/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jtw/errors.hpp"
#include "jtw/inference.hpp"

namespace jtw {

// ------------------------------------------------------------ rank statistics

std::vector<double> average_ranks(std::span<const double> xs) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ConfigError("spearman: inputs differ in length");
    if (xs.size() < 2) throw ConfigError("spearman: need at least two pairs");
    const auto rx = average_ranks(xs), ry = average_ranks(ys);
    const double n = static_cast<double>(xs.size());
    const double mean = (n + 1.0) / 2.0;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double a = rx[i] - mean, b = ry[i] - mean;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (sxx == 0.0 || syy == 0.0) throw ConfigError("spearman: zero rank variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ------------------------------------------------------------ word similarity

WordVectors word_vectors(const EmbeddingTable& table) {
    WordVectors out;
    for (std::size_t i = 0; i < table.words.size(); ++i) out[table.words[i]] = table.vectors[i];
    return out;
}

SimBenchmark parse_sim_benchmark(std::string_view tsv, std::string name) {
    SimBenchmark bench;
    bench.name = std::move(name);
    const auto lines = split_lines(tsv);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = split(lines[i], '\t');
        if (f.size() != 3) {
            throw ConfigError(bench.name + " line " + std::to_string(i + 1) +
                              ": expected word1<TAB>word2<TAB>score");
        }
        bench.pairs.push_back({normalize_token(f[0]), normalize_token(f[1]), parse_double(f[2])});
    }
    return bench;
}

SimResult eval_word_similarity(const SimBenchmark& bench, const WordVectors& vectors) {
    SimResult result;
    result.total = bench.pairs.size();
    std::vector<double> model, gold;
    for (const auto& p : bench.pairs) {
        auto a = vectors.find(p.word1), b = vectors.find(p.word2);
        if (a == vectors.end() || b == vectors.end()) continue;
        model.push_back(cosine_similarity(a->second, b->second));
        gold.push_back(p.gold);
    }
    result.covered = model.size();
    if (result.covered == 0) throw ConfigError(bench.name + ": no pair is covered by the embeddings");
    result.rho = spearman(model, gold);
    return result;
}

// ------------------------------------------------------------ lexical substitution

double baladd(std::span<const double> x, std::span<const double> y,
              std::span<const std::vector<double>> context) {
    if (context.empty()) throw ConfigError("baladd: empty context");
    const double C = static_cast<double>(context.size());
    double acc = C * cosine_similarity(y, x);
    for (const auto& w : context) acc += cosine_similarity(y, w);
    return acc / (2.0 * C);
}

std::vector<LexsubInstance> parse_lexsub(std::string_view text) {
    std::vector<LexsubInstance> out;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto where = "lexsub line " + std::to_string(i + 1) + ": ";
        const auto f = split(lines[i], '\t');
        if (f.size() != 5) throw ConfigError(where + "expected 5 tab-separated fields");
        LexsubInstance x;
        x.target = normalize_token(f[0]);
        try {
            x.position = std::stoul(f[1]);
        } catch (const std::exception&) {
            throw ConfigError(where + "bad position '" + f[1] + "'");
        }
        for (const auto& t : split(f[2], ' ')) {
            if (!t.empty()) x.sentence.push_back(normalize_token(t));
        }
        if (x.position >= x.sentence.size()) throw ConfigError(where + "position out of range");
        auto list = [](const std::string& field) {
            std::vector<std::string> words;
            for (const auto& w : split(field, ',')) {
                auto n = normalize_token(w);
                if (!n.empty()) words.push_back(std::move(n));
            }
            return words;
        };
        x.candidates = list(f[3]);
        x.gold = list(f[4]);
        out.push_back(std::move(x));
    }
    return out;
}

LexsubMode parse_lexsub_mode(std::string_view s) {
    if (s == "contextual") return LexsubMode::contextual;
    if (s == "baladd") return LexsubMode::baladd;
    throw ConfigError("unknown lexsub mode '" + std::string(s) + "' (expected contextual or baladd)");
}

LexsubResult eval_lexsub(std::span<const LexsubInstance> instances, const ParamSet& params,
                         const Vocabulary& vocab, const LexsubOptions& options,
                         const WordVectors* universal) {
    if (options.mode == LexsubMode::baladd && universal == nullptr) {
        throw ConfigError("eval_lexsub: baladd mode needs universal vectors");
    }
    LexsubResult result;
    const std::size_t half = options.window / 2;
    for (const auto& x : instances) {
        const std::size_t lo = x.position > half ? x.position - half : 0;
        const std::size_t hi = std::min(x.sentence.size(), x.position + half + 1);
        std::vector<std::string> context;
        for (std::size_t i = lo; i < hi; ++i) {
            if (i != x.position) context.push_back(x.sentence[i]);
        }

        std::vector<std::string> usable;
        std::vector<double> scores;
        if (options.mode == LexsubMode::contextual) {
            if (!vocab.find(x.target)) {
                ++result.excluded;
                continue;
            }
            const auto bow = make_bow(vocab.map(context));
            const auto target = contextual_embed(vocab.id(x.target), bow, params);
            for (const auto& c : x.candidates) {
                const auto id = vocab.find(c);
                if (!id) {
                    ++result.skipped_candidates;
                    continue;
                }
                const auto cand = contextual_embed(*id, bow, params);
                usable.push_back(c);
                scores.push_back(cosine_similarity(target.posterior.mu, cand.posterior.mu));
            }
        } else {
            const auto t = universal->find(x.target);
            std::vector<std::vector<double>> ctx;
            for (const auto& w : context) {
                if (auto it = universal->find(w); it != universal->end()) ctx.push_back(it->second);
            }
            if (t == universal->end() || ctx.empty()) {
                ++result.excluded;
                continue;
            }
            for (const auto& c : x.candidates) {
                const auto it = universal->find(c);
                if (it == universal->end()) {
                    ++result.skipped_candidates;
                    continue;
                }
                usable.push_back(c);
                scores.push_back(baladd(t->second, it->second, ctx));
            }
        }
        if (usable.empty()) {
            ++result.excluded;
            continue;
        }
        const auto best = static_cast<std::size_t>(
            std::max_element(scores.begin(), scores.end()) - scores.begin());
        ++result.evaluated;
        if (std::find(x.gold.begin(), x.gold.end(), usable[best]) != x.gold.end()) ++result.hits;
    }
    return result;
}

// ------------------------------------------------------------ topic coherence

namespace {

// Pairs are only counted between slots of the same group; groups must be
// contiguous runs of slot indices. An empty `group` puts every slot in one.
WindowCounts count_windows_grouped(std::span<const std::vector<std::uint32_t>> documents,
                                   std::span<const std::uint32_t> words,
                                   std::span<const std::size_t> group, std::size_t window) {
    if (window == 0) throw ConfigError("count_windows: window must be >= 1");
    const std::size_t K = words.size();
    auto group_of = [&](std::size_t k) { return group.empty() ? 0 : group[k]; };
    WindowCounts out;
    out.single.assign(K, 0);
    out.joint.assign(K, std::vector<std::uint64_t>(K, 0));

    // Several slots may hold the same word id.
    std::unordered_map<std::uint32_t, std::vector<std::size_t>> slots;
    for (std::size_t k = 0; k < K; ++k) slots[words[k]].push_back(k);

    std::vector<std::uint32_t> in_window(K, 0);
    std::vector<std::size_t> present;
    auto add = [&](std::uint32_t id, int delta) {
        auto it = slots.find(id);
        if (it == slots.end()) return;
        for (std::size_t k : it->second) in_window[k] += static_cast<std::uint32_t>(delta);
    };
    auto record = [&] {
        ++out.windows;
        present.clear();
        for (std::size_t k = 0; k < K; ++k)
            if (in_window[k] > 0) present.push_back(k);
        for (std::size_t i = 0; i < present.size(); ++i) {
            for (std::size_t j = i; j < present.size() && group_of(present[j]) == group_of(present[i]); ++j) {
                ++out.joint[present[i]][present[j]];
                if (j != i) ++out.joint[present[j]][present[i]];
            }
        }
    };

    for (const auto& doc : documents) {
        if (doc.empty()) continue;
        std::fill(in_window.begin(), in_window.end(), 0);
        const std::size_t first = std::min(window, doc.size());
        for (std::size_t i = 0; i < first; ++i) add(doc[i], +1);
        record();
        for (std::size_t i = first; i < doc.size(); ++i) {
            add(doc[i - window], -1);
            add(doc[i], +1);
            record();
        }
    }
    for (std::size_t k = 0; k < K; ++k) out.single[k] = out.joint[k][k];
    return out;
}

}  // namespace

WindowCounts count_windows(std::span<const std::vector<std::uint32_t>> documents,
                           std::span<const std::uint32_t> words, std::size_t window) {
    return count_windows_grouped(documents, words, {}, window);
}

double npmi(std::uint64_t n_a, std::uint64_t n_b, std::uint64_t n_ab, std::uint64_t windows) {
    if (n_a == 0 || n_b == 0 || windows == 0) return 0.0;
    if (n_ab == 0) return -1.0;
    // Always together (this includes a word paired with itself).
    if (n_ab == n_a && n_ab == n_b) return 1.0;
    const double N = static_cast<double>(windows);
    const double p_ab = n_ab / N, p_a = n_a / N, p_b = n_b / N;
    return std::clamp(std::log(p_ab / (p_a * p_b)) / -std::log(p_ab), -1.0, 1.0);
}

TopicCoherence npmi_coherence(const std::vector<std::vector<std::uint32_t>>& topic_words,
                              std::span<const std::vector<std::uint32_t>> reference,
                              std::size_t window) {
    if (topic_words.empty()) throw ConfigError("npmi_coherence: no topics");
    std::vector<std::uint32_t> all;
    std::vector<std::size_t> offset, group;
    for (const auto& words : topic_words) {
        if (words.size() < 2) throw ConfigError("npmi_coherence: need at least two words per topic");
        offset.push_back(all.size());
        all.insert(all.end(), words.begin(), words.end());
        group.insert(group.end(), words.size(), offset.size() - 1);
    }
    // One pass over the reference corpus for all topics at once.
    const WindowCounts counts = count_windows_grouped(reference, all, group, window);

    TopicCoherence out;
    for (std::size_t k = 0; k < all.size(); ++k) {
        if (counts.single[k] == 0 &&
            std::find(out.absent_words.begin(), out.absent_words.end(), all[k]) == out.absent_words.end()) {
            out.absent_words.push_back(all[k]);
        }
    }

    for (std::size_t t = 0; t < topic_words.size(); ++t) {
        const std::size_t K = topic_words[t].size(), o = offset[t];
        std::vector<std::vector<double>> vec(K, std::vector<double>(K));
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t j = 0; j < K; ++j) {
                const auto a = o + i, b = o + j;
                vec[i][j] = npmi(counts.single[a], counts.single[b], counts.joint[a][b], counts.windows);
            }
        }
        double sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t j = i + 1; j < K; ++j, ++pairs) {
                const bool zero_i = std::all_of(vec[i].begin(), vec[i].end(), [](double v) { return v == 0.0; });
                const bool zero_j = std::all_of(vec[j].begin(), vec[j].end(), [](double v) { return v == 0.0; });
                if (!zero_i && !zero_j) sum += cosine_similarity(vec[i], vec[j]);
            }
        }
        out.per_topic.push_back(sum / static_cast<double>(pairs));
    }
    out.mean = std::accumulate(out.per_topic.begin(), out.per_topic.end(), 0.0) /
               static_cast<double>(out.per_topic.size());
    return out;
}

}  // namespace jtw
