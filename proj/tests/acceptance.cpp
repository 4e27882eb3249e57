// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
// Criteria 3, 4 and 8 share two synthetic training runs (about five minutes
// on one core). Pass --quick to shrink them for a smoke run; the verdicts
// printed then are not the real ones.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jtw/corpus.hpp"
#include "jtw/densemode.hpp"
#include "jtw/eval.hpp"
#include "jtw/grad_check.hpp"
#include "jtw/inference.hpp"
#include "jtw/io.hpp"
#include "jtw/model.hpp"
#include "jtw/synthetic.hpp"
#include "jtw/trainer.hpp"

using namespace jtw;

namespace {

bool g_quick = false;
int g_failures = 0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs one criterion; the body returns a verdict and fills `detail`.
void criterion(int id, const char* title, const std::function<bool(std::ostringstream&)>& body) {
    std::ostringstream detail;
    const auto t0 = Clock::now();
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail << "exception: " << e.what();
    }
    detail << " [" << std::fixed;
    detail.precision(1);
    detail << seconds_since(t0) << " s]";
    if (!ok) ++g_failures;
    std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, title, detail.str().c_str());
    std::fflush(stdout);
}

// ---------------------------------------------------------------- 1

bool gradient_check(std::ostringstream& out) {
    ModelConfig c;
    c.vocab_size = 50;
    c.latent_dim = 8;
    c.topics = 4;
    c.hidden = 16;
    const auto params = init_params(c, 11);
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<std::uint32_t> id(0, 49);

    // A small batch with frozen noise; the objective is the batch-mean loss.
    std::vector<TrainingInstance> batch(4);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        std::vector<std::uint32_t> ctx(3 + 2 * i);
        for (auto& w : ctx) w = id(rng);
        batch[i].pivot = id(rng);
        batch[i].context = make_bow(ctx);
    }
    std::vector<std::vector<NoiseSample>> eps;
    for (std::size_t i = 0; i < batch.size(); ++i) eps.push_back(draw_noise(rng, 1, c.latent_dim));

    auto f = [&](const ParamSet& p, ParamSet* grad) {
        Graph g;
        double loss = 0.0;
        const double scale = 1.0 / static_cast<double>(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i)
            loss -= scale * instance_loss(g, batch[i], p, eps[i], grad, scale).elbo;
        return loss;
    };
    const auto report = grad_check(f, params, 1e-5, 1e-4);
    std::string worst;
    double worst_err = -1.0;
    for (const auto& e : report.entries) {
        if (e.max_rel_error > worst_err) {
            worst_err = e.max_rel_error;
            worst = e.name;
        }
    }
    out << report.entries.size() << " tensors, max relative error " << report.max_rel_error()
        << " (" << worst << ")";
    return report.passed && report.entries.size() == kParamCount;
}

// ---------------------------------------------------------------- 2

bool kl_closed_form(std::ostringstream& out) {
    const std::size_t D = 8;
    const std::size_t samples = g_quick ? 20000 : 1000000;
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n01(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        GaussianPosterior q;
        for (std::size_t d = 0; d < D; ++d) {
            q.mu.push_back(0.7 * n01(rng));
            q.sigma.push_back(std::exp(0.3 * n01(rng)));
        }
        // E_q[log q(z) - log p(z)] with z = mu + sigma * e; the 2*pi terms cancel.
        double mc = 0.0;
        for (std::size_t s = 0; s < samples; ++s) {
            double v = 0.0;
            for (std::size_t d = 0; d < D; ++d) {
                const double e = n01(rng);
                const double z = q.mu[d] + q.sigma[d] * e;
                v += -std::log(q.sigma[d]) - 0.5 * e * e + 0.5 * z * z;
            }
            mc += v;
        }
        mc /= static_cast<double>(samples);
        worst = std::max(worst, std::abs(kl_to_prior(q) - mc));
    }
    const GaussianPosterior prior{std::vector<double>(D, 0.0), std::vector<double>(D, 1.0)};
    const double at_prior = kl_to_prior(prior);
    out << "max |closed - MC| " << worst << " over 100 posteriors, KL at prior " << at_prior;
    return worst < 1e-2 && at_prior == 0.0;
}

// ---------------------------------------------------------------- 3, 4, 8

struct SimplexSweep {
    std::size_t checked = 0;
    std::size_t violations = 0;
    double max_sum_error = 0.0;

    void check(std::span<const double> p) {
        ++checked;
        double s = 0.0;
        bool positive = true;
        for (double v : p) {
            s += v;
            positive = positive && v > 0.0;
        }
        max_sum_error = std::max(max_sum_error, std::abs(s - 1.0));
        if (!positive || std::abs(s - 1.0) > 1e-9) ++violations;
    }
    void add(const Graph::SimplexAudit& a) {
        checked += a.checked;
        violations += a.violations;
        max_sum_error = std::max(max_sum_error, a.max_sum_error);
    }
};

SimplexSweep g_sweep;

struct SyntheticRun {
    SyntheticCorpus data;
    Vocabulary vocab;
    Corpus corpus;
    TrainResult result;
    // learned topic -> ground-truth topic, by top-10 overlap
    std::vector<std::size_t> mapping;
    std::vector<double> purity;
};

ModelConfig synthetic_model(std::size_t V) {
    ModelConfig c;
    c.vocab_size = V;
    c.latent_dim = 16;
    c.topics = 3;
    c.hidden = 64;
    return c;
}

TrainConfig synthetic_training() {
    TrainConfig t;
    t.eta0 = 0.005;
    t.batch_size = 256;
    t.max_iter = g_quick ? 3 : 30;
    t.convergence_tol = 0.0;  // run every epoch
    t.seed = 3;
    t.audit_distributions = true;
    return t;
}

SyntheticRun run_synthetic(const SyntheticConfig& sc) {
    SyntheticRun run;
    run.data = generate_synthetic(sc);
    run.vocab = Vocabulary::build(run.data.documents, 1000, StopwordSet{});
    run.corpus = build_corpus(run.data.documents, run.vocab, 10);
    run.result = train(run.corpus.instances, synthetic_model(run.vocab.size()), synthetic_training());
    g_sweep.add(run.result.report.audit);

    const auto top = topic_top_words(run.result.params, 10);
    for (const auto& words : top) {
        std::vector<std::size_t> overlap(sc.topics, 0);
        for (const auto& w : words) {
            const auto it = run.data.word_topic.find(run.vocab.token(w.id));
            if (it != run.data.word_topic.end()) ++overlap[it->second];
        }
        const auto best = std::max_element(overlap.begin(), overlap.end()) - overlap.begin();
        run.mapping.push_back(static_cast<std::size_t>(best));
        run.purity.push_back(static_cast<double>(overlap[best]) / 10.0);
    }
    return run;
}

std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

bool topic_recovery(std::ostringstream& out) {
    SyntheticConfig sc;
    if (g_quick) sc.documents = 500;
    const auto run = run_synthetic(sc);
    const auto& epochs = run.result.report.epochs;

    // (a) 3-epoch moving average of the epoch loss never rises.
    bool monotone = epochs.size() >= 3;
    std::vector<double> smooth;
    for (std::size_t i = 0; i + 3 <= epochs.size(); ++i)
        smooth.push_back((epochs[i].loss + epochs[i + 1].loss + epochs[i + 2].loss) / 3.0);
    for (std::size_t i = 1; i < smooth.size(); ++i) monotone = monotone && smooth[i] <= smooth[i - 1];

    // (b) mean purity.
    double purity = 0.0;
    for (double p : run.purity) purity += p;
    purity /= static_cast<double>(run.purity.size());

    // (c) argmax of each word's aggregated distribution.
    const auto dists = word_topic_distributions(run.corpus.instances, run.result.params);
    std::size_t words = 0, correct = 0;
    for (const auto& [id, d] : dists) {
        g_sweep.check(d.zeta);
        const auto it = run.data.word_topic.find(run.vocab.token(id));
        if (it == run.data.word_topic.end()) continue;
        ++words;
        correct += run.mapping[argmax(d.zeta)] == it->second;
    }
    const double word_acc = words ? static_cast<double>(correct) / words : 0.0;

    out << epochs.size() << " epochs, loss " << epochs.front().loss << " -> " << epochs.back().loss
        << ", smoothed loss non-increasing: " << (monotone ? "yes" : "no") << "; purity " << purity
        << "; word argmax accuracy " << word_acc << " (" << correct << "/" << words << ")";
    return epochs.size() >= 30 && monotone && purity >= 0.8 && word_acc >= 0.9;
}

bool polysemy(std::ostringstream& out) {
    SyntheticConfig sc;
    sc.shared_word = "patient";
    sc.shared_topics = {0, 1};
    if (g_quick) sc.documents = 500;
    const auto run = run_synthetic(sc);
    const auto pid = run.vocab.id("patient");

    const auto overall = word_topic_distribution(pid, run.corpus.instances, run.result.params);
    g_sweep.check(overall.zeta);
    std::vector<double> by_truth(sc.topics, 0.0);
    for (std::size_t t = 0; t < overall.zeta.size(); ++t) by_truth[run.mapping[t]] += overall.zeta[t];
    const auto peaks = std::count_if(overall.zeta.begin(), overall.zeta.end(), [](double m) { return m > 0.3; });

    // Held-out documents from the same generator with another seed.
    SyntheticConfig hc = sc;
    hc.seed = sc.seed + 1000;
    hc.documents = g_quick ? 200 : 1000;
    const auto held = generate_synthetic(hc);
    const auto hcorpus = build_corpus(held.documents, run.vocab, 10);
    std::size_t n = 0, hits = 0;
    for (const auto& x : hcorpus.instances) {
        if (x.pivot != pid) continue;
        const auto e = contextual_embed(x, run.result.params);
        g_sweep.check(e.topics.zeta);
        const auto q = encode(x, run.result.params);
        g_sweep.check(decode_pivot(q.mu, run.result.params));
        g_sweep.check(decode_context(e.topics, run.result.params));
        ++n;
        hits += run.mapping[argmax(e.topics.zeta)] == held.doc_topic[x.doc];
    }
    const double acc = n ? static_cast<double>(hits) / n : 0.0;

    out << "aggregate zeta (";
    for (std::size_t t = 0; t < overall.zeta.size(); ++t) out << (t ? ", " : "") << overall.zeta[t];
    out << "), topics above 0.3: " << peaks << "; held-out contextual argmax accuracy " << acc << " ("
        << hits << "/" << n << ")";
    return peaks == 2 && acc >= 0.9;
}

bool simplex_sweep(std::ostringstream& out) {
    out << g_sweep.checked << " distributions checked, " << g_sweep.violations
        << " violations, max |sum - 1| " << g_sweep.max_sum_error;
    return g_sweep.checked > 0 && g_sweep.violations == 0;
}

// ---------------------------------------------------------------- 5

double brute_spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            double less = 0, equal = 0;
            for (double w : v) {
                less += w < v[i];
                equal += w == v[i];
            }
            r[i] = less + (equal + 1) / 2;
        }
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i] / n;
        my += ry[i] / n;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

bool evaluation_oracles(std::ostringstream& out) {
    // Spearman against rank counting, on lists with many ties.
    std::mt19937_64 rng(51);
    double spearman_err = 0.0;
    int lists = 0;
    while (lists < 1000) {
        const std::size_t n = 2 + rng() % 60;
        std::uniform_int_distribution<int> level(0, 1 + static_cast<int>(rng() % 8));
        std::vector<double> x(n), y(n);
        for (auto& v : x) v = level(rng);
        for (auto& v : y) v = level(rng) * 0.5;
        auto constant = [](const std::vector<double>& v) {
            return std::all_of(v.begin(), v.end(), [&](double a) { return a == v[0]; });
        };
        if (constant(x) || constant(y)) continue;
        spearman_err = std::max(spearman_err, std::abs(spearman(x, y) - brute_spearman(x, y)));
        ++lists;
    }

    // NPMI from exhaustive window enumeration on a 200-token fixture.
    std::uniform_int_distribution<std::uint32_t> tok(0, 14);
    std::vector<std::vector<std::uint32_t>> docs;
    for (std::size_t len : {90, 6, 44, 60}) {
        std::vector<std::uint32_t> d(len);
        for (auto& t : d) t = tok(rng);
        docs.push_back(d);
    }
    const std::vector<std::uint32_t> words{0, 2, 5, 9, 14, 30};
    const std::size_t W = 12;
    std::vector<std::set<std::uint32_t>> windows;
    for (const auto& d : docs) {
        if (d.size() <= W) {
            windows.emplace_back(d.begin(), d.end());
            continue;
        }
        for (std::size_t s = 0; s + W <= d.size(); ++s) windows.emplace_back(d.begin() + s, d.begin() + s + W);
    }
    const auto counts = count_windows(docs, words, W);
    const double N = static_cast<double>(windows.size());
    std::size_t npmi_mismatch = counts.windows != windows.size();
    for (std::size_t i = 0; i < words.size(); ++i) {
        for (std::size_t j = 0; j < words.size(); ++j) {
            double na = 0, nb = 0, nab = 0;
            for (const auto& w : windows) {
                na += w.contains(words[i]);
                nb += w.contains(words[j]);
                nab += w.contains(words[i]) && w.contains(words[j]);
            }
            double expect;
            if (na == 0 || nb == 0) {
                expect = 0.0;
            } else if (nab == 0) {
                expect = -1.0;
            } else if (nab == na && nab == nb) {
                expect = 1.0;
            } else {
                expect = std::log((nab / N) / ((na / N) * (nb / N))) / -std::log(nab / N);
            }
            npmi_mismatch += npmi(counts.single[i], counts.single[j], counts.joint[i][j], counts.windows) != expect;
        }
    }

    // BalAdd: identical unit vectors, an orthogonal candidate, and a C=2 case
    // worked by hand: (2 * 0.6 + 0.8 + 0.6) / 4 = 0.65.
    const std::vector<double> e1{1.0, 0.0}, e2{0.0, 1.0}, y{3.0, 4.0};
    const double b1 = baladd(e1, e1, std::vector<std::vector<double>>{e1});
    const double b2 = baladd(e1, e2, std::vector<std::vector<double>>{e1, e1});
    const double b3 = baladd(e1, y, std::vector<std::vector<double>>{e2, e1});
    const bool baladd_ok = std::abs(b1 - 1.0) < 1e-15 && std::abs(b2) < 1e-15 && std::abs(b3 - 0.65) < 1e-15;

    out << "spearman max error " << spearman_err << " on " << lists << " lists; npmi mismatches "
        << npmi_mismatch << " over " << words.size() * words.size() << " pairs (" << windows.size()
        << " windows); baladd " << b1 << ", " << b2 << ", " << b3;
    return spearman_err <= 1e-12 && npmi_mismatch == 0 && baladd_ok;
}

// ---------------------------------------------------------------- 6

bool half_angle_normalization(std::ostringstream& out) {
    // Composite Simpson on 1/2 cos(theta/2) over [0, pi].
    const std::size_t n = 2000;
    const double h = std::numbers::pi / n;
    double s = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * 0.5 * std::cos(i * h / 2.0);
    }
    const double integral = s * h / 3.0;

    const std::vector<double> u{1.0, 0.0}, par{2.0, 0.0}, orth{0.0, 3.0}, opp{-1.0, 0.0};
    const double c1 = cos_half_angle(u, par), c2 = cos_half_angle(u, orth), c3 = cos_half_angle(u, opp);
    const bool closed = std::abs(c1 - 1.0) < 1e-12 && std::abs(c2 - std::sqrt(0.5)) < 1e-12 &&
                        std::abs(c3) < 1e-12;
    out << "integral " << integral << " (error " << std::abs(integral - 1.0) << "); parallel " << c1
        << ", orthogonal " << c2 << ", opposite " << c3;
    return std::abs(integral - 1.0) < 1e-9 && closed;
}

// ---------------------------------------------------------------- 7

bool determinism(std::ostringstream& out) {
    SyntheticConfig sc;
    sc.documents = 300;
    const auto data = generate_synthetic(sc);
    const auto vocab = Vocabulary::build(data.documents, 1000, StopwordSet{});
    const auto corpus = build_corpus(data.documents, vocab, 10);
    auto model = synthetic_model(vocab.size());
    model.latent_dim = 8;
    model.hidden = 16;
    TrainConfig tc;
    tc.eta0 = 0.005;
    tc.batch_size = 128;
    tc.max_iter = 3;
    tc.seed = 17;

    auto checkpoint_bytes = [&] {
        const auto r = train(corpus.instances, model, tc);
        return serialize_checkpoint({model, r.params, vocab.hash(), tc.seed});
    };
    const auto a = checkpoint_bytes();
    const auto b = checkpoint_bytes();

    const auto dir = std::filesystem::temp_directory_path() / "jtw_acceptance";
    std::filesystem::create_directories(dir);
    const auto path = dir / "model.ckpt";
    const auto original = deserialize_checkpoint(a);
    save_checkpoint(path, original);
    const auto loaded = load_checkpoint(path);

    auto exports = [&](const ParamSet& p) {
        std::string s = to_word2vec_text(embedding_table(universal_embed(corpus.instances, p), vocab));
        for (const auto& x : std::span(corpus.instances).first(200)) {
            const auto e = contextual_embed(x, p);
            for (double v : e.posterior.mu) s += format_double(v) + " ";
            for (double v : e.posterior.sigma) s += format_double(v) + " ";
            for (double v : e.topics.zeta) s += format_double(v) + " ";
        }
        return s + topic_table_tsv(topic_top_words(p, 10), vocab);
    };
    const bool same_exports = exports(original.params) == exports(loaded.params);
    std::filesystem::remove_all(dir);

    out << "checkpoints " << (a == b ? "bit-identical" : "differ") << " (" << a.size()
        << " bytes); exports after save/load " << (same_exports ? "identical" : "differ");
    return a == b && loaded == original && same_exports;
}

// ---------------------------------------------------------------- 9

bool schedule(std::ostringstream& out) {
    SyntheticConfig sc;
    sc.documents = 60;
    const auto data = generate_synthetic(sc);
    const auto vocab = Vocabulary::build(data.documents, 1000, StopwordSet{});
    const auto corpus = build_corpus(data.documents, vocab, 10);
    auto model = synthetic_model(vocab.size());
    model.hidden = 8;
    bool ok = true;
    std::size_t checked = 0;
    for (double decay : {0.95, 0.9, 0.5}) {
        TrainConfig tc;
        tc.lr_decay = decay;
        tc.max_iter = 8;
        tc.convergence_tol = 0.0;
        const auto r = train(corpus.instances, model, tc);
        for (std::size_t i = 0; i < r.report.epochs.size(); ++i) {
            ok = ok && r.report.epochs[i].lr == 0.0005 * std::pow(decay, static_cast<double>(i));
            ++checked;
        }
    }
    out << checked << " recorded rates compared with 0.0005 * decay^epoch";
    return ok && checked == 24;
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) g_quick = g_quick || std::strcmp(argv[i], "--quick") == 0;

    criterion(1, "gradient correctness", gradient_check);
    criterion(2, "KL closed form", kl_closed_form);
    criterion(3, "synthetic topic recovery", topic_recovery);
    criterion(4, "polysemy", polysemy);
    criterion(5, "evaluation oracles", evaluation_oracles);
    criterion(6, "half-angle normalization", half_angle_normalization);
    criterion(7, "determinism and persistence", determinism);
    criterion(8, "simplex sweep", simplex_sweep);
    criterion(9, "learning-rate schedule", schedule);

    std::printf("%d of 9 criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
