// Acceptance suite: one pass/fail line per criterion, wall-clock budgets
// included. Exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/test_support.hpp"
#include "topicpipe/augment.hpp"
#include "topicpipe/cluster.hpp"
#include "topicpipe/embed.hpp"
#include "topicpipe/pipeline.hpp"
#include "topicpipe/report.hpp"

using namespace topicpipe;

namespace {

struct Failure {
    std::string detail;
};

struct Check {
    bool ok = true;
    std::string detail;

    void fail(const std::string& msg) {
        if (ok) {
            ok = false;
            detail = msg;
        }
    }
    void expect(bool condition, const std::string& msg) {
        if (!condition) fail(msg);
    }
};

// ---------------------------------------------------------------- 1 ----

void criterion_exclusion_fixture(Check& check) {
    augment::ExclusionRule rule;
    const std::string no_actor =
        "The headline does not explicitly reference a specific actor. It discusses \"critical "
        "race theory battles\" in a general sense, implying that the primary actors could be "
        "individuals or groups engaged in debates or conflicts over critical race theory, but "
        "it does not specify who these actors are.";
    check.expect(augment::apply_exclusion_rule(no_actor, rule),
                 "no-actor response not excluded");

    const std::vector<std::string> actor_bearing = {
        "The primary actor in the headline \"KBJ and CRT\" refers to Ketanji Brown Jackson "
        "(KBJ), who is a Justice on the Supreme Court of the United States. She is a legal "
        "professional and a public figure, serving in the highest court in the United States.",
        "The primary actor in the headline is DeSantis, referring to Ron DeSantis, the Governor "
        "of Florida. He is a political figure and a member of the Republican Party, known for "
        "his conservative policies and actions within the state of Florida.",
        "The primary actor in this headline is the \"Tennessee House.\" The Tennessee House "
        "refers to the lower chamber of the Tennessee General Assembly, which is the state "
        "legislature of Tennessee. This body is responsible for making and passing state laws.",
        "The primary actor in the headline is \"Critical Race Theory.\" Critical Race Theory is "
        "not a person but an academic and legal framework that examines society and culture as "
        "they relate to categorizations of race, law, and power.",
    };
    for (std::size_t i = 0; i < actor_bearing.size(); ++i) {
        check.expect(!augment::apply_exclusion_rule(actor_bearing[i], rule),
                     "actor-bearing response " + std::to_string(i) + " wrongly excluded");
    }
}

// ------------------------------------------------------------- 2 & 3 ----

struct AccountingOutcome {
    bool identity_ok = true;
    bool min_size_ok = true;
    std::string detail;
};

AccountingOutcome run_accounting_suite() {
    AccountingOutcome outcome;
    std::mt19937_64 rng(20240817);
    for (int trial = 0; trial < 200; ++trial) {
        testsupport::RandomCorpusSpec spec;
        spec.size = 10 + rng() % 491;  // 10..500
        spec.exclusion_rate = (trial % 2 == 0) ? 0.05 + 0.2 * (trial % 5) / 5.0 : 0.0;
        spec.failure_rate = (trial % 7 == 0) ? 0.05 : 0.0;
        auto planted = testsupport::random_structured_corpus(rng, spec);
        auto store = testsupport::augmented_store(planted);

        pipeline::RunConfig config;
        config.input_mode = pipeline::InputMode::Augmented;
        config.min_topic_size = (trial % 2 == 0) ? 100 : 90;
        config.min_term_count = 1;
        embed::HashingProvider provider(32);
        auto run = pipeline::fit_topic_model(planted.corpus, store.get(), config, provider);

        const std::size_t total =
            run.ledger.assigned + run.ledger.outliers + run.ledger.excluded + run.ledger.failed;
        if (total != planted.corpus.documents.size()) {
            outcome.identity_ok = false;
            outcome.detail = "trial " + std::to_string(trial) + ": " + std::to_string(total) +
                             " != " + std::to_string(planted.corpus.documents.size());
            break;
        }
        for (const auto& topic : run.topics) {
            if (topic.size < config.min_topic_size) {
                outcome.min_size_ok = false;
                outcome.detail = "trial " + std::to_string(trial) + ": topic size " +
                                 std::to_string(topic.size) + " < " +
                                 std::to_string(config.min_topic_size);
                break;
            }
        }
        if (!outcome.min_size_ok) break;
    }
    return outcome;
}

// ---------------------------------------------------------------- 4 ----

void criterion_planted_recovery(Check& check) {
    auto planted = testsupport::planted_corpus(3, 60);
    auto store = testsupport::augmented_store(planted);

    pipeline::RunConfig config;
    config.input_mode = pipeline::InputMode::Augmented;
    config.min_topic_size = 50;
    config.min_term_count = 1;
    config.seed = 7;
    embed::HashingProvider provider(64);

    auto run = pipeline::fit_topic_model(planted.corpus, store.get(), config, provider);
    check.expect(run.topics.size() == 3,
                 "expected exactly 3 topics, got " + std::to_string(run.topics.size()));
    check.expect(run.ledger.assigned + run.ledger.outliers + run.ledger.excluded +
                         run.ledger.failed ==
                     planted.corpus.documents.size(),
                 "accounting identity violated");

    std::map<std::string, int> group_of;
    for (std::size_t i = 0; i < planted.corpus.documents.size(); ++i) {
        group_of[planted.corpus.documents[i].id] = planted.group_of[i];
    }
    for (const auto& topic : run.topics) {
        std::map<int, std::size_t> counts;
        std::size_t total = 0;
        for (const auto& a : run.assignments) {
            if (a.status == pipeline::DocStatus::Assigned && a.label == topic.topic_id) {
                ++counts[group_of[a.doc_id]];
                ++total;
            }
        }
        std::size_t best = 0;
        for (auto& [group, count] : counts) best = std::max(best, count);
        const double purity = total == 0 ? 0.0 : double(best) / double(total);
        check.expect(purity >= 0.9, "topic " + std::to_string(topic.topic_id) + " purity " +
                                        std::to_string(purity) + " < 0.9");
    }

    auto again = pipeline::fit_topic_model(planted.corpus, store.get(), config, provider);
    check.expect(pipeline::assignments_jsonl(again) == pipeline::assignments_jsonl(run),
                 "assignments not deterministic under fixed seed");
    check.expect(pipeline::topics_json(again) == pipeline::topics_json(run),
                 "topics not deterministic under fixed seed");
}

// ---------------------------------------------------------------- 5 ----

void criterion_ctfidf_oracle(Check& check) {
    auto compare = [&](const std::vector<std::vector<long long>>& counts) {
        represent::ClassTermMatrix m;
        for (std::size_t c = 0; c < counts.size(); ++c) m.classes.push_back(static_cast<int>(c));
        for (std::size_t t = 0; t < counts[0].size(); ++t) m.terms.push_back("t" + std::to_string(t));
        m.counts = counts;
        const auto got = represent::ctfidf(m);
        const auto want = oracle::ctfidf(counts);
        for (std::size_t i = 0; i < counts.size(); ++i) {
            for (std::size_t j = 0; j < counts[0].size(); ++j) {
                if (std::abs(got[i][j] - want[i][j]) > 1e-12) {
                    check.fail("ctfidf deviates by " +
                               std::to_string(std::abs(got[i][j] - want[i][j])));
                    return false;
                }
            }
        }
        return true;
    };

    // Exhaustive: every matrix up to 3x3 with counts in {0,1,2,3}.
    for (std::size_t classes = 1; classes <= 3 && check.ok; ++classes) {
        for (std::size_t terms = 1; terms <= 3 && check.ok; ++terms) {
            const std::size_t cells = classes * terms;
            std::size_t combos = 1;
            for (std::size_t k = 0; k < cells; ++k) combos *= 4;
            for (std::size_t combo = 0; combo < combos; ++combo) {
                std::vector<std::vector<long long>> counts(classes,
                                                           std::vector<long long>(terms, 0));
                std::size_t rest = combo;
                for (std::size_t k = 0; k < cells; ++k) {
                    counts[k / terms][k % terms] = static_cast<long long>(rest % 4);
                    rest /= 4;
                }
                if (!compare(counts)) return;
            }
        }
    }

    std::mt19937_64 rng(5150);
    for (int trial = 0; trial < 1000 && check.ok; ++trial) {
        std::vector<std::vector<long long>> counts(5, std::vector<long long>(20, 0));
        for (auto& row : counts) {
            for (auto& x : row) x = static_cast<long long>(rng() % 6);
        }
        if (!compare(counts)) return;
    }
}

// ---------------------------------------------------------------- 6 ----

void criterion_clustering_properties(Check& check) {
    std::mt19937_64 rng(606);

    // Exact recovery on two separated 60-point blobs.
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::vector<double>> points;
    for (int b = 0; b < 2; ++b) {
        for (int i = 0; i < 60; ++i) {
            std::vector<double> p(5, b * 100.0);
            for (double& x : p) x += noise(rng);
            points.push_back(std::move(p));
        }
    }
    cluster::ClusterParams params;
    params.min_cluster_size = 50;
    auto blobs = cluster::density_cluster(points, params);
    check.expect(blobs.cluster_count == 2, "blob recovery: expected 2 clusters");
    for (int i = 0; i < 60; ++i) {
        if (blobs.labels[i] != blobs.labels[0] || blobs.labels[60 + i] != blobs.labels[60]) {
            check.fail("blob recovery: mixed membership");
            break;
        }
    }
    check.expect(blobs.labels[0] != blobs.labels[60], "blob recovery: clusters merged");

    // Random instances: min-size law, conservation, order invariance.
    for (int trial = 0; trial < 20 && check.ok; ++trial) {
        std::vector<std::vector<double>> pts;
        const std::size_t groups = 1 + rng() % 3;
        for (std::size_t g = 0; g < groups; ++g) {
            const double cx = static_cast<double>(rng() % 7) * 50.0;
            const double cy = static_cast<double>(rng() % 7) * 50.0;
            const std::size_t n = 8 + rng() % 40;
            for (std::size_t i = 0; i < n; ++i) {
                pts.push_back({cx + noise(rng), cy + noise(rng)});
            }
        }
        cluster::ClusterParams p2;
        p2.min_cluster_size = 10 + rng() % 20;
        auto result = cluster::density_cluster(pts, p2);

        std::map<int, std::size_t> sizes;
        std::size_t outliers = 0;
        for (int label : result.labels) {
            if (label == -1) ++outliers;
            else ++sizes[label];
        }
        std::size_t assigned = 0;
        for (auto& [label, size] : sizes) {
            if (size < p2.min_cluster_size) check.fail("min-size law violated");
            assigned += size;
        }
        check.expect(assigned + outliers == pts.size(), "conservation violated");

        // Permutation invariance of the partition.
        std::vector<std::size_t> perm(pts.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::vector<double>> shuffled(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) shuffled[i] = pts[perm[i]];
        auto permuted = cluster::density_cluster(shuffled, p2);

        auto partition = [](const std::vector<int>& labels,
                            const std::vector<std::size_t>* back_map) {
            std::map<int, std::set<std::size_t>> clusters;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (labels[i] >= 0) {
                    clusters[labels[i]].insert(back_map ? (*back_map)[i] : i);
                }
            }
            std::set<std::set<std::size_t>> as_set;
            for (auto& [label, members] : clusters) as_set.insert(members);
            return as_set;
        };
        check.expect(partition(result.labels, nullptr) == partition(permuted.labels, &perm),
                     "order invariance violated");
    }
}

// ---------------------------------------------------------------- 7 ----

void criterion_replay_determinism(Check& check) {
    auto planted = testsupport::planted_corpus(3, 60);
    auto store = testsupport::augmented_store(planted);
    pipeline::RunConfig config;
    config.input_mode = pipeline::InputMode::Augmented;
    config.min_topic_size = 50;
    config.min_term_count = 1;
    config.seed = 99;
    embed::HashingProvider provider(64);

    auto run = pipeline::fit_topic_model(planted.corpus, store.get(), config, provider);
    testsupport::TempDir dir("acceptance-replay");
    pipeline::save_run(run, dir.file("run"));

    auto replay_config = pipeline::config_from_manifest(
        testsupport::read_text(dir.file("run") + "/manifest.json"));
    embed::HashingProvider fresh(64);
    auto replayed = pipeline::fit_topic_model(planted.corpus, store.get(), replay_config, fresh);

    check.expect(pipeline::assignments_jsonl(replayed) ==
                     testsupport::read_text(dir.file("run") + "/assignments.jsonl"),
                 "assignments.jsonl differs across replays");
    check.expect(pipeline::topics_json(replayed) ==
                     testsupport::read_text(dir.file("run") + "/topics.json"),
                 "topics.json differs across replays");
}

// ---------------------------------------------------------------- 8 ----

void criterion_cache_determinism(Check& check) {
    auto planted = testsupport::planted_corpus(2, 25);
    auto client = testsupport::make_mock(planted);
    augment::AugmentationStore store;
    augment::AugmentOptions options;

    auto first = augment::augment_corpus(planted.corpus, augment::default_prompt_template(),
                                         *client, store, options);
    const auto calls_after_first = client->call_count();
    check.expect(calls_after_first == static_cast<int64_t>(planted.corpus.documents.size()),
                 "cold run should call the client once per document");

    auto second = augment::augment_corpus(planted.corpus, augment::default_prompt_template(),
                                          *client, store, options);
    check.expect(client->call_count() == calls_after_first,
                 "warm run issued " + std::to_string(client->call_count() - calls_after_first) +
                     " client calls, expected 0");
    check.expect(second.client_calls == 0, "warm run reported non-zero client calls");
    check.expect(second.cache_hits == planted.corpus.documents.size(),
                 "warm run missed the cache");
    for (std::size_t i = 0; i < first.augmentations.size(); ++i) {
        if (second.augmentations[i].response_text != first.augmentations[i].response_text) {
            check.fail("response_text differs between runs for doc " +
                       first.augmentations[i].doc_id);
            break;
        }
    }
}

// ---------------------------------------------------------------- 9 ----

void criterion_mmr_contracts(Check& check) {
    std::mt19937_64 rng(909);
    embed::HashingProvider provider(32);
    for (int trial = 0; trial < 500 && check.ok; ++trial) {
        const std::size_t n = 1 + rng() % 40;
        std::vector<represent::ScoredTerm> candidates;
        for (std::size_t i = 0; i < n; ++i) {
            candidates.push_back({"kw" + std::to_string(trial) + "q" + std::to_string(i),
                                  static_cast<double>(rng() % 10000) / 100.0});
        }
        std::string topic_text = "kw" + std::to_string(trial) + "q0 topic theme";
        const double diversity = static_cast<double>(rng() % 11) / 10.0;

        // Independent argmax oracle over the same top-30 pool.
        std::vector<represent::ScoredTerm> pool = candidates;
        std::stable_sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.term < b.term;
        });
        if (pool.size() > 30) pool.resize(30);
        auto topic_vec = provider.embed_batch({topic_text})[0];
        std::size_t best = 0;
        double best_sim = -2.0;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            auto term_vec = provider.embed_batch({pool[i].term})[0];
            const double sim = term_vec.is_zero() || topic_vec.is_zero()
                                   ? 0.0
                                   : embed::cosine_similarity(term_vec, topic_vec);
            if (sim > best_sim ||
                (sim == best_sim && (pool[i].score > pool[best].score ||
                                     (pool[i].score == pool[best].score &&
                                      pool[i].term < pool[best].term)))) {
                best = i;
                best_sim = sim;
            }
        }

        auto top1 = represent::keybert_rerank(candidates, {topic_text}, provider, 1, diversity);
        check.expect(top1.size() == 1, "top_k=1 must return one term");
        check.expect(top1[0].term == pool[best].term,
                     "top_k=1 disagrees with the similarity argmax (trial " +
                         std::to_string(trial) + ")");

        const std::size_t top_k = 1 + rng() % 15;
        auto picked = represent::keybert_rerank(candidates, {topic_text}, provider, top_k,
                                                diversity);
        std::set<std::string> pool_terms;
        for (const auto& c : pool) pool_terms.insert(c.term);
        std::set<std::string> seen;
        for (const auto& p : picked) {
            if (pool_terms.count(p.term) == 0) {
                check.fail("picked term outside the candidate pool");
                break;
            }
            if (!seen.insert(p.term).second) {
                check.fail("duplicate term in rerank output");
                break;
            }
        }
        check.expect(picked.size() == std::min(top_k, pool.size()),
                     "rerank output length mismatch");
    }
}

// --------------------------------------------------------------- 10 ----

std::vector<long long> markdown_counts(const std::string& table) {
    std::vector<long long> counts;
    std::istringstream in(table);
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (row <= 2) continue;
        const std::size_t first = line.find('|');
        const std::size_t second = line.find('|', first + 1);
        const std::size_t third = line.find('|', second + 1);
        counts.push_back(std::stoll(line.substr(second + 1, third - second - 1)));
    }
    return counts;
}

void criterion_report_fidelity(Check& check) {
    std::mt19937_64 rng(1010);
    for (int trial = 0; trial < 50 && check.ok; ++trial) {
        testsupport::RandomCorpusSpec spec;
        spec.size = 30 + rng() % 120;
        spec.exclusion_rate = (trial % 2 == 0) ? 0.15 : 0.0;
        spec.failure_rate = (trial % 5 == 0) ? 0.08 : 0.0;
        auto planted = testsupport::random_structured_corpus(rng, spec);
        auto store = testsupport::augmented_store(planted);

        pipeline::RunConfig config;
        config.input_mode = pipeline::InputMode::Augmented;
        config.min_topic_size = 10;
        config.min_term_count = 1;
        embed::HashingProvider provider(32);
        auto run = pipeline::fit_topic_model(planted.corpus, store.get(), config, provider);

        auto counts = markdown_counts(
            report::render_topic_table(run, nullptr, report::ReportFormat::Markdown));
        std::vector<long long> expected;
        for (const auto& topic : run.topics) expected.push_back(static_cast<long long>(topic.size));
        expected.push_back(static_cast<long long>(run.ledger.outliers));
        expected.push_back(static_cast<long long>(run.ledger.excluded));
        if (run.ledger.failed > 0) expected.push_back(static_cast<long long>(run.ledger.failed));
        if (counts != expected) {
            check.fail("printed counts diverge from the ledger at trial " + std::to_string(trial));
            return;
        }

        // Topic rows must also agree with a recount of the assignments.
        std::map<int, long long> recount;
        for (const auto& a : run.assignments) {
            if (a.status == pipeline::DocStatus::Assigned) ++recount[a.label];
        }
        for (const auto& topic : run.topics) {
            if (recount[topic.topic_id] != static_cast<long long>(topic.size)) {
                check.fail("topic size drifted from assignment recount");
                return;
            }
        }
    }
}

struct CriterionSpec {
    int id;
    std::string name;
    double budget_ms;
    std::function<void(Check&)> body;
};

}  // namespace

int main() {
    // Criteria 2 and 3 share one suite of 200 runs; execute it once.
    AccountingOutcome accounting;
    const auto accounting_start = std::chrono::steady_clock::now();
    accounting = run_accounting_suite();
    const double accounting_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                  accounting_start)
            .count();

    std::vector<CriterionSpec> criteria = {
        {1, "exclusion-rule fixture", 1.0, criterion_exclusion_fixture},
        {2, "accounting identity (200 randomized corpora)", 10000.0,
         [&](Check& check) {
             check.expect(accounting.identity_ok, accounting.detail);
         }},
        {3, "min-topic-size law at 100 and 90", 10000.0,
         [&](Check& check) { check.expect(accounting.min_size_ok, accounting.detail); }},
        {4, "planted-actor recovery", 30000.0, criterion_planted_recovery},
        {5, "c-TF-IDF oracle equivalence", 10000.0, criterion_ctfidf_oracle},
        {6, "clustering properties", 20000.0, criterion_clustering_properties},
        {7, "replay determinism", 60000.0, criterion_replay_determinism},
        {8, "cache determinism", 10000.0, criterion_cache_determinism},
        {9, "MMR contracts (500 random candidate sets)", 5000.0, criterion_mmr_contracts},
        {10, "report fidelity (50 random runs)", 10000.0, criterion_report_fidelity},
    };

    int failures = 0;
    for (const auto& spec : criteria) {
        Check check;
        const auto start = std::chrono::steady_clock::now();
        spec.body(check);
        double elapsed_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        if (spec.id == 2 || spec.id == 3) elapsed_ms += accounting_ms / 2.0;

        if (check.ok && elapsed_ms > spec.budget_ms) {
            check.fail("exceeded budget: " + std::to_string(elapsed_ms) + " ms > " +
                       std::to_string(spec.budget_ms) + " ms");
        }
        std::printf("%s criterion %2d: %s (%.2f ms)%s%s\n", check.ok ? "PASS" : "FAIL", spec.id,
                    spec.name.c_str(), elapsed_ms, check.ok ? "" : " -- ",
                    check.ok ? "" : check.detail.c_str());
        if (!check.ok) ++failures;
    }

    if (failures > 0) {
        std::printf("%d of %zu criteria failed\n", failures, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
