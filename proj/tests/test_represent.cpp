#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "support/oracles.hpp"
#include "topicpipe/embed.hpp"
#include "topicpipe/errors.hpp"
#include "topicpipe/represent.hpp"

using namespace topicpipe;

namespace {

long long count_of(const represent::ClassTermMatrix& m, int topic, const std::string& term) {
    auto class_it = std::find(m.classes.begin(), m.classes.end(), topic);
    auto term_it = std::find(m.terms.begin(), m.terms.end(), term);
    REQUIRE(class_it != m.classes.end());
    if (term_it == m.terms.end()) return 0;
    return m.counts[static_cast<std::size_t>(class_it - m.classes.begin())]
                   [static_cast<std::size_t>(term_it - m.terms.begin())];
}

represent::VocabularyConfig config_with(std::size_t min_term_count, std::size_t ngram_max = 2) {
    represent::VocabularyConfig config;
    config.min_term_count = min_term_count;
    config.ngram_max = ngram_max;
    return config;
}

}  // namespace

TEST_CASE("hand-counted unigrams and bigrams") {
    std::map<int, std::vector<std::string>> docs = {{0, {"teachers union", "teachers protest"}}};
    auto matrix = represent::build_class_term_matrix(docs, config_with(1));
    CHECK(count_of(matrix, 0, "teachers") == 2);
    CHECK(count_of(matrix, 0, "union") == 1);
    CHECK(count_of(matrix, 0, "protest") == 1);
    CHECK(count_of(matrix, 0, "teachers union") == 1);
    CHECK(count_of(matrix, 0, "teachers protest") == 1);
    CHECK(matrix.terms.size() == 5);
}

TEST_CASE("all-stopword documents leave an empty vocabulary") {
    std::map<int, std::vector<std::string>> docs = {{0, {"the the the"}}};
    CHECK_THROWS_WITH_AS(represent::build_class_term_matrix(docs, config_with(1)),
                         doctest::Contains("empty vocabulary"), ValidationError);
    std::map<int, std::vector<std::string>> none = {{0, {}}};
    CHECK_THROWS_AS(represent::build_class_term_matrix(none, config_with(1)), ValidationError);
}

TEST_CASE("identical corpora produce identical matrices") {
    std::map<int, std::vector<std::string>> docs = {
        {0, {"school boards meet", "teachers protest cuts"}},
        {3, {"governor signs education bill"}}};
    auto a = represent::build_class_term_matrix(docs, config_with(1));
    auto b = represent::build_class_term_matrix(docs, config_with(1));
    CHECK(a.terms == b.terms);
    CHECK(a.classes == b.classes);
    CHECK(a.counts == b.counts);
}

TEST_CASE("bigrams join adjacent surviving tokens after stopword removal") {
    std::map<int, std::vector<std::string>> docs = {{0, {"responsible for educating"}}};
    auto matrix = represent::build_class_term_matrix(docs, config_with(1));
    CHECK(count_of(matrix, 0, "responsible educating") == 1);
    CHECK(std::find(matrix.terms.begin(), matrix.terms.end(), "for") == matrix.terms.end());
}

TEST_CASE("terms below min_term_count are dropped") {
    std::map<int, std::vector<std::string>> docs = {
        {0, {"teachers teachers rally"}}, {1, {"teachers strike"}}};
    auto matrix = represent::build_class_term_matrix(docs, config_with(3, 1));
    CHECK(matrix.terms == std::vector<std::string>{"teachers"});
}

TEST_CASE("ngram_max of one disables bigrams") {
    std::map<int, std::vector<std::string>> docs = {{0, {"teachers union"}}};
    auto matrix = represent::build_class_term_matrix(docs, config_with(1, 1));
    CHECK(matrix.terms == std::vector<std::string>{"teachers", "union"});
}

TEST_CASE("ctfidf zeroes stay zero and the single-cell case is n*ln2") {
    represent::ClassTermMatrix m;
    m.classes = {0};
    m.terms = {"teachers"};
    m.counts = {{7}};
    auto w = represent::ctfidf(m);
    CHECK(w[0][0] == doctest::Approx(7.0 * std::log(2.0)).epsilon(1e-12));

    represent::ClassTermMatrix two;
    two.classes = {0, 1};
    two.terms = {"a", "b"};
    two.counts = {{3, 0}, {0, 2}};
    auto w2 = represent::ctfidf(two);
    CHECK(w2[0][1] == 0.0);
    CHECK(w2[1][0] == 0.0);
}

TEST_CASE("a class-exclusive term outweighs an evenly split term at equal count") {
    represent::ClassTermMatrix m;
    m.classes = {0, 1};
    m.terms = {"exclusive", "split"};
    m.counts = {{2, 2}, {0, 2}};
    auto w = represent::ctfidf(m);
    CHECK(w[0][0] > w[0][1]);

    auto expected = oracle::ctfidf(m.counts);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(std::abs(w[i][j] - expected[i][j]) <= 1e-12);
        }
    }
}

TEST_CASE("ctfidf matches the brute-force oracle") {
    // Exhaustive 2x2 with counts in {0..3}.
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            for (int c = 0; c < 4; ++c) {
                for (int d = 0; d < 4; ++d) {
                    represent::ClassTermMatrix m;
                    m.classes = {0, 1};
                    m.terms = {"x", "y"};
                    m.counts = {{a, b}, {c, d}};
                    auto w = represent::ctfidf(m);
                    auto expected = oracle::ctfidf(m.counts);
                    for (std::size_t i = 0; i < 2; ++i) {
                        for (std::size_t j = 0; j < 2; ++j) {
                            CHECK(std::abs(w[i][j] - expected[i][j]) <= 1e-12);
                        }
                    }
                }
            }
        }
    }

    // Random 5x20 matrices with counts in [0,5], including one with a row
    // scaled by an integer factor.
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 200; ++trial) {
        represent::ClassTermMatrix m;
        for (int c = 0; c < 5; ++c) m.classes.push_back(c);
        for (int t = 0; t < 20; ++t) m.terms.push_back("t" + std::to_string(t));
        m.counts.assign(5, std::vector<long long>(20, 0));
        for (auto& row : m.counts) {
            for (auto& x : row) x = static_cast<long long>(rng() % 6);
        }
        if (trial % 4 == 0) {
            for (auto& x : m.counts[0]) x *= 3;
        }
        auto w = represent::ctfidf(m);
        auto expected = oracle::ctfidf(m.counts);
        for (std::size_t i = 0; i < 5; ++i) {
            for (std::size_t j = 0; j < 20; ++j) {
                CHECK(std::abs(w[i][j] - expected[i][j]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("top_candidates orders by weight then term and skips zero counts") {
    represent::ClassTermMatrix m;
    m.classes = {0, 1};
    m.terms = {"alpha", "beta", "gamma"};
    m.counts = {{2, 0, 2}, {0, 5, 0}};
    auto w = represent::ctfidf(m);
    auto candidates = represent::top_candidates(m, w, 0, 10);
    REQUIRE(candidates.size() == 2);
    // Equal weights (same count, same split): ties break lexicographically.
    CHECK(candidates[0].term == "alpha");
    CHECK(candidates[1].term == "gamma");
}

namespace {

// Vectors for single distinct tokens at dim 64 land on distinct signed
// coordinates, making them exactly orthogonal; verified below before use.
constexpr std::size_t kDim = 64;
const std::vector<std::string> kOrthogonal = {"alpha", "beta", "gamma", "delta"};

void require_orthogonal_tokens(embed::EmbeddingProvider& provider) {
    for (std::size_t i = 0; i < kOrthogonal.size(); ++i) {
        for (std::size_t j = i + 1; j < kOrthogonal.size(); ++j) {
            auto vi = provider.embed_batch({kOrthogonal[i]})[0];
            auto vj = provider.embed_batch({kOrthogonal[j]})[0];
            REQUIRE(embed::cosine_similarity(vi, vj) == 0.0);
        }
    }
}

}  // namespace

TEST_CASE("diversity 0 returns similarity-sorted candidates, distractor last") {
    embed::HashingProvider provider(kDim);
    require_orthogonal_tokens(provider);

    std::vector<represent::ScoredTerm> candidates = {
        {"alpha beta gamma", 4.0}, {"delta", 3.0}, {"alpha", 2.0}, {"alpha beta", 1.0}};
    auto picked = represent::keybert_rerank(candidates, {"alpha"}, provider, 4, 0.0);
    REQUIRE(picked.size() == 4);
    CHECK(picked[0].term == "alpha");
    CHECK(picked[1].term == "alpha beta");
    CHECK(picked[2].term == "alpha beta gamma");
    CHECK(picked[3].term == "delta");
    // With diversity 0 the recorded scores are the plain similarities.
    CHECK(picked[0].score == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(picked[1].score == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
    CHECK(picked[2].score == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-9));
    CHECK(picked[3].score == doctest::Approx(0.0).epsilon(1e-12));
    for (std::size_t i = 1; i < picked.size(); ++i) {
        CHECK(picked[i].score <= picked[i - 1].score);
    }
}

TEST_CASE("top_k 1 is the pure similarity argmax regardless of diversity") {
    embed::HashingProvider provider(kDim);
    std::vector<represent::ScoredTerm> candidates = {
        {"delta", 100.0}, {"alpha", 1.0}, {"beta", 50.0}};
    for (double diversity : {0.0, 0.3, 1.0}) {
        auto picked = represent::keybert_rerank(candidates, {"alpha"}, provider, 1, diversity);
        REQUIRE(picked.size() == 1);
        CHECK(picked[0].term == "alpha");
    }
}

TEST_CASE("a duplicated candidate is selected last at diversity 1") {
    embed::HashingProvider provider(kDim);
    require_orthogonal_tokens(provider);
    std::vector<represent::ScoredTerm> candidates = {
        {"alpha", 5.0}, {"alpha", 4.0}, {"beta", 3.0}, {"gamma", 2.0}};
    auto picked = represent::keybert_rerank(candidates, {"alpha"}, provider, 4, 1.0);
    REQUIRE(picked.size() == 4);
    CHECK(picked[0].term == "alpha");
    CHECK(picked[3].term == "alpha");  // the twin: its penalty equals its similarity
    // In between, the orthogonal fillers win with zero penalty.
    CHECK(picked[1].term == "beta");
    CHECK(picked[2].term == "gamma");
}

TEST_CASE("zero topic embedding falls back to ctfidf order with a note") {
    embed::HashingProvider provider(kDim);
    std::vector<represent::ScoredTerm> candidates = {
        {"alpha", 1.0}, {"beta", 5.0}, {"gamma", 3.0}};
    std::vector<std::string> warnings;
    auto picked = represent::keybert_rerank(candidates, {"...", "!!!"}, provider, 2, 0.3, 30,
                                            &warnings);
    REQUIRE(picked.size() == 2);
    CHECK(picked[0].term == "beta");
    CHECK(picked[1].term == "gamma");
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("zero topic embedding") != std::string::npos);
}

TEST_CASE("rerank outputs are duplicate-free subsets of the candidate pool") {
    std::mt19937_64 rng(77);
    embed::HashingProvider provider(32);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<represent::ScoredTerm> candidates;
        const std::size_t n = 1 + rng() % 40;
        for (std::size_t i = 0; i < n; ++i) {
            candidates.push_back({"w" + std::to_string(trial) + "x" + std::to_string(i),
                                  static_cast<double>(rng() % 1000) / 10.0});
        }
        const std::size_t top_k = 1 + rng() % 12;
        const double diversity = static_cast<double>(rng() % 11) / 10.0;
        auto picked = represent::keybert_rerank(candidates, {"w1 w2 w3"}, provider, top_k,
                                                diversity);

        CHECK(picked.size() == std::min<std::size_t>(top_k, std::min<std::size_t>(n, 30)));
        std::set<std::string> pool_terms;
        for (const auto& c : candidates) pool_terms.insert(c.term);
        std::set<std::string> seen;
        for (const auto& p : picked) {
            CHECK(pool_terms.count(p.term) == 1);
            CHECK(seen.insert(p.term).second);  // no repeats
        }
    }
}

TEST_CASE("rerank rejects empty candidates and bad diversity") {
    embed::HashingProvider provider(32);
    CHECK_THROWS_AS(represent::keybert_rerank({}, {"x"}, provider, 3, 0.3), ValidationError);
    CHECK_THROWS_AS(represent::keybert_rerank({{"x", 1.0}}, {"x"}, provider, 3, 1.5),
                    ValidationError);
}

TEST_CASE("representative documents: singleton, centroid duplicate, cap") {
    std::map<std::string, embed::EmbeddingVector> vecs;
    vecs["a"] = {{1.0, 0.0}};
    vecs["b"] = {{0.0, 1.0}};
    vecs["c"] = {{0.5, 0.5}};  // equals the centroid of {a, b, c}

    CHECK(represent::representative_documents({"a"}, vecs, 3) == std::vector<std::string>{"a"});

    auto ranked = represent::representative_documents({"a", "b", "c"}, vecs, 1);
    REQUIRE(ranked.size() == 1);
    CHECK(ranked[0] == "c");

    auto all = represent::representative_documents({"a", "b", "c"}, vecs, 10);
    REQUIRE(all.size() == 3);
    CHECK(all[0] == "c");
    // a and b tie on similarity to the centroid; the smaller id wins.
    CHECK(all[1] == "a");
    CHECK(all[2] == "b");

    CHECK_THROWS_AS(represent::representative_documents({}, vecs, 2), ValidationError);
}
