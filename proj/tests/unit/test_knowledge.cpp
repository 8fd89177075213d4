#include <gtest/gtest.h>

#include <sstream>

#include "generators.hpp"
#include "semsal/knowledge.hpp"
#include "semsal/tensor_io.hpp"

namespace semsal {
namespace {

Taxonomy chain_taxonomy() {
    // entity -> animal -> {dog, cat}; entity -> thing -> cup
    return Taxonomy("entity", {{"animal", "entity"}, {"thing", "entity"}, {"dog", "animal"}, {"cat", "animal"}, {"cup", "thing"}});
}

// Independent oracle: walk both root paths and take the deepest shared node.
double wup_oracle(const Taxonomy& t, const std::string& a, const std::string& b) {
    std::vector<std::string> pa{a}, pb{b};
    while (auto p = t.parent(pa.back())) pa.push_back(*p);
    while (auto p = t.parent(pb.back())) pb.push_back(*p);
    std::size_t shared = 0;
    while (shared < pa.size() && shared < pb.size() && pa[pa.size() - 1 - shared] == pb[pb.size() - 1 - shared]) ++shared;
    return 2.0 * static_cast<double>(shared) / static_cast<double>(pa.size() + pb.size());
}

TEST(Taxonomy, DepthCountsTheRoot) {
    const auto t = chain_taxonomy();
    EXPECT_EQ(t.depth("entity"), 1u);
    EXPECT_EQ(t.depth("dog"), 3u);
    EXPECT_EQ(t.ancestors("dog"), (std::vector<std::string>{"dog", "animal", "entity"}));
}

TEST(Taxonomy, RejectsMalformedTrees) {
    EXPECT_THROW(Taxonomy("r", {{"a", "r"}, {"a", "b"}, {"b", "r"}}), FormatError);
    EXPECT_THROW(Taxonomy("r", {{"a", "b"}, {"b", "a"}}), FormatError);
    EXPECT_THROW(Taxonomy("r", {{"a", "x"}}), FormatError);
    std::istringstream two_roots("a\t-\nb\t-\n");
    EXPECT_THROW(Taxonomy::parse(two_roots), FormatError);
    std::istringstream no_tab("a b\n");
    EXPECT_THROW(Taxonomy::parse(no_tab), FormatError);
}

TEST(Wup, HandCases) {
    const auto t = chain_taxonomy();
    EXPECT_EQ(wup_similarity(t, "dog", "dog"), 1.0);
    EXPECT_EQ(wup_similarity(t, "dog", "cat"), 2.0 * 2.0 / (3.0 + 3.0));
    EXPECT_NEAR(wup_similarity(t, "dog", "cat"), 0.6667, 5e-5);
    EXPECT_EQ(wup_similarity(t, "dog", "cup"), 2.0 / 6.0);
    EXPECT_EQ(wup_similarity(t, "dog", "animal"), 2.0 * 2.0 / (3.0 + 2.0));
    EXPECT_THROW(wup_similarity(t, "dog", "bus"), UnknownLabel);
}

TEST(Wup, MatchesPathOracleOnRandomTrees) {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.below(15);
        const auto t = testing::random_taxonomy(rng, n);
        for (int k = 0; k < 20; ++k) {
            const auto a = "n" + std::to_string(rng.below(n)), b = "n" + std::to_string(rng.below(n));
            EXPECT_DOUBLE_EQ(wup_similarity(t, a, b), wup_oracle(t, a, b));
        }
    }
}

TEST(Cooccurrence, HandCount) {
    const CooccurrenceCorpus corpus{{{"person", "dog"}, {"person", "dog"}, {"person", "cup"}}};
    const auto g = build_cooccurrence_graph(corpus, {"person", "dog", "cup"});
    EXPECT_EQ(g.between("person", "dog"), 1.0);
    EXPECT_EQ(g.between("person", "cup"), 0.5);
    EXPECT_EQ(g.between("dog", "cup"), 0.0);
    EXPECT_EQ(g.between("cup", "cup"), 1.0);
    EXPECT_EQ(g.theta, kCooccurrenceTheta);
}

TEST(Cooccurrence, CountsPresenceNotMultiplicity) {
    const CooccurrenceCorpus corpus{{{"a", "a", "b"}, {"a", "b"}, {"b", "c"}}};
    const auto counts = cooccurrence_counts(corpus, {"a", "b", "c"});
    EXPECT_EQ(counts[0 * 3 + 1], 2u);
    EXPECT_EQ(counts[0 * 3 + 0], 0u);
    EXPECT_EQ(counts[1 * 3 + 2], 1u);
}

TEST(Cooccurrence, ErrorsOnEmptyOrUnknown) {
    EXPECT_THROW(build_cooccurrence_graph({}, {"a", "b"}), std::invalid_argument);
    const CooccurrenceCorpus lonely{{{"a"}, {"b"}}};
    EXPECT_THROW(build_cooccurrence_graph(lonely, {"a", "b"}), std::invalid_argument);
    const CooccurrenceCorpus stranger{{{"a", "zebra"}}};
    EXPECT_THROW(build_cooccurrence_graph(stranger, {"a", "b"}), UnknownLabel);
}

TEST(ProximityGraph, BuildersAreSymmetricWithUnitDiagonal) {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + rng.below(10);
        const auto t = testing::random_taxonomy(rng, n);
        std::vector<std::string> cats;
        for (std::size_t k = 0; k < n; ++k) cats.push_back("n" + std::to_string(k));
        EXPECT_NO_THROW(build_wup_graph(t, cats).validate());
        auto corpus = testing::random_corpus(rng, cats, 30);
        corpus.records.push_back({cats[0], cats[1]});
        EXPECT_NO_THROW(build_cooccurrence_graph(corpus, cats).validate());
    }
}

TEST(ProximityGraph, ValidateCatchesViolations) {
    ProximityGraph g{{"a", "b"}, {1, 0.5, 0.4, 1}, 0.3};
    EXPECT_THROW(g.validate(), std::invalid_argument);
    g.adjacency = {0.9, 0.5, 0.5, 1};
    EXPECT_THROW(g.validate(), std::invalid_argument);
    g.adjacency = {1, 1.5, 1.5, 1};
    EXPECT_THROW(g.validate(), std::invalid_argument);
}

TEST(GraphIo, RoundTripsExactly) {
    const auto g = build_wup_graph(chain_taxonomy(), {"dog", "cat", "cup"});
    std::stringstream buf;
    write_graph(buf, g);
    EXPECT_EQ(read_graph(buf), g);
}

TEST(GraphIo, RejectsCorruptFiles) {
    std::istringstream asym("GRAPH1\na,b\ntheta=0.3\n1,0.5\n0.4,1\n");
    EXPECT_THROW(read_graph(asym), FormatError);
    std::istringstream short_rows("GRAPH1\na,b\ntheta=0.3\n1,0.5\n");
    EXPECT_THROW(read_graph(short_rows), FormatError);
    std::istringstream bad_header("GRAPH2\n");
    EXPECT_THROW(read_graph(bad_header), FormatError);
}

}  // namespace
}  // namespace semsal
