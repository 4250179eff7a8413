#include <gtest/gtest.h>

#include <filesystem>

#include "scld/codec.hpp"
#include "scld/story.hpp"
#include "support/brute.hpp"

using namespace scld;
using namespace scld::codec;

namespace {

// Cheapest total cost over every length assignment that admits a prefix
// code (Kraft sum <= 1), lengths 1..n-1.
std::uint64_t best_prefix_cost(const std::vector<std::uint64_t>& w) {
    const std::size_t n = w.size();
    if (n == 1) return w[0];
    std::vector<std::size_t> len(n, 1);
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    while (true) {
        double kraft = 0;
        std::uint64_t cost = 0;
        for (std::size_t i = 0; i < n; ++i) {
            kraft += std::ldexp(1.0, -static_cast<int>(len[i]));
            cost += w[i] * len[i];
        }
        if (kraft <= 1.0) best = std::min(best, cost);
        std::size_t k = 0;
        while (k < n && len[k] == n - 1) len[k++] = 1;
        if (k == n) break;
        ++len[k];
    }
    return best;
}

std::vector<std::filesystem::path> bundled_stories() {
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(SCLD_DATA_DIR "/stories"))
        if (e.path().extension() == ".json") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST(Huffman, OptimalAgainstExhaustiveSearchProperty) {
    brute::Gen gen(51);
    for (int i = 0; i < 300; ++i) {
        const std::size_t n = 1 + gen.below(6);
        std::vector<std::uint64_t> w(n);
        for (auto& x : w) x = 1 + gen.below(20);
        CodeTable table(w);
        std::uint64_t cost = 0;
        for (std::size_t s = 0; s < n; ++s) cost += w[s] * table.code(s).size();
        EXPECT_EQ(cost, best_prefix_cost(w));
        EXPECT_LE(table.kraft_sum(), 1.0);
    }
}

TEST(Huffman, PrefixFree) {
    const std::vector<std::uint64_t> w{5, 9, 12, 13, 16, 45, 0, 3};
    CodeTable t(w);
    EXPECT_FALSE(t.has_code(6));
    for (std::size_t a = 0; a < w.size(); ++a)
        for (std::size_t b = 0; b < w.size(); ++b) {
            if (a == b || !t.has_code(a) || !t.has_code(b)) continue;
            const auto& x = t.code(a);
            const auto& y = t.code(b);
            EXPECT_FALSE(x.size() <= y.size() && y.prefix(x.size()) == x);
        }
}

TEST(Huffman, SingleSymbolGetsOneBit) {
    const std::vector<std::uint64_t> w{0, 7, 0};
    CodeTable t(w);
    EXPECT_EQ(t.code(1).size(), 1u);
    EXPECT_EQ(t.lengths(), (std::vector<std::size_t>{0, 1, 0}));
}

TEST(Huffman, DeterministicTieBreak) {
    const std::vector<std::uint64_t> w{1, 1, 1, 1};
    CodeTable a(w), b(w);
    for (std::size_t s = 0; s < w.size(); ++s) {
        EXPECT_EQ(a.code(s), b.code(s));
        EXPECT_EQ(a.code(s).size(), 2u);
    }
    EXPECT_EQ(a.code(0).to_string(), "00");
    EXPECT_EQ(a.code(3).to_string(), "11");
}

TEST(CodeTable, FromLengthsRejectsKraftViolation) {
    EXPECT_THROW(CodeTable::from_lengths({1, 1, 1}), std::invalid_argument);
    EXPECT_NO_THROW(CodeTable::from_lengths({1, 2, 2}));
}

TEST(Decode, Errors) {
    CodeTable t = CodeTable::from_lengths({1, 2, 0});
    EXPECT_THROW(decode_tokens(BitString(""), t), DecodeError);
    EXPECT_THROW(decode_tokens(BitString("011"), t), DecodeError);
    EXPECT_THROW(decode_tokens(BitString("1"), t), DecodeError);
    EXPECT_EQ(decode_tokens(BitString("0100"), t), (std::vector<TokenId>{0, 1, 0}));
}

TEST(FixedCost, Formula) {
    EXPECT_EQ(ceil_log2(1), 0u);
    EXPECT_EQ(ceil_log2(5), 3u);
    EXPECT_EQ(ceil_log2(8), 3u);
    EXPECT_EQ(fixed_cost(10, 1), 10u);
    EXPECT_EQ(fixed_cost(10, 20), 50u);
    EXPECT_THROW(fixed_cost(1, 0), std::invalid_argument);
}

TEST(Codec, RoundTripRandomFormulasProperty) {
    brute::Gen gen(52);
    for (int i = 0; i < 50; ++i) {
        auto sig = gen.signature(12);
        std::vector<fol::Formula> corpus;
        for (int k = 0; k < 8; ++k) corpus.push_back(gen.formula(sig, 4, true));
        auto codec = Codec::for_corpus(sig, corpus);
        for (const auto& f : corpus) EXPECT_EQ(codec.decode(codec.encode(f)), f);
    }
}

TEST(Codec, BundledStoriesRoundTripAndBeatFixedLength) {
    for (const auto& path : bundled_stories()) {
        Counter counter;
        auto story = ingest(path, counter);
        const auto& sig = story.world->signature();
        auto codec = Codec::for_corpus(sig, story.evidence.sentences());
        std::size_t huff = 0, fixed = 0;
        for (const auto& s : story.evidence.sentences()) {
            EXPECT_EQ(codec.decode(codec.encode(s)), s) << path;
            huff += codec.bits(s);
            fixed += fixed_cost(s, codec.dictionary, sig);
        }
        EXPECT_LE(huff, fixed) << path;
    }
}

TEST(Codec, DecodeRejectsNonSentences) {
    fol::Signature sig({{"P", 1}}, {"a"});
    std::vector<fol::Formula> corpus{fol::parse("P(a) & P(a)", sig)};
    auto codec = Codec::for_corpus(sig, corpus);
    const auto open = codec.table.code(codec.dictionary.id("("));
    EXPECT_THROW(codec.decode(open), DecodeError);
}

TEST(TokenDictionary, Layout) {
    fol::Signature sig({{"P", 1}, {"R", 2}}, {"a", "b"});
    TokenDictionary d(sig, {"y", "x"});
    EXPECT_EQ(d.size(), TokenDictionary::structural().size() + 2 + 2 + 2);
    EXPECT_EQ(d.id("("), 0u);
    EXPECT_EQ(d.id("P"), TokenDictionary::structural().size());
    EXPECT_LT(d.id("x"), d.id("y"));
    EXPECT_FALSE(d.find("z"));
    EXPECT_THROW(d.id("z"), InputError);
}
