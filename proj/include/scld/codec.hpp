#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "scld/error.hpp"
#include "scld/fol.hpp"

namespace scld::codec {

using TokenId = std::size_t;

// Shared token alphabet: structural symbols, then predicates and entities in
// signature order, then bound-variable names in sorted order.
class TokenDictionary {
public:
    static const std::vector<std::string>& structural() {
        static const std::vector<std::string> s{"(", ")", ",", ".", "~", "&", "|", "->", "<->", "forall", "exists"};
        return s;
    }

    TokenDictionary(const fol::Signature& sig, std::set<std::string> variables = {}) {
        for (const auto& t : structural()) add(t);
        for (const auto& p : sig.predicates()) add(p.name);
        for (const auto& e : sig.entities()) add(e);
        for (const auto& v : variables) add(v);
    }

    // Dictionary covering every variable name bound somewhere in `corpus`.
    static TokenDictionary for_corpus(const fol::Signature& sig, std::span<const fol::Formula> corpus) {
        std::set<std::string> vars;
        for (const auto& f : corpus) collect_bound(f, vars);
        return TokenDictionary(sig, std::move(vars));
    }

    std::size_t size() const noexcept { return tokens_.size(); }
    const std::string& token(TokenId id) const { return tokens_.at(id); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

    std::optional<TokenId> find(const std::string& token) const {
        auto it = ids_.find(token);
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    TokenId id(const std::string& token) const {
        auto it = ids_.find(token);
        if (it == ids_.end()) throw InputError("token '" + token + "' is not in the dictionary");
        return it->second;
    }

    std::vector<TokenId> ids(const fol::Formula& f, const fol::Signature& sig) const {
        std::vector<TokenId> out;
        for (const auto& t : fol::tokens(f, sig)) out.push_back(id(t));
        return out;
    }

private:
    static void collect_bound(const fol::Formula& f, std::set<std::string>& out) {
        switch (f.op()) {
        case fol::Op::Atom: return;
        case fol::Op::Not: collect_bound(f.lhs(), out); return;
        case fol::Op::ForAll:
        case fol::Op::Exists:
            out.insert(f.variable());
            collect_bound(f.lhs(), out);
            return;
        default:
            collect_bound(f.lhs(), out);
            collect_bound(f.rhs(), out);
        }
    }

    void add(const std::string& t) {
        // Entity or predicate names may coincide with a variable name used
        // elsewhere; one token serves both.
        if (ids_.emplace(t, tokens_.size()).second) tokens_.push_back(t);
    }

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> ids_;
};

class BitString {
public:
    BitString() = default;
    explicit BitString(std::string_view bits) {
        for (char c : bits) {
            if (c != '0' && c != '1') throw std::invalid_argument("bit strings hold only '0' and '1'");
            bits_.push_back(c == '1');
        }
    }

    void push_back(bool b) { bits_.push_back(b); }
    void append(const BitString& other) { bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end()); }
    std::size_t size() const noexcept { return bits_.size(); }
    bool empty() const noexcept { return bits_.empty(); }
    bool operator[](std::size_t i) const { return bits_[i]; }
    BitString prefix(std::size_t n) const {
        BitString b;
        b.bits_.assign(bits_.begin(), bits_.begin() + static_cast<std::ptrdiff_t>(std::min(n, bits_.size())));
        return b;
    }

    std::string to_string() const {
        std::string s;
        s.reserve(bits_.size());
        for (bool b : bits_) s.push_back(b ? '1' : '0');
        return s;
    }

    friend bool operator==(const BitString&, const BitString&) = default;

private:
    std::vector<bool> bits_;
};

// Huffman code lengths for the given weights. Zero-weight symbols get no
// code (length 0). A single coded symbol gets length 1. Merges are ordered
// by (weight, smallest member id), so results are deterministic.
inline std::vector<std::size_t> huffman_lengths(std::span<const std::uint64_t> weights) {
    std::vector<std::size_t> lengths(weights.size(), 0);
    struct Item {
        std::uint64_t weight;
        std::size_t key;
        std::vector<std::size_t> members;
    };
    auto later = [](const Item& a, const Item& b) {
        return a.weight != b.weight ? a.weight > b.weight : a.key > b.key;
    };
    std::priority_queue<Item, std::vector<Item>, decltype(later)> heap(later);
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (weights[i] > 0) heap.push(Item{weights[i], i, {i}});
    if (heap.size() == 1) {
        lengths[heap.top().key] = 1;
        return lengths;
    }
    while (heap.size() > 1) {
        Item a = heap.top();
        heap.pop();
        Item b = heap.top();
        heap.pop();
        for (auto m : a.members) ++lengths[m];
        for (auto m : b.members) ++lengths[m];
        Item merged{a.weight + b.weight, std::min(a.key, b.key), std::move(a.members)};
        merged.members.insert(merged.members.end(), b.members.begin(), b.members.end());
        heap.push(std::move(merged));
    }
    return lengths;
}

// Canonical prefix code over a token dictionary.
class CodeTable {
public:
    CodeTable() = default;

    // Codes from per-token frequencies; tokens with zero frequency are not
    // encodable.
    explicit CodeTable(std::span<const std::uint64_t> frequencies)
        : CodeTable(huffman_lengths(frequencies), canonical_tag{}) {}

    static CodeTable from_lengths(std::vector<std::size_t> lengths) { return CodeTable(std::move(lengths), canonical_tag{}); }

    // Canonical Huffman table from token frequencies of a sentence corpus.
    static CodeTable for_corpus(const TokenDictionary& dict, const fol::Signature& sig,
                                std::span<const fol::Formula> corpus) {
        std::vector<std::uint64_t> freq(dict.size(), 0);
        for (const auto& f : corpus)
            for (auto id : dict.ids(f, sig)) ++freq[id];
        return CodeTable(freq);
    }

    std::size_t alphabet_size() const noexcept { return codes_.size(); }
    const std::vector<std::size_t>& lengths() const noexcept { return lengths_; }
    bool has_code(TokenId id) const { return id < lengths_.size() && lengths_[id] > 0; }

    const BitString& code(TokenId id) const {
        if (!has_code(id)) throw InputError("token id " + std::to_string(id) + " has no code word");
        return codes_[id];
    }

    // Sum of 2^-length over coded symbols.
    double kraft_sum() const {
        double s = 0;
        for (auto l : lengths_)
            if (l > 0) s += std::ldexp(1.0, -static_cast<int>(l));
        return s;
    }

    // Bits to send the table itself: one code length per dictionary entry.
    std::size_t description_bits() const {
        std::size_t max_len = 0;
        for (auto l : lengths_) max_len = std::max(max_len, l);
        std::size_t width = 1;
        while ((std::size_t{1} << width) <= max_len) ++width;
        return lengths_.size() * width;
    }

    // Maps a code word to its token; nullopt when no token has this word.
    std::optional<TokenId> lookup(const BitString& word) const {
        auto it = decode_.find({word.size(), value(word)});
        if (it == decode_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t max_length() const noexcept { return max_length_; }

private:
    struct canonical_tag {};

    static std::uint64_t value(const BitString& b) {
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < b.size(); ++i) v = (v << 1) | (b[i] ? 1u : 0u);
        return v;
    }

    CodeTable(std::vector<std::size_t> lengths, canonical_tag) : lengths_(std::move(lengths)) {
        codes_.resize(lengths_.size());
        std::vector<TokenId> order;
        for (TokenId i = 0; i < lengths_.size(); ++i) {
            if (lengths_[i] > 63) throw std::invalid_argument("code word longer than 63 bits");
            if (lengths_[i] > 0) order.push_back(i);
        }
        std::stable_sort(order.begin(), order.end(), [&](TokenId a, TokenId b) { return lengths_[a] < lengths_[b]; });
        std::uint64_t code = 0;
        std::size_t prev = 0;
        for (std::size_t k = 0; k < order.size(); ++k) {
            const std::size_t len = lengths_[order[k]];
            if (k > 0) code = (code + 1) << (len - prev);
            prev = len;
            if (len < 64 && code >= (std::uint64_t{1} << len))
                throw std::invalid_argument("code lengths violate the Kraft inequality");
            BitString b;
            for (std::size_t i = len; i-- > 0;) b.push_back(((code >> i) & 1u) != 0);
            codes_[order[k]] = b;
            decode_.emplace(std::make_pair(len, code), order[k]);
            max_length_ = std::max(max_length_, len);
        }
    }

    std::vector<std::size_t> lengths_;
    std::vector<BitString> codes_;
    std::map<std::pair<std::size_t, std::uint64_t>, TokenId> decode_;
    std::size_t max_length_ = 0;
};

inline BitString encode_tokens(std::span<const TokenId> ids, const CodeTable& table) {
    BitString out;
    for (auto id : ids) out.append(table.code(id));
    return out;
}

inline std::vector<TokenId> decode_tokens(const BitString& bits, const CodeTable& table) {
    if (bits.empty()) throw DecodeError("empty bit string: sentences are nonempty");
    std::vector<TokenId> out;
    BitString word;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        word.push_back(bits[i]);
        if (auto id = table.lookup(word)) {
            out.push_back(*id);
            word = BitString{};
        } else if (word.size() >= table.max_length()) {
            throw DecodeError("invalid prefix at bit " + std::to_string(i + 1 - word.size()));
        }
    }
    if (!word.empty()) throw DecodeError("dangling bits: " + std::to_string(word.size()) + " bit(s) after last token");
    return out;
}

// Dictionary, code table and signature shared by both ends.
struct Codec {
    fol::Signature signature;
    TokenDictionary dictionary;
    CodeTable table;

    // Huffman codec over the token frequencies of a transmitter's corpus.
    static Codec for_corpus(const fol::Signature& sig, std::span<const fol::Formula> corpus) {
        TokenDictionary dict = TokenDictionary::for_corpus(sig, corpus);
        CodeTable table = CodeTable::for_corpus(dict, sig, corpus);
        return Codec{sig, std::move(dict), std::move(table)};
    }

    BitString encode(const fol::Formula& f) const { return encode_tokens(dictionary.ids(f, signature), table); }

    fol::Formula decode(const BitString& bits) const {
        std::vector<std::string> toks;
        for (auto id : decode_tokens(bits, table)) toks.push_back(dictionary.token(id));
        try {
            return fol::parse(fol::join_tokens(toks), signature);
        } catch (const ParseError& e) {
            throw DecodeError(std::string("decoded tokens do not form a sentence: ") + e.what());
        }
    }

    std::size_t bits(const fol::Formula& f) const { return encode(f).size(); }
};

inline std::size_t ceil_log2(std::size_t n) {
    std::size_t b = 0;
    while ((std::size_t{1} << b) < n) ++b;
    return b;
}

// Fixed-length baseline: ceil(log2 |alphabet|) bits per token, at least one.
inline std::size_t fixed_cost(std::size_t token_count, std::size_t alphabet_size) {
    if (alphabet_size == 0) throw std::invalid_argument("empty alphabet");
    return token_count * std::max<std::size_t>(1, ceil_log2(alphabet_size));
}

inline std::size_t fixed_cost(const fol::Formula& f, const TokenDictionary& dict, const fol::Signature& sig) {
    return fixed_cost(dict.ids(f, sig).size(), dict.size());
}

} // namespace scld::codec
