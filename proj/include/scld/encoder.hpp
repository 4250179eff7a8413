#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "scld/codec.hpp"
#include "scld/counter.hpp"
#include "scld/semantics.hpp"

namespace scld::encoder {

struct Budget {
    enum class Mode { Sentences, Bits };
    Mode mode = Mode::Sentences;
    std::uint64_t amount = 0;

    static Budget sentences(std::uint64_t k) { return {Mode::Sentences, k}; }
    static Budget bits(std::uint64_t b) { return {Mode::Bits, b}; }
    static Budget unlimited() { return sentences(std::numeric_limits<std::uint64_t>::max()); }
};

struct CandidateScore {
    std::size_t index = 0;
    Rational conditional;  // c(e | O)
    ModelCount joint;      // count(e & O)
    std::size_t bits = 0;
};

// One selection round: the count of the transmitted set it conditioned on,
// and every remaining candidate ranked by (conditional, bits, index).
struct Round {
    ModelCount given;
    std::vector<CandidateScore> ranking;
    std::optional<std::size_t> chosen;
};

struct SelectionState {
    std::vector<std::size_t> remaining;
    std::vector<std::size_t> transmitted;
    Evidence received;
    std::vector<Round> audit;

    static SelectionState start(const Evidence& evidence, Counter& counter) {
        std::vector<std::size_t> all(evidence.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        return SelectionState{std::move(all), {}, Evidence::none(evidence.world(), counter), {}};
    }
};

inline bool ranks_before(const CandidateScore& a, const CandidateScore& b) {
    if (a.conditional != b.conditional) return a.conditional < b.conditional;
    if (a.bits != b.bits) return a.bits < b.bits;
    return a.index < b.index;
}

// Scores every remaining candidate against the transmitted set.
inline Round rank_candidates(const SelectionState& state, const Evidence& evidence,
                             const std::vector<std::size_t>& bit_costs, Counter& counter) {
    Round round;
    round.given = state.received.count();
    for (auto i : state.remaining) {
        const fol::CnfInstance parts[] = {state.received.conjunction(), evidence.parts()[i]};
        ModelCount joint = counter.count_conjunction(parts);
        Rational c(joint.value(), round.given.value());
        round.ranking.push_back(CandidateScore{i, std::move(c), std::move(joint), bit_costs.at(i)});
    }
    std::sort(round.ranking.begin(), round.ranking.end(), ranks_before);
    return round;
}

inline void commit(SelectionState& state, const Evidence& evidence, Round round, std::size_t chosen, Counter& counter) {
    auto it = std::find(state.remaining.begin(), state.remaining.end(), chosen);
    if (it == state.remaining.end()) throw std::logic_error("committing a sentence that is not a candidate");
    state.remaining.erase(it);
    state.transmitted.push_back(chosen);
    state.received = state.received.with(evidence.sentences()[chosen], counter);
    round.chosen = chosen;
    state.audit.push_back(std::move(round));
}

// Picks the remaining sentence least confirmed by what was already sent
// (most cont-informative). Returns nullopt, leaving the state untouched,
// when every candidate is already entailed.
inline std::optional<std::size_t> select_next(SelectionState& state, const Evidence& evidence,
                                              const std::vector<std::size_t>& bit_costs, Counter& counter) {
    if (state.remaining.empty()) throw std::logic_error("select_next with no remaining candidates");
    Round round = rank_candidates(state, evidence, bit_costs, counter);
    if (round.ranking.front().conditional == 1) return std::nullopt;
    const std::size_t pick = round.ranking.front().index;
    commit(state, evidence, std::move(round), pick, counter);
    return pick;
}

struct Message {
    std::size_t index = 0;
    fol::Formula sentence;
    codec::BitString bits;
    Rational conditional;
};

enum class StopReason { BudgetExhausted, NoInformationRemains, EvidenceExhausted };

inline const char* to_string(StopReason r) {
    switch (r) {
    case StopReason::BudgetExhausted: return "budget_exhausted";
    case StopReason::NoInformationRemains: return "no_information_remains";
    case StopReason::EvidenceExhausted: return "evidence_exhausted";
    }
    return "unknown";
}

struct Transcript {
    std::vector<Message> messages;
    std::vector<Round> audit;
    StopReason stop = StopReason::EvidenceExhausted;

    std::size_t total_bits() const {
        std::size_t b = 0;
        for (const auto& m : messages) b += m.bits.size();
        return b;
    }

    std::vector<std::size_t> order() const {
        std::vector<std::size_t> o;
        for (const auto& m : messages) o.push_back(m.index);
        return o;
    }
};

inline std::vector<std::size_t> bit_costs(const Evidence& evidence, const codec::Codec& codec) {
    std::vector<std::size_t> costs;
    for (const auto& s : evidence.sentences()) costs.push_back(codec.bits(s));
    return costs;
}

namespace detail {

class BudgetTracker {
public:
    explicit BudgetTracker(Budget b) : budget_(b) {}

    bool exhausted() const {
        return budget_.mode == Budget::Mode::Sentences ? sent_ >= budget_.amount : bits_ >= budget_.amount;
    }
    bool fits(std::size_t bits) const {
        if (budget_.mode == Budget::Mode::Sentences) return sent_ < budget_.amount;
        return bits <= budget_.amount - bits_;
    }
    void charge(std::size_t bits) {
        ++sent_;
        bits_ += bits;
    }

private:
    Budget budget_;
    std::uint64_t sent_ = 0;
    std::uint64_t bits_ = 0;
};

} // namespace detail

// Greedy max-cont transmission. Sentence budgets stop after K picks; bit
// budgets stop before the first pick that would overflow.
inline Transcript run(const Evidence& evidence, Budget budget, const codec::Codec& codec, Counter& counter) {
    Transcript t;
    const auto costs = bit_costs(evidence, codec);
    SelectionState state = SelectionState::start(evidence, counter);
    detail::BudgetTracker tracker(budget);
    while (true) {
        if (state.remaining.empty()) {
            t.stop = StopReason::EvidenceExhausted;
            break;
        }
        if (tracker.exhausted()) {
            t.stop = StopReason::BudgetExhausted;
            break;
        }
        Round round = rank_candidates(state, evidence, costs, counter);
        const CandidateScore& best = round.ranking.front();
        if (best.conditional == 1) {
            t.stop = StopReason::NoInformationRemains;
            state.audit.push_back(std::move(round));
            break;
        }
        if (!tracker.fits(best.bits)) {
            t.stop = StopReason::BudgetExhausted;
            break;
        }
        const std::size_t pick = best.index;
        Rational c = best.conditional;
        tracker.charge(best.bits);
        commit(state, evidence, std::move(round), pick, counter);
        t.messages.push_back(Message{pick, evidence.sentences()[pick], codec.encode(evidence.sentences()[pick]), c});
    }
    t.audit = std::move(state.audit);
    return t;
}

// Greedy order over the whole evidence. Once nothing informative remains,
// the leftover (entailed) sentences follow in index order with c = 1.
inline Transcript full_schedule(const Evidence& evidence, const codec::Codec& codec, Counter& counter) {
    Transcript t = run(evidence, Budget::unlimited(), codec, counter);
    if (t.stop != StopReason::NoInformationRemains) return t;
    std::vector<bool> sent(evidence.size(), false);
    for (const auto& m : t.messages) sent[m.index] = true;
    for (std::size_t i = 0; i < evidence.size(); ++i)
        if (!sent[i]) t.messages.push_back(Message{i, evidence.sentences()[i], codec.encode(evidence.sentences()[i]), Rational(1)});
    t.stop = StopReason::EvidenceExhausted;
    return t;
}

// Unbiased draw in [0, n) from a 64-bit engine; rejection keeps it exact
// and independent of the standard library's distribution algorithms.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % n;
}

// Uniformly random permutation, deterministic given the seed.
inline std::vector<std::size_t> random_order(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);
    return order;
}

// Baseline: sentences sent in a seeded uniformly random order until the
// budget runs out.
inline Transcript select_random(const Evidence& evidence, Budget budget, std::uint64_t seed, const codec::Codec& codec,
                                Counter& counter) {
    Transcript t;
    const auto costs = bit_costs(evidence, codec);
    SelectionState state = SelectionState::start(evidence, counter);
    detail::BudgetTracker tracker(budget);
    t.stop = StopReason::EvidenceExhausted;
    for (auto pick : random_order(evidence.size(), seed)) {
        if (tracker.exhausted() || !tracker.fits(costs[pick])) {
            t.stop = StopReason::BudgetExhausted;
            break;
        }
        Round round;
        round.given = state.received.count();
        const fol::CnfInstance parts[] = {state.received.conjunction(), evidence.parts()[pick]};
        ModelCount joint = counter.count_conjunction(parts);
        Rational c(joint.value(), round.given.value());
        round.ranking.push_back(CandidateScore{pick, c, std::move(joint), costs[pick]});
        tracker.charge(costs[pick]);
        commit(state, evidence, std::move(round), pick, counter);
        t.messages.push_back(Message{pick, evidence.sentences()[pick], codec.encode(evidence.sentences()[pick]), c});
    }
    if (t.stop == StopReason::EvidenceExhausted && tracker.exhausted()) t.stop = StopReason::BudgetExhausted;
    t.audit = std::move(state.audit);
    return t;
}

// Transmit everything, in evidence order.
inline Transcript select_all(const Evidence& evidence, const codec::Codec& codec, Counter& counter) {
    Transcript t;
    SelectionState state = SelectionState::start(evidence, counter);
    for (std::size_t i = 0; i < evidence.size(); ++i) {
        Round round;
        round.given = state.received.count();
        const fol::CnfInstance parts[] = {state.received.conjunction(), evidence.parts()[i]};
        ModelCount joint = counter.count_conjunction(parts);
        Rational c(joint.value(), round.given.value());
        const auto bits = codec.encode(evidence.sentences()[i]);
        round.ranking.push_back(CandidateScore{i, c, std::move(joint), bits.size()});
        commit(state, evidence, std::move(round), i, counter);
        t.messages.push_back(Message{i, evidence.sentences()[i], bits, c});
    }
    t.stop = StopReason::EvidenceExhausted;
    t.audit = std::move(state.audit);
    return t;
}

} // namespace scld::encoder
