#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "scld/codec.hpp"
#include "scld/counter.hpp"
#include "scld/encoder.hpp"
#include "scld/semantics.hpp"

namespace scld::simnet {

enum class SelectorMode { Scld, Random, All };

inline const char* to_string(SelectorMode m) {
    switch (m) {
    case SelectorMode::Scld: return "scld";
    case SelectorMode::Random: return "random";
    case SelectorMode::All: return "all";
    }
    return "unknown";
}

inline SelectorMode parse_selector_mode(const std::string& s) {
    if (s == "scld") return SelectorMode::Scld;
    if (s == "random") return SelectorMode::Random;
    if (s == "all") return SelectorMode::All;
    throw InputError("unknown selection mode '" + s + "' (expected scld, random or all)");
}

struct SelectorConfig {
    SelectorMode mode = SelectorMode::Scld;
    std::uint64_t seed = 0;
};

// The sender: its full evidence (partial view of the world) and the codec
// both ends share.
struct TransmitterNode {
    Evidence evidence;
    codec::Codec codec;
    SelectorConfig selector;

    const World& world() const { return *evidence.world(); }
};

inline encoder::Transcript transmit(const TransmitterNode& tx, encoder::Budget budget, Counter& counter) {
    switch (tx.selector.mode) {
    case SelectorMode::Scld: return encoder::run(tx.evidence, budget, tx.codec, counter);
    case SelectorMode::Random: return encoder::select_random(tx.evidence, budget, tx.selector.seed, tx.codec, counter);
    case SelectorMode::All: return encoder::select_all(tx.evidence, tx.codec, counter);
    }
    throw std::logic_error("unhandled selector mode");
}

// The receiver's view: the sentences received so far. Its measure is the
// uniform prior conditioned on them.
class ReceiverBelief {
public:
    static ReceiverBelief prior(std::shared_ptr<const World> world, Counter& counter) {
        return ReceiverBelief(Evidence::none(std::move(world), counter));
    }

    const Evidence& belief() const noexcept { return belief_; }
    const ModelCount& count() const noexcept { return belief_.count(); }
    const std::vector<fol::Formula>& received() const noexcept { return belief_.sentences(); }

    ReceiverBelief update(const fol::Formula& msg, Counter& counter) const {
        try {
            return ReceiverBelief(belief_.with(msg, counter));
        } catch (const InconsistentEvidence&) {
            throw ProtocolViolation("message '" + belief_.world()->render(msg) +
                                    "' contradicts the sentences already received");
        }
    }

private:
    explicit ReceiverBelief(Evidence e) : belief_(std::move(e)) {}
    Evidence belief_;
};

inline ReceiverBelief update_belief(const ReceiverBelief& rx, const fol::Formula& msg, Counter& counter) {
    return rx.update(msg, counter);
}

// Decodes every message of the transcript and folds it into the belief.
inline ReceiverBelief receive(ReceiverBelief rx, const encoder::Transcript& t, const codec::Codec& codec,
                              Counter& counter) {
    for (const auto& m : t.messages) rx = rx.update(codec.decode(m.bits), counter);
    return rx;
}

// A candidate world property. A hypothesis with one free variable is a
// per-entity template; otherwise it is a closed sentence about the whole
// population.
struct Hypothesis {
    std::string text;
    fol::Formula formula;
    std::optional<std::string> variable;

    bool is_template() const noexcept { return variable.has_value(); }

    fol::Formula instance(std::size_t entity) const {
        if (!variable) return formula;
        return fol::substitute(formula, *variable, entity);
    }
};

class HypothesisSet {
public:
    HypothesisSet() = default;
    explicit HypothesisSet(std::vector<Hypothesis> items) : items_(std::move(items)) {}

    static HypothesisSet parse(const World& world, std::span<const std::string> texts) {
        std::vector<Hypothesis> items;
        for (const auto& t : texts) {
            fol::Formula f = world.parse(t, fol::ParseOptions{true});
            auto free = fol::free_variables(f);
            if (free.size() > 1)
                throw InputError("hypothesis '" + t + "' has more than one free variable");
            std::optional<std::string> var;
            if (!free.empty()) var = *free.begin();
            items.push_back(Hypothesis{t, std::move(f), std::move(var)});
        }
        return HypothesisSet(std::move(items));
    }

    const std::vector<Hypothesis>& items() const noexcept { return items_; }
    const Hypothesis& operator[](std::size_t i) const { return items_.at(i); }
    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }

private:
    std::vector<Hypothesis> items_;
};

struct HypothesisValidity {
    bool exclusive = true;
    bool exhaustive = true;
    std::vector<std::string> problems;

    bool ok() const noexcept { return exclusive && exhaustive; }
};

// Mutual exclusivity and joint exhaustiveness by counting. Templates are
// checked entity by entity.
inline HypothesisValidity validate(const HypothesisSet& h, const World& world, Counter& counter) {
    HypothesisValidity out;
    if (h.empty()) {
        out.exhaustive = false;
        out.problems.emplace_back("hypothesis set is empty");
        return out;
    }
    const std::size_t entities = world.signature().entities().size();
    const bool templated = h[0].is_template();
    for (const auto& item : h.items())
        if (item.is_template() != templated)
            throw InputError("hypothesis set mixes per-entity templates and closed sentences");
    const std::size_t rounds = templated ? entities : 1;
    const ModelCount all = ModelCount::power_of_two(world.atom_count());
    for (std::size_t e = 0; e < rounds; ++e) {
        std::vector<fol::CnfInstance> compiled;
        ModelCount sum;
        for (const auto& item : h.items()) {
            compiled.push_back(world.compile(item.instance(e)));
            sum = sum + counter.count(compiled.back());
        }
        const std::string where = templated ? " for entity " + world.signature().entity(e) : std::string{};
        for (std::size_t i = 0; i < compiled.size(); ++i) {
            for (std::size_t j = i + 1; j < compiled.size(); ++j) {
                const fol::CnfInstance pair[] = {compiled[i], compiled[j]};
                if (!counter.count_conjunction(pair).is_zero()) {
                    out.exclusive = false;
                    out.problems.push_back("hypotheses " + std::to_string(i) + " and " + std::to_string(j) +
                                           " overlap" + where);
                }
            }
        }
        if (sum != all) {
            out.exhaustive = false;
            out.problems.push_back("hypothesis counts sum to " + sum.to_string() + " of " + all.to_string() + where);
        }
    }
    return out;
}

struct HypothesisChoice {
    std::size_t index = 0;
    std::vector<Rational> scores;
    bool tied = false;
};

// Score of one hypothesis under a belief: its confirmation, or for a
// template the mean confirmation of its per-entity instances.
inline Rational hypothesis_score(const Hypothesis& h, const Evidence& belief, Counter& counter) {
    const World& world = *belief.world();
    if (!h.is_template()) return confirmation(h.formula, belief, counter);
    const std::size_t n = world.signature().entities().size();
    Rational total = 0;
    for (std::size_t e = 0; e < n; ++e) total += confirmation(h.instance(e), belief, counter);
    return total / Rational(n);
}

// Highest-scoring hypothesis; ties go to the lowest index.
inline HypothesisChoice choose_hypothesis(const Evidence& belief, const HypothesisSet& h, Counter& counter) {
    if (h.empty()) throw InputError("cannot choose from an empty hypothesis set");
    HypothesisChoice out;
    for (const auto& item : h.items()) out.scores.push_back(hypothesis_score(item, belief, counter));
    for (std::size_t i = 1; i < out.scores.size(); ++i)
        if (out.scores[i] > out.scores[out.index]) out.index = i;
    for (std::size_t i = 0; i < out.scores.size(); ++i)
        if (i != out.index && out.scores[i] == out.scores[out.index]) out.tied = true;
    return out;
}

inline HypothesisChoice choose_hypothesis(const ReceiverBelief& rx, const HypothesisSet& h, Counter& counter) {
    return choose_hypothesis(rx.belief(), h, counter);
}

inline bool entails(const Evidence& e, const fol::Formula& f, Counter& counter) {
    return confirmation(fol::Formula::negation(f), e, counter) == 0;
}

struct TaskResult {
    std::size_t chosen = 0;
    double accuracy = 0;
    std::vector<bool> correct;
    std::size_t bits = 0;
    std::size_t messages = 0;
};

// Fraction of entities for which the transmitter's evidence entails the
// chosen template. Closed hypotheses score the whole population at once.
inline TaskResult evaluate_accuracy(std::size_t chosen, const HypothesisSet& h, const TransmitterNode& tx,
                                    Counter& counter) {
    TaskResult r;
    r.chosen = chosen;
    const Hypothesis& hyp = h[chosen];
    if (hyp.is_template()) {
        const std::size_t n = tx.world().signature().entities().size();
        for (std::size_t e = 0; e < n; ++e) r.correct.push_back(entails(tx.evidence, hyp.instance(e), counter));
    } else {
        r.correct.push_back(entails(tx.evidence, hyp.formula, counter));
    }
    std::size_t hits = 0;
    for (bool c : r.correct) hits += c ? 1 : 0;
    r.accuracy = static_cast<double>(hits) / static_cast<double>(r.correct.size());
    return r;
}

// Accuracy of every hypothesis against the transmitter, computed once.
class AccuracyTable {
public:
    AccuracyTable(const HypothesisSet& h, const TransmitterNode& tx, Counter& counter) {
        for (std::size_t i = 0; i < h.size(); ++i) results_.push_back(evaluate_accuracy(i, h, tx, counter));
    }
    const TaskResult& operator[](std::size_t i) const { return results_.at(i); }

private:
    std::vector<TaskResult> results_;
};

struct CurvePoint {
    std::size_t messages = 0;
    std::size_t bits = 0;
    ModelCount receiver_count;
    double reduction = 0;
    std::optional<std::size_t> chosen;
    std::optional<double> accuracy;
};

// Replays a transcript one message at a time, recording the receiver's
// uncertainty reduction and (given hypotheses) its choice and accuracy.
inline std::vector<CurvePoint> convergence_probe(const TransmitterNode& tx, const HypothesisSet* hypotheses,
                                                 const encoder::Transcript& schedule, Counter& counter) {
    std::optional<AccuracyTable> table;
    if (hypotheses && !hypotheses->empty()) table.emplace(*hypotheses, tx, counter);
    std::vector<CurvePoint> curve;
    ReceiverBelief rx = ReceiverBelief::prior(tx.evidence.world(), counter);
    std::size_t bits = 0;
    const std::size_t atoms = tx.world().atom_count();
    const bool informative = tx.evidence.count() != ModelCount::power_of_two(atoms);
    auto record = [&](std::size_t k) {
        CurvePoint p;
        p.messages = k;
        p.bits = bits;
        p.receiver_count = rx.count();
        p.reduction = informative ? uncertainty_reduction(atoms, rx.count(), tx.evidence.count()) : 100.0;
        if (table) {
            p.chosen = choose_hypothesis(rx, *hypotheses, counter).index;
            p.accuracy = (*table)[*p.chosen].accuracy;
        }
        curve.push_back(std::move(p));
    };
    record(0);
    for (std::size_t k = 0; k < schedule.messages.size(); ++k) {
        const auto& m = schedule.messages[k];
        rx = rx.update(tx.codec.decode(m.bits), counter);
        bits += m.bits.size();
        record(k + 1);
    }
    return curve;
}

} // namespace scld::simnet
