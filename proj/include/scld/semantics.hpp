#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "scld/cnf.hpp"
#include "scld/counter.hpp"
#include "scld/fol.hpp"

namespace scld {

using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string to_string(const Rational& r) {
    if (boost::multiprecision::denominator(r) == 1) return boost::multiprecision::numerator(r).str();
    return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

// A finite world: signature, its ground-atom enumeration, and the
// clausification settings used for every sentence compiled against it.
class World {
public:
    explicit World(fol::Signature sig, fol::CnfOptions cnf = {})
        : index_(std::make_shared<const fol::GroundAtomIndex>(std::move(sig))), cnf_(cnf) {}

    const fol::Signature& signature() const noexcept { return index_->signature(); }
    const fol::GroundAtomIndex& index() const noexcept { return *index_; }
    const std::shared_ptr<const fol::GroundAtomIndex>& index_ptr() const noexcept { return index_; }
    const fol::CnfOptions& cnf_options() const noexcept { return cnf_; }

    // Number of ground atoms V; the state space has 2^V descriptions.
    std::size_t atom_count() const noexcept { return index_->size(); }

    fol::Formula parse(std::string_view text, fol::ParseOptions opts = {}) const {
        return fol::parse(text, signature(), opts);
    }

    fol::CnfInstance compile(const fol::Formula& f) const {
        return fol::to_cnf(fol::ground(f, signature()), index_, cnf_);
    }

    fol::CnfInstance tautology() const {
        fol::CnfInstance c;
        c.original_vars = atom_count();
        c.index = index_;
        return c;
    }

    std::string render(const fol::Formula& f) const { return fol::to_string(f, signature()); }

private:
    std::shared_ptr<const fol::GroundAtomIndex> index_;
    fol::CnfOptions cnf_;
};

// Ordered evidence sentences with their compiled conjunction and its model
// count. Always jointly satisfiable.
class Evidence {
public:
    Evidence(std::shared_ptr<const World> world, std::vector<fol::Formula> sentences, Counter& counter)
        : world_(std::move(world)), sentences_(std::move(sentences)) {
        parts_.reserve(sentences_.size());
        for (const auto& s : sentences_) parts_.push_back(world_->compile(s));
        conjunction_ = fol::conjoin(parts_, world_->atom_count());
        conjunction_.index = world_->index_ptr();
        count_ = counter.count(conjunction_);
        if (count_.is_zero()) throw InconsistentEvidence("evidence sentences are jointly unsatisfiable");
    }

    static Evidence none(std::shared_ptr<const World> world, Counter& counter) {
        return Evidence(std::move(world), {}, counter);
    }

    const std::shared_ptr<const World>& world() const noexcept { return world_; }
    const std::vector<fol::Formula>& sentences() const noexcept { return sentences_; }
    const std::vector<fol::CnfInstance>& parts() const noexcept { return parts_; }
    const fol::CnfInstance& conjunction() const noexcept { return conjunction_; }
    const ModelCount& count() const noexcept { return count_; }
    std::size_t size() const noexcept { return sentences_.size(); }
    bool empty() const noexcept { return sentences_.empty(); }

    Evidence with(const fol::Formula& sentence, Counter& counter) const {
        auto next = sentences_;
        next.push_back(sentence);
        return Evidence(world_, std::move(next), counter);
    }

private:
    std::shared_ptr<const World> world_;
    std::vector<fol::Formula> sentences_;
    std::vector<fol::CnfInstance> parts_;
    fol::CnfInstance conjunction_;
    ModelCount count_;
};

// Prior over state descriptions. Only the uniform prior is implemented for
// sentence confirmation; `lambda` parameterizes the predictive rule.
struct MeasureConfig {
    enum class Prior { Uniform };
    Prior prior = Prior::Uniform;
    std::function<Rational(const Rational& w)> lambda = [](const Rational& w) { return w; };
};

// Models of `sentence` jointly with `given`.
inline ModelCount joint_count(const fol::CnfInstance& sentence, const Evidence& given, Counter& counter) {
    const fol::CnfInstance parts[] = {given.conjunction(), sentence};
    return counter.count_conjunction(parts);
}

// c(m, e) = count(m & e) / count(e) under the uniform prior.
inline Rational confirmation(const fol::CnfInstance& m, const Evidence& given, Counter& counter,
                             const MeasureConfig& cfg = {}) {
    if (cfg.prior != MeasureConfig::Prior::Uniform) throw std::invalid_argument("unsupported prior");
    if (given.count().is_zero()) throw InconsistentEvidence("conditioning on unsatisfiable evidence");
    return Rational(joint_count(m, given, counter).value(), given.count().value());
}

inline Rational confirmation(const fol::Formula& m, const Evidence& given, Counter& counter,
                             const MeasureConfig& cfg = {}) {
    return confirmation(given.world()->compile(m), given, counter, cfg);
}

inline Rational cont(const fol::Formula& m, const Evidence& given, Counter& counter, const MeasureConfig& cfg = {}) {
    return Rational(1) - confirmation(m, given, counter, cfg);
}

inline Rational cont(const fol::CnfInstance& m, const Evidence& given, Counter& counter,
                     const MeasureConfig& cfg = {}) {
    return Rational(1) - confirmation(m, given, counter, cfg);
}

// Predictive probability that the next individual falls in a cell of weight
// w after n observations, n_c of them in the cell: (n_c + lambda/w) / (n + lambda).
inline Rational predictive(std::uint64_t n, std::uint64_t n_c, const Rational& w, const Rational& lambda) {
    if (n_c > n) throw std::domain_error("confirming count exceeds observation count");
    if (w < 1) throw std::domain_error("state-space size must be at least 1");
    if (lambda < 0) throw std::domain_error("lambda must be nonnegative");
    const Rational denom = Rational(n) + lambda;
    if (denom <= 0) throw std::domain_error("n + lambda must be positive");
    return (Rational(n_c) + lambda / w) / denom;
}

inline Rational predictive(std::uint64_t n, std::uint64_t n_c, const Rational& w, const MeasureConfig& cfg) {
    return predictive(n, n_c, w, cfg.lambda(w));
}

// Fraction (in percent) of the bits of uncertainty removed by the full
// evidence that the received subset already removes:
// 100 * (V - log2 count(O)) / (V - log2 count(E)).
inline double uncertainty_reduction(std::size_t atoms, const ModelCount& received, const ModelCount& full) {
    if (received.is_zero() || full.is_zero()) throw InconsistentEvidence("uncertainty of unsatisfiable evidence");
    if (full == ModelCount::power_of_two(atoms))
        throw std::domain_error("uncertainty reduction undefined: full evidence rules out no state");
    if (received == full) return 100.0;
    if (received == ModelCount::power_of_two(atoms)) return 0.0;
    const double v = static_cast<double>(atoms);
    return 100.0 * (v - received.log2()) / (v - full.log2());
}

inline double uncertainty_reduction(const Evidence& received, const Evidence& full) {
    return uncertainty_reduction(full.world()->atom_count(), received.count(), full.count());
}

} // namespace scld
