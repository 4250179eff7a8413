#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "scld/fol.hpp"

namespace scld::fol {

struct GroundAtom {
    std::size_t predicate = 0;
    std::size_t first = 0;
    std::size_t second = 0;
    friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
};

// Bijection between ground atoms and propositional variables 1..V.
// Predicates outer, then first entity, then second entity. Monadic
// predicates occupy only the diagonal, one variable per entity.
class GroundAtomIndex {
public:
    explicit GroundAtomIndex(Signature sig) : sig_(std::move(sig)) {
        const std::size_t n = sig_.entities().size();
        int next = 1;
        for (const auto& p : sig_.predicates()) {
            offsets_.push_back(next);
            next += static_cast<int>(p.monadic() ? n : n * n);
        }
        size_ = static_cast<std::size_t>(next - 1);
    }

    const Signature& signature() const noexcept { return sig_; }
    std::size_t size() const noexcept { return size_; }

    int variable(std::size_t predicate, std::size_t first, std::size_t second) const {
        const std::size_t n = sig_.entities().size();
        if (predicate >= offsets_.size() || first >= n || second >= n)
            throw std::out_of_range("ground atom out of range");
        if (sig_.predicate(predicate).monadic()) {
            if (first != second) throw std::invalid_argument("monadic atom off the diagonal");
            return offsets_[predicate] + static_cast<int>(first);
        }
        return offsets_[predicate] + static_cast<int>(first * n + second);
    }

    int variable(const GroundAtom& a) const { return variable(a.predicate, a.first, a.second); }

    GroundAtom atom(int var) const {
        if (var < 1 || static_cast<std::size_t>(var) > size_) throw std::out_of_range("variable out of range");
        auto it = std::upper_bound(offsets_.begin(), offsets_.end(), var);
        const auto p = static_cast<std::size_t>(std::distance(offsets_.begin(), it) - 1);
        const auto local = static_cast<std::size_t>(var - offsets_[p]);
        if (sig_.predicate(p).monadic()) return {p, local, local};
        const std::size_t n = sig_.entities().size();
        return {p, local / n, local % n};
    }

    std::string name(int var) const {
        const auto a = atom(var);
        const auto& p = sig_.predicate(a.predicate);
        std::string s = p.name + "(" + sig_.entity(a.first);
        if (!p.monadic()) s += ", " + sig_.entity(a.second);
        return s + ")";
    }

private:
    Signature sig_;
    std::vector<int> offsets_;
    std::size_t size_ = 0;
};

// Truth value of `f` under a full assignment of ground atoms
// (assignment[v] for v in 1..V; index 0 unused). Quantifiers range over the
// signature's entities.
inline bool evaluate(const Formula& f, const GroundAtomIndex& index, std::span<const bool> assignment) {
    struct Eval {
        const GroundAtomIndex& index;
        std::span<const bool> assignment;
        std::vector<std::pair<std::string, std::size_t>> env;

        std::size_t entity(const Term& t) const {
            if (!t.is_variable()) return t.entity;
            for (auto it = env.rbegin(); it != env.rend(); ++it)
                if (it->first == t.variable) return it->second;
            throw std::invalid_argument("free variable '" + t.variable + "' in evaluated formula");
        }

        bool operator()(const Formula& g) {
            switch (g.op()) {
            case Op::Atom:
                return assignment[static_cast<std::size_t>(
                    index.variable(g.predicate(), entity(g.term(0)), entity(g.term(1))))];
            case Op::Not: return !(*this)(g.lhs());
            case Op::And: return (*this)(g.lhs()) && (*this)(g.rhs());
            case Op::Or: return (*this)(g.lhs()) || (*this)(g.rhs());
            case Op::Implies: return !(*this)(g.lhs()) || (*this)(g.rhs());
            case Op::Iff: return (*this)(g.lhs()) == (*this)(g.rhs());
            case Op::ForAll:
            case Op::Exists: {
                const bool universal = g.op() == Op::ForAll;
                const std::size_t n = index.signature().entities().size();
                for (std::size_t e = 0; e < n; ++e) {
                    env.emplace_back(g.variable(), e);
                    const bool v = (*this)(g.lhs());
                    env.pop_back();
                    if (universal && !v) return false;
                    if (!universal && v) return true;
                }
                return universal;
            }
            }
            return false;
        }
    };
    Eval ev{index, assignment, {}};
    return ev(f);
}

using Clause = std::vector<int>;

// Clause literals ordered by variable, negative first; duplicates removed.
// Returns false for a tautological clause (contains v and -v).
inline bool normalize_clause(Clause& c) {
    std::sort(c.begin(), c.end(), [](int a, int b) {
        const int x = std::abs(a), y = std::abs(b);
        return x != y ? x < y : a < b;
    });
    c.erase(std::unique(c.begin(), c.end()), c.end());
    for (std::size_t i = 1; i < c.size(); ++i)
        if (c[i] == -c[i - 1]) return false;
    return true;
}

// Propositional clause set. Variables 1..original_vars are ground atoms;
// original_vars+1..original_vars+aux_vars are definitional auxiliaries, each
// fixed by the originals through biconditional clauses.
struct CnfInstance {
    std::size_t original_vars = 0;
    std::size_t aux_vars = 0;
    std::vector<Clause> clauses;
    std::vector<std::string> aux_provenance;
    std::shared_ptr<const GroundAtomIndex> index;

    std::size_t total_vars() const noexcept { return original_vars + aux_vars; }
};

struct CnfOptions {
    // Formulas whose negation normal form has at most this many literal
    // occurrences are distributed directly; larger ones get auxiliaries.
    std::size_t distribution_literal_threshold = 32;
    // Distribution is abandoned in favour of the definitional encoding when
    // it would emit more clauses than this.
    std::size_t max_distributed_clauses = 1024;
};

namespace detail {

inline std::size_t saturating_add(std::size_t a, std::size_t b) {
    return a > std::numeric_limits<std::size_t>::max() - b ? std::numeric_limits<std::size_t>::max() : a + b;
}

// Literal occurrences after pushing negations inward and expanding -> and <->.
inline std::size_t nnf_literal_count(const Formula& f) {
    switch (f.op()) {
    case Op::Atom: return 1;
    case Op::Not: return nnf_literal_count(f.lhs());
    case Op::Iff: {
        const std::size_t s = saturating_add(nnf_literal_count(f.lhs()), nnf_literal_count(f.rhs()));
        return saturating_add(s, s);
    }
    case Op::ForAll:
    case Op::Exists: throw std::invalid_argument("to_cnf expects a ground formula");
    default: return saturating_add(nnf_literal_count(f.lhs()), nnf_literal_count(f.rhs()));
    }
}

struct Nnf {
    enum class Kind { Lit, And, Or } kind = Kind::Lit;
    int lit = 0;
    std::vector<Nnf> kids;
};

inline Nnf make_nnf(const Formula& f, bool positive, const GroundAtomIndex& index) {
    auto join = [&](Nnf::Kind kind, Nnf a, Nnf b) {
        Nnf n;
        n.kind = kind;
        for (Nnf* part : {&a, &b}) {
            if (part->kind == kind)
                for (auto& k : part->kids) n.kids.push_back(std::move(k));
            else
                n.kids.push_back(std::move(*part));
        }
        return n;
    };
    const auto conj = positive ? Nnf::Kind::And : Nnf::Kind::Or;
    const auto disj = positive ? Nnf::Kind::Or : Nnf::Kind::And;
    switch (f.op()) {
    case Op::Atom: {
        Nnf n;
        const int v = index.variable(f.predicate(), f.term(0).entity, f.term(1).entity);
        n.lit = positive ? v : -v;
        return n;
    }
    case Op::Not: return make_nnf(f.lhs(), !positive, index);
    case Op::And: return join(conj, make_nnf(f.lhs(), positive, index), make_nnf(f.rhs(), positive, index));
    case Op::Or: return join(disj, make_nnf(f.lhs(), positive, index), make_nnf(f.rhs(), positive, index));
    case Op::Implies: return join(disj, make_nnf(f.lhs(), !positive, index), make_nnf(f.rhs(), positive, index));
    case Op::Iff: {
        // a <-> b  ==  (~a | b) & (a | ~b);   ~(a <-> b)  ==  (a | b) & (~a | ~b)
        Nnf l = join(Nnf::Kind::Or, make_nnf(f.lhs(), !positive, index), make_nnf(f.rhs(), true, index));
        Nnf r = join(Nnf::Kind::Or, make_nnf(f.lhs(), positive, index), make_nnf(f.rhs(), false, index));
        return join(Nnf::Kind::And, std::move(l), std::move(r));
    }
    default: throw std::invalid_argument("to_cnf expects a ground formula");
    }
}

// CNF by distribution; nullopt when the clause count would exceed `cap`.
inline std::optional<std::vector<Clause>> distribute(const Nnf& n, std::size_t cap) {
    switch (n.kind) {
    case Nnf::Kind::Lit: return std::vector<Clause>{Clause{n.lit}};
    case Nnf::Kind::And: {
        std::vector<Clause> out;
        for (const auto& k : n.kids) {
            auto part = distribute(k, cap);
            if (!part) return std::nullopt;
            for (auto& c : *part) out.push_back(std::move(c));
            if (out.size() > cap) return std::nullopt;
        }
        return out;
    }
    case Nnf::Kind::Or: {
        std::vector<Clause> acc{Clause{}};
        for (const auto& k : n.kids) {
            auto part = distribute(k, cap);
            if (!part) return std::nullopt;
            std::vector<Clause> next;
            for (const auto& a : acc) {
                for (const auto& b : *part) {
                    Clause c = a;
                    c.insert(c.end(), b.begin(), b.end());
                    if (!normalize_clause(c)) continue;
                    next.push_back(std::move(c));
                    if (next.size() > cap) return std::nullopt;
                }
            }
            acc = std::move(next);
        }
        return acc;
    }
    }
    return std::nullopt;
}

class Definitional {
public:
    Definitional(const GroundAtomIndex& index, CnfInstance& out) : index_(index), out_(out) {}

    // Adds clauses forcing `f` to have the given polarity.
    void assert_formula(const Formula& f, bool positive) {
        switch (f.op()) {
        case Op::Not: return assert_formula(f.lhs(), !positive);
        case Op::And:
            if (positive) {
                assert_formula(f.lhs(), true);
                assert_formula(f.rhs(), true);
                return;
            }
            break;
        case Op::Or:
            if (!positive) {
                assert_formula(f.lhs(), false);
                assert_formula(f.rhs(), false);
                return;
            }
            break;
        case Op::Implies:
            if (!positive) {
                assert_formula(f.lhs(), true);
                assert_formula(f.rhs(), false);
                return;
            }
            break;
        default: break;
        }
        if (f.op() == Op::And || f.op() == Op::Or || f.op() == Op::Implies) {
            // One clause over the (possibly defined) operands; a negated
            // conjunction is the disjunction of negated conjuncts.
            std::vector<int> lits;
            collect(f, positive ? Op::Or : Op::And, lits);
            Clause c;
            for (int l : lits) c.push_back(positive ? l : -l);
            emit(std::move(c));
            return;
        }
        const int l = encode(f);
        emit(Clause{positive ? l : -l});
    }

private:
    // Flattens a chain of `op` nodes (Implies counts as Or with a negated
    // left side) into literals representing the chained operands.
    void collect(const Formula& f, Op op, std::vector<int>& lits) {
        if (f.op() == op) {
            collect(f.lhs(), op, lits);
            collect(f.rhs(), op, lits);
            return;
        }
        if (op == Op::Or && f.op() == Op::Implies) {
            lits.push_back(-encode(f.lhs()));
            collect(f.rhs(), op, lits);
            return;
        }
        lits.push_back(encode(f));
    }

    int encode(const Formula& f) {
        switch (f.op()) {
        case Op::Atom: return index_.variable(f.predicate(), f.term(0).entity, f.term(1).entity);
        case Op::Not: return -encode(f.lhs());
        case Op::And:
        case Op::Or:
        case Op::Implies: {
            const Op op = f.op() == Op::And ? Op::And : Op::Or;
            std::vector<int> lits;
            collect(f, op, lits);
            const int d = fresh(f);
            if (op == Op::And) {
                Clause big{d};
                for (int l : lits) {
                    emit(Clause{-d, l});
                    big.push_back(-l);
                }
                emit(std::move(big));
            } else {
                Clause big{-d};
                for (int l : lits) {
                    emit(Clause{d, -l});
                    big.push_back(l);
                }
                emit(std::move(big));
            }
            return d;
        }
        case Op::Iff: {
            const int a = encode(f.lhs());
            const int b = encode(f.rhs());
            const int d = fresh(f);
            emit(Clause{-d, -a, b});
            emit(Clause{-d, a, -b});
            emit(Clause{d, a, b});
            emit(Clause{d, -a, -b});
            return d;
        }
        default: throw std::invalid_argument("to_cnf expects a ground formula");
        }
    }

    int fresh(const Formula& f) {
        ++out_.aux_vars;
        out_.aux_provenance.push_back(to_string(f, index_.signature()));
        return static_cast<int>(out_.total_vars());
    }

    void emit(Clause c) {
        if (normalize_clause(c)) out_.clauses.push_back(std::move(c));
    }

    const GroundAtomIndex& index_;
    CnfInstance& out_;
};

} // namespace detail

// Count-preserving clausification of a ground formula.
inline CnfInstance to_cnf(const Formula& f, std::shared_ptr<const GroundAtomIndex> index, const CnfOptions& opts = {}) {
    if (!is_ground(f)) throw std::invalid_argument("to_cnf expects a ground formula");
    CnfInstance out;
    out.original_vars = index->size();
    out.index = index;
    if (detail::nnf_literal_count(f) <= opts.distribution_literal_threshold) {
        auto clauses = detail::distribute(detail::make_nnf(f, true, *index), opts.max_distributed_clauses);
        if (clauses) {
            for (auto& c : *clauses)
                if (normalize_clause(c)) out.clauses.push_back(std::move(c));
            return out;
        }
    }
    detail::Definitional enc(*index, out);
    enc.assert_formula(f, true);
    return out;
}

// Appends `extra`'s clauses to `base`, shifting extra's auxiliaries past
// base's so the two definitional spaces stay disjoint.
inline void append_instance(CnfInstance& base, const CnfInstance& extra) {
    if (base.original_vars != extra.original_vars)
        throw std::invalid_argument("conjoined instances must share one ground-atom space");
    const int v = static_cast<int>(base.original_vars);
    const int shift = static_cast<int>(base.aux_vars);
    for (const auto& c : extra.clauses) {
        Clause moved;
        moved.reserve(c.size());
        for (int l : c) {
            const int var = std::abs(l);
            const int mapped = var > v ? var + shift : var;
            moved.push_back(l < 0 ? -mapped : mapped);
        }
        base.clauses.push_back(std::move(moved));
    }
    base.aux_vars += extra.aux_vars;
    base.aux_provenance.insert(base.aux_provenance.end(), extra.aux_provenance.begin(), extra.aux_provenance.end());
    if (!base.index) base.index = extra.index;
}

inline CnfInstance conjoin(std::span<const CnfInstance> parts, std::size_t original_vars) {
    CnfInstance out;
    out.original_vars = original_vars;
    for (const auto& p : parts) append_instance(out, p);
    return out;
}

// DIMACS CNF. Comment lines carry the atom and auxiliary maps, then the
// header and one zero-terminated clause per line.
inline std::string export_dimacs(const CnfInstance& c) {
    std::ostringstream os;
    if (c.index) {
        for (std::size_t v = 1; v <= c.original_vars; ++v)
            os << "c atom " << v << ' ' << c.index->name(static_cast<int>(v)) << '\n';
    }
    for (std::size_t a = 0; a < c.aux_vars; ++a) {
        os << "c aux " << c.original_vars + a + 1;
        if (a < c.aux_provenance.size()) os << ' ' << c.aux_provenance[a];
        os << '\n';
    }
    os << "p cnf " << c.total_vars() << ' ' << c.clauses.size() << '\n';
    for (const auto& clause : c.clauses) {
        for (int l : clause) os << l << ' ';
        os << "0\n";
    }
    return os.str();
}

// Reads DIMACS CNF. Variables named in "c aux" comments are restored as
// auxiliaries; everything else is original.
inline CnfInstance import_dimacs(std::string_view text) {
    CnfInstance out;
    std::istringstream in{std::string(text)};
    std::string line;
    bool have_header = false;
    std::size_t declared_vars = 0, declared_clauses = 0;
    std::size_t line_no = 0;
    Clause current;
    auto fail = [&](const std::string& what) {
        throw InputError("DIMACS line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "c") {
            std::string tag;
            if (ls >> tag && tag == "aux") {
                out.aux_provenance.emplace_back();
                std::size_t id = 0;
                ls >> id;
                std::getline(ls, out.aux_provenance.back());
                if (!out.aux_provenance.back().empty() && out.aux_provenance.back().front() == ' ')
                    out.aux_provenance.back().erase(0, 1);
            }
            continue;
        }
        if (first == "p") {
            std::string fmt;
            if (have_header || !(ls >> fmt >> declared_vars >> declared_clauses) || fmt != "cnf")
                fail("bad problem line");
            have_header = true;
            continue;
        }
        if (!have_header) fail("clause before problem line");
        ls.clear();
        ls.str(line);
        long long lit = 0;
        while (ls >> lit) {
            if (lit == 0) {
                out.clauses.push_back(std::move(current));
                current.clear();
                continue;
            }
            if (static_cast<std::size_t>(std::llabs(lit)) > declared_vars) fail("literal exceeds declared variables");
            current.push_back(static_cast<int>(lit));
        }
        if (!ls.eof()) fail("unparsable token");
    }
    if (!have_header) throw InputError("DIMACS: missing problem line");
    if (!current.empty()) out.clauses.push_back(std::move(current));
    if (out.clauses.size() != declared_clauses)
        throw InputError("DIMACS: header declares " + std::to_string(declared_clauses) + " clauses, found " +
                         std::to_string(out.clauses.size()));
    out.aux_vars = std::min(out.aux_provenance.size(), declared_vars);
    out.original_vars = declared_vars - out.aux_vars;
    return out;
}

} // namespace scld::fol
