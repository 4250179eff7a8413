#pragma once

// Test-only oracles: truth-table model counting with its own evaluator and
// atom layout, plus hand-rolled random generators.

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "scld/scld.hpp"

namespace brute {

using scld::fol::Formula;
using scld::fol::Op;
using scld::fol::Signature;
using scld::fol::Term;

// Atom slot for P(a, b): predicates in order, monadic ones taking one slot
// per entity and dyadic ones |E|^2 slots row-major.
struct Layout {
    std::vector<std::size_t> base;
    std::size_t atoms = 0;
    std::size_t entities = 0;
    std::vector<int> arity;

    explicit Layout(const Signature& sig) : entities(sig.entities().size()) {
        for (const auto& p : sig.predicates()) {
            base.push_back(atoms);
            arity.push_back(p.arity);
            atoms += p.arity == 1 ? entities : entities * entities;
        }
    }

    std::size_t slot(std::size_t pred, std::size_t a, std::size_t b) const {
        return arity[pred] == 1 ? base[pred] + a : base[pred] + a * entities + b;
    }
};

using Env = std::map<std::string, std::size_t>;

inline std::size_t resolve(const Term& t, const Env& env) {
    if (!t.is_variable()) return t.entity;
    auto it = env.find(t.variable);
    if (it == env.end()) throw std::logic_error("unbound variable " + t.variable);
    return it->second;
}

inline bool holds(const Formula& f, const Layout& L, std::uint64_t world, Env& env) {
    switch (f.op()) {
    case Op::Atom: {
        const std::size_t a = resolve(f.term(0), env), b = resolve(f.term(1), env);
        return (world >> L.slot(f.predicate(), a, b)) & 1u;
    }
    case Op::Not: return !holds(f.lhs(), L, world, env);
    case Op::And: return holds(f.lhs(), L, world, env) && holds(f.rhs(), L, world, env);
    case Op::Or: return holds(f.lhs(), L, world, env) || holds(f.rhs(), L, world, env);
    case Op::Implies: return !holds(f.lhs(), L, world, env) || holds(f.rhs(), L, world, env);
    case Op::Iff: return holds(f.lhs(), L, world, env) == holds(f.rhs(), L, world, env);
    case Op::ForAll:
    case Op::Exists: {
        const bool all = f.op() == Op::ForAll;
        Env inner = env;
        for (std::size_t e = 0; e < L.entities; ++e) {
            inner[f.variable()] = e;
            if (holds(f.lhs(), L, world, inner) != all) return !all;
        }
        return all;
    }
    }
    return false;
}

// Number of worlds satisfying every formula.
inline std::uint64_t count(const std::vector<Formula>& fs, const Signature& sig) {
    Layout L(sig);
    if (L.atoms > 22) throw std::invalid_argument("brute::count is limited to 22 atoms");
    std::uint64_t n = 0;
    Env env;
    for (std::uint64_t w = 0; w < (std::uint64_t{1} << L.atoms); ++w) {
        bool ok = true;
        for (const auto& f : fs)
            if (!holds(f, L, w, env)) {
                ok = false;
                break;
            }
        n += ok;
    }
    return n;
}

inline std::uint64_t count(const Formula& f, const Signature& sig) { return count(std::vector<Formula>{f}, sig); }

inline scld::Rational confirmation(const Formula& m, const std::vector<Formula>& given, const Signature& sig) {
    auto both = given;
    both.push_back(m);
    return scld::Rational(count(both, sig)) / scld::Rational(count(given, sig));
}

// Clause-list enumeration, independent of the counter's oracle.
inline std::uint64_t count_cnf(const std::vector<std::vector<int>>& clauses, std::size_t vars) {
    std::uint64_t n = 0;
    for (std::uint64_t w = 0; w < (std::uint64_t{1} << vars); ++w) {
        bool ok = true;
        for (const auto& c : clauses) {
            bool sat = false;
            for (int l : c) {
                const bool v = (w >> (std::abs(l) - 1)) & 1u;
                if (v == (l > 0)) {
                    sat = true;
                    break;
                }
            }
            if (!sat) {
                ok = false;
                break;
            }
        }
        n += ok;
    }
    return n;
}

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
    bool coin(double p = 0.5) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }
    std::mt19937_64& rng() { return rng_; }

    std::vector<std::vector<int>> cnf(std::size_t vars, std::size_t clauses, std::size_t min_len, std::size_t max_len) {
        std::vector<std::vector<int>> out;
        for (std::size_t i = 0; i < clauses; ++i) {
            const std::size_t len = min_len + below(max_len - min_len + 1);
            std::vector<int> c;
            for (std::size_t k = 0; k < len; ++k) {
                const int v = static_cast<int>(below(vars)) + 1;
                c.push_back(coin() ? v : -v);
            }
            out.push_back(std::move(c));
        }
        return out;
    }

    Term term(const Signature& sig, const std::vector<std::string>& vars) {
        if (!vars.empty() && coin(0.6)) return Term::var(vars[below(vars.size())]);
        return Term::constant(below(sig.entities().size()));
    }

    Formula atom(const Signature& sig, const std::vector<std::string>& vars) {
        const std::size_t p = below(sig.predicates().size());
        Term a = term(sig, vars);
        Term b = sig.predicate(p).arity == 2 ? term(sig, vars) : a;
        return Formula::atom(p, a, b);
    }

    // Random formula; quantifiers only when `quantify`. Variables in scope
    // are bound by enclosing quantifiers.
    Formula formula(const Signature& sig, int depth, bool quantify, std::vector<std::string> vars = {}) {
        if (depth <= 0 || coin(0.2)) return atom(sig, vars);
        const std::size_t pick = below(quantify ? 7 : 5);
        switch (pick) {
        case 0: return Formula::negation(formula(sig, depth - 1, quantify, vars));
        case 1: return Formula::conjunction(formula(sig, depth - 1, quantify, vars), formula(sig, depth - 1, quantify, vars));
        case 2: return Formula::disjunction(formula(sig, depth - 1, quantify, vars), formula(sig, depth - 1, quantify, vars));
        case 3: return Formula::implication(formula(sig, depth - 1, quantify, vars), formula(sig, depth - 1, quantify, vars));
        case 4: return Formula::biconditional(formula(sig, depth - 1, quantify, vars), formula(sig, depth - 1, quantify, vars));
        default: {
            const std::string v = "v" + std::to_string(vars.size());
            vars.push_back(v);
            Formula body = formula(sig, depth - 1, quantify, vars);
            return pick == 5 ? Formula::forall(v, body) : Formula::exists(v, body);
        }
        }
    }

    // Formula with exactly one free variable `x`, usable under a quantifier.
    Formula open_formula(const Signature& sig, int depth) {
        Formula f = formula(sig, depth, false, {"x"});
        while (scld::fol::free_variables(f).empty()) f = formula(sig, depth, false, {"x"});
        return f;
    }

    Signature signature(std::size_t max_atoms) {
        while (true) {
            const std::size_t ents = 1 + below(3);
            const std::size_t preds = 1 + below(3);
            std::vector<scld::fol::Predicate> ps;
            std::size_t atoms = 0;
            for (std::size_t i = 0; i < preds; ++i) {
                const int arity = coin(0.3) ? 2 : 1;
                ps.push_back({"P" + std::to_string(i), arity});
                atoms += arity == 1 ? ents : ents * ents;
            }
            if (atoms > max_atoms) continue;
            std::vector<std::string> es;
            for (std::size_t i = 0; i < ents; ++i) es.push_back("e" + std::to_string(i));
            return Signature(std::move(ps), std::move(es));
        }
    }

private:
    std::mt19937_64 rng_;
};

} // namespace brute
