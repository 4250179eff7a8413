#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "scld/error.hpp"

namespace scld::fol {

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); };
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    if (!alpha(s.front())) return false;
    return std::all_of(s.begin() + 1, s.end(), [&](char c) { return alpha(c) || digit(c) || c == '_'; });
}

inline bool is_keyword(std::string_view s) { return s == "forall" || s == "exists"; }

struct Predicate {
    std::string name;
    int arity = 1;

    bool monadic() const noexcept { return arity == 1; }
    friend bool operator==(const Predicate&, const Predicate&) = default;
};

// Finite vocabulary: predicates (arity 1 or 2) and an ordered entity list.
// Entity order fixes the ground-atom enumeration.
class Signature {
public:
    Signature() = default;

    Signature(std::vector<Predicate> predicates, std::vector<std::string> entities)
        : predicates_(std::move(predicates)), entities_(std::move(entities)) {
        if (entities_.empty()) throw InputError("signature needs at least one entity");
        for (std::size_t i = 0; i < predicates_.size(); ++i) {
            const auto& p = predicates_[i];
            check_name(p.name, "predicate");
            if (p.arity != 1 && p.arity != 2)
                throw InputError("predicate '" + p.name + "' has arity " + std::to_string(p.arity) +
                                 "; only 1 and 2 are supported");
            if (!predicate_ids_.emplace(p.name, i).second)
                throw InputError("duplicate predicate '" + p.name + "'");
        }
        for (std::size_t j = 0; j < entities_.size(); ++j) {
            check_name(entities_[j], "entity");
            if (!entity_ids_.emplace(entities_[j], j).second)
                throw InputError("duplicate entity '" + entities_[j] + "'");
        }
    }

    const std::vector<Predicate>& predicates() const noexcept { return predicates_; }
    const std::vector<std::string>& entities() const noexcept { return entities_; }
    const Predicate& predicate(std::size_t i) const { return predicates_.at(i); }
    const std::string& entity(std::size_t j) const { return entities_.at(j); }

    std::optional<std::size_t> find_predicate(std::string_view name) const {
        auto it = predicate_ids_.find(std::string(name));
        if (it == predicate_ids_.end()) return std::nullopt;
        return it->second;
    }
    std::optional<std::size_t> find_entity(std::string_view name) const {
        auto it = entity_ids_.find(std::string(name));
        if (it == entity_ids_.end()) return std::nullopt;
        return it->second;
    }

    friend bool operator==(const Signature& a, const Signature& b) {
        return a.predicates_ == b.predicates_ && a.entities_ == b.entities_;
    }

private:
    static void check_name(const std::string& name, const char* what) {
        if (!is_identifier(name) || is_keyword(name))
            throw InputError(std::string("invalid ") + what + " name '" + name + "'");
    }

    std::vector<Predicate> predicates_;
    std::vector<std::string> entities_;
    std::unordered_map<std::string, std::size_t> predicate_ids_;
    std::unordered_map<std::string, std::size_t> entity_ids_;
};

// An entity constant or a variable name.
struct Term {
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::size_t entity = npos;
    std::string variable;

    static Term constant(std::size_t e) { return Term{e, {}}; }
    static Term var(std::string name) { return Term{npos, std::move(name)}; }

    bool is_variable() const noexcept { return !variable.empty(); }
    friend bool operator==(const Term&, const Term&) = default;
};

enum class Op { Atom, Not, And, Or, Implies, Iff, ForAll, Exists };

inline bool is_binary(Op op) { return op == Op::And || op == Op::Or || op == Op::Implies || op == Op::Iff; }
inline bool is_quantifier(Op op) { return op == Op::ForAll || op == Op::Exists; }

class Formula;

namespace detail {
struct FormulaNode;
}

// Immutable FOL syntax tree. Copies share structure. Monadic atoms carry the
// same term in both slots.
class Formula {
public:
    Formula() = default;

    static Formula atom(std::size_t predicate, Term first, Term second);
    static Formula negation(Formula f);
    static Formula binary(Op op, Formula a, Formula b);
    static Formula quantified(Op op, std::string variable, Formula body);

    static Formula conjunction(Formula a, Formula b) { return binary(Op::And, std::move(a), std::move(b)); }
    static Formula disjunction(Formula a, Formula b) { return binary(Op::Or, std::move(a), std::move(b)); }
    static Formula implication(Formula a, Formula b) { return binary(Op::Implies, std::move(a), std::move(b)); }
    static Formula biconditional(Formula a, Formula b) { return binary(Op::Iff, std::move(a), std::move(b)); }
    static Formula forall(std::string variable, Formula body) {
        return quantified(Op::ForAll, std::move(variable), std::move(body));
    }
    static Formula exists(std::string variable, Formula body) {
        return quantified(Op::Exists, std::move(variable), std::move(body));
    }

    bool empty() const noexcept { return node_ == nullptr; }
    Op op() const;
    std::size_t predicate() const;
    const Term& term(std::size_t i) const;
    const std::string& variable() const;
    // Operand of Not, body of a quantifier, left side of a binary node.
    const Formula& lhs() const;
    const Formula& rhs() const;

    friend bool operator==(const Formula& a, const Formula& b);

private:
    explicit Formula(std::shared_ptr<const detail::FormulaNode> n) : node_(std::move(n)) {}

    std::shared_ptr<const detail::FormulaNode> node_;
};

namespace detail {

struct FormulaNode {
    Op op = Op::Atom;
    std::size_t predicate = 0;
    std::array<Term, 2> terms;
    std::string variable;
    Formula lhs;
    Formula rhs;
};

} // namespace detail

inline Formula Formula::atom(std::size_t predicate, Term first, Term second) {
    auto n = std::make_shared<detail::FormulaNode>();
    n->op = Op::Atom;
    n->predicate = predicate;
    n->terms = {std::move(first), std::move(second)};
    return Formula(std::move(n));
}

inline Formula Formula::negation(Formula f) {
    auto n = std::make_shared<detail::FormulaNode>();
    n->op = Op::Not;
    n->lhs = std::move(f);
    return Formula(std::move(n));
}

inline Formula Formula::binary(Op op, Formula a, Formula b) {
    auto n = std::make_shared<detail::FormulaNode>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return Formula(std::move(n));
}

inline Formula Formula::quantified(Op op, std::string variable, Formula body) {
    auto n = std::make_shared<detail::FormulaNode>();
    n->op = op;
    n->variable = std::move(variable);
    n->lhs = std::move(body);
    return Formula(std::move(n));
}

inline Op Formula::op() const { return node_->op; }
inline std::size_t Formula::predicate() const { return node_->predicate; }
inline const Term& Formula::term(std::size_t i) const { return node_->terms.at(i); }
inline const std::string& Formula::variable() const { return node_->variable; }
inline const Formula& Formula::lhs() const { return node_->lhs; }
inline const Formula& Formula::rhs() const { return node_->rhs; }

inline bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (!a.node_ || !b.node_) return false;
    const auto& x = *a.node_;
    const auto& y = *b.node_;
    if (x.op != y.op) return false;
    switch (x.op) {
    case Op::Atom: return x.predicate == y.predicate && x.terms == y.terms;
    case Op::Not: return x.lhs == y.lhs;
    case Op::ForAll:
    case Op::Exists: return x.variable == y.variable && x.lhs == y.lhs;
    default: return x.lhs == y.lhs && x.rhs == y.rhs;
    }
}

inline Formula operator!(Formula f) { return Formula::negation(std::move(f)); }
inline Formula operator&&(Formula a, Formula b) { return Formula::conjunction(std::move(a), std::move(b)); }
inline Formula operator||(Formula a, Formula b) { return Formula::disjunction(std::move(a), std::move(b)); }

inline const char* spelling(Op op) {
    switch (op) {
    case Op::Not: return "~";
    case Op::And: return "&";
    case Op::Or: return "|";
    case Op::Implies: return "->";
    case Op::Iff: return "<->";
    case Op::ForAll: return "forall";
    case Op::Exists: return "exists";
    case Op::Atom: break;
    }
    return "";
}

namespace detail {

inline void append_term(std::vector<std::string>& out, const Term& t, const Signature& sig) {
    out.push_back(t.is_variable() ? t.variable : sig.entity(t.entity));
}

inline void append_tokens(std::vector<std::string>& out, const Formula& f, const Signature& sig) {
    switch (f.op()) {
    case Op::Atom: {
        const auto& p = sig.predicate(f.predicate());
        out.push_back(p.name);
        out.emplace_back("(");
        append_term(out, f.term(0), sig);
        if (!p.monadic()) {
            out.emplace_back(",");
            append_term(out, f.term(1), sig);
        }
        out.emplace_back(")");
        return;
    }
    case Op::Not:
        out.emplace_back("~");
        append_tokens(out, f.lhs(), sig);
        return;
    case Op::ForAll:
    case Op::Exists:
        out.emplace_back("(");
        out.emplace_back(spelling(f.op()));
        out.push_back(f.variable());
        out.emplace_back(".");
        append_tokens(out, f.lhs(), sig);
        out.emplace_back(")");
        return;
    default:
        out.emplace_back("(");
        append_tokens(out, f.lhs(), sig);
        out.emplace_back(spelling(f.op()));
        append_tokens(out, f.rhs(), sig);
        out.emplace_back(")");
        return;
    }
}

} // namespace detail

// Canonical token stream: fully parenthesized, canonical operator spelling.
inline std::vector<std::string> tokens(const Formula& f, const Signature& sig) {
    std::vector<std::string> out;
    detail::append_tokens(out, f, sig);
    return out;
}

// Joins a token stream into source text the parser accepts.
inline std::string join_tokens(const std::vector<std::string>& toks) {
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& cur = toks[i];
        if (i > 0) {
            const auto& prev = toks[i - 1];
            bool tight = prev == "(" || prev == "~" || cur == ")" || cur == "," || cur == "." ||
                         (cur == "(" && is_identifier(prev) && !is_keyword(prev));
            if (!tight) out.push_back(' ');
        }
        out += cur;
    }
    return out;
}

inline std::string to_string(const Formula& f, const Signature& sig) { return join_tokens(tokens(f, sig)); }

namespace detail {

inline void collect_free(const Formula& f, std::vector<std::string>& bound, std::set<std::string>& out) {
    switch (f.op()) {
    case Op::Atom:
        for (std::size_t i = 0; i < 2; ++i) {
            const auto& t = f.term(i);
            if (t.is_variable() && std::find(bound.begin(), bound.end(), t.variable) == bound.end())
                out.insert(t.variable);
        }
        return;
    case Op::Not: collect_free(f.lhs(), bound, out); return;
    case Op::ForAll:
    case Op::Exists:
        bound.push_back(f.variable());
        collect_free(f.lhs(), bound, out);
        bound.pop_back();
        return;
    default:
        collect_free(f.lhs(), bound, out);
        collect_free(f.rhs(), bound, out);
        return;
    }
}

} // namespace detail

inline std::set<std::string> free_variables(const Formula& f) {
    std::set<std::string> out;
    std::vector<std::string> bound;
    detail::collect_free(f, bound, out);
    return out;
}

inline bool is_ground(const Formula& f) {
    switch (f.op()) {
    case Op::Atom: return !f.term(0).is_variable() && !f.term(1).is_variable();
    case Op::Not: return is_ground(f.lhs());
    case Op::ForAll:
    case Op::Exists: return false;
    default: return is_ground(f.lhs()) && is_ground(f.rhs());
    }
}

// Replaces free occurrences of `variable` with an entity constant.
inline Formula substitute(const Formula& f, const std::string& variable, std::size_t entity) {
    switch (f.op()) {
    case Op::Atom: {
        Term a = f.term(0), b = f.term(1);
        bool hit = false;
        for (Term* t : {&a, &b}) {
            if (t->is_variable() && t->variable == variable) {
                *t = Term::constant(entity);
                hit = true;
            }
        }
        return hit ? Formula::atom(f.predicate(), std::move(a), std::move(b)) : f;
    }
    case Op::Not: return Formula::negation(substitute(f.lhs(), variable, entity));
    case Op::ForAll:
    case Op::Exists:
        if (f.variable() == variable) return f;
        return Formula::quantified(f.op(), f.variable(), substitute(f.lhs(), variable, entity));
    default:
        return Formula::binary(f.op(), substitute(f.lhs(), variable, entity), substitute(f.rhs(), variable, entity));
    }
}

// Finite-domain quantifier elimination: forall becomes a left-nested
// conjunction over the entities in signature order, exists a disjunction.
inline Formula ground(const Formula& f, const Signature& sig) {
    switch (f.op()) {
    case Op::Atom: return f;
    case Op::Not: {
        Formula inner = ground(f.lhs(), sig);
        return inner == f.lhs() ? f : Formula::negation(std::move(inner));
    }
    case Op::ForAll:
    case Op::Exists: {
        const Op join = f.op() == Op::ForAll ? Op::And : Op::Or;
        Formula acc;
        for (std::size_t e = 0; e < sig.entities().size(); ++e) {
            Formula inst = ground(substitute(f.lhs(), f.variable(), e), sig);
            acc = acc.empty() ? std::move(inst) : Formula::binary(join, std::move(acc), std::move(inst));
        }
        return acc;
    }
    default: {
        Formula l = ground(f.lhs(), sig);
        Formula r = ground(f.rhs(), sig);
        if (l == f.lhs() && r == f.rhs()) return f;
        return Formula::binary(f.op(), std::move(l), std::move(r));
    }
    }
}

struct ParseOptions {
    // Accept identifiers in term position that are neither entities nor
    // bound variables, treating them as free variables (hypothesis templates).
    bool allow_free_variables = false;
};

namespace detail {

class Parser {
public:
    Parser(std::string_view text, const Signature& sig, ParseOptions opts) : text_(text), sig_(sig), opts_(opts) {
        advance();
    }

    Formula parse_sentence() {
        Formula f = iff();
        if (tok_.kind != Tok::End) syntax("unexpected '" + std::string(tok_.text) + "'");
        return f;
    }

private:
    enum class Tok { Ident, LParen, RParen, Comma, Dot, Not, And, Or, Implies, Iff, End };
    struct Token {
        Tok kind = Tok::End;
        std::string_view text;
        SourceLocation at;
    };

    SourceLocation location(std::size_t offset) const {
        SourceLocation loc;
        loc.offset = offset;
        for (std::size_t i = 0; i < offset && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++loc.line;
                loc.column = 1;
            } else {
                ++loc.column;
            }
        }
        return loc;
    }

    [[noreturn]] void syntax(const std::string& what) const { throw ParseError(ParseError::Kind::Syntax, tok_.at, what); }

    void advance() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                       text_[pos_] == '\r'))
            ++pos_;
        tok_.at = location(pos_);
        if (pos_ >= text_.size()) {
            tok_.kind = Tok::End;
            tok_.text = "end of input";
            return;
        }
        const std::size_t start = pos_;
        const char c = text_[pos_];
        auto single = [&](Tok k) {
            ++pos_;
            tok_.kind = k;
            tok_.text = text_.substr(start, 1);
        };
        switch (c) {
        case '(': return single(Tok::LParen);
        case ')': return single(Tok::RParen);
        case ',': return single(Tok::Comma);
        case '.': return single(Tok::Dot);
        case '~': return single(Tok::Not);
        case '&': return single(Tok::And);
        case '|': return single(Tok::Or);
        default: break;
        }
        if (text_.substr(pos_, 2) == "->") {
            pos_ += 2;
            tok_.kind = Tok::Implies;
            tok_.text = text_.substr(start, 2);
            return;
        }
        if (text_.substr(pos_, 3) == "<->") {
            pos_ += 3;
            tok_.kind = Tok::Iff;
            tok_.text = text_.substr(start, 3);
            return;
        }
        if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z')) {
            while (pos_ < text_.size() && is_identifier(text_.substr(start, pos_ - start + 1))) ++pos_;
            tok_.kind = Tok::Ident;
            tok_.text = text_.substr(start, pos_ - start);
            return;
        }
        tok_.text = text_.substr(start, 1);
        syntax("unexpected character '" + std::string(1, c) + "'");
    }

    void expect(Tok kind, const char* what) {
        if (tok_.kind != kind) syntax(std::string("expected ") + what + ", found '" + std::string(tok_.text) + "'");
        advance();
    }

    Formula iff() {
        Formula f = imp();
        while (tok_.kind == Tok::Iff) {
            advance();
            f = Formula::biconditional(std::move(f), imp());
        }
        return f;
    }

    // Implication associates to the right.
    Formula imp() {
        Formula f = disj();
        if (tok_.kind == Tok::Implies) {
            advance();
            return Formula::implication(std::move(f), imp());
        }
        return f;
    }

    Formula disj() {
        Formula f = conj();
        while (tok_.kind == Tok::Or) {
            advance();
            f = Formula::disjunction(std::move(f), conj());
        }
        return f;
    }

    Formula conj() {
        Formula f = unary();
        while (tok_.kind == Tok::And) {
            advance();
            f = Formula::conjunction(std::move(f), unary());
        }
        return f;
    }

    Formula unary() {
        switch (tok_.kind) {
        case Tok::Not:
            advance();
            return Formula::negation(unary());
        case Tok::LParen: {
            advance();
            Formula f = iff();
            expect(Tok::RParen, "')'");
            return f;
        }
        case Tok::Ident:
            if (tok_.text == "forall" || tok_.text == "exists") return quantifier();
            return atom();
        default: syntax("expected a formula, found '" + std::string(tok_.text) + "'");
        }
    }

    Formula quantifier() {
        const Op op = tok_.text == "forall" ? Op::ForAll : Op::Exists;
        advance();
        if (tok_.kind != Tok::Ident || is_keyword(tok_.text)) syntax("expected a variable name");
        std::string var(tok_.text);
        const SourceLocation at = tok_.at;
        if (std::find(bound_.begin(), bound_.end(), var) != bound_.end() || free_.count(var))
            throw ParseError(ParseError::Kind::Shadowing, at, "variable '" + var + "' is already bound");
        if (sig_.find_entity(var))
            throw ParseError(ParseError::Kind::Shadowing, at, "variable '" + var + "' shadows an entity");
        advance();
        expect(Tok::Dot, "'.'");
        bound_.push_back(var);
        seen_.insert(var);
        Formula body = unary();
        bound_.pop_back();
        return Formula::quantified(op, std::move(var), std::move(body));
    }

    Formula atom() {
        const std::string name(tok_.text);
        const SourceLocation name_at = tok_.at;
        advance();
        expect(Tok::LParen, "'('");
        std::vector<std::pair<std::string, SourceLocation>> args;
        auto read_term = [&] {
            if (tok_.kind != Tok::Ident || is_keyword(tok_.text)) syntax("expected a term");
            args.emplace_back(std::string(tok_.text), tok_.at);
            advance();
        };
        read_term();
        if (tok_.kind == Tok::Comma) {
            advance();
            read_term();
        }
        expect(Tok::RParen, "')'");

        auto pred = sig_.find_predicate(name);
        if (!pred) throw ParseError(ParseError::Kind::UnknownPredicate, name_at, "'" + name + "'");
        const auto& p = sig_.predicate(*pred);
        if (static_cast<int>(args.size()) != p.arity)
            throw ParseError(ParseError::Kind::ArityMismatch, name_at,
                             "'" + name + "' takes " + std::to_string(p.arity) + " argument(s), got " +
                                 std::to_string(args.size()));
        Term a = resolve(args[0].first, args[0].second);
        Term b = args.size() == 2 ? resolve(args[1].first, args[1].second) : a;
        return Formula::atom(*pred, std::move(a), std::move(b));
    }

    Term resolve(const std::string& name, SourceLocation at) {
        if (std::find(bound_.begin(), bound_.end(), name) != bound_.end()) return Term::var(name);
        if (auto e = sig_.find_entity(name)) return Term::constant(*e);
        if (opts_.allow_free_variables) {
            free_.insert(name);
            return Term::var(name);
        }
        if (seen_.count(name))
            throw ParseError(ParseError::Kind::UnboundVariable, at, "'" + name + "' is used outside its quantifier");
        throw ParseError(ParseError::Kind::UnknownEntity, at, "'" + name + "' is not a declared entity");
    }

    std::string_view text_;
    const Signature& sig_;
    ParseOptions opts_;
    std::size_t pos_ = 0;
    Token tok_;
    std::vector<std::string> bound_;
    std::set<std::string> free_;
    std::set<std::string> seen_;
};

} // namespace detail

inline Formula parse(std::string_view text, const Signature& sig, ParseOptions opts = {}) {
    detail::Parser p(text, sig, opts);
    return p.parse_sentence();
}

} // namespace scld::fol
