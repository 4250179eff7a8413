#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "scld/cnf.hpp"
#include "scld/error.hpp"

namespace scld {

using BigInt = boost::multiprecision::cpp_int;

// Exact number of satisfying assignments.
class ModelCount {
public:
    ModelCount() = default;
    ModelCount(BigInt value) : value_(std::move(value)) {
        if (value_ < 0) throw std::invalid_argument("negative model count");
    }
    ModelCount(std::uint64_t value) : value_(value) {}

    static ModelCount power_of_two(std::size_t exponent) {
        BigInt v = 1;
        v <<= exponent;
        return ModelCount(std::move(v));
    }

    const BigInt& value() const noexcept { return value_; }
    bool is_zero() const { return value_.is_zero(); }

    // Base-2 logarithm; only defined for positive counts.
    double log2() const {
        if (value_ <= 0) throw std::domain_error("log2 of a zero model count");
        const std::size_t msb = boost::multiprecision::msb(value_);
        if (msb < 63) return std::log2(static_cast<double>(value_.convert_to<std::uint64_t>()));
        const std::size_t shift = msb - 62;
        const BigInt top = value_ >> shift;
        return std::log2(static_cast<double>(top.convert_to<std::uint64_t>())) + static_cast<double>(shift);
    }

    std::string to_string() const { return value_.str(); }

    friend ModelCount operator*(const ModelCount& a, const ModelCount& b) { return ModelCount(a.value_ * b.value_); }
    friend ModelCount operator+(const ModelCount& a, const ModelCount& b) { return ModelCount(a.value_ + b.value_); }
    friend bool operator==(const ModelCount& a, const ModelCount& b) { return a.value_ == b.value_; }
    friend std::strong_ordering operator<=>(const ModelCount& a, const ModelCount& b) {
        const int c = a.value_.compare(b.value_);
        return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }

private:
    BigInt value_ = 0;
};

struct CounterConfig {
    std::uint64_t max_decisions = 10'000'000;
    std::size_t max_cache_bytes = std::size_t{256} << 20;
    bool use_cache = true;
};

struct CounterStats {
    std::uint64_t decisions = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    std::size_t cache_bytes = 0;
    std::size_t cache_entries = 0;
};

// Exact #SAT by DPLL: unit propagation, splitting into variable-disjoint
// components, and a component cache keyed by the full canonical clause
// bytes. No pure-literal elimination (it drops models).
//
// Single-threaded; one instance owns its cache. The cache survives across
// count() calls: keys are structural, so entries stay valid for any input.
class Counter {
public:
    explicit Counter(CounterConfig config = {}) : config_(config) {}

    const CounterConfig& config() const noexcept { return config_; }
    const CounterStats& stats() const noexcept { return stats_; }

    void clear_cache() {
        cache_.clear();
        stats_.cache_bytes = 0;
        stats_.cache_entries = 0;
    }

    ModelCount count(const fol::CnfInstance& instance) {
        return count_clauses(instance.clauses, instance.total_vars());
    }

    // Count of the conjunction of instances sharing one ground-atom space;
    // auxiliaries are renumbered apart first.
    ModelCount count_conjunction(std::span<const fol::CnfInstance> parts) {
        if (parts.empty()) throw std::invalid_argument("count_conjunction needs at least one part");
        return count(fol::conjoin(parts, parts.front().original_vars));
    }

    ModelCount count_clauses(const std::vector<fol::Clause>& input, std::size_t total_vars) {
        decisions_this_call_ = 0;
        if (config_.use_cache && stats_.cache_bytes > config_.max_cache_bytes / 2) clear_cache();

        Flat flat;
        for (const auto& c : input) {
            for (int l : c)
                if (l == 0 || static_cast<std::size_t>(std::abs(l)) > total_vars)
                    throw std::invalid_argument("literal " + std::to_string(l) + " outside declared variables");
            fol::Clause n = c;
            if (!fol::normalize_clause(n)) continue;
            if (n.empty()) return ModelCount{};
            flat.insert(flat.end(), n.begin(), n.end());
            flat.push_back(0);
        }

        std::size_t vars = 0;
        Flat local = localize(flat, static_cast<int>(total_vars), vars);
        Flat reduced;
        std::size_t assigned = 0;
        if (!propagate(local, vars, 0, reduced, assigned)) return ModelCount{};
        const std::size_t remaining = distinct_vars(reduced, vars);
        BigInt result = count_formula(reduced, static_cast<int>(vars));
        result <<= total_vars - assigned - remaining;
        return ModelCount(std::move(result));
    }

private:
    // Clauses laid end to end, each terminated by 0.
    using Flat = std::vector<int>;

    // Renames variables to 1..k preserving order, sorts clauses and drops
    // duplicates. Literals inside clauses stay sorted by variable. Equal
    // results mean equal counts.
    Flat localize(const Flat& in, int max_var, std::size_t& vars) {
        rename_.assign(static_cast<std::size_t>(max_var) + 1, 0);
        for (int l : in)
            if (l != 0) rename_[static_cast<std::size_t>(std::abs(l))] = 1;
        int next = 0;
        for (auto& r : rename_)
            if (r) r = ++next;
        vars = static_cast<std::size_t>(next);

        Flat mapped(in.size());
        std::vector<std::pair<std::uint32_t, std::uint32_t>> spans;
        std::uint32_t start = 0;
        for (std::size_t i = 0; i < in.size(); ++i) {
            const int l = in[i];
            if (l == 0) {
                mapped[i] = 0;
                spans.emplace_back(start, static_cast<std::uint32_t>(i) - start);
                start = static_cast<std::uint32_t>(i) + 1;
                continue;
            }
            const int id = rename_[static_cast<std::size_t>(std::abs(l))];
            mapped[i] = l < 0 ? -id : id;
        }
        auto less = [&](const auto& x, const auto& y) {
            return std::lexicographical_compare(mapped.begin() + x.first, mapped.begin() + x.first + x.second,
                                                mapped.begin() + y.first, mapped.begin() + y.first + y.second);
        };
        auto same = [&](const auto& x, const auto& y) {
            return x.second == y.second &&
                   std::equal(mapped.begin() + x.first, mapped.begin() + x.first + x.second, mapped.begin() + y.first);
        };
        std::sort(spans.begin(), spans.end(), less);
        Flat out;
        out.reserve(in.size());
        for (std::size_t k = 0; k < spans.size(); ++k) {
            if (k > 0 && same(spans[k - 1], spans[k])) continue;
            out.insert(out.end(), mapped.begin() + spans[k].first, mapped.begin() + spans[k].first + spans[k].second);
            out.push_back(0);
        }
        return out;
    }

    std::size_t distinct_vars(const Flat& f, std::size_t nvars) {
        mark_.assign(nvars + 1, 0);
        std::size_t n = 0;
        for (int l : f) {
            if (l == 0) continue;
            auto& m = mark_[static_cast<std::size_t>(std::abs(l))];
            if (!m) {
                m = 1;
                ++n;
            }
        }
        return n;
    }

    // Assigns `decision` (0 for none) and propagates units to fixpoint.
    // On success `out` holds the residual clauses and `assigned` the number
    // of variables fixed. Returns false on conflict.
    static bool propagate(const Flat& f, std::size_t nvars, int decision, Flat& out, std::size_t& assigned) {
        std::vector<std::int8_t> value(nvars + 1, 0);
        assigned = 0;
        auto assign = [&](int lit) {
            value[static_cast<std::size_t>(std::abs(lit))] = lit > 0 ? 1 : -1;
            ++assigned;
        };
        if (decision != 0) assign(decision);
        std::vector<std::uint32_t> starts;
        for (std::size_t i = 0, s = 0; i < f.size(); ++i)
            if (f[i] == 0) {
                starts.push_back(static_cast<std::uint32_t>(s));
                s = i + 1;
            }
        std::vector<char> done(starts.size(), 0);
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t c = 0; c < starts.size(); ++c) {
                if (done[c]) continue;
                int unassigned = 0;
                int last = 0;
                bool sat = false;
                for (std::size_t i = starts[c]; f[i] != 0; ++i) {
                    const int l = f[i];
                    const std::int8_t v = value[static_cast<std::size_t>(std::abs(l))];
                    if (v == 0) {
                        ++unassigned;
                        last = l;
                    } else if ((v > 0) == (l > 0)) {
                        sat = true;
                        break;
                    }
                }
                if (sat) {
                    done[c] = 1;
                    continue;
                }
                if (unassigned == 0) return false;
                if (unassigned == 1) {
                    assign(last);
                    done[c] = 1;
                    changed = true;
                }
            }
        }
        out.clear();
        for (std::size_t c = 0; c < starts.size(); ++c) {
            if (done[c]) continue;
            const std::size_t mark = out.size();
            bool sat = false;
            for (std::size_t i = starts[c]; f[i] != 0; ++i) {
                const int l = f[i];
                const std::int8_t v = value[static_cast<std::size_t>(std::abs(l))];
                if (v == 0)
                    out.push_back(l);
                else if ((v > 0) == (l > 0))
                    sat = true;
            }
            if (sat)
                out.resize(mark);
            else
                out.push_back(0);
        }
        return true;
    }

    // Product over variable-disjoint components. Every variable of `f` is
    // constrained; free variables are accounted by callers.
    BigInt count_formula(const Flat& f, int max_var) {
        if (f.empty()) return 1;
        std::vector<int> parent(static_cast<std::size_t>(max_var) + 1);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int x) {
            while (parent[static_cast<std::size_t>(x)] != x) {
                parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
                x = parent[static_cast<std::size_t>(x)];
            }
            return x;
        };
        for (std::size_t i = 0; i < f.size();) {
            const int root = find(std::abs(f[i]));
            for (++i; f[i] != 0; ++i) {
                const int r = find(std::abs(f[i]));
                if (r != root) parent[static_cast<std::size_t>(r)] = root;
            }
            ++i;
        }
        std::vector<int> slot(static_cast<std::size_t>(max_var) + 1, -1);
        std::vector<Flat> groups;
        for (std::size_t i = 0; i < f.size();) {
            const auto root = static_cast<std::size_t>(find(std::abs(f[i])));
            if (slot[root] < 0) {
                slot[root] = static_cast<int>(groups.size());
                groups.emplace_back();
            }
            Flat& g = groups[static_cast<std::size_t>(slot[root])];
            for (; f[i] != 0; ++i) g.push_back(f[i]);
            g.push_back(0);
            ++i;
        }
        BigInt result = 1;
        for (const auto& g : groups) {
            std::size_t vars = 0;
            const Flat local = localize(g, max_var, vars);
            result *= count_component(local, vars);
            if (result.is_zero()) break;
        }
        return result;
    }

    static std::string cache_key(const Flat& f) {
        return std::string(reinterpret_cast<const char*>(f.data()), f.size() * sizeof(int));
    }

    // Highest occurrence count, ties to the lowest variable.
    static int branch_variable(const Flat& f, std::size_t nvars) {
        std::vector<std::uint32_t> occ(nvars + 1, 0);
        for (int l : f)
            if (l != 0) ++occ[static_cast<std::size_t>(std::abs(l))];
        int best = 1;
        for (std::size_t v = 2; v <= nvars; ++v)
            if (occ[v] > occ[static_cast<std::size_t>(best)]) best = static_cast<int>(v);
        return best;
    }

    BigInt count_component(const Flat& comp, std::size_t nvars) {
        std::string key;
        if (config_.use_cache) {
            key = cache_key(comp);
            auto it = cache_.find(key);
            if (it != cache_.end()) {
                ++stats_.cache_hits;
                return it->second;
            }
            ++stats_.cache_misses;
        }

        const int v = branch_variable(comp, nvars);
        if (++decisions_this_call_ > config_.max_decisions)
            throw BudgetExhausted("model counter exceeded " + std::to_string(config_.max_decisions) + " decisions");
        ++stats_.decisions;

        BigInt total = 0;
        Flat reduced;
        for (int lit : {v, -v}) {
            std::size_t assigned = 0;
            if (!propagate(comp, nvars, lit, reduced, assigned)) continue;
            const std::size_t free = nvars - assigned - distinct_vars(reduced, nvars);
            BigInt sub = count_formula(reduced, static_cast<int>(nvars));
            sub <<= free;
            total += sub;
        }

        if (config_.use_cache) {
            const std::size_t bytes = key.size() + sizeof(BigInt) + 64;
            if (stats_.cache_bytes + bytes > config_.max_cache_bytes)
                throw BudgetExhausted("model counter cache exceeded " + std::to_string(config_.max_cache_bytes) +
                                      " bytes");
            stats_.cache_bytes += bytes;
            ++stats_.cache_entries;
            cache_.emplace(std::move(key), total);
        }
        return total;
    }

    std::vector<int> rename_;
    std::vector<char> mark_;
    CounterConfig config_;
    CounterStats stats_;
    std::uint64_t decisions_this_call_ = 0;
    std::unordered_map<std::string, BigInt> cache_;
};

// Exhaustive enumeration over all assignments; verification oracle.
inline ModelCount oracle_count(const fol::CnfInstance& instance) {
    const std::size_t n = instance.total_vars();
    if (n > 24) throw std::invalid_argument("oracle_count supports at most 24 variables, got " + std::to_string(n));
    std::vector<std::pair<std::uint32_t, std::uint32_t>> masks;
    for (const auto& c : instance.clauses) {
        std::uint32_t pos = 0, neg = 0;
        for (int l : c) {
            if (l == 0 || static_cast<std::size_t>(std::abs(l)) > n) throw std::invalid_argument("literal out of range");
            const std::uint32_t bit = std::uint32_t{1} << (std::abs(l) - 1);
            (l > 0 ? pos : neg) |= bit;
        }
        masks.emplace_back(pos, neg);
    }
    std::uint64_t models = 0;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t m = 0; m < total; ++m) {
        const auto a = static_cast<std::uint32_t>(m);
        bool ok = true;
        for (const auto& [pos, neg] : masks) {
            if ((a & pos) == 0 && (~a & neg) == 0) {
                ok = false;
                break;
            }
        }
        models += ok ? 1 : 0;
    }
    return ModelCount(models);
}

} // namespace scld
