#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scld/codec.hpp"
#include "scld/counter.hpp"
#include "scld/encoder.hpp"
#include "scld/semantics.hpp"
#include "scld/simnet.hpp"
#include "scld/story.hpp"

namespace scld::experiment {

inline constexpr int kSchemaVersion = 1;

struct ExperimentConfig {
    std::vector<std::string> stories;
    std::vector<std::size_t> sizes{1, 2, 3};
    std::vector<simnet::SelectorMode> modes{simnet::SelectorMode::Scld, simnet::SelectorMode::Random,
                                            simnet::SelectorMode::All};
    std::size_t random_seeds = 30;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    CounterConfig counter;
    // Add the code-table description to every transmission's bit cost.
    bool charge_table = false;
    // Record per-message curves (uncertainty and accuracy vs. messages sent).
    bool curves = false;
};

struct Row {
    std::string story;
    std::string mode;
    std::size_t m = 0;
    std::optional<std::uint64_t> seed;
    std::size_t messages = 0;
    std::size_t bits = 0;
    std::size_t fixed_bits = 0;
    double uncertainty = 0;
    std::optional<std::size_t> chosen;
    std::optional<double> accuracy;
};

struct CurveRow {
    std::string story;
    std::string mode;
    std::optional<std::uint64_t> seed;
    std::size_t messages = 0;
    std::size_t bits = 0;
    double uncertainty = 0;
    std::optional<std::size_t> chosen;
    std::optional<double> accuracy;
};

struct Aggregate {
    std::string mode;
    std::size_t m = 0;
    std::size_t rows = 0;
    double mean_bits = 0;
    double mean_uncertainty = 0;
    std::optional<double> mean_accuracy;
};

struct Failure {
    std::string story;
    std::string message;
};

struct Report {
    ExperimentConfig config;
    std::vector<Row> rows;
    std::vector<CurveRow> curves;
    std::vector<Aggregate> aggregates;
    std::vector<Failure> failures;
};

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// Means per (mode, m) over the given rows; "all" rows are grouped under m=0
// since their m is the story's sentence count.
inline std::vector<Aggregate> aggregate(const std::vector<Row>& rows) {
    std::map<std::pair<std::string, std::size_t>, std::vector<const Row*>> groups;
    std::vector<std::pair<std::string, std::size_t>> order;
    for (const auto& r : rows) {
        auto key = std::make_pair(r.mode, r.mode == "all" ? std::size_t{0} : r.m);
        auto [it, fresh] = groups.try_emplace(key);
        if (fresh) order.push_back(key);
        it->second.push_back(&r);
    }
    std::sort(order.begin(), order.end());
    std::vector<Aggregate> out;
    for (const auto& key : order) {
        const auto& g = groups[key];
        Aggregate a;
        a.mode = key.first;
        a.m = key.second;
        a.rows = g.size();
        double bits = 0, unc = 0, acc = 0;
        std::size_t acc_rows = 0;
        for (const Row* r : g) {
            bits += static_cast<double>(r->bits);
            unc += r->uncertainty;
            if (r->accuracy) {
                acc += *r->accuracy;
                ++acc_rows;
            }
        }
        a.mean_bits = bits / static_cast<double>(g.size());
        a.mean_uncertainty = unc / static_cast<double>(g.size());
        if (acc_rows > 0) a.mean_accuracy = acc / static_cast<double>(acc_rows);
        out.push_back(std::move(a));
    }
    return out;
}

namespace detail {

struct StoryOutcome {
    std::string id;
    std::vector<Row> rows;
    std::vector<CurveRow> curves;
    std::optional<Failure> failure;
};

inline StoryOutcome run_story(const std::string& path, const ExperimentConfig& cfg) {
    StoryOutcome out;
    out.id = path;
    Counter counter(cfg.counter);
    try {
        StoryFile story = ingest(path, counter);
        out.id = story.id;
        const auto& ev = story.evidence;
        const auto codec = codec::Codec::for_corpus(story.world->signature(), ev.sentences());
        const std::size_t overhead = cfg.charge_table ? codec.table.description_bits() : 0;
        const std::size_t atoms = story.atom_count();
        const bool has_h = !story.hypotheses.empty();
        std::optional<simnet::AccuracyTable> table;
        simnet::TransmitterNode tx{ev, codec, {}};
        if (has_h) table.emplace(story.hypotheses, tx, counter);

        auto make_row = [&](const std::string& mode, std::size_t m, std::optional<std::uint64_t> seed,
                            const encoder::Transcript& t) {
            Row r;
            r.story = story.id;
            r.mode = mode;
            r.m = m;
            r.seed = seed;
            r.messages = t.messages.size();
            r.bits = t.total_bits() + overhead;
            for (const auto& msg : t.messages) r.fixed_bits += codec::fixed_cost(msg.sentence, codec.dictionary, codec.signature);
            std::vector<fol::Formula> sent;
            for (const auto& msg : t.messages) sent.push_back(msg.sentence);
            Evidence received(story.world, std::move(sent), counter);
            r.uncertainty = uncertainty_reduction(atoms, received.count(), ev.count());
            if (has_h) {
                r.chosen = simnet::choose_hypothesis(received, story.hypotheses, counter).index;
                r.accuracy = (*table)[*r.chosen].accuracy;
            }
            return r;
        };

        auto has_mode = [&](simnet::SelectorMode m) {
            return std::find(cfg.modes.begin(), cfg.modes.end(), m) != cfg.modes.end();
        };

        for (std::size_t m : cfg.sizes) {
            const auto budget = encoder::Budget::sentences(m);
            if (has_mode(simnet::SelectorMode::Scld))
                out.rows.push_back(make_row("scld", m, std::nullopt, encoder::run(ev, budget, codec, counter)));
            if (has_mode(simnet::SelectorMode::Random)) {
                for (std::size_t r = 0; r < cfg.random_seeds; ++r) {
                    const std::uint64_t seed = cfg.seed + r;
                    out.rows.push_back(
                        make_row("random", m, seed, encoder::select_random(ev, budget, seed, codec, counter)));
                }
            }
        }
        if (has_mode(simnet::SelectorMode::All))
            out.rows.push_back(make_row("all", ev.size(), std::nullopt, encoder::select_all(ev, codec, counter)));

        if (cfg.curves) {
            auto add_curve = [&](const std::string& mode, std::optional<std::uint64_t> seed,
                                 const encoder::Transcript& schedule) {
                const auto* h = has_h ? &story.hypotheses : nullptr;
                for (const auto& p : simnet::convergence_probe(tx, h, schedule, counter)) {
                    out.curves.push_back(CurveRow{story.id, mode, seed, p.messages, p.bits + (p.messages ? overhead : 0),
                                                  p.reduction, p.chosen, p.accuracy});
                }
            };
            if (has_mode(simnet::SelectorMode::Scld))
                add_curve("scld", std::nullopt, encoder::full_schedule(ev, codec, counter));
            if (has_mode(simnet::SelectorMode::Random)) {
                for (std::size_t r = 0; r < cfg.random_seeds; ++r) {
                    const std::uint64_t seed = cfg.seed + r;
                    add_curve("random", seed, encoder::select_random(ev, encoder::Budget::unlimited(), seed, codec, counter));
                }
            }
        }
    } catch (const std::exception& e) {
        out.rows.clear();
        out.curves.clear();
        out.failure = Failure{out.id, e.what()};
    }
    return out;
}

} // namespace detail

// Runs every story (optionally on several threads, one counter each) and
// assembles rows in story-id order.
inline Report run_experiment(const ExperimentConfig& cfg) {
    std::vector<detail::StoryOutcome> outcomes(cfg.stories.size());
    const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.workers, cfg.stories.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < cfg.stories.size(); ++i) outcomes[i] = detail::run_story(cfg.stories[i], cfg);
    } else {
        std::mutex mu;
        std::size_t next = 0;
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    std::size_t i;
                    {
                        std::lock_guard lock(mu);
                        if (next >= cfg.stories.size()) return;
                        i = next++;
                    }
                    outcomes[i] = detail::run_story(cfg.stories[i], cfg);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    std::stable_sort(outcomes.begin(), outcomes.end(),
                     [](const detail::StoryOutcome& a, const detail::StoryOutcome& b) { return a.id < b.id; });
    Report report;
    report.config = cfg;
    for (auto& o : outcomes) {
        if (o.failure) report.failures.push_back(*o.failure);
        for (auto& r : o.rows) report.rows.push_back(std::move(r));
        for (auto& c : o.curves) report.curves.push_back(std::move(c));
    }
    report.aggregates = aggregate(report.rows);
    return report;
}

inline std::string to_csv(const Report& report) {
    std::ostringstream os;
    os << "schema,story,mode,m,seed,messages,bits,fixed_bits,uncertainty_pct,chosen,accuracy\n";
    for (const auto& r : report.rows) {
        os << kSchemaVersion << ',' << r.story << ',' << r.mode << ',' << r.m << ','
           << (r.seed ? std::to_string(*r.seed) : "") << ',' << r.messages << ',' << r.bits << ',' << r.fixed_bits
           << ',' << format_double(r.uncertainty) << ',' << (r.chosen ? std::to_string(*r.chosen) : "") << ','
           << (r.accuracy ? format_double(*r.accuracy) : "") << '\n';
    }
    return os.str();
}

inline std::string curves_to_csv(const Report& report) {
    std::ostringstream os;
    os << "schema,story,mode,seed,messages,bits,uncertainty_pct,chosen,accuracy\n";
    for (const auto& c : report.curves) {
        os << kSchemaVersion << ',' << c.story << ',' << c.mode << ',' << (c.seed ? std::to_string(*c.seed) : "")
           << ',' << c.messages << ',' << c.bits << ',' << format_double(c.uncertainty) << ','
           << (c.chosen ? std::to_string(*c.chosen) : "") << ',' << (c.accuracy ? format_double(*c.accuracy) : "")
           << '\n';
    }
    return os.str();
}

inline nlohmann::json to_json(const Report& report) {
    nlohmann::json j;
    j["schema"] = kSchemaVersion;
    nlohmann::json cfg;
    cfg["stories"] = report.config.stories;
    cfg["sizes"] = report.config.sizes;
    std::vector<std::string> modes;
    for (auto m : report.config.modes) modes.emplace_back(simnet::to_string(m));
    cfg["modes"] = modes;
    cfg["random_seeds"] = report.config.random_seeds;
    cfg["seed"] = report.config.seed;
    cfg["charge_table"] = report.config.charge_table;
    cfg["max_decisions"] = report.config.counter.max_decisions;
    j["config"] = cfg;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : report.rows) {
        nlohmann::json row{{"story", r.story},  {"mode", r.mode},           {"m", r.m},
                           {"messages", r.messages}, {"bits", r.bits}, {"fixed_bits", r.fixed_bits},
                           {"uncertainty_pct", r.uncertainty}};
        row["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
        row["chosen"] = r.chosen ? nlohmann::json(*r.chosen) : nlohmann::json(nullptr);
        row["accuracy"] = r.accuracy ? nlohmann::json(*r.accuracy) : nlohmann::json(nullptr);
        j["rows"].push_back(std::move(row));
    }
    j["aggregates"] = nlohmann::json::array();
    for (const auto& a : report.aggregates) {
        nlohmann::json row{{"mode", a.mode},
                           {"m", a.m},
                           {"rows", a.rows},
                           {"mean_bits", a.mean_bits},
                           {"mean_uncertainty_pct", a.mean_uncertainty}};
        row["mean_accuracy"] = a.mean_accuracy ? nlohmann::json(*a.mean_accuracy) : nlohmann::json(nullptr);
        j["aggregates"].push_back(std::move(row));
    }
    j["failures"] = nlohmann::json::array();
    for (const auto& f : report.failures) j["failures"].push_back({{"story", f.story}, {"error", f.message}});
    return j;
}

} // namespace scld::experiment
