// Runs the ten acceptance checks and prints one PASS/FAIL line per check.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>

#include "scld/scld.hpp"
#include "support/brute.hpp"

using namespace scld;
using fol::Formula;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Rational r(long n, long d) { return Rational(n) / Rational(d); }

std::vector<std::string> bundled_stories() {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(SCLD_DATA_DIR "/stories"))
        if (e.path().extension() == ".json") out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> suite_stories() {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(SCLD_DATA_DIR "/stories/suite"))
        if (e.path().extension() == ".json") out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Outcome three_atom_count() {
    fol::Signature sig({{"Pr1", 1}, {"Pr2", 1}, {"Pr3", 1}}, {"w"});
    auto idx = std::make_shared<const fol::GroundAtomIndex>(sig);
    Formula f = fol::parse("(~Pr1(w) | ~Pr2(w)) & (~Pr1(w) | Pr2(w) | ~Pr3(w))", sig);
    Counter counter;
    const auto t0 = Clock::now();
    const ModelCount n = counter.count(fol::to_cnf(f, idx));
    const double ms = ms_since(t0);
    Outcome o;
    o.pass = n == ModelCount(5) && ms < 1.0 && brute::count(f, sig) == 5;
    o.detail = "count=" + n.to_string() + fmt(", %.3f ms (limit 1 ms)", ms);
    return o;
}

Outcome sixteen_state_cont() {
    const auto t0 = Clock::now();
    Counter counter;
    auto w = std::make_shared<const World>(fol::Signature({{"Pr1", 2}}, {"en1", "en2"}));
    auto ev = [&](std::vector<std::string> texts) {
        std::vector<Formula> fs;
        for (const auto& t : texts) fs.push_back(w->parse(t));
        return Evidence(w, std::move(fs), counter);
    };
    const Formula state = w->parse("Pr1(en1, en2) & Pr1(en2, en1) & ~Pr1(en1, en1) & Pr1(en2, en2)");
    const Rational prior = confirmation(state, Evidence::none(w, counter), counter);
    const Rational after_e1 = cont(state, ev({"Pr1(en1, en2)"}), counter);
    const Rational after_e2 = cont(state, ev({"Pr1(en1, en2) & Pr1(en2, en1)"}), counter);
    const Rational after_e13 = cont(state, ev({"Pr1(en1, en2)", "Pr1(en2, en1)"}), counter);
    const double ms = ms_since(t0);
    Outcome o;
    o.pass = prior == r(1, 16) && after_e1 == r(7, 8) && after_e2 == r(3, 4) && after_e13 == after_e2 && ms < 10.0;
    o.detail = "c=" + prior.str() + " cont(e1)=" + after_e1.str() + " cont(e2)=" + after_e2.str() +
               " cont(e1&e3)=" + after_e13.str() + fmt(", %.3f ms (limit 10 ms)", ms);
    return o;
}

Outcome counter_oracle() {
    const auto t0 = Clock::now();
    brute::Gen gen(1001);
    Counter counter;
    std::size_t mismatches = 0;
    const int cases = 1000;
    for (int i = 0; i < cases; ++i) {
        const std::size_t vars = 8 + gen.below(13);
        const double ratio = 0.5 + 0.5 * static_cast<double>(gen.below(12));
        const auto clauses = static_cast<std::size_t>(ratio * static_cast<double>(vars) / 2.0);
        auto cnf = gen.coin() ? gen.cnf(vars, clauses, 3, 3) : gen.cnf(vars, clauses, 1, 5);
        fol::CnfInstance inst;
        inst.original_vars = vars;
        inst.clauses = cnf;
        mismatches += counter.count(inst) != ModelCount(brute::count_cnf(cnf, vars));
    }
    const double ms = ms_since(t0);
    Outcome o;
    o.pass = mismatches == 0 && ms < 60000.0;
    o.detail = std::to_string(cases) + " instances, " + std::to_string(mismatches) + " mismatches" +
               fmt(", %.0f ms (limit 60000 ms)", ms);
    return o;
}

Outcome cnf_modes() {
    const auto t0 = Clock::now();
    brute::Gen gen(1002);
    Counter counter;
    const fol::CnfOptions definitional{0, 1024};
    const fol::CnfOptions distributed{std::numeric_limits<std::size_t>::max(), std::numeric_limits<std::size_t>::max()};
    std::size_t mismatches = 0, with_aux = 0;
    const int cases = 200;
    for (int i = 0; i < cases; ++i) {
        auto sig = gen.signature(12);
        auto idx = std::make_shared<const fol::GroundAtomIndex>(sig);
        Formula f = fol::ground(gen.formula(sig, 5, true), sig);
        const ModelCount truth(brute::count(f, sig));
        auto d = fol::to_cnf(f, idx, definitional);
        auto n = fol::to_cnf(f, idx, distributed);
        with_aux += d.aux_vars > 0;
        mismatches += counter.count(d) != truth || counter.count(n) != truth || n.aux_vars != 0;
    }
    const double ms = ms_since(t0);
    Outcome o;
    o.pass = mismatches == 0 && ms < 60000.0;
    o.detail = std::to_string(cases) + " formulas (" + std::to_string(with_aux) + " with auxiliaries), " +
               std::to_string(mismatches) + " mismatches" + fmt(", %.0f ms (limit 60000 ms)", ms);
    return o;
}

Outcome existential_duality() {
    brute::Gen gen(1003);
    Counter counter;
    std::size_t checked = 0, failures = 0;
    while (checked < 100) {
        auto sig = gen.signature(12);
        auto w = std::make_shared<const World>(sig);
        Formula e = gen.formula(sig, 3, true);
        if (brute::count(e, sig) == 0) continue;
        Formula phi = gen.open_formula(sig, 3);
        Evidence ev(w, {e}, counter);
        const Rational sum = confirmation(Formula::exists("x", phi), ev, counter) +
                             confirmation(Formula::forall("x", Formula::negation(phi)), ev, counter);
        failures += sum != 1;
        ++checked;
    }
    Outcome o;
    o.pass = failures == 0;
    o.detail = std::to_string(checked) + " pairs, " + std::to_string(failures) + " failures";
    return o;
}

Outcome greedy_dominance() {
    std::size_t stories = 0, failures = 0;
    for (const auto& path : bundled_stories()) {
        Counter counter;
        auto story = ingest(path, counter);
        const auto& ev = story.evidence;
        auto codec = codec::Codec::for_corpus(story.world->signature(), ev.sentences());
        auto t = encoder::run(ev, encoder::Budget::sentences(1), codec, counter);
        auto none = Evidence::none(story.world, counter);
        Rational best = 0;
        for (const auto& s : ev.sentences()) best = std::max(best, cont(s, none, counter));
        failures += t.messages.size() != 1 || cont(t.messages[0].sentence, none, counter) != best;
        ++stories;
    }
    Outcome o;
    o.pass = failures == 0 && stories > 0;
    o.detail = std::to_string(stories) + " stories, " + std::to_string(failures) + " failures";
    return o;
}

Outcome scld_vs_random(std::string& csv_out) {
    const auto t0 = Clock::now();
    experiment::ExperimentConfig cfg;
    cfg.stories = suite_stories();
    cfg.sizes = {1, 2, 3};
    cfg.random_seeds = 30;
    cfg.curves = true;
    auto report = experiment::run_experiment(cfg);
    csv_out = experiment::to_csv(report);
    const double eps = 1e-9;
    Outcome o;
    o.pass = report.failures.empty() && cfg.stories.size() == 10;
    std::string detail;

    for (std::size_t m : cfg.sizes) {
        const experiment::Aggregate* s = nullptr;
        const experiment::Aggregate* rnd = nullptr;
        for (const auto& a : report.aggregates) {
            if (a.m != m) continue;
            if (a.mode == "scld") s = &a;
            if (a.mode == "random") rnd = &a;
        }
        if (!s || !rnd || !s->mean_accuracy || !rnd->mean_accuracy) {
            o.pass = false;
            continue;
        }
        o.pass = o.pass && s->mean_uncertainty + eps >= rnd->mean_uncertainty &&
                 *s->mean_accuracy + eps >= *rnd->mean_accuracy;
        detail += fmt("M=%.0f unc %.1f/%.1f", static_cast<double>(m), s->mean_uncertainty, rnd->mean_uncertainty) +
                  fmt(" acc %.3f/%.3f; ", *s->mean_accuracy, *rnd->mean_accuracy);
    }

    // Accuracy along the full transmission curve, at every message count.
    std::map<std::size_t, std::pair<double, std::size_t>> greedy, random;
    for (const auto& c : report.curves) {
        if (!c.accuracy) continue;
        auto& slot = (c.mode == "scld" ? greedy : random)[c.messages];
        slot.first += *c.accuracy;
        ++slot.second;
    }
    std::size_t counts = 0, worse = 0;
    for (const auto& [k, g] : greedy) {
        auto it = random.find(k);
        if (it == random.end()) continue;
        ++counts;
        const double gm = g.first / static_cast<double>(g.second);
        const double rm = it->second.first / static_cast<double>(it->second.second);
        if (gm + eps < rm) {
            ++worse;
            detail += fmt("k=%.0f acc %.3f<%.3f; ", static_cast<double>(k), gm, rm);
        }
    }
    const double ms = ms_since(t0);
    o.pass = o.pass && counts > 0 && worse == 0 && ms < 600000.0;
    o.detail = "scld/random " + detail + std::to_string(counts) + " message counts checked, " + std::to_string(worse) +
               " below random" + fmt(", %.0f ms (limit 600000 ms)", ms);
    return o;
}

Outcome convergence() {
    std::size_t stories = 0, failures = 0, skipped = 0;
    for (const auto& path : bundled_stories()) {
        Counter counter;
        auto story = ingest(path, counter);
        const auto& ev = story.evidence;
        simnet::TransmitterNode tx{ev, codec::Codec::for_corpus(story.world->signature(), ev.sentences()), {}};
        ++stories;
        if (ev.count() == ModelCount::power_of_two(story.atom_count())) {
            ++skipped;
            continue;
        }
        const auto* h = story.hypotheses.empty() ? nullptr : &story.hypotheses;
        auto curve = simnet::convergence_probe(tx, h, encoder::full_schedule(ev, tx.codec, counter), counter);
        bool ok = curve.back().reduction == 100.0 && curve.back().receiver_count == ev.count();
        if (h) ok = ok && curve.back().chosen == simnet::choose_hypothesis(ev, *h, counter).index;
        failures += !ok;
    }
    Outcome o;
    o.pass = failures == 0 && stories > skipped;
    o.detail = std::to_string(stories) + " stories (" + std::to_string(skipped) + " with uninformative evidence), " +
               std::to_string(failures) + " failures";
    return o;
}

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

Outcome codec_checks() {
    std::size_t stories = 0, round_trip = 0, over_fixed = 0, suboptimal = 0;
    std::size_t huff_total = 0, fixed_total = 0;
    for (const auto& path : bundled_stories()) {
        Counter counter;
        auto story = ingest(path, counter);
        const auto& sig = story.world->signature();
        auto codec = codec::Codec::for_corpus(sig, story.evidence.sentences());
        std::size_t huff = 0, fixed = 0;
        for (const auto& s : story.evidence.sentences()) {
            round_trip += !(codec.decode(codec.encode(s)) == s);
            huff += codec.bits(s);
            fixed += codec::fixed_cost(s, codec.dictionary, sig);
        }
        over_fixed += huff > fixed;
        huff_total += huff;
        fixed_total += fixed;
        ++stories;
    }
    brute::Gen gen(1009);
    for (int i = 0; i < 300; ++i) {
        const std::size_t n = 1 + gen.below(6);
        std::vector<std::uint64_t> w(n);
        for (auto& x : w) x = 1 + gen.below(20);
        codec::CodeTable table(w);
        std::uint64_t cost = 0;
        for (std::size_t s = 0; s < n; ++s) cost += w[s] * table.code(s).size();
        suboptimal += cost != best_prefix_cost(w);
    }
    Outcome o;
    o.pass = round_trip == 0 && over_fixed == 0 && suboptimal == 0;
    o.detail = std::to_string(stories) + " stories, " + std::to_string(round_trip) + " round-trip failures, " +
               std::to_string(huff_total) + " vs " + std::to_string(fixed_total) + " fixed bits, " +
               std::to_string(suboptimal) + "/300 suboptimal tables";
    return o;
}

Outcome determinism(const std::string& first_csv) {
    experiment::ExperimentConfig cfg;
    cfg.stories = suite_stories();
    cfg.sizes = {1, 2, 3};
    cfg.random_seeds = 30;
    cfg.curves = true;
    const std::string again = experiment::to_csv(experiment::run_experiment(cfg));
    Outcome o;
    o.pass = !first_csv.empty() && again == first_csv;
    o.detail = std::to_string(again.size()) + " CSV bytes, " + (o.pass ? "identical" : "different");
    return o;
}

} // namespace

int main() {
    std::string csv;
    const std::vector<std::pair<const char*, std::function<Outcome()>>> checks{
        {"three-atom proposition counts to 5", three_atom_count},
        {"16-state cont values", sixteen_state_cont},
        {"counter vs exhaustive enumeration", counter_oracle},
        {"count-preserving CNF modes", cnf_modes},
        {"existential duality", existential_duality},
        {"greedy dominance at M=1", greedy_dominance},
        {"SCLD vs random on the suite", [&] { return scld_vs_random(csv); }},
        {"convergence under full transmission", convergence},
        {"codec round trip and optimality", codec_checks},
        {"experiment CSV determinism", [&] { return determinism(csv); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = checks[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %2zu: %s  %s  [%s] (%.0f ms)\n", i + 1, o.pass ? "PASS" : "FAIL", checks[i].first,
                    o.detail.c_str(), ms_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, checks.size());
    return failed == 0 ? 0 : 1;
}
