#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scld/scld.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::uint64_t max_decisions = scld::CounterConfig{}.max_decisions;
    std::string output = "json";
};

scld::Counter make_counter(const Globals& g) {
    scld::CounterConfig cfg;
    cfg.max_decisions = g.max_decisions;
    return scld::Counter(cfg);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw scld::InputError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw scld::InputError("cannot write " + path);
    out << text;
}

scld::encoder::Budget parse_budget(const std::string& s) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw scld::InputError("budget must be K=<n> or bits=<n>, got '" + s + "'");
    const std::string kind = s.substr(0, eq);
    std::uint64_t n = 0;
    try {
        std::size_t used = 0;
        n = std::stoull(s.substr(eq + 1), &used);
        if (used != s.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw scld::InputError("budget amount must be a non-negative integer, got '" + s.substr(eq + 1) + "'");
    }
    if (kind == "K" || kind == "k") return scld::encoder::Budget::sentences(n);
    if (kind == "bits") return scld::encoder::Budget::bits(n);
    throw scld::InputError("budget must be K=<n> or bits=<n>, got '" + s + "'");
}

std::vector<std::string> expand_stories(const std::vector<std::string>& inputs) {
    std::vector<std::string> out;
    for (const auto& p : inputs) {
        if (fs::is_directory(p)) {
            std::vector<std::string> found;
            for (const auto& e : fs::recursive_directory_iterator(p))
                if (e.is_regular_file() && e.path().extension() == ".json") found.push_back(e.path().string());
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.push_back(p);
        }
    }
    if (out.empty()) throw scld::InputError("no story files given");
    return out;
}

std::vector<std::size_t> parse_indices(const std::string& s, std::size_t limit) {
    std::vector<std::size_t> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        std::size_t v = 0;
        try {
            v = std::stoul(item);
        } catch (const std::exception&) {
            throw scld::InputError("bad sentence index '" + item + "'");
        }
        if (v >= limit) throw scld::InputError("sentence index " + item + " out of range");
        out.push_back(v);
    }
    return out;
}

json transcript_json(const scld::StoryFile& story, const scld::encoder::Transcript& t) {
    json j;
    j["schema"] = scld::experiment::kSchemaVersion;
    j["story"] = story.id;
    j["stop"] = scld::encoder::to_string(t.stop);
    j["total_bits"] = t.total_bits();
    j["messages"] = json::array();
    for (const auto& m : t.messages) {
        j["messages"].push_back({{"index", m.index},
                                 {"sentence", story.world->render(m.sentence)},
                                 {"bits", m.bits.size()},
                                 {"code", m.bits.to_string()},
                                 {"conditional", scld::to_string(m.conditional)},
                                 {"cont", scld::to_string(1 - m.conditional)}});
    }
    j["audit"] = json::array();
    for (const auto& r : t.audit) {
        json round{{"given", r.given.to_string()}, {"ranking", json::array()}};
        if (r.chosen) round["chosen"] = *r.chosen;
        for (const auto& c : r.ranking)
            round["ranking"].push_back({{"index", c.index},
                                        {"joint", c.joint.to_string()},
                                        {"conditional", scld::to_string(c.conditional)},
                                        {"bits", c.bits}});
        j["audit"].push_back(std::move(round));
    }
    return j;
}

std::string curve_csv(const std::string& story, const std::vector<scld::simnet::CurvePoint>& curve) {
    std::ostringstream os;
    os << "schema,story,messages,bits,receiver_count,uncertainty_pct,chosen,accuracy\n";
    for (const auto& p : curve) {
        os << scld::experiment::kSchemaVersion << ',' << story << ',' << p.messages << ',' << p.bits << ','
           << p.receiver_count.to_string() << ',' << scld::experiment::format_double(p.reduction) << ',';
        if (p.chosen) os << *p.chosen;
        os << ',';
        if (p.accuracy) os << scld::experiment::format_double(*p.accuracy);
        os << '\n';
    }
    return os.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic communication for logical deduction"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Base random seed");
    app.add_option("--workers", g.workers, "Worker threads for experiments")->check(CLI::PositiveNumber);
    app.add_option("--max-decisions", g.max_decisions, "Model counter decision budget per count");
    app.add_option("--output", g.output, "Output format")->check(CLI::IsMember({"json", "csv"}));

    std::string story_path, sentence, given, mode = "scld", budget = "K=1", coder = "huffman", hyp_path, curve_path;
    std::string csv_path, json_path, curves_path, dimacs_path;
    std::vector<std::string> story_inputs;
    std::vector<std::size_t> sizes{1, 2, 3};
    std::size_t seeds = 30;
    bool charge_table = false;

    auto* ingest = app.add_subcommand("ingest", "Validate a story file and report its shape");
    ingest->add_option("story", story_path, "Story JSON")->required();

    auto* count = app.add_subcommand("count", "Count models of a DIMACS CNF file");
    count->add_option("file", dimacs_path, "DIMACS file")->required();

    auto* cont = app.add_subcommand("cont", "cont-information of a sentence given story evidence");
    auto* confirm = app.add_subcommand("confirm", "Degree of confirmation of a sentence given story evidence");
    for (auto* sub : {cont, confirm}) {
        sub->add_option("--story", story_path, "Story JSON")->required();
        sub->add_option("--sentence", sentence, "Sentence over the story's signature")->required();
        sub->add_option("--given", given, "Comma-separated evidence indices (default: all)");
    }

    auto* select = app.add_subcommand("select", "Choose sentences to transmit");
    select->add_option("--story", story_path, "Story JSON")->required();
    select->add_option("--mode", mode, "Selector")->check(CLI::IsMember({"scld", "random", "all"}));
    select->add_option("--budget", budget, "K=<sentences> or bits=<bits>");

    auto* bits = app.add_subcommand("bits", "Encoded size of every story sentence");
    bits->add_option("--story", story_path, "Story JSON")->required();
    bits->add_option("--coder", coder, "Coder")->check(CLI::IsMember({"huffman", "fixed"}));

    auto* simulate = app.add_subcommand("simulate", "Transmit, update the receiver and solve the deduction task");
    simulate->add_option("--story", story_path, "Story JSON")->required();
    simulate->add_option("--hypotheses", hyp_path, "JSON array of hypotheses (default: the story's own)");
    simulate->add_option("--mode", mode, "Selector")->check(CLI::IsMember({"scld", "random", "all"}));
    simulate->add_option("--budget", budget, "K=<sentences> or bits=<bits>");
    simulate->add_option("--curve", curve_path, "Write the per-message curve CSV here");

    auto* experiment = app.add_subcommand("experiment", "Run selectors over a set of stories");
    experiment->add_option("stories", story_inputs, "Story files or directories")->required();
    experiment->add_option("--sizes", sizes, "Transmission sizes M")->delimiter(',');
    experiment->add_option("--seeds", seeds, "Random-baseline seeds per story and M");
    experiment->add_option("--csv", csv_path, "Write the row CSV here");
    experiment->add_option("--json", json_path, "Write the JSON report here");
    experiment->add_option("--curves", curves_path, "Write per-message curves CSV here");
    experiment->add_flag("--charge-table", charge_table, "Add code-table description bits to every transmission");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        scld::Counter counter = make_counter(g);
        if (*ingest) {
            auto story = scld::ingest(story_path, counter);
            json j{{"schema", scld::experiment::kSchemaVersion},
                   {"id", story.id},
                   {"sentences", story.sentence_count()},
                   {"atoms", story.atom_count()},
                   {"hypotheses", story.hypotheses.size()},
                   {"count", story.evidence.count().to_string()},
                   {"log2_count", story.evidence.count().log2()}};
            if (!story.hypotheses.empty()) {
                auto v = scld::simnet::validate(story.hypotheses, *story.world, counter);
                j["hypotheses_exclusive"] = v.exclusive;
                j["hypotheses_exhaustive"] = v.exhaustive;
                for (const auto& p : v.problems) std::cerr << "warning: " << p << '\n';
            }
            if (g.output == "csv")
                std::cout << "id,sentences,atoms,count\n"
                          << story.id << ',' << story.sentence_count() << ',' << story.atom_count() << ','
                          << story.evidence.count().to_string() << '\n';
            else
                std::cout << j.dump(2) << '\n';
        } else if (*count) {
            auto inst = scld::fol::import_dimacs(read_text(dimacs_path));
            auto n = counter.count(inst);
            if (g.output == "csv")
                std::cout << "count,log2\n" << n.to_string() << ',' << (n.is_zero() ? std::string("-inf") : scld::experiment::format_double(n.log2())) << '\n';
            else
                std::cout << json{{"count", n.to_string()}, {"log2", n.is_zero() ? json(nullptr) : json(n.log2())}}.dump(2)
                          << '\n';
        } else if (*cont || *confirm) {
            auto story = scld::ingest(story_path, counter);
            std::vector<scld::fol::Formula> picked;
            if (given.empty()) {
                picked = story.evidence.sentences();
            } else {
                for (auto i : parse_indices(given, story.sentence_count())) picked.push_back(story.evidence.sentences()[i]);
            }
            scld::Evidence ev(story.world, picked, counter);
            auto m = story.world->parse(sentence);
            auto c = scld::confirmation(m, ev, counter);
            json j{{"sentence", story.world->render(m)},
                   {"given", ev.size()},
                   {"confirmation", scld::to_string(c)},
                   {"cont", scld::to_string(1 - c)}};
            if (g.output == "csv")
                std::cout << "confirmation,cont\n" << scld::to_string(c) << ',' << scld::to_string(1 - c) << '\n';
            else
                std::cout << j.dump(2) << '\n';
        } else if (*select) {
            auto story = scld::ingest(story_path, counter);
            auto codec = scld::codec::Codec::for_corpus(story.world->signature(), story.evidence.sentences());
            scld::simnet::TransmitterNode tx{story.evidence, codec, {scld::simnet::parse_selector_mode(mode), g.seed}};
            auto t = scld::simnet::transmit(tx, parse_budget(budget), counter);
            if (g.output == "csv") {
                std::cout << "index,bits,conditional,sentence\n";
                for (const auto& m : t.messages)
                    std::cout << m.index << ',' << m.bits.size() << ',' << scld::to_string(m.conditional) << ",\""
                              << story.world->render(m.sentence) << "\"\n";
            } else {
                std::cout << transcript_json(story, t).dump(2) << '\n';
            }
        } else if (*bits) {
            auto story = scld::ingest(story_path, counter);
            const auto& sig = story.world->signature();
            auto codec = scld::codec::Codec::for_corpus(sig, story.evidence.sentences());
            json j{{"story", story.id}, {"coder", coder}, {"alphabet", codec.dictionary.size()}, {"sentences", json::array()}};
            std::size_t total = 0;
            if (g.output == "csv") std::cout << "index,bits,sentence\n";
            for (std::size_t i = 0; i < story.sentence_count(); ++i) {
                const auto& s = story.evidence.sentences()[i];
                const std::size_t b =
                    coder == "huffman" ? codec.bits(s) : scld::codec::fixed_cost(s, codec.dictionary, sig);
                total += b;
                if (g.output == "csv")
                    std::cout << i << ',' << b << ",\"" << story.world->render(s) << "\"\n";
                else
                    j["sentences"].push_back({{"index", i}, {"bits", b}, {"sentence", story.world->render(s)}});
            }
            j["total_bits"] = total;
            if (coder == "huffman") j["table_bits"] = codec.table.description_bits();
            if (g.output != "csv") std::cout << j.dump(2) << '\n';
        } else if (*simulate) {
            auto story = scld::ingest(story_path, counter);
            auto hyps = story.hypotheses;
            if (!hyp_path.empty()) {
                auto texts = scld::detail::string_list(scld::read_json_file(hyp_path), hyp_path);
                hyps = scld::simnet::HypothesisSet::parse(*story.world, texts);
            }
            auto codec = scld::codec::Codec::for_corpus(story.world->signature(), story.evidence.sentences());
            scld::simnet::TransmitterNode tx{story.evidence, codec, {scld::simnet::parse_selector_mode(mode), g.seed}};
            auto t = scld::simnet::transmit(tx, parse_budget(budget), counter);
            auto rx = scld::simnet::receive(scld::simnet::ReceiverBelief::prior(story.world, counter), t, codec, counter);
            json j{{"schema", scld::experiment::kSchemaVersion},
                   {"story", story.id},
                   {"mode", mode},
                   {"messages", t.messages.size()},
                   {"bits", t.total_bits()},
                   {"stop", scld::encoder::to_string(t.stop)},
                   {"receiver_count", rx.count().to_string()},
                   {"uncertainty_pct",
                    scld::uncertainty_reduction(story.atom_count(), rx.count(), story.evidence.count())}};
            if (!hyps.empty()) {
                auto v = scld::simnet::validate(hyps, *story.world, counter);
                for (const auto& p : v.problems) std::cerr << "warning: " << p << '\n';
                auto choice = scld::simnet::choose_hypothesis(rx, hyps, counter);
                auto result = scld::simnet::evaluate_accuracy(choice.index, hyps, tx, counter);
                j["chosen"] = choice.index;
                j["hypothesis"] = hyps[choice.index].text;
                j["tie_break"] = choice.tied ? "lowest_index" : "none";
                j["accuracy"] = result.accuracy;
                j["correct"] = result.correct;
            }
            if (!curve_path.empty()) {
                auto schedule = t;
                auto curve = scld::simnet::convergence_probe(tx, hyps.empty() ? nullptr : &hyps, schedule, counter);
                write_text(curve_path, curve_csv(story.id, curve));
            }
            std::cout << j.dump(2) << '\n';
        } else if (*experiment) {
            scld::experiment::ExperimentConfig cfg;
            cfg.stories = expand_stories(story_inputs);
            cfg.sizes = sizes;
            cfg.random_seeds = seeds;
            cfg.seed = g.seed;
            cfg.workers = g.workers;
            cfg.counter.max_decisions = g.max_decisions;
            cfg.charge_table = charge_table;
            cfg.curves = !curves_path.empty();
            auto report = scld::experiment::run_experiment(cfg);
            const std::string csv = scld::experiment::to_csv(report);
            if (!csv_path.empty()) write_text(csv_path, csv);
            if (!json_path.empty()) write_text(json_path, scld::experiment::to_json(report).dump(2) + "\n");
            if (cfg.curves) write_text(curves_path, scld::experiment::curves_to_csv(report));
            if (g.output == "csv")
                std::cout << csv;
            else
                std::cout << scld::experiment::to_json(report).dump(2) << '\n';
            for (const auto& f : report.failures) std::cerr << "failed: " << f.story << ": " << f.message << '\n';
            if (!report.failures.empty() && report.rows.empty()) return 2;
        }
    } catch (const scld::BudgetExhausted& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const scld::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const scld::DecodeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const scld::ProtocolViolation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
