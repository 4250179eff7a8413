#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scld/counter.hpp"
#include "scld/semantics.hpp"
#include "scld/simnet.hpp"

namespace scld {

// A transmitter world loaded from JSON:
//   {"id": str, "predicates": [{"name": str, "arity": 1|2}], "entities": [str],
//    "sentences": [str], "hypotheses": [str]?, "source": str?}
struct StoryFile {
    std::string id;
    std::string source;
    std::shared_ptr<const World> world;
    std::vector<std::string> sentence_texts;
    std::vector<std::string> hypothesis_texts;
    simnet::HypothesisSet hypotheses;
    Evidence evidence;

    std::size_t sentence_count() const noexcept { return sentence_texts.size(); }
    std::size_t atom_count() const noexcept { return world->atom_count(); }
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw InputError(where + ": missing field '" + key + "'");
    return *it;
}

inline std::string require_string(const nlohmann::json& j, const std::string& where) {
    if (!j.is_string()) throw InputError(where + ": expected a string");
    return j.get<std::string>();
}

inline std::vector<std::string> string_list(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array()) throw InputError(where + ": expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(require_string(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

} // namespace detail

inline StoryFile parse_story(const nlohmann::json& j, Counter& counter, const std::string& origin = "story",
                             fol::CnfOptions cnf = {}) {
    if (!j.is_object()) throw InputError(origin + ": top level must be an object");
    static const std::set<std::string> known{"id", "source", "predicates", "entities", "sentences", "hypotheses"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw InputError(origin + ": unknown field '" + key + "'");

    const std::string id = detail::require_string(detail::require(j, "id", origin), origin + ".id");
    const std::string where = origin + " (" + id + ")";
    std::string source;
    if (j.contains("source")) source = detail::require_string(j["source"], where + ".source");

    const auto& preds = detail::require(j, "predicates", where);
    if (!preds.is_array()) throw InputError(where + ".predicates: expected an array");
    std::vector<fol::Predicate> predicates;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const std::string pw = where + ".predicates[" + std::to_string(i) + "]";
        const auto& p = preds[i];
        if (!p.is_object()) throw InputError(pw + ": expected an object");
        const auto& arity = detail::require(p, "arity", pw);
        if (!arity.is_number_integer()) throw InputError(pw + ".arity: expected 1 or 2");
        predicates.push_back({detail::require_string(detail::require(p, "name", pw), pw + ".name"), arity.get<int>()});
    }
    auto entities = detail::string_list(detail::require(j, "entities", where), where + ".entities");
    auto sentences = detail::string_list(detail::require(j, "sentences", where), where + ".sentences");
    std::vector<std::string> hypotheses;
    if (j.contains("hypotheses")) hypotheses = detail::string_list(j["hypotheses"], where + ".hypotheses");

    std::shared_ptr<const World> world;
    try {
        world = std::make_shared<const World>(fol::Signature(std::move(predicates), std::move(entities)), cnf);
    } catch (const InputError& e) {
        throw InputError(where + ": " + e.what());
    }

    std::vector<fol::Formula> formulas;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        try {
            formulas.push_back(world->parse(sentences[i]));
        } catch (const ParseError& e) {
            throw InputError(where + ": sentence " + std::to_string(i) + " \"" + sentences[i] + "\": " + e.what());
        }
    }
    simnet::HypothesisSet hset;
    try {
        hset = simnet::HypothesisSet::parse(*world, hypotheses);
    } catch (const InputError& e) {
        throw InputError(where + ": hypotheses: " + e.what());
    }

    try {
        Evidence evidence(world, std::move(formulas), counter);
        return StoryFile{id, source, world, std::move(sentences), std::move(hypotheses), std::move(hset),
                         std::move(evidence)};
    } catch (const InconsistentEvidence&) {
        throw InconsistentEvidence(where + ": unsatisfiable evidence: the sentences contradict each other");
    }
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(path.string() + ": invalid JSON: " + e.what());
    }
}

inline StoryFile ingest(const std::filesystem::path& path, Counter& counter, fol::CnfOptions cnf = {}) {
    return parse_story(read_json_file(path), counter, path.string(), cnf);
}

} // namespace scld
