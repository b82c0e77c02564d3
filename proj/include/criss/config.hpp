#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "criss/loop.hpp"
#include "criss/synthetic.hpp"
#include "criss/toy_embed.hpp"

namespace criss {

// Data section of a run config: either a generated synthetic world or
// per-language corpus/embedding files.
struct SyntheticData {
    std::size_t n = 0;
    std::uint32_t dim = 0;
    double noise_sigma = 0.0;
    std::optional<double> misalignment;  // unset = named preset
};

struct FileData {
    std::map<std::string, std::string> corpora;     // lang -> path
    std::map<std::string, std::string> embeddings;  // lang -> crem path
    CorpusFormat format = CorpusFormat::plain;
    bool dedup = true;
    std::optional<std::size_t> cap;
};

struct RunSpec {
    LoopConfig loop;
    std::variant<SyntheticData, FileData> data;
    std::optional<unsigned> threads;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& what) {
    throw validation_error("config: " + path + ": " + what);
}

inline const nlohmann::json& require(const nlohmann::json& j, const std::string& key,
                                     const std::string& path) {
    if (!j.is_object() || !j.contains(key)) config_fail(path + key, "missing field");
    return j.at(key);
}

template <typename T>
inline T get_as(const nlohmann::json& j, const std::string& path) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception&) {
        config_fail(path, "wrong type");
    }
}

inline MarginConfig parse_margin(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) config_fail(path, "expected object");
    MarginConfig m;
    if (j.contains("k")) m.k = get_as<std::uint32_t>(j.at("k"), path + ".k");
    if (j.contains("tau")) m.tau = get_as<double>(j.at("tau"), path + ".tau");
    if (j.contains("max_pairs"))
        m.max_pairs = get_as<std::size_t>(j.at("max_pairs"), path + ".max_pairs");
    if (j.contains("candidate_rule")) {
        const auto rule =
            get_as<std::string>(j.at("candidate_rule"), path + ".candidate_rule");
        if (rule == "union")
            m.candidate_rule = CandidateRule::union_rule;
        else if (rule == "intersection")
            m.candidate_rule = CandidateRule::intersection_rule;
        else
            config_fail(path + ".candidate_rule",
                        "expected 'union' or 'intersection', got '" + rule + "'");
    }
    try {
        m.validate();
    } catch (const validation_error& e) {
        config_fail(path, e.what());
    }
    return m;
}

inline nlohmann::json margin_to_json(const MarginConfig& m) {
    nlohmann::json j{{"k", m.k}, {"tau", m.tau}};
    if (m.max_pairs) j["max_pairs"] = *m.max_pairs;
    j["candidate_rule"] =
        m.candidate_rule == CandidateRule::union_rule ? "union" : "intersection";
    return j;
}

}  // namespace detail

inline RunSpec run_spec_from_json(const nlohmann::json& j) {
    using detail::config_fail;
    using detail::get_as;
    using detail::require;
    if (!j.is_object()) config_fail("", "top level must be an object");

    RunSpec spec;
    spec.loop.iterations =
        get_as<std::uint32_t>(require(j, "iterations", ""), "iterations");
    spec.loop.seed = j.contains("seed") ? get_as<std::uint64_t>(j.at("seed"), "seed") : 0;
    spec.loop.langs =
        get_as<std::vector<std::string>>(require(j, "langs", ""), "langs");
    spec.loop.pivots =
        get_as<std::vector<std::string>>(require(j, "pivots", ""), "pivots");

    // margin: one object applied to every iteration, or a per-iteration list
    if (j.contains("margin")) {
        const auto& mj = j.at("margin");
        if (mj.is_array()) {
            for (std::size_t i = 0; i < mj.size(); ++i)
                spec.loop.margin.push_back(detail::parse_margin(
                    mj.at(i), "margin[" + std::to_string(i) + "]"));
        } else {
            const MarginConfig one = detail::parse_margin(mj, "margin");
            spec.loop.margin.assign(spec.loop.iterations, one);
        }
    } else {
        spec.loop.margin.assign(spec.loop.iterations, MarginConfig{});
    }

    if (j.contains("trainer")) {
        const auto& tj = j.at("trainer");
        const auto kind = get_as<std::string>(require(tj, "type", "trainer."), "trainer.type");
        if (kind == "procrustes") {
            spec.loop.trainer.kind = TrainerSpec::Kind::procrustes;
        } else if (kind == "external") {
            spec.loop.trainer.kind = TrainerSpec::Kind::external;
            spec.loop.trainer.command =
                get_as<std::string>(require(tj, "command", "trainer."), "trainer.command");
        } else {
            config_fail("trainer.type", "expected 'procrustes' or 'external', got '" +
                                            kind + "'");
        }
    }

    if (j.contains("evaluation")) {
        const auto& ej = j.at("evaluation");
        if (ej.contains("criterion"))
            spec.loop.eval.criterion = retrieval_criterion_from_string(
                get_as<std::string>(ej.at("criterion"), "evaluation.criterion"));
        if (ej.contains("k"))
            spec.loop.eval.k = get_as<std::uint32_t>(ej.at("k"), "evaluation.k");
        if (ej.contains("truth")) {
            const auto truth = get_as<std::string>(ej.at("truth"), "evaluation.truth");
            if (truth == "row_index")
                spec.loop.eval.truth = EvalSpec::Truth::row_index;
            else if (truth == "none")
                spec.loop.eval.truth = EvalSpec::Truth::none;
            else
                config_fail("evaluation.truth",
                            "expected 'row_index' or 'none', got '" + truth + "'");
        }
    }

    const auto& dj = require(j, "data", "");
    const auto data_type = get_as<std::string>(require(dj, "type", "data."), "data.type");
    if (data_type == "synthetic") {
        SyntheticData d;
        d.n = get_as<std::size_t>(require(dj, "n", "data."), "data.n");
        d.dim = get_as<std::uint32_t>(require(dj, "dim", "data."), "data.dim");
        if (dj.contains("noise_sigma"))
            d.noise_sigma = get_as<double>(dj.at("noise_sigma"), "data.noise_sigma");
        if (dj.contains("misalignment")) {
            const auto& mj = dj.at("misalignment");
            if (mj.is_string()) {
                if (mj.get<std::string>() != "preset")
                    config_fail("data.misalignment",
                                "expected a number or the string 'preset'");
            } else {
                d.misalignment = get_as<double>(mj, "data.misalignment");
            }
        }
        spec.data = d;
    } else if (data_type == "files") {
        FileData d;
        d.corpora = get_as<std::map<std::string, std::string>>(
            require(dj, "corpora", "data."), "data.corpora");
        d.embeddings = get_as<std::map<std::string, std::string>>(
            require(dj, "embeddings", "data."), "data.embeddings");
        if (dj.contains("format")) {
            const auto f = get_as<std::string>(dj.at("format"), "data.format");
            if (f == "plain")
                d.format = CorpusFormat::plain;
            else if (f == "jsonl")
                d.format = CorpusFormat::jsonl;
            else
                config_fail("data.format", "expected 'plain' or 'jsonl', got '" + f + "'");
        }
        if (dj.contains("dedup"))
            d.dedup = get_as<bool>(dj.at("dedup"), "data.dedup");
        if (dj.contains("cap"))
            d.cap = get_as<std::size_t>(dj.at("cap"), "data.cap");
        for (const auto& lang : spec.loop.langs) {
            if (!d.corpora.count(lang))
                config_fail("data.corpora", "missing path for language '" + lang + "'");
            if (!d.embeddings.count(lang))
                config_fail("data.embeddings", "missing path for language '" + lang + "'");
        }
        spec.data = d;
    } else {
        config_fail("data.type", "expected 'synthetic' or 'files', got '" + data_type + "'");
    }

    if (j.contains("threads"))
        spec.threads = get_as<unsigned>(j.at("threads"), "threads");

    try {
        spec.loop.validate();
    } catch (const validation_error& e) {
        config_fail("", e.what());
    }
    return spec;
}

inline nlohmann::json run_spec_to_json(const RunSpec& spec) {
    nlohmann::json j;
    j["iterations"] = spec.loop.iterations;
    j["seed"] = spec.loop.seed;
    j["langs"] = spec.loop.langs;
    j["pivots"] = spec.loop.pivots;
    j["margin"] = nlohmann::json::array();
    for (const auto& m : spec.loop.margin) j["margin"].push_back(detail::margin_to_json(m));
    if (spec.loop.trainer.kind == TrainerSpec::Kind::procrustes) {
        j["trainer"] = {{"type", "procrustes"}};
    } else {
        j["trainer"] = {{"type", "external"}, {"command", spec.loop.trainer.command}};
    }
    j["evaluation"] = {
        {"criterion", to_string(spec.loop.eval.criterion)},
        {"k", spec.loop.eval.k},
        {"truth",
         spec.loop.eval.truth == EvalSpec::Truth::row_index ? "row_index" : "none"}};
    if (std::holds_alternative<SyntheticData>(spec.data)) {
        const auto& d = std::get<SyntheticData>(spec.data);
        j["data"] = {{"type", "synthetic"},
                     {"n", d.n},
                     {"dim", d.dim},
                     {"noise_sigma", d.noise_sigma}};
        if (d.misalignment)
            j["data"]["misalignment"] = *d.misalignment;
        else
            j["data"]["misalignment"] = "preset";
    } else {
        const auto& d = std::get<FileData>(spec.data);
        j["data"] = {{"type", "files"},
                     {"corpora", d.corpora},
                     {"embeddings", d.embeddings},
                     {"format", d.format == CorpusFormat::plain ? "plain" : "jsonl"},
                     {"dedup", d.dedup}};
        if (d.cap) j["data"]["cap"] = *d.cap;
    }
    if (spec.threads) j["threads"] = *spec.threads;
    return j;
}

// Builds the loop inputs named by the config: generates the synthetic world
// or loads corpora and embedding files, applying dedup/cap for file data.
struct RunInputs {
    std::map<std::string, Corpus> corpora;
    std::map<std::string, EmbeddingMatrix> embeddings;
};

inline RunInputs materialize_inputs(const RunSpec& spec) {
    RunInputs inputs;
    if (std::holds_alternative<SyntheticData>(spec.data)) {
        const auto& d = std::get<SyntheticData>(spec.data);
        const double misalignment = d.misalignment.value_or(kMisalignmentPreset);
        SyntheticWorld world = make_synthetic_world(d.n, d.dim, spec.loop.langs,
                                                    d.noise_sigma, misalignment,
                                                    spec.loop.seed);
        inputs.corpora = std::move(world.corpora);
        inputs.embeddings = std::move(world.embeddings);
    } else {
        const auto& d = std::get<FileData>(spec.data);
        for (const auto& lang : spec.loop.langs) {
            Corpus c = load_corpus(d.corpora.at(lang), lang, d.format);
            if (d.dedup) c = dedup(c);
            if (d.cap) c = subsample(c, *d.cap, spec.loop.seed);
            EmbeddingMatrix m = read_matrix(d.embeddings.at(lang), lang);
            if (m.rows() != c.size())
                throw validation_error(
                    "config: data: embedding rows for language '" + lang + "' (" +
                    std::to_string(m.rows()) + ") do not match the corpus after " +
                    "preprocessing (" + std::to_string(c.size()) + ")");
            if (!m.ids().empty() && m.ids() != c.ids)
                throw validation_error(
                    "config: data: embedding id sidecar for language '" + lang +
                    "' does not match the corpus external ids");
            inputs.corpora.emplace(lang, std::move(c));
            inputs.embeddings.emplace(lang, std::move(m));
        }
    }
    return inputs;
}

}  // namespace criss
