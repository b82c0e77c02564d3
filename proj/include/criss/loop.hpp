#pragma once

#include <sys/wait.h>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "criss/evalkit.hpp"
#include "criss/io.hpp"
#include "criss/miner.hpp"
#include "criss/procrustes.hpp"
#include "criss/version.hpp"

namespace criss {

struct TrainerSpec {
    enum class Kind { procrustes, external };
    Kind kind = Kind::procrustes;
    std::string command;  // external only
};

struct EvalSpec {
    enum class Truth { row_index, none };
    Truth truth = Truth::row_index;
    RetrievalCriterion criterion = RetrievalCriterion::cosine;
    std::uint32_t k = 5;
};

struct LoopConfig {
    std::uint32_t iterations = 1;
    std::vector<std::string> langs;
    std::vector<std::string> pivots;
    std::vector<MarginConfig> margin;  // one per iteration
    TrainerSpec trainer;
    EvalSpec eval;
    std::uint64_t seed = 0;

    void validate() const {
        if (iterations < 1)
            throw validation_error("loop config: iterations must be >= 1");
        if (langs.size() < 2)
            throw validation_error("loop config: need at least 2 languages");
        if (pivots.empty())
            throw validation_error("loop config: pivot list is empty");
        if (margin.size() != iterations)
            throw validation_error("loop config: margin config list has " +
                                   std::to_string(margin.size()) + " entries for " +
                                   std::to_string(iterations) + " iterations");
        for (const auto& m : margin) m.validate();
        if (trainer.kind == TrainerSpec::Kind::external && trainer.command.empty())
            throw validation_error("loop config: external trainer needs a command");
    }
};

// Artifacts of one mine -> train -> evaluate cycle.
struct IterationState {
    std::uint32_t iteration = 0;
    std::map<std::string, std::string> mined_paths;      // "src-tgt" -> tsv
    std::map<std::string, std::size_t> mined_counts;
    std::map<std::string, std::string> embedding_paths;  // lang -> crem
    std::string report_path;
    RetrievalReport report;
};

// ---- target-language-token augmentation ------------------------------------

inline std::string target_token(const std::string& lang) {
    return "__" + lang + "__";
}

// Prefixes the target side so one multilingual model can be steered to the
// right output language; the source side is untouched.
inline std::string augment_target(const std::string& tgt_text,
                                  const std::string& tgt_lang) {
    return target_token(tgt_lang) + " " + tgt_text;
}

inline std::string strip_target_token(const std::string& augmented,
                                      const std::string& tgt_lang) {
    const std::string prefix = target_token(tgt_lang) + " ";
    if (augmented.rfind(prefix, 0) == 0) return augmented.substr(prefix.size());
    return augmented;
}

// ---- run directory layout ---------------------------------------------------
//   manifest.json
//   initial/<lang>.crem (+.ids), initial/report.json
//   iter<t>/mined/<src>-<tgt>.tsv
//   iter<t>/train.tsv            (all directions aggregated, target-token form)
//   iter<t>/emb/<lang>.crem (+.ids)
//   iter<t>/report.json

namespace detail {

namespace fs = std::filesystem;

inline std::string direction_key(const std::string& src, const std::string& tgt) {
    return src + "-" + tgt;
}

inline fs::path iter_dir(const fs::path& run_dir, std::uint32_t t) {
    return run_dir / ("iter" + std::to_string(t));
}

inline void write_text_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw io_error("write failure: " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    out += "'";
    return out;
}

}  // namespace detail

// Runs the trainer protocol:
//   <command> --iteration <t> --pairs <tsv> --out <dir>
// with CRISS_LANGS set to the comma-joined language list (and
// CRISS_INITIAL_EMB pointing at the run's initial embeddings, so identity
// trainers can be plain copy scripts). The command must write
// <dir>/<lang>.crem (+ .ids) for every language and exit 0.
inline std::map<std::string, EmbeddingMatrix> external_train(
    const std::string& command, std::uint32_t iteration, const std::string& mined_file,
    const std::string& out_dir, const std::vector<std::string>& langs,
    const std::string& initial_dir = {}) {
    std::string lang_list;
    for (const auto& l : langs) {
        if (!lang_list.empty()) lang_list += ",";
        lang_list += l;
    }
    ::setenv("CRISS_LANGS", lang_list.c_str(), 1);
    if (!initial_dir.empty()) ::setenv("CRISS_INITIAL_EMB", initial_dir.c_str(), 1);

    const std::string cmdline = command + " --iteration " + std::to_string(iteration) +
                                " --pairs " + detail::shell_quote(mined_file) +
                                " --out " + detail::shell_quote(out_dir) + " 2>&1";
    FILE* pipe = ::popen(cmdline.c_str(), "r");
    if (!pipe) throw io_error("external trainer: cannot launch '" + command + "'");
    std::string output;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, got);
    const int status = ::pclose(pipe);
    const int exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (exit_code != 0)
        throw trainer_error("external trainer exited with code " +
                                std::to_string(exit_code) + "; output:\n" + output,
                            exit_code);

    std::map<std::string, EmbeddingMatrix> result;
    for (const auto& lang : langs) {
        const std::string path =
            (std::filesystem::path(out_dir) / (lang + ".crem")).string();
        try {
            result.emplace(lang, read_matrix(path, lang));
        } catch (const error& e) {
            throw protocol_error("external trainer protocol violation for language '" +
                                 lang + "': " + e.what());
        }
    }
    return result;
}

namespace detail {

inline void write_train_file(const std::vector<MinedSet>& mined,
                             const std::map<std::string, Corpus>& corpora,
                             const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path.string());
    for (const auto& set : mined) {
        const Corpus& src_c = corpora.at(set.src_lang);
        const Corpus& tgt_c = corpora.at(set.tgt_lang);
        for (const auto& p : set.pairs) {
            out << format_score(p.score) << '\t' << set.src_lang << '\t'
                << src_c.ids[p.src] << '\t' << set.tgt_lang << '\t' << tgt_c.ids[p.tgt]
                << '\t' << src_c.sentences[p.src] << '\t'
                << augment_target(tgt_c.sentences[p.tgt], set.tgt_lang) << '\n';
        }
    }
    if (!out) throw io_error("write failure: " + path.string());
}

inline RetrievalReport evaluate(const std::map<std::string, EmbeddingMatrix>& embeddings,
                                const std::vector<std::string>& langs,
                                const EvalSpec& eval) {
    RetrievalReport report;
    report.criterion = eval.criterion;
    report.k = eval.k;
    if (eval.truth == EvalSpec::Truth::none) return report;
    std::vector<const EmbeddingMatrix*> mats;
    for (const auto& lang : langs) mats.push_back(&embeddings.at(lang));
    return multiway_matrix(mats, eval.criterion, eval.k);
}

inline bool iteration_complete(const fs::path& run_dir, std::uint32_t t,
                               const std::vector<std::pair<std::string, std::string>>& plan,
                               const std::vector<std::string>& langs) {
    const fs::path dir = iter_dir(run_dir, t);
    if (!fs::is_directory(dir)) return false;
    for (const auto& [src, tgt] : plan)
        if (!fs::is_regular_file(dir / "mined" / (direction_key(src, tgt) + ".tsv")))
            return false;
    if (!fs::is_regular_file(dir / "train.tsv")) return false;
    for (const auto& lang : langs) {
        const fs::path crem = dir / "emb" / (lang + ".crem");
        if (!fs::is_regular_file(crem)) return false;
        try {
            read_matrix(crem.string(), lang);
        } catch (const error&) {
            return false;
        }
    }
    if (!fs::is_regular_file(dir / "report.json")) return false;
    try {
        std::ifstream in(dir / "report.json");
        nlohmann::json j;
        in >> j;
        report_from_json(j);
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

}  // namespace detail

struct RunOptions {
    bool resume = false;
    nlohmann::json config_snapshot;  // embedded verbatim in the manifest
};

// Algorithm: for each iteration, mine every planned direction with the
// CURRENT model's embeddings, then train from the INITIAL model state on the
// freshly mined pairs only. With the built-in trainer, "train" is a
// closed-form orthogonal alignment refit from scratch against the initial
// embeddings; the external hook delegates to a subprocess. Every iteration's
// artifacts are persisted; a resumed run recomputes exactly the iterations
// whose artifacts are missing or fail validation.
inline std::vector<IterationState> run_criss(
    const LoopConfig& cfg, const std::map<std::string, Corpus>& corpora,
    const std::map<std::string, EmbeddingMatrix>& initial_embeddings,
    const std::string& run_dir_str, const RunOptions& opts = {}) {
    namespace fs = std::filesystem;
    using clock = std::chrono::steady_clock;
    cfg.validate();

    for (const auto& lang : cfg.langs) {
        auto it = initial_embeddings.find(lang);
        if (it == initial_embeddings.end())
            throw validation_error("run: no initial embeddings for language '" + lang + "'");
        it->second.validate();
        auto cit = corpora.find(lang);
        if (cit == corpora.end())
            throw validation_error("run: no corpus for language '" + lang + "'");
        if (cit->second.size() != it->second.rows())
            throw validation_error("run: corpus/embedding row mismatch for language '" +
                                   lang + "'");
    }
    const auto plan = mining_plan(cfg.langs, cfg.pivots);

    const fs::path run_dir(run_dir_str);
    fs::create_directories(run_dir);

    nlohmann::json manifest;
    manifest["tool"] = "criss";
    manifest["version"] = kVersion;
    manifest["status"] = "running";
    manifest["seed"] = cfg.seed;
    manifest["config"] = opts.config_snapshot.is_null() ? nlohmann::json::object()
                                                        : opts.config_snapshot;
    manifest["plan"] = nlohmann::json::array();
    for (const auto& [src, tgt] : plan)
        manifest["plan"].push_back(detail::direction_key(src, tgt));
    manifest["iterations"] = nlohmann::json::array();
    auto flush_manifest = [&] {
        detail::write_text_atomic(run_dir / "manifest.json", manifest.dump(2) + "\n");
    };

    // Persist the initial model state: restart-from-initial training and
    // resume both need it, and it makes the run self-contained.
    const fs::path initial_dir = run_dir / "initial";
    fs::create_directories(initial_dir);
    std::map<std::string, EmbeddingMatrix> initial;
    for (const auto& lang : cfg.langs) {
        const fs::path crem = initial_dir / (lang + ".crem");
        if (opts.resume && fs::is_regular_file(crem)) {
            initial.emplace(lang, read_matrix(crem.string(), lang));
        } else {
            write_matrix(initial_embeddings.at(lang), crem.string());
            initial.emplace(lang, initial_embeddings.at(lang));
        }
        manifest["initial"]["embeddings"][lang] = crem.string();
    }
    {
        const RetrievalReport baseline = detail::evaluate(initial, cfg.langs, cfg.eval);
        detail::write_text_atomic(initial_dir / "report.json",
                                  report_to_json(baseline).dump(2) + "\n");
        manifest["initial"]["report"] = (initial_dir / "report.json").string();
    }
    flush_manifest();

    std::vector<IterationState> states;
    const std::map<std::string, EmbeddingMatrix>* current = &initial;
    std::map<std::string, EmbeddingMatrix> trained;

    for (std::uint32_t t = 1; t <= cfg.iterations; ++t) {
        const fs::path dir = detail::iter_dir(run_dir, t);
        const MarginConfig& margin_cfg = cfg.margin[t - 1];
        IterationState state;
        state.iteration = t;

        if (opts.resume && detail::iteration_complete(run_dir, t, plan, cfg.langs)) {
            // Iteration already on disk and valid: load instead of recompute.
            trained.clear();
            for (const auto& lang : cfg.langs) {
                const fs::path crem = dir / "emb" / (lang + ".crem");
                trained.emplace(lang, read_matrix(crem.string(), lang));
                state.embedding_paths[lang] = crem.string();
            }
            for (const auto& [src, tgt] : plan) {
                const auto key = detail::direction_key(src, tgt);
                const auto tsv = (dir / "mined" / (key + ".tsv")).string();
                state.mined_paths[key] = tsv;
                state.mined_counts[key] = read_mined_tsv(tsv).size();
            }
            state.report_path = (dir / "report.json").string();
            std::ifstream in(state.report_path);
            nlohmann::json j;
            in >> j;
            state.report = report_from_json(j);

            nlohmann::json entry{{"iteration", t},
                                 {"mined", state.mined_paths},
                                 {"counts", state.mined_counts},
                                 {"embeddings", state.embedding_paths},
                                 {"report", state.report_path},
                                 {"resumed", true}};
            manifest["iterations"].push_back(std::move(entry));
            flush_manifest();
        } else {
            fs::remove_all(dir);
            fs::create_directories(dir / "mined");
            fs::create_directories(dir / "emb");

            const auto t_mine0 = clock::now();
            std::vector<MinedSet> mined;
            mined.reserve(plan.size());
            for (const auto& [src, tgt] : plan) {
                MinedSet set =
                    mine_pair(current->at(src), current->at(tgt), margin_cfg);
                const auto key = detail::direction_key(src, tgt);
                const auto tsv = (dir / "mined" / (key + ".tsv")).string();
                write_mined_tsv(set, corpora.at(src), corpora.at(tgt), tsv);
                state.mined_paths[key] = tsv;
                state.mined_counts[key] = set.pairs.size();
                mined.push_back(std::move(set));
            }
            detail::write_train_file(mined, corpora, dir / "train.tsv");
            const auto t_mine1 = clock::now();

            // Train from the initial model state on this iteration's pairs.
            trained.clear();
            if (cfg.trainer.kind == TrainerSpec::Kind::procrustes) {
                const AlignmentMap alignment =
                    procrustes_train(mined, initial, cfg.pivots);
                for (const auto& lang : cfg.langs)
                    trained.emplace(lang, apply_alignment(initial.at(lang), alignment));
            } else {
                trained = external_train(cfg.trainer.command, t,
                                         (dir / "train.tsv").string(),
                                         (dir / "emb").string(), cfg.langs,
                                         initial_dir.string());
                for (const auto& lang : cfg.langs) {
                    if (trained.at(lang).rows() != corpora.at(lang).size())
                        throw protocol_error(
                            "external trainer: row count for language '" + lang +
                            "' does not match its corpus");
                }
            }
            for (const auto& lang : cfg.langs) {
                const fs::path crem = dir / "emb" / (lang + ".crem");
                if (cfg.trainer.kind == TrainerSpec::Kind::procrustes)
                    write_matrix(trained.at(lang), crem.string());
                state.embedding_paths[lang] = crem.string();
            }
            const auto t_train1 = clock::now();

            state.report = detail::evaluate(trained, cfg.langs, cfg.eval);
            state.report_path = (dir / "report.json").string();
            detail::write_text_atomic(dir / "report.json",
                                      report_to_json(state.report).dump(2) + "\n");
            const auto t_eval1 = clock::now();

            auto seconds = [](auto a, auto b) {
                return std::chrono::duration<double>(b - a).count();
            };
            nlohmann::json timings{{"mine", seconds(t_mine0, t_mine1)},
                                   {"train", seconds(t_mine1, t_train1)},
                                   {"evaluate", seconds(t_train1, t_eval1)}};
            nlohmann::json entry{{"iteration", t},
                                 {"mined", state.mined_paths},
                                 {"counts", state.mined_counts},
                                 {"embeddings", state.embedding_paths},
                                 {"report", state.report_path},
                                 {"seconds", timings}};
            manifest["iterations"].push_back(std::move(entry));
            flush_manifest();
        }

        states.push_back(state);
        current = &trained;
    }

    manifest["status"] = "complete";
    flush_manifest();
    return states;
}

// Reads and parses <run>/manifest.json (used by resume).
inline nlohmann::json load_manifest(const std::string& run_dir) {
    const std::filesystem::path path = std::filesystem::path(run_dir) / "manifest.json";
    std::ifstream in(path);
    if (!in) throw io_error("cannot open manifest: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw format_error(path.string() + ": invalid JSON: " + e.what());
    }
    return j;
}

}  // namespace criss
