// Command-line driver: every pipeline stage as a subcommand, batch-oriented.
// Exit codes: 0 success, 1 I/O or runtime failure, 2 validation/config error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "criss/criss.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

criss::CorpusFormat parse_format(const std::string& format, const std::string& path) {
    if (format == "plain") return criss::CorpusFormat::plain;
    if (format == "jsonl") return criss::CorpusFormat::jsonl;
    if (format == "auto")
        return path.ends_with(".jsonl") ? criss::CorpusFormat::jsonl
                                        : criss::CorpusFormat::plain;
    throw criss::validation_error("unknown corpus format '" + format + "'");
}

void apply_thread_limit(unsigned flag_value) {
    if (flag_value > 0) {
        criss::set_thread_limit(flag_value);
        return;
    }
    if (const char* env = std::getenv("CRISS_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) criss::set_thread_limit(static_cast<unsigned>(v));
    }
}

nlohmann::json yaml_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
            return nullptr;
        case YAML::NodeType::Scalar: {
            if (node.Tag() == "!") return node.as<std::string>();  // quoted scalar
            bool b;
            if (YAML::convert<bool>::decode(node, b)) return b;
            std::int64_t i;
            if (YAML::convert<std::int64_t>::decode(node, i)) return i;
            double d;
            if (YAML::convert<double>::decode(node, d)) return d;
            return node.as<std::string>();
        }
        case YAML::NodeType::Sequence: {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& item : node) arr.push_back(yaml_to_json(item));
            return arr;
        }
        case YAML::NodeType::Map: {
            nlohmann::json obj = nlohmann::json::object();
            for (const auto& kv : node)
                obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return obj;
        }
        default:
            return nullptr;
    }
}

nlohmann::json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw criss::io_error("cannot open config file: " + path);
    if (path.ends_with(".yaml") || path.ends_with(".yml")) {
        try {
            return yaml_to_json(YAML::Load(in));
        } catch (const YAML::Exception& e) {
            throw criss::validation_error(path + ": invalid YAML: " + e.what());
        }
    }
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw criss::validation_error(path + ": invalid JSON: " + e.what());
    }
}

criss::Corpus load_and_prepare(const std::string& path, const std::string& lang,
                               const std::string& format, bool no_dedup,
                               std::optional<std::size_t> cap, std::uint64_t seed) {
    criss::Corpus c = criss::load_corpus(path, lang, parse_format(format, path));
    if (!no_dedup) c = criss::dedup(c);
    if (cap) c = criss::subsample(c, *cap, seed);
    return c;
}

std::vector<std::uint32_t> load_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw criss::io_error("cannot open truth file: " + path);
    std::vector<std::uint32_t> truth;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            truth.push_back(static_cast<std::uint32_t>(std::stoul(line)));
        } catch (const std::exception&) {
            throw criss::format_error(path + ":" + std::to_string(line_no) +
                                      ": expected a target ordinal, got '" + line + "'");
        }
    }
    return truth;
}

int cmd_embed(const std::string& corpus_path, const std::string& lang,
              const std::string& format, std::uint32_t dim, std::uint64_t seed,
              const std::string& out, bool no_dedup, std::optional<std::size_t> cap) {
    const criss::Corpus corpus =
        load_and_prepare(corpus_path, lang, format, no_dedup, cap, seed);
    const criss::EmbeddingMatrix m = criss::toy_embed(corpus, dim, seed);
    criss::write_matrix(m, out);
    std::cout << "embedded " << m.rows() << " sentences (" << lang << ", dim " << dim
              << ") -> " << out << "\n";
    return kExitOk;
}

int cmd_mine(const std::string& src_emb, const std::string& tgt_emb,
             const std::string& src_corpus_path, const std::string& tgt_corpus_path,
             const std::string& src_lang, const std::string& tgt_lang,
             const std::string& format, bool no_dedup, const criss::MarginConfig& cfg,
             const std::string& out) {
    const criss::Corpus src_corpus = load_and_prepare(src_corpus_path, src_lang, format,
                                                      no_dedup, std::nullopt, 0);
    const criss::Corpus tgt_corpus = load_and_prepare(tgt_corpus_path, tgt_lang, format,
                                                      no_dedup, std::nullopt, 0);
    criss::EmbeddingMatrix src = criss::read_matrix(src_emb, src_lang);
    criss::EmbeddingMatrix tgt = criss::read_matrix(tgt_emb, tgt_lang);
    auto check_binding = [](const criss::EmbeddingMatrix& m, const criss::Corpus& c) {
        if (m.rows() != c.size())
            throw criss::validation_error(
                "embedding rows (" + std::to_string(m.rows()) +
                ") do not match corpus size (" + std::to_string(c.size()) +
                ") for language '" + c.lang +
                "'; same preprocessing flags required for embed and mine");
        if (!m.ids().empty() && m.ids() != c.ids)
            throw criss::validation_error(
                "embedding id sidecar does not match corpus external ids for language '" +
                c.lang + "'");
    };
    check_binding(src, src_corpus);
    check_binding(tgt, tgt_corpus);
    src.validate();
    tgt.validate();

    const criss::MinedSet mined = criss::mine_pair(src, tgt, cfg);
    criss::write_mined_tsv(mined, src_corpus, tgt_corpus, out);

    const criss::MiningStats stats = criss::mining_stats({mined});
    std::cout << criss::stats_to_json(stats).dump(2) << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& src_emb, const std::string& tgt_emb,
             const std::string& truth_path, const std::string& criterion,
             std::uint32_t k, const std::string& out) {
    // direction labels default to the embedding file stems
    const criss::EmbeddingMatrix src =
        criss::read_matrix(src_emb, std::filesystem::path(src_emb).stem().string());
    const criss::EmbeddingMatrix tgt =
        criss::read_matrix(tgt_emb, std::filesystem::path(tgt_emb).stem().string());
    const std::vector<std::uint32_t> truth = load_truth(truth_path);
    const auto crit = criss::retrieval_criterion_from_string(criterion);

    criss::RetrievalReport report;
    report.criterion = crit;
    report.k = k;
    report.directions.push_back(criss::retrieval_accuracy(src, tgt, truth, crit, k));

    const nlohmann::json j = criss::report_to_json(report);
    if (out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream of(out, std::ios::trunc);
        if (!of) throw criss::io_error("cannot open for writing: " + out);
        of << j.dump(2) << "\n";
        std::cout << "accuracy " << report.directions[0].correct << "/"
                  << report.directions[0].n << " -> " << out << "\n";
    }
    return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::string& resume_dir, bool threads_flag_set) {
    nlohmann::json config_json;
    std::string run_dir;
    bool resume = false;
    if (!resume_dir.empty()) {
        const nlohmann::json manifest = criss::load_manifest(resume_dir);
        if (!manifest.contains("config") || manifest["config"].empty())
            throw criss::validation_error(resume_dir +
                                          ": manifest carries no config snapshot");
        config_json = manifest["config"];
        run_dir = resume_dir;
        resume = true;
    } else {
        config_json = load_config_file(config_path);
        run_dir = out_dir;
        if (std::filesystem::exists(run_dir) && !std::filesystem::is_empty(run_dir))
            throw criss::validation_error("run directory '" + run_dir +
                                          "' exists and is not empty (use --resume)");
    }

    const criss::RunSpec spec = criss::run_spec_from_json(config_json);
    if (spec.threads && !threads_flag_set) criss::set_thread_limit(*spec.threads);
    criss::RunInputs inputs = criss::materialize_inputs(spec);

    criss::RunOptions opts;
    opts.resume = resume;
    opts.config_snapshot = config_json;
    const auto states =
        criss::run_criss(spec.loop, inputs.corpora, inputs.embeddings, run_dir, opts);

    for (const auto& state : states) {
        std::size_t total = 0;
        for (const auto& [dir, count] : state.mined_counts) total += count;
        std::cout << "iteration " << state.iteration << ": mined " << total
                  << " pairs across " << state.mined_counts.size() << " directions";
        if (!state.report.directions.empty())
            std::cout << ", avg top-1 accuracy " << state.report.average();
        std::cout << "\n";
    }
    std::cout << "run complete -> " << run_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"margin-based bitext mining and iterative alignment"};
    app.set_version_flag("--version", std::string("criss ") + criss::kVersion);
    app.require_subcommand(1);

    unsigned threads = 0;
    app.add_option("--threads", threads,
                   "worker thread cap (default: CRISS_THREADS env or all cores)");

    // embed
    std::string e_corpus, e_lang = "und", e_format = "auto", e_out;
    std::uint32_t e_dim = 64;
    std::uint64_t e_seed = 0;
    bool e_no_dedup = false;
    std::optional<std::size_t> e_cap;
    auto* embed = app.add_subcommand("embed", "embed a corpus with the built-in toy embedder");
    embed->add_option("corpus", e_corpus, "corpus file")->required();
    embed->add_option("--lang", e_lang, "language code");
    embed->add_option("--format", e_format, "plain | jsonl | auto");
    embed->add_option("--dim", e_dim, "embedding dimension (>= 8)");
    embed->add_option("--seed", e_seed, "deterministic seed");
    embed->add_option("--out", e_out, "output .crem path")->required();
    embed->add_flag("--no-dedup", e_no_dedup, "keep exact duplicate sentences");
    embed->add_option("--cap", e_cap, "subsample to at most this many sentences");

    // mine
    std::string m_src_emb, m_tgt_emb, m_src_corpus, m_tgt_corpus;
    std::string m_src_lang = "und", m_tgt_lang = "und", m_format = "auto", m_out;
    std::string m_rule = "union";
    double m_tau = 1.06;
    std::uint32_t m_k = 5;
    std::optional<std::size_t> m_max_pairs;
    bool m_no_dedup = false;
    auto* mine = app.add_subcommand("mine", "mine parallel pairs for one direction");
    mine->add_option("--src-emb", m_src_emb)->required();
    mine->add_option("--tgt-emb", m_tgt_emb)->required();
    mine->add_option("--src-corpus", m_src_corpus)->required();
    mine->add_option("--tgt-corpus", m_tgt_corpus)->required();
    mine->add_option("--src-lang", m_src_lang);
    mine->add_option("--tgt-lang", m_tgt_lang);
    mine->add_option("--format", m_format, "plain | jsonl | auto");
    mine->add_option("--k", m_k, "KNN neighborhood size");
    mine->add_option("--tau", m_tau, "minimum margin score");
    mine->add_option("--max-pairs", m_max_pairs, "keep at most this many pairs");
    mine->add_option("--candidate-rule", m_rule, "union | intersection");
    mine->add_flag("--no-dedup", m_no_dedup, "keep exact duplicate sentences");
    mine->add_option("--out", m_out, "output TSV path")->required();

    // eval
    std::string v_src_emb, v_tgt_emb, v_truth, v_criterion = "cosine", v_out;
    std::uint32_t v_k = 5;
    auto* eval = app.add_subcommand("eval", "top-1 retrieval accuracy for one direction");
    eval->add_option("--src-emb", v_src_emb)->required();
    eval->add_option("--tgt-emb", v_tgt_emb)->required();
    eval->add_option("--truth", v_truth, "file of target ordinals, one per source row")
        ->required();
    eval->add_option("--criterion", v_criterion, "cosine | margin");
    eval->add_option("--k", v_k, "neighborhood size for the margin criterion");
    eval->add_option("--out", v_out, "report.json path (default: stdout)");

    // run
    std::string r_config, r_out, r_resume;
    auto* run = app.add_subcommand("run", "iterative mine-train loop from a config file");
    run->add_option("--config", r_config, "YAML or JSON run config");
    run->add_option("--out", r_out, "run directory to create");
    run->add_option("--resume", r_resume, "existing run directory to continue");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    }

    try {
        apply_thread_limit(threads);
        if (*embed)
            return cmd_embed(e_corpus, e_lang, e_format, e_dim, e_seed, e_out,
                             e_no_dedup, e_cap);
        if (*mine) {
            criss::MarginConfig cfg;
            cfg.k = m_k;
            cfg.tau = m_tau;
            cfg.max_pairs = m_max_pairs;
            if (m_rule == "union")
                cfg.candidate_rule = criss::CandidateRule::union_rule;
            else if (m_rule == "intersection")
                cfg.candidate_rule = criss::CandidateRule::intersection_rule;
            else
                throw criss::validation_error("unknown candidate rule '" + m_rule + "'");
            return cmd_mine(m_src_emb, m_tgt_emb, m_src_corpus, m_tgt_corpus, m_src_lang,
                            m_tgt_lang, m_format, m_no_dedup, cfg, m_out);
        }
        if (*eval) return cmd_eval(v_src_emb, v_tgt_emb, v_truth, v_criterion, v_k, v_out);
        if (*run) {
            if (r_resume.empty() && r_config.empty())
                throw criss::validation_error("run: --config (with --out) or --resume required");
            if (r_resume.empty() && r_out.empty())
                throw criss::validation_error("run: --out is required with --config");
            return cmd_run(r_config, r_out, r_resume, threads > 0);
        }
    } catch (const criss::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const criss::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
