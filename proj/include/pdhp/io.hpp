#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdhp/kernels.hpp"
#include "pdhp/smc.hpp"
#include "pdhp/synthgen.hpp"
#include "pdhp/text.hpp"

namespace pdhp {

using ojson = nlohmann::ordered_json;

struct StreamReadOptions {
    double time_divisor = 1.0; // e.g. 3600 to read epoch seconds as hours
    bool tokenize_text = false; // read a "text" field and build the vocabulary on the fly
};

namespace detail {

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

[[noreturn]] inline void line_error(const std::string& path, std::size_t line, const std::string& what) {
    throw std::runtime_error(path + " line " + std::to_string(line) + ": " + what);
}

} // namespace detail

// One JSON object per line with a numeric "time" and either a "tokens" array
// of word ids or, with tokenize_text, a whitespace-split "text" string. When
// tokenizing, vocab_out (if given) receives the id -> word table.
inline std::vector<Document> read_documents_jsonl(const std::string& path, StreamReadOptions opts = {},
                                                  std::vector<std::string>* vocab_out = nullptr) {
    if (!(opts.time_divisor > 0.0)) throw std::invalid_argument("read_documents_jsonl: time_divisor must be positive");
    auto in = detail::open_input(path);
    std::vector<Document> docs;
    std::map<std::string, std::uint32_t> vocab;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::uint32_t> tokens;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ojson j;
        try {
            j = ojson::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            detail::line_error(path, lineno, e.what());
        }
        if (!j.is_object() || !j.contains("time") || !j["time"].is_number())
            detail::line_error(path, lineno, "expected an object with a numeric \"time\"");
        tokens.clear();
        if (opts.tokenize_text) {
            if (!j.contains("text") || !j["text"].is_string())
                detail::line_error(path, lineno, "expected a string \"text\" field");
            std::istringstream words(j["text"].get<std::string>());
            std::string w;
            while (words >> w) {
                auto [it, fresh] = vocab.emplace(w, static_cast<std::uint32_t>(vocab.size()));
                (void)fresh;
                tokens.push_back(it->second);
            }
            if (tokens.empty()) detail::line_error(path, lineno, "document has no tokens");
        } else {
            if (!j.contains("tokens") || !j["tokens"].is_array() || j["tokens"].empty())
                detail::line_error(path, lineno, "expected a non-empty \"tokens\" array");
            for (const auto& t : j["tokens"]) {
                if (!t.is_number_unsigned()) detail::line_error(path, lineno, "token ids must be non-negative integers");
                tokens.push_back(t.get<std::uint32_t>());
            }
        }
        docs.push_back(make_document(j["time"].get<double>() / opts.time_divisor, tokens));
    }
    if (vocab_out) {
        vocab_out->assign(vocab.size(), {});
        for (const auto& [word, id] : vocab) (*vocab_out)[id] = word;
    }
    return docs;
}

inline void write_documents_jsonl(const std::string& path, std::span<const Document> docs) {
    auto out = detail::open_output(path);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        ojson j;
        j["id"] = i;
        j["time"] = docs[i].time;
        auto& toks = j["tokens"] = ojson::array();
        for (auto [v, k] : docs[i].words)
            for (std::uint32_t c = 0; c < k; ++c) toks.push_back(v);
        out << j.dump() << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

struct TruthLabels {
    std::vector<std::int64_t> temporal;
    std::vector<std::int64_t> textual;
};

inline void write_truth_csv(const std::string& path, std::span<const Document> docs) {
    auto out = detail::open_output(path);
    out << "doc_id,temporal,textual\n";
    for (std::size_t i = 0; i < docs.size(); ++i)
        out << i << ',' << docs[i].true_temporal << ',' << docs[i].true_textual << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline TruthLabels read_truth_csv(const std::string& path) {
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line) || line != "doc_id,temporal,textual")
        throw std::runtime_error(path + ": expected header doc_id,temporal,textual");
    TruthLabels truth;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::int64_t vals[3];
        for (int k = 0; k < 3; ++k) {
            if (!std::getline(row, cell, ',')) detail::line_error(path, lineno, "expected 3 columns");
            try {
                vals[k] = std::stoll(cell);
            } catch (const std::exception&) {
                detail::line_error(path, lineno, "non-integer cell: " + cell);
            }
        }
        if (vals[0] != static_cast<std::int64_t>(truth.temporal.size()))
            detail::line_error(path, lineno, "doc_id out of sequence");
        truth.temporal.push_back(vals[1]);
        truth.textual.push_back(vals[2]);
    }
    return truth;
}

inline void write_labels_csv(const std::string& path, std::span<const std::uint32_t> labels) {
    auto out = detail::open_output(path);
    out << "doc_id,cluster\n";
    for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::vector<std::uint32_t> read_labels_csv(const std::string& path) {
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line) || line != "doc_id,cluster")
        throw std::runtime_error(path + ": expected header doc_id,cluster");
    std::vector<std::uint32_t> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::int64_t vals[2];
        for (int k = 0; k < 2; ++k) {
            if (!std::getline(row, cell, ',')) detail::line_error(path, lineno, "expected 2 columns");
            try {
                vals[k] = std::stoll(cell);
            } catch (const std::exception&) {
                detail::line_error(path, lineno, "non-integer cell: " + cell);
            }
        }
        if (vals[0] != static_cast<std::int64_t>(labels.size()))
            detail::line_error(path, lineno, "doc_id out of sequence");
        if (vals[1] < 0) detail::line_error(path, lineno, "negative cluster id");
        labels.push_back(static_cast<std::uint32_t>(vals[1]));
    }
    return labels;
}

inline ojson kernel_basis_to_json(const KernelBasis& basis) {
    return ojson{{"means", basis.means}, {"sigmas", basis.sigmas}};
}

inline KernelBasis kernel_basis_from_json(const ojson& j) {
    KernelBasis basis;
    basis.means = j.at("means").get<std::vector<double>>();
    basis.sigmas = j.at("sigmas").get<std::vector<double>>();
    basis.validate();
    return basis;
}

inline ojson smc_config_to_json(const SmcConfig& cfg) {
    return ojson{{"r", cfg.r},
                 {"lambda0", cfg.lambda0},
                 {"theta0", cfg.theta0},
                 {"vocab_size", cfg.vocab_size},
                 {"n_particles", cfg.n_particles},
                 {"n_alpha_samples", cfg.n_alpha_samples},
                 {"alpha_max", cfg.alpha_max},
                 {"omega_threshold", cfg.omega_threshold},
                 {"horizon_sigmas", cfg.horizon_sigmas},
                 {"seed", cfg.seed},
                 {"kernel", kernel_basis_to_json(cfg.basis)}};
}

inline SmcConfig smc_config_from_json(const ojson& j) {
    SmcConfig cfg;
    if (j.contains("r")) cfg.r = j["r"].get<double>();
    if (j.contains("lambda0")) cfg.lambda0 = j["lambda0"].get<double>();
    if (j.contains("theta0")) cfg.theta0 = j["theta0"].get<double>();
    if (j.contains("vocab_size")) cfg.vocab_size = j["vocab_size"].get<std::uint32_t>();
    if (j.contains("n_particles")) cfg.n_particles = j["n_particles"].get<std::size_t>();
    if (j.contains("n_alpha_samples")) cfg.n_alpha_samples = j["n_alpha_samples"].get<std::size_t>();
    if (j.contains("alpha_max")) cfg.alpha_max = j["alpha_max"].get<double>();
    if (j.contains("omega_threshold")) cfg.omega_threshold = j["omega_threshold"].get<double>();
    if (j.contains("horizon_sigmas")) cfg.horizon_sigmas = j["horizon_sigmas"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("kernel")) cfg.basis = kernel_basis_from_json(j["kernel"]);
    cfg.validate();
    return cfg;
}

inline ojson generator_config_to_json(const GeneratorConfig& cfg) {
    return ojson{{"n_clusters", cfg.n_clusters},
                 {"vocab_size", cfg.vocab_size},
                 {"doc_length", cfg.doc_length},
                 {"t_end", cfg.t_end},
                 {"mu", cfg.mu},
                 {"target_branching", cfg.target_branching},
                 {"vocab_overlap", cfg.vocab_overlap},
                 {"intensity_overlap", cfg.intensity_overlap},
                 {"decorrelation", cfg.decorrelation},
                 {"grid_dt", cfg.grid_dt},
                 {"overlap_tolerance", cfg.overlap_tolerance},
                 {"seed", cfg.seed},
                 {"kernel", kernel_basis_to_json(cfg.basis)}};
}

inline GeneratorConfig generator_config_from_json(const ojson& j) {
    GeneratorConfig cfg;
    if (j.contains("n_clusters")) cfg.n_clusters = j["n_clusters"].get<std::size_t>();
    if (j.contains("vocab_size")) cfg.vocab_size = j["vocab_size"].get<std::uint32_t>();
    if (j.contains("doc_length")) cfg.doc_length = j["doc_length"].get<std::uint32_t>();
    if (j.contains("t_end")) cfg.t_end = j["t_end"].get<double>();
    if (j.contains("mu")) cfg.mu = j["mu"].get<double>();
    if (j.contains("target_branching")) cfg.target_branching = j["target_branching"].get<double>();
    if (j.contains("vocab_overlap")) cfg.vocab_overlap = j["vocab_overlap"].get<double>();
    if (j.contains("intensity_overlap")) cfg.intensity_overlap = j["intensity_overlap"].get<double>();
    if (j.contains("decorrelation")) cfg.decorrelation = j["decorrelation"].get<double>();
    if (j.contains("grid_dt")) cfg.grid_dt = j["grid_dt"].get<double>();
    if (j.contains("overlap_tolerance")) cfg.overlap_tolerance = j["overlap_tolerance"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("kernel")) cfg.basis = kernel_basis_from_json(j["kernel"]);
    cfg.validate();
    return cfg;
}

inline ojson read_json_file(const std::string& path) {
    auto in = detail::open_input(path);
    try {
        return ojson::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

inline void write_json_file(const std::string& path, const ojson& j) {
    auto out = detail::open_output(path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace pdhp
