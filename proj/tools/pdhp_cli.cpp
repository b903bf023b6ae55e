#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pdhp/pdhp.hpp"

namespace fs = std::filesystem;

namespace {

int env_threads() {
    const char* raw = std::getenv("PDHP_THREADS");
    if (!raw) return 1;
    const int n = std::atoi(raw);
    if (n < 1) return 1;
    return std::min(n, 64);
}

std::string format_r(double r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

std::string format_num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

void check_sorted(const std::vector<pdhp::Document>& docs, const std::string& path) {
    for (std::size_t i = 1; i < docs.size(); ++i)
        if (docs[i].time < docs[i - 1].time)
            throw std::runtime_error(path + ": document " + std::to_string(i) +
                                     " goes backwards in time; the stream must be sorted");
    if (docs.empty()) throw std::runtime_error(path + ": no documents");
}

struct FitResult {
    std::vector<std::uint32_t> labels;
    std::vector<pdhp::ClusterSummary> clusters;
    std::vector<double> particle_weights;
    double last_time = 0.0;
};

FitResult run_fit(const pdhp::SmcConfig& cfg, const std::vector<pdhp::Document>& docs) {
    pdhp::SmcEngine engine(cfg);
    for (const auto& doc : docs) engine.observe(doc);
    FitResult res;
    res.clusters = engine.finalize();
    res.labels = engine.labels();
    for (const auto& p : engine.particles()) res.particle_weights.push_back(p.weight);
    res.last_time = engine.last_time();
    return res;
}

pdhp::ojson fit_summary_json(const pdhp::SmcConfig& cfg, const FitResult& res, std::size_t n_docs) {
    pdhp::ojson clusters = pdhp::ojson::array();
    for (const auto& c : res.clusters) {
        clusters.push_back(pdhp::ojson{{"id", c.id},
                                       {"n_docs", c.n_docs},
                                       {"n_words", c.n_words},
                                       {"t_open", c.t_open},
                                       {"t_last", c.t_last},
                                       {"alpha", c.map_alpha}});
    }
    return pdhp::ojson{{"config", pdhp::smc_config_to_json(cfg)},
                       {"n_docs", n_docs},
                       {"last_time", res.last_time},
                       {"n_clusters", res.clusters.size()},
                       {"particle_weights", res.particle_weights},
                       {"clusters", std::move(clusters)}};
}

pdhp::ojson eval_metrics(const std::vector<std::uint32_t>& pred, const pdhp::TruthLabels& truth) {
    if (pred.size() != truth.temporal.size())
        throw std::runtime_error("prediction and truth cover different document counts");
    const std::span<const std::uint32_t> p(pred);
    const std::span<const std::int64_t> temporal(truth.temporal);
    const std::span<const std::int64_t> textual(truth.textual);
    const double nmi_temp = pdhp::nmi(p, temporal);
    const double nmi_text = pdhp::nmi(p, textual);
    std::size_t k = 0;
    {
        std::vector<bool> seen;
        for (std::uint32_t c : pred) {
            if (c >= seen.size()) seen.resize(c + 1, false);
            if (!seen[c]) {
                seen[c] = true;
                ++k;
            }
        }
    }
    return pdhp::ojson{{"n_docs", pred.size()},
                       {"n_clusters_pred", k},
                       {"nmi_temporal", nmi_temp},
                       {"nmi_textual", nmi_text},
                       {"delta_nmi", nmi_text - nmi_temp},
                       {"normalized_entropy_pred", pdhp::normalized_entropy(p)}};
}

int cmd_generate(const std::string& spec_path, const std::string& out_dir, std::int64_t seed_override,
                 bool emit_vocab) {
    auto cfg = pdhp::generator_config_from_json(pdhp::read_json_file(spec_path));
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    const auto data = pdhp::generate(cfg);
    fs::create_directories(out_dir);
    pdhp::write_documents_jsonl((fs::path(out_dir) / "docs.jsonl").string(), data.docs);
    pdhp::write_truth_csv((fs::path(out_dir) / "truth.csv").string(), data.docs);
    pdhp::ojson clusters = pdhp::ojson::array();
    for (const auto& c : data.clusters) {
        pdhp::ojson jc{{"alpha", c.alpha}, {"shift", c.shift}, {"n_events", c.events.size()}};
        if (emit_vocab) jc["vocab"] = c.vocab;
        clusters.push_back(std::move(jc));
    }
    pdhp::write_json_file((fs::path(out_dir) / "meta.json").string(),
                          pdhp::ojson{{"config", pdhp::generator_config_to_json(cfg)},
                                      {"n_docs", data.docs.size()},
                                      {"achieved_vocab_overlap", data.achieved_vocab_overlap},
                                      {"achieved_intensity_overlap", data.achieved_intensity_overlap},
                                      {"clusters", std::move(clusters)}});
    std::cout << "generated " << data.docs.size() << " documents in " << out_dir << "\n";
    return 0;
}

int cmd_fit(const std::string& data_path, const std::string& config_path, const std::string& out_dir,
            std::int64_t seed_override, double r_override, double time_divisor, bool tokenize) {
    auto cfg = pdhp::smc_config_from_json(pdhp::read_json_file(config_path));
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (r_override >= 0.0) cfg.r = r_override;
    pdhp::StreamReadOptions opts;
    opts.time_divisor = time_divisor;
    opts.tokenize_text = tokenize;
    std::vector<std::string> vocab;
    const auto docs = pdhp::read_documents_jsonl(data_path, opts, tokenize ? &vocab : nullptr);
    check_sorted(docs, data_path);
    if (tokenize) cfg.vocab_size = static_cast<std::uint32_t>(std::max<std::size_t>(vocab.size(), 1));
    const auto res = run_fit(cfg, docs);
    fs::create_directories(out_dir);
    pdhp::write_labels_csv((fs::path(out_dir) / "labels.csv").string(), res.labels);
    pdhp::write_json_file((fs::path(out_dir) / "summary.json").string(), fit_summary_json(cfg, res, docs.size()));
    std::cout << "fit " << docs.size() << " documents into " << res.clusters.size() << " clusters ("
              << out_dir << ")\n";
    return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path, const std::string& summary_path,
             const std::string& meta_path, const std::string& out_path) {
    const auto pred = pdhp::read_labels_csv(pred_path);
    const auto truth = pdhp::read_truth_csv(truth_path);
    auto metrics = eval_metrics(pred, truth);
    if (!summary_path.empty() && !meta_path.empty()) {
        const auto summary = pdhp::read_json_file(summary_path);
        const auto meta = pdhp::read_json_file(meta_path);
        std::vector<std::vector<double>> pred_alphas;
        for (const auto& c : summary.at("clusters")) {
            const std::size_t id = c.at("id").get<std::size_t>();
            if (pred_alphas.size() <= id) pred_alphas.resize(id + 1);
            pred_alphas[id] = c.at("alpha").get<std::vector<double>>();
        }
        std::vector<std::vector<double>> true_alphas;
        for (const auto& c : meta.at("clusters")) true_alphas.push_back(c.at("alpha").get<std::vector<double>>());
        metrics["alpha_mae"] = pdhp::alpha_mae(pred, pred_alphas, truth.temporal, true_alphas);
    }
    std::cout << metrics.dump(2) << "\n";
    if (!out_path.empty()) pdhp::write_json_file(out_path, metrics);
    return 0;
}

int cmd_sweep(const std::string& data_path, const std::string& r_list, const std::string& config_path,
              const std::string& out_dir, const std::string& truth_path, std::int64_t seed_override,
              double time_divisor, bool tokenize) {
    auto base_cfg = pdhp::smc_config_from_json(pdhp::read_json_file(config_path));
    if (seed_override >= 0) base_cfg.seed = static_cast<std::uint64_t>(seed_override);
    std::vector<double> rs;
    {
        std::istringstream ss(r_list);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                rs.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::runtime_error("--r: not a number: " + cell);
            }
        }
        if (rs.empty()) throw std::runtime_error("--r: empty list");
    }
    pdhp::StreamReadOptions opts;
    opts.time_divisor = time_divisor;
    opts.tokenize_text = tokenize;
    std::vector<std::string> vocab;
    const auto docs = pdhp::read_documents_jsonl(data_path, opts, tokenize ? &vocab : nullptr);
    check_sorted(docs, data_path);
    if (tokenize) base_cfg.vocab_size = static_cast<std::uint32_t>(std::max<std::size_t>(vocab.size(), 1));

    pdhp::TruthLabels truth;
    const bool have_truth = !truth_path.empty();
    if (have_truth) {
        truth = pdhp::read_truth_csv(truth_path);
        if (truth.temporal.size() != docs.size())
            throw std::runtime_error("truth and data cover different document counts");
    }

    std::vector<FitResult> results(rs.size());
    const int n_threads = std::min<int>(env_threads(), static_cast<int>(rs.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= rs.size()) return;
            pdhp::SmcConfig cfg = base_cfg;
            cfg.r = rs[i];
            results[i] = run_fit(cfg, docs);
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    fs::create_directories(out_dir);
    std::ofstream csv((fs::path(out_dir) / "sweep.csv").string());
    if (!csv) throw std::runtime_error("cannot write sweep.csv");
    csv << "r,nmi_temporal,nmi_textual,delta_nmi,n_clusters,normalized_entropy\n";
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const auto& res = results[i];
        pdhp::write_labels_csv((fs::path(out_dir) / ("labels_r" + format_r(rs[i]) + ".csv")).string(), res.labels);
        std::string nmi_t = "nan", nmi_x = "nan", dn = "nan";
        if (have_truth) {
            const auto m = eval_metrics(res.labels, truth);
            nmi_t = format_num(m["nmi_temporal"].get<double>());
            nmi_x = format_num(m["nmi_textual"].get<double>());
            dn = format_num(m["delta_nmi"].get<double>());
        }
        csv << format_r(rs[i]) << ',' << nmi_t << ',' << nmi_x << ',' << dn << ',' << res.clusters.size()
            << ',' << format_num(pdhp::normalized_entropy(std::span<const std::uint32_t>(res.labels))) << '\n';
    }
    if (!csv) throw std::runtime_error("write failed: sweep.csv");
    std::cout << "swept " << rs.size() << " values of r over " << docs.size() << " documents (" << out_dir
              << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming document clustering with an intensity-powered allocation prior"};
    app.require_subcommand(1);

    std::string spec_path, data_path, config_path, out_dir, pred_path, truth_path;
    std::string summary_path, meta_path, out_file, r_list;
    std::int64_t seed = -1;
    double r_override = -1.0, time_divisor = 1.0;
    bool tokenize = false, emit_vocab = false;

    auto* gen = app.add_subcommand("generate", "Generate a labeled synthetic stream");
    gen->add_option("--spec", spec_path, "generator config JSON")->required()->check(CLI::ExistingFile);
    gen->add_option("--out", out_dir, "output directory")->required();
    gen->add_option("--seed", seed, "override the config seed");
    gen->add_flag("--emit-vocab", emit_vocab, "include word distributions in meta.json");

    auto* fit = app.add_subcommand("fit", "Cluster a document stream");
    fit->add_option("--data", data_path, "documents JSONL")->required()->check(CLI::ExistingFile);
    fit->add_option("--config", config_path, "engine config JSON")->required()->check(CLI::ExistingFile);
    fit->add_option("--out", out_dir, "output directory")->required();
    fit->add_option("--seed", seed, "override the config seed");
    fit->add_option("--r", r_override, "override the prior exponent r");
    fit->add_option("--time-divisor", time_divisor, "divide input times by this (3600: seconds to hours)");
    fit->add_flag("--tokenize", tokenize, "read a \"text\" field and build the vocabulary");

    auto* ev = app.add_subcommand("eval", "Score predicted labels against ground truth");
    ev->add_option("--pred", pred_path, "labels.csv from fit")->required()->check(CLI::ExistingFile);
    ev->add_option("--truth", truth_path, "truth.csv from generate")->required()->check(CLI::ExistingFile);
    ev->add_option("--fit-summary", summary_path, "summary.json from fit (enables alpha_mae)")
        ->check(CLI::ExistingFile);
    ev->add_option("--gen-meta", meta_path, "meta.json from generate (enables alpha_mae)")
        ->check(CLI::ExistingFile);
    ev->add_option("--out", out_file, "also write metrics JSON here");

    auto* sw = app.add_subcommand("sweep", "Fit at several r values (PDHP_THREADS parallelizes)");
    sw->add_option("--data", data_path, "documents JSONL")->required()->check(CLI::ExistingFile);
    sw->add_option("--r", r_list, "comma-separated r values")->required();
    sw->add_option("--config", config_path, "engine config JSON")->required()->check(CLI::ExistingFile);
    sw->add_option("--out", out_dir, "output directory")->required();
    sw->add_option("--truth", truth_path, "truth.csv for NMI columns");
    sw->add_option("--seed", seed, "override the config seed");
    sw->add_option("--time-divisor", time_divisor, "divide input times by this");
    sw->add_flag("--tokenize", tokenize, "read a \"text\" field and build the vocabulary");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_generate(spec_path, out_dir, seed, emit_vocab);
        if (fit->parsed()) return cmd_fit(data_path, config_path, out_dir, seed, r_override, time_divisor, tokenize);
        if (ev->parsed()) return cmd_eval(pred_path, truth_path, summary_path, meta_path, out_file);
        if (sw->parsed())
            return cmd_sweep(data_path, r_list, config_path, out_dir, truth_path, seed, time_divisor, tokenize);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
