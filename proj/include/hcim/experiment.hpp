#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <hcim/errors.hpp>
#include <hcim/generators.hpp>
#include <hcim/maximize.hpp>
#include <hcim/network.hpp>
#include <hcim/simulate.hpp>
#include <hcim/spread.hpp>
#include <hcim/version.hpp>

namespace hcim {

namespace detail {

inline void require_keys(const nlohmann::json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError("unknown key `" + key + "` in " + where);
    }
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

/// Experiment description. JSON field names mirror the struct; unknown keys
/// are configuration errors so sweep typos fail fast.
struct ExperimentConfig {
    std::optional<KroneckerSpec> kronecker;
    std::optional<ForestFireSpec> forestfire;
    std::optional<std::string> edge_list;
    Weighting weighting = Weighting::explicit_weights;

    double beta = 0.1;
    std::optional<std::string> beta_file;
    double b = 0.0;
    BackendSpec backend = BackendSpec::auto_select();
    std::vector<std::string> algorithms;
    std::int64_t k = 1;
    std::int64_t mc_runs = 10000;
    std::int64_t mc_horizon = 0; // 0 = ten effective diameters
    std::uint64_t rng_seed = 0;
    std::string output_dir = ".";
    std::vector<std::int64_t> t_sweep; // compare-backends only; empty = 0..diam+5

    static ExperimentConfig from_json(const nlohmann::json& j) {
        detail::require_keys(j, "config",
                             {"network", "beta", "b", "backend", "algorithms", "k", "mc_runs",
                              "mc_horizon", "rng_seed", "output_dir", "t_sweep"});
        ExperimentConfig cfg;
        if (!j.contains("network") || !j["network"].is_object())
            throw ConfigError("config requires a `network` object");
        const auto& net = j["network"];
        detail::require_keys(net, "network", {"generator", "edge_list", "weighting"});
        const bool has_gen = net.contains("generator");
        const bool has_file = net.contains("edge_list");
        if (has_gen == has_file)
            throw ConfigError("network needs exactly one of `generator` and `edge_list`");
        if (has_gen) {
            const auto& g = net["generator"];
            detail::require_keys(g, "network.generator",
                                 {"model", "initiator", "power", "nodes", "p_forward",
                                  "p_backward"});
            const std::string model = g.value("model", "");
            if (model == "kronecker") {
                KroneckerSpec spec;
                if (g.contains("initiator")) {
                    const auto& init = g["initiator"];
                    if (!init.is_array() || init.size() != 2 || init[0].size() != 2 ||
                        init[1].size() != 2)
                        throw ConfigError("kronecker initiator must be a 2x2 matrix");
                    for (int r = 0; r < 2; ++r)
                        for (int c = 0; c < 2; ++c)
                            spec.initiator[r][c] = init[r][c].get<double>();
                }
                if (!g.contains("power")) throw ConfigError("kronecker generator needs `power`");
                spec.power = g["power"].get<int>();
                cfg.kronecker = spec;
            } else if (model == "forestfire") {
                ForestFireSpec spec;
                if (!g.contains("nodes")) throw ConfigError("forestfire generator needs `nodes`");
                spec.n_target = g["nodes"].get<std::int64_t>();
                spec.p_forward = g.value("p_forward", 0.35);
                spec.p_backward = g.value("p_backward", 0.25);
                cfg.forestfire = spec;
            } else {
                throw ConfigError("unknown generator model `" + model + "`");
            }
        } else {
            cfg.edge_list = net["edge_list"].get<std::string>();
            cfg.weighting = weighting_from_string(net.value("weighting", "explicit"));
        }

        if (j.contains("beta")) {
            if (j["beta"].is_object()) {
                detail::require_keys(j["beta"], "beta", {"file"});
                cfg.beta_file = j["beta"]["file"].get<std::string>();
            } else {
                cfg.beta = j["beta"].get<double>();
            }
        }
        cfg.b = j.value("b", 0.0);
        if (j.contains("backend")) cfg.backend = BackendSpec::parse(j["backend"].get<std::string>());
        if (j.contains("algorithms")) {
            for (const auto& a : j["algorithms"]) cfg.algorithms.push_back(a.get<std::string>());
        }
        cfg.k = j.value("k", std::int64_t{1});
        cfg.mc_runs = j.value("mc_runs", std::int64_t{10000});
        cfg.mc_horizon = j.value("mc_horizon", std::int64_t{0});
        cfg.rng_seed = j.value("rng_seed", std::uint64_t{0});
        cfg.output_dir = j.value("output_dir", ".");
        if (j.contains("t_sweep"))
            for (const auto& t : j["t_sweep"]) cfg.t_sweep.push_back(t.get<std::int64_t>());
        cfg.validate();
        return cfg;
    }

    static ExperimentConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        return from_json(j);
    }

    void validate() const {
        if (k < 1) throw ConfigError("k must be >= 1");
        if (edge_list && !std::filesystem::exists(*edge_list))
            throw ConfigError("edge list does not exist: " + *edge_list);
        if (beta_file && !std::filesystem::exists(*beta_file))
            throw ConfigError("beta file does not exist: " + *beta_file);
        static const std::vector<std::string> known = {
            "c2greedy", "greedy", "lazygreedy", "c1greedy", "lazyc1greedy",
            "degree",   "pagerank", "random",   "brute"};
        for (const std::string& a : algorithms)
            if (std::find(known.begin(), known.end(), a) == known.end())
                throw ConfigError("unknown algorithm `" + a + "`");
    }

    Network build_network() const {
        Network net;
        if (kronecker) {
            KroneckerSpec spec = *kronecker;
            spec.rng_seed = rng_seed;
            net = generate_kronecker(spec);
        } else if (forestfire) {
            ForestFireSpec spec = *forestfire;
            spec.rng_seed = rng_seed;
            net = generate_forest_fire(spec);
        } else {
            net = load_edge_list(*edge_list, weighting, rng_seed);
        }
        if (beta_file) {
            std::ifstream in(*beta_file);
            if (!in) throw DataError("cannot open beta file: " + *beta_file);
            std::vector<double> betas(static_cast<std::size_t>(net.n_raw()), beta);
            std::string line;
            long lineno = 0;
            while (std::getline(in, line)) {
                ++lineno;
                if (line.empty() || line[0] == '#') continue;
                std::istringstream ss(line);
                NodeIndex idx;
                double value;
                if (!(ss >> idx >> value)) throw ParseError("expected `index beta`", lineno);
                if (idx < 0 || idx >= net.n_raw())
                    throw ValidationError("beta index out of range at line " +
                                          std::to_string(lineno));
                betas[static_cast<std::size_t>(idx)] = value;
            }
            net.set_beta(std::move(betas));
        } else {
            net.set_beta_uniform(beta);
        }
        return net;
    }
};

struct ResultRow {
    std::string algorithm;
    std::int64_t k = 0;
    double sigma = 0.0;
    double elapsed_ms = 0.0;
    std::int64_t evals = 0;
    double bound_ratio = std::numeric_limits<double>::quiet_NaN();
    int seeds_match_dense = -1; // compare-backends only; -1 = not applicable
};

/// Deterministic result rows plus an environment stamp. Serialized as two
/// CSVs: the main table (identical across reruns of the same config) and a
/// timings sidecar holding the wall-clock column.
struct ResultTable {
    std::vector<ResultRow> rows;
    std::string version = kVersion;
    std::string backend;
    std::uint64_t rng_seed = 0;

    std::string stamp() const {
        return "# hcim " + version + " rng_seed=" + std::to_string(rng_seed) + " backend=" +
               backend;
    }

    std::string main_csv() const {
        std::ostringstream out;
        out << stamp() << "\n";
        out << "algorithm,k,sigma,evals,bound_ratio,seeds_match_dense\n";
        for (const ResultRow& r : rows) {
            out << r.algorithm << ',' << r.k << ',' << detail::format_double(r.sigma) << ','
                << r.evals << ',';
            if (!std::isnan(r.bound_ratio)) out << detail::format_double(r.bound_ratio);
            out << ',';
            if (r.seeds_match_dense >= 0) out << r.seeds_match_dense;
            out << '\n';
        }
        return out.str();
    }

    std::string timings_csv() const {
        std::ostringstream out;
        out << stamp() << "\n";
        out << "algorithm,k,elapsed_ms\n";
        for (const ResultRow& r : rows)
            out << r.algorithm << ',' << r.k << ',' << detail::format_double(r.elapsed_ms)
                << '\n';
        return out.str();
    }

    static ResultTable from_csv(std::istream& main, std::istream* timings = nullptr) {
        ResultTable table;
        std::string line;
        bool header_seen = false;
        while (std::getline(main, line)) {
            if (line.empty()) continue;
            if (line[0] == '#') {
                std::istringstream ss(line);
                std::string hash, name, ver, seed_kv, backend_kv;
                ss >> hash >> name >> ver >> seed_kv >> backend_kv;
                table.version = ver;
                if (seed_kv.rfind("rng_seed=", 0) == 0)
                    table.rng_seed = std::stoull(seed_kv.substr(9));
                if (backend_kv.rfind("backend=", 0) == 0)
                    table.backend = backend_kv.substr(8);
                continue;
            }
            if (!header_seen) {
                header_seen = true;
                continue;
            }
            std::istringstream ss(line);
            std::string field;
            ResultRow row;
            std::getline(ss, row.algorithm, ',');
            std::getline(ss, field, ',');
            row.k = std::stoll(field);
            std::getline(ss, field, ',');
            row.sigma = std::stod(field);
            std::getline(ss, field, ',');
            row.evals = std::stoll(field);
            std::getline(ss, field, ',');
            if (!field.empty()) row.bound_ratio = std::stod(field);
            if (std::getline(ss, field, ',') && !field.empty())
                row.seeds_match_dense = std::stoi(field);
            table.rows.push_back(row);
        }
        if (timings) {
            std::size_t i = 0;
            bool theader = false;
            while (std::getline(*timings, line)) {
                if (line.empty() || line[0] == '#') continue;
                if (!theader) {
                    theader = true;
                    continue;
                }
                std::istringstream ss(line);
                std::string field;
                std::getline(ss, field, ','); // algorithm
                std::getline(ss, field, ','); // k
                std::getline(ss, field, ',');
                if (i < table.rows.size()) table.rows[i].elapsed_ms = std::stod(field);
                ++i;
            }
        }
        return table;
    }
};

/// Writes content to `<dir>/<name>` atomically (temp file + rename), so an
/// interrupted run never leaves a partial CSV behind.
inline void write_file_atomic(const std::string& dir, const std::string& name,
                              const std::string& content) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path final_path = fs::path(dir) / name;
    const fs::path tmp_path = fs::path(dir) / (name + ".tmp");
    {
        std::ofstream out(tmp_path, std::ios::binary);
        if (!out) throw DataError("cannot write " + tmp_path.string());
        out << content;
        out.flush();
        if (!out) throw DataError("short write to " + tmp_path.string());
    }
    fs::rename(tmp_path, final_path);
}

inline void write_result_table(const ResultTable& table, const std::string& dir,
                               const std::string& name) {
    write_file_atomic(dir, name + ".csv", table.main_csv());
    write_file_atomic(dir, name + "_timings.csv", table.timings_csv());
}

namespace detail {

struct NamedStage {
    const char* name;
    template <class F>
    auto run(F&& f) -> decltype(f()) {
        try {
            return f();
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw DataError(std::string(name) + ": " + e.what());
        }
    }
};

/// Seed selections of one algorithm as an ordered list with per-step timing
/// and evaluation counts.
struct SelectorOutput {
    std::vector<NodeIndex> order;       // empty slots for set-based k-runs
    std::vector<double> elapsed_ms;     // per k
    std::vector<std::int64_t> evals;    // per k
    std::vector<SeedSet> sets;          // per k (k-prefix or per-k set)
    GreedyTrace trace;                  // populated by trace-based selectors
    bool trace_based = false;
};

inline SelectorOutput run_selector(const AugmentedNetwork& aug, const std::string& algo,
                                   const ExperimentConfig& cfg, const BackendSpec& backend) {
    SelectorOutput out;
    const auto K = cfg.k;

    auto from_trace = [&](GreedyTrace trace) {
        out.trace = std::move(trace);
        out.trace_based = true;
        for (std::size_t k = 1; k <= out.trace.steps.size(); ++k) {
            const auto& st = out.trace.steps[k - 1];
            out.order.push_back(st.seed);
            out.elapsed_ms.push_back(st.elapsed_ms);
            out.evals.push_back(st.evals);
            out.sets.push_back(out.trace.seed_prefix(k));
        }
    };

    McGreedyOptions opts;
    opts.runs = cfg.mc_runs;
    opts.horizon = cfg.mc_horizon;
    opts.rng_seed = cfg.rng_seed;

    if (algo == "c2greedy") {
        from_trace(c2greedy(aug, K, backend));
    } else if (algo == "greedy") {
        from_trace(mc_greedy(aug, K, McVariant::plain, opts));
    } else if (algo == "lazygreedy") {
        from_trace(mc_greedy(aug, K, McVariant::lazy, opts));
    } else if (algo == "c1greedy") {
        from_trace(mc_greedy(aug, K, McVariant::c1, opts));
    } else if (algo == "lazyc1greedy") {
        from_trace(mc_greedy(aug, K, McVariant::lazy_c1, opts));
    } else if (algo == "degree" || algo == "pagerank" || algo == "random") {
        const BaselineMethod method = algo == "degree"     ? BaselineMethod::degree
                                      : algo == "pagerank" ? BaselineMethod::pagerank
                                                           : BaselineMethod::random;
        const double t0 = now_ms();
        const std::vector<NodeIndex> ranking = baseline_ranking(aug, K, method, cfg.rng_seed);
        const double elapsed = now_ms() - t0;
        std::vector<NodeIndex> prefix;
        for (std::int64_t k = 1; k <= K; ++k) {
            prefix.push_back(ranking[static_cast<std::size_t>(k - 1)]);
            out.order.push_back(prefix.back());
            out.elapsed_ms.push_back(elapsed); // selection cost is shared by every prefix
            out.evals.push_back(0);
            out.sets.push_back(SeedSet(prefix));
        }
    } else if (algo == "brute") {
        for (std::int64_t k = 1; k <= K; ++k) {
            const double t0 = now_ms();
            auto [set, sigma] = brute_force(aug, k);
            out.elapsed_ms.push_back(now_ms() - t0);
            double combos = 1.0;
            for (std::int64_t i = 0; i < k; ++i)
                combos *= static_cast<double>(aug.n_raw() - i) / static_cast<double>(i + 1);
            out.evals.push_back(static_cast<std::int64_t>(combos));
            out.order.push_back(-1);
            out.sets.push_back(set);
        }
    } else {
        throw ConfigError("unknown algorithm `" + algo + "`");
    }
    return out;
}

} // namespace detail

/// Builds the configured network, runs every configured algorithm for
/// k = 1..K, and evaluates every produced seed set with the closed-form
/// spread (the single source of sigma; no algorithm self-reports).
inline ResultTable run_experiment_core(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.algorithms.empty()) throw ConfigError("no algorithms configured");

    const Network net = detail::NamedStage{"build network"}.run([&] { return cfg.build_network(); });
    const AugmentedNetwork aug =
        detail::NamedStage{"augment with bias"}.run([&] { return augment_with_bias(net, cfg.b); });
    if (cfg.k > aug.n_raw()) throw ConfigError("k exceeds the network size");
    const BackendSpec backend =
        detail::NamedStage{"resolve backend"}.run([&] { return resolve_backend(cfg.backend, aug); });

    ResultTable table;
    table.backend = backend.to_string();
    table.rng_seed = cfg.rng_seed;

    for (const std::string& algo : cfg.algorithms) {
        detail::NamedStage stage{algo.c_str()};
        const detail::SelectorOutput sel =
            stage.run([&] { return detail::run_selector(aug, algo, cfg, backend); });
        for (std::size_t i = 0; i < sel.sets.size(); ++i) {
            ResultRow row;
            row.algorithm = algo;
            row.k = static_cast<std::int64_t>(i) + 1;
            row.sigma = stage.run([&] { return influence_spread(aug, sel.sets[i], backend); });
            row.elapsed_ms = sel.elapsed_ms[i];
            row.evals = sel.evals[i];
            if (sel.trace_based && i + 1 == sel.sets.size() &&
                backend.kind == BackendSpec::Kind::dense) {
                row.bound_ratio = online_bound(aug, sel.trace).ratio;
            }
            table.rows.push_back(row);
        }
    }

    if (!net.labels().empty())
        detail::NamedStage{"write labels"}.run([&] {
            std::ostringstream out;
            for (NodeIndex i = 0; i < net.n_raw(); ++i) out << i << '\t' << net.label(i) << '\n';
            write_file_atomic(cfg.output_dir, "labels.tsv", out.str());
            return 0;
        });
    return table;
}

inline ResultTable run_experiment(const ExperimentConfig& cfg) {
    ResultTable table = run_experiment_core(cfg);
    write_result_table(table, cfg.output_dir, "results");
    return table;
}

/// Runs c2greedy densely and under a sweep of Neumann truncations, recording
/// for every (T, k) the dense-evaluated sigma of the truncated run's prefix
/// and whether it matches the dense run's prefix exactly.
inline ResultTable compare_backends(const ExperimentConfig& cfg) {
    cfg.validate();
    const Network net = cfg.build_network();
    const AugmentedNetwork aug = augment_with_bias(net, cfg.b);
    if (aug.n_raw() > kDenseInteriorThreshold)
        throw CapacityError("compare-backends needs the dense backend as reference; network too large");
    if (cfg.k > aug.n_raw()) throw ConfigError("k exceeds the network size");

    ResultTable table;
    table.backend = "dense+sweep";
    table.rng_seed = cfg.rng_seed;

    const GreedyTrace dense = c2greedy(aug, cfg.k, BackendSpec::dense());

    std::map<std::vector<NodeIndex>, double> sigma_memo;
    auto eval_sigma = [&](const SeedSet& set) {
        const auto key = set.members();
        auto it = sigma_memo.find(key);
        if (it != sigma_memo.end()) return it->second;
        const double sigma = influence_spread(aug, set, BackendSpec::dense());
        sigma_memo.emplace(key, sigma);
        return sigma;
    };

    for (std::size_t k = 1; k <= dense.steps.size(); ++k) {
        ResultRow row;
        row.algorithm = "c2greedy@dense";
        row.k = static_cast<std::int64_t>(k);
        row.sigma = eval_sigma(dense.seed_prefix(k));
        row.elapsed_ms = dense.steps[k - 1].elapsed_ms;
        row.seeds_match_dense = 1;
        table.rows.push_back(row);
    }

    std::vector<std::int64_t> sweep = cfg.t_sweep;
    if (sweep.empty()) {
        const std::int64_t diameter = effective_diameter_of(aug);
        for (std::int64_t t = 0; t <= diameter + 5; ++t) sweep.push_back(t);
    }

    for (const std::int64_t T : sweep) {
        const GreedyTrace approx = c2greedy(aug, cfg.k, BackendSpec::neumann(T));
        for (std::size_t k = 1; k <= approx.steps.size(); ++k) {
            ResultRow row;
            row.algorithm = "c2greedy@neumann:" + std::to_string(T);
            row.k = static_cast<std::int64_t>(k);
            row.sigma = eval_sigma(approx.seed_prefix(k));
            row.elapsed_ms = approx.steps[k - 1].elapsed_ms;
            row.seeds_match_dense =
                approx.seed_prefix(k).members() == dense.seed_prefix(k).members() ? 1 : 0;
            table.rows.push_back(row);
        }
    }

    write_result_table(table, cfg.output_dir, "backends");
    return table;
}

/// Wall-clock and evaluation-count comparison across selector variants;
/// requires c2greedy plus at least one per-candidate-evaluation variant so
/// the comparison is meaningful.
inline ResultTable timing_harness(const ExperimentConfig& cfg) {
    cfg.validate();
    bool has_c2 = false, has_mc = false;
    for (const std::string& a : cfg.algorithms) {
        has_c2 = has_c2 || a == "c2greedy";
        has_mc = has_mc || a == "greedy" || a == "lazygreedy" || a == "c1greedy" ||
                 a == "lazyc1greedy";
    }
    if (!has_c2 || !has_mc)
        throw ConfigError("timing needs c2greedy and at least one greedy/c1 variant");

    ExperimentConfig inner = cfg;
    ResultTable table = run_experiment(inner);
    write_result_table(table, cfg.output_dir, "timing");
    return table;
}

} // namespace hcim
