// Monte Carlo sweep harness: seeded frame simulation over an Eb/N0 grid with
// BER/BLER accounting, error-pattern statistics and CSV report emission.
//
// Determinism: frame f of SNR point p draws all of its randomness from an
// engine seeded by derive_seed(master, p, f), and frames are committed in
// fixed batches, so the simulated frame set and every reported number are
// independent of the worker count. The draw order inside a frame is: data
// bits (user-major, MSB first), channel gains (user-major, chip-major),
// then noise (chip-major, re before im).
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cpiscma/analysis.hpp"
#include "cpiscma/channel.hpp"
#include "cpiscma/codebook.hpp"
#include "cpiscma/index_map.hpp"
#include "cpiscma/mpad.hpp"
#include "cpiscma/rng.hpp"
#include "cpiscma/transmitter.hpp"
#include "cpiscma/types.hpp"

namespace cpiscma {

enum class SystemKind { CpiScma, CScma };

struct StopRule {
    std::uint64_t max_frames = 1000000;
    std::uint64_t min_bit_errors = 400;
};

struct SimConfig {
    SystemKind system = SystemKind::CpiScma;
    std::string codebook_path;
    int J = 0, K = 0, M = 0;  // cross-checked against the codebook file
    int n = 1, t = 1;
    std::optional<std::string> lut_path;
    int mpa_iterations = 6;
    NormalizationMode normalization = NormalizationMode::BlockEnergy;
    FadingMode fading = FadingMode::PerChip;
    SymbolLabeling labeling = SymbolLabeling::NaturalBinary;
    bool zero_prior_weighted = false;
    std::uint64_t pml_cap = 100000;
    std::vector<double> snr_db;
    StopRule stop;
    std::uint64_t seed = 1;
    bool noiseless = false;  // test hook: z = 0, detector floored at n0_floor
};

struct SweepPoint {
    double snr_db = 0.0;
    std::uint64_t frames = 0;
    std::uint64_t bits = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t index_bit_errors = 0;
    std::uint64_t symbol_bit_errors = 0;
    std::uint64_t user_blocks = 0;
    std::uint64_t block_errors = 0;
    std::vector<std::uint64_t> case_counts;  // gamma = 0..n
    std::uint64_t reliable_blocks = 0;
    std::uint64_t psi_size_sum = 0;
    std::uint64_t fallback_frames = 0;
    double seconds = 0.0;

    double ber() const { return bits ? static_cast<double>(bit_errors) / bits : 0.0; }
    double bler() const {
        return user_blocks ? static_cast<double>(block_errors) / user_blocks : 0.0;
    }
    double delta(int gamma) const {
        return user_blocks ? static_cast<double>(case_counts[gamma]) / user_blocks : 0.0;
    }
    double reliable_ratio() const {
        return user_blocks ? static_cast<double>(reliable_blocks) / user_blocks : 0.0;
    }
    double extra_complexity() const {
        return user_blocks ? static_cast<double>(psi_size_sum) / user_blocks : 0.0;
    }
};

struct SweepReport {
    SimConfig config;
    int n = 0;  // slots per block (delta column count is n+1)
    std::vector<SweepPoint> points;
};

namespace detail {

inline void check(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

template <typename T>
inline T get_field(const nlohmann::json& doc, const char* key, T fallback) {
    if (!doc.contains(key)) return fallback;
    return doc.at(key).get<T>();
}

}  // namespace detail

inline SimConfig parse_sim_config(const std::string& text, const std::string& origin) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    static const char* known[] = {"system", "codebook", "J", "K", "M", "n", "t",
                                  "lut_override", "mpa_iterations", "normalization", "fading",
                                  "symbol_labeling", "zero_prior_weighted", "pml_cap", "snr_db",
                                  "max_frames", "min_bit_errors", "seed", "noiseless"};
    for (const auto& [key, _] : doc.items())
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return key == k; }) == std::end(known))
            throw ParseError(origin + ": unknown field \"" + key + "\"");

    SimConfig cfg;
    try {
        const std::string system = doc.at("system").get<std::string>();
        if (system == "cpi-scma")
            cfg.system = SystemKind::CpiScma;
        else if (system == "c-scma")
            cfg.system = SystemKind::CScma;
        else
            throw ParseError(origin + ": system must be \"cpi-scma\" or \"c-scma\"");
        cfg.codebook_path = doc.at("codebook").get<std::string>();
        cfg.J = doc.at("J").get<int>();
        cfg.K = doc.at("K").get<int>();
        cfg.M = doc.at("M").get<int>();
        cfg.n = doc.at("n").get<int>();
        cfg.t = doc.at("t").get<int>();
        if (doc.contains("lut_override") && !doc.at("lut_override").is_null())
            cfg.lut_path = doc.at("lut_override").get<std::string>();
        cfg.mpa_iterations = detail::get_field(doc, "mpa_iterations", 6);
        const std::string norm = detail::get_field<std::string>(doc, "normalization", "block-energy");
        if (norm == "block-energy")
            cfg.normalization = NormalizationMode::BlockEnergy;
        else if (norm == "none")
            cfg.normalization = NormalizationMode::None;
        else
            throw ParseError(origin + ": normalization must be \"block-energy\" or \"none\"");
        const std::string fading = detail::get_field<std::string>(doc, "fading", "per-chip");
        if (fading == "per-chip")
            cfg.fading = FadingMode::PerChip;
        else if (fading == "per-slot")
            cfg.fading = FadingMode::PerSlot;
        else if (fading == "identity")
            cfg.fading = FadingMode::Identity;
        else
            throw ParseError(origin + ": fading must be \"per-chip\", \"per-slot\" or \"identity\"");
        const std::string lab = detail::get_field<std::string>(doc, "symbol_labeling", "natural");
        if (lab == "natural")
            cfg.labeling = SymbolLabeling::NaturalBinary;
        else if (lab == "gray")
            cfg.labeling = SymbolLabeling::Gray;
        else
            throw ParseError(origin + ": symbol_labeling must be \"natural\" or \"gray\"");
        cfg.zero_prior_weighted = detail::get_field(doc, "zero_prior_weighted", false);
        cfg.pml_cap = detail::get_field<std::uint64_t>(doc, "pml_cap", 100000);
        cfg.snr_db = detail::get_field<std::vector<double>>(doc, "snr_db", {});
        cfg.stop.max_frames = detail::get_field<std::uint64_t>(doc, "max_frames", 1000000);
        cfg.stop.min_bit_errors = detail::get_field<std::uint64_t>(doc, "min_bit_errors", 400);
        cfg.seed = detail::get_field<std::uint64_t>(doc, "seed", 1);
        cfg.noiseless = detail::get_field(doc, "noiseless", false);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
    return cfg;
}

inline SimConfig load_sim_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    SimConfig cfg = parse_sim_config(ss.str(), path);
    // codebook / LUT paths are resolved relative to the config file
    const auto slash = path.find_last_of('/');
    if (slash != std::string::npos) {
        const std::string dir = path.substr(0, slash + 1);
        if (!cfg.codebook_path.empty() && cfg.codebook_path.front() != '/')
            cfg.codebook_path = dir + cfg.codebook_path;
        if (cfg.lut_path && !cfg.lut_path->empty() && cfg.lut_path->front() != '/')
            cfg.lut_path = dir + *cfg.lut_path;
    }
    return cfg;
}

// Loaded, validated, ready-to-run sweep context shared by all workers.
struct SweepContext {
    SimConfig config;
    Codebook cb;
    FactorGraph fg;
    IndexLut lut;
    double scale = 1.0;
    int bits_per_user = 0;
    DetectParams det;
};

inline SweepContext make_sweep_context(const SimConfig& config) {
    SweepContext ctx;
    ctx.config = config;
    detail::check(!config.snr_db.empty(), "config: snr grid must not be empty");
    detail::check(std::is_sorted(config.snr_db.begin(), config.snr_db.end()) &&
                      std::adjacent_find(config.snr_db.begin(), config.snr_db.end()) ==
                          config.snr_db.end(),
                  "config: snr grid must be strictly increasing");
    detail::check(config.mpa_iterations >= 1, "config: mpa_iterations must be >= 1");
    detail::check(config.stop.max_frames >= 1, "config: max_frames must be >= 1");
    if (config.system == SystemKind::CScma)
        detail::check(config.n == 1 && config.t == 1,
                      "config: the c-scma baseline uses the degenerate n=1, t=1 block");

    ctx.cb = load_codebook(config.codebook_path);
    detail::check(ctx.cb.num_users == config.J && ctx.cb.num_resources == config.K &&
                      ctx.cb.num_symbols == config.M,
                  "config: declared J/K/M do not match the codebook file");
    ctx.fg = build_factor_graph(ctx.cb);
    ctx.lut = config.lut_path ? load_lut_file(*config.lut_path, config.n, config.t)
                              : build_lut(config.n, config.t);
    ctx.scale = normalize_policy(config.normalization, config.n, config.t);
    ctx.bits_per_user = ctx.lut.m1 + ctx.lut.t * bits_per_symbol(ctx.cb);

    ctx.det.scale = ctx.scale;
    ctx.det.pml_cap = config.pml_cap;
    ctx.det.labeling = config.labeling;
    ctx.det.mpa.iterations = config.mpa_iterations;
    ctx.det.mpa.augment_zero = config.system == SystemKind::CpiScma;
    if (config.zero_prior_weighted && ctx.det.mpa.augment_zero) {
        std::vector<double> prior(ctx.cb.num_symbols + 1);
        prior[0] = static_cast<double>(config.n - config.t) / config.n;
        for (int m = 1; m <= ctx.cb.num_symbols; ++m)
            prior[m] = static_cast<double>(config.t) / config.n / ctx.cb.num_symbols;
        ctx.det.mpa.prior = std::move(prior);
    }
    return ctx;
}

struct FrameTally {
    std::uint64_t bit_errors = 0;
    std::uint64_t index_bit_errors = 0;
    std::uint64_t symbol_bit_errors = 0;
    std::uint64_t block_errors = 0;
    std::vector<std::uint64_t> case_counts;
    std::uint64_t reliable_blocks = 0;
    std::uint64_t psi_size_sum = 0;
    bool fallback = false;
};

inline FrameTally simulate_frame(const SweepContext& ctx, std::uint64_t snr_index,
                                 std::uint64_t frame_index, double noise_var) {
    Engine rng = make_frame_engine(ctx.config.seed, snr_index, frame_index);
    const int J = ctx.cb.num_users;

    std::uniform_int_distribution<int> bit(0, 1);
    std::vector<Bits> tx_bits(J, Bits(ctx.bits_per_user));
    for (int j = 0; j < J; ++j)
        for (int b = 0; b < ctx.bits_per_user; ++b) tx_bits[j][b] = static_cast<std::uint8_t>(bit(rng));

    std::vector<UserBlock> blocks(J);
    for (int j = 0; j < J; ++j)
        blocks[j] = encode_block(tx_bits[j], ctx.lut, ctx.cb, j, ctx.scale, ctx.config.labeling);

    const ChannelState ch = draw_channel(rng, J, ctx.config.n, ctx.cb.num_resources,
                                         ctx.config.fading);
    ReceivedFrame frame = superimpose(blocks, ctx.cb, ch,
                                      ctx.config.noiseless ? 0.0 : noise_var, rng);
    const FrameDecision decision = detect_frame(frame, ctx.cb, ctx.fg, ctx.lut, ctx.det);

    FrameTally tally;
    tally.case_counts.assign(ctx.config.n + 1, 0);
    for (int j = 0; j < J; ++j) {
        std::uint64_t errs = 0;
        for (int b = 0; b < ctx.bits_per_user; ++b) {
            if (decision.bits[j][b] != tx_bits[j][b]) {
                ++errs;
                if (b < ctx.lut.m1)
                    ++tally.index_bit_errors;
                else
                    ++tally.symbol_bit_errors;
            }
        }
        tally.bit_errors += errs;
        if (errs) ++tally.block_errors;
        if (decision.diag.users[j].reliable)
            ++tally.reliable_blocks;
        else {
            ++tally.case_counts[decision.diag.users[j].gamma];
            tally.psi_size_sum += decision.diag.users[j].candidate_count;
        }
    }
    tally.fallback = decision.diag.pml_fallback;
    return tally;
}

// Frames are processed in fixed batches; the stop rule is evaluated on batch
// boundaries so the frame count never depends on thread scheduling.
inline SweepReport run_sweep(const SimConfig& config, unsigned workers = 1) {
    const SweepContext ctx = make_sweep_context(config);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());

    SweepReport report;
    report.config = config;
    report.n = config.n;
    const double block_energy = ctx.scale * ctx.scale * config.t;

    constexpr std::uint64_t kBatch = 1024;
    for (std::size_t p = 0; p < config.snr_db.size(); ++p) {
        const double n0 = noise_variance(config.snr_db[p], ctx.bits_per_user, block_energy);
        SweepPoint point;
        point.snr_db = config.snr_db[p];
        point.case_counts.assign(config.n + 1, 0);
        const auto t0 = std::chrono::steady_clock::now();

        std::uint64_t done = 0;
        while (done < config.stop.max_frames) {
            const std::uint64_t end = std::min(done + kBatch, config.stop.max_frames);
            std::vector<FrameTally> partial(workers);
            for (auto& t : partial) t.case_counts.assign(config.n + 1, 0);
            std::vector<std::uint64_t> fallback_counts(workers, 0);
            auto work_full = [&](unsigned w) {
                FrameTally& acc = partial[w];
                for (std::uint64_t f = done + w; f < end; f += workers) {
                    const FrameTally t = simulate_frame(ctx, p, f, n0);
                    acc.bit_errors += t.bit_errors;
                    acc.index_bit_errors += t.index_bit_errors;
                    acc.symbol_bit_errors += t.symbol_bit_errors;
                    acc.block_errors += t.block_errors;
                    acc.reliable_blocks += t.reliable_blocks;
                    acc.psi_size_sum += t.psi_size_sum;
                    for (int g = 0; g <= config.n; ++g) acc.case_counts[g] += t.case_counts[g];
                    if (t.fallback) ++fallback_counts[w];
                }
            };
            if (workers == 1) {
                work_full(0);
            } else {
                std::vector<std::thread> pool;
                for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work_full, w);
                for (auto& th : pool) th.join();
            }
            for (unsigned w = 0; w < workers; ++w) {
                point.bit_errors += partial[w].bit_errors;
                point.index_bit_errors += partial[w].index_bit_errors;
                point.symbol_bit_errors += partial[w].symbol_bit_errors;
                point.block_errors += partial[w].block_errors;
                point.reliable_blocks += partial[w].reliable_blocks;
                point.psi_size_sum += partial[w].psi_size_sum;
                point.fallback_frames += fallback_counts[w];
                for (int g = 0; g <= config.n; ++g) point.case_counts[g] += partial[w].case_counts[g];
            }
            done = end;
            if (point.bit_errors >= config.stop.min_bit_errors) break;
        }
        point.frames = done;
        point.user_blocks = done * ctx.cb.num_users;
        point.bits = done * ctx.cb.num_users * ctx.bits_per_user;
        point.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.points.push_back(std::move(point));
    }
    return report;
}

inline std::string format_report_csv(const SweepReport& report, bool include_timing = true) {
    std::string out = "snr_db,frames,bits,bit_errors,ber,bler";
    for (int g = 0; g <= report.n; ++g) out += ",delta_case" + std::to_string(g);
    out += ",reliable_ratio,extra_complexity,seconds\n";
    char buf[64];
    for (const auto& pt : report.points) {
        std::snprintf(buf, sizeof buf, "%g", pt.snr_db);
        out += buf;
        std::snprintf(buf, sizeof buf, ",%llu,%llu,%llu",
                      static_cast<unsigned long long>(pt.frames),
                      static_cast<unsigned long long>(pt.bits),
                      static_cast<unsigned long long>(pt.bit_errors));
        out += buf;
        std::snprintf(buf, sizeof buf, ",%.9e,%.9e", pt.ber(), pt.bler());
        out += buf;
        for (int g = 0; g <= report.n; ++g) {
            std::snprintf(buf, sizeof buf, ",%.9e", pt.delta(g));
            out += buf;
        }
        std::snprintf(buf, sizeof buf, ",%.9e,%.9e,%.3f", pt.reliable_ratio(),
                      pt.extra_complexity(), include_timing ? pt.seconds : 0.0);
        out += buf;
        out += '\n';
    }
    return out;
}

inline nlohmann::json config_to_json(const SimConfig& cfg) {
    nlohmann::json j{
        {"system", cfg.system == SystemKind::CpiScma ? "cpi-scma" : "c-scma"},
        {"codebook", cfg.codebook_path},
        {"J", cfg.J},
        {"K", cfg.K},
        {"M", cfg.M},
        {"n", cfg.n},
        {"t", cfg.t},
        {"mpa_iterations", cfg.mpa_iterations},
        {"normalization", cfg.normalization == NormalizationMode::BlockEnergy ? "block-energy" : "none"},
        {"fading", cfg.fading == FadingMode::PerChip     ? "per-chip"
                   : cfg.fading == FadingMode::PerSlot   ? "per-slot"
                                                         : "identity"},
        {"symbol_labeling", cfg.labeling == SymbolLabeling::NaturalBinary ? "natural" : "gray"},
        {"zero_prior_weighted", cfg.zero_prior_weighted},
        {"pml_cap", cfg.pml_cap},
        {"snr_db", cfg.snr_db},
        {"max_frames", cfg.stop.max_frames},
        {"min_bit_errors", cfg.stop.min_bit_errors},
        {"seed", cfg.seed},
        {"noiseless", cfg.noiseless},
    };
    if (cfg.lut_path) j["lut_override"] = *cfg.lut_path;
    return j;
}

// Writes the CSV plus a <path>.meta.json sidecar with the resolved config,
// seed, and raw counters (index/symbol error split, fallback frames).
inline void emit_report(const SweepReport& report, const std::string& path,
                        bool include_timing = true) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open report for writing");
    out << format_report_csv(report, include_timing);

    nlohmann::json meta{{"schema", "cpiscma-report-v1"},
                        {"seed", report.config.seed},
                        {"config", config_to_json(report.config)}};
    nlohmann::json points = nlohmann::json::array();
    for (const auto& pt : report.points)
        points.push_back({{"snr_db", pt.snr_db},
                          {"frames", pt.frames},
                          {"user_blocks", pt.user_blocks},
                          {"index_bit_errors", pt.index_bit_errors},
                          {"symbol_bit_errors", pt.symbol_bit_errors},
                          {"block_errors", pt.block_errors},
                          {"fallback_frames", pt.fallback_frames}});
    meta["points"] = points;
    std::ofstream mo(path + ".meta.json");
    if (!mo) throw ParseError(path + ".meta.json: cannot open sidecar for writing");
    mo << meta.dump(1) << '\n';
}

struct ReportRow {
    double snr_db = 0.0;
    std::uint64_t frames = 0, bits = 0, bit_errors = 0;
    double ber = 0.0, bler = 0.0;
    std::vector<double> delta;
    double reliable_ratio = 0.0, extra_complexity = 0.0, seconds = 0.0;
};

inline std::vector<ReportRow> parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("report: empty file");
    std::vector<std::string> cols;
    {
        std::stringstream h(line);
        std::string c;
        while (std::getline(h, c, ',')) cols.push_back(c);
    }
    if (cols.size() < 9 || cols[0] != "snr_db" || cols.back() != "seconds")
        throw ParseError("report: unexpected header");
    const std::size_t deltas = cols.size() - 9;
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string tok;
        std::vector<double> vals;
        while (std::getline(ls, tok, ',')) vals.push_back(std::stod(tok));
        if (vals.size() != cols.size()) throw ParseError("report: ragged row");
        ReportRow r;
        std::size_t i = 0;
        r.snr_db = vals[i++];
        r.frames = static_cast<std::uint64_t>(vals[i++]);
        r.bits = static_cast<std::uint64_t>(vals[i++]);
        r.bit_errors = static_cast<std::uint64_t>(vals[i++]);
        r.ber = vals[i++];
        r.bler = vals[i++];
        for (std::size_t d = 0; d < deltas; ++d) r.delta.push_back(vals[i++]);
        r.reliable_ratio = vals[i++];
        r.extra_complexity = vals[i++];
        r.seconds = vals[i++];
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<ReportRow> load_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open report");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_report_csv(ss.str());
}

}  // namespace cpiscma
