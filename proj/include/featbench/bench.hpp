#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "featbench/distort.hpp"
#include "featbench/image.hpp"
#include "featbench/matcher.hpp"
#include "featbench/orb.hpp"
#include "featbench/sift.hpp"
#include "featbench/surf.hpp"

namespace featbench {

enum class Algo { sift, surf, orb };

inline std::string algo_name(Algo a) {
    switch (a) {
        case Algo::sift: return "sift";
        case Algo::surf: return "surf";
        case Algo::orb: return "orb";
    }
    throw std::logic_error("algo_name: unknown algorithm");
}

inline Algo parse_algo(const std::string& s) {
    if (s == "sift") return Algo::sift;
    if (s == "surf") return Algo::surf;
    if (s == "orb") return Algo::orb;
    throw std::invalid_argument("unknown algorithm: " + s);
}

/// One table row: scenario x algorithm.
struct ScenarioResult {
    Scenario scenario;
    Algo algo = Algo::sift;
    double time_ms = 0.0;
    int kpnts1 = 0;
    int kpnts2 = 0;
    int matches = 0;
    double match_rate_pct = 0.0;
};

struct SuiteConfig {
    std::uint64_t seed = 42;
    int repetitions = 5;  // timing repetitions, median reported

    double intensity_gain = 1.0;
    double intensity_bias = 30.0;
    double rotation_angle = 45.0;
    double scale_factor = 2.0;
    double shear_kx = 0.5;
    double fisheye_k = 0.5;
    double noise_density = 0.30;

    sift::SiftConfig sift_cfg;
    surf::SurfConfig surf_cfg;
    orb::OrbConfig orb_cfg;
    MatchConfig match_cfg;
};

struct DetectResult {
    std::vector<Keypoint> keypoints;
    std::vector<Descriptor> descriptors;
};

inline DetectResult detect_and_describe(const GrayImage& img, Algo algo, const SuiteConfig& cfg) {
    switch (algo) {
        case Algo::sift: {
            auto [k, d] = sift::sift_detect(img, cfg.sift_cfg);
            return {std::move(k), std::move(d)};
        }
        case Algo::surf: {
            auto [k, d] = surf::surf_run(img, cfg.surf_cfg);
            return {std::move(k), std::move(d)};
        }
        case Algo::orb: {
            auto [k, d] = orb::orb_detect(img, cfg.orb_cfg);
            return {std::move(k), std::move(d)};
        }
    }
    throw std::logic_error("detect_and_describe: unknown algorithm");
}

inline std::vector<MatchPair> match_results(const DetectResult& a, const DetectResult& b,
                                            Algo algo, const MatchConfig& mcfg) {
    if (algo == Algo::orb) return match_binary(a.descriptors, b.descriptors, mcfg);
    if (algo == Algo::surf) {
        std::vector<int> sa, sb;
        sa.reserve(a.keypoints.size());
        sb.reserve(b.keypoints.size());
        for (const auto& k : a.keypoints) sa.push_back(k.laplacian_sign);
        for (const auto& k : b.keypoints) sb.push_back(k.laplacian_sign);
        return match_real(a.descriptors, b.descriptors, mcfg, &sa, &sb);
    }
    return match_real(a.descriptors, b.descriptors, mcfg);
}

/// Runs one scenario/algorithm cell. The timed unit is detect+describe on
/// both images plus matching; image synthesis is outside it. The reported
/// time is the median over cfg.repetitions runs.
inline ScenarioResult run_cell(const GrayImage& img, const Scenario& scenario, Algo algo,
                               const SuiteConfig& cfg) {
    const GrayImage img2 = apply_scenario(img, scenario);
    const int reps = std::max(1, cfg.repetitions);
    std::vector<double> times;
    times.reserve(static_cast<size_t>(reps));
    DetectResult r1, r2;
    std::vector<MatchPair> matches;
    for (int rep = 0; rep < reps; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        r1 = detect_and_describe(img, algo, cfg);
        r2 = detect_and_describe(img2, algo, cfg);
        matches = match_results(r1, r2, algo, cfg.match_cfg);
        const auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());

    ScenarioResult res;
    res.scenario = scenario;
    res.algo = algo;
    res.time_ms = times[times.size() / 2];
    res.kpnts1 = static_cast<int>(r1.keypoints.size());
    res.kpnts2 = static_cast<int>(r2.keypoints.size());
    res.matches = static_cast<int>(matches.size());
    res.match_rate_pct = (res.kpnts1 + res.kpnts2) > 0
                             ? match_rate(res.kpnts1, res.kpnts2, res.matches)
                             : 0.0;
    return res;
}

inline std::vector<Scenario> suite_scenarios(const SuiteConfig& cfg) {
    return {Scenario::intensity(cfg.intensity_gain, cfg.intensity_bias),
            Scenario::rotation(cfg.rotation_angle),
            Scenario::scaling(cfg.scale_factor),
            Scenario::shearing(cfg.shear_kx),
            Scenario::fisheye(cfg.fisheye_k),
            Scenario::noise(cfg.noise_density, cfg.seed),
            Scenario::identity()};
}

struct SuiteRun {
    std::vector<ScenarioResult> rows;     // fixed order: scenario major, algo minor
    std::vector<std::string> cell_errors; // "scenario/algo: message"
};

/// The full experiment: 7 scenarios x 3 algorithms. Failed cells are
/// collected and the rest of the suite still runs.
inline SuiteRun run_suite(const GrayImage& img, const SuiteConfig& cfg) {
    SuiteRun run;
    for (const Scenario& sc : suite_scenarios(cfg)) {
        for (Algo algo : {Algo::sift, Algo::surf, Algo::orb}) {
            try {
                run.rows.push_back(run_cell(img, sc, algo, cfg));
            } catch (const std::exception& e) {
                run.cell_errors.push_back(format_scenario(sc) + "/" + algo_name(algo) + ": " +
                                          e.what());
            }
        }
    }
    return run;
}

struct SweepCell {
    double angle_deg = 0.0;
    Algo algo = Algo::sift;
    int kpnts1 = 0;
    int kpnts2 = 0;
    int matches = 0;
    double match_rate_pct = 0.0;
};

/// Match rate per (rotation angle, algorithm); the reference image is
/// detected once per algorithm. No timing.
inline std::vector<SweepCell> rotation_sweep(const GrayImage& img,
                                             const std::vector<double>& angles,
                                             const SuiteConfig& cfg) {
    if (angles.empty()) throw std::invalid_argument("rotation_sweep: no angles");
    std::vector<SweepCell> out;
    for (Algo algo : {Algo::sift, Algo::surf, Algo::orb}) {
        const DetectResult r1 = detect_and_describe(img, algo, cfg);
        for (double a : angles) {
            const GrayImage img2 = rotate(img, a);
            const DetectResult r2 = detect_and_describe(img2, algo, cfg);
            const auto matches = match_results(r1, r2, algo, cfg.match_cfg);
            SweepCell cell;
            cell.angle_deg = a;
            cell.algo = algo;
            cell.kpnts1 = static_cast<int>(r1.keypoints.size());
            cell.kpnts2 = static_cast<int>(r2.keypoints.size());
            cell.matches = static_cast<int>(matches.size());
            cell.match_rate_pct =
                (cell.kpnts1 + cell.kpnts2) > 0
                    ? match_rate(cell.kpnts1, cell.kpnts2, cell.matches)
                    : 0.0;
            out.push_back(cell);
        }
    }
    return out;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find(',') == std::string::npos && s.find('"') == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    quoted += "\"";
    return quoted;
}

inline std::string suite_metadata(const SuiteConfig& cfg) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "# featbench seed=%llu reps=%d gain=%g bias=%g angle=%g factor=%g kx=%g "
                  "fisheye_k=%g density=%g ratio=%g cross_check=%d hamming_max=%d "
                  "sift_sigma=%g sift_contrast=%g surf_threshold=%g orb_n=%d orb_fast=%d",
                  static_cast<unsigned long long>(cfg.seed), cfg.repetitions, cfg.intensity_gain,
                  cfg.intensity_bias, cfg.rotation_angle, cfg.scale_factor, cfg.shear_kx,
                  cfg.fisheye_k, cfg.noise_density, cfg.match_cfg.ratio,
                  cfg.match_cfg.cross_check ? 1 : 0, cfg.match_cfg.hamming_max,
                  cfg.sift_cfg.base_sigma, cfg.sift_cfg.contrast_threshold,
                  cfg.surf_cfg.hessian_threshold, cfg.orb_cfg.n_features,
                  cfg.orb_cfg.fast_threshold);
    return buf;
}

}  // namespace detail

inline std::string results_to_csv(const std::vector<ScenarioResult>& rows,
                                  const SuiteConfig& cfg) {
    std::string out = detail::suite_metadata(cfg) + "\n";
    out += "scenario,algo,time_ms,kpnts1,kpnts2,matches,match_rate_pct\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), ",%s,%.3f,%d,%d,%d,%.1f\n", algo_name(r.algo).c_str(),
                      r.time_ms, r.kpnts1, r.kpnts2, r.matches, r.match_rate_pct);
        out += detail::csv_field(format_scenario(r.scenario)) + buf;
    }
    return out;
}

/// Markdown report: one table per scenario mirroring the published layout.
inline std::string results_to_markdown(const std::vector<ScenarioResult>& rows,
                                       const SuiteConfig& cfg) {
    std::string out = detail::suite_metadata(cfg) + "\n\n";
    std::vector<std::string> seen;
    for (const auto& r : rows) {
        const std::string sc = format_scenario(r.scenario);
        if (std::find(seen.begin(), seen.end(), sc) != seen.end()) continue;
        seen.push_back(sc);
        out += "## " + sc + "\n\n";
        out += "| Algorithm | Time (ms) | Kpnts1 | Kpnts2 | Matches | Match rate (%) |\n";
        out += "|---|---|---|---|---|---|\n";
        char buf[256];
        for (const auto& rr : rows) {
            if (format_scenario(rr.scenario) != sc) continue;
            std::snprintf(buf, sizeof(buf), "| %s | %.3f | %d | %d | %d | %.1f |\n",
                          algo_name(rr.algo).c_str(), rr.time_ms, rr.kpnts1, rr.kpnts2,
                          rr.matches, rr.match_rate_pct);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

enum class EmitFormat { csv, markdown };

inline void emit(const std::vector<ScenarioResult>& rows, const SuiteConfig& cfg,
                 EmitFormat format, const std::string& path) {
    if (rows.empty()) throw std::invalid_argument("emit: no results");
    std::ofstream out(path);
    if (!out) throw io_error("cannot write file: " + path);
    out << (format == EmitFormat::csv ? results_to_csv(rows, cfg)
                                      : results_to_markdown(rows, cfg));
    if (!out) throw io_error("cannot write file: " + path);
}

/// Parsed-back CSV row (metadata and header lines skipped); used for
/// round-trip checks and downstream tooling.
struct CsvRow {
    std::string scenario;
    std::string algo;
    double time_ms = 0.0;
    int kpnts1 = 0;
    int kpnts2 = 0;
    int matches = 0;
    double match_rate_pct = 0.0;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::vector<CsvRow> parse_results_csv(const std::string& text) {
    std::vector<CsvRow> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("scenario,", 0) == 0) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 7) throw std::invalid_argument("bad CSV row: " + line);
        CsvRow r;
        r.scenario = f[0];
        r.algo = f[1];
        r.time_ms = std::stod(f[2]);
        r.kpnts1 = std::stoi(f[3]);
        r.kpnts2 = std::stoi(f[4]);
        r.matches = std::stoi(f[5]);
        r.match_rate_pct = std::stod(f[6]);
        rows.push_back(r);
    }
    return rows;
}

inline std::string sweep_to_csv(const std::vector<SweepCell>& cells) {
    std::string out = "angle_deg,algo,kpnts1,kpnts2,matches,match_rate_pct\n";
    char buf[256];
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof(buf), "%g,%s,%d,%d,%d,%.1f\n", c.angle_deg,
                      algo_name(c.algo).c_str(), c.kpnts1, c.kpnts2, c.matches,
                      c.match_rate_pct);
        out += buf;
    }
    return out;
}

}  // namespace featbench
