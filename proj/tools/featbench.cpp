// featbench — detect/describe/match SIFT, SURF and ORB features and run
// the distortion benchmark suite.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "featbench/bench.hpp"
#include "featbench/serialize.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitCompute = 3;

featbench::Scenario scenario_from_cli(const std::string& kind,
                                      const std::vector<std::string>& params,
                                      std::uint64_t seed) {
    std::string text = kind;
    for (size_t i = 0; i < params.size(); ++i) text += (i == 0 ? ":" : ",") + params[i];
    featbench::Scenario sc = featbench::parse_scenario(text);
    if (sc.kind == featbench::Scenario::Kind::noise && sc.seed == 0) sc.seed = seed;
    return sc;
}

std::vector<double> parse_angles(const std::string& csv) {
    std::vector<double> out;
    std::string cur;
    for (char c : csv + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"from-scratch SIFT/SURF/ORB feature matching and distortion benchmark"};
    app.require_subcommand(1);

    // detect
    auto* detect = app.add_subcommand("detect", "detect keypoints and dump them as JSON");
    std::string d_algo, d_image, d_out;
    detect->add_option("--algo", d_algo, "sift | surf | orb")->required();
    detect->add_option("--image", d_image, "input PGM")->required();
    detect->add_option("--out", d_out, "output keypoint JSON")->required();

    // distort
    auto* distort = app.add_subcommand("distort", "apply one distortion scenario to an image");
    std::string s_kind, s_image, s_out;
    std::vector<std::string> s_params;
    std::uint64_t s_seed = 42;
    distort->add_option("--kind", s_kind,
                        "identity | intensity | rotation | scaling | shearing | fisheye | noise")
        ->required();
    distort->add_option("--param", s_params, "scenario parameter k=v (repeatable)");
    distort->add_option("--seed", s_seed, "seed for the noise scenario");
    distort->add_option("--image", s_image, "input PGM")->required();
    distort->add_option("--out", s_out, "output PGM")->required();

    // match
    auto* match = app.add_subcommand("match", "match two images and dump pairs as JSON");
    std::string m_algo, m_image1, m_image2, m_out;
    match->add_option("--algo", m_algo, "sift | surf | orb")->required();
    match->add_option("--image1", m_image1, "first PGM")->required();
    match->add_option("--image2", m_image2, "second PGM")->required();
    match->add_option("--out", m_out, "output match JSON")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "run the full scenario x algorithm suite");
    std::string b_image, b_out, b_format = "csv";
    std::uint64_t b_seed = 42;
    int b_reps = 5;
    bench->add_option("--image", b_image, "input PGM")->required();
    bench->add_option("--seed", b_seed, "suite seed");
    bench->add_option("--reps", b_reps, "timing repetitions (median reported)");
    bench->add_option("--format", b_format, "csv | markdown");
    bench->add_option("--out", b_out, "output report path")->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "match rate vs rotation angle");
    std::string w_image, w_out, w_angles = "0,45,90,135,180,225,270";
    sweep->add_option("--image", w_image, "input PGM")->required();
    sweep->add_option("--angles", w_angles, "comma-separated degrees");
    sweep->add_option("--out", w_out, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        featbench::SuiteConfig cfg;

        if (*detect) {
            const featbench::Algo algo = featbench::parse_algo(d_algo);
            const featbench::GrayImage img = featbench::load_pgm(d_image);
            const auto result = featbench::detect_and_describe(img, algo, cfg);
            featbench::write_json(featbench::keypoints_to_json(result.keypoints), d_out);
            std::printf("%zu keypoints -> %s\n", result.keypoints.size(), d_out.c_str());
        } else if (*distort) {
            const featbench::Scenario sc = scenario_from_cli(s_kind, s_params, s_seed);
            const featbench::GrayImage img = featbench::load_pgm(s_image);
            featbench::save_pgm(featbench::apply_scenario(img, sc), s_out);
            std::printf("%s -> %s\n", featbench::format_scenario(sc).c_str(), s_out.c_str());
        } else if (*match) {
            const featbench::Algo algo = featbench::parse_algo(m_algo);
            const featbench::GrayImage img1 = featbench::load_pgm(m_image1);
            const featbench::GrayImage img2 = featbench::load_pgm(m_image2);
            const auto r1 = featbench::detect_and_describe(img1, algo, cfg);
            const auto r2 = featbench::detect_and_describe(img2, algo, cfg);
            const auto pairs = featbench::match_results(r1, r2, algo, cfg.match_cfg);
            featbench::write_json(featbench::matches_to_json(pairs), m_out);
            const double rate = (r1.keypoints.empty() && r2.keypoints.empty())
                                    ? 0.0
                                    : featbench::match_rate(static_cast<int>(r1.keypoints.size()),
                                                            static_cast<int>(r2.keypoints.size()),
                                                            static_cast<int>(pairs.size()));
            std::printf("kpnts1=%zu kpnts2=%zu matches=%zu rate=%.1f%% -> %s\n",
                        r1.keypoints.size(), r2.keypoints.size(), pairs.size(), rate,
                        m_out.c_str());
        } else if (*bench) {
            cfg.seed = b_seed;
            cfg.repetitions = b_reps;
            if (b_format != "csv" && b_format != "markdown")
                throw CLI::ValidationError("--format", "must be csv or markdown");
            const featbench::GrayImage img = featbench::load_pgm(b_image);
            const featbench::SuiteRun run = featbench::run_suite(img, cfg);
            featbench::emit(run.rows, cfg,
                            b_format == "csv" ? featbench::EmitFormat::csv
                                              : featbench::EmitFormat::markdown,
                            b_out);
            std::printf("%zu rows -> %s\n", run.rows.size(), b_out.c_str());
            if (!run.cell_errors.empty()) {
                for (const auto& e : run.cell_errors)
                    std::fprintf(stderr, "cell failed: %s\n", e.c_str());
                return kExitCompute;
            }
        } else if (*sweep) {
            const featbench::GrayImage img = featbench::load_pgm(w_image);
            const auto cells = featbench::rotation_sweep(img, parse_angles(w_angles), cfg);
            std::ofstream out(w_out);
            if (!out) throw featbench::io_error("cannot write file: " + w_out);
            out << featbench::sweep_to_csv(cells);
            std::printf("%zu cells -> %s\n", cells.size(), w_out.c_str());
        }
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const featbench::io_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCompute;
    }
    return 0;
}
