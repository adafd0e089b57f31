#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "featbench/image.hpp"
#include "featbench/rng.hpp"
#include "featbench/serialize.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace featbench;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("load_pgm reads P2") {
    const auto p = temp_file("fb_p2.pgm");
    write_text(p, "P2\n2 2\n255\n0 10 20 30\n");
    const GrayImage img = load_pgm(p.string());
    REQUIRE(img.width == 2);
    REQUIRE(img.height == 2);
    CHECK(img.pixels == std::vector<double>{0, 10, 20, 30});
}

TEST_CASE("P5 and P2 of the same raster load identically") {
    const auto p2 = temp_file("fb_eq.p2.pgm");
    const auto p5 = temp_file("fb_eq.p5.pgm");
    write_text(p2, "P2\n3 1\n255\n7 255 0\n");
    std::string bin = "P5\n3 1\n255\n";
    bin += static_cast<char>(7);
    bin += static_cast<char>(255);
    bin += static_cast<char>(0);
    write_text(p5, bin);
    const GrayImage a = load_pgm(p2.string());
    const GrayImage b = load_pgm(p5.string());
    CHECK(a.width == b.width);
    CHECK(a.pixels == b.pixels);
}

TEST_CASE("load_pgm error cases are reported distinctly") {
    CHECK_THROWS_WITH(load_pgm("/nonexistent/file.pgm"),
                      Catch::Matchers::ContainsSubstring("cannot open"));

    const auto bad_magic = temp_file("fb_badmagic.pgm");
    write_text(bad_magic, "P6\n2 2\n255\n");
    CHECK_THROWS_WITH(load_pgm(bad_magic.string()),
                      Catch::Matchers::ContainsSubstring("malformed PGM header"));

    const auto bad_maxval = temp_file("fb_maxval.pgm");
    write_text(bad_maxval, "P2\n2 2\n65535\n0 0 0 0\n");
    CHECK_THROWS_WITH(load_pgm(bad_maxval.string()),
                      Catch::Matchers::ContainsSubstring("unsupported maxval"));

    const auto truncated = temp_file("fb_trunc.pgm");
    write_text(truncated, "P2\n2 2\n255\n0 10\n");
    CHECK_THROWS_WITH(load_pgm(truncated.string()),
                      Catch::Matchers::ContainsSubstring("truncated pixel data"));

    std::string bin = "P5\n2 2\n255\n";
    bin += static_cast<char>(1);
    const auto trunc5 = temp_file("fb_trunc5.pgm");
    write_text(trunc5, bin);
    CHECK_THROWS_WITH(load_pgm(trunc5.string()),
                      Catch::Matchers::ContainsSubstring("truncated pixel data"));
}

TEST_CASE("pgm round trip quantizes once") {
    GrayImage img = fixtures::make_noise_image(13, 9, 3);
    img.at(4, 4) = 127.6;  // quantizes to 128
    const auto p = temp_file("fb_rt.pgm");
    save_pgm(img, p.string());
    const GrayImage back = load_pgm(p.string());
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    CHECK(back.at(4, 4) == 128.0);
    // a second round trip is lossless
    const auto p2 = temp_file("fb_rt2.pgm");
    save_pgm(back, p2.string(), /*binary=*/false);
    CHECK(load_pgm(p2.string()).pixels == back.pixels);
}

TEST_CASE("integral handles zero and hand-sized cases") {
    const GrayImage zero(3, 3, 0.0);
    const IntegralImage zi = integral(zero);
    for (double v : zi.cumulative) CHECK(v == 0.0);

    GrayImage img(2, 2);
    img.at(0, 0) = 1; img.at(1, 0) = 2; img.at(0, 1) = 3; img.at(1, 1) = 4;
    const IntegralImage ii = integral(img);
    CHECK(ii.at(0, 0) == 1.0);
    CHECK(ii.at(1, 0) == 3.0);
    CHECK(ii.at(0, 1) == 4.0);
    CHECK(ii.at(1, 1) == 10.0);
}

TEST_CASE("integral total equals direct sum on random image") {
    const GrayImage img = fixtures::make_noise_image(16, 16, 5);
    const IntegralImage ii = integral(img);
    CHECK(ii.at(15, 15) == oracles::box_sum_loop(img, 0, 0, 15, 15));
}

TEST_CASE("box_sum basics and exhaustive oracle") {
    GrayImage img(2, 2);
    img.at(0, 0) = 1; img.at(1, 0) = 2; img.at(0, 1) = 3; img.at(1, 1) = 4;
    const IntegralImage ii = integral(img);
    CHECK(box_sum(ii, 0, 0, 1, 1) == 10.0);
    CHECK(box_sum(ii, 1, 1, 1, 1) == 4.0);
    CHECK_THROWS_AS(box_sum(ii, 0, 0, 2, 1), std::out_of_range);
    CHECK_THROWS_AS(box_sum(ii, 1, 1, 0, 0), std::out_of_range);

    const GrayImage big = fixtures::make_noise_image(32, 32, 17);
    const IntegralImage bi = integral(big);
    SplitMix64 rng(99);
    for (int t = 0; t < 100; ++t) {
        int x0 = static_cast<int>(rng.next_below(32));
        int x1 = static_cast<int>(rng.next_below(32));
        int y0 = static_cast<int>(rng.next_below(32));
        int y1 = static_cast<int>(rng.next_below(32));
        if (x0 > x1) std::swap(x0, x1);
        if (y0 > y1) std::swap(y0, y1);
        REQUIRE(box_sum(bi, x0, y0, x1, y1) == oracles::box_sum_loop(big, x0, y0, x1, y1));
    }
}

TEST_CASE("gaussian_blur preserves constants") {
    const GrayImage img(9, 7, 7.0);
    for (double sigma : {0.4, 1.0, 2.5}) {
        const GrayImage out = gaussian_blur(img, sigma);
        for (double v : out.pixels) CHECK(v == Catch::Approx(7.0).margin(1e-9));
    }
}

TEST_CASE("gaussian_blur equals dense 2-D convolution on an impulse") {
    GrayImage img(15, 15, 0.0);
    img.at(7, 7) = 255.0;
    const GrayImage fast = gaussian_blur(img, 1.0);
    const GrayImage dense = oracles::gaussian_blur_dense(img, 1.0);
    for (int y = 0; y < 15; ++y)
        for (int x = 0; x < 15; ++x)
            REQUIRE(fast.at(x, y) == Catch::Approx(dense.at(x, y)).margin(1e-6));
}

TEST_CASE("gaussian_blur with tiny sigma is near identity") {
    const GrayImage img = fixtures::make_noise_image(12, 12, 23);
    const GrayImage out = gaussian_blur(img, 0.01);
    for (size_t i = 0; i < img.pixels.size(); ++i)
        CHECK(std::abs(out.pixels[i] - img.pixels[i]) < 0.5);
}

TEST_CASE("gaussian_blur rejects non-positive sigma") {
    const GrayImage img(4, 4, 0.0);
    CHECK_THROWS_AS(gaussian_blur(img, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_blur(img, -1.0), std::invalid_argument);
}

TEST_CASE("gaussian semigroup holds on interior pixels") {
    const GrayImage img = fixtures::make_scene(64, 64, 31);
    const double s1 = 1.2, s2 = 1.6;
    const GrayImage two_step = gaussian_blur(gaussian_blur(img, s1), s2);
    const GrayImage one_step = gaussian_blur(img, std::sqrt(s1 * s1 + s2 * s2));
    const int margin = static_cast<int>(std::ceil(3.0 * (s1 + s2)));
    for (int y = margin; y < 64 - margin; ++y)
        for (int x = margin; x < 64 - margin; ++x)
            REQUIRE(std::abs(two_step.at(x, y) - one_step.at(x, y)) < 0.5);
}

TEST_CASE("blur preserves the mean of a constant-padded interior") {
    GrayImage img(32, 32, 120.0);
    img.at(16, 16) = 130.0;  // small interior perturbation
    const GrayImage out = gaussian_blur(img, 1.5);
    double mean_in = 0.0, mean_out = 0.0;
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        mean_in += img.pixels[i];
        mean_out += out.pixels[i];
    }
    mean_in /= static_cast<double>(img.pixels.size());
    mean_out /= static_cast<double>(out.pixels.size());
    CHECK(std::abs(mean_in - mean_out) < 0.5);
}

TEST_CASE("sample_bilinear identities") {
    GrayImage img(2, 2, 0.0);
    img.at(1, 0) = 100.0;
    CHECK(sample_bilinear(img, 1.0, 0.0) == 100.0);
    CHECK(sample_bilinear(img, 0.5, 0.0) == 50.0);
    CHECK(sample_bilinear(img, -1.0, -1.0) == 0.0);
    CHECK(sample_bilinear(img, 1.5, 0.0) == 0.0);  // outside [0, w-1]

    const GrayImage nz = fixtures::make_noise_image(8, 8, 77);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) REQUIRE(sample_bilinear(nz, x, y) == nz.at(x, y));
}

TEST_CASE("sample_bilinear is continuous inside the image") {
    const GrayImage img = fixtures::make_noise_image(16, 16, 81);
    SplitMix64 rng(5);
    for (int t = 0; t < 200; ++t) {
        const double x = rng.next_unit() * 14.9;
        const double y = rng.next_unit() * 14.9;
        REQUIRE(std::abs(sample_bilinear(img, x + 1e-6, y) - sample_bilinear(img, x, y)) < 1e-3);
        REQUIRE(std::abs(sample_bilinear(img, x, y + 1e-6) - sample_bilinear(img, x, y)) < 1e-3);
    }
}

TEST_CASE("downsample2 decimates") {
    const GrayImage c4(4, 4, 9.0);
    const GrayImage half = downsample2(c4);
    REQUIRE(half.width == 2);
    REQUIRE(half.height == 2);
    for (double v : half.pixels) CHECK(v == 9.0);

    GrayImage marked(4, 4, 0.0);
    marked.at(2, 2) = 99.0;
    CHECK(downsample2(marked).at(1, 1) == 99.0);

    const GrayImage odd(5, 5, 1.0);
    const GrayImage oh = downsample2(odd);
    CHECK(oh.width == 2);
    CHECK(oh.height == 2);

    CHECK_THROWS_AS(downsample2(GrayImage(1, 4, 0.0)), std::invalid_argument);
}

TEST_CASE("keypoint json dump is sorted by descending response") {
    std::vector<Keypoint> kps;
    kps.push_back({1.0, 2.0, 1.5, 10.0, 0.5, 0, 0});
    kps.push_back({3.0, 4.0, 2.5, 20.0, 0.9, 1, -1});
    kps.push_back({5.0, 6.0, 3.5, 30.0, 0.7, 2, 1});
    const auto j = keypoints_to_json(kps);
    REQUIRE(j.size() == 3);
    CHECK(j[0]["response"].get<double>() == 0.9);
    CHECK(j[1]["response"].get<double>() == 0.7);
    CHECK(j[2]["response"].get<double>() == 0.5);
    CHECK(j[1]["laplacian_sign"].get<int>() == 1);
    for (const char* key :
         {"x", "y", "scale", "orientation_deg", "response", "octave", "laplacian_sign"})
        CHECK(j[0].contains(key));
}
