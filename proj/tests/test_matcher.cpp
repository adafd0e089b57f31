#include <catch2/catch_amalgamated.hpp>

#include "featbench/matcher.hpp"
#include "featbench/rng.hpp"
#include "support/oracles.hpp"

using namespace featbench;

namespace {

Descriptor real_desc(std::initializer_list<float> vals) {
    return Descriptor::make_real(std::vector<float>(vals));
}

std::vector<Descriptor> random_reals(int n, int dim, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<Descriptor> out;
    for (int i = 0; i < n; ++i) {
        std::vector<float> v(static_cast<size_t>(dim));
        for (float& x : v) x = static_cast<float>(rng.next_unit());
        out.push_back(Descriptor::make_real(std::move(v)));
    }
    return out;
}

Descriptor random_binary(SplitMix64& rng) {
    std::array<std::uint8_t, 32> bits{};
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_below(256));
    return Descriptor::make_binary(bits);
}

}  // namespace

TEST_CASE("match_real: identical lists self-match at distance 0") {
    const auto a = random_reals(8, 16, 41);
    const auto pairs = match_real(a, a);
    REQUIRE(pairs.size() == a.size());
    for (const auto& m : pairs) {
        CHECK(m.query_index == m.train_index);
        CHECK(m.distance == 0.0);
    }
}

TEST_CASE("match_real: duplicate trains kill the ratio test") {
    const auto q = real_desc({1.f, 0.f});
    std::vector<Descriptor> a = {q};
    std::vector<Descriptor> b = {q, q};
    CHECK(match_real(a, b).empty());
}

TEST_CASE("match_real: empty inputs and mixed lengths") {
    const auto a = random_reals(3, 8, 1);
    CHECK(match_real({}, a).empty());
    CHECK(match_real(a, {}).empty());
    std::vector<Descriptor> bad = {real_desc({1.f, 2.f}), real_desc({1.f})};
    CHECK_THROWS_AS(match_real(bad, bad), std::invalid_argument);
}

TEST_CASE("match_real output is one-to-one and symmetric under swap") {
    const auto a = random_reals(20, 8, 7);
    const auto b = random_reals(25, 8, 8);
    const auto ab = match_real(a, b);
    std::vector<int> qseen, tseen;
    for (const auto& m : ab) {
        CHECK(std::count(qseen.begin(), qseen.end(), m.query_index) == 0);
        CHECK(std::count(tseen.begin(), tseen.end(), m.train_index) == 0);
        qseen.push_back(m.query_index);
        tseen.push_back(m.train_index);
    }
    const auto ba = match_real(b, a);
    REQUIRE(ab.size() == ba.size());
    for (const auto& m : ab) {
        const bool found = std::any_of(ba.begin(), ba.end(), [&](const MatchPair& r) {
            return r.query_index == m.train_index && r.train_index == m.query_index;
        });
        CHECK(found);
    }
}

TEST_CASE("match_real respects laplacian sign gating") {
    // b[0] is the bit-identical twin of the query but carries the other
    // sign; b[1] is farther away but sign-compatible
    std::vector<Descriptor> a = {real_desc({1.f, 0.f, 0.f})};
    std::vector<Descriptor> b = {real_desc({1.f, 0.f, 0.f}), real_desc({0.8f, 0.1f, 0.f})};
    std::vector<int> sa = {1};
    std::vector<int> sb = {-1, 1};
    const auto pairs = match_real(a, b, {}, &sa, &sb);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].train_index == 1);

    MatchConfig no_gate;
    no_gate.respect_laplacian_sign = false;
    const auto ungated = match_real(a, b, no_gate, &sa, &sb);
    REQUIRE(ungated.size() == 1);
    CHECK(ungated[0].train_index == 0);
}

TEST_CASE("match_binary: identity, threshold, oracle distances") {
    SplitMix64 rng(77);
    std::vector<Descriptor> a;
    for (int i = 0; i < 10; ++i) a.push_back(random_binary(rng));
    const auto self = match_binary(a, a);
    REQUIRE(self.size() == a.size());
    for (const auto& m : self) {
        CHECK(m.query_index == m.train_index);
        CHECK(m.distance == 0.0);
    }

    // hamming_max 0 with disjoint patterns -> empty
    std::array<std::uint8_t, 32> ones{};
    ones.fill(0xFF);
    std::vector<Descriptor> zeros = {Descriptor::make_binary({})};
    std::vector<Descriptor> full = {Descriptor::make_binary(ones)};
    MatchConfig strict;
    strict.hamming_max = 0;
    CHECK(match_binary(zeros, full, strict).empty());

    for (int t = 0; t < 50; ++t) {
        const Descriptor x = random_binary(rng);
        const Descriptor y = random_binary(rng);
        REQUIRE(hamming_distance(x, y) == oracles::hamming_loop(x, y));
    }
}

TEST_CASE("match_binary is one-to-one") {
    SplitMix64 rng(123);
    std::vector<Descriptor> a, b;
    for (int i = 0; i < 15; ++i) a.push_back(random_binary(rng));
    for (int i = 0; i < 12; ++i) b.push_back(random_binary(rng));
    MatchConfig loose;
    loose.hamming_max = 256;
    const auto pairs = match_binary(a, b, loose);
    std::vector<int> qs, ts;
    for (const auto& m : pairs) {
        CHECK(std::count(qs.begin(), qs.end(), m.query_index) == 0);
        CHECK(std::count(ts.begin(), ts.end(), m.train_index) == 0);
        qs.push_back(m.query_index);
        ts.push_back(m.train_index);
    }
}

TEST_CASE("match_rate reproduces published cells") {
    CHECK(match_rate(248, 229, 183) == Catch::Approx(76.7).margin(0.05));
    CHECK(match_rate(248, 1210, 232) == Catch::Approx(31.8).margin(0.05));
    CHECK(match_rate(261, 308, 155) == Catch::Approx(54.48).margin(0.05));
}

TEST_CASE("match_rate errors") {
    CHECK_THROWS_AS(match_rate(0, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(match_rate(5, 5, 6), std::invalid_argument);
    CHECK_THROWS_AS(match_rate(-1, 5, 0), std::invalid_argument);
}

TEST_CASE("matching identical distinct sets gives rate 100") {
    const auto a = random_reals(12, 10, 2024);
    const auto pairs = match_real(a, a);
    CHECK(match_rate(static_cast<int>(a.size()), static_cast<int>(a.size()),
                     static_cast<int>(pairs.size())) == 100.0);
}
