#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <vector>

#include "featbench/keypoint.hpp"

namespace featbench {

struct MatchPair {
    int query_index = 0;
    int train_index = 0;
    double distance = 0.0;  // Euclidean for real descriptors, Hamming for binary
};

struct MatchConfig {
    double ratio = 0.75;                 // Lowe ratio test, real descriptors
    bool cross_check = true;             // keep mutual best pairs only
    int hamming_max = 64;                // binary acceptance threshold
    bool respect_laplacian_sign = true;  // SURF: compare equal-sign candidates only
};

inline int hamming_distance(const Descriptor& a, const Descriptor& b) {
    int d = 0;
    for (int w = 0; w < 4; ++w) {
        std::uint64_t x, y;
        std::memcpy(&x, a.bits.data() + 8 * w, 8);
        std::memcpy(&y, b.bits.data() + 8 * w, 8);
        d += std::popcount(x ^ y);
    }
    return d;
}

inline double euclidean_distance(const Descriptor& a, const Descriptor& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        const double d = static_cast<double>(a.values[i]) - b.values[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

/// Ratio-test nearest-neighbor matching for real-valued descriptors, with
/// optional mutual-best cross-check and optional Laplacian-sign gating
/// (pass index-aligned sign lists for SURF, null otherwise).
inline std::vector<MatchPair> match_real(const std::vector<Descriptor>& a,
                                         const std::vector<Descriptor>& b,
                                         const MatchConfig& cfg = {},
                                         const std::vector<int>* sign_a = nullptr,
                                         const std::vector<int>* sign_b = nullptr) {
    if (a.empty() || b.empty()) return {};
    const size_t len = a.front().values.size();
    for (const auto& d : a)
        if (d.values.size() != len) throw std::invalid_argument("match_real: mixed descriptor lengths");
    for (const auto& d : b)
        if (d.values.size() != len) throw std::invalid_argument("match_real: mixed descriptor lengths");
    const bool gate = cfg.respect_laplacian_sign && sign_a && sign_b;
    const std::vector<int>* sa = gate ? sign_a : nullptr;
    const std::vector<int>* sb = gate ? sign_b : nullptr;

    // nearest and second-nearest in `to` for every element of `from`;
    // the ratio test result is recorded alongside
    struct Best {
        int index = -1;
        bool ratio_ok = false;
    };
    auto scan = [&](const std::vector<Descriptor>& from, const std::vector<Descriptor>& to,
                    const std::vector<int>* sf, const std::vector<int>* st) {
        std::vector<Best> out(from.size());
        for (size_t i = 0; i < from.size(); ++i) {
            int best = -1, second = -1;
            double best_d = std::numeric_limits<double>::infinity();
            double second_d = std::numeric_limits<double>::infinity();
            for (size_t j = 0; j < to.size(); ++j) {
                if (sf && (*sf)[i] != (*st)[j]) continue;
                const double d = euclidean_distance(from[i], to[j]);
                if (d < best_d) {
                    second_d = best_d; second = best;
                    best_d = d; best = static_cast<int>(j);
                } else if (d < second_d) {
                    second_d = d; second = static_cast<int>(j);
                }
            }
            out[i].index = best;
            out[i].ratio_ok = best >= 0 && (second < 0 || best_d < cfg.ratio * second_d);
        }
        return out;
    };

    const auto fwd = scan(a, b, sa, sb);
    if (!cfg.cross_check) {
        // enforce one match per train index: smallest distance wins,
        // then lowest query index
        std::vector<MatchPair> candidates;
        for (size_t i = 0; i < a.size(); ++i)
            if (fwd[i].ratio_ok)
                candidates.push_back({static_cast<int>(i), fwd[i].index,
                                      euclidean_distance(a[i], b[static_cast<size_t>(fwd[i].index)])});
        std::vector<int> owner(b.size(), -1);
        for (size_t c = 0; c < candidates.size(); ++c) {
            int& o = owner[static_cast<size_t>(candidates[c].train_index)];
            if (o < 0 || candidates[static_cast<size_t>(o)].distance > candidates[c].distance)
                o = static_cast<int>(c);
        }
        std::vector<MatchPair> kept;
        for (size_t c = 0; c < candidates.size(); ++c)
            if (owner[static_cast<size_t>(candidates[c].train_index)] == static_cast<int>(c))
                kept.push_back(candidates[c]);
        return kept;
    }

    // cross-checked: keep mutual best pairs whose ratio test passes on
    // both sides, so swapping the inputs yields the mirrored pair set
    const auto rev = scan(b, a, sb, sa);
    std::vector<MatchPair> kept;
    for (size_t i = 0; i < a.size(); ++i) {
        const int j = fwd[i].index;
        if (j < 0 || !fwd[i].ratio_ok) continue;
        if (rev[static_cast<size_t>(j)].index != static_cast<int>(i) ||
            !rev[static_cast<size_t>(j)].ratio_ok)
            continue;
        kept.push_back({static_cast<int>(i), j,
                        euclidean_distance(a[i], b[static_cast<size_t>(j)])});
    }
    return kept;
}

/// Mutual-best Hamming matching for 256-bit descriptors, accepted when the
/// distance is at most cfg.hamming_max. Ties go to the lowest index.
inline std::vector<MatchPair> match_binary(const std::vector<Descriptor>& a,
                                           const std::vector<Descriptor>& b,
                                           const MatchConfig& cfg = {}) {
    if (a.empty() || b.empty()) return {};
    std::vector<int> best_for_a(a.size(), -1);
    std::vector<int> best_for_b(b.size(), -1);
    std::vector<int> best_d_a(a.size(), std::numeric_limits<int>::max());
    std::vector<int> best_d_b(b.size(), std::numeric_limits<int>::max());
    for (size_t i = 0; i < a.size(); ++i) {
        for (size_t j = 0; j < b.size(); ++j) {
            const int d = hamming_distance(a[i], b[j]);
            if (d < best_d_a[i]) { best_d_a[i] = d; best_for_a[i] = static_cast<int>(j); }
            if (d < best_d_b[j]) { best_d_b[j] = d; best_for_b[j] = static_cast<int>(i); }
        }
    }
    std::vector<MatchPair> out;
    for (size_t i = 0; i < a.size(); ++i) {
        const int j = best_for_a[i];
        if (j < 0) continue;
        if (best_for_b[static_cast<size_t>(j)] != static_cast<int>(i)) continue;
        if (best_d_a[i] > cfg.hamming_max) continue;
        out.push_back({static_cast<int>(i), j, static_cast<double>(best_d_a[i])});
    }
    return out;
}

/// The tables' percentage metric: 200 * matches / (kpnts1 + kpnts2).
inline double match_rate(int kpnts1, int kpnts2, int matches) {
    if (kpnts1 < 0 || kpnts2 < 0 || matches < 0)
        throw std::invalid_argument("match_rate: negative count");
    if (kpnts1 + kpnts2 == 0) throw std::invalid_argument("match_rate: both counts zero");
    if (matches > std::min(kpnts1, kpnts2))
        throw std::invalid_argument("match_rate: matches exceed keypoint count");
    return 200.0 * matches / (kpnts1 + kpnts2);
}

}  // namespace featbench
