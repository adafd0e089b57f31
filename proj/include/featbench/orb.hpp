#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "featbench/image.hpp"
#include "featbench/keypoint.hpp"
#include "featbench/rng.hpp"

namespace featbench::orb {

struct OrbConfig {
    int n_features = 500;
    int fast_threshold = 20;
    int pyramid_levels = 8;
    double pyramid_scale = 1.2;
    int patch_size = 31;
    int centroid_radius = 15;
    double harris_k = 0.04;
    std::uint64_t pattern_seed = 42;
};

struct FastCorner {
    int x = 0;
    int y = 0;
    double score = 0.0;  // largest margin over all valid 9-arcs
};

namespace detail {

// 16-pixel Bresenham circle of radius 3, clockwise from 12 o'clock
constexpr int kCircle[16][2] = {{0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0},  {3, 1},
                                {2, 2},  {1, 3},  {0, 3},  {-1, 3}, {-2, 2}, {-3, 1},
                                {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}};

}  // namespace detail

/// FAST-9 segment test: a pixel is a corner when at least 9 contiguous
/// circle pixels are all brighter than center+threshold or all darker
/// than center-threshold. Score is the largest threshold margin over any
/// 9-arc, so the corner predicate is score > threshold.
inline std::vector<FastCorner> fast_detect(const GrayImage& img, int threshold) {
    if (img.width < 7 || img.height < 7)
        throw std::invalid_argument("fast_detect: image must be at least 7x7");
    std::vector<FastCorner> out;
    const int w = img.width;
    const double* px = img.pixels.data();
    int off[16];
    for (int k = 0; k < 16; ++k)
        off[k] = detail::kCircle[k][1] * w + detail::kCircle[k][0];

    // any 9 consecutive set bits on the wrapped 16-bit ring?
    auto has_arc9 = [](unsigned mask) {
        const unsigned m = mask | (mask << 16);
        for (int s = 0; s < 16; ++s)
            if (((m >> s) & 0x1FFu) == 0x1FFu) return true;
        return false;
    };

    double ring[16];
    for (int y = 3; y < img.height - 3; ++y) {
        for (int x = 3; x < w - 3; ++x) {
            const double* c = px + static_cast<size_t>(y) * w + x;
            const double p = *c;

            // cheap reject before touching the full ring: a 9-arc covers
            // at least two of the four compass points
            int quad_bright = 0, quad_dark = 0;
            for (int k = 0; k < 16; k += 4) {
                const double v = c[off[k]];
                if (v > p + threshold) ++quad_bright;
                else if (v < p - threshold) ++quad_dark;
            }
            if (quad_bright < 2 && quad_dark < 2) continue;

            unsigned bright = 0, dark = 0;
            for (int k = 0; k < 16; ++k) {
                ring[k] = c[off[k]];
                bright |= static_cast<unsigned>(ring[k] > p + threshold) << k;
                dark |= static_cast<unsigned>(ring[k] < p - threshold) << k;
            }
            const bool is_bright = has_arc9(bright);
            if (!is_bright && !has_arc9(dark)) continue;
            const unsigned arcs = is_bright ? bright : dark;
            const unsigned doubled = arcs | (arcs << 16);

            // the best margin lives on an arc that passes at this
            // threshold; weaker arcs cannot exceed it
            double score = -std::numeric_limits<double>::infinity();
            for (int start = 0; start < 16; ++start) {
                if (((doubled >> start) & 0x1FFu) != 0x1FFu) continue;
                double margin = std::numeric_limits<double>::infinity();
                for (int k = 0; k < 9; ++k) {
                    const double v = ring[(start + k) & 15];
                    margin = std::min(margin, is_bright ? v - p : p - v);
                }
                score = std::max(score, margin);
            }
            if (score > threshold) out.push_back({x, y, score});
        }
    }
    return out;
}

namespace detail {

inline void sobel_at(const GrayImage& img, int x, int y, double& gx, double& gy) {
    gx = (img.at(x + 1, y - 1) + 2.0 * img.at(x + 1, y) + img.at(x + 1, y + 1)) -
         (img.at(x - 1, y - 1) + 2.0 * img.at(x - 1, y) + img.at(x - 1, y + 1));
    gy = (img.at(x - 1, y + 1) + 2.0 * img.at(x, y + 1) + img.at(x + 1, y + 1)) -
         (img.at(x - 1, y - 1) + 2.0 * img.at(x, y - 1) + img.at(x + 1, y - 1));
}

}  // namespace detail

struct RankedCorner {
    int x = 0;
    int y = 0;
    double harris_score = 0.0;
};

/// Harris measure det(M) - k*tr(M)^2 from a 7x7 Sobel-gradient window at
/// each corner; returns the n best, descending, ties by (y,x). Corners too
/// close to the border for the window are dropped.
inline std::vector<RankedCorner> harris_rank(const GrayImage& img,
                                             const std::vector<FastCorner>& corners, int n,
                                             double k = 0.04) {
    std::vector<RankedCorner> scored;
    scored.reserve(corners.size());
    for (const FastCorner& c : corners) {
        if (c.x < 4 || c.y < 4 || c.x >= img.width - 4 || c.y >= img.height - 4) continue;
        double a = 0.0, b = 0.0, cxy = 0.0;
        for (int dy = -3; dy <= 3; ++dy) {
            for (int dx = -3; dx <= 3; ++dx) {
                double gx, gy;
                detail::sobel_at(img, c.x + dx, c.y + dy, gx, gy);
                a += gx * gx;
                b += gy * gy;
                cxy += gx * gy;
            }
        }
        const double score = (a * b - cxy * cxy) - k * (a + b) * (a + b);
        scored.push_back({c.x, c.y, score});
    }
    std::sort(scored.begin(), scored.end(), [](const RankedCorner& p, const RankedCorner& q) {
        if (p.harris_score != q.harris_score) return p.harris_score > q.harris_score;
        if (p.y != q.y) return p.y < q.y;
        return p.x < q.x;
    });
    if (static_cast<int>(scored.size()) > n) scored.resize(static_cast<size_t>(n));
    return scored;
}

/// Intensity-centroid orientation: atan2 of the first moments over a disc,
/// mapped to [0,360); a fully balanced patch reports 0.
inline double orientation_centroid(const GrayImage& img, int x, int y, int radius) {
    if (x - radius < 0 || y - radius < 0 || x + radius >= img.width || y + radius >= img.height)
        throw std::out_of_range("orientation_centroid: disc out of bounds");
    double m10 = 0.0, m01 = 0.0, total = 0.0;
    const int r2 = radius * radius;
    for (int j = -radius; j <= radius; ++j) {
        for (int i = -radius; i <= radius; ++i) {
            if (i * i + j * j > r2) continue;
            const double v = img.at(x + i, y + j);
            m10 += i * v;
            m01 += j * v;
            total += (std::abs(i) + std::abs(j)) * v;
        }
    }
    // a balanced patch cancels only up to floating-point rounding; treat
    // moments below the accumulation noise floor as zero
    if (std::hypot(m10, m01) <= 1e-9 * total) return 0.0;
    double deg = std::atan2(m01, m10) * 180.0 / std::numbers::pi;
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg = 0.0;
    return deg;
}

/// 256 point-pair offsets drawn once from a seeded generator, plus 30
/// precomputed copies rotated in 12-degree steps. Pair coordinates stay
/// inside the patch radius so every rotation still fits.
struct BriefPattern {
    struct Pair {
        int x1, y1, x2, y2;
    };
    std::array<Pair, 256> base{};
    std::array<std::array<Pair, 256>, 30> rotated{};
};

inline BriefPattern make_brief_pattern(int patch_size = 31, std::uint64_t seed = 42) {
    const int radius = patch_size / 2;
    const double spread = patch_size / 5.0;
    SplitMix64 rng(seed);
    BriefPattern p;
    auto draw_point = [&](int& px, int& py) {
        for (;;) {
            const int x = static_cast<int>(std::lround(spread * rng.next_gaussian()));
            const int y = static_cast<int>(std::lround(spread * rng.next_gaussian()));
            if (x * x + y * y <= radius * radius) {
                px = x;
                py = y;
                return;
            }
        }
    };
    for (auto& pair : p.base) {
        do {
            draw_point(pair.x1, pair.y1);
            draw_point(pair.x2, pair.y2);
        } while (pair.x1 == pair.x2 && pair.y1 == pair.y2);
    }
    for (int r = 0; r < 30; ++r) {
        const double a = r * 12.0 * std::numbers::pi / 180.0;
        const double c = std::cos(a), s = std::sin(a);
        for (int i = 0; i < 256; ++i) {
            const auto& b = p.base[static_cast<size_t>(i)];
            auto rot = [&](int x, int y, int& ox, int& oy) {
                ox = static_cast<int>(std::lround(c * x - s * y));
                oy = static_cast<int>(std::lround(s * x + c * y));
            };
            auto& out = p.rotated[static_cast<size_t>(r)][static_cast<size_t>(i)];
            rot(b.x1, b.y1, out.x1, out.y1);
            rot(b.x2, b.y2, out.x2, out.y2);
        }
    }
    return p;
}

/// Steered BRIEF: picks the pattern rotation nearest the keypoint
/// orientation (12-degree quantization); bit i is 1 iff the first point of
/// pair i is darker than the second. The image must already be smoothed
/// (sigma 2) and the patch must fit.
inline Descriptor brief_describe(const GrayImage& smoothed, const Keypoint& kp,
                                 const BriefPattern& pattern) {
    const int cx = static_cast<int>(std::lround(kp.x));
    const int cy = static_cast<int>(std::lround(kp.y));
    const int ridx = static_cast<int>(std::lround(kp.orientation_deg / 12.0)) % 30;
    const auto& pairs = pattern.rotated[static_cast<size_t>(ridx)];

    std::array<std::uint8_t, 32> bits{};
    for (int i = 0; i < 256; ++i) {
        const auto& pr = pairs[static_cast<size_t>(i)];
        const int x1 = cx + pr.x1, y1 = cy + pr.y1;
        const int x2 = cx + pr.x2, y2 = cy + pr.y2;
        if (x1 < 0 || y1 < 0 || x1 >= smoothed.width || y1 >= smoothed.height || x2 < 0 ||
            y2 < 0 || x2 >= smoothed.width || y2 >= smoothed.height)
            throw std::out_of_range("brief_describe: patch out of bounds");
        if (smoothed.at(x1, y1) < smoothed.at(x2, y2))
            bits[static_cast<size_t>(i) >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
    }
    return Descriptor::make_binary(bits);
}

/// FAST corners per pyramid level, Harris top-N pooled with per-level
/// budgets proportional to level area, centroid orientation, steered BRIEF
/// on the smoothed level image; coordinates and scale mapped back to the
/// level-0 frame.
inline std::pair<std::vector<Keypoint>, std::vector<Descriptor>> orb_detect(
    const GrayImage& img, const OrbConfig& cfg = {}) {
    const BriefPattern pattern = make_brief_pattern(cfg.patch_size, cfg.pattern_seed);
    const int margin = std::max(cfg.patch_size / 2, cfg.centroid_radius);

    struct Level {
        GrayImage image;
        double factor = 1.0;  // level -> level-0 coordinate multiplier
    };
    std::vector<Level> levels;
    for (int l = 0; l < cfg.pyramid_levels; ++l) {
        const double factor = std::pow(cfg.pyramid_scale, l);
        GrayImage li = l == 0 ? img : resample_bilinear(img, 1.0 / factor);
        if (li.width < 2 * margin + 3 || li.height < 2 * margin + 3) break;
        levels.push_back({std::move(li), factor});
    }

    // largest-remainder split of the feature budget by level area
    double total_area = 0.0;
    for (const auto& lv : levels) total_area += static_cast<double>(lv.image.width) * lv.image.height;
    std::vector<int> budget(levels.size(), 0);
    std::vector<std::pair<double, size_t>> remainders;
    int assigned = 0;
    for (size_t l = 0; l < levels.size(); ++l) {
        const double share = cfg.n_features *
                             (static_cast<double>(levels[l].image.width) * levels[l].image.height) /
                             total_area;
        budget[l] = static_cast<int>(std::floor(share));
        assigned += budget[l];
        remainders.push_back({share - budget[l], l});
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int i = 0; i < cfg.n_features - assigned && i < static_cast<int>(remainders.size()); ++i)
        ++budget[remainders[static_cast<size_t>(i)].second];

    struct Entry {
        Keypoint kp;
        Descriptor desc;
    };
    std::vector<Entry> pool;
    std::vector<double> score_map(static_cast<size_t>(img.width) * img.height,
                                  -std::numeric_limits<double>::infinity());
    for (size_t l = 0; l < levels.size(); ++l) {
        const GrayImage& li = levels[l].image;
        auto corners = fast_detect(li, cfg.fast_threshold);

        // 3x3 non-max suppression on the FAST score; ties keep the
        // lexicographically first corner
        std::vector<size_t> touched;
        touched.reserve(corners.size());
        for (const FastCorner& c : corners) {
            const size_t idx = static_cast<size_t>(c.y) * li.width + c.x;
            score_map[idx] = c.score;
            touched.push_back(idx);
        }
        std::erase_if(corners, [&](const FastCorner& c) {
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const double n = score_map[static_cast<size_t>(c.y + dy) * li.width + c.x + dx];
                    if (n > c.score) return true;
                    if (n == c.score && (dy < 0 || (dy == 0 && dx < 0))) return true;
                }
            return false;
        });
        // clear only the touched cells for the next level
        for (const size_t idx : touched)
            score_map[idx] = -std::numeric_limits<double>::infinity();

        std::erase_if(corners, [&](const FastCorner& c) {
            return c.x < margin || c.y < margin || c.x >= li.width - margin ||
                   c.y >= li.height - margin;
        });
        const auto ranked = harris_rank(li, corners, budget[l], cfg.harris_k);
        if (ranked.empty()) continue;
        const GrayImage smoothed = gaussian_blur(li, 2.0);
        for (const RankedCorner& rc : ranked) {
            Keypoint kp;
            kp.x = rc.x;  // level frame while describing
            kp.y = rc.y;
            kp.orientation_deg = orientation_centroid(li, rc.x, rc.y, cfg.centroid_radius);
            kp.response = rc.harris_score;
            kp.octave = static_cast<int>(l);
            kp.scale = levels[l].factor;
            Descriptor d = brief_describe(smoothed, kp, pattern);
            kp.x = rc.x * levels[l].factor;
            kp.y = rc.y * levels[l].factor;
            pool.push_back({kp, std::move(d)});
        }
    }

    std::sort(pool.begin(), pool.end(), [](const Entry& a, const Entry& b) {
        if (a.kp.response != b.kp.response) return a.kp.response > b.kp.response;
        if (a.kp.octave != b.kp.octave) return a.kp.octave < b.kp.octave;
        if (a.kp.y != b.kp.y) return a.kp.y < b.kp.y;
        return a.kp.x < b.kp.x;
    });
    std::vector<Keypoint> kps;
    std::vector<Descriptor> descs;
    kps.reserve(pool.size());
    descs.reserve(pool.size());
    for (auto& e : pool) {
        kps.push_back(e.kp);
        descs.push_back(std::move(e.desc));
    }
    return {std::move(kps), std::move(descs)};
}

}  // namespace featbench::orb
