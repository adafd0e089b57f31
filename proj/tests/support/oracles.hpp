#pragma once

// Independent brute-force reference implementations used to validate the
// fast paths. Everything here deliberately avoids the library's integral
// images, separable filters and bit tricks.

#include <cmath>
#include <vector>

#include "featbench/image.hpp"
#include "featbench/keypoint.hpp"
#include "featbench/sift.hpp"

namespace oracles {

/// Plain pixel-loop rectangle sum (inclusive bounds).
inline double box_sum_loop(const featbench::GrayImage& img, int x0, int y0, int x1, int y1) {
    double s = 0.0;
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) s += img.at(x, y);
    return s;
}

/// Dense 2-D convolution with a full (2r+1)^2 Gaussian built from the same
/// radius rule, replicate borders.
inline featbench::GrayImage gaussian_blur_dense(const featbench::GrayImage& img, double sigma) {
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<size_t>(2 * r + 1) * (2 * r + 1));
    double sum = 0.0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            k[static_cast<size_t>(dy + r) * (2 * r + 1) + (dx + r)] = v;
            sum += v;
        }
    for (double& v : k) v /= sum;

    featbench::GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const int sx = std::clamp(x + dx, 0, img.width - 1);
                    const int sy = std::clamp(y + dy, 0, img.height - 1);
                    acc += k[static_cast<size_t>(dy + r) * (2 * r + 1) + (dx + r)] * img.at(sx, sy);
                }
            out.at(x, y) = acc;
        }
    return out;
}

/// Exhaustive 26-neighbor scan over a DoG scale space; mirrors the
/// documented extremum definition with plain triple loops.
inline std::vector<featbench::sift::Candidate> dog_extrema_scan(
    const featbench::sift::ScaleSpace& ss) {
    std::vector<featbench::sift::Candidate> out;
    for (size_t o = 0; o < ss.octaves.size(); ++o) {
        const auto& dog = ss.octaves[o].dog;
        const int s = ss.scales_per_octave;
        for (int L = 1; L <= s; ++L) {
            const int w = dog[static_cast<size_t>(L)].width;
            const int h = dog[static_cast<size_t>(L)].height;
            for (int y = 1; y < h - 1; ++y)
                for (int x = 1; x < w - 1; ++x) {
                    const double v = dog[static_cast<size_t>(L)].at(x, y);
                    int greater = 0, less = 0;
                    for (int dl = -1; dl <= 1; ++dl)
                        for (int dy = -1; dy <= 1; ++dy)
                            for (int dx = -1; dx <= 1; ++dx) {
                                if (dl == 0 && dy == 0 && dx == 0) continue;
                                const double n =
                                    dog[static_cast<size_t>(L + dl)].at(x + dx, y + dy);
                                if (v > n) ++greater;
                                if (v < n) ++less;
                            }
                    if (greater == 26 || less == 26)
                        out.push_back({static_cast<int>(o), L, x, y});
                }
        }
    }
    return out;
}

/// FAST-9 predicate checked literally: some arc of >= 9 contiguous circle
/// pixels all brighter than p+t or all darker than p-t.
inline bool fast_is_corner_oracle(const featbench::GrayImage& img, int x, int y, int t) {
    static const int circle[16][2] = {{0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0},  {3, 1},
                                      {2, 2},  {1, 3},  {0, 3},  {-1, 3}, {-2, 2}, {-3, 1},
                                      {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}};
    const double p = img.at(x, y);
    for (int start = 0; start < 16; ++start) {
        bool all_bright = true, all_dark = true;
        for (int k = 0; k < 9; ++k) {
            const int idx = (start + k) % 16;
            const double v = img.at(x + circle[idx][0], y + circle[idx][1]);
            if (!(v > p + t)) all_bright = false;
            if (!(v < p - t)) all_dark = false;
            if (!all_bright && !all_dark) break;
        }
        if (all_bright || all_dark) return true;
    }
    return false;
}

/// Bit-by-bit Hamming distance.
inline int hamming_loop(const featbench::Descriptor& a, const featbench::Descriptor& b) {
    int d = 0;
    for (int i = 0; i < 256; ++i)
        if (a.bit(i) != b.bit(i)) ++d;
    return d;
}

/// Harris score from an explicitly accumulated structure tensor over the
/// 7x7 window with 3x3 Sobel gradients.
inline double harris_score_oracle(const featbench::GrayImage& img, int x, int y, double k = 0.04) {
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (int dy = -3; dy <= 3; ++dy)
        for (int dx = -3; dx <= 3; ++dx) {
            const int px = x + dx, py = y + dy;
            const double gx = img.at(px + 1, py - 1) + 2.0 * img.at(px + 1, py) +
                              img.at(px + 1, py + 1) - img.at(px - 1, py - 1) -
                              2.0 * img.at(px - 1, py) - img.at(px - 1, py + 1);
            const double gy = img.at(px - 1, py + 1) + 2.0 * img.at(px, py + 1) +
                              img.at(px + 1, py + 1) - img.at(px - 1, py - 1) -
                              2.0 * img.at(px, py - 1) - img.at(px + 1, py - 1);
            sxx += gx * gx;
            syy += gy * gy;
            sxy += gx * gy;
        }
    return sxx * syy - sxy * sxy - k * (sxx + syy) * (sxx + syy);
}

/// SURF box-filter masks built from the lobe geometry as 2-D weight
/// arrays, applied with a pixel loop. Returns raw weighted sums (no
/// normalization).
struct SurfMaskSums {
    double dxx, dyy, dxy;
};

inline SurfMaskSums surf_mask_sums(const featbench::GrayImage& img, int x, int y, int L) {
    const int b = (L - 1) / 2;
    const int l = L / 3;
    const int lh = (l - 1) / 2;
    double dxx = 0.0, dyy = 0.0, dxy = 0.0;
    for (int dy = -b; dy <= b; ++dy)
        for (int dx = -b; dx <= b; ++dx) {
            const double v = img.at(x + dx, y + dy);
            // Dxx: rows within +-(l-1), full width +1, middle column strip -2
            if (std::abs(dy) <= l - 1) {
                double wgt = 1.0;
                if (std::abs(dx) <= lh) wgt = -2.0;
                dxx += wgt * v;
            }
            // Dyy: transpose of Dxx
            if (std::abs(dx) <= l - 1) {
                double wgt = 1.0;
                if (std::abs(dy) <= lh) wgt = -2.0;
                dyy += wgt * v;
            }
            // Dxy: four l x l quadrant boxes with a one-pixel cross gap
            if (dx >= 1 && dx <= l && dy >= -l && dy <= -1) dxy += v;        // top-right
            if (dx >= -l && dx <= -1 && dy >= 1 && dy <= l) dxy += v;        // bottom-left
            if (dx >= -l && dx <= -1 && dy >= -l && dy <= -1) dxy -= v;      // top-left
            if (dx >= 1 && dx <= l && dy >= 1 && dy <= l) dxy -= v;          // bottom-right
        }
    return {dxx, dyy, dxy};
}

}  // namespace oracles
