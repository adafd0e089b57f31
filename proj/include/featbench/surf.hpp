#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "featbench/image.hpp"
#include "featbench/keypoint.hpp"

namespace featbench::surf {

struct SurfConfig {
    int octaves = 4;
    int levels_per_octave = 4;
    int base_filter = 9;               // smallest box filter, odd
    double hessian_threshold = 0.002;  // on [0,1]-normalized intensities
    double cross_weight = 0.9;         // weight on Dxy in the determinant
};

struct HessianResponse {
    double det = 0.0;
    int trace_sign = 0;  // sign(Dxx + Dyy)
    double dxx = 0.0;    // normalized derivative responses, kept for
    double dyy = 0.0;    // diagnostics and oracle checks
    double dxy = 0.0;
};

/// Box-filter second derivatives at (x,y) for one filter size. Box sums
/// are exact; each derivative is normalized by filter_size^2 and by 255 so
/// the determinant lives on the [0,1] intensity scale.
inline HessianResponse hessian_response(const IntegralImage& ii, int x, int y, int filter_size,
                                        double cross_weight = 0.9) {
    const int L = filter_size;
    if (L < 9 || L % 2 == 0 || L % 3 != 0)
        throw std::invalid_argument("hessian_response: filter size must be odd, >= 9, divisible by 3");
    const int b = (L - 1) / 2;
    const int l = L / 3;
    if (x - b < 0 || y - b < 0 || x + b >= ii.width || y + b >= ii.height)
        throw std::out_of_range("hessian_response: filter footprint out of bounds");

    const int lh = (l - 1) / 2;  // half of a lobe, lobes are odd
    const double dxx_raw = box_sum(ii, x - b, y - l + 1, x + b, y + l - 1) -
                           3.0 * box_sum(ii, x - lh, y - l + 1, x + lh, y + l - 1);
    const double dyy_raw = box_sum(ii, x - l + 1, y - b, x + l - 1, y + b) -
                           3.0 * box_sum(ii, x - l + 1, y - lh, x + l - 1, y + lh);
    const double dxy_raw = box_sum(ii, x + 1, y - l, x + l, y - 1) +
                           box_sum(ii, x - l, y + 1, x - 1, y + l) -
                           box_sum(ii, x - l, y - l, x - 1, y - 1) -
                           box_sum(ii, x + 1, y + 1, x + l, y + l);

    const double norm = 1.0 / (static_cast<double>(L) * L * 255.0);
    const double dxx = dxx_raw * norm;
    const double dyy = dyy_raw * norm;
    const double dxy = dxy_raw * norm;

    HessianResponse r;
    r.dxx = dxx;
    r.dyy = dyy;
    r.dxy = dxy;
    r.det = dxx * dyy - (cross_weight * dxy) * (cross_weight * dxy);
    const double tr = dxx + dyy;
    r.trace_sign = tr > 0.0 ? 1 : (tr < 0.0 ? -1 : 0);
    return r;
}

/// Determinant lattice for one filter size, sampled every `stride` pixels.
/// Cells whose footprint leaves the image hold -inf.
struct ResponseLayer {
    int filter_size = 9;
    int stride = 1;
    int gw = 0;
    int gh = 0;
    std::vector<double> det;
    std::vector<int> sign;

    double det_at(int i, int j) const { return det[static_cast<size_t>(j) * gw + i]; }
    int sign_at(int i, int j) const { return sign[static_cast<size_t>(j) * gw + i]; }
};

struct ResponseOctave {
    int stride = 1;
    int size_step = 6;  // filter-size increment between adjacent levels
    std::vector<ResponseLayer> layers;
};

/// Filter-size ladder: 9,15,21,27 in the first octave; each next octave
/// starts at the previous octave's second size with the step doubled
/// (15,27,39,51 then 27,51,75,99 ...), so the middle levels that can hold
/// maxima never repeat a size across octaves.
inline std::vector<ResponseOctave> build_response_pyramid(const IntegralImage& ii,
                                                          const SurfConfig& cfg) {
    std::vector<ResponseOctave> pyr;
    int first = cfg.base_filter;
    for (int o = 0; o < cfg.octaves; ++o) {
        ResponseOctave oct;
        oct.stride = 1 << o;
        oct.size_step = 6 * (1 << o);
        const int gw = (ii.width - 1) / oct.stride + 1;
        const int gh = (ii.height - 1) / oct.stride + 1;
        for (int lev = 0; lev < cfg.levels_per_octave; ++lev) {
            ResponseLayer layer;
            layer.filter_size = first + lev * oct.size_step;
            layer.stride = oct.stride;
            layer.gw = gw;
            layer.gh = gh;
            layer.det.assign(static_cast<size_t>(gw) * gh,
                             -std::numeric_limits<double>::infinity());
            layer.sign.assign(static_cast<size_t>(gw) * gh, 0);
            const int b = (layer.filter_size - 1) / 2;
            for (int j = 0; j < gh; ++j) {
                const int y = j * oct.stride;
                if (y - b < 0 || y + b >= ii.height) continue;
                for (int i = 0; i < gw; ++i) {
                    const int x = i * oct.stride;
                    if (x - b < 0 || x + b >= ii.width) continue;
                    const auto r = hessian_response(ii, x, y, layer.filter_size, cfg.cross_weight);
                    layer.det[static_cast<size_t>(j) * gw + i] = r.det;
                    layer.sign[static_cast<size_t>(j) * gw + i] = r.trace_sign;
                }
            }
            oct.layers.push_back(std::move(layer));
        }
        first = oct.layers[1].filter_size;
        pyr.push_back(std::move(oct));
    }
    return pyr;
}

/// A lattice cell strictly above its 26 neighbors and above threshold.
struct LatticeMaximum {
    int octave = 0;
    int level = 0;  // middle level index within the octave
    int i = 0;
    int j = 0;
};

inline std::vector<LatticeMaximum> find_lattice_maxima(const std::vector<ResponseOctave>& pyr,
                                                       double threshold) {
    std::vector<LatticeMaximum> out;
    for (size_t o = 0; o < pyr.size(); ++o) {
        const auto& oct = pyr[o];
        for (int lev = 1; lev + 1 < static_cast<int>(oct.layers.size()); ++lev) {
            const ResponseLayer& lm = oct.layers[static_cast<size_t>(lev) - 1];
            const ResponseLayer& l0 = oct.layers[static_cast<size_t>(lev)];
            const ResponseLayer& lp = oct.layers[static_cast<size_t>(lev) + 1];
            for (int j = 1; j < l0.gh - 1; ++j) {
                for (int i = 1; i < l0.gw - 1; ++i) {
                    const double v = l0.det_at(i, j);
                    if (!(v > threshold)) continue;
                    bool is_max = true;
                    for (int dj = -1; dj <= 1 && is_max; ++dj) {
                        for (int di = -1; di <= 1; ++di) {
                            for (const ResponseLayer* pl : {&lm, &l0, &lp}) {
                                if (pl == &l0 && di == 0 && dj == 0) continue;
                                if (pl->det_at(i + di, j + dj) >= v) {
                                    is_max = false;
                                    break;
                                }
                            }
                            if (!is_max) break;
                        }
                    }
                    if (is_max)
                        out.push_back({static_cast<int>(o), lev, i, j});
                }
            }
        }
    }
    return out;
}

namespace detail {

/// One Newton step of quadratic interpolation across (x, y, size).
/// Returns false (drop the candidate) when the offset leaves the cell.
inline bool interpolate_maximum(const ResponseOctave& oct, const LatticeMaximum& m,
                                double out_offset[3]) {
    auto D = [&](int lev, int i, int j) {
        return oct.layers[static_cast<size_t>(lev)].det_at(i, j);
    };
    const int lev = m.level, i = m.i, j = m.j;
    const double c = D(lev, i, j);
    const double gx = (D(lev, i + 1, j) - D(lev, i - 1, j)) / 2.0;
    const double gy = (D(lev, i, j + 1) - D(lev, i, j - 1)) / 2.0;
    const double gs = (D(lev + 1, i, j) - D(lev - 1, i, j)) / 2.0;
    const double hxx = D(lev, i + 1, j) - 2 * c + D(lev, i - 1, j);
    const double hyy = D(lev, i, j + 1) - 2 * c + D(lev, i, j - 1);
    const double hss = D(lev + 1, i, j) - 2 * c + D(lev - 1, i, j);
    const double hxy = (D(lev, i + 1, j + 1) - D(lev, i - 1, j + 1) - D(lev, i + 1, j - 1) +
                        D(lev, i - 1, j - 1)) / 4.0;
    const double hxs = (D(lev + 1, i + 1, j) - D(lev + 1, i - 1, j) - D(lev - 1, i + 1, j) +
                        D(lev - 1, i - 1, j)) / 4.0;
    const double hys = (D(lev + 1, i, j + 1) - D(lev + 1, i, j - 1) - D(lev - 1, i, j + 1) +
                        D(lev - 1, i, j - 1)) / 4.0;
    if (!std::isfinite(gx) || !std::isfinite(gy) || !std::isfinite(gs) || !std::isfinite(hxx) ||
        !std::isfinite(hyy) || !std::isfinite(hss) || !std::isfinite(hxy) ||
        !std::isfinite(hxs) || !std::isfinite(hys))
        return false;

    const double mtx[3][3] = {{hxx, hxy, hxs}, {hxy, hyy, hys}, {hxs, hys, hss}};
    const double det = mtx[0][0] * (mtx[1][1] * mtx[2][2] - mtx[1][2] * mtx[2][1]) -
                       mtx[0][1] * (mtx[1][0] * mtx[2][2] - mtx[1][2] * mtx[2][0]) +
                       mtx[0][2] * (mtx[1][0] * mtx[2][1] - mtx[1][1] * mtx[2][0]);
    if (std::abs(det) < 1e-30) return false;
    const double b[3] = {-gx, -gy, -gs};
    for (int col = 0; col < 3; ++col) {
        double mm[3][3];
        for (int r = 0; r < 3; ++r)
            for (int cc = 0; cc < 3; ++cc) mm[r][cc] = cc == col ? b[r] : mtx[r][cc];
        const double dcol = mm[0][0] * (mm[1][1] * mm[2][2] - mm[1][2] * mm[2][1]) -
                            mm[0][1] * (mm[1][0] * mm[2][2] - mm[1][2] * mm[2][0]) +
                            mm[0][2] * (mm[1][0] * mm[2][1] - mm[1][1] * mm[2][0]);
        out_offset[col] = dcol / det;
    }
    return std::abs(out_offset[0]) <= 0.5 && std::abs(out_offset[1]) <= 0.5 &&
           std::abs(out_offset[2]) <= 0.5;
}

}  // namespace detail

/// Hessian keypoints: lattice maxima above threshold, refined across
/// (x, y, size); scale = 1.2 * size / 9, Laplacian sign kept for matching.
inline std::vector<Keypoint> surf_detect(const GrayImage& img, const SurfConfig& cfg = {}) {
    if (img.width < cfg.base_filter || img.height < cfg.base_filter)
        throw std::invalid_argument("surf_detect: image smaller than the base filter");
    const IntegralImage ii = integral(img);
    const auto pyr = build_response_pyramid(ii, cfg);
    const auto maxima = find_lattice_maxima(pyr, cfg.hessian_threshold);

    std::vector<Keypoint> out;
    for (const auto& m : maxima) {
        const auto& oct = pyr[static_cast<size_t>(m.octave)];
        double offset[3];
        if (!detail::interpolate_maximum(oct, m, offset)) continue;
        const ResponseLayer& layer = oct.layers[static_cast<size_t>(m.level)];
        Keypoint kp;
        kp.x = (m.i + offset[0]) * oct.stride;
        kp.y = (m.j + offset[1]) * oct.stride;
        const double size = layer.filter_size + offset[2] * oct.size_step;
        kp.scale = 1.2 * size / 9.0;
        kp.response = layer.det_at(m.i, m.j);
        kp.octave = m.octave;
        kp.laplacian_sign = layer.sign_at(m.i, m.j);
        out.push_back(kp);
    }
    std::sort(out.begin(), out.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    return out;
}

namespace detail {

/// Haar responses over a size x size box (size even): x flavor is right
/// half minus left half, y flavor is bottom half minus top half. Returns
/// false when the box leaves the image.
inline bool haar_xy(const IntegralImage& ii, int col, int row, int size, double& hx, double& hy) {
    const int half = size / 2;
    if (col - half < 0 || row - half < 0 || col + half - 1 >= ii.width ||
        row + half - 1 >= ii.height)
        return false;
    hx = box_sum(ii, col, row - half, col + half - 1, row + half - 1) -
         box_sum(ii, col - half, row - half, col - 1, row + half - 1);
    hy = box_sum(ii, col - half, row, col + half - 1, row + half - 1) -
         box_sum(ii, col - half, row - half, col + half - 1, row - 1);
    return true;
}

}  // namespace detail

/// Dominant direction from Gaussian-weighted Haar responses inside a
/// 6*scale disc: a pi/3-wide window slides over the response angles and
/// the longest summed vector wins (ties to the smaller angle).
inline double surf_orientation(const IntegralImage& ii, const Keypoint& kp) {
    const int s = std::max(1, static_cast<int>(std::lround(kp.scale)));
    const int x0 = static_cast<int>(std::lround(kp.x));
    const int y0 = static_cast<int>(std::lround(kp.y));

    std::vector<double> rx, ry, ang;
    for (int i = -6; i <= 6; ++i) {
        for (int j = -6; j <= 6; ++j) {
            if (i * i + j * j >= 36) continue;
            double hx, hy;
            if (!detail::haar_xy(ii, x0 + i * s, y0 + j * s, 4 * s, hx, hy)) continue;
            const double g = std::exp(-(i * i + j * j) / 8.0);  // sigma = 2 in sample units
            rx.push_back(g * hx);
            ry.push_back(g * hy);
            double a = std::atan2(g * hy, g * hx);
            if (a < 0.0) a += 2.0 * std::numbers::pi;
            ang.push_back(a);
        }
    }
    if (rx.empty()) return 0.0;

    const double two_pi = 2.0 * std::numbers::pi;
    const double window = std::numbers::pi / 3.0;
    double best_len = -1.0, best_ang = 0.0;
    for (int step = 0; step < 64; ++step) {
        const double w0 = step * two_pi / 64.0;
        double sx = 0.0, sy = 0.0;
        for (size_t k = 0; k < ang.size(); ++k) {
            double rel = ang[k] - w0;
            if (rel < 0.0) rel += two_pi;
            if (rel < window) {
                sx += rx[k];
                sy += ry[k];
            }
        }
        const double len = sx * sx + sy * sy;
        if (len <= 0.0) continue;
        double a = std::atan2(sy, sx);
        if (a < 0.0) a += two_pi;
        if (len > best_len || (len == best_len && a < best_ang)) {
            best_len = len;
            best_ang = a;
        }
    }
    if (best_len < 0.0) return 0.0;
    return best_ang * 180.0 / std::numbers::pi;
}

/// 64-d descriptor: oriented 20*scale window, 4x4 subregions, each
/// contributing (sum dx, sum dy, sum |dx|, sum |dy|) from 5x5
/// Gaussian-weighted Haar samples in rotated coordinates. Keypoints whose
/// window leaves the image are removed from `kps` rather than padded.
inline std::vector<Descriptor> surf_describe(const IntegralImage& ii, std::vector<Keypoint>& kps) {
    std::vector<Descriptor> descs;
    std::vector<Keypoint> kept;
    for (const Keypoint& kp : kps) {
        const double s = kp.scale;
        const int si = std::max(1, static_cast<int>(std::lround(s)));
        const double theta = kp.orientation_deg * std::numbers::pi / 180.0;
        const double ct = std::cos(theta);
        const double st = std::sin(theta);

        std::vector<float> vec(64, 0.0f);
        double sums[64] = {0.0};
        bool ok = true;
        for (int sj = 0; sj < 4 && ok; ++sj) {
            for (int si_ = 0; si_ < 4 && ok; ++si_) {
                double sdx = 0.0, sdy = 0.0, sadx = 0.0, sady = 0.0;
                for (int l = 0; l < 5 && ok; ++l) {
                    for (int k = 0; k < 5; ++k) {
                        const double u = -10.0 + 5.0 * si_ + k + 0.5;
                        const double v = -10.0 + 5.0 * sj + l + 0.5;
                        const double px = kp.x + (u * ct - v * st) * s;
                        const double py = kp.y + (u * st + v * ct) * s;
                        double hx, hy;
                        if (!detail::haar_xy(ii, static_cast<int>(std::lround(px)),
                                             static_cast<int>(std::lround(py)), 2 * si, hx, hy)) {
                            ok = false;
                            break;
                        }
                        const double g = std::exp(-(u * u + v * v) / (2.0 * 3.3 * 3.3));
                        const double dX = g * hx;
                        const double dY = g * hy;
                        const double dx = ct * dX + st * dY;
                        const double dy = -st * dX + ct * dY;
                        sdx += dx;
                        sdy += dy;
                        sadx += std::abs(dx);
                        sady += std::abs(dy);
                    }
                }
                const int base = (sj * 4 + si_) * 4;
                sums[base] = sdx;
                sums[base + 1] = sdy;
                sums[base + 2] = sadx;
                sums[base + 3] = sady;
            }
        }
        if (!ok) continue;

        double norm = 0.0;
        for (double x : sums) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 1e-12)
            for (int i = 0; i < 64; ++i) vec[static_cast<size_t>(i)] = static_cast<float>(sums[i] / norm);
        descs.push_back(Descriptor::make_real(std::move(vec)));
        kept.push_back(kp);
    }
    kps = std::move(kept);
    return descs;
}

/// Detect + orient + describe, index-aligned, sorted by descending
/// response.
inline std::pair<std::vector<Keypoint>, std::vector<Descriptor>> surf_run(
    const GrayImage& img, const SurfConfig& cfg = {}) {
    const IntegralImage ii = integral(img);
    auto kps = surf_detect(img, cfg);
    for (Keypoint& kp : kps) kp.orientation_deg = surf_orientation(ii, kp);
    auto descs = surf_describe(ii, kps);
    return {std::move(kps), std::move(descs)};
}

}  // namespace featbench::surf
