#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "featbench/image.hpp"
#include "featbench/keypoint.hpp"

namespace featbench::sift {

struct SiftConfig {
    int octaves = 4;
    int scales_per_octave = 3;         // s: s+3 Gaussian levels, s+2 DoG levels
    double base_sigma = 1.6;
    double contrast_threshold = 0.03;  // on [0,1]-normalized intensities
    double edge_ratio = 10.0;
    int orientation_bins = 36;
    // descriptor geometry is fixed: 4x4 cells x 8 orientation bins = 128
};

/// Unconstrained real raster used inside the pipeline ([0,1] Gaussian
/// levels, signed DoG levels).
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> v;

    Plane() = default;
    Plane(int w, int h) : width(w), height(h), v(static_cast<size_t>(w) * h, 0.0) {}
    double at(int x, int y) const { return v[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return v[static_cast<size_t>(y) * width + x]; }
};

struct Octave {
    std::vector<Plane> gauss;   // scales_per_octave + 3
    std::vector<Plane> dog;     // scales_per_octave + 2
    std::vector<double> sigma;  // octave-relative sigma of each Gaussian level
};

struct ScaleSpace {
    std::vector<Octave> octaves;
    int scales_per_octave = 3;
    double base_sigma = 1.6;
    int src_width = 0;
    int src_height = 0;
};

/// Discrete extremum candidate: sample position in octave-local grid
/// coordinates at a given DoG level.
struct Candidate {
    int octave = 0;
    int level = 0;  // DoG level, in [1, s]
    int x = 0;
    int y = 0;
};

namespace detail {

inline Plane blur_plane(const Plane& p, double sigma) {
    Plane out(p.width, p.height);
    out.v = featbench::detail::convolve_separable(p.v, p.width, p.height,
                                                  featbench::detail::gaussian_kernel(sigma));
    return out;
}

inline Plane downsample_plane(const Plane& p) {
    Plane out(p.width / 2, p.height / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) out.at(x, y) = p.at(2 * x, 2 * y);
    return out;
}

// The raw input is treated as already carrying this much blur.
constexpr double kAssumedInputSigma = 0.5;

}  // namespace detail

/// Gaussian/DoG pyramid on [0,1]-normalized intensities. Every Gaussian
/// level is blurred directly from its octave base so DoG levels equal the
/// subtraction of two independently blurred images bit-for-bit.
inline ScaleSpace build_scale_space(const GrayImage& img, const SiftConfig& cfg) {
    const int s = cfg.scales_per_octave;
    if (cfg.octaves < 1 || s < 1) throw std::invalid_argument("build_scale_space: bad config");
    if ((img.width >> (cfg.octaves - 1)) < 8 || (img.height >> (cfg.octaves - 1)) < 8)
        throw std::invalid_argument("build_scale_space: image too small for octave count");

    ScaleSpace ss;
    ss.scales_per_octave = s;
    ss.base_sigma = cfg.base_sigma;
    ss.src_width = img.width;
    ss.src_height = img.height;

    Plane base(img.width, img.height);
    for (size_t i = 0; i < img.pixels.size(); ++i) base.v[i] = img.pixels[i] / 255.0;
    const double d0 = std::sqrt(std::max(
        cfg.base_sigma * cfg.base_sigma - detail::kAssumedInputSigma * detail::kAssumedInputSigma,
        1e-8));
    base = detail::blur_plane(base, d0);

    for (int o = 0; o < cfg.octaves; ++o) {
        Octave oct;
        oct.gauss.resize(static_cast<size_t>(s) + 3);
        oct.sigma.resize(static_cast<size_t>(s) + 3);
        oct.gauss[0] = base;
        oct.sigma[0] = cfg.base_sigma;
        for (int i = 1; i < s + 3; ++i) {
            const double sig = cfg.base_sigma * std::pow(2.0, static_cast<double>(i) / s);
            oct.sigma[static_cast<size_t>(i)] = sig;
            const double delta = std::sqrt(sig * sig - cfg.base_sigma * cfg.base_sigma);
            oct.gauss[static_cast<size_t>(i)] = detail::blur_plane(base, delta);
        }
        oct.dog.resize(static_cast<size_t>(s) + 2);
        for (int i = 0; i < s + 2; ++i) {
            Plane d(base.width, base.height);
            const Plane& hi = oct.gauss[static_cast<size_t>(i) + 1];
            const Plane& lo = oct.gauss[static_cast<size_t>(i)];
            for (size_t px = 0; px < d.v.size(); ++px) d.v[px] = hi.v[px] - lo.v[px];
            oct.dog[static_cast<size_t>(i)] = std::move(d);
        }
        if (o + 1 < cfg.octaves) base = detail::downsample_plane(oct.gauss[static_cast<size_t>(s)]);
        ss.octaves.push_back(std::move(oct));
    }
    return ss;
}

/// Every interior DoG sample strictly above or strictly below all 26
/// space/scale neighbors, scanned on levels 1..s.
inline std::vector<Candidate> detect_extrema(const ScaleSpace& ss, const SiftConfig& cfg) {
    std::vector<Candidate> out;
    const int s = cfg.scales_per_octave;
    for (size_t o = 0; o < ss.octaves.size(); ++o) {
        const auto& dog = ss.octaves[o].dog;
        const int w = dog[0].width;
        const int h = dog[0].height;
        for (int L = 1; L <= s; ++L) {
            const Plane& dm = dog[static_cast<size_t>(L) - 1];
            const Plane& d0 = dog[static_cast<size_t>(L)];
            const Plane& dp = dog[static_cast<size_t>(L) + 1];
            for (int y = 1; y < h - 1; ++y) {
                for (int x = 1; x < w - 1; ++x) {
                    const double v = d0.at(x, y);
                    bool is_max = true, is_min = true;
                    for (int dy = -1; dy <= 1 && (is_max || is_min); ++dy) {
                        for (int dx = -1; dx <= 1; ++dx) {
                            for (const Plane* pl : {&dm, &d0, &dp}) {
                                if (pl == &d0 && dx == 0 && dy == 0) continue;
                                const double n = pl->at(x + dx, y + dy);
                                if (n >= v) is_max = false;
                                if (n <= v) is_min = false;
                            }
                            if (!is_max && !is_min) break;
                        }
                    }
                    if (is_max || is_min)
                        out.push_back({static_cast<int>(o), L, x, y});
                }
            }
        }
    }
    return out;
}

namespace detail {

struct Grad3 {
    double gx, gy, gs;
};
struct Hess3 {
    double xx, yy, ss, xy, xs, ys;
};

inline Grad3 dog_gradient(const Octave& oct, int L, int x, int y) {
    const auto& d = oct.dog;
    return {(d[L].at(x + 1, y) - d[L].at(x - 1, y)) / 2.0,
            (d[L].at(x, y + 1) - d[L].at(x, y - 1)) / 2.0,
            (d[L + 1].at(x, y) - d[L - 1].at(x, y)) / 2.0};
}

inline Hess3 dog_hessian(const Octave& oct, int L, int x, int y) {
    const auto& d = oct.dog;
    const double c = d[L].at(x, y);
    Hess3 h;
    h.xx = d[L].at(x + 1, y) - 2.0 * c + d[L].at(x - 1, y);
    h.yy = d[L].at(x, y + 1) - 2.0 * c + d[L].at(x, y - 1);
    h.ss = d[L + 1].at(x, y) - 2.0 * c + d[L - 1].at(x, y);
    h.xy = (d[L].at(x + 1, y + 1) - d[L].at(x - 1, y + 1) - d[L].at(x + 1, y - 1) +
            d[L].at(x - 1, y - 1)) / 4.0;
    h.xs = (d[L + 1].at(x + 1, y) - d[L + 1].at(x - 1, y) - d[L - 1].at(x + 1, y) +
            d[L - 1].at(x - 1, y)) / 4.0;
    h.ys = (d[L + 1].at(x, y + 1) - d[L + 1].at(x, y - 1) - d[L - 1].at(x, y + 1) +
            d[L - 1].at(x, y - 1)) / 4.0;
    return h;
}

/// Solves H * delta = -g. Returns false when H is numerically singular.
inline bool solve_newton(const Hess3& h, const Grad3& g, double out[3]) {
    const double m[3][3] = {{h.xx, h.xy, h.xs}, {h.xy, h.yy, h.ys}, {h.xs, h.ys, h.ss}};
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (std::abs(det) < 1e-20) return false;
    const double b[3] = {-g.gx, -g.gy, -g.gs};
    for (int col = 0; col < 3; ++col) {
        double mm[3][3];
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) mm[r][c] = c == col ? b[r] : m[r][c];
        const double dcol = mm[0][0] * (mm[1][1] * mm[2][2] - mm[1][2] * mm[2][1]) -
                            mm[0][1] * (mm[1][0] * mm[2][2] - mm[1][2] * mm[2][0]) +
                            mm[0][2] * (mm[1][0] * mm[2][1] - mm[1][1] * mm[2][0]);
        out[col] = dcol / det;
    }
    return true;
}

/// True when the 2x2 spatial Hessian at the sample passes the edge-ratio
/// test (curvature not dominated by one direction).
inline bool passes_edge_test(const Octave& oct, int L, int x, int y, double edge_ratio) {
    const auto& d = oct.dog;
    const double c = d[L].at(x, y);
    const double dxx = d[L].at(x + 1, y) - 2.0 * c + d[L].at(x - 1, y);
    const double dyy = d[L].at(x, y + 1) - 2.0 * c + d[L].at(x, y - 1);
    const double dxy = (d[L].at(x + 1, y + 1) - d[L].at(x - 1, y + 1) -
                        d[L].at(x + 1, y - 1) + d[L].at(x - 1, y - 1)) / 4.0;
    const double tr = dxx + dyy;
    const double det = dxx * dyy - dxy * dxy;
    if (det <= 0.0) return false;
    const double r = edge_ratio;
    return tr * tr * r < det * (r + 1.0) * (r + 1.0);
}

}  // namespace detail

/// Quadratic (3-D Taylor) subpixel refinement with at most 5 Newton steps;
/// candidates are rejected for low contrast, edge response, or
/// non-convergence.
inline std::vector<Keypoint> refine_keypoints(const std::vector<Candidate>& cands,
                                              const ScaleSpace& ss, const SiftConfig& cfg) {
    std::vector<Keypoint> out;
    const int s = ss.scales_per_octave;
    for (const Candidate& c : cands) {
        const Octave& oct = ss.octaves[static_cast<size_t>(c.octave)];
        const int w = oct.dog[0].width;
        const int h = oct.dog[0].height;
        int x = c.x, y = c.y, L = c.level;
        double delta[3] = {0, 0, 0};
        bool converged = false;
        for (int iter = 0; iter < 5; ++iter) {
            const auto g = detail::dog_gradient(oct, L, x, y);
            const auto hs = detail::dog_hessian(oct, L, x, y);
            if (!detail::solve_newton(hs, g, delta)) break;
            if (std::abs(delta[0]) <= 0.5 && std::abs(delta[1]) <= 0.5 &&
                std::abs(delta[2]) <= 0.5) {
                converged = true;
                break;
            }
            x += delta[0] > 0.5 ? 1 : (delta[0] < -0.5 ? -1 : 0);
            y += delta[1] > 0.5 ? 1 : (delta[1] < -0.5 ? -1 : 0);
            L += delta[2] > 0.5 ? 1 : (delta[2] < -0.5 ? -1 : 0);
            if (x < 1 || x >= w - 1 || y < 1 || y >= h - 1 || L < 1 || L > s) break;
        }
        if (!converged) continue;

        const auto g = detail::dog_gradient(oct, L, x, y);
        const double refined =
            oct.dog[static_cast<size_t>(L)].at(x, y) +
            0.5 * (g.gx * delta[0] + g.gy * delta[1] + g.gs * delta[2]);
        if (std::abs(refined) < cfg.contrast_threshold) continue;
        if (!detail::passes_edge_test(oct, L, x, y, cfg.edge_ratio)) continue;

        const double pix = static_cast<double>(1 << c.octave);
        Keypoint kp;
        kp.x = (x + delta[0]) * pix;
        kp.y = (y + delta[1]) * pix;
        if (kp.x < 0.0 || kp.x >= ss.src_width || kp.y < 0.0 || kp.y >= ss.src_height) continue;
        kp.scale = cfg.base_sigma *
                   std::pow(2.0, c.octave + (static_cast<double>(L) + delta[2]) / s);
        kp.response = std::abs(refined);
        kp.octave = c.octave;
        out.push_back(kp);
    }
    return out;
}

namespace detail {

/// Octave-local view of a keypoint: position and sigma divided back into
/// the octave's grid, plus the nearest Gaussian level.
struct LocalFrame {
    double x, y, sigma;
    int level;
};

inline LocalFrame local_frame(const Keypoint& kp, const ScaleSpace& ss) {
    const double pix = static_cast<double>(1 << kp.octave);
    LocalFrame f;
    f.x = kp.x / pix;
    f.y = kp.y / pix;
    f.sigma = kp.scale / pix;
    const int s = ss.scales_per_octave;
    const double level_f = s * std::log2(f.sigma / ss.base_sigma);
    f.level = std::clamp(static_cast<int>(std::lround(level_f)), 0, s + 2);
    return f;
}

}  // namespace detail

/// 36-bin gradient-orientation histogram over a Gaussian-weighted
/// neighborhood; each histogram peak within 80% of the maximum yields one
/// oriented copy of the keypoint.
inline std::vector<Keypoint> assign_orientations(const std::vector<Keypoint>& kps,
                                                 const ScaleSpace& ss, const SiftConfig& cfg) {
    std::vector<Keypoint> out;
    const int nbins = cfg.orientation_bins;
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> hist(static_cast<size_t>(nbins));
    std::vector<double> smooth(static_cast<size_t>(nbins));
    for (const Keypoint& kp : kps) {
        const auto f = detail::local_frame(kp, ss);
        const Plane& img = ss.octaves[static_cast<size_t>(kp.octave)]
                               .gauss[static_cast<size_t>(f.level)];
        const double sigma_w = 1.5 * f.sigma;
        const int radius = static_cast<int>(std::lround(3.0 * sigma_w));
        const int cx = static_cast<int>(std::lround(f.x));
        const int cy = static_cast<int>(std::lround(f.y));
        std::fill(hist.begin(), hist.end(), 0.0);

        for (int py = cy - radius; py <= cy + radius; ++py) {
            if (py < 1 || py >= img.height - 1) continue;
            for (int px = cx - radius; px <= cx + radius; ++px) {
                if (px < 1 || px >= img.width - 1) continue;
                const double gx = img.at(px + 1, py) - img.at(px - 1, py);
                const double gy = img.at(px, py + 1) - img.at(px, py - 1);
                const double mag = std::sqrt(gx * gx + gy * gy);
                double theta = std::atan2(gy, gx);
                if (theta < 0.0) theta += two_pi;
                const double ddx = px - f.x;
                const double ddy = py - f.y;
                const double wgt = std::exp(-(ddx * ddx + ddy * ddy) / (2.0 * sigma_w * sigma_w));
                // bin i is centered at i * (360/nbins)
                const int bin = static_cast<int>(std::lround(theta / two_pi * nbins)) % nbins;
                hist[static_cast<size_t>(bin)] += wgt * mag;
            }
        }

        // one pass of circular [1,4,6,4,1]/16 smoothing
        for (int i = 0; i < nbins; ++i) {
            auto H = [&](int j) { return hist[static_cast<size_t>(((j % nbins) + nbins) % nbins)]; };
            smooth[static_cast<size_t>(i)] =
                (H(i - 2) + 4.0 * H(i - 1) + 6.0 * H(i) + 4.0 * H(i + 1) + H(i + 2)) / 16.0;
        }

        const double peak = *std::max_element(smooth.begin(), smooth.end());
        bool emitted = false;
        if (peak > 0.0) {
            for (int i = 0; i < nbins; ++i) {
                const double h0 = smooth[static_cast<size_t>(i)];
                const double hm = smooth[static_cast<size_t>((i + nbins - 1) % nbins)];
                const double hp = smooth[static_cast<size_t>((i + 1) % nbins)];
                if (h0 <= hm || h0 <= hp || h0 < 0.8 * peak) continue;
                const double denom = hm - 2.0 * h0 + hp;
                const double offset = denom == 0.0 ? 0.0 : 0.5 * (hm - hp) / denom;
                double angle = (i + offset) * (360.0 / nbins);
                angle = std::fmod(angle, 360.0);
                if (angle < 0.0) angle += 360.0;
                Keypoint k2 = kp;
                k2.orientation_deg = angle;
                out.push_back(k2);
                emitted = true;
            }
        }
        if (!emitted) {
            // flat histogram: keep the keypoint with a neutral orientation
            out.push_back(kp);
        }
    }
    return out;
}

/// 4x4 spatial cells x 8 orientation bins from gradients in a rotated,
/// scale-proportional window; trilinear binning, Gaussian weighting, unit
/// normalization with a 0.2 component clamp.
inline std::vector<Descriptor> describe(const std::vector<Keypoint>& kps, const ScaleSpace& ss,
                                        const SiftConfig& cfg) {
    (void)cfg;
    constexpr int d = 4;
    constexpr int nbins = 8;
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<Descriptor> out;
    out.reserve(kps.size());

    for (const Keypoint& kp : kps) {
        const auto f = detail::local_frame(kp, ss);
        const Plane& img = ss.octaves[static_cast<size_t>(kp.octave)]
                               .gauss[static_cast<size_t>(f.level)];
        const double lambda = 3.0 * f.sigma;  // cell width in pixels
        const double theta = kp.orientation_deg * std::numbers::pi / 180.0;
        const double ct = std::cos(theta);
        const double st = std::sin(theta);
        const int radius = static_cast<int>(
            std::lround(lambda * (d + 1) * 0.5 * std::numbers::sqrt2));
        const int cx = static_cast<int>(std::lround(f.x));
        const int cy = static_cast<int>(std::lround(f.y));

        double acc[d * d * nbins] = {0.0};
        for (int py = cy - radius; py <= cy + radius; ++py) {
            if (py < 1 || py >= img.height - 1) continue;
            for (int px = cx - radius; px <= cx + radius; ++px) {
                if (px < 1 || px >= img.width - 1) continue;
                const double dx = px - f.x;
                const double dy = py - f.y;
                const double u = (ct * dx + st * dy) / lambda;
                const double v = (-st * dx + ct * dy) / lambda;
                const double uc = u + d / 2.0 - 0.5;
                const double vc = v + d / 2.0 - 0.5;
                if (uc <= -1.0 || uc >= d || vc <= -1.0 || vc >= d) continue;

                const double gx = img.at(px + 1, py) - img.at(px - 1, py);
                const double gy = img.at(px, py + 1) - img.at(px, py - 1);
                const double mag = std::sqrt(gx * gx + gy * gy);
                double phi = std::atan2(gy, gx) - theta;
                phi = std::fmod(phi, two_pi);
                if (phi < 0.0) phi += two_pi;
                const double ob = phi / two_pi * nbins;
                const double wgt = std::exp(-(u * u + v * v) / (2.0 * (d / 2.0) * (d / 2.0)));

                const int c0 = static_cast<int>(std::floor(uc));
                const int r0 = static_cast<int>(std::floor(vc));
                const int o0 = static_cast<int>(std::floor(ob));
                const double fc = uc - c0;
                const double fr = vc - r0;
                const double fo = ob - o0;
                for (int dr = 0; dr <= 1; ++dr) {
                    const int r = r0 + dr;
                    if (r < 0 || r >= d) continue;
                    for (int dc = 0; dc <= 1; ++dc) {
                        const int cc = c0 + dc;
                        if (cc < 0 || cc >= d) continue;
                        for (int doo = 0; doo <= 1; ++doo) {
                            const int o = (o0 + doo) % nbins;
                            const double w3 = wgt * mag * (dr ? fr : 1.0 - fr) *
                                              (dc ? fc : 1.0 - fc) * (doo ? fo : 1.0 - fo);
                            acc[(r * d + cc) * nbins + o] += w3;
                        }
                    }
                }
            }
        }

        // normalize-clamp-renormalize solved at its fixed point: the k
        // strongest components sit at the 0.2 cap and the rest scale so
        // the norm is exactly 1
        constexpr int dim = d * d * nbins;
        std::vector<float> vec(dim);
        double total = 0.0;
        for (int i = 0; i < dim; ++i) total += acc[i] * acc[i];
        if (total > 1e-24) {
            double sorted[dim];
            for (int i = 0; i < dim; ++i) sorted[i] = acc[i];
            std::sort(sorted, sorted + dim, std::greater<double>());
            double s = 1.0 / std::sqrt(total);
            double capped = 0.0, tail = total;
            for (int k = 0; k < dim; ++k) {
                const double remaining = 1.0 - capped;
                if (remaining <= 0.0 || tail <= 1e-24) {
                    s = 0.0;
                    break;
                }
                s = std::sqrt(remaining / tail);
                if (s * sorted[k] <= 0.2) break;
                capped += 0.04;
                tail -= sorted[k] * sorted[k];
            }
            for (int i = 0; i < dim; ++i)
                vec[static_cast<size_t>(i)] = static_cast<float>(std::min(s * acc[i], 0.2));
        }
        out.push_back(Descriptor::make_real(std::move(vec)));
    }
    return out;
}

/// Full pipeline: scale space -> extrema -> refinement -> orientations ->
/// descriptors, keypoints sorted by descending response with descriptors
/// index-aligned.
inline std::pair<std::vector<Keypoint>, std::vector<Descriptor>> sift_detect(
    const GrayImage& img, const SiftConfig& cfg = {}) {
    const ScaleSpace ss = build_scale_space(img, cfg);
    const auto cands = detect_extrema(ss, cfg);
    auto kps = refine_keypoints(cands, ss, cfg);
    kps = assign_orientations(kps, ss, cfg);
    std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        return a.orientation_deg < b.orientation_deg;
    });
    auto descs = describe(kps, ss, cfg);
    return {std::move(kps), std::move(descs)};
}

}  // namespace featbench::sift
