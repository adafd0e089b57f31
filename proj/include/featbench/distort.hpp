#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "featbench/image.hpp"
#include "featbench/rng.hpp"

namespace featbench {

/// One benchmark distortion with its parameters. `seed` is used by the
/// noise kind only.
struct Scenario {
    enum class Kind { identity, intensity, rotation, scaling, shearing, fisheye, noise };

    Kind kind = Kind::identity;
    double angle_deg = 0.0;   // rotation
    double factor = 1.0;      // scaling
    double kx = 0.0;          // shearing
    double k = 0.0;           // fisheye
    double density = 0.0;     // noise
    double gain = 1.0;        // intensity
    double bias = 0.0;        // intensity
    std::uint64_t seed = 0;   // noise

    static Scenario identity() { return {}; }
    static Scenario intensity(double gain, double bias) {
        Scenario s; s.kind = Kind::intensity; s.gain = gain; s.bias = bias; return s;
    }
    static Scenario rotation(double angle_deg) {
        Scenario s; s.kind = Kind::rotation; s.angle_deg = angle_deg; return s;
    }
    static Scenario scaling(double factor) {
        Scenario s; s.kind = Kind::scaling; s.factor = factor; return s;
    }
    static Scenario shearing(double kx) {
        Scenario s; s.kind = Kind::shearing; s.kx = kx; return s;
    }
    static Scenario fisheye(double k) {
        Scenario s; s.kind = Kind::fisheye; s.k = k; return s;
    }
    static Scenario noise(double density, std::uint64_t seed) {
        Scenario s; s.kind = Kind::noise; s.density = density; s.seed = seed; return s;
    }
};

inline GrayImage adjust_intensity(const GrayImage& img, double gain, double bias) {
    if (gain <= 0.0) throw std::invalid_argument("adjust_intensity: gain must be > 0");
    GrayImage out(img.width, img.height);
    for (size_t i = 0; i < img.pixels.size(); ++i)
        out.pixels[i] = std::clamp(gain * img.pixels[i] + bias, 0.0, 255.0);
    return out;
}

namespace detail {

/// cos/sin of an angle in degrees, exact at multiples of 90 so that
/// right-angle rotations permute the pixel grid bit-exactly.
inline void cos_sin_deg(double angle_deg, double& c, double& s) {
    double a = std::fmod(angle_deg, 360.0);
    if (a < 0.0) a += 360.0;
    if (a == 0.0) { c = 1.0; s = 0.0; return; }
    if (a == 90.0) { c = 0.0; s = 1.0; return; }
    if (a == 180.0) { c = -1.0; s = 0.0; return; }
    if (a == 270.0) { c = 0.0; s = -1.0; return; }
    const double rad = a * std::numbers::pi / 180.0;
    c = std::cos(rad);
    s = std::sin(rad);
}

}  // namespace detail

/// Rotation about the image center ((w-1)/2,(h-1)/2) on the same canvas;
/// corners that leave the frame are clipped, uncovered pixels are black.
inline GrayImage rotate(const GrayImage& img, double angle_deg) {
    double c, s;
    detail::cos_sin_deg(angle_deg, c, s);
    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            // inverse map: rotate destination offset by -angle
            const double sx = c * dx + s * dy + cx;
            const double sy = -s * dx + c * dy + cy;
            out.at(x, y) = sample_bilinear(img, sx, sy);
        }
    }
    return out;
}

inline GrayImage scale(const GrayImage& img, double factor) {
    if (factor <= 0.0) throw std::invalid_argument("scale: factor must be > 0");
    return resample_bilinear(img, factor);
}

/// Horizontal shear: source (x,y) appears at (x + kx*y, y). The canvas
/// widens by ceil(|kx|*(h-1)) so a non-negative kx loses nothing.
inline GrayImage shear(const GrayImage& img, double kx) {
    const int extra = static_cast<int>(std::ceil(std::abs(kx) * (img.height - 1)));
    GrayImage out(img.width + extra, img.height);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            out.at(x, y) = sample_bilinear(img, x - kx * y, y);
        }
    }
    return out;
}

/// Single-coefficient barrel model on center-normalized coordinates
/// (r = 1 at the half-diagonal): a destination pixel at radius r samples
/// the source at r*(1 + k*r^2) along the same ray.
inline GrayImage fisheye(const GrayImage& img, double k) {
    if (k < 0.0) throw std::invalid_argument("fisheye: k must be >= 0");
    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;
    const double diag2 = cx * cx + cy * cy;
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            const double r2 = (dx * dx + dy * dy) / diag2;  // normalized radius^2
            const double m = 1.0 + k * r2;
            out.at(x, y) = sample_bilinear(img, cx + dx * m, cy + dy * m);
        }
    }
    return out;
}

/// Overwrites exactly round(density*w*h) distinct pixels chosen by a
/// seeded partial Fisher-Yates shuffle driven by splitmix64. The first
/// ceil(m/2) selected positions become salt (255), the rest pepper (0).
inline GrayImage salt_pepper(const GrayImage& img, double density, std::uint64_t seed) {
    if (density < 0.0 || density > 1.0)
        throw std::invalid_argument("salt_pepper: density must be in [0,1]");
    GrayImage out = img;
    const std::uint64_t n = static_cast<std::uint64_t>(img.pixels.size());
    const std::uint64_t m = static_cast<std::uint64_t>(std::llround(density * static_cast<double>(n)));
    if (m == 0) return out;

    std::vector<std::uint32_t> idx(n);
    for (std::uint64_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
    SplitMix64 rng(seed);
    for (std::uint64_t i = 0; i < m; ++i) {
        const std::uint64_t j = i + rng.next_below(n - i);
        std::swap(idx[i], idx[j]);
    }
    const std::uint64_t salt = (m + 1) / 2;
    for (std::uint64_t i = 0; i < m; ++i)
        out.pixels[idx[i]] = i < salt ? 255.0 : 0.0;
    return out;
}

inline GrayImage apply_scenario(const GrayImage& img, const Scenario& sc) {
    switch (sc.kind) {
        case Scenario::Kind::identity: return img;
        case Scenario::Kind::intensity: return adjust_intensity(img, sc.gain, sc.bias);
        case Scenario::Kind::rotation: return rotate(img, sc.angle_deg);
        case Scenario::Kind::scaling: return scale(img, sc.factor);
        case Scenario::Kind::shearing: return shear(img, sc.kx);
        case Scenario::Kind::fisheye: return fisheye(img, sc.k);
        case Scenario::Kind::noise: return salt_pepper(img, sc.density, sc.seed);
    }
    throw std::logic_error("apply_scenario: unknown kind");
}

namespace detail {

inline std::string num_str(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace detail

/// Canonical text form, e.g. "rotation:angle=45" or
/// "noise:density=0.3,seed=42".
inline std::string format_scenario(const Scenario& sc) {
    using K = Scenario::Kind;
    switch (sc.kind) {
        case K::identity: return "identity";
        case K::intensity:
            return "intensity:gain=" + detail::num_str(sc.gain) + ",bias=" + detail::num_str(sc.bias);
        case K::rotation: return "rotation:angle=" + detail::num_str(sc.angle_deg);
        case K::scaling: return "scaling:factor=" + detail::num_str(sc.factor);
        case K::shearing: return "shearing:kx=" + detail::num_str(sc.kx);
        case K::fisheye: return "fisheye:k=" + detail::num_str(sc.k);
        case K::noise:
            return "noise:density=" + detail::num_str(sc.density) +
                   ",seed=" + std::to_string(sc.seed);
    }
    throw std::logic_error("format_scenario: unknown kind");
}

inline Scenario parse_scenario(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    Scenario sc;
    if (kind == "identity") {
        if (colon != std::string::npos) throw std::invalid_argument("identity takes no parameters");
        return sc;
    } else if (kind == "intensity") {
        sc.kind = Scenario::Kind::intensity;
    } else if (kind == "rotation") {
        sc.kind = Scenario::Kind::rotation;
    } else if (kind == "scaling") {
        sc.kind = Scenario::Kind::scaling;
    } else if (kind == "shearing") {
        sc.kind = Scenario::Kind::shearing;
    } else if (kind == "fisheye") {
        sc.kind = Scenario::Kind::fisheye;
    } else if (kind == "noise") {
        sc.kind = Scenario::Kind::noise;
    } else {
        throw std::invalid_argument("unknown scenario kind: " + kind);
    }

    std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string item = rest.substr(0, comma);
        rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("bad scenario parameter: " + item);
        const std::string key = item.substr(0, eq);
        const std::string val = item.substr(eq + 1);
        if (key == "angle") sc.angle_deg = std::stod(val);
        else if (key == "factor") sc.factor = std::stod(val);
        else if (key == "kx") sc.kx = std::stod(val);
        else if (key == "k") sc.k = std::stod(val);
        else if (key == "density") sc.density = std::stod(val);
        else if (key == "gain") sc.gain = std::stod(val);
        else if (key == "bias") sc.bias = std::stod(val);
        else if (key == "seed") sc.seed = std::stoull(val);
        else throw std::invalid_argument("unknown scenario parameter: " + key);
    }
    return sc;
}

}  // namespace featbench
