#pragma once

#include <cmath>
#include <cstdint>

#include "featbench/image.hpp"
#include "featbench/rng.hpp"

namespace fixtures {

/// Deterministic "natural" scene: a jittered grid of high-contrast
/// blobs, discs and squares over a soft background, lightly smoothed.
/// Dense in corners and in blobs across the detector scale ranges.
inline featbench::GrayImage make_scene(int w, int h, std::uint64_t seed = 7,
                                       double noise_amp = 38.0) {
    featbench::SplitMix64 rng(seed);
    std::vector<double> acc(static_cast<size_t>(w) * h, 0.0);
    auto add = [&](int x, int y, double v) {
        if (x >= 0 && y >= 0 && x < w && y < h) acc[static_cast<size_t>(y) * w + x] += v;
    };

    // low-frequency background
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            acc[static_cast<size_t>(y) * w + x] =
                35.0 * (static_cast<double>(x) / w) + 22.0 * (static_cast<double>(y) / h);

    // a few broad soft blobs underneath
    for (int b = 0; b < std::max(3, w * h / 20000); ++b) {
        const double cx = rng.next_unit() * w;
        const double cy = rng.next_unit() * h;
        const double r = 8.0 + rng.next_unit() * 14.0;
        const double amp = (rng.next_unit() - 0.5) * 110.0;
        for (int y = std::max(0, static_cast<int>(cy - 3 * r));
             y <= std::min(h - 1, static_cast<int>(cy + 3 * r)); ++y)
            for (int x = std::max(0, static_cast<int>(cx - 3 * r));
                 x <= std::min(w - 1, static_cast<int>(cx + 3 * r)); ++x)
                add(x, y, amp * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) /
                                         (2.0 * r * r)));
    }

    // jittered grid of small high-contrast shapes (mostly disjoint)
    const int cell = 16;
    for (int gy = 0; gy * cell < h; ++gy) {
        for (int gx = 0; gx * cell < w; ++gx) {
            if (rng.next_below(10) < 2) continue;  // leave some cells empty
            const double cx = gx * cell + 3.0 + rng.next_unit() * (cell - 6);
            const double cy = gy * cell + 3.0 + rng.next_unit() * (cell - 6);
            const double amp = (70.0 + rng.next_unit() * 55.0) * (rng.next_below(2) ? 1.0 : -1.0);
            const std::uint64_t shape = rng.next_below(3);
            if (shape == 0) {  // Gaussian blob
                const double r = 1.5 + rng.next_unit() * 3.5;
                const int span = static_cast<int>(3 * r) + 1;
                for (int y = -span; y <= span; ++y)
                    for (int x = -span; x <= span; ++x)
                        add(static_cast<int>(cx) + x, static_cast<int>(cy) + y,
                            amp * std::exp(-(x * x + y * y) / (2.0 * r * r)));
            } else if (shape == 1) {  // hard disc
                const int r = 2 + static_cast<int>(rng.next_below(5));
                for (int y = -r; y <= r; ++y)
                    for (int x = -r; x <= r; ++x)
                        if (x * x + y * y <= r * r)
                            add(static_cast<int>(cx) + x, static_cast<int>(cy) + y, amp);
            } else {  // square
                const int a = 2 + static_cast<int>(rng.next_below(5));
                for (int y = -a; y <= a; ++y)
                    for (int x = -a; x <= a; ++x)
                        add(static_cast<int>(cx) + x, static_cast<int>(cy) + y, amp);
            }
        }
    }

    // pixel-level sensor-style noise: invisible to the smoothed detector
    // ladders at native resolution, but real structure once the image is
    // magnified
    for (size_t i = 0; i < acc.size(); ++i)
        acc[i] += (rng.next_unit() - 0.5) * 2.0 * noise_amp;

    featbench::GrayImage img(w, h);
    for (size_t i = 0; i < acc.size(); ++i)
        img.pixels[i] = std::clamp(110.0 + acc[i], 8.0, 247.0);
    return featbench::gaussian_blur(img, 0.5);
}

/// Uniform-noise image for oracle-equality scans.
inline featbench::GrayImage make_noise_image(int w, int h, std::uint64_t seed = 11) {
    featbench::SplitMix64 rng(seed);
    featbench::GrayImage img(w, h);
    for (double& p : img.pixels) p = static_cast<double>(rng.next_below(256));
    return img;
}

/// Gaussian blob of the given sigma and amplitude on black, peaked on the
/// pixel (w/2, h/2) so the discrete maximum is strict (a half-pixel
/// center would tie its four neighbors and defeat strict extremum scans).
inline featbench::GrayImage make_blob(int w, int h, double sigma_b, double amplitude = 200.0) {
    featbench::GrayImage img(w, h);
    const double cx = w / 2;
    const double cy = h / 2;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(x, y) = amplitude * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) /
                                                (2.0 * sigma_b * sigma_b));
    return img;
}

}  // namespace fixtures
