#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace featbench {

/// A detected interest point in source-image coordinates.
/// `response` is detector-specific strength: |DoG| contrast for SIFT,
/// Hessian determinant for SURF, Harris score for ORB.
/// `laplacian_sign` is -1/0/+1 and only meaningful for SURF (0 elsewhere).
struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double scale = 1.0;
    double orientation_deg = 0.0;  // [0, 360)
    double response = 0.0;
    int octave = 0;
    int laplacian_sign = 0;
};

/// Either a real-valued vector (SIFT 128-d, SURF 64-d, unit norm) or a
/// packed 256-bit binary string (ORB).
struct Descriptor {
    enum class Kind { real, binary };

    Kind kind = Kind::real;
    std::vector<float> values;            // kind == real
    std::array<std::uint8_t, 32> bits{};  // kind == binary, 256 bits

    static Descriptor make_real(std::vector<float> v) {
        Descriptor d;
        d.kind = Kind::real;
        d.values = std::move(v);
        return d;
    }
    static Descriptor make_binary(const std::array<std::uint8_t, 32>& b) {
        Descriptor d;
        d.kind = Kind::binary;
        d.bits = b;
        return d;
    }

    bool bit(int i) const { return (bits[static_cast<size_t>(i) >> 3] >> (i & 7)) & 1; }
};

}  // namespace featbench
