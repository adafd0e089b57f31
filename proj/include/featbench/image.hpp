#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace featbench {

/// Thrown for file-level problems (missing files, malformed headers,
/// truncated pixel data, unwritable paths).
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

/// 8-bit grayscale raster. Pixels are kept as real numbers internally so
/// that warped/filtered images do not accumulate rounding; quantization to
/// integer [0,255] happens only when a file is written.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;  // row-major, width*height, values in [0,255]

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {
        if (w < 1 || h < 1) throw std::invalid_argument("GrayImage: dimensions must be >= 1");
    }

    double at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }

    bool same_size(const GrayImage& o) const { return width == o.width && height == o.height; }
};

/// Summed-area table: cumulative(x,y) = sum of source pixels over [0..x]x[0..y].
/// Sums of 8-bit data are exact in double well past any realistic image size.
struct IntegralImage {
    int width = 0;
    int height = 0;
    std::vector<double> cumulative;

    double at(int x, int y) const { return cumulative[static_cast<size_t>(y) * width + x]; }
};

inline IntegralImage integral(const GrayImage& img) {
    IntegralImage ii;
    ii.width = img.width;
    ii.height = img.height;
    ii.cumulative.resize(img.pixels.size());
    for (int y = 0; y < img.height; ++y) {
        double row = 0.0;
        for (int x = 0; x < img.width; ++x) {
            row += img.at(x, y);
            ii.cumulative[static_cast<size_t>(y) * img.width + x] =
                row + (y > 0 ? ii.at(x, y - 1) : 0.0);
        }
    }
    return ii;
}

/// Sum of source pixels over the inclusive rectangle [x0..x1]x[y0..y1],
/// four table lookups.
inline double box_sum(const IntegralImage& ii, int x0, int y0, int x1, int y1) {
    if (x0 < 0 || y0 < 0 || x0 > x1 || y0 > y1 || x1 >= ii.width || y1 >= ii.height)
        throw std::out_of_range("box_sum: rectangle out of range");
    const double d = ii.at(x1, y1);
    const double b = y0 > 0 ? ii.at(x1, y0 - 1) : 0.0;
    const double c = x0 > 0 ? ii.at(x0 - 1, y1) : 0.0;
    const double a = (x0 > 0 && y0 > 0) ? ii.at(x0 - 1, y0 - 1) : 0.0;
    return d - b - c + a;
}

namespace detail {

/// Sampled, normalized Gaussian taps for radius ceil(3*sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        k[static_cast<size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Separable convolution on a raw plane, replicating edge samples. The
/// interior runs without the border clamp; tap order matches the border
/// path so results are identical.
inline std::vector<double> convolve_separable(const std::vector<double>& src, int w, int h,
                                              const std::vector<double>& kernel) {
    const int radius = static_cast<int>(kernel.size() / 2);
    const double* k = kernel.data();
    std::vector<double> tmp(src.size()), dst(src.size());

    for (int y = 0; y < h; ++y) {
        const double* row = src.data() + static_cast<size_t>(y) * w;
        double* out = tmp.data() + static_cast<size_t>(y) * w;
        const int interior_end = std::max(radius, w - radius);
        for (int x = 0; x < std::min(radius, w); ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[i + radius] * row[std::clamp(x + i, 0, w - 1)];
            out[x] = acc;
        }
        for (int x = radius; x < interior_end; ++x) {
            double acc = 0.0;
            const double* s = row + x - radius;
            for (int i = 0; i <= 2 * radius; ++i) acc += k[i] * s[i];
            out[x] = acc;
        }
        for (int x = interior_end; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[i + radius] * row[std::clamp(x + i, 0, w - 1)];
            out[x] = acc;
        }
    }

    for (int y = 0; y < h; ++y) {
        const bool border = y < radius || y >= h - radius;
        double* out = dst.data() + static_cast<size_t>(y) * w;
        if (border) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += k[i + radius] * tmp[static_cast<size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
                out[x] = acc;
            }
        } else {
            const double* s0 = tmp.data() + static_cast<size_t>(y - radius) * w;
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                const double* s = s0 + x;
                for (int i = 0; i <= 2 * radius; ++i) acc += k[i] * s[static_cast<size_t>(i) * w];
                out[x] = acc;
            }
        }
    }
    return dst;
}

}  // namespace detail

inline GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("gaussian_blur: sigma must be > 0");
    GrayImage out(img.width, img.height);
    out.pixels = detail::convolve_separable(img.pixels, img.width, img.height,
                                            detail::gaussian_kernel(sigma));
    for (double& p : out.pixels) p = std::clamp(p, 0.0, 255.0);
    return out;
}

/// Bilinear sample; coordinates outside [0,w-1]x[0,h-1] read as 0 (black fill).
inline double sample_bilinear(const GrayImage& img, double x, double y) {
    if (x < 0.0 || y < 0.0 || x > img.width - 1 || y > img.height - 1) return 0.0;
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    auto px = [&](int xi, int yi) -> double {
        if (xi < 0 || yi < 0 || xi >= img.width || yi >= img.height) return 0.0;
        return img.at(xi, yi);
    };
    return (1.0 - fx) * (1.0 - fy) * px(x0, y0) + fx * (1.0 - fy) * px(x0 + 1, y0) +
           (1.0 - fx) * fy * px(x0, y0 + 1) + fx * fy * px(x0 + 1, y0 + 1);
}

/// Decimation by 2: out(x,y) = in(2x,2y). Callers smooth beforehand.
inline GrayImage downsample2(const GrayImage& img) {
    if (img.width < 2 || img.height < 2)
        throw std::invalid_argument("downsample2: image too small");
    GrayImage out(img.width / 2, img.height / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) out.at(x, y) = img.at(2 * x, 2 * y);
    return out;
}

/// Bilinear resample to round(w*factor) x round(h*factor);
/// out(x,y) = sample(in, x/factor, y/factor) with the source coordinate
/// clamped into the image so the last row/column replicates instead of
/// fading to black (keeps constants constant). Shared by the scaling
/// distortion and the ORB pyramid.
inline GrayImage resample_bilinear(const GrayImage& img, double factor) {
    const int nw = static_cast<int>(std::lround(img.width * factor));
    const int nh = static_cast<int>(std::lround(img.height * factor));
    if (nw < 1 || nh < 1) throw std::invalid_argument("resample_bilinear: degenerate output size");
    GrayImage out(nw, nh);
    for (int y = 0; y < nh; ++y) {
        const double sy = std::clamp(y / factor, 0.0, static_cast<double>(img.height - 1));
        for (int x = 0; x < nw; ++x) {
            const double sx = std::clamp(x / factor, 0.0, static_cast<double>(img.width - 1));
            out.at(x, y) = sample_bilinear(img, sx, sy);
        }
    }
    return out;
}

namespace detail {

inline int pgm_next_int(std::istream& in, const std::string& path) {
    // skip whitespace and '#' comments between header tokens
    for (;;) {
        const int c = in.peek();
        if (c == EOF) throw io_error("malformed PGM header: " + path);
        if (std::isspace(c)) {
            in.get();
        } else if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else {
            break;
        }
    }
    int v = 0;
    if (!(in >> v)) throw io_error("malformed PGM header: " + path);
    return v;
}

}  // namespace detail

/// Reads a P2 (ASCII) or P5 (binary) PGM with maxval 255.
inline GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open file: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P2" && magic != "P5") throw io_error("malformed PGM header: " + path);
    const int w = detail::pgm_next_int(in, path);
    const int h = detail::pgm_next_int(in, path);
    const int maxval = detail::pgm_next_int(in, path);
    if (w < 1 || h < 1) throw io_error("malformed PGM header: " + path);
    if (maxval != 255) throw io_error("unsupported maxval (expected 255): " + path);

    GrayImage img(w, h);
    if (magic == "P5") {
        in.get();  // single whitespace byte after maxval
        std::vector<unsigned char> raw(static_cast<size_t>(w) * h);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<size_t>(in.gcount()) != raw.size())
            throw io_error("truncated pixel data: " + path);
        for (size_t i = 0; i < raw.size(); ++i) img.pixels[i] = raw[i];
    } else {
        for (double& p : img.pixels) {
            int v = 0;
            if (!(in >> v)) throw io_error("truncated pixel data: " + path);
            if (v < 0 || v > 255) throw io_error("pixel value out of range: " + path);
            p = v;
        }
    }
    return img;
}

/// Writes maxval-255 PGM, quantizing the real-valued pixels.
inline void save_pgm(const GrayImage& img, const std::string& path, bool binary = true) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write file: " + path);
    auto quantize = [](double v) {
        return static_cast<int>(std::lround(std::clamp(v, 0.0, 255.0)));
    };
    if (binary) {
        out << "P5\n" << img.width << " " << img.height << "\n255\n";
        std::vector<unsigned char> raw(img.pixels.size());
        for (size_t i = 0; i < raw.size(); ++i)
            raw[i] = static_cast<unsigned char>(quantize(img.pixels[i]));
        out.write(reinterpret_cast<const char*>(raw.data()),
                  static_cast<std::streamsize>(raw.size()));
    } else {
        out << "P2\n" << img.width << " " << img.height << "\n255\n";
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x)
                out << quantize(img.at(x, y)) << (x + 1 == img.width ? "" : " ");
            out << "\n";
        }
    }
    if (!out) throw io_error("cannot write file: " + path);
}

}  // namespace featbench
