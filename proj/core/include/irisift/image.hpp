#pragma once

#include <string>
#include <vector>

#include <irisift/errors.hpp>

namespace irisift {

/// Grayscale raster with row-major pixels in [0,1].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    static GrayImage filled(int width, int height, double value = 0.0);

    double at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }

    /// Edge-clamped access; defined for any (x, y).
    double at_clamped(int x, int y) const;

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
};

/// Loads an 8-bit PGM (P5) or an 8-bit grayscale/RGB PNG, mapping values to
/// [0,1] by division by 255. RGB is converted with BT.601 luminance weights.
GrayImage load_image(const std::string& path);

/// Writes an 8-bit binary PGM; pixels are rounded to round(p * 255).
void save_pgm(const GrayImage& img, const std::string& path);

/// 1D Gaussian kernel truncated at radius ceil(4*sigma), renormalized to sum 1.
/// Element i corresponds to offset i - radius.
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur with edge-clamp borders. Output has the same size.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

/// Decimation by 2: output (x, y) = input (2x, 2y); dims are floor(w/2) x floor(h/2).
GrayImage downsample2(const GrayImage& img);

struct Gradient {
    double magnitude = 0.0;
    double orientation_deg = 0.0; // in [0, 360)
};

/// Central-difference gradient. Valid for 1 <= x <= w-2, 1 <= y <= h-2.
Gradient gradient_at(const GrayImage& img, int x, int y);

} // namespace irisift
