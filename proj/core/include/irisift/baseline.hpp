#pragma once

#include <string>
#include <vector>

#include <irisift/image.hpp>
#include <irisift/segmentation.hpp>

namespace irisift {

/// Parameters of the rubber-sheet / Log-Gabor / Hamming channel.
struct BaselineParams {
    int radial_res = 20;    ///< R: rings
    int angular_res = 240;  ///< A: samples per ring
    double wavelength = 18; ///< Log-Gabor center wavelength in samples
    double sigma_on_f = 0.5;
    int max_shift = 8; ///< column shifts tried in each direction

    void validate() const;
};

/// Polar-normalized iris pattern: R x A samples with per-sample validity.
struct NormalizedIris {
    int radial_res = 0;
    int angular_res = 0;
    std::vector<double> samples; // row-major R x A, [0,1]
    std::vector<char> valid;     // row-major R x A, 0/1

    double sample(int ring, int col) const {
        return samples[static_cast<size_t>(ring) * angular_res + col];
    }
    bool is_valid(int ring, int col) const {
        return valid[static_cast<size_t>(ring) * angular_res + col] != 0;
    }
};

/// Gray-coded phase template: 2 bits per sample plus a validity mask.
/// Bit layout: index (ring * A + col) * 2 + b with b in {0,1}.
struct IrisCode {
    int radial_res = 0;
    int angular_res = 0;
    std::vector<char> bits; // 0/1, length 2*R*A
    std::vector<char> mask; // 0/1, length 2*R*A

    size_t bit_count() const { return bits.size(); }
};

/// Daugman rubber-sheet normalization with the pupil center as reference
/// point; the iris-boundary distance along each ray comes from intersecting
/// the ray with the iris circle (handles non-concentric pupils). Radial
/// sample i of ring lies at fraction (i+0.5)/R between the two boundary
/// points; out-of-image samples are marked invalid.
NormalizedIris rubber_sheet_normalize(const GrayImage& img, const IrisAnnulus& annulus,
                                      int radial_res = 20, int angular_res = 240);

/// Quadrant bits of a complex filter response, gray-coded so adjacent
/// quadrants differ in exactly one bit: I->(1,1), II->(0,1), III->(0,0),
/// IV->(1,0). Axis values count as non-negative.
inline std::pair<bool, bool> phase_quadrant_bits(double re, double im) {
    return {re >= 0.0, im >= 0.0};
}

/// Per-ring circular convolution with a 1D Log-Gabor filter
/// (G(f) = exp(-(log(f/f0))^2 / (2 log(sigma_on_f)^2)), f0 = 1/wavelength,
/// G(0) = 0, negative frequencies suppressed), phase quantized to the gray
/// code above. Rows with more than 50% invalid samples are masked entirely;
/// otherwise sample validity carries over to the two bits.
IrisCode log_gabor_encode(const NormalizedIris& norm, const BaselineParams& params = {});

/// Minimum masked fractional Hamming distance over column shifts in
/// [-max_shift, max_shift]. Throws IncomparableCodesError when no shift has
/// overlapping valid bits.
double hamming_match(const IrisCode& a, const IrisCode& b, int max_shift = 8);

/// IrisCode file: header `# iriscode v1 R=<r> A=<a>`, then bits and mask as
/// hex lines (MSB first, 2*R*A bits each).
void save_iris_code(const IrisCode& code, const std::string& path);
IrisCode load_iris_code(const std::string& path);

} // namespace irisift
