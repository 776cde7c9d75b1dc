#pragma once

#include <vector>

#include <irisift/image.hpp>

namespace irisift {

/// Tunables of the SIFT channel. Defaults follow the usual operator settings
/// with the contrast threshold lowered to 0.25/255 for iris texture.
struct SiftParams {
    double sigma0 = 1.6;               ///< base scale of the pyramid
    int scales_per_octave = 3;         ///< s; k = 2^(1/s)
    double contrast_threshold = 0.25 / 255.0; ///< D, on interpolated |DoG|
    double edge_threshold = 10.0;      ///< r; reject if Tr^2/Det >= (r+1)^2/r
    double ratio_threshold = 0.76;     ///< Lowe ratio d1/d2 cutoff
    double angle_tolerance_deg = 18.0; ///< eps_theta for match trimming
    double length_tolerance = 0.14;    ///< eps_l as a ratio, |l/l_P - 1|
    bool trimming = true;              ///< geometric trimming of false matches
    int num_octaves = 0;               ///< 0 = auto: floor(log2(min(w,h))) - 3

    /// Assumed blur of the camera image before any processing.
    static constexpr double kAssumedInputBlur = 0.5;

    void validate() const;
    double k() const; ///< 2^(1/scales_per_octave)
};

/// One resolution level of the pyramid: s+3 Gaussian images and the s+2
/// difference images between adjacent pairs.
struct Octave {
    int index = 0;
    std::vector<GrayImage> gaussians;
    std::vector<GrayImage> dogs;

    int width() const { return gaussians.front().width; }
    int height() const { return gaussians.front().height; }
};

struct ScaleSpace {
    SiftParams params;
    std::vector<Octave> octaves;

    /// Absolute scale of (octave o, level i): sigma0 * k^i * 2^o.
    double absolute_sigma(int octave, double level) const;
};

/// Builds the Gaussian pyramid and DoG stack. Octave 0 level 0 is the input
/// brought to scale sigma0 (assuming input blur 0.5); each following level
/// adds the incremental blur for the next k step; the next octave starts from
/// downsample2 of the level at scale 2*sigma0.
ScaleSpace build_scale_space(const GrayImage& img, const SiftParams& params);

/// DoG sample: gaussians[level+1](x,y) - gaussians[level](x,y).
double dog_value(const ScaleSpace& space, int octave, int level, int x, int y);

} // namespace irisift
