#pragma once

#include <array>
#include <string>
#include <vector>

#include <irisift/scale_space.hpp>
#include <irisift/segmentation.hpp>

namespace irisift {

/// DoG sample that is a strict extremum over its 26 scale-space neighbors.
struct ExtremumCandidate {
    int octave = 0;
    int level = 0; // DoG level index
    int x = 0;     // octave-frame column
    int y = 0;     // octave-frame row
};

/// Refined interest point in original-image coordinates.
struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    int octave = 0;
    int level = 0;            ///< anchor DoG/Gaussian level inside the octave
    double sigma = 0.0;       ///< absolute scale
    double orientation = 0.0; ///< degrees in [0, 360)
    double contrast = 0.0;    ///< interpolated |D|
};

/// 128-element gradient histogram vector (4x4 subregions x 8 orientations),
/// unit norm unless degenerate (all zeros).
struct Descriptor {
    std::array<double, 128> values{};

    bool degenerate() const;
    double distance(const Descriptor& other) const; ///< Euclidean
};

struct Feature {
    Keypoint keypoint;
    Descriptor descriptor;
};

/// Extraction result for one image; width/height are the source dimensions
/// (needed by side-by-side match geometry).
struct FeatureSet {
    int width = 0;
    int height = 0;
    std::vector<Feature> items;
};

/// Scans every eligible DoG sample (levels with both scale neighbors, pixels
/// with a full 3x3 spatial neighborhood) for strict 26-neighbor extrema.
std::vector<ExtremumCandidate> detect_extrema(const ScaleSpace& space);

/// Sub-pixel refinement by a 3D quadratic fit, with contrast and edge-response
/// filtering; survivors are mapped to original-image coordinates. Orientation
/// is not assigned yet.
std::vector<Keypoint> refine_and_filter(const std::vector<ExtremumCandidate>& candidates,
                                        const ScaleSpace& space, const SiftParams& params);

/// Builds the 36-bin orientation histogram over a 16x16 region at the
/// keypoint's pyramid level and returns one keypoint per accepted peak
/// (the maximum and any peak within 80% of it).
std::vector<Keypoint> assign_orientations(const Keypoint& kp, const ScaleSpace& space);

/// 4x4x8 gradient histogram over a 16x16 region, rotated to the keypoint
/// orientation, trilinearly interpolated, normalized, clamped at 0.2 and
/// renormalized. Regions that leave the image contribute zero samples.
Descriptor compute_descriptor(const Keypoint& kp, const ScaleSpace& space);

/// Keeps keypoints whose rounded position falls on a true mask pixel.
std::vector<Keypoint> filter_by_mask(const std::vector<Keypoint>& kps, const IrisMask& mask);

/// Full single-image extraction: pyramid, extrema, refinement, orientations,
/// optional mask filtering, descriptors. Output is sorted by
/// (octave, level, y, x, orientation).
FeatureSet detect_and_describe(const GrayImage& img, const SiftParams& params,
                               const IrisMask* mask = nullptr);

/// Text export: header `# sift-keypoints v1 count=N`, a dimensions comment,
/// then per keypoint `x y sigma orientation_deg v1 ... v128` (6 significant
/// digits).
void save_features(const FeatureSet& features, const std::string& path);
FeatureSet load_features(const std::string& path);

} // namespace irisift
