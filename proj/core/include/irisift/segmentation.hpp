#pragma once

#include <string>
#include <vector>

#include <irisift/image.hpp>

namespace irisift {

struct Circle {
    double cx = 0.0;
    double cy = 0.0;
    double radius = 0.0;
};

/// Two-circle segmentation model: pupil boundary inside iris boundary.
struct IrisAnnulus {
    Circle pupil;
    Circle iris;

    void validate() const;
};

/// Binary region mask; true on pixels inside the iris circle and outside the
/// pupil circle (iris boundary inclusive, pupil boundary exclusive).
struct IrisMask {
    int width = 0;
    int height = 0;
    std::vector<char> bits; // row-major, 0/1

    bool at(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
    size_t count() const;
};

/// Radius search ranges in pixels; the pupil range must not extend past the
/// start of the iris range.
struct CircleSearch {
    int pupil_r_min = 20;
    int pupil_r_max = 80;
    int iris_r_min = 80;
    int iris_r_max = 160;
    int min_votes = 10; ///< fewer peak votes than this -> segmentation failure

    void validate() const;
};

/// Circular Hough transform over a gradient-magnitude edge map (threshold at
/// the 90th percentile). The iris circle is the global accumulator maximum in
/// the iris radius range; the pupil maximum is searched with its center
/// restricted to within 0.25 * iris.radius of the iris center.
IrisAnnulus detect_circles(const GrayImage& img, const CircleSearch& search = {});

/// Rasterizes the annulus: bit(x,y) = dist to iris center <= iris.radius AND
/// dist to pupil center > pupil.radius.
IrisMask annulus_to_mask(const IrisAnnulus& annulus, int width, int height);

/// Reads a manual annulus file: lines `pupil <cx> <cy> <r>` and
/// `iris <cx> <cy> <r>` in either order.
IrisAnnulus load_manual_annulus(const std::string& path);

/// Writes the same two-line format.
void save_annulus(const IrisAnnulus& annulus, const std::string& path);

/// Mask export as a 0/255 PGM.
void save_mask_pgm(const IrisMask& mask, const std::string& path);

} // namespace irisift
