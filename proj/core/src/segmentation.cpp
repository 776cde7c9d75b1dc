#include <irisift/segmentation.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace irisift {

void IrisAnnulus::validate() const {
    if (!(pupil.radius > 0.0) || !(iris.radius > 0.0)) {
        throw FormatError("annulus: radii must be positive");
    }
    if (!(pupil.radius < iris.radius)) {
        throw FormatError("annulus: pupil radius must be smaller than iris radius");
    }
    const double dx = pupil.cx - iris.cx;
    const double dy = pupil.cy - iris.cy;
    if (std::sqrt(dx * dx + dy * dy) >= iris.radius) {
        throw FormatError("annulus: pupil center must lie inside the iris circle");
    }
}

size_t IrisMask::count() const {
    size_t n = 0;
    for (char b : bits) n += (b != 0);
    return n;
}

void CircleSearch::validate() const {
    if (pupil_r_min < 1 || pupil_r_min > pupil_r_max) {
        throw ParamError("CircleSearch: empty pupil radius range");
    }
    if (iris_r_min < 1 || iris_r_min > iris_r_max) {
        throw ParamError("CircleSearch: empty iris radius range");
    }
    if (pupil_r_max > iris_r_min) {
        throw ParamError("CircleSearch: pupil range must lie below the iris range");
    }
    if (min_votes < 1) {
        throw ParamError("CircleSearch: min_votes must be >= 1");
    }
}

namespace {

struct EdgePixel {
    int x;
    int y;
    double dir_x; // unit gradient direction
    double dir_y;
};

// Gradient-magnitude edge map thresholded at the 90th percentile; pixels with
// zero gradient never become edges (they carry no direction).
std::vector<EdgePixel> edge_pixels(const GrayImage& img) {
    const int w = img.width;
    const int h = img.height;
    std::vector<double> mags;
    mags.reserve(static_cast<size_t>(w - 2) * (h - 2));
    std::vector<double> dx_map(static_cast<size_t>(w) * h, 0.0);
    std::vector<double> dy_map(static_cast<size_t>(w) * h, 0.0);
    std::vector<double> mag_map(static_cast<size_t>(w) * h, 0.0);
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            const double dx = img.at(x + 1, y) - img.at(x - 1, y);
            const double dy = img.at(x, y + 1) - img.at(x, y - 1);
            const double m = std::sqrt(dx * dx + dy * dy);
            const size_t i = static_cast<size_t>(y) * w + x;
            dx_map[i] = dx;
            dy_map[i] = dy;
            mag_map[i] = m;
            mags.push_back(m);
        }
    }
    if (mags.empty()) return {};

    const size_t p90_index = static_cast<size_t>(0.9 * (mags.size() - 1));
    std::nth_element(mags.begin(), mags.begin() + static_cast<long>(p90_index), mags.end());
    const double threshold = mags[p90_index];

    std::vector<EdgePixel> edges;
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            const double m = mag_map[i];
            if (m >= threshold && m > 1e-12) {
                edges.push_back({x, y, dx_map[i] / m, dy_map[i] / m});
            }
        }
    }
    return edges;
}

struct HoughPeak {
    int votes = 0;
    int cx = 0;
    int cy = 0;
    int r = 0;
};

// Votes along the gradient direction (both signs) for every radius in
// [r_min, r_max], one 2D center accumulator per radius slice. An optional
// center constraint keeps only cells near a previously found circle.
HoughPeak hough_best_circle(const std::vector<EdgePixel>& edges, int width, int height, int r_min,
                            int r_max, const Circle* center_near = nullptr,
                            double center_limit = 0.0) {
    HoughPeak best;
    std::vector<int> acc(static_cast<size_t>(width) * height);
    for (int r = r_min; r <= r_max; ++r) {
        std::fill(acc.begin(), acc.end(), 0);
        for (const EdgePixel& e : edges) {
            for (int sign = -1; sign <= 1; sign += 2) {
                const int cx = static_cast<int>(std::lround(e.x + sign * r * e.dir_x));
                const int cy = static_cast<int>(std::lround(e.y + sign * r * e.dir_y));
                if (cx >= 0 && cx < width && cy >= 0 && cy < height) {
                    ++acc[static_cast<size_t>(cy) * width + cx];
                }
            }
        }
        for (int cy = 0; cy < height; ++cy) {
            for (int cx = 0; cx < width; ++cx) {
                const int votes = acc[static_cast<size_t>(cy) * width + cx];
                if (votes <= best.votes) continue;
                if (center_near) {
                    const double dx = cx - center_near->cx;
                    const double dy = cy - center_near->cy;
                    if (std::sqrt(dx * dx + dy * dy) > center_limit) continue;
                }
                best = {votes, cx, cy, r};
            }
        }
    }
    return best;
}

} // namespace

IrisAnnulus detect_circles(const GrayImage& img, const CircleSearch& search) {
    search.validate();
    const std::vector<EdgePixel> edges = edge_pixels(img);

    const HoughPeak iris_peak =
        hough_best_circle(edges, img.width, img.height, search.iris_r_min, search.iris_r_max);
    if (iris_peak.votes < search.min_votes) {
        throw SegmentationError("detect_circles: no iris boundary candidate exceeded " +
                                std::to_string(search.min_votes) + " votes");
    }
    Circle iris{static_cast<double>(iris_peak.cx), static_cast<double>(iris_peak.cy),
                static_cast<double>(iris_peak.r)};

    const int pupil_r_max = std::min(search.pupil_r_max, iris_peak.r - 1);
    const HoughPeak pupil_peak =
        hough_best_circle(edges, img.width, img.height, search.pupil_r_min, pupil_r_max, &iris,
                          0.25 * iris.radius);
    if (pupil_peak.votes < search.min_votes) {
        throw SegmentationError("detect_circles: no pupil boundary candidate exceeded " +
                                std::to_string(search.min_votes) + " votes");
    }

    IrisAnnulus annulus;
    annulus.iris = iris;
    annulus.pupil = {static_cast<double>(pupil_peak.cx), static_cast<double>(pupil_peak.cy),
                     static_cast<double>(pupil_peak.r)};
    annulus.validate();
    return annulus;
}

IrisMask annulus_to_mask(const IrisAnnulus& annulus, int width, int height) {
    if (width <= 0 || height <= 0) {
        throw ParamError("annulus_to_mask: dimensions must be positive");
    }
    IrisMask mask;
    mask.width = width;
    mask.height = height;
    mask.bits.assign(static_cast<size_t>(width) * height, 0);
    const double ir2 = annulus.iris.radius * annulus.iris.radius;
    const double pr2 = annulus.pupil.radius * annulus.pupil.radius;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double dix = x - annulus.iris.cx;
            const double diy = y - annulus.iris.cy;
            const double dpx = x - annulus.pupil.cx;
            const double dpy = y - annulus.pupil.cy;
            const bool inside_iris = dix * dix + diy * diy <= ir2;
            const bool outside_pupil = dpx * dpx + dpy * dpy > pr2;
            mask.bits[static_cast<size_t>(y) * width + x] = (inside_iris && outside_pupil) ? 1 : 0;
        }
    }
    return mask;
}

IrisAnnulus load_manual_annulus(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    IrisAnnulus annulus;
    bool have_pupil = false, have_iris = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        double cx, cy, r;
        if (!(ls >> tag >> cx >> cy >> r)) {
            throw FormatError("bad annulus line '" + line + "' in: " + path);
        }
        if (tag == "pupil") {
            annulus.pupil = {cx, cy, r};
            have_pupil = true;
        } else if (tag == "iris") {
            annulus.iris = {cx, cy, r};
            have_iris = true;
        } else {
            throw FormatError("unknown annulus tag '" + tag + "' in: " + path);
        }
    }
    if (!have_pupil || !have_iris) {
        throw FormatError("annulus file must define both pupil and iris: " + path);
    }
    annulus.validate();
    return annulus;
}

void save_annulus(const IrisAnnulus& annulus, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    out << "pupil " << annulus.pupil.cx << " " << annulus.pupil.cy << " " << annulus.pupil.radius
        << "\n";
    out << "iris " << annulus.iris.cx << " " << annulus.iris.cy << " " << annulus.iris.radius
        << "\n";
}

void save_mask_pgm(const IrisMask& mask, const std::string& path) {
    GrayImage img = GrayImage::filled(mask.width, mask.height);
    for (size_t i = 0; i < mask.bits.size(); ++i) {
        img.pixels[i] = mask.bits[i] ? 1.0 : 0.0;
    }
    save_pgm(img, path);
}

} // namespace irisift
