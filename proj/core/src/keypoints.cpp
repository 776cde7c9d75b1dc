#include <irisift/keypoints.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace irisift {

namespace {

constexpr int kMaxInterpSteps = 5;
constexpr int kOrientationBins = 36;
constexpr double kPeakRatio = 0.8;
constexpr double kDescriptorClamp = 0.2;
constexpr double kDescriptorWindowSigma = 8.0; // half the 16-sample region

bool is_strict_extremum(const Octave& oct, int level, int x, int y) {
    const double v = oct.dogs[static_cast<size_t>(level)].at(x, y);
    bool is_max = true;
    bool is_min = true;
    for (int dl = -1; dl <= 1; ++dl) {
        const GrayImage& d = oct.dogs[static_cast<size_t>(level + dl)];
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dl == 0 && dx == 0 && dy == 0) continue;
                const double n = d.at(x + dx, y + dy);
                if (v <= n) is_max = false;
                if (v >= n) is_min = false;
                if (!is_max && !is_min) return false;
            }
        }
    }
    return is_max || is_min;
}

struct Vec3 {
    double x = 0.0, y = 0.0, s = 0.0;
};

// Solves H * delta = -g for the 3D quadratic fit; returns false if singular.
bool solve_offset(const double h[3][3], const Vec3& g, Vec3& delta) {
    const double det = h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) -
                       h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0]) +
                       h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
    if (std::abs(det) < 1e-30) return false;
    const double b[3] = {-g.x, -g.y, -g.s};
    // Cramer's rule.
    double m[3][3];
    auto det3 = [](const double a[3][3]) {
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
               a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    };
    double out[3];
    for (int col = 0; col < 3; ++col) {
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) m[r][c] = h[r][c];
            m[r][col] = b[r];
        }
        out[col] = det3(m) / det;
    }
    delta = {out[0], out[1], out[2]};
    return true;
}

int reanchor_step(double offset) {
    if (offset > 0.5) return 1;
    if (offset < -0.5) return -1;
    return 0;
}

double wrap_degrees(double deg) {
    deg = std::fmod(deg, 360.0);
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg = 0.0;
    return deg;
}

} // namespace

bool Descriptor::degenerate() const {
    for (double v : values) {
        if (v != 0.0) return false;
    }
    return true;
}

double Descriptor::distance(const Descriptor& other) const {
    double acc = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - other.values[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

std::vector<ExtremumCandidate> detect_extrema(const ScaleSpace& space) {
    std::vector<ExtremumCandidate> out;
    for (const Octave& oct : space.octaves) {
        const int levels = static_cast<int>(oct.dogs.size());
        if (levels < 3) {
            throw ParamError("detect_extrema: need at least 3 DoG levels per octave");
        }
        const int w = oct.width();
        const int h = oct.height();
        for (int level = 1; level + 1 < levels; ++level) {
            for (int y = 1; y < h - 1; ++y) {
                for (int x = 1; x < w - 1; ++x) {
                    if (is_strict_extremum(oct, level, x, y)) {
                        out.push_back({oct.index, level, x, y});
                    }
                }
            }
        }
    }
    return out;
}

std::vector<Keypoint> refine_and_filter(const std::vector<ExtremumCandidate>& candidates,
                                        const ScaleSpace& space, const SiftParams& params) {
    params.validate();
    const double r = params.edge_threshold;
    const double edge_limit = (r + 1.0) * (r + 1.0) / r;
    const double k = params.k();

    std::vector<Keypoint> out;
    for (const ExtremumCandidate& cand : candidates) {
        const Octave& oct = space.octaves[static_cast<size_t>(cand.octave)];
        const int levels = static_cast<int>(oct.dogs.size());
        const int w = oct.width();
        const int h = oct.height();

        int x = cand.x, y = cand.y, level = cand.level;
        Vec3 delta;
        Vec3 grad;
        bool converged = false;
        for (int step = 0; step < kMaxInterpSteps; ++step) {
            if (x < 1 || x > w - 2 || y < 1 || y > h - 2 || level < 1 || level > levels - 2) {
                break;
            }
            const GrayImage& prev = oct.dogs[static_cast<size_t>(level - 1)];
            const GrayImage& cur = oct.dogs[static_cast<size_t>(level)];
            const GrayImage& next = oct.dogs[static_cast<size_t>(level + 1)];
            const double v = cur.at(x, y);

            grad.x = 0.5 * (cur.at(x + 1, y) - cur.at(x - 1, y));
            grad.y = 0.5 * (cur.at(x, y + 1) - cur.at(x, y - 1));
            grad.s = 0.5 * (next.at(x, y) - prev.at(x, y));

            const double dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - 2.0 * v;
            const double dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - 2.0 * v;
            const double dss = next.at(x, y) + prev.at(x, y) - 2.0 * v;
            const double dxy = 0.25 * (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) -
                                       cur.at(x + 1, y - 1) + cur.at(x - 1, y - 1));
            const double dxs = 0.25 * (next.at(x + 1, y) - next.at(x - 1, y) -
                                       prev.at(x + 1, y) + prev.at(x - 1, y));
            const double dys = 0.25 * (next.at(x, y + 1) - next.at(x, y - 1) -
                                       prev.at(x, y + 1) + prev.at(x, y - 1));
            const double hess[3][3] = {{dxx, dxy, dxs}, {dxy, dyy, dys}, {dxs, dys, dss}};
            if (!solve_offset(hess, grad, delta)) break;

            const int sx = reanchor_step(delta.x);
            const int sy = reanchor_step(delta.y);
            const int sl = reanchor_step(delta.s);
            if (sx == 0 && sy == 0 && sl == 0) {
                converged = true;
                break;
            }
            x += sx;
            y += sy;
            level += sl;
        }
        if (!converged) continue;

        const GrayImage& cur = oct.dogs[static_cast<size_t>(level)];
        const double interpolated =
            cur.at(x, y) + 0.5 * (grad.x * delta.x + grad.y * delta.y + grad.s * delta.s);
        const double contrast = std::abs(interpolated);
        if (contrast < params.contrast_threshold) continue;

        // Edge response from the 2x2 spatial Hessian at the anchor sample.
        const double v = cur.at(x, y);
        const double dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - 2.0 * v;
        const double dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - 2.0 * v;
        const double dxy = 0.25 * (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) -
                                   cur.at(x + 1, y - 1) + cur.at(x - 1, y - 1));
        const double tr = dxx + dyy;
        const double det = dxx * dyy - dxy * dxy;
        if (det <= 0.0 || tr * tr / det >= edge_limit) continue;

        const double scale_factor = std::pow(2.0, cand.octave);
        Keypoint kp;
        kp.x = (x + delta.x) * scale_factor;
        kp.y = (y + delta.y) * scale_factor;
        kp.octave = cand.octave;
        kp.level = level;
        kp.sigma = params.sigma0 * std::pow(k, level + delta.s) * scale_factor;
        kp.contrast = contrast;
        const GrayImage& base = space.octaves.front().gaussians.front();
        if (kp.x < 0.0 || kp.x >= base.width || kp.y < 0.0 || kp.y >= base.height) continue;
        out.push_back(kp);
    }
    return out;
}

std::vector<Keypoint> assign_orientations(const Keypoint& kp, const ScaleSpace& space) {
    const Octave& oct = space.octaves[static_cast<size_t>(kp.octave)];
    const GrayImage& img = oct.gaussians[static_cast<size_t>(kp.level)];
    const double inv_scale = 1.0 / std::pow(2.0, kp.octave);
    const double xo = kp.x * inv_scale;
    const double yo = kp.y * inv_scale;
    const double scale_oct = kp.sigma * inv_scale;
    const double sigma_w = 1.5 * scale_oct;
    const int xc = static_cast<int>(std::lround(xo));
    const int yc = static_cast<int>(std::lround(yo));

    double hist[kOrientationBins] = {};
    int used = 0;
    for (int j = -8; j <= 7; ++j) {
        for (int i = -8; i <= 7; ++i) {
            const int sx = xc + i;
            const int sy = yc + j;
            if (sx < 1 || sx > img.width - 2 || sy < 1 || sy > img.height - 2) continue;
            const Gradient g = gradient_at(img, sx, sy);
            const double dx = sx - xo;
            const double dy = sy - yo;
            const double wgt =
                g.magnitude * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_w * sigma_w));
            // Bins centered at multiples of 10 degrees.
            const int bin =
                static_cast<int>(std::lround(g.orientation_deg / 10.0)) % kOrientationBins;
            hist[bin] += wgt;
            ++used;
        }
    }
    if (used == 0) return {};

    double maxv = 0.0;
    for (double v : hist) maxv = std::max(maxv, v);
    if (maxv <= 0.0) return {};

    std::vector<Keypoint> out;
    for (int b = 0; b < kOrientationBins; ++b) {
        const double prev = hist[(b + kOrientationBins - 1) % kOrientationBins];
        const double next = hist[(b + 1) % kOrientationBins];
        const double cur = hist[b];
        if (cur > prev && cur > next && cur >= kPeakRatio * maxv) {
            const double denom = prev - 2.0 * cur + next;
            const double offset = denom != 0.0 ? 0.5 * (prev - next) / denom : 0.0;
            Keypoint oriented = kp;
            oriented.orientation = wrap_degrees((b + offset) * 10.0);
            out.push_back(oriented);
        }
    }
    return out;
}

Descriptor compute_descriptor(const Keypoint& kp, const ScaleSpace& space) {
    const Octave& oct = space.octaves[static_cast<size_t>(kp.octave)];
    const GrayImage& img = oct.gaussians[static_cast<size_t>(kp.level)];
    const double inv_scale = 1.0 / std::pow(2.0, kp.octave);
    const double xo = kp.x * inv_scale;
    const double yo = kp.y * inv_scale;
    const double theta = kp.orientation * std::numbers::pi / 180.0;
    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);
    const double inv_two_sigma2 = 1.0 / (2.0 * kDescriptorWindowSigma * kDescriptorWindowSigma);

    double hist[4][4][8] = {};
    for (int v = -8; v <= 7; ++v) {
        const double vr = v + 0.5;
        for (int u = -8; u <= 7; ++u) {
            const double ur = u + 0.5;
            const double dx = cos_t * ur - sin_t * vr;
            const double dy = sin_t * ur + cos_t * vr;
            const int sx = static_cast<int>(std::lround(xo + dx));
            const int sy = static_cast<int>(std::lround(yo + dy));
            if (sx < 1 || sx > img.width - 2 || sy < 1 || sy > img.height - 2) continue;
            const Gradient g = gradient_at(img, sx, sy);
            if (g.magnitude == 0.0) continue;
            const double wgt = g.magnitude * std::exp(-(ur * ur + vr * vr) * inv_two_sigma2);

            const double rbin = vr / 4.0 + 1.5;
            const double cbin = ur / 4.0 + 1.5;
            const double obin = wrap_degrees(g.orientation_deg - kp.orientation) / 45.0;

            const int r0 = static_cast<int>(std::floor(rbin));
            const int c0 = static_cast<int>(std::floor(cbin));
            const int o0 = static_cast<int>(std::floor(obin)) % 8;
            const double dr = rbin - std::floor(rbin);
            const double dc = cbin - std::floor(cbin);
            const double dob = obin - std::floor(obin);

            for (int ri = 0; ri < 2; ++ri) {
                const int rr = r0 + ri;
                if (rr < 0 || rr > 3) continue;
                const double rw = ri == 0 ? 1.0 - dr : dr;
                for (int ci = 0; ci < 2; ++ci) {
                    const int cc = c0 + ci;
                    if (cc < 0 || cc > 3) continue;
                    const double cw = ci == 0 ? 1.0 - dc : dc;
                    for (int oi = 0; oi < 2; ++oi) {
                        const int oo = (o0 + oi) % 8;
                        const double ow = oi == 0 ? 1.0 - dob : dob;
                        hist[rr][cc][oo] += wgt * rw * cw * ow;
                    }
                }
            }
        }
    }

    Descriptor desc;
    size_t idx = 0;
    for (int rr = 0; rr < 4; ++rr) {
        for (int cc = 0; cc < 4; ++cc) {
            for (int oo = 0; oo < 8; ++oo) {
                desc.values[idx++] = hist[rr][cc][oo];
            }
        }
    }

    auto norm_of = [](const std::array<double, 128>& v) {
        double acc = 0.0;
        for (double x : v) acc += x * x;
        return std::sqrt(acc);
    };
    double norm = norm_of(desc.values);
    if (norm < 1e-12) {
        desc.values.fill(0.0); // degenerate: no gradient energy in the region
        return desc;
    }
    for (double& v : desc.values) v = std::min(v / norm, kDescriptorClamp);
    norm = norm_of(desc.values);
    for (double& v : desc.values) v /= norm;
    return desc;
}

std::vector<Keypoint> filter_by_mask(const std::vector<Keypoint>& kps, const IrisMask& mask) {
    if (mask.width <= 0 || mask.height <= 0) {
        throw ParamError("filter_by_mask: empty mask");
    }
    std::vector<Keypoint> out;
    out.reserve(kps.size());
    for (const Keypoint& kp : kps) {
        const int x = static_cast<int>(std::lround(kp.x));
        const int y = static_cast<int>(std::lround(kp.y));
        if (x >= 0 && x < mask.width && y >= 0 && y < mask.height && mask.at(x, y)) {
            out.push_back(kp);
        }
    }
    return out;
}

namespace {

void sort_keypoints(std::vector<Keypoint>& kps) {
    std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.octave != b.octave) return a.octave < b.octave;
        if (a.level != b.level) return a.level < b.level;
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        return a.orientation < b.orientation;
    });
}

} // namespace

FeatureSet detect_and_describe(const GrayImage& img, const SiftParams& params,
                               const IrisMask* mask) {
    if (mask && (mask->width != img.width || mask->height != img.height)) {
        throw ParamError("detect_and_describe: mask dimensions must match the image");
    }
    const ScaleSpace space = build_scale_space(img, params);
    const std::vector<ExtremumCandidate> candidates = detect_extrema(space);
    const std::vector<Keypoint> refined = refine_and_filter(candidates, space, params);

    std::vector<Keypoint> oriented;
    for (const Keypoint& kp : refined) {
        for (const Keypoint& o : assign_orientations(kp, space)) {
            oriented.push_back(o);
        }
    }
    if (mask) {
        oriented = filter_by_mask(oriented, *mask);
    }
    sort_keypoints(oriented);

    FeatureSet features;
    features.width = img.width;
    features.height = img.height;
    features.items.reserve(oriented.size());
    for (const Keypoint& kp : oriented) {
        features.items.push_back({kp, compute_descriptor(kp, space)});
    }
    return features;
}

void save_features(const FeatureSet& features, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    out << "# sift-keypoints v1 count=" << features.items.size() << "\n";
    out << "# width=" << features.width << " height=" << features.height << "\n";
    out << std::setprecision(6);
    for (const Feature& f : features.items) {
        out << f.keypoint.x << " " << f.keypoint.y << " " << f.keypoint.sigma << " "
            << f.keypoint.orientation;
        for (double v : f.descriptor.values) {
            out << " " << v;
        }
        out << "\n";
    }
    if (!out) {
        throw IoError("short write: " + path);
    }
}

FeatureSet load_features(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("empty keypoint file: " + path);
    }
    size_t count = 0;
    {
        std::istringstream hs(line);
        std::string hash, name, version, count_tok;
        hs >> hash >> name >> version >> count_tok;
        if (hash != "#" || name != "sift-keypoints" || version != "v1" ||
            count_tok.rfind("count=", 0) != 0) {
            throw FormatError("bad keypoint header: " + path);
        }
        count = std::stoul(count_tok.substr(6));
    }
    FeatureSet features;
    if (!std::getline(in, line)) {
        throw FormatError("missing dimensions line: " + path);
    }
    {
        std::istringstream hs(line);
        std::string hash, wtok, htok;
        hs >> hash >> wtok >> htok;
        if (hash != "#" || wtok.rfind("width=", 0) != 0 || htok.rfind("height=", 0) != 0) {
            throw FormatError("bad dimensions line: " + path);
        }
        features.width = std::stoi(wtok.substr(6));
        features.height = std::stoi(htok.substr(7));
    }
    features.items.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        Feature f;
        if (!(in >> f.keypoint.x >> f.keypoint.y >> f.keypoint.sigma >> f.keypoint.orientation)) {
            throw FormatError("truncated keypoint record in: " + path);
        }
        for (double& v : f.descriptor.values) {
            if (!(in >> v)) {
                throw FormatError("truncated descriptor in: " + path);
            }
        }
        features.items.push_back(std::move(f));
    }
    return features;
}

} // namespace irisift
