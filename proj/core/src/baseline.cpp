#include <irisift/baseline.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <sstream>

namespace irisift {

void BaselineParams::validate() const {
    if (radial_res < 1) throw ParamError("BaselineParams: radial_res must be >= 1");
    if (angular_res < 8) throw ParamError("BaselineParams: angular_res must be >= 8");
    if (!(wavelength > 2.0)) throw ParamError("BaselineParams: wavelength must be > 2 samples");
    if (!(sigma_on_f > 0.0 && sigma_on_f < 1.0)) {
        throw ParamError("BaselineParams: sigma_on_f must be in (0,1)");
    }
    if (max_shift < 0) throw ParamError("BaselineParams: max_shift must be >= 0");
}

namespace {

// Bilinear sample with validity; valid iff the point lies inside [0,w-1]x[0,h-1].
bool bilinear(const GrayImage& img, double x, double y, double& out) {
    if (x < 0.0 || y < 0.0 || x > img.width - 1 || y > img.height - 1) return false;
    const int x0 = std::min(static_cast<int>(x), img.width - 2 >= 0 ? img.width - 2 : 0);
    const int y0 = std::min(static_cast<int>(y), img.height - 2 >= 0 ? img.height - 2 : 0);
    const double fx = x - x0;
    const double fy = y - y0;
    const double v00 = img.at(x0, y0);
    const double v10 = img.at(x0 + 1, y0);
    const double v01 = img.at(x0, y0 + 1);
    const double v11 = img.at(x0 + 1, y0 + 1);
    out = (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 + (1 - fx) * fy * v01 + fx * fy * v11;
    return true;
}

} // namespace

NormalizedIris rubber_sheet_normalize(const GrayImage& img, const IrisAnnulus& annulus,
                                      int radial_res, int angular_res) {
    annulus.validate();
    if (radial_res < 1 || angular_res < 1) {
        throw ParamError("rubber_sheet_normalize: resolutions must be >= 1");
    }
    const double pcx = annulus.pupil.cx;
    const double pcy = annulus.pupil.cy;
    if (pcx < 0 || pcx > img.width - 1 || pcy < 0 || pcy > img.height - 1) {
        throw ParamError("rubber_sheet_normalize: pupil center outside the image");
    }

    NormalizedIris norm;
    norm.radial_res = radial_res;
    norm.angular_res = angular_res;
    norm.samples.assign(static_cast<size_t>(radial_res) * angular_res, 0.0);
    norm.valid.assign(static_cast<size_t>(radial_res) * angular_res, 0);

    const double ocx = annulus.iris.cx - pcx; // iris center relative to pupil center
    const double ocy = annulus.iris.cy - pcy;
    const double ri2 = annulus.iris.radius * annulus.iris.radius;

    for (int j = 0; j < angular_res; ++j) {
        const double theta = 2.0 * std::numbers::pi * j / angular_res;
        const double dx = std::cos(theta);
        const double dy = std::sin(theta);

        const double px = pcx + annulus.pupil.radius * dx;
        const double py = pcy + annulus.pupil.radius * dy;

        // Ray from the pupil center against the iris circle:
        // |t*d - oc|^2 = ri^2  =>  t^2 - 2 t (d.oc) + |oc|^2 - ri^2 = 0.
        const double b = dx * ocx + dy * ocy;
        const double c = ocx * ocx + ocy * ocy - ri2;
        const double t = b + std::sqrt(b * b - c); // positive root (c < 0 inside)
        const double qx = pcx + t * dx;
        const double qy = pcy + t * dy;

        for (int i = 0; i < radial_res; ++i) {
            const double f = (i + 0.5) / radial_res;
            const double sx = px + f * (qx - px);
            const double sy = py + f * (qy - py);
            double value = 0.0;
            const size_t idx = static_cast<size_t>(i) * angular_res + j;
            if (bilinear(img, sx, sy, value)) {
                norm.samples[idx] = value;
                norm.valid[idx] = 1;
            }
        }
    }
    return norm;
}

IrisCode log_gabor_encode(const NormalizedIris& norm, const BaselineParams& params) {
    params.validate();
    const int rows = norm.radial_res;
    const int n = norm.angular_res;
    if (n < 8) {
        throw ParamError("log_gabor_encode: angular resolution must be >= 8");
    }

    // Log-Gabor transfer function over non-negative DFT bins; G(0) = 0 and
    // negative frequencies are suppressed, yielding a complex analytic response.
    const double f0 = 1.0 / params.wavelength;
    const double denom = 2.0 * std::log(params.sigma_on_f) * std::log(params.sigma_on_f);
    std::vector<double> transfer(static_cast<size_t>(n / 2) + 1, 0.0);
    for (int k = 1; k <= n / 2; ++k) {
        const double f = static_cast<double>(k) / n;
        const double lg = std::log(f / f0);
        transfer[static_cast<size_t>(k)] = std::exp(-(lg * lg) / denom);
    }

    // Twiddle table e^{-2*pi*i*m/n} for m in [0, n).
    std::vector<std::complex<double>> twiddle(static_cast<size_t>(n));
    for (int m = 0; m < n; ++m) {
        const double ang = -2.0 * std::numbers::pi * m / n;
        twiddle[static_cast<size_t>(m)] = {std::cos(ang), std::sin(ang)};
    }

    IrisCode code;
    code.radial_res = rows;
    code.angular_res = n;
    code.bits.assign(static_cast<size_t>(rows) * n * 2, 0);
    code.mask.assign(static_cast<size_t>(rows) * n * 2, 0);

    std::vector<std::complex<double>> spectrum(static_cast<size_t>(n / 2) + 1);
    for (int row = 0; row < rows; ++row) {
        const double* signal = &norm.samples[static_cast<size_t>(row) * n];
        const char* valid = &norm.valid[static_cast<size_t>(row) * n];

        int invalid = 0;
        for (int j = 0; j < n; ++j) invalid += valid[j] == 0;
        const bool row_masked = 2 * invalid > n;

        // Forward DFT restricted to the bins the filter passes.
        for (int k = 1; k <= n / 2; ++k) {
            if (transfer[static_cast<size_t>(k)] == 0.0) {
                spectrum[static_cast<size_t>(k)] = 0.0;
                continue;
            }
            std::complex<double> acc{0.0, 0.0};
            for (int m = 0; m < n; ++m) {
                acc += signal[m] * twiddle[static_cast<size_t>((static_cast<long>(k) * m) % n)];
            }
            spectrum[static_cast<size_t>(k)] = acc * transfer[static_cast<size_t>(k)];
        }

        // Inverse transform (positive frequencies only) and phase quantization.
        for (int m = 0; m < n; ++m) {
            std::complex<double> resp{0.0, 0.0};
            for (int k = 1; k <= n / 2; ++k) {
                resp += spectrum[static_cast<size_t>(k)] *
                        std::conj(twiddle[static_cast<size_t>((static_cast<long>(k) * m) % n)]);
            }
            resp /= static_cast<double>(n);
            const auto [b0, b1] = phase_quadrant_bits(resp.real(), resp.imag());
            const size_t base = (static_cast<size_t>(row) * n + static_cast<size_t>(m)) * 2;
            code.bits[base] = b0 ? 1 : 0;
            code.bits[base + 1] = b1 ? 1 : 0;
            const bool usable = !row_masked && valid[m] != 0;
            code.mask[base] = usable ? 1 : 0;
            code.mask[base + 1] = usable ? 1 : 0;
        }
    }
    return code;
}

double hamming_match(const IrisCode& a, const IrisCode& b, int max_shift) {
    if (a.radial_res != b.radial_res || a.angular_res != b.angular_res) {
        throw ParamError("hamming_match: codes have different dimensions");
    }
    if (max_shift < 0) throw ParamError("hamming_match: max_shift must be >= 0");

    const int rows = a.radial_res;
    const int n = a.angular_res;
    double best = -1.0;
    for (int shift = -max_shift; shift <= max_shift; ++shift) {
        long disagree = 0;
        long overlap = 0;
        for (int row = 0; row < rows; ++row) {
            const size_t row_base = static_cast<size_t>(row) * n;
            for (int col = 0; col < n; ++col) {
                const int bcol = ((col + shift) % n + n) % n;
                const size_t ia = (row_base + static_cast<size_t>(col)) * 2;
                const size_t ib = (row_base + static_cast<size_t>(bcol)) * 2;
                for (int bit = 0; bit < 2; ++bit) {
                    if (a.mask[ia + bit] && b.mask[ib + bit]) {
                        ++overlap;
                        disagree += a.bits[ia + bit] != b.bits[ib + bit];
                    }
                }
            }
        }
        if (overlap == 0) continue;
        const double hd = static_cast<double>(disagree) / static_cast<double>(overlap);
        if (best < 0.0 || hd < best) best = hd;
    }
    if (best < 0.0) {
        throw IncomparableCodesError("hamming_match: no shift has overlapping mask bits");
    }
    return best;
}

namespace {

std::string bits_to_hex(const std::vector<char>& bits) {
    std::string hex;
    hex.reserve((bits.size() + 3) / 4);
    int nibble = 0;
    int filled = 0;
    for (char b : bits) {
        nibble = (nibble << 1) | (b ? 1 : 0);
        if (++filled == 4) {
            hex.push_back("0123456789abcdef"[nibble]);
            nibble = 0;
            filled = 0;
        }
    }
    if (filled > 0) {
        nibble <<= (4 - filled);
        hex.push_back("0123456789abcdef"[nibble]);
    }
    return hex;
}

std::vector<char> hex_to_bits(const std::string& hex, size_t bit_count, const std::string& path) {
    if (hex.size() != (bit_count + 3) / 4) {
        throw FormatError("iris code hex line has wrong length: " + path);
    }
    std::vector<char> bits;
    bits.reserve(bit_count);
    for (char c : hex) {
        int v;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
        else throw FormatError("bad hex digit in iris code: " + path);
        for (int bit = 3; bit >= 0; --bit) {
            if (bits.size() < bit_count) {
                bits.push_back((v >> bit) & 1 ? 1 : 0);
            }
        }
    }
    return bits;
}

} // namespace

void save_iris_code(const IrisCode& code, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    out << "# iriscode v1 R=" << code.radial_res << " A=" << code.angular_res << "\n";
    out << bits_to_hex(code.bits) << "\n";
    out << bits_to_hex(code.mask) << "\n";
    if (!out) {
        throw IoError("short write: " + path);
    }
}

IrisCode load_iris_code(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    std::string header;
    if (!std::getline(in, header)) {
        throw FormatError("empty iris code file: " + path);
    }
    std::istringstream hs(header);
    std::string hash, name, version, rtok, atok;
    hs >> hash >> name >> version >> rtok >> atok;
    if (hash != "#" || name != "iriscode" || version != "v1" || rtok.rfind("R=", 0) != 0 ||
        atok.rfind("A=", 0) != 0) {
        throw FormatError("bad iris code header: " + path);
    }
    IrisCode code;
    code.radial_res = std::stoi(rtok.substr(2));
    code.angular_res = std::stoi(atok.substr(2));
    if (code.radial_res < 1 || code.angular_res < 1) {
        throw FormatError("bad iris code dimensions: " + path);
    }
    const size_t bit_count = static_cast<size_t>(code.radial_res) * code.angular_res * 2;
    std::string bits_hex, mask_hex;
    if (!std::getline(in, bits_hex) || !std::getline(in, mask_hex)) {
        throw FormatError("truncated iris code file: " + path);
    }
    code.bits = hex_to_bits(bits_hex, bit_count, path);
    code.mask = hex_to_bits(mask_hex, bit_count, path);
    return code;
}

} // namespace irisift
