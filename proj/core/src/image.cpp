#include <irisift/image.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <png.h>

namespace irisift {

GrayImage GrayImage::filled(int width, int height, double value) {
    if (width <= 0 || height <= 0) {
        throw ParamError("GrayImage: dimensions must be positive");
    }
    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<size_t>(width) * height, value);
    return img;
}

double GrayImage::at_clamped(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y);
}

namespace {

// Skips whitespace and '#' comments in a PGM header.
int next_pgm_token(std::istream& in) {
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            in.unget();
            return c;
        }
        c = in.get();
    }
    return EOF;
}

int read_pgm_int(std::istream& in, const std::string& path) {
    if (next_pgm_token(in) == EOF) {
        throw FormatError("truncated PGM header: " + path);
    }
    int value = 0;
    if (!(in >> value)) {
        throw FormatError("bad PGM header field: " + path);
    }
    return value;
}

GrayImage load_pgm(std::istream& in, const std::string& path) {
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5') {
        throw FormatError("not a binary PGM (P5): " + path);
    }
    const int width = read_pgm_int(in, path);
    const int height = read_pgm_int(in, path);
    const int maxval = read_pgm_int(in, path);
    if (width <= 0 || height <= 0) {
        throw FormatError("non-positive PGM dimensions: " + path);
    }
    if (maxval <= 0 || maxval > 255) {
        throw FormatError("only 8-bit PGM supported (maxval 1..255): " + path);
    }
    in.get(); // single whitespace byte after maxval

    std::vector<unsigned char> raw(static_cast<size_t>(width) * height);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<size_t>(in.gcount()) != raw.size()) {
        throw FormatError("truncated PGM pixel data: " + path);
    }

    GrayImage img = GrayImage::filled(width, height);
    for (size_t i = 0; i < raw.size(); ++i) {
        img.pixels[i] = raw[i] / 255.0;
    }
    return img;
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;

    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

GrayImage load_png(const std::string& path) {
    PngReader r;
    r.fp = std::fopen(path.c_str(), "rb");
    if (!r.fp) {
        throw IoError("cannot open file: " + path);
    }
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw Error("libpng init failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) throw Error("libpng init failed");

    if (setjmp(png_jmpbuf(r.png))) {
        throw FormatError("corrupt PNG: " + path);
    }

    png_init_io(r.png, r.fp);
    png_read_png(r.png, r.info,
                 PNG_TRANSFORM_STRIP_16 | PNG_TRANSFORM_STRIP_ALPHA |
                     PNG_TRANSFORM_EXPAND | PNG_TRANSFORM_PACKING,
                 nullptr);

    const png_uint_32 width = png_get_image_width(r.png, r.info);
    const png_uint_32 height = png_get_image_height(r.png, r.info);
    const png_byte channels = png_get_channels(r.png, r.info);
    if (width == 0 || height == 0) {
        throw FormatError("empty PNG: " + path);
    }
    if (channels != 1 && channels != 3) {
        throw FormatError("unsupported PNG channel count: " + path);
    }

    png_bytepp rows = png_get_rows(r.png, r.info);
    GrayImage img = GrayImage::filled(static_cast<int>(width), static_cast<int>(height));
    for (png_uint_32 y = 0; y < height; ++y) {
        const png_bytep row = rows[y];
        for (png_uint_32 x = 0; x < width; ++x) {
            double v;
            if (channels == 1) {
                v = row[x] / 255.0;
            } else {
                const double rr = row[3 * x + 0];
                const double gg = row[3 * x + 1];
                const double bb = row[3 * x + 2];
                v = (0.299 * rr + 0.587 * gg + 0.114 * bb) / 255.0;
            }
            img.at(static_cast<int>(x), static_cast<int>(y)) = v;
        }
    }
    return img;
}

} // namespace

GrayImage load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    unsigned char sig[8] = {};
    in.read(reinterpret_cast<char*>(sig), 8);
    if (in.gcount() < 2) {
        throw FormatError("file too short: " + path);
    }
    in.clear();
    in.seekg(0);

    if (sig[0] == 'P' && sig[1] == '5') {
        return load_pgm(in, path);
    }
    if (in.gcount() >= 8 && png_sig_cmp(sig, 0, 8) == 0) {
        in.close();
        return load_png(path);
    }
    throw FormatError("unsupported image format (need 8-bit PGM or PNG): " + path);
}

void save_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.pixels.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        const double v = std::clamp(img.pixels[i], 0.0, 1.0);
        raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) {
        throw IoError("short write: " + path);
    }
}

std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) {
        throw ParamError("gaussian_kernel: sigma must be > 0");
    }
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> k(static_cast<size_t>(2 * radius + 1));
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double w = std::exp(-static_cast<double>(i) * i * inv2s2);
        k[static_cast<size_t>(i + radius)] = w;
        sum += w;
    }
    for (double& w : k) w /= sum;
    return k;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    const std::vector<double> kernel = gaussian_kernel(sigma);
    const int radius = static_cast<int>(kernel.size() / 2);
    const int w = img.width;
    const int h = img.height;

    // Horizontal pass.
    GrayImage tmp = GrayImage::filled(w, h);
    for (int y = 0; y < h; ++y) {
        const double* row = &img.pixels[static_cast<size_t>(y) * w];
        double* out = &tmp.pixels[static_cast<size_t>(y) * w];
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            if (x >= radius && x + radius < w) {
                for (int t = -radius; t <= radius; ++t) {
                    acc += kernel[static_cast<size_t>(t + radius)] * row[x + t];
                }
            } else {
                for (int t = -radius; t <= radius; ++t) {
                    const int xx = std::clamp(x + t, 0, w - 1);
                    acc += kernel[static_cast<size_t>(t + radius)] * row[xx];
                }
            }
            out[x] = acc;
        }
    }

    // Vertical pass.
    GrayImage out = GrayImage::filled(w, h);
    for (int y = 0; y < h; ++y) {
        double* dst = &out.pixels[static_cast<size_t>(y) * w];
        if (y >= radius && y + radius < h) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int t = -radius; t <= radius; ++t) {
                    acc += kernel[static_cast<size_t>(t + radius)] *
                           tmp.pixels[static_cast<size_t>(y + t) * w + x];
                }
                dst[x] = acc;
            }
        } else {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int t = -radius; t <= radius; ++t) {
                    const int yy = std::clamp(y + t, 0, h - 1);
                    acc += kernel[static_cast<size_t>(t + radius)] *
                           tmp.pixels[static_cast<size_t>(yy) * w + x];
                }
                dst[x] = acc;
            }
        }
    }
    return out;
}

GrayImage downsample2(const GrayImage& img) {
    if (img.width < 2 || img.height < 2) {
        throw SizeError("downsample2: image must be at least 2x2");
    }
    GrayImage out = GrayImage::filled(img.width / 2, img.height / 2);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            out.at(x, y) = img.at(2 * x, 2 * y);
        }
    }
    return out;
}

Gradient gradient_at(const GrayImage& img, int x, int y) {
    if (x < 1 || x > img.width - 2 || y < 1 || y > img.height - 2) {
        throw BoundsError("gradient_at: coordinates on the 1-pixel border");
    }
    const double dx = img.at(x + 1, y) - img.at(x - 1, y);
    const double dy = img.at(x, y + 1) - img.at(x, y - 1);
    Gradient g;
    g.magnitude = std::sqrt(dx * dx + dy * dy);
    double deg = std::atan2(dy, dx) * 180.0 / std::numbers::pi;
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg = 0.0;
    g.orientation_deg = deg;
    return g;
}

} // namespace irisift
