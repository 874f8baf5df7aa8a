#pragma once

// Netpbm graymap (P2 ASCII / P5 binary) reading and writing, and the
// standardized central block used for image-mode analysis.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "rmtres/armodel.hpp"
#include "rmtres/errors.hpp"

namespace rmtres {

struct ImageGray {
    std::size_t width = 0;
    std::size_t height = 0;
    unsigned maxval = 255;
    std::vector<std::uint16_t> pixels; ///< row-major

    int bit_depth() const noexcept { return maxval > 255 ? 16 : 8; }
    std::uint16_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }

    friend bool operator==(const ImageGray&, const ImageGray&) = default;
};

namespace detail {

class PgmScanner {
public:
    PgmScanner(std::string_view data, std::size_t start) : data_(data), pos_(start) {}

    std::size_t offset() const noexcept { return pos_; }

    /// Skips whitespace and '#' comments.
    void skip_space() {
        while (pos_ < data_.size()) {
            const char c = data_[pos_];
            if (c == '#') {
                while (pos_ < data_.size() && data_[pos_] != '\n' && data_[pos_] != '\r') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    /// Unsigned decimal token; `what` names the field in error messages.
    unsigned long number(const char* what, bool payload = false) {
        skip_space();
        if (pos_ >= data_.size()) {
            if (payload) throw TruncatedFile("PGM payload ends before all samples were read");
            throw ParseError(std::string("unexpected end of file reading ") + what, pos_);
        }
        const std::size_t start = pos_;
        unsigned long v = 0;
        while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_]))) {
            v = v * 10 + static_cast<unsigned long>(data_[pos_] - '0');
            if (v > 0xffffffUL) throw ParseError(std::string(what) + " is too large", start);
            ++pos_;
        }
        if (pos_ == start) throw ParseError(std::string("expected a number for ") + what, start);
        if (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_])) && data_[pos_] != '#') {
            throw ParseError(std::string("malformed ") + what, pos_);
        }
        return v;
    }

    /// The single whitespace byte separating the header from binary samples.
    void header_terminator() {
        if (pos_ >= data_.size()) throw TruncatedFile("PGM header has no payload");
        if (!std::isspace(static_cast<unsigned char>(data_[pos_]))) {
            throw ParseError("expected whitespace after maxval", pos_);
        }
        ++pos_;
    }

    std::string_view rest() const noexcept { return data_.substr(pos_); }

private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline ImageGray parse_pgm(std::string_view data) {
    if (data.size() < 2 || data[0] != 'P') throw ParseError("missing PGM magic number", 0);
    const char kind = data[1];
    if (kind != '2' && kind != '5') {
        throw ParseError(std::string("unsupported magic 'P") + kind + "' (only P2 and P5 graymaps)", 0);
    }
    detail::PgmScanner sc(data, 2);

    ImageGray img;
    img.width = sc.number("width");
    img.height = sc.number("height");
    const std::size_t maxval_at = sc.offset();
    const unsigned long maxval = sc.number("maxval");
    if (maxval == 0 || maxval > 65535) throw ParseError("maxval must lie in [1, 65535]", maxval_at);
    img.maxval = static_cast<unsigned>(maxval);
    if (img.width == 0 || img.height == 0) throw ParseError("image dimensions must be positive", 2);

    const std::size_t count = img.width * img.height;
    img.pixels.resize(count);
    if (kind == '2') {
        for (std::size_t i = 0; i < count; ++i) {
            const unsigned long v = sc.number("sample", true);
            if (v > img.maxval) throw ParseError("sample exceeds maxval", sc.offset());
            img.pixels[i] = static_cast<std::uint16_t>(v);
        }
        return img;
    }

    sc.header_terminator();
    const std::string_view payload = sc.rest();
    const std::size_t bytes = img.maxval > 255 ? 2 : 1;
    if (payload.size() < count * bytes) {
        throw TruncatedFile("PGM payload has " + std::to_string(payload.size()) + " bytes, expected " +
                            std::to_string(count * bytes));
    }
    for (std::size_t i = 0; i < count; ++i) {
        unsigned v = static_cast<unsigned char>(payload[i * bytes]);
        if (bytes == 2) v = (v << 8) | static_cast<unsigned char>(payload[i * bytes + 1]);
        if (v > img.maxval) {
            throw ParseError("sample exceeds maxval", sc.offset() + i * bytes);
        }
        img.pixels[i] = static_cast<std::uint16_t>(v);
    }
    return img;
}

inline ImageGray read_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("cannot open image '" + path + "'");
    const std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_pgm(data);
}

/// Serializes as binary P5 (big-endian samples when maxval > 255).
inline std::string encode_pgm(const ImageGray& img) {
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n" +
                      std::to_string(img.maxval) + "\n";
    for (std::uint16_t v : img.pixels) {
        if (img.maxval > 255) out += static_cast<char>(v >> 8);
        out += static_cast<char>(v & 0xff);
    }
    return out;
}

inline void write_pgm(const std::string& path, const ImageGray& img) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("cannot open '" + path + "' for writing");
    const std::string s = encode_pgm(img);
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
}

/// 16-bit image of a real matrix: values are shifted so the minimum maps to
/// zero and rounded; the offset is returned through `shift`.
inline ImageGray to_image(const Matrix& m, double* shift = nullptr) {
    double lo = m(0, 0), hi = m(0, 0);
    for (double v : m.values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo > 65535.0) throw InvalidInput("value range exceeds 16 bits; quantize with a larger step");
    ImageGray img;
    img.width = m.cols();
    img.height = m.rows();
    img.maxval = std::max(1u, static_cast<unsigned>(std::ceil(hi - lo)));
    img.pixels.reserve(m.values().size());
    for (double v : m.values()) img.pixels.push_back(static_cast<std::uint16_t>(std::lround(v - lo)));
    if (shift) *shift = lo;
    return img;
}

struct ImageBlock {
    Matrix block;
    double mean = 0.0;
    double stddev = 1.0; ///< population standard deviation before standardization
    std::size_t row0 = 0;
    std::size_t col0 = 0;
};

/// Central size x size crop (offsets rounded toward the top-left), converted to
/// real values and, when `standardize_block` is set, to zero mean and unit
/// standard deviation.
inline ImageBlock central_block(const ImageGray& img, std::size_t size, bool standardize_block = true) {
    if (size == 0 || size > img.width || size > img.height) {
        throw InvalidSize("block size " + std::to_string(size) + " does not fit a " + std::to_string(img.width) +
                          "x" + std::to_string(img.height) + " image");
    }
    ImageBlock out{Matrix(size, size), 0.0, 1.0, (img.height - size) / 2, (img.width - size) / 2};
    for (std::size_t i = 0; i < size; ++i)
        for (std::size_t j = 0; j < size; ++j) out.block(i, j) = img.at(out.row0 + i, out.col0 + j);
    if (!standardize_block) return out;

    double mean = 0.0;
    for (double v : out.block.values()) mean += v;
    mean /= static_cast<double>(size * size);
    double var = 0.0;
    for (double v : out.block.values()) var += (v - mean) * (v - mean);
    var /= static_cast<double>(size * size);
    out.mean = mean;
    out.stddev = std::sqrt(var);
    out.block = standardize(std::move(out.block));
    return out;
}

} // namespace rmtres
