#include "prominence/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace prominence {

RasterImage RasterImage::make(int width, int height, int channels,
                              std::uint8_t fill) {
    RasterImage img;
    img.width = width;
    img.height = height;
    img.channels = channels;
    img.data.assign(static_cast<std::size_t>(width) * height * channels, fill);
    img.validate();
    return img;
}

void RasterImage::validate() const {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("image dimensions must be positive");
    }
    if (channels != 1 && channels != 3) {
        throw std::invalid_argument("image must have 1 or 3 channels");
    }
    if (data.size() != static_cast<std::size_t>(width) * height * channels) {
        throw std::invalid_argument("image data length does not match dimensions");
    }
}

void DepthMap::validate() const {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("depth map dimensions must be positive");
    }
    if (data.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("depth data length does not match dimensions");
    }
    for (float v : data) {
        if (!(v >= 0.0f) || !std::isfinite(v)) {
            throw std::invalid_argument("depth values must be finite and non-negative");
        }
    }
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail_unreadable(const std::string& path, const char* why) {
    throw std::runtime_error("unreadable file: " + path + " (" + why + ")");
}

std::uint8_t rescale_sample(unsigned v, unsigned maxval) {
    if (maxval == 255) return static_cast<std::uint8_t>(v);
    return static_cast<std::uint8_t>((v * 255u + maxval / 2) / maxval);
}

bool has_suffix(const std::string& s, const char* suffix) {
    std::size_t n = std::strlen(suffix);
    return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

// ---------------------------------------------------------------------------
// PNG
// ---------------------------------------------------------------------------

// keep libpng from printing to stderr; errors surface via longjmp instead
void silent_png_error(png_structp png, png_const_charp) { png_longjmp(png, 1); }
void silent_png_warning(png_structp, png_const_charp) {}

// Raw decode: samples at native bit depth, gray or RGB.
struct PngRaw {
    int width = 0;
    int height = 0;
    int channels = 0;
    int bit_depth = 0;                 // 8 or 16
    std::vector<std::uint16_t> samples;  // row-major, interleaved
};

PngRaw read_png_raw(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) fail_unreadable(path, "cannot open");

    unsigned char header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8)) {
        fail_unreadable(path, "not a PNG");
    }

    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, silent_png_error, silent_png_warning);
    if (!png) throw std::runtime_error("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    std::vector<png_bytep> row_ptrs;
    std::vector<std::uint8_t> buffer;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail_unreadable(path, "corrupt PNG stream");
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int bit_depth = png_get_bit_depth(png, info);
    int color_type = png_get_color_type(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (bit_depth == 16) png_set_swap(png);  // little-endian uint16 rows

    png_read_update_info(png, info);
    bit_depth = png_get_bit_depth(png, info);
    int channels = png_get_channels(png, info);

    PngRaw out;
    out.width = static_cast<int>(w);
    out.height = static_cast<int>(h);
    out.channels = channels;
    out.bit_depth = bit_depth;

    std::size_t rowbytes = png_get_rowbytes(png, info);
    buffer.assign(rowbytes * h, 0);
    row_ptrs.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) row_ptrs[y] = buffer.data() + y * rowbytes;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    std::size_t n = static_cast<std::size_t>(out.width) * out.height * channels;
    out.samples.resize(n);
    if (bit_depth == 16) {
        const std::uint16_t* src = reinterpret_cast<const std::uint16_t*>(buffer.data());
        std::copy(src, src + n, out.samples.begin());
    } else {
        for (std::size_t i = 0; i < n; ++i) out.samples[i] = buffer[i];
    }
    return out;
}

void write_png(const std::string& path, const std::uint8_t* data, int width,
               int height, int channels) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot open for writing: " + path);
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, silent_png_error, silent_png_warning);
    if (!png) throw std::runtime_error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    std::vector<png_bytep> row_ptrs(height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("PNG write failed: " + path);
    }
    png_init_io(png, fp.get());
    int color = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, width, height, 8, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::size_t rowbytes = static_cast<std::size_t>(width) * channels;
    for (int y = 0; y < height; ++y) {
        row_ptrs[y] = const_cast<png_bytep>(data + y * rowbytes);
    }
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// ---------------------------------------------------------------------------
// PNM (P2/P3/P5/P6)
// ---------------------------------------------------------------------------

struct PnmRaw {
    int width = 0;
    int height = 0;
    int channels = 0;
    unsigned maxval = 255;
    std::vector<std::uint16_t> samples;
};

int pnm_next_token(std::istream& in, std::string& tok) {
    tok.clear();
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
        } else if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            while ((c = in.get()) != EOF && !std::isspace(c) && c != '#') {
                tok.push_back(static_cast<char>(c));
            }
            if (c == '#') in.unget();
            return 0;
        }
    }
    return -1;
}

PnmRaw read_pnm_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_unreadable(path, "cannot open");
    std::string magic;
    if (pnm_next_token(in, magic) != 0) fail_unreadable(path, "empty file");
    bool ascii;
    int channels;
    if (magic == "P2") {
        ascii = true;
        channels = 1;
    } else if (magic == "P3") {
        ascii = true;
        channels = 3;
    } else if (magic == "P5") {
        ascii = false;
        channels = 1;
    } else if (magic == "P6") {
        ascii = false;
        channels = 3;
    } else {
        throw std::runtime_error("unsupported format: " + path);
    }
    std::string tok;
    long vals[3];
    for (int i = 0; i < 3; ++i) {
        if (pnm_next_token(in, tok) != 0) fail_unreadable(path, "truncated header");
        try {
            vals[i] = std::stol(tok);
        } catch (const std::exception&) {
            fail_unreadable(path, "bad header token");
        }
    }
    PnmRaw out;
    out.width = static_cast<int>(vals[0]);
    out.height = static_cast<int>(vals[1]);
    long maxval = vals[2];
    if (out.width < 1 || out.height < 1) {
        throw std::runtime_error("zero-dimension image: " + path);
    }
    if (maxval < 1 || maxval > 65535) fail_unreadable(path, "bad maxval");
    out.maxval = static_cast<unsigned>(maxval);
    out.channels = channels;
    std::size_t n = static_cast<std::size_t>(out.width) * out.height * channels;
    out.samples.resize(n);
    if (ascii) {
        for (std::size_t i = 0; i < n; ++i) {
            if (pnm_next_token(in, tok) != 0) fail_unreadable(path, "truncated data");
            long v = std::stol(tok);
            if (v < 0 || v > maxval) fail_unreadable(path, "sample out of range");
            out.samples[i] = static_cast<std::uint16_t>(v);
        }
    } else {
        int bytes = maxval > 255 ? 2 : 1;
        std::vector<std::uint8_t> buf(n * bytes);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
            fail_unreadable(path, "truncated data");
        }
        for (std::size_t i = 0; i < n; ++i) {
            out.samples[i] = bytes == 2
                                 ? static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1])
                                 : buf[i];
        }
    }
    return out;
}

void write_pnm(const RasterImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << (img.channels == 1 ? "P5" : "P6") << "\n"
        << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// BMP (uncompressed 8-bit palette / 24-bit)
// ---------------------------------------------------------------------------

std::uint32_t rd_u32(const std::uint8_t* p) {
    return p[0] | (p[1] << 8) | (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}
std::uint16_t rd_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

RasterImage read_bmp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_unreadable(path, "cannot open");
    std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
    if (raw.size() < 54 || raw[0] != 'B' || raw[1] != 'M') {
        fail_unreadable(path, "not a BMP");
    }
    std::uint32_t data_offset = rd_u32(&raw[10]);
    std::uint32_t header_size = rd_u32(&raw[14]);
    if (header_size < 40) fail_unreadable(path, "unsupported BMP header");
    std::int32_t w = static_cast<std::int32_t>(rd_u32(&raw[18]));
    std::int32_t h = static_cast<std::int32_t>(rd_u32(&raw[22]));
    std::uint16_t bpp = rd_u16(&raw[28]);
    std::uint32_t compression = rd_u32(&raw[30]);
    if (compression != 0) fail_unreadable(path, "compressed BMP unsupported");
    bool top_down = h < 0;
    std::int32_t height = top_down ? -h : h;
    if (w < 1 || height < 1) throw std::runtime_error("zero-dimension image: " + path);

    if (bpp == 24) {
        RasterImage img = RasterImage::make(w, height, 3);
        std::size_t stride = (static_cast<std::size_t>(w) * 3 + 3) & ~std::size_t{3};
        if (raw.size() < data_offset + stride * height) fail_unreadable(path, "truncated data");
        for (int y = 0; y < height; ++y) {
            int src_y = top_down ? y : height - 1 - y;
            const std::uint8_t* row = &raw[data_offset + stride * src_y];
            for (int x = 0; x < w; ++x) {
                img.at(x, y, 0) = row[3 * x + 2];  // BGR -> RGB
                img.at(x, y, 1) = row[3 * x + 1];
                img.at(x, y, 2) = row[3 * x + 0];
            }
        }
        return img;
    }
    if (bpp == 8) {
        std::uint32_t palette_n = rd_u32(&raw[46]);
        if (palette_n == 0) palette_n = 256;
        std::size_t pal_off = 14 + header_size;
        if (raw.size() < pal_off + 4 * palette_n) fail_unreadable(path, "truncated palette");
        bool gray = true;
        for (std::uint32_t i = 0; i < palette_n; ++i) {
            const std::uint8_t* e = &raw[pal_off + 4 * i];
            if (e[0] != e[1] || e[1] != e[2]) gray = false;
        }
        std::size_t stride = (static_cast<std::size_t>(w) + 3) & ~std::size_t{3};
        if (raw.size() < data_offset + stride * height) fail_unreadable(path, "truncated data");
        RasterImage img = RasterImage::make(w, height, gray ? 1 : 3);
        for (int y = 0; y < height; ++y) {
            int src_y = top_down ? y : height - 1 - y;
            const std::uint8_t* row = &raw[data_offset + stride * src_y];
            for (int x = 0; x < w; ++x) {
                std::uint8_t idx = row[x];
                if (idx >= palette_n) idx = 0;
                const std::uint8_t* e = &raw[pal_off + 4 * idx];
                if (gray) {
                    img.at(x, y) = e[0];
                } else {
                    img.at(x, y, 0) = e[2];
                    img.at(x, y, 1) = e[1];
                    img.at(x, y, 2) = e[0];
                }
            }
        }
        return img;
    }
    fail_unreadable(path, "unsupported BMP bit depth");
}

bool looks_like_png(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    unsigned char sig[8] = {0};
    in.read(reinterpret_cast<char*>(sig), 8);
    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    return in.gcount() == 8 && std::memcmp(sig, png_sig, 8) == 0;
}

char sniff_magic(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    char c = 0;
    in.get(c);
    return in ? c : '\0';
}

}  // namespace

RasterImage load_image(const std::string& path) {
    if (looks_like_png(path)) {
        PngRaw raw = read_png_raw(path);
        if (raw.width < 1 || raw.height < 1) {
            throw std::runtime_error("zero-dimension image: " + path);
        }
        if (raw.channels != 1 && raw.channels != 3) {
            throw std::runtime_error("unsupported format: " + path);
        }
        RasterImage img = RasterImage::make(raw.width, raw.height, raw.channels);
        unsigned maxval = raw.bit_depth == 16 ? 65535u : 255u;
        for (std::size_t i = 0; i < raw.samples.size(); ++i) {
            img.data[i] = rescale_sample(raw.samples[i], maxval);
        }
        return img;
    }
    char magic = sniff_magic(path);
    if (magic == 'P') {
        PnmRaw raw = read_pnm_raw(path);
        RasterImage img = RasterImage::make(raw.width, raw.height, raw.channels);
        for (std::size_t i = 0; i < raw.samples.size(); ++i) {
            img.data[i] = rescale_sample(raw.samples[i], raw.maxval);
        }
        return img;
    }
    if (magic == 'B') {
        return read_bmp(path);
    }
    if (magic == '\0') fail_unreadable(path, "cannot open or empty");
    throw std::runtime_error("unsupported format: " + path);
}

void save_image(const RasterImage& img, const std::string& path) {
    img.validate();
    if (has_suffix(path, ".png")) {
        write_png(path, img.data.data(), img.width, img.height, img.channels);
    } else if (has_suffix(path, ".pgm") || has_suffix(path, ".ppm")) {
        write_pnm(img, path);
    } else {
        throw std::runtime_error("unsupported output format: " + path);
    }
}

RasterImage to_grayscale(const RasterImage& img) {
    img.validate();
    if (img.channels == 1) return img;
    RasterImage gray = RasterImage::make(img.width, img.height, 1);
    const std::uint8_t* src = img.data.data();
    for (std::size_t i = 0; i < gray.data.size(); ++i, src += 3) {
        // integer Rec.601 luma, round-half-up; (v,v,v) maps to v exactly
        unsigned v = 299u * src[0] + 587u * src[1] + 114u * src[2] + 500u;
        gray.data[i] = static_cast<std::uint8_t>(v / 1000u);
    }
    return gray;
}

DepthMap load_depth_map(const std::string& path, int expected_width,
                        int expected_height) {
    int w, h, channels;
    std::vector<std::uint16_t> samples;
    if (looks_like_png(path)) {
        PngRaw raw = read_png_raw(path);
        w = raw.width;
        h = raw.height;
        channels = raw.channels;
        samples = std::move(raw.samples);
    } else if (sniff_magic(path) == 'P') {
        PnmRaw raw = read_pnm_raw(path);
        w = raw.width;
        h = raw.height;
        channels = raw.channels;
        samples = std::move(raw.samples);
    } else {
        throw std::runtime_error("unsupported depth format: " + path);
    }
    if (channels != 1) {
        throw std::runtime_error("depth map must be grayscale: " + path);
    }
    if (w != expected_width || h != expected_height) {
        std::ostringstream msg;
        msg << "depth map dimension mismatch: " << path << " is " << w << "x" << h
            << ", expected " << expected_width << "x" << expected_height;
        throw std::runtime_error(msg.str());
    }
    DepthMap depth;
    depth.width = w;
    depth.height = h;
    depth.data.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        depth.data[i] = static_cast<float>(samples[i]);
    }
    depth.validate();
    return depth;
}

void save_png16(const std::vector<std::uint16_t>& data, int width, int height,
                const std::string& path) {
    if (data.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("save_png16: data length mismatch");
    }
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot open for writing: " + path);
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, silent_png_error, silent_png_warning);
    if (!png) throw std::runtime_error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    std::vector<std::uint8_t> rows;
    std::vector<png_bytep> row_ptrs(height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("PNG write failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, width, height, 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    rows.resize(static_cast<std::size_t>(width) * height * 2);
    for (std::size_t i = 0; i < data.size(); ++i) {
        rows[2 * i] = static_cast<std::uint8_t>(data[i] >> 8);  // big-endian
        rows[2 * i + 1] = static_cast<std::uint8_t>(data[i] & 0xFF);
    }
    for (int y = 0; y < height; ++y) {
        row_ptrs[y] = rows.data() + static_cast<std::size_t>(y) * width * 2;
    }
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace prominence
