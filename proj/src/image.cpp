/*
 * Copyright 2026 The xrbias Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "xrbias/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>

namespace xrbias {
namespace {

// Reads the next header token, skipping whitespace and '#' comment lines.
std::string next_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok;
}

long parse_header_int(std::istream& in, const char* what) {
    const std::string tok = next_token(in);
    if (tok.empty()) throw PgmError(std::string("malformed header: missing ") + what);
    for (char ch : tok) {
        if (!std::isdigit(static_cast<unsigned char>(ch))) {
            throw PgmError(std::string("malformed header: non-numeric ") + what + " '" + tok +
                           "'");
        }
    }
    return std::stol(tok);
}

}  // namespace

GrayImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PgmError("cannot open " + path.string());

    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5') {
        throw PgmError("unsupported magic number (expected P5) in " + path.string());
    }

    const long width = parse_header_int(in, "width");
    const long height = parse_header_int(in, "height");
    const long maxval = parse_header_int(in, "maxval");
    if (width <= 0 || height <= 0) throw PgmError("malformed header: non-positive dimensions");
    if (maxval != 255 && maxval != 65535) {
        throw PgmError("unsupported maxval " + std::to_string(maxval) + " (expected 255 or 65535)");
    }
    // The single whitespace byte separating header from payload was consumed
    // as the maxval token's terminator.
    GrayImage img(static_cast<int>(width), static_cast<int>(height));
    const std::size_t npix = img.size();
    const double scale = static_cast<double>(maxval);
    if (maxval == 255) {
        std::vector<std::uint8_t> raw(npix);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(npix));
        if (static_cast<std::size_t>(in.gcount()) != npix) {
            throw PgmError("truncated payload in " + path.string());
        }
        for (std::size_t i = 0; i < npix; ++i) img.data[i] = raw[i] / scale;
    } else {
        std::vector<std::uint8_t> raw(npix * 2);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(npix * 2));
        if (static_cast<std::size_t>(in.gcount()) != npix * 2) {
            throw PgmError("truncated payload in " + path.string());
        }
        for (std::size_t i = 0; i < npix; ++i) {
            const unsigned value = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
            img.data[i] = value / scale;
        }
    }
    return img;
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PgmError("cannot open " + path.string() + " for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<std::uint8_t> raw(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double clamped = std::clamp(img.data[i], 0.0, 1.0);
        raw[i] = static_cast<std::uint8_t>(std::lround(clamped * 255.0));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw PgmError("failed to write " + path.string());
}

GrayImage quantize8(const GrayImage& img) {
    GrayImage q(img.width, img.height);
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double clamped = std::clamp(img.data[i], 0.0, 1.0);
        q.data[i] = static_cast<double>(std::lround(clamped * 255.0)) / 255.0;
    }
    return q;
}

LogImage to_log(const GrayImage& img, double floor) {
    if (!(floor > 0.0 && floor < 1.0)) {
        throw std::invalid_argument("log floor must lie in (0, 1)");
    }
    LogImage out{img.width, img.height, std::vector<double>(img.size())};
    for (std::size_t i = 0; i < img.size(); ++i) {
        out.data[i] = std::log(std::clamp(img.data[i], floor, 1.0));
    }
    return out;
}

GrayImage from_log(const LogImage& img) {
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        out.data[i] = std::clamp(std::exp(img.data[i]), 0.0, 1.0);
    }
    return out;
}

CoordGrid coord_grid(int width, int height) {
    if (width < 2 || height < 2) {
        throw std::invalid_argument("coord_grid requires width >= 2 and height >= 2");
    }
    CoordGrid grid;
    grid.width = width;
    grid.height = height;
    const std::size_t npix = static_cast<std::size_t>(width) * height;
    grid.x.resize(npix);
    grid.y.resize(npix);
    for (int row = 0; row < height; ++row) {
        const double y = 2.0 * row / (height - 1.0) - 1.0;
        for (int col = 0; col < width; ++col) {
            const std::size_t i = static_cast<std::size_t>(row) * width + col;
            grid.x[i] = 2.0 * col / (width - 1.0) - 1.0;
            grid.y[i] = y;
        }
    }
    return grid;
}

}  // namespace xrbias
