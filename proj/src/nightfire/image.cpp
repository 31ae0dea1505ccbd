#include "flare/nightfire/image.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "flare/dist/rng.hpp"
#include "flare/error.hpp"
#include "flare/nightfire/radiometry.hpp"

namespace flare::nightfire {

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    auto p = path;
    p += ".json";
    return p;
}

bool is_csv(const std::filesystem::path& path) { return path.extension() == ".csv"; }

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<double> parse_csv_grid(const std::string& text, std::size_t& rows, std::size_t& cols) {
    std::vector<double> values;
    rows = 0;
    cols = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::size_t count = 0;
        const char* p = line.c_str();
        while (true) {
            char* end = nullptr;
            const double v = std::strtod(p, &end);
            if (end == p) throw ValidationError("bad number in image row " + std::to_string(rows + 1));
            values.push_back(v);
            ++count;
            while (*end == ' ' || *end == '\t') ++end;
            if (*end == '\0') break;
            if (*end != ',') throw ValidationError("bad separator in image row " + std::to_string(rows + 1));
            p = end + 1;
        }
        if (rows == 0) cols = count;
        if (count != cols) throw ValidationError("ragged image row " + std::to_string(rows + 1));
        ++rows;
    }
    return values;
}

}  // namespace

geo::GeoPoint BandImage::pixel_location(Pixel p) const {
    const double x = p.col + 0.5;
    const double y = p.row + 0.5;
    const auto& g = geotransform;
    return geo::GeoPoint(g[3] + x * g[4] + y * g[5], g[0] + x * g[1] + y * g[2]);
}

void BandImage::validate() const {
    if (!(wavelength_m > 0.0) || !std::isfinite(wavelength_m)) throw ValidationError("wavelength must be positive");
    if (!(pixel_area_m2 > 0.0) || !std::isfinite(pixel_area_m2)) throw ValidationError("pixel area must be positive");
    if (rows == 0 || cols == 0) throw ValidationError("image grid is empty");
    if (values.size() != rows * cols) throw ValidationError("image value count does not match rows x cols");
    for (double g : geotransform) {
        if (!std::isfinite(g)) throw ValidationError("geotransform must be finite");
    }
}

BandImage read_band_image(const std::filesystem::path& path) {
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(slurp(sidecar_path(path)));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("bad image sidecar: " + std::string(e.what()));
    }
    BandImage img;
    try {
        img.band = meta.at("band").is_string() ? meta.at("band").get<std::string>() : meta.at("band").dump();
        img.wavelength_m = meta.at("wavelength_m").get<double>();
        img.pixel_area_m2 = meta.at("pixel_area_m2").get<double>();
        const auto& gt = meta.at("geotransform");
        if (!gt.is_array() || gt.size() != 6) throw ValidationError("geotransform needs six numbers");
        for (std::size_t i = 0; i < 6; ++i) img.geotransform[i] = gt[i].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("bad image sidecar: " + std::string(e.what()));
    }
    const auto dim = [&](const char* key) -> std::size_t {
        if (!meta.contains(key)) return 0;
        const auto v = meta.at(key);
        if (!v.is_number_unsigned()) throw ValidationError(std::string("sidecar ") + key + " must be a positive integer");
        return v.get<std::size_t>();
    };
    const std::size_t rows = dim("rows");
    const std::size_t cols = dim("cols");
    const std::string data = slurp(path);
    if (is_csv(path)) {
        img.values = parse_csv_grid(data, img.rows, img.cols);
        if ((rows && rows != img.rows) || (cols && cols != img.cols)) {
            throw ValidationError("CSV grid shape disagrees with the sidecar");
        }
    } else {
        if (rows == 0 || cols == 0) throw ValidationError("binary images need rows and cols in the sidecar");
        if (data.size() != rows * cols * sizeof(double)) throw ValidationError("binary image size does not match rows x cols");
        img.rows = rows;
        img.cols = cols;
        img.values.resize(rows * cols);
        std::memcpy(img.values.data(), data.data(), data.size());
        if constexpr (std::endian::native == std::endian::big) {
            for (auto& v : img.values) {
                auto bits = std::bit_cast<std::uint64_t>(v);
                bits = __builtin_bswap64(bits);
                v = std::bit_cast<double>(bits);
            }
        }
    }
    img.validate();
    return img;
}

void write_band_image(const BandImage& img, const std::filesystem::path& path) {
    img.validate();
    nlohmann::json meta;
    meta["band"] = img.band;
    meta["wavelength_m"] = img.wavelength_m;
    meta["pixel_area_m2"] = img.pixel_area_m2;
    meta["geotransform"] = img.geotransform;
    meta["rows"] = img.rows;
    meta["cols"] = img.cols;
    std::ofstream side(sidecar_path(path));
    if (!side) throw ValidationError("cannot write " + sidecar_path(path).string());
    side << meta.dump(2) << '\n';

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    if (is_csv(path)) {
        char buf[32];
        for (std::size_t r = 0; r < img.rows; ++r) {
            for (std::size_t c = 0; c < img.cols; ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", img.at(r, c));
                if (c) out << ',';
                out << buf;
            }
            out << '\n';
        }
    } else {
        std::vector<double> le = img.values;
        if constexpr (std::endian::native == std::endian::big) {
            for (auto& v : le) v = std::bit_cast<double>(__builtin_bswap64(std::bit_cast<std::uint64_t>(v)));
        }
        out.write(reinterpret_cast<const char*>(le.data()), static_cast<std::streamsize>(le.size() * sizeof(double)));
    }
}

std::vector<BandImage> synthetic_scene(const SceneOptions& options, const std::vector<Emitter>& emitters) {
    if (options.wavelengths_m.empty()) throw ValidationError("scene needs at least one band");
    if (!(options.noise_sd >= 0.0)) throw ValidationError("noise sd must be non-negative");
    std::vector<BandImage> out;
    for (std::size_t b = 0; b < options.wavelengths_m.size(); ++b) {
        BandImage img;
        char name[32];
        std::snprintf(name, sizeof name, "B%zu", b + 1);
        img.band = name;
        img.wavelength_m = options.wavelengths_m[b];
        img.rows = options.rows;
        img.cols = options.cols;
        img.pixel_area_m2 = options.pixel_area_m2;
        img.geotransform = options.geotransform;
        img.values.resize(img.rows * img.cols);
        dist::Rng rng(options.seed, b);
        for (auto& v : img.values) v = options.background + options.noise_sd * rng.normal();
        for (const auto& e : emitters) {
            if (e.pixel.row >= img.rows || e.pixel.col >= img.cols) throw ValidationError("emitter outside the scene");
            img.values[e.pixel.row * img.cols + e.pixel.col] += e.epsilon * planck_radiance(img.wavelength_m, e.temperature_k);
        }
        img.validate();
        out.push_back(std::move(img));
    }
    return out;
}

}  // namespace flare::nightfire
