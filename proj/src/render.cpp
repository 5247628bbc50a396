#include "tileforge/render.hpp"

#include "tileforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace tileforge {

namespace {

constexpr std::array<std::uint8_t, 3> kBackground{255, 255, 255};

const std::array<std::array<std::uint8_t, 3>, 12> kPalette{{
    {31, 119, 180},
    {255, 127, 14},
    {44, 160, 44},
    {214, 39, 40},
    {148, 103, 189},
    {140, 86, 75},
    {227, 119, 194},
    {127, 127, 127},
    {188, 189, 34},
    {23, 190, 207},
    {57, 59, 121},
    {132, 60, 57},
}};

} // namespace

std::array<std::uint8_t, 3> Image::pixel(int x, int y) const
{
    const std::size_t at = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
    return {rgb[at], rgb[at + 1], rgb[at + 2]};
}

std::array<std::uint8_t, 3> palette(std::size_t i)
{
    if (i < kPalette.size())
        return kPalette[i];
    // Golden-angle hues after the fixed colours.
    const double h = std::fmod(static_cast<double>(i) * 137.50776405, 360.0) / 60.0;
    const double s = 0.55 + 0.3 * static_cast<double>(i % 3) / 2.0, v = 0.85 - 0.25 * static_cast<double>(i % 2);
    const double c = v * s, x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0)), m = v - c;
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
    }
    auto byte = [&](double t) { return static_cast<std::uint8_t>(std::lround(255.0 * (t + m))); };
    return {byte(r), byte(g), byte(b)};
}

std::string encode_ppm(const Image& image)
{
    std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
    return out;
}

void write_ppm(const Image& image, const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error(ErrorCode::invalid_input, "cannot open '" + path + "' for writing");
    const std::string data = encode_ppm(image);
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!f)
        throw Error(ErrorCode::invalid_input, "failed writing '" + path + "'");
}

Image render(const AttractorApprox& approx, const RenderOptions& options)
{
    const std::size_t d = approx.dim();
    if (d > 2)
        throw Error(ErrorCode::invalid_input, "only 1-D and 2-D sets can be rendered");
    if (options.resolution < 1)
        throw Error(ErrorCode::invalid_input, "resolution must be positive");
    const Raster ras = rasterize(approx, options.resolution);
    const std::uint32_t th = ras.threshold();
    const std::int64_t r = options.resolution;

    std::vector<IntVec> shifts = options.translates;
    const bool tiling = !shifts.empty();
    if (!tiling)
        shifts.push_back(IntVec(d, 0));
    for (const auto& t : shifts)
        if (t.size() != d)
            throw Error(ErrorCode::invalid_input, "translate dimension does not match the set");

    // Global cell range covered by all translates.
    std::vector<std::int64_t> base(d), lo(d), hi(d);
    for (std::size_t k = 0; k < d; ++k) {
        base[k] = static_cast<std::int64_t>(std::llround(ras.origin[static_cast<Eigen::Index>(k)] * static_cast<double>(r)));
        lo[k] = INT64_MAX;
        hi[k] = INT64_MIN;
        for (const auto& t : shifts) {
            lo[k] = std::min(lo[k], base[k] + t[k] * r);
            hi[k] = std::max(hi[k], base[k] + t[k] * r + ras.extent[k] - 1);
        }
    }
    const std::int64_t w = hi[0] - lo[0] + 1;
    const std::int64_t h = d == 2 ? hi[1] - lo[1] + 1 : options.strip_height;
    if (static_cast<double>(w) * static_cast<double>(h) > 1.0e8)
        throw Error(ErrorCode::resource, "image too large");

    Image img;
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.rgb.resize(static_cast<std::size_t>(w * h) * 3);
    for (std::size_t i = 0; i < img.rgb.size(); i += 3)
        std::copy(kBackground.begin(), kBackground.end(), img.rgb.begin() + static_cast<std::ptrdiff_t>(i));

    const std::array<std::uint8_t, 3> black{0, 0, 0};
    for (std::size_t s = 0; s < shifts.size(); ++s) {
        const auto colour = tiling ? palette(s) : black;
        for (std::size_t c = 0; c < ras.occupancy.size(); ++c) {
            if (ras.occupancy[c] < th)
                continue;
            std::size_t rem = c;
            std::int64_t px = 0, py = 0;
            for (std::size_t k = 0; k < d; ++k) {
                const auto local = static_cast<std::int64_t>(rem % static_cast<std::size_t>(ras.extent[k]));
                rem /= static_cast<std::size_t>(ras.extent[k]);
                const std::int64_t g = base[k] + shifts[s][k] * r + local;
                if (k == 0)
                    px = g - lo[0];
                else
                    py = hi[1] - g;
            }
            const std::int64_t rows = d == 2 ? 1 : h;
            for (std::int64_t row = 0; row < rows; ++row) {
                const std::int64_t y = d == 2 ? py : row;
                const std::size_t at = static_cast<std::size_t>(y * w + px) * 3;
                std::copy(colour.begin(), colour.end(), img.rgb.begin() + static_cast<std::ptrdiff_t>(at));
            }
        }
    }
    return img;
}

std::size_t covered_pixels(const Image& image)
{
    std::size_t n = 0;
    for (std::size_t i = 0; i < image.rgb.size(); i += 3)
        if (image.rgb[i] != kBackground[0] || image.rgb[i + 1] != kBackground[1] || image.rgb[i + 2] != kBackground[2])
            ++n;
    return n;
}

} // namespace tileforge
