#include "transonic/field_io.hpp"

#include <bit>
#include <fstream>
#include <json.hpp>

#include "transonic/error.hpp"

namespace transonic {

static_assert(std::endian::native == std::endian::little, "binary field format assumes a little-endian host");

namespace {

std::filesystem::path with_ext(std::filesystem::path p, const char* ext) {
    if (p.extension() == ".bin" || p.extension() == ".json") p.replace_extension();
    p += ext;
    return p;
}

}  // namespace

void write_field(const std::filesystem::path& stem, const RealField2D& f, const std::string& quantity) {
    const Grid2D& g = f.grid();
    const auto bin = with_ext(stem, ".bin");
    std::ofstream out(bin, std::ios::binary);
    if (!out) throw ValidationError("cannot open " + bin.string() + " for writing");
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(f.values().size() * sizeof(double)));
    nlohmann::json meta{{"nx", g.nx},
                        {"ny", g.ny},
                        {"Lx", g.Lx},
                        {"Ly", g.Ly},
                        {"symmetry", std::string(to_string(f.symmetry()))},
                        {"quantity", quantity}};
    std::ofstream side(with_ext(stem, ".json"));
    side << meta.dump(2) << '\n';
}

LoadedField read_field(const std::filesystem::path& path) {
    const auto side_path = with_ext(path, ".json");
    std::ifstream side(side_path);
    if (!side) throw ValidationError("missing sidecar " + side_path.string());
    nlohmann::json meta;
    try {
        side >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("malformed sidecar " + side_path.string() + ": " + e.what());
    }
    const Grid2D g = make_grid(meta.at("nx").get<int>(), meta.at("ny").get<int>(), meta.at("Lx").get<double>(),
                               meta.at("Ly").get<double>());
    std::vector<double> values(g.size());
    const auto bin = with_ext(path, ".bin");
    std::ifstream in(bin, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + bin.string());
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(values.size() * sizeof(double)))
        throw ValidationError("field file " + bin.string() + " is truncated");
    for (double v : values)
        if (!std::isfinite(v)) throw ValidationError("field file " + bin.string() + " contains non-finite values");
    return {RealField2D(g, std::move(values), symmetry_from_string(meta.at("symmetry").get<std::string>())),
            meta.value("quantity", std::string{})};
}

}  // namespace transonic
