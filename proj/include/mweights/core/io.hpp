#pragma once

// GridFunction files: a JSON header followed by the cell values, either as CSV
// lines "index,value" (shortest round-trip decimal) or as raw little-endian
// doubles. Both formats reproduce every value bit for bit.

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mweights/core/grid_function.hpp"

namespace mweights::io {

using json = nlohmann::json;

inline std::string format_double(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{})
        throw Error("failed to format value");
    return std::string(buf, end);
}

inline double parse_double(std::string_view s)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigError("malformed number '" + std::string(s) + "'");
    return v;
}

inline json region_to_json(const Region& r)
{
    if (const auto* ball = std::get_if<Ball>(&r))
        return {{"type", "ball"}, {"radius", ball->radius}};
    const auto& box = std::get<AxisBox>(r);
    json lo = json::array(), hi = json::array();
    for (int k = 0; k < box.dim; ++k) {
        lo.push_back(box.lo[k]);
        hi.push_back(box.hi[k]);
    }
    return {{"type", "box"}, {"lo", lo}, {"hi", hi}};
}

inline Region region_from_json(const json& j)
{
    const std::string type = j.at("type");
    if (type == "ball")
        return Ball{j.at("radius").get<double>()};
    if (type != "box")
        throw ConfigError("unknown region type '" + type + "'");
    AxisBox box;
    box.dim = static_cast<int>(j.at("lo").size());
    check_dim(box.dim);
    for (int k = 0; k < box.dim; ++k) {
        box.lo[k] = j.at("lo")[static_cast<std::size_t>(k)];
        box.hi[k] = j.at("hi")[static_cast<std::size_t>(k)];
    }
    return box;
}

inline json header(const GridFunction& f, std::string_view format)
{
    const Lattice& lat = f.lattice();
    json h;
    h["format"] = std::string(format);
    h["n"] = lat.dim();
    h["L"] = lat.level();
    h["box"] = {{"lo_cell", lat.lo()}, {"extent", lat.extent()}};
    if (const auto& p = f.profile())
        h["profile"] = {{"coefficient", p->coefficient}, {"exponent", p->exponent}, {"support", region_to_json(p->support)}};
    else
        h["profile"] = nullptr;
    return h;
}

inline Lattice lattice_from_header(const json& h)
{
    return Lattice(h.at("n").get<int>(), h.at("L").get<int>(), h.at("box").at("lo_cell").get<std::int64_t>(),
                   h.at("box").at("extent").get<std::int64_t>());
}

inline std::optional<PowerProfile> profile_from_header(const json& h)
{
    if (!h.contains("profile") || h["profile"].is_null())
        return std::nullopt;
    const json& p = h["profile"];
    PowerProfile prof;
    prof.coefficient = p.at("coefficient");
    prof.exponent = p.at("exponent");
    prof.support = region_from_json(p.at("support"));
    return prof;
}

inline void write_csv(std::ostream& os, const GridFunction& f)
{
    os << "# " << header(f, "csv").dump() << "\n";
    os << "index,value\n";
    for (std::size_t i = 0; i < f.size(); ++i)
        os << i << ',' << format_double(f[i]) << '\n';
}

inline GridFunction read_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0)
        throw ConfigError("grid CSV must start with a '# {json}' header line");
    json h;
    try {
        h = json::parse(line.substr(2));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad grid CSV header: ") + e.what());
    }
    Lattice lat = lattice_from_header(h);
    std::vector<double> values(lat.size(), 0.0);
    std::vector<char> seen(lat.size(), 0);
    if (!std::getline(is, line) || line != "index,value")
        throw ConfigError("grid CSV is missing the 'index,value' column line");
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError("malformed grid CSV line '" + line + "'");
        std::size_t idx = 0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + comma, idx);
        if (ec != std::errc{} || ptr != line.data() + comma || idx >= lat.size())
            throw ConfigError("bad cell index in grid CSV line '" + line + "'");
        values[idx] = parse_double(std::string_view(line).substr(comma + 1));
        seen[idx] = 1;
    }
    for (char s : seen)
        if (!s)
            throw ConfigError("grid CSV does not list every cell");
    return GridFunction(lat, std::move(values), profile_from_header(h));
}

inline constexpr std::string_view kBinaryMagic = "MWGF1";

inline void write_binary(std::ostream& os, const GridFunction& f)
{
    static_assert(std::endian::native == std::endian::little, "binary grid format assumes a little-endian host");
    os << kBinaryMagic << '\n' << header(f, "binary").dump() << '\n';
    os.write(reinterpret_cast<const char*>(f.values().data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
}

inline GridFunction read_binary(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line != kBinaryMagic)
        throw ConfigError("not a binary grid file");
    if (!std::getline(is, line))
        throw ConfigError("binary grid file has no header");
    json h = json::parse(line);
    Lattice lat = lattice_from_header(h);
    std::vector<double> values(lat.size());
    is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (is.gcount() != static_cast<std::streamsize>(values.size() * sizeof(double)))
        throw ConfigError("binary grid file is truncated");
    return GridFunction(lat, std::move(values), profile_from_header(h));
}

inline bool has_suffix(const std::string& s, std::string_view suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Writes `.bin` paths in the binary format and everything else as CSV.
inline void save(const std::string& path, const GridFunction& f)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ConfigError("cannot open '" + path + "' for writing");
    if (has_suffix(path, ".bin"))
        write_binary(os, f);
    else
        write_csv(os, f);
}

inline GridFunction load(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ConfigError("cannot open grid file '" + path + "'");
    if (has_suffix(path, ".bin"))
        return read_binary(is);
    return read_csv(is);
}

} // namespace mweights::io
