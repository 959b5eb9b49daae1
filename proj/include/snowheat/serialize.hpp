#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "snowheat/dimension.hpp"
#include "snowheat/error.hpp"
#include "snowheat/gbp.hpp"
#include "snowheat/geometry.hpp"
#include "snowheat/heat.hpp"
#include "snowheat/selfsim.hpp"
#include "snowheat/tubular.hpp"

namespace snowheat {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline json curve_json(const Polyline& p, const std::string& descriptor, long level) {
    json v = json::array();
    for (const Vec2& q : p.vertices) v.push_back({q.x, q.y});
    return {{"version", kSchemaVersion}, {"seq", descriptor}, {"level", level}, {"closed", p.closed}, {"vertices", std::move(v)}};
}

inline Polyline curve_from_json(const json& j) {
    if (!j.contains("vertices") || !j["vertices"].is_array()) throw InvalidParameter("curve json: missing vertices");
    Polyline p;
    p.closed = j.value("closed", false);
    for (const auto& v : j["vertices"]) {
        if (!v.is_array() || v.size() != 2) throw InvalidParameter("curve json: vertex must be [x, y]");
        p.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    return p;
}

/// SVG 1.1: one path, y up, scaled into a unit viewBox.
inline void write_svg(std::ostream& os, const Polyline& p, double stroke = 0.002) {
    const Box b = bounding_box(p);
    const double span = std::max(b.width(), b.height());
    const double sc = span > 0 ? 1.0 / span : 1.0;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"-0.02 -0.02 1.04 1.04\" width=\"800\" height=\"800\">\n"
       << "<path fill=\"none\" stroke=\"black\" stroke-width=\"" << stroke << "\" d=\"";
    os << std::setprecision(8);
    for (std::size_t i = 0; i < p.vertices.size(); ++i) {
        const Vec2 v = p.vertices[i];
        os << (i ? " L" : "M") << (v.x - b.lo.x) * sc << ',' << (b.hi.y - v.y) * sc;
    }
    if (p.closed) os << " Z";
    os << "\"/>\n</svg>\n";
}

inline json dim_json(const DimEstimate& e) {
    json w = json::array();
    for (const auto& x : e.windows) w.push_back({{"from", x.from}, {"to", x.to}, {"value", x.value}, {"tag", x.tag}});
    return {{"version", kSchemaVersion}, {"lower", e.lower}, {"upper", e.upper}, {"estimate", e.estimate},
            {"method", to_string(e.method)}, {"windows", std::move(w)}};
}

inline void write_csv(std::ostream& os, const TubularProfile& p) {
    os << "eps,mu,muErr,level,gridH\n" << std::setprecision(17);
    for (const auto& e : p.entries) os << e.eps << ',' << e.mu << ',' << e.muErr << ',' << e.level << ',' << e.gridH << '\n';
}

inline json profile_json(const TubularProfile& p) {
    json rows = json::array();
    for (const auto& e : p.entries)
        rows.push_back({{"eps", e.eps}, {"mu", e.mu}, {"muErr", e.muErr}, {"level", e.level}, {"gridH", e.gridH}});
    json j{{"version", kSchemaVersion}, {"kind", "tube"}, {"domainId", hex64(p.domainId)}, {"entries", std::move(rows)}};
    if (!std::isnan(p.area)) j["area"] = p.area;
    return j;
}

inline TubularProfile profile_from_json(const json& j) {
    if (j.value("kind", "") != "tube" || !j.contains("entries")) throw InvalidParameter("tube profile json: bad schema");
    TubularProfile p;
    p.domainId = std::stoull(j.value("domainId", "0"), nullptr, 16);
    if (j.contains("area")) p.area = j["area"].get<double>();
    for (const auto& e : j["entries"])
        p.entries.push_back({e.at("eps").get<double>(), e.at("mu").get<double>(), e.at("muErr").get<double>(),
                             e.at("gridH").get<double>(), e.at("level").get<int>()});
    p.sort();
    return p;
}

inline void write_csv(std::ostream& os, const HeatProfile& p) {
    os << "s,E,stderr,method\n" << std::setprecision(17);
    for (const auto& e : p.entries) os << e.s << ',' << e.E << ',' << e.stderr_ << ',' << to_string(e.method) << '\n';
}

inline HeatMethod heat_method_from(const std::string& s) {
    for (HeatMethod m : {HeatMethod::fd, HeatMethod::mc, HeatMethod::bound_upper_vdb, HeatMethod::bound_upper_thm22,
                         HeatMethod::bound_lower_proxy})
        if (s == to_string(m)) return m;
    throw InvalidParameter("unknown heat method '" + s + "'");
}

inline json profile_json(const HeatProfile& p) {
    json rows = json::array();
    for (const auto& e : p.entries)
        rows.push_back({{"s", e.s}, {"E", e.E}, {"stderr", e.stderr_}, {"method", to_string(e.method)}, {"gridH", e.gridH},
                        {"level", e.level}});
    return {{"version", kSchemaVersion}, {"kind", "heat"}, {"domainId", hex64(p.domainId)}, {"entries", std::move(rows)}};
}

inline HeatProfile heat_from_json(const json& j) {
    if (j.value("kind", "") != "heat" || !j.contains("entries")) throw InvalidParameter("heat profile json: bad schema");
    HeatProfile p;
    p.domainId = std::stoull(j.value("domainId", "0"), nullptr, 16);
    for (const auto& e : j["entries"])
        p.entries.push_back({e.at("s").get<double>(), e.at("E").get<double>(), e.value("stderr", 0.0),
                             heat_method_from(e.value("method", "fd")), e.value("gridH", 0.0), e.value("level", -1)});
    p.sort();
    return p;
}

inline json tree_json(const GbpTree& t) {
    json ind = json::array();
    for (std::size_t i = 0; i < t.individuals.size(); ++i) {
        const Individual& x = t.individuals[i];
        ind.push_back({{"address", t.address(i)}, {"type", x.type}, {"sigma", x.sigma}});
    }
    return {{"version", kSchemaVersion}, {"seed", t.seed}, {"tMax", t.tMax}, {"individuals", std::move(ind)}};
}

inline void write_csv(std::ostream& os, const std::vector<EnsembleRow>& rows) {
    os << "t,meanM,stderrM,meanZnorm\n" << std::setprecision(17);
    for (const auto& r : rows) os << r.t << ',' << r.meanM << ',' << r.stderrM << ',' << r.meanZnorm << '\n';
}

inline void write_csv(std::ostream& os, const LimitReport& rep, const std::string& gridName) {
    os << "seed,nInf,nInfHalf," << gridName << ",value\n" << std::setprecision(17);
    for (const auto& r : rep.rows)
        for (std::size_t i = 0; i < r.grid.size(); ++i)
            os << r.seed << ',' << r.nInf << ',' << r.nInfHalf << ',' << r.grid[i] << ',' << r.values[i] << '\n';
}

inline json limit_json(const LimitReport& r) {
    json rows = json::array();
    for (const auto& s : r.rows)
        rows.push_back({{"seed", s.seed}, {"nInf", s.nInf}, {"limitProxy", s.limitProxy}, {"stabilization", s.stabilization}});
    return {{"gamma", r.gamma}, {"correlation", r.correlation}, {"constant", r.constant}, {"constantStderr", r.constantStderr},
            {"meanN", r.meanN}, {"meanNStderr", r.meanNStderr}, {"maxStabilization", r.maxStabilization},
            {"seeds", std::move(rows)}};
}

/// (x, y) series for external plotting.
inline void write_series(std::ostream& os, const std::string& xname, const std::string& yname, const std::vector<double>& x,
                         const std::vector<double>& y) {
    os << xname << ',' << yname << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) os << x[i] << ',' << y[i] << '\n';
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidParameter("cannot write '" + path + "'");
    f << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidParameter("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace snowheat
