#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "snowheat/carpet.hpp"
#include "snowheat/dimension.hpp"
#include "snowheat/error.hpp"
#include "snowheat/gbp.hpp"
#include "snowheat/generator.hpp"
#include "snowheat/geometry.hpp"
#include "snowheat/heat.hpp"
#include "snowheat/parallel.hpp"
#include "snowheat/selfsim.hpp"
#include "snowheat/serialize.hpp"
#include "snowheat/simplicity.hpp"
#include "snowheat/tubular.hpp"

namespace snowheat::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kInvalid = 2, kCap = 3 };

inline std::vector<double> log_grid(double from, double to, double perDecade) {
    if (!(from > 0.0) || !(to >= from)) throw InvalidParameter("grid: need 0 < from <= to");
    if (!(perDecade > 0.0)) throw InvalidParameter("grid: points per decade must be positive");
    const auto n = static_cast<std::size_t>(std::llround(std::log10(to / from) * perDecade));
    std::vector<double> g;
    for (std::size_t i = 0; i <= n; ++i) g.push_back(n ? from * std::pow(to / from, static_cast<double>(i) / n) : from);
    return g;
}

template <class T>
std::vector<T> parse_list(const std::string& s, const char* what) {
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t pos = 0;
            if constexpr (std::is_integral_v<T>) out.push_back(static_cast<T>(std::stoll(item, &pos)));
            else out.push_back(static_cast<T>(std::stod(item, &pos)));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw InvalidParameter(std::string("bad value '") + item + "' in " + what);
        }
    }
    if (out.empty()) throw InvalidParameter(std::string("empty list for ") + what);
    return out;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// On-disk result cache keyed by a hash of (module, operation, canonical parameters).
class Cache {
public:
    explicit Cache(bool enabled) : enabled_(enabled) {
        if (const char* env = std::getenv("SNOWHEAT_CACHE_DIR"); env && *env) dir_ = env;
        else if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) dir_ = std::filesystem::path(xdg) / "snowheat";
        else if (const char* home = std::getenv("HOME"); home && *home) dir_ = std::filesystem::path(home) / ".cache" / "snowheat";
        else dir_ = ".snowheat-cache";
    }

    std::optional<std::string> get(const std::string& canonical) {
        if (!enabled_) return std::nullopt;
        std::ifstream f(path(canonical), std::ios::binary);
        if (!f) {
            bump("misses");
            return std::nullopt;
        }
        std::ostringstream ss;
        ss << f.rdbuf();
        const std::string body = ss.str();
        // first line holds the canonical key, guarding against hash collisions
        const auto nl = body.find('\n');
        if (nl == std::string::npos || body.substr(0, nl) != canonical) {
            bump("misses");
            return std::nullopt;
        }
        bump("hits");
        lastHit_ = true;
        return body.substr(nl + 1);
    }

    void put(const std::string& canonical, const std::string& value) {
        if (!enabled_) return;
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        const auto p = path(canonical);
        const auto tmp = p.string() + ".tmp";
        {
            std::ofstream f(tmp, std::ios::binary);
            if (!f) return;
            f << canonical << '\n' << value;
        }
        std::filesystem::rename(tmp, p, ec);
    }

    bool last_hit() const noexcept { return lastHit_; }
    const std::filesystem::path& dir() const noexcept { return dir_; }

    /// Cumulative counters from stats.json.
    std::map<std::string, long> stats() const {
        std::map<std::string, long> m{{"hits", 0}, {"misses", 0}};
        std::ifstream f(dir_ / "stats.json");
        if (!f) return m;
        try {
            const json j = json::parse(f);
            for (auto& [k, v] : j.items()) m[k] = v.get<long>();
        } catch (const std::exception&) {
        }
        return m;
    }

private:
    std::filesystem::path path(const std::string& canonical) const { return dir_ / (hex64(fnv1a(canonical)) + ".cache"); }

    void bump(const std::string& key) {
        auto m = stats();
        ++m[key];
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        std::ofstream f(dir_ / "stats.json");
        if (f) f << json(m).dump() << '\n';
    }

    bool enabled_;
    bool lastHit_ = false;
    std::filesystem::path dir_;
};

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Options shared by the domain-taking subcommands.
struct DomainOpts {
    std::string seq, rule, iid, probs, shape, pattern, polygon;
    long level = -1;
    std::uint64_t seed = 0;

    void add(CLI::App* app) {
        app->add_option("--seq", seq, "explicit scale sequence, e.g. 1,3,2,1 (repeats periodically)");
        app->add_option("--rule", rule, "named sequence rule (example33)");
        app->add_option("--iid", iid, "i.i.d. sequence alphabet, e.g. 1,2");
        app->add_option("--probs", probs, "probabilities for --iid");
        app->add_option("--shape", shape, "square | triangle | disk[:N]");
        app->add_option("--pattern", pattern, "carpet pattern, rows top to bottom, e.g. 0111;1000");
        app->add_option("--polygon", polygon, "closed polygon JSON file");
        app->add_option("--level", level, "construction level (snowflake or carpet)");
    }

    bool has_sequence() const { return !seq.empty() || !rule.empty() || !iid.empty(); }

    ScaleSequence sequence() const {
        const int given = !seq.empty() + !rule.empty() + !iid.empty();
        if (given != 1) throw InvalidParameter("give exactly one of --seq, --rule, --iid");
        if (!seq.empty()) return ScaleSequence::explicit_list(parse_list<int>(seq, "--seq"));
        if (!rule.empty()) {
            if (rule != "example33") throw InvalidParameter("unknown rule '" + rule + "'");
            return ScaleSequence::example33();
        }
        const auto a = parse_list<int>(iid, "--iid");
        std::vector<double> p = probs.empty() ? std::vector<double>(a.size(), 1.0 / static_cast<double>(a.size()))
                                              : parse_list<double>(probs, "--probs");
        return ScaleSequence::iid(a, p, seed);
    }

    // Fixed polygon, if the options describe one (a sequence without --level is adaptive).
    std::optional<Polyline> fixed() const {
        const int kinds = has_sequence() + !shape.empty() + !pattern.empty() + !polygon.empty();
        if (kinds != 1) throw InvalidParameter("give exactly one domain: a sequence, --shape, --pattern or --polygon");
        if (has_sequence()) {
            if (level < 0) return std::nullopt;
            return snowflake(sequence(), static_cast<std::size_t>(level));
        }
        if (!pattern.empty()) {
            if (level < 0) throw InvalidParameter("--pattern needs --level");
            return carpet_domain(Pattern::parse(pattern), static_cast<int>(level));
        }
        if (!polygon.empty()) {
            Polyline p = curve_from_json(json::parse(read_file(polygon)));
            if (!p.closed) throw InvalidDomain("polygon file must hold a closed polygon");
            return p;
        }
        return make_shape(shape);
    }

    static Polyline make_shape(const std::string& s) {
        Polyline p;
        p.closed = true;
        if (s == "square") {
            p.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        } else if (s == "triangle") {
            p.vertices = {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2.0}};
        } else if (s.rfind("disk", 0) == 0) {
            long n = 512;
            if (s.size() > 4) {
                if (s[4] != ':') throw InvalidParameter("shape disk takes the form disk:N");
                n = parse_list<long>(s.substr(5), "disk:N").front();
            }
            if (n < 3) throw InvalidParameter("disk needs at least 3 vertices");
            for (long k = 0; k < n; ++k) {
                const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
                p.vertices.push_back({std::cos(t), std::sin(t)});
            }
        } else {
            throw InvalidParameter("unknown shape '" + s + "'");
        }
        return p;
    }

    std::string canonical() const {
        std::string c;
        if (has_sequence()) c = "seq=" + sequence().descriptor();
        if (!shape.empty()) c += "shape=" + shape;
        if (!pattern.empty()) c += "pattern=" + Pattern::parse(pattern).to_string();
        if (!polygon.empty()) c += "polygon=" + hex64(content_hash(*fixed()));
        return c + ";level=" + std::to_string(level);
    }
};

struct GridOpts {
    double from = 0, to = 0, perDecade = 4;
    std::string list;

    void add(CLI::App* app, const std::string& name) {
        app->add_option("--" + name + "-from", from, "smallest " + name);
        app->add_option("--" + name + "-to", to, "largest " + name);
        app->add_option("--" + name + "-per-decade", perDecade, "log-spaced points per decade");
        app->add_option("--" + name, list, "explicit comma-separated " + name + " values");
    }

    std::vector<double> values(const std::string& name) const {
        if (!list.empty()) return parse_list<double>(list, name.c_str());
        if (!(from > 0.0) || !(to > 0.0)) throw InvalidParameter("give --" + name + " or --" + name + "-from/--" + name + "-to");
        return log_grid(from, to, perDecade);
    }

    std::string canonical(const std::string& name) const {
        std::string c;
        for (double v : values(name)) c += fmt(v) + ",";
        return c;
    }
};

struct Output {
    std::string out;
    bool asJson = false;

    void add(CLI::App* app) {
        app->add_option("-o,--out", out, "output file (default: stdout)");
        app->add_flag("--json", asJson, "JSON instead of CSV");
    }

    void emit(std::ostream& stdoutStream, const std::string& body) const {
        if (out.empty()) stdoutStream << body;
        else write_file(out, body);
    }
};

inline std::string to_text(const json& j) { return j.dump(2) + "\n"; }

template <class T>
std::string csv_text(const T& v) {
    std::ostringstream os;
    write_csv(os, v);
    return os.str();
}

namespace detail {

inline int run_once(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Heat content and tube volumes of fractal snowflakes and carpets", "snowheat"};
    app.require_subcommand(1);
    unsigned threads = 0;
    std::uint64_t seed = 1;
    bool noCache = false;
    app.add_option("--threads", threads, "worker cap (0 = all cores; 1 = sequential baseline)");
    app.add_option("--seed", seed, "random seed");
    app.add_flag("--no-cache", noCache, "bypass the result cache");
    std::string manifestOut, replayIn;
    app.add_option("--manifest", manifestOut, "write a manifest of this run (argv and output hashes)");
    app.add_option("--replay", replayIn, "re-run a manifest and verify its output hashes");
    std::string summary;

    // generate
    auto* gen = app.add_subcommand("generate", "Koch-type curve or closed snowflake for a scale sequence");
    DomainOpts genD;
    std::string genSvg, genJson;
    bool genClosed = false;
    genD.add(gen);
    gen->add_option("--svg", genSvg, "write SVG");
    gen->add_option("--json-out", genJson, "write curve JSON");
    gen->add_flag("--closed", genClosed, "closed snowflake instead of the open curve");

    // carpet
    auto* car = app.add_subcommand("carpet", "self-affine carpet graph, domain and dimensions");
    std::string carPattern = "0111;1000", carSvg, carJson;
    long carLevel = 3;
    bool carDomain = false, carTube = false;
    GridOpts carEps;
    car->add_option("--pattern", carPattern, "pattern, rows top to bottom");
    car->add_option("--level", carLevel, "construction level");
    car->add_option("--svg", carSvg, "write SVG");
    car->add_option("--json-out", carJson, "write curve JSON");
    car->add_flag("--domain", carDomain, "export the closed domain instead of the graph");
    car->add_flag("--tube", carTube, "estimate the dimension from the domain's tube profile");
    carEps.add(car, "eps");

    // tube
    auto* tube = app.add_subcommand("tube", "inner tube volumes mu(eps)");
    DomainOpts tubeD;
    GridOpts tubeEps;
    Output tubeOut;
    double cellsPerEps = 8.0;
    tubeD.add(tube);
    tubeEps.add(tube, "eps");
    tubeOut.add(tube);
    tube->add_option("--cells-per-eps", cellsPerEps, "eps / gridH for fixed polygons");

    // dims
    auto* dims = app.add_subcommand("dims", "dimension estimates");
    DomainOpts dimsD;
    std::size_t dimsN = 1024;
    bool dimsJson = false, dimsErgodic = false, dimsLil = false, dimsCarpet = false;
    std::string dimsProfile;
    dimsD.add(dims);
    dims->add_option("--n", dimsN, "sequence length");
    dims->add_flag("--json", dimsJson, "JSON output");
    dims->add_flag("--ergodic", dimsErgodic, "ergodic formula for --iid laws");
    dims->add_flag("--lil", dimsLil, "LIL envelope fit of log(M_n L_n^-gamma) for --iid laws");
    dims->add_flag("--carpet", dimsCarpet, "carpet formulas for --pattern");
    dims->add_option("--profile", dimsProfile, "tube profile JSON to regress");

    // heat
    auto* heat = app.add_subcommand("heat", "heat content E(s)");
    DomainOpts heatD;
    GridOpts heatS;
    Output heatOut;
    std::string heatMethod = "fd";
    double cellsPerLength = 8.0;
    std::uint64_t trials = 100000;
    heatD.add(heat);
    heatS.add(heat, "s");
    heatOut.add(heat);
    heat->add_option("--method", heatMethod, "fd | mc")->check(CLI::IsMember({"fd", "mc"}));
    heat->add_option("--cells-per-length", cellsPerLength, "sqrt(s) / gridH for fd");
    heat->add_option("--trials", trials, "Monte Carlo trials per s");

    // bounds
    auto* bnd = app.add_subcommand("bounds", "upper and lower bound functionals from the tube profile");
    DomainOpts bndD;
    GridOpts bndS;
    Output bndOut;
    double c1 = 1.0, c2 = 1.0;
    int bands = 1;
    bool withFd = false;
    bndD.add(bnd);
    bndS.add(bnd, "s");
    bndOut.add(bnd);
    bnd->add_option("--c1", c1, "lower-bound constant c1");
    bnd->add_option("--c2", c2, "lower-bound constant c2");
    bnd->add_option("--bands", bands, "bands of the multiband bound");
    bnd->add_flag("--fd", withFd, "also compute heat_fd");

    // gbp
    auto* gbp = app.add_subcommand("gbp", "general branching process of the snowflake law");
    std::string gbpAlphabet = "1,2", gbpProbs, gbpTree, gbpT = "2,4,6,8";
    std::size_t gbpSeeds = 0;
    double gbpTMax = 6.0, gbpPhiLen = 1.0;
    Output gbpOut;
    gbp->add_option("--alphabet", gbpAlphabet, "alphabet, e.g. 1,2,3");
    gbp->add_option("--probs", gbpProbs, "probabilities (default uniform)");
    gbp->add_option("--ensemble", gbpSeeds, "ensemble over this many seeds");
    gbp->add_option("--t", gbpT, "times for the ensemble");
    gbp->add_option("--tree", gbpTree, "export one tree as JSON to this file");
    gbp->add_option("--t-max", gbpTMax, "horizon of the exported tree");
    gbp->add_option("--phi-length", gbpPhiLen, "characteristic 1[0, h)");
    gbpOut.add(gbp);

    // selfsim
    auto* ss = app.add_subcommand("selfsim", "statistically self-similar snowflake experiments");
    std::string ssAlphabet = "1,2", ssProbs, ssCsv, ssSvg;
    double epsMin = 1.0 / 512;
    std::size_t ssSeeds = 8, ssHeatSeeds = 0;
    GridOpts ssEps, ssS;
    Output ssOut;
    ss->add_option("--alphabet", ssAlphabet, "alphabet");
    ss->add_option("--probs", ssProbs, "probabilities (default uniform)");
    ss->add_option("--eps-min", epsMin, "cut scale");
    ss->add_option("--seeds", ssSeeds, "realizations for the tube experiment");
    ss->add_option("--heat-seeds", ssHeatSeeds, "realizations for the heat experiment (0 = skip)");
    ss->add_option("--csv", ssCsv, "per-seed CSV");
    ss->add_option("--svg", ssSvg, "SVG of the first realization");
    ssEps.add(ss, "eps");
    ssS.add(ss, "s");
    ssOut.add(ss);

    // report
    auto* rep = app.add_subcommand("report", "aggregate tube/heat profile JSON files into plot data");
    std::vector<std::string> repInputs;
    std::string repDir;
    double repGamma = 0.0;
    rep->add_option("inputs", repInputs, "profile JSON files");
    rep->add_option("--series-dir", repDir, "write (x, y) series files here");
    rep->add_option("--gamma", repGamma, "dimension for the normalised panels");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kInvalid;
    }

    thread_limit().store(threads);
    Cache cache(!noCache);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (*gen) {
            genD.seed = seed;
            if (!genD.has_sequence()) throw InvalidParameter("generate needs --seq, --rule or --iid");
            if (genD.level < 0) throw InvalidParameter("generate needs --level");
            const ScaleSequence sq = genD.sequence();
            const auto n = static_cast<std::size_t>(genD.level);
            const Polyline p = genClosed ? snowflake(sq, n) : koch_curve(sq, n);
            const json j = curve_json(p, sq.descriptor(), genD.level);
            if (!genSvg.empty()) {
                std::ostringstream os;
                write_svg(os, p);
                write_file(genSvg, os.str());
            }
            if (!genJson.empty()) write_file(genJson, to_text(j));
            if (genSvg.empty() && genJson.empty()) out << to_text(j);
            summary = "generate: " + std::to_string(p.segment_count()) + " segments, level " + std::to_string(n);
        } else if (*car) {
            const Pattern pat = Pattern::parse(carPattern);
            const CarpetDims cd = carpet_dims(pat);
            json j{{"pattern", pat.to_string()}, {"hausdorff", cd.hausdorff}, {"minkowski", cd.minkowski}};
            Polyline p = carDomain ? carpet_domain(pat, static_cast<int>(carLevel)) : carpet_curve(pat, static_cast<int>(carLevel));
            if (!carSvg.empty()) {
                std::ostringstream os;
                write_svg(os, p);
                write_file(carSvg, os.str());
            }
            if (!carJson.empty()) write_file(carJson, to_text(curve_json(p, "pattern:" + pat.to_string(), carLevel)));
            if (carTube) {
                if (!carDomain) p = carpet_domain(pat, static_cast<int>(carLevel));
                const auto eps = carEps.list.empty() && carEps.from == 0 ? log_grid(1e-3, 0.1, 6) : carEps.values("eps");
                const TubularProfile prof = tube_profile(p, eps);
                const DimEstimate de = profile_dim(prof);
                j["tube"] = dim_json(de);
            }
            out << to_text(j);
            summary = "carpet: hausdorff " + fmt6(cd.hausdorff) + ", minkowski " + fmt6(cd.minkowski);
        } else if (*tube) {
            tubeD.seed = seed;
            const auto eps = tubeEps.values("eps");
            const std::string key = "tube|profile|" + tubeD.canonical() + "|eps=" + tubeEps.canonical("eps") + "|cpe=" + fmt(cellsPerEps);
            TubularProfile prof;
            if (auto hit = cache.get(key)) {
                prof = profile_from_json(json::parse(*hit));
            } else {
                if (auto fixedPoly = tubeD.fixed()) prof = tube_profile(*fixedPoly, eps, cellsPerEps);
                else prof = tube_profile(tubeD.sequence(), eps);
                cache.put(key, profile_json(prof).dump());
            }
            tubeOut.emit(out, tubeOut.asJson ? to_text(profile_json(prof)) : csv_text(prof));
            summary = "tube: " + std::to_string(prof.entries.size()) + " samples" + (cache.last_hit() ? " (cache hit)" : "");
        } else if (*dims) {
            dimsD.seed = seed;
            json j;
            if (dimsCarpet) {
                const CarpetDims cd = carpet_dims(Pattern::parse(dimsD.pattern));
                j = {{"version", kSchemaVersion}, {"lower", cd.hausdorff}, {"upper", cd.minkowski}, {"method", to_string(DimMethod::carpet_formula)},
                     {"hausdorff", cd.hausdorff}, {"minkowski", cd.minkowski}};
            } else if (!dimsProfile.empty()) {
                j = dim_json(profile_dim(profile_from_json(json::parse(read_file(dimsProfile)))));
            } else {
                const ScaleSequence sq = dimsD.sequence();
                if (dimsErgodic) {
                    if (sq.kind() != ScaleSequence::Kind::iid) throw InvalidParameter("--ergodic needs an --iid law");
                    const double d = ergodic_dim(sq.alphabet(), sq.probs());
                    DimEstimate e;
                    e.lower = e.upper = e.estimate = d;
                    e.method = DimMethod::ergodic_formula;
                    j = dim_json(e);
                } else {
                    j = dim_json(liminf_limsup_dim(sq, dimsN));
                }
                if (dimsLil) {
                    const double g = ergodic_dim(sq.alphabet(), sq.probs());
                    const LilFit f = lil_fit(lil_path(sq, dimsN, g));
                    j["lil"] = {{"C", f.C}, {"above", f.above}, {"below", f.below}, {"fraction", f.fraction}};
                }
            }
            if (dimsJson) out << to_text(j);
            else out << "lower,upper,method\n" << fmt(j["lower"].get<double>()) << ',' << fmt(j["upper"].get<double>()) << ',' << j["method"].get<std::string>() << '\n';
            summary = "dims: [" + fmt6(j["lower"].get<double>()) + ", " + fmt6(j["upper"].get<double>()) + "]";
        } else if (*heat) {
            heatD.seed = seed;
            const auto sList = heatS.values("s");
            const std::string key = "heat|" + heatMethod + "|" + heatD.canonical() + "|s=" + heatS.canonical("s") + "|cpl=" +
                                    fmt(cellsPerLength) + "|trials=" + std::to_string(trials) + "|seed=" + std::to_string(seed);
            HeatProfile prof;
            if (auto hit = cache.get(key)) {
                prof = heat_from_json(json::parse(*hit));
            } else {
                const auto fixedPoly = heatD.fixed();
                if (heatMethod == "fd") {
                    prof = fixedPoly ? heat_fd_adaptive(*fixedPoly, sList, cellsPerLength)
                                     : heat_fd_snowflake(heatD.sequence(), sList, cellsPerLength);
                } else {
                    std::map<std::size_t, Polyline> polys;
                    for (double s : sList) {
                        const Polyline* p = nullptr;
                        int lvl = -1;
                        if (fixedPoly) {
                            p = &*fixedPoly;
                        } else {
                            const ScaleSequence sq = heatD.sequence();
                            const std::size_t n = level_for(sq, std::sqrt(s) / 4.0);
                            if (!polys.count(n)) polys.emplace(n, snowflake(sq, n));
                            p = &polys.at(n);
                            lvl = static_cast<int>(n);
                        }
                        if (!simplicity_check(*p)) throw InvalidDomain("heat: polygon is not simple");
                        const McResult r = heat_mc(*p, s, trials, {}, seed);
                        prof.entries.push_back({s, r.E, r.stderr_, HeatMethod::mc, 0.0, lvl});
                        prof.domainId = content_hash(*p);
                    }
                }
                cache.put(key, profile_json(prof).dump());
            }
            heatOut.emit(out, heatOut.asJson ? to_text(profile_json(prof)) : csv_text(prof));
            summary = "heat: " + std::to_string(prof.entries.size()) + " samples (" + heatMethod + ")" + (cache.last_hit() ? " (cache hit)" : "");
        } else if (*bnd) {
            bndD.seed = seed;
            const auto sList = bndS.values("s");
            double smin = *std::min_element(sList.begin(), sList.end()), smax = *std::max_element(sList.begin(), sList.end());
            const auto fixedPoly = bndD.fixed();
            const auto eps = log_grid(std::sqrt(smin) / 8.0, 13.0 * std::sqrt(smax), 6);
            TubularProfile tp = fixedPoly ? tube_profile(*fixedPoly, eps) : tube_profile(bndD.sequence(), eps);
            const double vol = tp.area;
            HeatProfile fd;
            if (withFd)
                fd = fixedPoly ? heat_fd_adaptive(*fixedPoly, sList, cellsPerLength) : heat_fd_snowflake(bndD.sequence(), sList, cellsPerLength);
            std::ostringstream os;
            os << "s,vdb,thm22,multiband,lower" << (withFd ? ",fd" : "") << "\n" << std::setprecision(17);
            const OmegaSchedule omega;
            for (std::size_t q = 0; q < sList.size(); ++q) {
                const double s = sList[q];
                os << s << ',' << vdb_upper(tp, s) << ',' << thm22_upper(tp, s, omega, vol) << ',';
                if (OmegaSchedule{OmegaSchedule::Kind::iterated_log, bands + 1, {}}.valid(s)) os << multiband_upper(tp, s, bands, vol);
                else os << "nan";
                os << ',' << lower_proxy(tp, s, c1, c2);
                if (withFd) os << ',' << fd.entries[q].E;
                os << '\n';
            }
            bndOut.emit(out, os.str());
            summary = "bounds: " + std::to_string(sList.size()) + " times";
        } else if (*gbp) {
            const auto a = parse_list<int>(gbpAlphabet, "--alphabet");
            const auto p = gbpProbs.empty() ? std::vector<double>(a.size(), 1.0 / static_cast<double>(a.size()))
                                            : parse_list<double>(gbpProbs, "--probs");
            const OffspringLaw law = OffspringLaw::snowflake(a, p);
            const double g = malthusian(law);
            const Characteristic phi = Characteristic::indicator(0.0, gbpPhiLen);
            json j{{"gamma", g}, {"nonLattice", lattice_check(law)}, {"xlogx", xlogx_check(law, g).value},
                   {"nermanLimit", nerman_limit(law, phi, g)}};
            if (!gbpTree.empty()) write_file(gbpTree, to_text(tree_json(simulate_tree(law, gbpTMax, seed))));
            if (gbpSeeds > 0) {
                const auto rows = gbp_ensemble(law, phi, parse_list<double>(gbpT, "--t"), gbpSeeds, seed);
                gbpOut.emit(out, csv_text(rows));
            } else {
                gbpOut.emit(out, to_text(j));
            }
            summary = "gbp: gamma " + fmt6(g);
        } else if (*ss) {
            const auto a = parse_list<int>(ssAlphabet, "--alphabet");
            const auto p = ssProbs.empty() ? std::vector<double>(a.size(), 1.0 / static_cast<double>(a.size()))
                                           : parse_list<double>(ssProbs, "--probs");
            if (!lattice_check(OffspringLaw::snowflake(a, p))) err << "warning: lattice law, Nerman limits may oscillate\n";
            const std::size_t n = std::max(ssSeeds, ssHeatSeeds);
            std::vector<SelfSimilarRealization> reals(n);
            parallel_for(n, [&](std::size_t k) { reals[k] = sample_snowflake(a, p, epsMin, seed + k); });
            if (!ssSvg.empty()) {
                std::ostringstream os;
                write_svg(os, reals.front().polygon);
                write_file(ssSvg, os.str());
            }
            const auto eps = ssEps.list.empty() && ssEps.from == 0 ? log_grid(8.5 * epsMin, 0.095, 8) : ssEps.values("eps");
            std::vector<SelfSimilarRealization> tubeSet(reals.begin(), reals.begin() + static_cast<long>(ssSeeds));
            const LimitReport mk = minkowski_limit_experiment(tubeSet, eps);
            json j{{"gammaUsed", mk.gamma}, {"MHat", mk.constant}, {"MHatStderr", mk.constantStderr},
                   {"correlations", {{"minkowski", mk.correlation}}}, {"meanN", mk.meanN}, {"meanNStderr", mk.meanNStderr},
                   {"minkowski", limit_json(mk)}};
            std::ostringstream csv;
            write_csv(csv, mk, "eps");
            if (ssHeatSeeds > 0) {
                const double lo = std::pow(8.5 * epsMin, 2), hi = 0.048 * 0.048;
                const auto sg = ssS.list.empty() && ssS.from == 0 ? log_grid(lo, hi, 8) : ssS.values("s");
                std::vector<SelfSimilarRealization> heatSet(reals.begin(), reals.begin() + static_cast<long>(ssHeatSeeds));
                const LimitReport hk = heat_limit_experiment(heatSet, sg);
                const CrossRatio cr = cross_ratio(mk, hk);
                j["EHat"] = hk.constant;
                j["EHatStderr"] = hk.constantStderr;
                j["correlations"]["heat"] = hk.correlation;
                j["ratios"] = cr.ratios;
                j["ratioMaxDeviation"] = cr.maxDeviation;
                j["heat"] = limit_json(hk);
                write_csv(csv, hk, "s");
            }
            if (!ssCsv.empty()) write_file(ssCsv, csv.str());
            ssOut.emit(out, to_text(j));
            summary = "selfsim: " + std::to_string(n) + " realizations, MHat " + fmt6(mk.constant);
        } else if (*rep) {
            if (repInputs.empty()) throw InvalidParameter("report: no inputs");
            json bundle{{"version", kSchemaVersion}, {"panels", json::array()}};
            for (const auto& path : repInputs) {
                json in;
                try {
                    in = json::parse(read_file(path));
                } catch (const json::exception& e) {
                    throw InvalidParameter("report: " + path + ": not JSON (" + e.what() + ")");
                }
                const std::string kind = in.value("kind", "");
                std::vector<double> x, y;
                std::string xn, yn;
                if (kind == "tube") {
                    const TubularProfile tp = profile_from_json(in);
                    for (const auto& e : tp.entries) {
                        x.push_back(e.eps);
                        y.push_back(e.mu);
                    }
                    xn = "eps";
                    yn = "mu";
                } else if (kind == "heat") {
                    const HeatProfile hp = heat_from_json(in);
                    for (const auto& e : hp.entries) {
                        x.push_back(e.s);
                        y.push_back(e.E);
                    }
                    xn = "s";
                    yn = "E";
                } else {
                    throw InvalidParameter("report: " + path + ": unknown or missing \"kind\"");
                }
                if (x.size() < 2) throw InvalidParameter("report: " + path + ": needs at least two samples");
                const auto fit = local_slopes(x, y, x.size());
                json panel{{"input", path}, {"kind", kind}, {"x", xn}, {"y", yn}, {"slope", fit.front().value},
                           {"localSlopes", json::array()}};
                for (const auto& w : local_slopes(x, y, 2)) panel["localSlopes"].push_back({{"from", w.from}, {"to", w.to}, {"slope", w.value}});
                if (repGamma > 0.0) {
                    json norm = json::array();
                    for (std::size_t i = 0; i < x.size(); ++i)
                        norm.push_back(kind == "tube" ? std::pow(x[i], repGamma - 2.0) * y[i] : std::pow(x[i], repGamma / 2.0 - 1.0) * y[i]);
                    panel["normalized"] = norm;
                }
                if (!repDir.empty()) {
                    std::filesystem::create_directories(repDir);
                    std::ostringstream os;
                    write_series(os, xn, yn, x, y);
                    const std::string name = std::filesystem::path(path).stem().string() + "_" + yn + ".csv";
                    write_file((std::filesystem::path(repDir) / name).string(), os.str());
                }
                bundle["panels"].push_back(panel);
            }
            out << to_text(bundle);
            summary = "report: " + std::to_string(repInputs.size()) + " panels";
        }
    } catch (const ResourceCap& e) {
        err << "error: resource cap: " << e.what() << "\n";
        return kCap;
    } catch (const InvalidParameter& e) {
        err << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    err << summary << " [" << fmt6(secs) << " s]\n";
    return kOk;
}

}  // namespace detail

// Files named by these options are outputs recorded in manifests.
inline const std::vector<std::string>& output_flags() {
    static const std::vector<std::string> f{"-o", "--out", "--svg", "--json-out", "--csv", "--tree"};
    return f;
}

inline json make_manifest(const std::vector<std::string>& args, const std::string& stdoutText) {
    json outputs = json::array();
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (std::find(output_flags().begin(), output_flags().end(), args[i]) != output_flags().end()) {
            std::string body;
            try {
                body = read_file(args[i + 1]);
            } catch (const InvalidParameter&) {
                continue;
            }
            outputs.push_back({{"path", args[i + 1]}, {"hash", hex64(fnv1a(body))}});
        }
    return {{"version", kSchemaVersion}, {"argv", args}, {"stdoutHash", hex64(fnv1a(stdoutText))}, {"outputs", outputs},
            {"threads", thread_limit().load()}};
}

/// Runs the command line; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string manifestOut, replayIn;
    for (std::size_t i = 0; i < args.size();) {
        if ((args[i] == "--manifest" || args[i] == "--replay") && i + 1 < args.size()) {
            (args[i] == "--manifest" ? manifestOut : replayIn) = args[i + 1];
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
        } else {
            ++i;
        }
    }
    json recorded;
    if (!replayIn.empty()) {
        try {
            recorded = json::parse(read_file(replayIn));
            args = recorded.at("argv").get<std::vector<std::string>>();
        } catch (const std::exception& e) {
            err << "error: manifest " << replayIn << ": " << e.what() << "\n";
            return kInvalid;
        }
    }
    if (manifestOut.empty() && replayIn.empty()) return detail::run_once(argc, argv, out, err);

    std::vector<const char*> av{argv[0]};
    for (const auto& a : args) av.push_back(a.c_str());
    std::ostringstream captured;
    const int code = detail::run_once(static_cast<int>(av.size()), av.data(), captured, err);
    out << captured.str();
    if (code != kOk) return code;
    const json now = make_manifest(args, captured.str());
    if (!manifestOut.empty()) write_file(manifestOut, now.dump(2) + "\n");
    if (!replayIn.empty()) {
        if (now.at("stdoutHash") != recorded.at("stdoutHash") || now.at("outputs") != recorded.at("outputs")) {
            err << "error: replay of " << replayIn << " produced different outputs\n";
            return kFailure;
        }
        err << "replay: outputs match " << replayIn << "\n";
    }
    return kOk;
}

}  // namespace snowheat::cli
