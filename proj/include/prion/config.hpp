#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "prion/errors.hpp"
#include "prion/grid.hpp"
#include "prion/initial_data.hpp"
#include "prion/integrator.hpp"
#include "prion/kernels.hpp"

namespace prion {

using Json = nlohmann::json;

struct RatesConfig {
    double B = 1.0, b = 1.0;   // beta = B y^b
    double M = 1.0, m = 0.0;   // mu = M y^m
    double S = 1.0, theta = 0.0;  // tau = S y^theta
    double eta = 1.0;
    double lambda = 1.0;
    double gamma = 1.0;
    double nu = 0.0;
    std::string k0 = "uniform";  // uniform | parabolic | table
    std::string k0_table;        // two-column file, used when k0 == "table"

    bool operator==(const RatesConfig&) const = default;
};

struct GridConfig {
    double y0 = 1.0;
    double ymax = 100.0;
    std::size_t cells = 400;
    GridMode mode = GridMode::uniform;

    bool operator==(const GridConfig&) const = default;
};

struct ProfileConfig {
    std::string type = "gaussian";  // gaussian | indicator | table
    double center = 2.5, width = 0.5, amplitude = 1.0;
    double lo = 0.0, hi = 0.0;
    std::string table;

    bool operator==(const ProfileConfig&) const = default;
};

struct TimeConfig {
    double T = 10.0;
    double dt = 1e-3;
    std::optional<double> cfl;
    Scheme scheme = Scheme::rk4;
    double output_every = 0.1;

    bool operator==(const TimeConfig&) const = default;
};

struct DiagnosticsConfig {
    std::vector<double> moment_orders;
    bool snapshots = false;
    double snapshot_every = 1.0;
    std::size_t test_functions = 10;
    std::size_t test_function_knots = 8;
    double epsilon = 1e-4;
    double alpha = 1.0;
    ProfileConfig bump{"gaussian", 4.0, 0.5, 1.0, 0.0, 0.0, ""};
    std::vector<std::size_t> ladder{100, 200, 400, 800};

    bool operator==(const DiagnosticsConfig&) const = default;
};

struct RunConfig {
    RatesConfig rates;
    GridConfig grid;
    double v0 = 2.0;
    ProfileConfig initial;
    TimeConfig time;
    DiagnosticsConfig diagnostics;

    bool operator==(const RunConfig&) const = default;
};

/// All validation problems of a configuration, reported together.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> errors)
        : std::invalid_argument(join(errors)), errors_(std::move(errors)) {}

    const std::vector<std::string>& errors() const { return errors_; }

private:
    static std::string join(const std::vector<std::string>& errors) {
        std::string s = "invalid configuration:";
        for (const auto& e : errors) s += "\n  " + e;
        return s;
    }
    std::vector<std::string> errors_;
};

namespace detail {

/// Reads fields out of one JSON object, recording type errors and unknown
/// keys instead of throwing.
class ObjectReader {
public:
    ObjectReader(const Json& obj, std::string path, std::vector<std::string>& errors)
        : obj_(obj), path_(std::move(path)), errors_(errors) {
        if (!obj_.is_object()) {
            errors_.push_back(where() + "must be an object");
            valid_ = false;
        }
    }

    template <class T>
    void number(const char* key, T& out) {
        seen_.insert(key);
        if (!valid_ || !obj_.contains(key)) return;
        const auto& v = obj_.at(key);
        if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer() || v.get<long long>() < 0) {
                errors_.push_back(where(key) + "must be a nonnegative integer");
                return;
            }
            out = v.get<T>();
        } else {
            if (!v.is_number()) {
                errors_.push_back(where(key) + "must be a number");
                return;
            }
            out = v.get<T>();
        }
    }

    void optional_number(const char* key, std::optional<double>& out) {
        seen_.insert(key);
        if (!valid_ || !obj_.contains(key)) return;
        const auto& v = obj_.at(key);
        if (v.is_null()) {
            out.reset();
        } else if (v.is_number()) {
            out = v.get<double>();
        } else {
            errors_.push_back(where(key) + "must be a number or null");
        }
    }

    void boolean(const char* key, bool& out) {
        seen_.insert(key);
        if (!valid_ || !obj_.contains(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_boolean()) {
            errors_.push_back(where(key) + "must be true or false");
            return;
        }
        out = v.get<bool>();
    }

    void string(const char* key, std::string& out) {
        seen_.insert(key);
        if (!valid_ || !obj_.contains(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_string()) {
            errors_.push_back(where(key) + "must be a string");
            return;
        }
        out = v.get<std::string>();
    }

    template <class T>
    void number_list(const char* key, std::vector<T>& out) {
        seen_.insert(key);
        if (!valid_ || !obj_.contains(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_array()) {
            errors_.push_back(where(key) + "must be an array");
            return;
        }
        std::vector<T> tmp;
        for (const auto& x : v) {
            const bool ok = std::is_integral_v<T> ? (x.is_number_integer() && x.get<long long>() >= 0) : x.is_number();
            if (!ok) {
                errors_.push_back(where(key) + (std::is_integral_v<T> ? "entries must be nonnegative integers"
                                                                      : "entries must be numbers"));
                return;
            }
            tmp.push_back(x.get<T>());
        }
        out = std::move(tmp);
    }

    const Json* child(const char* key) {
        seen_.insert(key);
        if (!valid_ || !obj_.contains(key)) return nullptr;
        return &obj_.at(key);
    }

    std::string child_path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    /// Reports keys that were never asked for.
    void finish() {
        if (!valid_) return;
        for (const auto& [k, v] : obj_.items())
            if (!seen_.count(k)) errors_.push_back("unknown key '" + child_path(k.c_str()) + "'");
    }

private:
    std::string where(const char* key = nullptr) const {
        if (key) return "'" + child_path(key) + "' ";
        return path_.empty() ? "configuration " : "'" + path_ + "' ";
    }

    const Json& obj_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
    bool valid_ = true;
};

inline std::string resolve_path(const std::string& p, const std::filesystem::path& base) {
    if (p.empty()) return p;
    std::filesystem::path path(p);
    if (path.is_relative()) path = base / path;
    return path.lexically_normal().string();
}

inline void read_profile(const Json& j, const std::string& path, ProfileConfig& p,
                         const std::filesystem::path& base, std::vector<std::string>& errors) {
    ObjectReader r(j, path, errors);
    r.string("type", p.type);
    r.number("center", p.center);
    r.number("width", p.width);
    r.number("amplitude", p.amplitude);
    r.number("lo", p.lo);
    r.number("hi", p.hi);
    r.string("table", p.table);
    r.finish();
    p.table = resolve_path(p.table, base);
    if (p.type == "gaussian") {
        if (!(p.width > 0.0)) errors.push_back("'" + path + ".width' must be > 0");
        if (!(p.amplitude >= 0.0)) errors.push_back("'" + path + ".amplitude' must be >= 0");
    } else if (p.type == "indicator") {
        if (!(p.hi > p.lo)) errors.push_back("'" + path + "' indicator needs hi > lo");
        if (!(p.amplitude >= 0.0)) errors.push_back("'" + path + ".amplitude' must be >= 0");
    } else if (p.type == "table") {
        if (p.table.empty()) errors.push_back("'" + path + ".table' must name a file");
    } else {
        errors.push_back("'" + path + ".type' must be gaussian, indicator or table");
    }
}

inline Json profile_json(const ProfileConfig& p) {
    Json j;
    j["type"] = p.type;
    j["center"] = p.center;
    j["width"] = p.width;
    j["amplitude"] = p.amplitude;
    j["lo"] = p.lo;
    j["hi"] = p.hi;
    j["table"] = p.table;
    return j;
}

/// Parses JSON text and records every key that appears twice in one object.
inline Json parse_with_duplicates(const std::string& text, std::vector<std::string>& errors) {
    std::vector<std::set<std::string>> seen;
    std::vector<std::string> names;  // key currently open at each depth
    std::string last_key;
    auto cb = [&](int depth, Json::parse_event_t event, Json& parsed) {
        switch (event) {
            case Json::parse_event_t::object_start:
                seen.emplace_back();
                names.push_back(last_key);
                break;
            case Json::parse_event_t::object_end:
                if (!seen.empty()) seen.pop_back();
                if (!names.empty()) names.pop_back();
                break;
            case Json::parse_event_t::key: {
                last_key = parsed.get<std::string>();
                if (!seen.empty() && !seen.back().insert(last_key).second) {
                    std::string path;
                    for (std::size_t k = 1; k < names.size(); ++k) path += names[k] + ".";
                    errors.push_back("duplicate key '" + path + last_key + "'");
                }
                break;
            }
            default: break;
        }
        (void)depth;
        return true;
    };
    try {
        return Json::parse(text, cb);
    } catch (const Json::parse_error& e) {
        errors.push_back(std::string("malformed JSON: ") + e.what());
        return Json();
    }
}

}  // namespace detail

/// Parses and validates a run configuration. Missing keys keep their defaults;
/// unknown keys, duplicate keys, wrong types and out-of-range values are all
/// collected into one ConfigError. Relative file names are resolved against
/// base_dir.
inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".") {
    using detail::ObjectReader;
    std::vector<std::string> errors;
    const Json root = detail::parse_with_duplicates(text, errors);
    RunConfig c;
    if (root.is_null() && !errors.empty()) throw ConfigError(errors);

    ObjectReader top(root, "", errors);
    if (const Json* j = top.child("rates")) {
        ObjectReader r(*j, "rates", errors);
        auto& x = c.rates;
        r.number("B", x.B);
        r.number("b", x.b);
        r.number("M", x.M);
        r.number("m", x.m);
        r.number("S", x.S);
        r.number("theta", x.theta);
        r.number("eta", x.eta);
        r.number("lambda", x.lambda);
        r.number("gamma", x.gamma);
        r.number("nu", x.nu);
        r.string("k0", x.k0);
        r.string("k0_table", x.k0_table);
        r.finish();
        x.k0_table = detail::resolve_path(x.k0_table, base_dir);
    }
    if (const Json* j = top.child("grid")) {
        ObjectReader r(*j, "grid", errors);
        auto& g = c.grid;
        r.number("y0", g.y0);
        r.number("ymax", g.ymax);
        r.number("cells", g.cells);
        std::string mode = to_string(g.mode);
        r.string("mode", mode);
        r.finish();
        if (mode == "uniform") g.mode = GridMode::uniform;
        else if (mode == "geometric") g.mode = GridMode::geometric;
        else errors.push_back("'grid.mode' must be uniform or geometric");
    }
    top.number("v0", c.v0);
    if (const Json* j = top.child("initial")) detail::read_profile(*j, "initial", c.initial, base_dir, errors);
    if (const Json* j = top.child("time")) {
        ObjectReader r(*j, "time", errors);
        auto& t = c.time;
        r.number("T", t.T);
        r.number("dt", t.dt);
        r.optional_number("cfl", t.cfl);
        std::string scheme = to_string(t.scheme);
        r.string("scheme", scheme);
        r.number("output_every", t.output_every);
        r.finish();
        if (scheme == "rk4") t.scheme = Scheme::rk4;
        else if (scheme == "euler") t.scheme = Scheme::euler;
        else errors.push_back("'time.scheme' must be rk4 or euler");
    }
    if (const Json* j = top.child("diagnostics")) {
        ObjectReader r(*j, "diagnostics", errors);
        auto& d = c.diagnostics;
        r.number_list("moment_orders", d.moment_orders);
        r.boolean("snapshots", d.snapshots);
        r.number("snapshot_every", d.snapshot_every);
        r.number("test_functions", d.test_functions);
        r.number("test_function_knots", d.test_function_knots);
        r.number("epsilon", d.epsilon);
        r.number("alpha", d.alpha);
        if (const Json* b = r.child("bump")) detail::read_profile(*b, "diagnostics.bump", d.bump, base_dir, errors);
        r.number_list("ladder", d.ladder);
        r.finish();
    }
    top.finish();

    // value checks
    PowerLawParams p{c.rates.B, c.rates.b, c.rates.M, c.rates.m, c.rates.S, c.rates.theta, c.rates.eta};
    for (auto& e : power_law_violations(p)) errors.push_back("rates: " + e);
    for (auto& e : scalar_violations({c.rates.lambda, c.rates.gamma, c.rates.nu, c.grid.y0}))
        errors.push_back("rates: " + e);
    if (c.rates.k0 == "table") {
        if (c.rates.k0_table.empty()) errors.push_back("'rates.k0_table' must name a file when k0 is table");
    } else if (c.rates.k0 != "uniform" && c.rates.k0 != "parabolic") {
        errors.push_back("'rates.k0' must be uniform, parabolic or table");
    }
    if (!(c.grid.ymax > 2.0 * c.grid.y0)) errors.push_back("'grid.ymax' must exceed 2 y0");
    if (c.grid.cells < 2) errors.push_back("'grid.cells' must be at least 2");
    if (!(c.v0 >= 0.0)) errors.push_back("'v0' must be >= 0");
    if (!(c.time.T > 0.0)) errors.push_back("'time.T' must be > 0");
    if (!(c.time.dt > 0.0)) errors.push_back("'time.dt' must be > 0");
    if (c.time.cfl && !(*c.time.cfl > 0.0 && *c.time.cfl <= 1.0)) errors.push_back("'time.cfl' must lie in (0, 1]");
    if (!(c.time.output_every > 0.0)) errors.push_back("'time.output_every' must be > 0");
    if (!(c.diagnostics.snapshot_every > 0.0)) errors.push_back("'diagnostics.snapshot_every' must be > 0");
    if (c.diagnostics.test_function_knots < 1) errors.push_back("'diagnostics.test_function_knots' must be >= 1");
    if (!(c.diagnostics.alpha >= 0.0)) errors.push_back("'diagnostics.alpha' must be >= 0");
    for (std::size_t n : c.diagnostics.ladder)
        if (n < 2) errors.push_back("'diagnostics.ladder' entries must be at least 2");
    if (!errors.empty()) throw ConfigError(errors);
    return c;
}

inline RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read config file " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), file.parent_path().empty() ? "." : file.parent_path());
}

/// Complete JSON form of a configuration (every field, defaults included);
/// parse_config(to_json(c).dump()) == c.
inline Json to_json(const RunConfig& c) {
    Json j;
    auto& r = j["rates"];
    r["B"] = c.rates.B;
    r["b"] = c.rates.b;
    r["M"] = c.rates.M;
    r["m"] = c.rates.m;
    r["S"] = c.rates.S;
    r["theta"] = c.rates.theta;
    r["eta"] = c.rates.eta;
    r["lambda"] = c.rates.lambda;
    r["gamma"] = c.rates.gamma;
    r["nu"] = c.rates.nu;
    r["k0"] = c.rates.k0;
    r["k0_table"] = c.rates.k0_table;
    auto& g = j["grid"];
    g["y0"] = c.grid.y0;
    g["ymax"] = c.grid.ymax;
    g["cells"] = c.grid.cells;
    g["mode"] = to_string(c.grid.mode);
    j["v0"] = c.v0;
    j["initial"] = detail::profile_json(c.initial);
    auto& t = j["time"];
    t["T"] = c.time.T;
    t["dt"] = c.time.dt;
    t["cfl"] = c.time.cfl ? Json(*c.time.cfl) : Json(nullptr);
    t["scheme"] = to_string(c.time.scheme);
    t["output_every"] = c.time.output_every;
    auto& d = j["diagnostics"];
    d["moment_orders"] = c.diagnostics.moment_orders;
    d["snapshots"] = c.diagnostics.snapshots;
    d["snapshot_every"] = c.diagnostics.snapshot_every;
    d["test_functions"] = c.diagnostics.test_functions;
    d["test_function_knots"] = c.diagnostics.test_function_knots;
    d["epsilon"] = c.diagnostics.epsilon;
    d["alpha"] = c.diagnostics.alpha;
    d["bump"] = detail::profile_json(c.diagnostics.bump);
    d["ladder"] = c.diagnostics.ladder;
    return j;
}

inline DaughterProfile make_profile_kernel(const RatesConfig& r) {
    if (r.k0 == "parabolic") return DaughterProfile::parabolic();
    if (r.k0 == "table") return DaughterProfile::tabulated(TabulatedFunction::from_file(r.k0_table));
    return DaughterProfile::uniform();
}

inline RateSet make_rates(const RunConfig& c) {
    const auto& r = c.rates;
    return make_power_law_rates({r.B, r.b, r.M, r.m, r.S, r.theta, r.eta}, {r.lambda, r.gamma, r.nu, c.grid.y0},
                                make_profile_kernel(r));
}

inline Grid make_grid(const RunConfig& c) { return Grid::make(c.grid.y0, c.grid.ymax, c.grid.cells, c.grid.mode); }

inline InitialProfile make_initial_profile(const ProfileConfig& p) {
    if (p.type == "indicator") return InitialProfile::indicator(p.lo, p.hi, p.amplitude);
    if (p.type == "table") return InitialProfile::tabulated(TabulatedFunction::from_file(p.table));
    return InitialProfile::gaussian(p.center, p.width, p.amplitude);
}

inline SimulationSetup make_setup(const RunConfig& c) {
    SimulationSetup s;
    s.grid = make_grid(c);
    s.rates = make_rates(c);
    s.v0 = c.v0;
    s.u0 = make_initial_profile(c.initial).cell_averages(s.grid);
    s.T = c.time.T;
    s.dt = c.time.dt;
    s.cfl = c.time.cfl;
    s.scheme = c.time.scheme;
    s.output_every = c.time.output_every;
    s.moment_orders = c.diagnostics.moment_orders;
    s.keep_states = true;
    return s;
}

}  // namespace prion
