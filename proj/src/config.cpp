#include "fibscat/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "fibscat/errors.hpp"

namespace fibscat {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        parts.push_back(trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "preset",        "nu",           "Omega.family",   "Omega.M",        "Omega.level",
        "omega.family",  "omega.m",      "omega.w0",       "rho.family",     "rho.g",
        "rho.sigma",     "rho.decay",    "rho.C",          "mu",             "grid.n",
        "grid.kmax",     "command",      "P",              "P.range",        "delta",
        "schedule.t0",   "schedule.sigma", "schedule.count", "seed",         "out",
        "state.kind",    "state.k0",     "state.x0",       "state.width",    "state.vacuum",
        "state.count",   "state.file",   "state.normalize", "mourre.lambda", "mourre.kappa",
        "mourre.P0",     "propagation.observable", "propagation.lo", "propagation.hi",
        "propagation.component", "propagation.vacuum_block", "tolerance", "monitor.enabled",
        "monitor.fraction", "monitor.threshold"};
    return keys;
}

std::vector<double> parse_vector(std::string_view text, std::string_view key, int nu) {
    auto v = parse_real_list(text, key, ',');
    if (v.size() == 1 && nu > 1) v.resize(static_cast<std::size_t>(nu), 0.0);
    if (v.size() != static_cast<std::size_t>(nu))
        fail(ErrorKind::configuration, std::string(key) + " needs " + std::to_string(nu) + " components");
    return v;
}

}  // namespace

ConfigMap ConfigMap::parse(std::istream& is, std::string_view source) {
    ConfigMap cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::configuration,
                 std::string(source) + ":" + std::to_string(lineno) + ": expected 'key = value'");
        cfg.set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
    }
    return cfg;
}

ConfigMap ConfigMap::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorKind::configuration, "cannot open config file '" + path + "'");
    return parse(is, path);
}

void ConfigMap::set(const std::string& key, const std::string& value) {
    if (key.empty()) fail(ErrorKind::configuration, "empty configuration key");
    if (!known_keys().count(key)) fail(ErrorKind::configuration, "unknown configuration key '" + key + "'");
    entries_[key] = value;
}

void ConfigMap::assign(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        fail(ErrorKind::configuration, "override '" + std::string(assignment) + "' is not key=value");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void ConfigMap::merge(const ConfigMap& other) {
    for (const auto& [k, v] : other.entries_) entries_[k] = v;
}

std::optional<std::string> ConfigMap::find(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::string ConfigMap::get(const std::string& key, const std::string& fallback) const {
    return find(key).value_or(fallback);
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    const auto v = find(key);
    return v ? parse_real(*v, key) : fallback;
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
    const auto v = find(key);
    if (!v) return fallback;
    int out = 0;
    const auto* end = v->data() + v->size();
    const auto r = std::from_chars(v->data(), end, out);
    if (r.ec != std::errc() || r.ptr != end)
        fail(ErrorKind::configuration, key + " must be an integer, got '" + *v + "'");
    return out;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    const auto v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    fail(ErrorKind::configuration, key + " must be true or false, got '" + *v + "'");
}

double parse_real(std::string_view text, std::string_view key) {
    const std::string s = trim(text);
    double out = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(out))
        fail(ErrorKind::configuration, std::string(key) + " must be a finite number, got '" + s + "'");
    return out;
}

std::vector<double> parse_real_list(std::string_view text, std::string_view key, char separator) {
    std::vector<double> out;
    for (const auto& part : split(text, separator)) out.push_back(parse_real(part, key));
    return out;
}

std::vector<std::string> preset_names() { return {"polaron", "nelson", "relativistic"}; }

ConfigMap preset(std::string_view name) {
    ConfigMap c;
    c.set("nu", "1");
    c.set("mu", "1");
    c.set("rho.family", "gaussian");
    c.set("rho.g", "0.2");
    if (name == "polaron") {
        c.set("Omega.family", "nonrelativistic");
        c.set("Omega.M", "1");
        c.set("omega.family", "constant");
        c.set("omega.w0", "1");
        c.set("rho.sigma", "2");
        c.set("grid.n", "2048");
        c.set("grid.kmax", "3");
    } else if (name == "nelson") {
        c.set("Omega.family", "nonrelativistic");
        c.set("Omega.M", "1");
        c.set("omega.family", "relativistic");
        c.set("omega.m", "1");
        c.set("rho.sigma", "1");
        c.set("grid.n", "1024");
        c.set("grid.kmax", "8");
    } else if (name == "relativistic") {
        c.set("Omega.family", "relativistic");
        c.set("Omega.M", "1");
        c.set("omega.family", "relativistic");
        c.set("omega.m", "1");
        c.set("rho.sigma", "1");
        c.set("grid.n", "1024");
        c.set("grid.kmax", "8");
    } else {
        fail(ErrorKind::configuration, "unknown preset '" + std::string(name) + "'");
    }
    return c;
}

ConfigMap resolve_config(const ConfigMap& file, const std::vector<std::string>& overrides) {
    ConfigMap layered = file;
    for (const auto& o : overrides) layered.assign(o);
    ConfigMap out;
    if (const auto name = layered.find("preset")) out = preset(*name);
    out.merge(layered);
    return out;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"spectrum",    "thresholds",  "atlas",   "mourre-check", "evolve",
                                                "propagation", "scatter",     "ac-defect", "validate"};
    return names;
}

DispersionModel build_model(const ConfigMap& c) {
    const int nu = c.get_int("nu", 1);
    Dispersion matter;
    matter.family = parse_dispersion_family(c.get("Omega.family", "nonrelativistic"));
    matter.mass = c.get_double("Omega.M", 1.0);
    matter.level = c.get_double("Omega.level", 0.0);
    Dispersion field;
    field.family = parse_dispersion_family(c.get("omega.family", "relativistic"));
    field.mass = c.get_double("omega.m", 1.0);
    field.level = c.get_double("omega.w0", 1.0);
    if (field.family == DispersionFamily::constant && c.has("omega.m") && !c.has("omega.w0"))
        fail(ErrorKind::configuration, "constant omega takes omega.w0, not omega.m");
    Coupling rho;
    rho.family = parse_coupling_family(c.get("rho.family", "gaussian"));
    rho.g = c.get_double("rho.g", 0.2);
    rho.sigma = c.get_double("rho.sigma", 1.0);
    rho.decay = c.get_double("rho.decay", 2.0);
    if (c.has("rho.C")) rho.decay_constant = c.get_double("rho.C", 0.0);
    return DispersionModel(nu, matter, field, rho, c.get_double("mu", 1.0));
}

ExperimentConfig build_experiment(const ConfigMap& c) {
    ExperimentConfig e(c, build_model(c));
    const int nu = e.model.nu();
    e.grid_n = c.get_int("grid.n", 1024);
    e.grid_kmax = c.get_double("grid.kmax", 8.0);
    (void)e.grid();  // validates the grid parameters

    e.command = c.get("command", "");
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), e.command) == names.end())
        fail(ErrorKind::configuration, "command must be one of spectrum, thresholds, atlas, mourre-check, evolve, "
                                       "propagation, scatter, ac-defect, validate (got '" + e.command + "')");

    if (c.has("P") && c.has("P.range")) fail(ErrorKind::configuration, "give either P or P.range, not both");
    if (const auto range = c.find("P.range")) {
        const auto parts = split(*range, ':');
        if (parts.size() != 3) fail(ErrorKind::configuration, "P.range must be start:stop:count");
        const double a = parse_real(parts[0], "P.range"), b = parse_real(parts[1], "P.range");
        const int n = static_cast<int>(parse_real(parts[2], "P.range"));
        if (n < 1) fail(ErrorKind::configuration, "P.range count must be positive");
        for (int i = 0; i < n; ++i) {
            std::vector<double> p(static_cast<std::size_t>(nu), 0.0);
            p[0] = n == 1 ? a : a + (b - a) * i / (n - 1);
            e.P.push_back(std::move(p));
        }
    } else {
        for (const auto& entry : split(c.get("P", "0"), ';')) e.P.push_back(parse_vector(entry, "P", nu));
    }

    e.deltas = parse_real_list(c.get("delta", "0.2;0.1;0.05"), "delta");
    for (double d : e.deltas)
        if (!(d > 0.0)) fail(ErrorKind::configuration, "delta values must be positive");
    e.schedule.t0 = c.get_double("schedule.t0", 1.0);
    e.schedule.ratio = c.get_double("schedule.sigma", 1.25);
    e.schedule.count = c.get_int("schedule.count", 20);
    e.schedule.validate();

    const auto seed_text = c.get("seed", "1");
    std::uint64_t seed = 0;
    const auto r = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed);
    if (r.ec != std::errc() || r.ptr != seed_text.data() + seed_text.size())
        fail(ErrorKind::configuration, "seed must be a nonnegative integer");
    e.seed = seed;
    e.out = c.get("out", "fibscat_" + e.command);

    auto& s = e.state;
    s.kind = c.get("state.kind", "wavepacket");
    static const std::set<std::string> kinds{"wavepacket", "mass-shell", "vacuum", "random", "file"};
    if (!kinds.count(s.kind)) fail(ErrorKind::configuration, "unknown state.kind '" + s.kind + "'");
    s.k0 = parse_vector(c.get("state.k0", "0"), "state.k0", nu);
    s.x0 = parse_vector(c.get("state.x0", "0"), "state.x0", nu);
    s.width = c.get_double("state.width", 0.25);
    if (!(s.width > 0.0)) fail(ErrorKind::configuration, "state.width must be positive");
    s.vacuum = c.get_double("state.vacuum", 0.0);
    s.count = c.get_int("state.count", 1);
    if (s.count < 1) fail(ErrorKind::configuration, "state.count must be positive");
    s.file = c.get("state.file", "");
    if (s.kind == "file" && s.file.empty()) fail(ErrorKind::configuration, "state.kind = file needs state.file");
    s.normalize = c.get_bool("state.normalize", true);

    if (const auto l = c.find("mourre.lambda")) e.mourre.lambdas = parse_real_list(*l, "mourre.lambda");
    e.mourre.kappa = c.get_double("mourre.kappa", 0.05);
    if (!(e.mourre.kappa > 0.0)) fail(ErrorKind::configuration, "mourre.kappa must be positive");
    if (const auto p0 = c.find("mourre.P0")) e.mourre.P0 = parse_vector(*p0, "mourre.P0", nu);
    if (e.command == "mourre-check" && e.mourre.lambdas.empty())
        fail(ErrorKind::configuration, "mourre-check needs mourre.lambda");

    e.propagation.kind = parse_observable_kind(c.get("propagation.observable", "large-velocity"));
    e.propagation.lo = c.get_double("propagation.lo", 0.0);
    e.propagation.hi = c.get_double("propagation.hi", 0.0);
    e.propagation.component = c.get_int("propagation.component", 0);
    e.propagation.vacuum_block = c.get_bool("propagation.vacuum_block", true);

    e.tolerance = c.get_double("tolerance", 1e-6);
    e.monitor.enabled = c.get_bool("monitor.enabled", true);
    e.monitor.fraction = c.get_double("monitor.fraction", 0.25);
    e.monitor.threshold = c.get_double("monitor.threshold", 1e-3);
    if (!(e.monitor.fraction > 0.0 && e.monitor.fraction < 0.5))
        fail(ErrorKind::configuration, "monitor.fraction must lie in (0, 0.5)");
    return e;
}

}  // namespace fibscat
