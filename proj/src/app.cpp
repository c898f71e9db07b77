#include "fibscat/app.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "fibscat/errors.hpp"
#include "fibscat/mourre.hpp"
#include "fibscat/scattering.hpp"
#include "fibscat/spectral.hpp"
#include "fibscat/thresholds.hpp"

namespace fibscat {

namespace {

using json = nlohmann::json;
using Row = std::vector<std::string>;

struct FiberOutput {
    std::vector<Row> rows;
    json record = json::object();
    std::string summary;
    bool failed = false;
    bool configuration_error = false;
    std::string error;
};

std::string format_vector(std::span<const double> v, char sep = ',') {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += format_real(v[i]);
    }
    return s;
}

// compact forms for human-readable summary lines
std::string format_short(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string format_label(std::span<const double> v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += format_short(v[i]);
    }
    return s;
}

json real_json(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vector_json(std::span<const double> v) {
    json a = json::array();
    for (double x : v) a.push_back(real_json(x));
    return a;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::vector<double> P0_for(const ExperimentConfig& cfg, std::span<const double> P) {
    if (!cfg.mourre.P0.empty()) return cfg.mourre.P0;
    return std::vector<double>(P.begin(), P.end());
}

// --- per-command fiber workers ---------------------------------------------

void spectrum_fiber(const ExperimentConfig& cfg, const MomentumGrid& grid, std::span<const double> P,
                    FiberOutput& out) {
    const double sig = sigma_ess(cfg.model, P);
    const auto op = assemble_fiber(cfg.model, grid, P);
    const auto decomp = eigendecompose(op);
    const auto shell = mass_shell(op, sig);
    const auto ev = decomp.eigenvalues();
    out.rows.push_back({format_vector(P), format_real(sig), shell ? format_real(shell->energy) : "",
                        format_real(ev.front()), std::to_string(decomp.size()), std::to_string(decomp.deflated_count()),
                        std::string(to_string(decomp.provenance())), "ok"});
    out.record["Sigma_ess"] = real_json(sig);
    out.record["E0"] = shell ? real_json(shell->energy) : json(nullptr);
    out.record["lowest_eigenvalues"] = vector_json(ev.subspan(0, std::min<std::size_t>(ev.size(), 16)));
    out.record["dimension"] = decomp.size();
    out.record["deflated"] = decomp.deflated_count();
    out.summary = "Sigma_ess=" + format_short(sig) + " E0=" + (shell ? format_short(shell->energy) : "none");
}

void thresholds_fiber(const ExperimentConfig& cfg, const MomentumGrid&, std::span<const double> P, FiberOutput& out) {
    const auto th = threshold_set(cfg.model, P);
    json list = json::array();
    for (std::size_t i = 0; i < th.energies.size(); ++i) {
        const auto& w = th.witnesses[i];
        out.rows.push_back({format_vector(P), std::to_string(i), format_real(th.energies[i]),
                            std::string(to_string(w.kind)), format_vector(w.k), std::to_string(th.scan_intervals),
                            "ok"});
        list.push_back({{"energy", real_json(w.energy)}, {"kind", to_string(w.kind)}, {"k", vector_json(w.k)}});
    }
    out.record["thresholds"] = list;
    out.record["scan_intervals"] = th.scan_intervals;
    out.record["warnings"] = th.warnings;
    out.summary = std::to_string(th.energies.size()) + " threshold(s), min " +
                  (th.energies.empty() ? std::string("none") : format_short(th.energies.front()));
}

void mourre_fiber(const ExperimentConfig& cfg, const MomentumGrid& grid, std::span<const double> P, FiberOutput& out) {
    const auto P0 = P0_for(cfg, P);
    json list = json::array();
    std::string summary;
    for (double lambda : cfg.mourre.lambdas) {
        try {
            const auto r = mourre_constant(cfg.model, grid, P, P0, lambda, cfg.mourre.kappa);
            out.rows.push_back({format_vector(P), format_real(lambda), format_real(cfg.mourre.kappa),
                                format_real(r.c_est), std::to_string(r.n_window), r.threshold_in_window ? "1" : "0",
                                format_real(r.discrepancy), "ok"});
            list.push_back({{"lambda", lambda},
                            {"c_est", real_json(r.c_est)},
                            {"n_window", r.n_window},
                            {"threshold_in_window", r.threshold_in_window},
                            {"discrepancy", real_json(r.discrepancy)},
                            {"warnings", r.warnings}});
            summary += " c(" + format_short(lambda) + ")=" + format_short(r.c_est);
        } catch (const Error& err) {
            if (err.kind() == ErrorKind::configuration) throw;
            out.failed = true;
            out.rows.push_back({format_vector(P), format_real(lambda), format_real(cfg.mourre.kappa), "", "", "", "",
                                std::string(to_string(err.kind()))});
            list.push_back({{"lambda", lambda}, {"error", err.what()}});
            summary += " c(" + format_short(lambda) + ")=failed";
        }
    }
    out.record["windows"] = list;
    out.summary = "kappa=" + format_short(cfg.mourre.kappa) + summary;
}

void evolve_fiber(const ExperimentConfig& cfg, const MomentumGrid& grid, std::span<const double> P, FiberOutput& out) {
    const auto psi = make_state(cfg.state, cfg.model, grid, P, cfg.seed);
    const auto op = assemble_fiber(cfg.model, grid, P);
    const auto decomp = eigendecompose(op);
    json curve = json::array();
    double drift = 0.0;
    const double e0 = fiber_expectation(op, psi).real();
    for (double t : cfg.schedule.times()) {
        const auto psi_t = propagate(decomp, psi, t, cfg.monitor);
        const double energy = fiber_expectation(op, psi_t).real();
        const double bmass = boundary_mass(grid, psi_t, cfg.monitor.fraction);
        drift = std::max(drift, std::abs(energy - e0));
        out.rows.push_back({format_vector(P), format_real(t), format_real(psi_t.norm()), format_real(energy),
                            format_real(std::norm(psi_t.vacuum)), format_real(bmass), "ok"});
        curve.push_back({{"t", t},
                         {"norm", psi_t.norm()},
                         {"energy", energy},
                         {"vacuum_weight", std::norm(psi_t.vacuum)},
                         {"boundary_mass", bmass}});
    }
    out.record["curve"] = curve;
    out.summary = "energy=" + format_short(e0) + " drift=" + format_short(drift);
}

PropagationObservable observable_for(const PropagationSpec& spec) {
    switch (spec.kind) {
    case ObservableKind::large_velocity: return PropagationObservable::large_velocity(spec.lo, spec.hi);
    case ObservableKind::phase_space: return PropagationObservable::phase_space(spec.lo, spec.hi);
    case ObservableKind::improved_phase_space:
        return PropagationObservable::improved_phase_space(spec.lo, spec.hi, spec.component);
    case ObservableKind::minimal_velocity:
        return PropagationObservable::minimal_velocity(spec.hi > 0.0 ? spec.hi : 0.1, spec.vacuum_block);
    }
    fail(ErrorKind::configuration, "unknown observable");
}

void propagation_fiber(const ExperimentConfig& cfg, const MomentumGrid& grid, std::span<const double> P,
                       FiberOutput& out) {
    const auto obs = observable_for(cfg.propagation);
    const auto psi = make_state(cfg.state, cfg.model, grid, P, cfg.seed);
    const auto curve = propagation_monitor(cfg.model, grid, P, psi, obs, cfg.schedule, cfg.monitor);
    const std::string name(to_string(obs.kind));
    for (std::size_t i = 0; i < curve.times.size(); ++i)
        out.rows.push_back({format_vector(P), name, format_real(curve.times[i]), format_real(curve.terms[i]),
                            format_real(curve.cumulative[i]), format_real(curve.tail_slope), "ok"});
    out.record["observable"] = name;
    out.record["times"] = vector_json(curve.times);
    out.record["terms"] = vector_json(curve.terms);
    out.record["cumulative"] = vector_json(curve.cumulative);
    out.record["tail_slope"] = real_json(curve.tail_slope);
    out.summary = name + " tail_slope=" + format_short(curve.tail_slope);
}

void scatter_fiber(const ExperimentConfig& cfg, const MomentumGrid& grid, std::span<const double> P,
                   FiberOutput& out) {
    const auto psi = make_state(cfg.state, cfg.model, grid, P, cfg.seed);
    const auto ap = asymptotic_projection(cfg.model, grid, P, psi, cfg.deltas, cfg.schedule, 1e-2, cfg.monitor);
    json per_delta = json::array();
    for (std::size_t d = 0; d < ap.deltas.size(); ++d) {
        for (std::size_t i = 0; i < ap.times.size(); ++i)
            out.rows.push_back({format_vector(P), format_real(ap.deltas[d]), format_real(ap.times[i]),
                                format_real(ap.values[d][i]), i > 0 ? format_real(ap.increments[d][i - 1]) : "",
                                ap.cauchy[d] ? "1" : "0", ap.cauchy[d] ? "ok" : "convergence"});
        per_delta.push_back({{"delta", ap.deltas[d]},
                             {"values", vector_json(ap.values[d])},
                             {"increments", vector_json(ap.increments[d])},
                             {"cauchy", static_cast<bool>(ap.cauchy[d])}});
    }
    out.record["times"] = vector_json(ap.times);
    out.record["asymptotic_projection"] = {{"per_delta", per_delta},
                                           {"converged", ap.converged},
                                           {"extrapolated", real_json(ap.extrapolated)},
                                           {"delta_gap", real_json(ap.delta_gap)}};
    std::string wave_summary;
    if (psi.field.empty() || norm2(psi.field) == 0.0) {
        out.record["wave_operator"] = nullptr;
        wave_summary = " wave operator skipped (no field component)";
    } else {
        const FiberState u(0.0, psi.field);
        const auto w = wave_operator(cfg.model, grid, P, u, cfg.schedule, cfg.tolerance, cfg.monitor);
        out.record["wave_operator"] = {{"image_norm", w.image.norm()},
                                       {"input_norm", u.norm()},
                                       {"increments", vector_json(w.increments)},
                                       {"isometry_defects", vector_json(w.isometry_defects)},
                                       {"intertwining", real_json(w.intertwining)},
                                       {"converged", w.converged}};
        if (!w.converged) out.failed = true;
        wave_summary = " W+ last_increment=" + (w.increments.empty() ? std::string("n/a") : format_short(w.increments.back())) +
                       (w.converged ? "" : " (not converged)");
    }
    if (!ap.converged) out.failed = true;
    out.summary = "P0+=" + format_short(ap.extrapolated) + (ap.converged ? "" : " (not converged)") + wave_summary;
}

void ac_defect_fiber(const ExperimentConfig& cfg, const MomentumGrid& grid, std::span<const double> P,
                     FiberOutput& out) {
    AcDefectParams params;
    params.delta = cfg.deltas.back();
    for (double d : cfg.deltas) params.delta = std::min(params.delta, d);
    params.schedule = cfg.schedule;
    params.monitor = cfg.monitor;
    json list = json::array();
    double worst = 0.0;
    for (int s = 0; s < cfg.state.count; ++s) {
        const auto psi = make_state(cfg.state, cfg.model, grid, P, cfg.seed, s);
        const auto r = ac_defect(cfg.model, grid, P, psi, params);
        worst = std::max(worst, std::abs(r.defect));
        if (!r.converged) out.failed = true;
        out.rows.push_back({format_vector(P), std::to_string(s), format_real(r.defect), format_real(r.norm2),
                            format_real(r.bound_part), format_real(r.free_part),
                            r.increments.empty() ? "" : format_real(r.increments.back()), r.converged ? "1" : "0",
                            r.converged ? "ok" : "convergence"});
        list.push_back({{"state", s},
                        {"defect", real_json(r.defect)},
                        {"norm2", real_json(r.norm2)},
                        {"bound_part", real_json(r.bound_part)},
                        {"free_part", real_json(r.free_part)},
                        {"has_shell", r.has_shell},
                        {"times", vector_json(r.times)},
                        {"free_curve", vector_json(r.free_curve)},
                        {"increments", vector_json(r.increments)},
                        {"converged", r.converged}});
    }
    out.record["delta"] = params.delta;
    out.record["states"] = list;
    out.summary = "max |defect|=" + format_short(worst) + " over " + std::to_string(cfg.state.count) + " state(s)";
}

Row failure_row(const ExperimentConfig& cfg, std::span<const double> P, const std::string& kind, std::size_t width) {
    Row row(width, "");
    row.front() = format_vector(P);
    row.back() = kind;
    if (cfg.command == "propagation" && width > 1) row[1] = std::string(to_string(cfg.propagation.kind));
    return row;
}

Table header_for(const std::string& command) {
    if (command == "spectrum")
        return {{"P", "Sigma_ess", "E0", "lowest_eigenvalue", "dimension", "deflated", "provenance", "status"}, {}};
    if (command == "thresholds")
        return {{"P", "index", "energy", "kind", "witness_k", "scan_intervals", "status"}, {}};
    if (command == "atlas") return {{"P", "Sigma_ess", "E0", "thresholds", "status"}, {}};
    if (command == "mourre-check")
        return {{"P", "lambda", "kappa", "c_est", "n_window", "threshold_in_window", "discrepancy", "status"}, {}};
    if (command == "evolve") return {{"P", "t", "norm", "energy", "vacuum_weight", "boundary_mass", "status"}, {}};
    if (command == "propagation")
        return {{"P", "observable", "t", "term", "cumulative", "tail_slope", "status"}, {}};
    if (command == "scatter") return {{"P", "delta", "t", "value", "increment", "cauchy", "status"}, {}};
    if (command == "ac-defect")
        return {{"P", "state", "defect", "norm2", "bound_part", "free_part", "last_increment", "converged", "status"},
                {}};
    if (command == "validate") return {{"clause", "description", "pass", "witness_radius", "detail"}, {}};
    fail(ErrorKind::configuration, "unknown command '" + command + "'");
}

RunReport run_validate(const ExperimentConfig& cfg) {
    RunReport rep;
    rep.command = cfg.command;
    rep.table = header_for(cfg.command);
    const auto report = validate_conditions(cfg.model);
    json clauses = json::array();
    for (const auto& c : report.clauses) {
        rep.table.rows.push_back({c.clause, c.description, c.pass ? "1" : "0",
                                  c.witness_radius ? format_real(*c.witness_radius) : "", c.detail});
        clauses.push_back({{"clause", c.clause},
                           {"description", c.description},
                           {"pass", c.pass},
                           {"witness_radius", c.witness_radius ? real_json(*c.witness_radius) : json(nullptr)},
                           {"detail", c.detail}});
        rep.summary.push_back(c.clause + " " + (c.pass ? "pass" : "FAIL") + (c.detail.empty() ? "" : ": " + c.detail));
    }
    rep.json = {{"clauses", clauses}, {"all_pass", report.all_pass()}};
    rep.convergence_failure = !report.all_pass();
    return rep;
}

RunReport run_atlas(const ExperimentConfig& cfg) {
    RunReport rep;
    rep.command = cfg.command;
    rep.table = header_for(cfg.command);
    const auto grid = cfg.grid();
    const auto atlas = spectral_atlas(cfg.model, grid, cfg.P);
    json entries = json::array();
    for (const auto& e : atlas.entries) {
        std::string status = "ok";
        if (!e.ok) {
            if (e.error.rfind("configuration", 0) == 0) fail(ErrorKind::configuration, e.error);
            status = e.error.substr(0, e.error.find(' '));
            rep.convergence_failure = true;
        }
        rep.table.rows.push_back({format_vector(e.P), e.ok ? format_real(e.sigma_ess) : "",
                                  e.E0 ? format_real(*e.E0) : "", format_vector(e.thresholds, ';'), status});
        entries.push_back({{"P", vector_json(e.P)},
                           {"Sigma_ess", e.ok ? real_json(e.sigma_ess) : json(nullptr)},
                           {"E0", e.E0 ? real_json(*e.E0) : json(nullptr)},
                           {"eigenvalues_below", vector_json(e.eigenvalues_below)},
                           {"thresholds", vector_json(e.thresholds)},
                           {"ok", e.ok},
                           {"error", e.error}});
        rep.summary.push_back("P=" + format_label(e.P) + " Sigma_ess=" + format_short(e.sigma_ess) +
                              " E0=" + (e.E0 ? format_short(*e.E0) : std::string("none")) + " " + status);
    }
    rep.json = {{"entries", entries}};
    return rep;
}

}  // namespace

std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

FiberState make_state(const StateSpec& spec, const DispersionModel& model, const MomentumGrid& grid,
                      std::span<const double> P, std::uint64_t seed, int index) {
    FiberState psi;
    const std::size_t nu = static_cast<std::size_t>(grid.nu());
    auto packet = [&](std::span<const double> k0, std::span<const double> x0, double width, cplx vacuum) {
        return sample_state(grid, vacuum, [&](std::span<const double> k) {
            double r2 = 0.0, phase = 0.0;
            for (std::size_t a = 0; a < nu; ++a) {
                r2 += (k[a] - k0[a]) * (k[a] - k0[a]);
                phase -= k[a] * x0[a];
            }
            return std::exp(-0.25 * r2 / (width * width)) * std::polar(1.0, phase);
        });
    };
    if (spec.kind == "wavepacket") {
        psi = packet(spec.k0, spec.x0, spec.width, spec.vacuum);
    } else if (spec.kind == "vacuum") {
        psi = FiberState(grid.size());
        psi.vacuum = 1.0;
    } else if (spec.kind == "mass-shell") {
        const auto shell = mass_shell(model, grid, P);
        if (!shell) fail(ErrorKind::domain, "H(P) has no mass shell below Sigma_ess(P)");
        psi = shell->state;
    } else if (spec.kind == "random") {
        // a packet whose center sits 0.3 to 0.7 away from the band minimum,
        // mixed with a random vacuum amplitude
        std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(index));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const auto se = sigma_ess_detail(model, P);
        std::vector<double> dir(nu);
        double dn = 0.0;
        for (auto& d : dir) {
            d = 2.0 * unit(rng) - 1.0;
            dn += d * d;
        }
        dn = std::sqrt(dn);
        const double offset = 0.3 + 0.4 * unit(rng);
        std::vector<double> k0(nu), x0(nu);
        for (std::size_t a = 0; a < nu; ++a) {
            k0[a] = se.minimizer[a] + offset * dir[a] / dn;
            x0[a] = 40.0 * unit(rng) - 20.0;
        }
        const double width = 0.06 + 0.06 * unit(rng);
        const cplx vac = std::polar(unit(rng), 2.0 * std::numbers::pi * unit(rng));
        psi = packet(k0, x0, width, vac);
    } else if (spec.kind == "file") {
        std::ifstream is(spec.file);
        if (!is) fail(ErrorKind::configuration, "cannot open state file '" + spec.file + "'");
        psi = read_state_csv(is, grid.size());
    } else {
        fail(ErrorKind::configuration, "unknown state.kind '" + spec.kind + "'");
    }
    if (spec.normalize) {
        const double n = psi.norm();
        if (!(n > 0.0)) fail(ErrorKind::domain, "test state vanishes on the grid");
        psi *= 1.0 / n;
    }
    return psi;
}

RunReport execute(const ExperimentConfig& cfg) {
    if (cfg.command == "validate") return run_validate(cfg);
    if (cfg.command == "atlas") return run_atlas(cfg);

    using Worker = void (*)(const ExperimentConfig&, const MomentumGrid&, std::span<const double>, FiberOutput&);
    Worker worker = nullptr;
    if (cfg.command == "spectrum") worker = spectrum_fiber;
    else if (cfg.command == "thresholds") worker = thresholds_fiber;
    else if (cfg.command == "mourre-check") worker = mourre_fiber;
    else if (cfg.command == "evolve") worker = evolve_fiber;
    else if (cfg.command == "propagation") worker = propagation_fiber;
    else if (cfg.command == "scatter") worker = scatter_fiber;
    else if (cfg.command == "ac-defect") worker = ac_defect_fiber;
    else fail(ErrorKind::configuration, "unknown command '" + cfg.command + "'");
    if (cfg.command == "propagation") (void)observable_for(cfg.propagation);

    RunReport rep;
    rep.command = cfg.command;
    rep.table = header_for(cfg.command);
    const auto grid = cfg.grid();
    const std::size_t n = cfg.P.size();
    std::vector<FiberOutput> outputs(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        auto& o = outputs[i];
        try {
            worker(cfg, grid, cfg.P[i], o);
        } catch (const Error& err) {
            o.failed = true;
            o.configuration_error = err.kind() == ErrorKind::configuration;
            o.error = err.what();
            o.rows.push_back(failure_row(cfg, cfg.P[i], std::string(to_string(err.kind())), rep.table.header.size()));
            o.summary = "failed: " + o.error;
        }
    }
    json fibers = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        auto& o = outputs[i];
        if (o.configuration_error) fail(ErrorKind::configuration, o.error.substr(o.error.find(':') + 2));
        for (auto& r : o.rows) rep.table.rows.push_back(std::move(r));
        o.record["P"] = vector_json(cfg.P[i]);
        o.record["failed"] = o.failed;
        if (!o.error.empty()) o.record["error"] = o.error;
        fibers.push_back(std::move(o.record));
        rep.summary.push_back("P=" + format_label(cfg.P[i]) + " " + cfg.command + ": " + o.summary);
        rep.convergence_failure = rep.convergence_failure || o.failed;
    }
    rep.json = {{"fibers", fibers}};
    return rep;
}

void write_csv(std::ostream& os, const ExperimentConfig& cfg, const RunReport& report) {
    os << "# fibscat " << FIBSCAT_VERSION << "\n";
    for (const auto& [k, v] : cfg.raw.entries()) os << "# " << k << " = " << v << "\n";
    for (std::size_t i = 0; i < report.table.header.size(); ++i)
        os << (i ? "," : "") << report.table.header[i];
    os << "\n";
    for (const auto& row : report.table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
        os << "\n";
    }
}

void write_json(std::ostream& os, const ExperimentConfig& cfg, const RunReport& report) {
    json doc;
    doc["version"] = FIBSCAT_VERSION;
    doc["command"] = report.command;
    doc["config"] = cfg.raw.entries();
    doc["columns"] = report.table.header;
    doc["rows"] = report.table.rows;
    doc["results"] = report.json;
    doc["convergence_failure"] = report.convergence_failure;
    os << doc.dump(2) << "\n";
}

int run(const ExperimentConfig& cfg, std::ostream& log) {
    const auto report = execute(cfg);
    {
        std::ofstream csv(cfg.out + ".csv");
        if (!csv) fail(ErrorKind::configuration, "cannot write '" + cfg.out + ".csv'");
        write_csv(csv, cfg, report);
    }
    {
        std::ofstream js(cfg.out + ".json");
        if (!js) fail(ErrorKind::configuration, "cannot write '" + cfg.out + ".json'");
        write_json(js, cfg, report);
    }
    for (const auto& line : report.summary) log << line << "\n";
    return report.convergence_failure ? 2 : 0;
}

}  // namespace fibscat
