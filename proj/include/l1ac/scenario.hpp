#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "l1ac/csv.hpp"
#include "l1ac/metrics.hpp"
#include "l1ac/plot.hpp"

namespace l1ac {

/// One batch experiment: plant, uncertainty, reference, tuning, horizon.
///
/// `laws` lists the control laws to run on identical inputs; more than one
/// makes a paired comparison. `controller.law` is ignored when running.
struct Scenario {
    std::string name = "scenario";
    std::string plant_preset;  // empty for explicit matrices
    UncertainPlant plant;
    ReferenceSignal reference;
    AugmentationConfig controller;
    std::vector<Law> laws{Law::modified};
    EngineConfig engine;
    double steady_state_fraction = 0.1;
};

struct RunResult {
    Law law = Law::off;
    SimTrace trace;
    Metrics metrics;
    std::uint64_t input_hash = 0;
};

struct ScenarioResult {
    std::string name;
    std::vector<RunResult> runs;
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, const std::string& where,
                       std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        throw ConfigError(where.empty() ? "(root)" : where, "must be an object");
    }
    for (const auto& [k, v] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) {
            throw ConfigError(where.empty() ? k : where + "." + k, "unknown key");
        }
    }
}

inline double get_number(const json& obj, const char* key, const std::string& where,
                         double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key, "must be a number");
    return v.get<double>();
}

inline Matrix get_matrix(const json& v, const std::string& key) {
    if (!v.is_array() || v.empty()) {
        throw ConfigError(key, "must be a non-empty list of rows");
    }
    const auto rows = static_cast<Eigen::Index>(v.size());
    Eigen::Index cols = -1;
    for (const auto& row : v) {
        if (!row.is_array() || row.empty()) throw ConfigError(key, "each row must be a non-empty list");
        if (cols < 0) cols = static_cast<Eigen::Index>(row.size());
        if (static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError(key, "ragged rows");
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            const auto& e = v[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (!e.is_number()) throw ConfigError(key, "entries must be numbers");
            m(i, j) = e.get<double>();
        }
    }
    return m;
}

/// A number or a flat list of numbers.
inline Vector get_vector(const json& v, const std::string& key) {
    if (v.is_number()) {
        return Vector::Constant(1, v.get<double>());
    }
    if (!v.is_array()) throw ConfigError(key, "must be a number or a list of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ConfigError(key, "entries must be numbers");
        out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
    }
    return out;
}

inline json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json vector_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

inline void hash_bytes(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
}

inline void hash_value(std::uint64_t& h, double v) { hash_bytes(h, &v, sizeof v); }

inline void hash_matrix(std::uint64_t& h, const Matrix& m) {
    const Eigen::Index dims[2] = {m.rows(), m.cols()};
    hash_bytes(h, dims, sizeof dims);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) hash_value(h, m(i, j));
}

}  // namespace detail

/// FNV-1a over everything a run depends on except the control law.
inline std::uint64_t shared_input_hash(const UncertainPlant& p, const AugmentationConfig& cfg,
                                       const ReferenceSignal& sig, const EngineConfig& eng) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const Matrix* m : {&p.A_M, &p.B1, &p.B2, &p.c, &p.K_r}) detail::hash_matrix(h, *m);
    detail::hash_matrix(h, p.x0);
    if (p.uncertainty.is_constant()) {
        detail::hash_matrix(h, *p.uncertainty.matched_constant());
        detail::hash_matrix(h, *p.uncertainty.unmatched_constant());
    } else {
        detail::hash_bytes(h, "fn", 2);
    }
    const int kind = static_cast<int>(sig.kind);
    detail::hash_bytes(h, &kind, sizeof kind);
    detail::hash_value(h, sig.onset);
    detail::hash_value(h, sig.magnitude);
    detail::hash_matrix(h, cfg.predictor_gain(p.states()));
    detail::hash_value(h, cfg.T_S);
    detail::hash_value(h, cfg.omega_matched);
    detail::hash_value(h, cfg.omega_unmatched);
    detail::hash_value(h, eng.t_end);
    detail::hash_bytes(h, &eng.substeps_per_sample, sizeof eng.substeps_per_sample);
    return h;
}

/// Validates a scenario completely: plant, every listed law (including the
/// control-law realization) and the engine.
inline void validate_scenario(const Scenario& s) {
    if (s.laws.empty()) {
        throw ConfigError("controller.law", "at least one law is required");
    }
    s.engine.validate();
    if (!(s.steady_state_fraction > 0.0 && s.steady_state_fraction <= 1.0)) {
        throw ConfigError("output.steady_state_fraction", "must be in (0, 1]");
    }
    if (!(s.reference.onset >= 0.0) || !std::isfinite(s.reference.magnitude)) {
        throw ConfigError("reference", "onset must be >= 0 and magnitude finite");
    }
    for (Law law : s.laws) {
        AugmentationConfig cfg = s.controller;
        cfg.law = law;
        cfg.validate(s.plant);
        ControlLaw probe(s.plant, cfg);
        (void)probe;
    }
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
    using detail::check_keys;
    using detail::get_number;
    check_keys(j, "", {"name", "plant", "uncertainty", "reference", "controller", "engine", "output"});

    Scenario s;
    if (j.contains("name")) {
        if (!j["name"].is_string()) throw ConfigError("name", "must be a string");
        s.name = j["name"].get<std::string>();
    }

    if (!j.contains("plant")) throw ConfigError("plant", "missing");
    const auto& jp = j["plant"];
    check_keys(jp, "plant", {"preset", "A_M", "B1", "B2", "c", "x0"});

    UncertaintySpec unc;
    if (j.contains("uncertainty")) {
        const auto& ju = j["uncertainty"];
        check_keys(ju, "uncertainty", {"matched", "unmatched"});
        if (!ju.contains("matched") || !ju.contains("unmatched")) {
            throw ConfigError("uncertainty", "needs both 'matched' and 'unmatched'");
        }
        unc = UncertaintySpec::constant(detail::get_vector(ju["matched"], "uncertainty.matched"),
                                        detail::get_vector(ju["unmatched"], "uncertainty.unmatched"));
    }

    std::optional<Vector> x0;
    if (jp.contains("x0")) x0 = detail::get_vector(jp["x0"], "plant.x0");

    if (jp.contains("preset")) {
        if (jp["preset"] != "paper-siso") {
            throw ConfigError("plant.preset", "unknown preset (known: paper-siso)");
        }
        for (const char* k : {"A_M", "B1", "B2", "c"}) {
            if (jp.contains(k)) throw ConfigError(std::string("plant.") + k, "not allowed with a preset");
        }
        s.plant_preset = "paper-siso";
        const UncertainPlant base = siso_benchmark();
        s.plant = make_plant(base.A_M, base.B1, base.c, std::nullopt, unc, x0);
    } else {
        for (const char* k : {"A_M", "B1", "c"}) {
            if (!jp.contains(k)) throw ConfigError(std::string("plant.") + k, "missing");
        }
        std::optional<Matrix> b2;
        if (jp.contains("B2")) b2 = detail::get_matrix(jp["B2"], "plant.B2");
        s.plant = make_plant(detail::get_matrix(jp["A_M"], "plant.A_M"),
                             detail::get_matrix(jp["B1"], "plant.B1"),
                             detail::get_matrix(jp["c"], "plant.c"), b2, unc, x0);
    }

    if (j.contains("reference")) {
        const auto& jr = j["reference"];
        check_keys(jr, "reference", {"kind", "onset", "amplitude", "gradient"});
        const std::string kind = jr.value("kind", std::string("step"));
        const double onset = get_number(jr, "onset", "reference", 0.0);
        if (kind == "step") {
            if (jr.contains("gradient")) throw ConfigError("reference.gradient", "only for ramps");
            s.reference = ReferenceSignal::step(onset, get_number(jr, "amplitude", "reference", 1.0));
        } else if (kind == "ramp") {
            if (jr.contains("amplitude")) throw ConfigError("reference.amplitude", "only for steps");
            s.reference = ReferenceSignal::ramp(onset, get_number(jr, "gradient", "reference", 1.0));
        } else {
            throw ConfigError("reference.kind", "must be 'step' or 'ramp'");
        }
        if (onset < 0.0) throw ConfigError("reference.onset", "must be >= 0");
    }

    if (j.contains("controller")) {
        const auto& jc = j["controller"];
        check_keys(jc, "controller", {"law", "T_S", "omega_matched", "omega_unmatched", "L_p"});
        if (jc.contains("law")) {
            const auto& jl = jc["law"];
            s.laws.clear();
            auto add = [&s](const nlohmann::json& v) {
                const auto law = v.is_string() ? parse_law(v.get<std::string>()) : std::nullopt;
                if (!law) {
                    throw ConfigError("controller.law",
                                      "must be original, modified, matched-only or off");
                }
                s.laws.push_back(*law);
            };
            if (jl.is_array()) {
                for (const auto& v : jl) add(v);
            } else {
                add(jl);
            }
        }
        s.controller.T_S = get_number(jc, "T_S", "controller", s.controller.T_S);
        s.controller.omega_matched =
            get_number(jc, "omega_matched", "controller", s.controller.omega_matched);
        s.controller.omega_unmatched =
            get_number(jc, "omega_unmatched", "controller", s.controller.omega_unmatched);
        if (jc.contains("L_p")) s.controller.L_p = detail::get_matrix(jc["L_p"], "controller.L_p");
    }
    s.controller.law = s.laws.empty() ? Law::modified : s.laws.front();

    if (j.contains("engine")) {
        const auto& je = j["engine"];
        check_keys(je, "engine", {"t_end", "substeps_per_sample"});
        s.engine.t_end = get_number(je, "t_end", "engine", s.engine.t_end);
        if (je.contains("substeps_per_sample")) {
            if (!je["substeps_per_sample"].is_number_integer()) {
                throw ConfigError("engine.substeps_per_sample", "must be an integer");
            }
            s.engine.substeps_per_sample = je["substeps_per_sample"].get<int>();
        }
    }

    if (j.contains("output")) {
        const auto& jo = j["output"];
        check_keys(jo, "output", {"steady_state_fraction"});
        s.steady_state_fraction =
            get_number(jo, "steady_state_fraction", "output", s.steady_state_fraction);
    }

    validate_scenario(s);
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string(), "cannot open scenario file");
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string(), std::string("parse error: ") + e.what());
    }
    return scenario_from_json(j);
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
    nlohmann::json j;
    j["name"] = s.name;
    if (!s.plant_preset.empty()) {
        j["plant"]["preset"] = s.plant_preset;
    } else {
        j["plant"]["A_M"] = detail::matrix_json(s.plant.A_M);
        j["plant"]["B1"] = detail::matrix_json(s.plant.B1);
        j["plant"]["B2"] = detail::matrix_json(s.plant.B2);
        j["plant"]["c"] = detail::matrix_json(s.plant.c);
    }
    if (!s.plant.x0.isZero(0.0)) j["plant"]["x0"] = detail::vector_json(s.plant.x0);
    if (s.plant.uncertainty.is_constant()) {
        j["uncertainty"]["matched"] = detail::vector_json(*s.plant.uncertainty.matched_constant());
        j["uncertainty"]["unmatched"] =
            detail::vector_json(*s.plant.uncertainty.unmatched_constant());
    }
    const bool step = s.reference.kind == ReferenceSignal::Kind::step;
    j["reference"] = {{"kind", step ? "step" : "ramp"}, {"onset", s.reference.onset},
                      {step ? "amplitude" : "gradient", s.reference.magnitude}};
    nlohmann::json laws = nlohmann::json::array();
    for (Law l : s.laws) laws.push_back(std::string(to_string(l)));
    j["controller"]["law"] = s.laws.size() == 1 ? laws[0] : laws;
    j["controller"]["T_S"] = s.controller.T_S;
    j["controller"]["omega_matched"] = s.controller.omega_matched;
    j["controller"]["omega_unmatched"] = s.controller.omega_unmatched;
    if (s.controller.L_p.size() != 0) j["controller"]["L_p"] = detail::matrix_json(s.controller.L_p);
    j["engine"] = {{"t_end", s.engine.t_end}, {"substeps_per_sample", s.engine.substeps_per_sample}};
    j["output"] = {{"steady_state_fraction", s.steady_state_fraction}};
    return j;
}

// ---------------------------------------------------------------------------
// Presets for the SISO validation campaign.

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "nominal-step",          "nominal-ramp",           "uncertain-step-off",
        "uncertain-step-matched-only", "uncertain-step-compare", "uncertain-ramp-compare"};
    return names;
}

/// f1 = 0.05 (matched), f2 = 0.001 (unmatched), static.
inline UncertaintySpec campaign_uncertainty() {
    return UncertaintySpec::constant(Vector::Constant(1, 0.05), Vector::Constant(1, 0.001));
}

/// L_p = -A_M - lambda I, which makes A_S = -lambda I.
///
/// The sampled estimate for a constant uncertainty f settles at
/// B^{-1} e^{A_S T_S} B f. With A_S = A_M the large B1 scale couples the two
/// channels (sigma2 picks up ~T_S * 2000 * f1); a diagonal A_S with small
/// lambda keeps the estimate within lambda * T_S of f.
inline Matrix decoupled_predictor_gain(const Matrix& a_m, double lambda) {
    return -a_m - lambda * Matrix::Identity(a_m.rows(), a_m.cols());
}

inline Scenario make_preset(const std::string& name) {
    Scenario s;
    s.name = name;
    s.plant_preset = "paper-siso";
    s.engine = EngineConfig{};
    const bool uncertain = name.rfind("uncertain-", 0) == 0;
    const bool ramp = name.find("ramp") != std::string::npos;
    s.plant = siso_benchmark(uncertain ? campaign_uncertainty() : UncertaintySpec{});
    s.reference = ramp ? ReferenceSignal::ramp(2.0, 1.0) : ReferenceSignal::step(2.0, 1.0);

    if (name == "nominal-step" || name == "nominal-ramp" || name == "uncertain-step-off") {
        s.laws = {Law::off};
    } else if (name == "uncertain-step-matched-only") {
        s.laws = {Law::matched_only};
        s.controller.L_p = decoupled_predictor_gain(s.plant.A_M, 0.01);
    } else if (name == "uncertain-step-compare" || name == "uncertain-ramp-compare") {
        s.laws = {Law::original, Law::modified};
    } else {
        throw ConfigError("preset", "unknown preset '" + name + "'");
    }
    s.controller.law = s.laws.front();
    validate_scenario(s);
    return s;
}

/// Runs every law of the scenario on identical inputs. Multiple laws run
/// concurrently; results come back in the order of `s.laws`.
inline ScenarioResult run_scenario(const Scenario& s) {
    validate_scenario(s);
    auto run_one = [&s](Law law) {
        AugmentationConfig cfg = s.controller;
        cfg.law = law;
        RunResult res;
        res.law = law;
        res.input_hash = shared_input_hash(s.plant, cfg, s.reference, s.engine);
        res.trace = run_closed_loop(s.plant, cfg, s.reference, s.engine);
        res.trace.label = std::string(to_string(law));
        res.metrics = compute_metrics(res.trace, s.reference, s.steady_state_fraction);
        return res;
    };

    ScenarioResult out;
    out.name = s.name;
    if (s.laws.size() == 1) {
        out.runs.push_back(run_one(s.laws.front()));
        return out;
    }
    std::vector<std::future<RunResult>> jobs;
    for (Law law : s.laws) {
        jobs.push_back(std::async(std::launch::async, run_one, law));
    }
    for (auto& j : jobs) out.runs.push_back(j.get());
    for (const auto& r : out.runs) {
        if (r.input_hash != out.runs.front().input_hash) {
            throw Error("run_scenario: compared runs do not share identical inputs");
        }
    }
    return out;
}

inline ScenarioResult run_preset(const std::string& name) { return run_scenario(make_preset(name)); }

inline std::string format_report(const ScenarioResult& res) {
    auto opt = [](const std::optional<double>& v, const char* unit) {
        return v ? detail::fmt(*v, 8) + unit : std::string("n/a");
    };
    std::ostringstream os;
    os << "scenario " << res.name << "\n";
    for (const auto& r : res.runs) {
        const auto& m = r.metrics;
        os << "  [" << to_string(r.law) << "]\n"
           << "    y(t_end)            " << detail::fmt(r.trace.y.back(), 10) << "\n"
           << "    final value         " << detail::fmt(m.final_value, 10) << "\n"
           << "    steady-state error  " << detail::fmt(m.steady_state_error, 6) << "\n";
        if (m.tracking_lag) {
            os << "    tracking lag        " << opt(m.tracking_lag, "") << "\n";
        } else {
            os << "    overshoot           " << opt(m.overshoot_pct, " %") << "\n"
               << "    rise time 10-90     " << opt(m.rise_time_10_90, " s") << "\n"
               << "    settling time 2%    "
               << (m.settling_time_2pct ? opt(m.settling_time_2pct, " s") : "not settled") << "\n";
        }
        os << "    ISE                 " << detail::fmt(m.tracking_error_l2, 6) << "\n"
           << "    peak |u_a|          " << detail::fmt(m.peak_u_a, 6) << "\n";
    }
    if (res.runs.size() == 2) {
        const auto& a = res.runs[0];
        const auto& b = res.runs[1];
        os << "  paired " << to_string(b.law) << " vs " << to_string(a.law) << "\n"
           << "    |y_ss difference|   "
           << detail::fmt(std::abs(a.metrics.final_value - b.metrics.final_value), 6) << "\n";
        if (a.metrics.overshoot_pct && b.metrics.overshoot_pct) {
            os << "    overshoot delta     "
               << detail::fmt(*b.metrics.overshoot_pct - *a.metrics.overshoot_pct, 6) << " %\n";
        }
        if (a.metrics.rise_time_10_90 && b.metrics.rise_time_10_90) {
            os << "    rise time delta     "
               << detail::fmt(*b.metrics.rise_time_10_90 - *a.metrics.rise_time_10_90, 6) << " s\n";
        }
        double max_dev = 0.0;
        double t_max = 0.0;
        for (std::size_t i = 0; i < std::min(a.trace.size(), b.trace.size()); ++i) {
            const double d = std::abs(a.trace.y[i] - b.trace.y[i]);
            if (d > max_dev) {
                max_dev = d;
                t_max = a.trace.t[i];
            }
        }
        os << "    max |y difference|  " << detail::fmt(max_dev, 6) << " at t = "
           << detail::fmt(t_max, 6) << " s\n";
    }
    return os.str();
}

}  // namespace l1ac
