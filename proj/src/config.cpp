#include "piezotherm/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace piezotherm {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config field '" + path + "': " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const json* find(const json& j, const std::string& key) {
    if (!j.is_object()) return nullptr;
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (j.is_null()) return;
    if (!j.is_object()) fail(path, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!ok.count(it.key())) fail(join(path, it.key()), "unknown field");
    }
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

double number(const json& parent, const std::string& key, const std::string& path, double fallback) {
    const json* v = find(parent, key);
    return v ? number(*v, join(path, key)) : fallback;
}

double required_number(const json& parent, const std::string& key, const std::string& path) {
    const json* v = find(parent, key);
    if (!v) fail(join(path, key), "missing");
    return number(*v, join(path, key));
}

std::uint64_t integer(const json& parent, const std::string& key, const std::string& path, std::uint64_t fallback) {
    const json* v = find(parent, key);
    if (!v) return fallback;
    if (!v->is_number_integer() || v->get<long long>() < 0) fail(join(path, key), "expected a nonnegative integer");
    return v->get<std::uint64_t>();
}

std::size_t positive_integer(const json& parent, const std::string& key, const std::string& path,
                             std::size_t fallback) {
    const std::size_t v = integer(parent, key, path, fallback);
    if (v == 0) fail(join(path, key), "must be positive");
    return v;
}

bool boolean(const json& parent, const std::string& key, const std::string& path, bool fallback) {
    const json* v = find(parent, key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(join(path, key), "expected true or false");
    return v->get<bool>();
}

std::string string(const json& parent, const std::string& key, const std::string& path, const std::string& fallback) {
    const json* v = find(parent, key);
    if (!v) return fallback;
    if (!v->is_string()) fail(join(path, key), "expected a string");
    return v->get<std::string>();
}

std::vector<double> numbers(const json& parent, const std::string& key, const std::string& path) {
    const json* v = find(parent, key);
    if (!v) fail(join(path, key), "missing");
    if (!v->is_array() || v->empty()) fail(join(path, key), "expected a nonempty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
        out.push_back(number((*v)[i], join(path, key) + "[" + std::to_string(i) + "]"));
    }
    return out;
}

void require_increasing(const std::vector<double>& x, const std::string& path) {
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) fail(path, "abscissae must be strictly increasing");
    }
}

const json& section(const json& j, const std::string& key) {
    static const json empty = json::object();
    const json* v = find(j, key);
    if (!v) return empty;
    if (!v->is_object()) fail(key, "expected an object");
    return *v;
}

// Space-time coefficient: a number, or {"type": constant|affine|tabulated, ...}.
Coefficient coefficient(const json& j, const std::string& path) {
    if (j.is_number()) return Coefficient::constant(number(j, path));
    if (!j.is_object()) fail(path, "expected a number or an object with a 'type'");
    const std::string type = string(j, "type", path, "constant");
    if (type == "constant") {
        check_keys(j, path, {"type", "value"});
        return Coefficient::constant(required_number(j, "value", path));
    }
    if (type == "affine") {
        check_keys(j, path, {"type", "c0", "cz", "ct"});
        return Coefficient::affine(required_number(j, "c0", path), number(j, "cz", path, 0.0),
                                   number(j, "ct", path, 0.0));
    }
    if (type == "tabulated") {
        check_keys(j, path, {"type", "z", "t", "values"});
        auto z = numbers(j, "z", path);
        auto t = numbers(j, "t", path);
        auto v = numbers(j, "values", path);
        require_increasing(z, join(path, "z"));
        require_increasing(t, join(path, "t"));
        if (v.size() != z.size() * t.size()) fail(join(path, "values"), "expected size(z) * size(t) entries");
        return Coefficient::tabulated(std::move(z), std::move(t), std::move(v));
    }
    fail(join(path, "type"), "unknown coefficient type '" + type + "'");
}

RelaxationLaw relaxation(const json& j, const std::string& path) {
    if (j.is_number()) return RelaxationLaw::constant(number(j, path));
    if (!j.is_object()) fail(path, "expected a number or an object with a 'type'");
    const std::string type = string(j, "type", path, "constant");
    if (type == "constant") {
        check_keys(j, path, {"type", "value"});
        return RelaxationLaw::constant(required_number(j, "value", path));
    }
    if (type == "tabulated") {
        check_keys(j, path, {"type", "theta", "tau"});
        auto th = numbers(j, "theta", path);
        auto tau = numbers(j, "tau", path);
        require_increasing(th, join(path, "theta"));
        if (th.size() != tau.size()) fail(join(path, "tau"), "must have as many entries as theta");
        return RelaxationLaw::tabulated(std::move(th), std::move(tau));
    }
    fail(join(path, "type"), "unknown relaxation law '" + type + "'");
}

// Spatial profile of initial data.
std::vector<double> profile(const json& j, const std::string& path, const SpatialGrid& grid) {
    const auto nodes = grid.nodes();
    std::vector<double> out(nodes.size(), 0.0);
    if (j.is_null()) return out;
    if (j.is_number()) {
        std::fill(out.begin(), out.end(), number(j, path));
        return out;
    }
    if (!j.is_object()) fail(path, "expected a number or an object with a 'type'");
    const std::string type = string(j, "type", path, "constant");
    const double h = grid.length();
    if (type == "constant") {
        check_keys(j, path, {"type", "value"});
        std::fill(out.begin(), out.end(), required_number(j, "value", path));
    } else if (type == "sine" || type == "cosine") {
        check_keys(j, path, {"type", "offset", "amplitude", "mode"});
        const double off = number(j, "offset", path, 0.0);
        const double a = number(j, "amplitude", path, 1.0);
        const double m = static_cast<double>(positive_integer(j, "mode", path, 1));
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double x = m * std::numbers::pi * nodes[i] / h;
            out[i] = off + a * (type == "sine" ? std::sin(x) : std::cos(x));
        }
        if (type == "sine") {
            out.front() = off;
            out.back() = off;
        }
    } else if (type == "tabulated") {
        check_keys(j, path, {"type", "z", "values"});
        const auto z = numbers(j, "z", path);
        const auto v = numbers(j, "values", path);
        require_increasing(z, join(path, "z"));
        if (z.size() != v.size()) fail(join(path, "values"), "must have as many entries as z");
        const Coefficient c = Coefficient::tabulated(z, {0.0}, v);
        for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = c(nodes[i], 0.0);
    } else {
        fail(join(path, "type"), "unknown profile type '" + type + "'");
    }
    return out;
}

ParamMode mode(const json& mask, const std::string& key, ParamMode fallback) {
    const json* v = find(mask, key);
    if (!v) return fallback;
    if (!v->is_string()) fail("inversion.mask." + key, "expected fixed, constant or field");
    try {
        return param_mode_from_string(v->get<std::string>());
    } catch (const InvalidArgument& e) {
        fail("inversion.mask." + key, e.what());
    }
}

json default_materials() { return {{"p1", 1.1e11}, {"p2", 15.0}, {"p3", 1.3e-8}}; }

json default_coefficients() {
    return {{"rho", 7500.0},   {"c_th", 420.0},         {"k", 1.2},          {"beta", 1.0e6},
            {"tau", 1.0e-7},   {"gamma_lower", 1.0e3},  {"gamma_upper", 1.0e5}};
}

json default_excitation() {
    return {{"waveform", "sine_burst"}, {"amplitude", 100.0}, {"frequency", 1.0e3}, {"cycles", 1.0}};
}

json default_initial() { return {{"u0", 0.0}, {"u1", 0.0}, {"theta0", 293.0}}; }

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    check_keys(j, "", {"grid", "time", "solver", "materials", "coefficients", "excitation", "initial", "observation",
                       "inversion", "epsilon_study", "convergence", "derivative_check", "output"});
    ExperimentConfig c;

    const json& g = section(j, "grid");
    check_keys(g, "grid", {"h", "n_elem"});
    c.length = number(g, "h", "grid", c.length);
    if (!(c.length > 0.0)) fail("grid.h", "must be positive");
    c.n_elem = positive_integer(g, "n_elem", "grid", c.n_elem);

    const json& t = section(j, "time");
    check_keys(t, "time", {"T", "n_step"});
    c.end_time = number(t, "T", "time", c.end_time);
    if (!(c.end_time > 0.0)) fail("time.T", "must be positive");
    c.n_step = positive_integer(t, "n_step", "time", c.n_step);

    const json& s = section(j, "solver");
    check_keys(s, "solver", {"epsilon", "mollify"});
    c.epsilon = number(s, "epsilon", "solver", c.epsilon);
    if (c.epsilon < 0.0) fail("solver.epsilon", "must be nonnegative");
    c.mollify = number(s, "mollify", "solver", c.mollify);
    if (c.mollify < 0.0) fail("solver.mollify", "must be nonnegative");

    c.materials = default_materials();
    c.materials.update(section(j, "materials"));
    check_keys(c.materials, "materials", {"p1", "p2", "p3"});
    c.coefficients = default_coefficients();
    c.coefficients.update(section(j, "coefficients"));
    check_keys(c.coefficients, "coefficients", {"rho", "c_th", "k", "beta", "tau", "gamma_lower", "gamma_upper"});
    if (find(j, "excitation")) {
        c.excitation = section(j, "excitation");
    } else {
        c.excitation = default_excitation();
    }
    check_keys(c.excitation, "excitation", {"waveform", "amplitude", "frequency", "cycles", "t", "values"});
    c.initial = default_initial();
    c.initial.update(section(j, "initial"));
    check_keys(c.initial, "initial", {"u0", "u1", "theta0"});

    const json& o = section(j, "observation");
    check_keys(o, "observation", {"kind", "gamma", "delta", "seed", "lower_half"});
    try {
        c.observation_kind = trace_kind_from_string(string(o, "kind", "observation", "bulk"));
    } catch (const InvalidArgument& e) {
        fail("observation.kind", e.what());
    }
    c.gamma = number(o, "gamma", "observation", c.gamma);
    if (!(c.gamma > 0.0 && c.gamma <= 1.0)) fail("observation.gamma", "must lie in (0, 1] (fraction of h)");
    c.delta = number(o, "delta", "observation", c.delta);
    if (c.delta < 0.0) fail("observation.delta", "must be nonnegative");
    c.seed = integer(o, "seed", "observation", c.seed);
    c.lower_half = boolean(o, "lower_half", "observation", c.lower_half);

    const json& inv = section(j, "inversion");
    check_keys(inv, "inversion", {"mask", "step", "max_iter", "tikhonov", "tau_dp", "relative_tolerance",
                                  "model_weight", "basis_size", "basis_seed", "max_rejections", "truth", "data"});
    InversionConfig& ic = c.inversion;
    const json& mask = find(inv, "mask") ? inv.at("mask") : json::object();
    check_keys(mask, "inversion.mask", {"p1", "p2", "p3"});
    ic.p1 = mode(mask, "p1", ic.p1);
    ic.p2 = mode(mask, "p2", ic.p2);
    ic.p3 = mode(mask, "p3", ic.p3);
    ic.step = number(inv, "step", "inversion", ic.step);
    ic.max_iter = integer(inv, "max_iter", "inversion", ic.max_iter);
    ic.tikhonov = number(inv, "tikhonov", "inversion", ic.tikhonov);
    ic.tau_dp = number(inv, "tau_dp", "inversion", ic.tau_dp);
    ic.relative_tolerance = number(inv, "relative_tolerance", "inversion", ic.relative_tolerance);
    ic.model_weight = number(inv, "model_weight", "inversion", ic.model_weight);
    ic.basis_size = positive_integer(inv, "basis_size", "inversion", ic.basis_size);
    ic.basis_seed = integer(inv, "basis_seed", "inversion", ic.basis_seed);
    ic.max_rejections = positive_integer(inv, "max_rejections", "inversion", ic.max_rejections);
    try {
        ic.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (const json* tr = find(inv, "truth")) {
        if (!tr->is_object()) fail("inversion.truth", "expected an object");
        c.truth = default_materials();
        c.truth.update(c.materials);
        c.truth.update(*tr);
        check_keys(c.truth, "inversion.truth", {"p1", "p2", "p3"});
    }
    c.data_file = string(inv, "data", "inversion", "");

    const json& es = section(j, "epsilon_study");
    check_keys(es, "epsilon_study", {"eps"});
    if (find(es, "eps")) c.eps_list = numbers(es, "eps", "epsilon_study");
    for (std::size_t i = 0; i < c.eps_list.size(); ++i) {
        if (!(c.eps_list[i] > 0.0)) fail("epsilon_study.eps", "entries must be positive");
        if (i > 0 && c.eps_list[i] > c.eps_list[i - 1]) fail("epsilon_study.eps", "entries must be non-increasing");
    }
    if (c.eps_list.size() < 2) fail("epsilon_study.eps", "needs at least two entries");

    const json& cv = section(j, "convergence");
    check_keys(cv, "convergence", {"levels"});
    c.refinement_levels = positive_integer(cv, "levels", "convergence", c.refinement_levels);
    if (c.refinement_levels < 2) fail("convergence.levels", "needs at least two levels");

    const json& dc = section(j, "derivative_check");
    check_keys(dc, "derivative_check", {"samples"});
    c.derivative_samples = positive_integer(dc, "samples", "derivative_check", c.derivative_samples);

    const json& out = section(j, "output");
    check_keys(out, "output", {"dir"});
    c.output_dir = string(out, "dir", "output", c.output_dir);

    // Build everything once so that malformed subfields surface here.
    const Model m = c.model(true);
    (void)c.initial_data();
    if (!c.truth.is_null()) (void)c.params(c.truth, m.grid, m.time);
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
}

json ExperimentConfig::to_json() const {
    json inv = inversion.to_json();
    if (!truth.is_null()) inv["truth"] = truth;
    if (!data_file.empty()) inv["data"] = data_file;
    return {{"grid", {{"h", length}, {"n_elem", n_elem}}},
            {"time", {{"T", end_time}, {"n_step", n_step}}},
            {"solver", {{"epsilon", epsilon}, {"mollify", mollify}}},
            {"materials", materials},
            {"coefficients", coefficients},
            {"excitation", excitation},
            {"initial", initial},
            {"observation",
             {{"kind", to_string(observation_kind)},
              {"gamma", gamma},
              {"delta", delta},
              {"seed", seed},
              {"lower_half", lower_half}}},
            {"inversion", inv},
            {"epsilon_study", {{"eps", eps_list}}},
            {"convergence", {{"levels", refinement_levels}}},
            {"derivative_check", {{"samples", derivative_samples}}},
            {"output", {{"dir", output_dir}}}};
}

SpatialGrid ExperimentConfig::grid() const { return SpatialGrid(length, n_elem); }
TimeGrid ExperimentConfig::time() const { return TimeGrid(end_time, n_step); }

MaterialParams ExperimentConfig::params(const json& sec, const SpatialGrid& g, const TimeGrid& t) const {
    const std::string path = &sec == &materials ? "materials" : "inversion.truth";
    const json* p1 = find(sec, "p1");
    if (!p1) fail(join(path, "p1"), "missing");
    const json* p2 = find(sec, "p2");
    const json* p3 = find(sec, "p3");
    if (!p2) fail(join(path, "p2"), "missing");
    if (!p3) fail(join(path, "p3"), "missing");
    return MaterialParams{number(*p1, join(path, "p1")), coefficient(*p2, join(path, "p2")).sample(g, t),
                          coefficient(*p3, join(path, "p3")).sample(g, t)};
}

bool ExperimentConfig::excitation_is_zero() const {
    return string(excitation, "waveform", "excitation", "sine_burst") == "zero";
}

Model ExperimentConfig::model(bool allow_zero_excitation) const {
    const SpatialGrid g = grid();
    const TimeGrid t = time();
    const json& co = coefficients;
    PhysicalCoefficients pc{coefficient(co.at("rho"), "coefficients.rho").sample(g, t),
                            coefficient(co.at("c_th"), "coefficients.c_th").sample(g, t),
                            coefficient(co.at("k"), "coefficients.k").sample(g, t),
                            number(co.at("beta"), "coefficients.beta"),
                            relaxation(co.at("tau"), "coefficients.tau"),
                            number(co.at("gamma_lower"), "coefficients.gamma_lower"),
                            number(co.at("gamma_upper"), "coefficients.gamma_upper")};

    const std::string wf = string(excitation, "waveform", "excitation", "sine_burst");
    std::vector<double> phi_e(t.n_levels(), 0.0);
    if (wf == "sine_burst") {
        phi_e = sine_burst(t, number(excitation, "amplitude", "excitation", 1.0),
                           required_number(excitation, "frequency", "excitation"),
                           number(excitation, "cycles", "excitation", 1.0));
    } else if (wf == "tabulated") {
        const auto ts = numbers(excitation, "t", "excitation");
        const auto vs = numbers(excitation, "values", "excitation");
        require_increasing(ts, "excitation.t");
        if (ts.size() != vs.size()) fail("excitation.values", "must have as many entries as t");
        const Coefficient c = Coefficient::tabulated({0.0}, ts, vs);
        for (std::size_t n = 0; n < t.n_levels(); ++n) phi_e[n] = c(0.0, t.time(n));
    } else if (wf != "zero") {
        fail("excitation.waveform", "expected sine_burst, tabulated or zero");
    }
    ExcitationLift lift = [&] {
        try {
            return build_lift(phi_e, g, t, allow_zero_excitation);
        } catch (const InvalidArgument& e) {
            fail("excitation", e.what());
        }
    }();
    return Model{g, t, std::move(pc), params(materials, g, t), std::move(lift)};
}

InitialData ExperimentConfig::initial_data() const {
    const SpatialGrid g = grid();
    InitialData d{NodalField(g, profile(initial.at("u0"), "initial.u0", g)),
                  NodalField(g, profile(initial.at("u1"), "initial.u1", g)),
                  NodalField(g, profile(initial.at("theta0"), "initial.theta0", g))};
    try {
        d.validate();
    } catch (const InvalidArgument& e) {
        fail("initial", e.what());
    }
    if (mollify > 0.0) d = mollify_initial_data(d, mollify);
    return d;
}

}  // namespace piezotherm
