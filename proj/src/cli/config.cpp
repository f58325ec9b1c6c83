#include "bianiso/cli.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bianiso::cli {

namespace {

// Collects diagnostics while walking the document.
class Reader {
public:
    explicit Reader(std::vector<Diagnostic>& out) : out_(out) {}

    void error(const YAML::Node& at, const std::string& field, const std::string& msg) {
        add(Diagnostic::Severity::error, at, field, msg);
    }
    void warning(const YAML::Node& at, const std::string& field, const std::string& msg) {
        add(Diagnostic::Severity::warning, at, field, msg);
    }

    std::optional<double> number(const YAML::Node& n, const std::string& field) {
        if (!n || !n.IsScalar()) {
            error(n, field, "expected a number");
            return std::nullopt;
        }
        try {
            const double v = n.as<double>();
            if (!std::isfinite(v)) {
                error(n, field, "value must be finite");
                return std::nullopt;
            }
            return v;
        } catch (const YAML::Exception&) {
            error(n, field, "expected a number, got '" + n.Scalar() + "'");
            return std::nullopt;
        }
    }

    std::optional<int> integer(const YAML::Node& n, const std::string& field) {
        if (!n || !n.IsScalar()) {
            error(n, field, "expected an integer");
            return std::nullopt;
        }
        try {
            return n.as<int>();
        } catch (const YAML::Exception&) {
            error(n, field, "expected an integer, got '" + n.Scalar() + "'");
            return std::nullopt;
        }
    }

    std::optional<std::string> text(const YAML::Node& n, const std::string& field) {
        if (!n || !n.IsScalar()) {
            error(n, field, "expected a string");
            return std::nullopt;
        }
        return n.Scalar();
    }

    // number or [re, im]
    std::optional<cplx> complex(const YAML::Node& n, const std::string& field) {
        if (n && n.IsSequence() && n.size() == 2) {
            auto re = number(n[0], field + "[0]");
            auto im = number(n[1], field + "[1]");
            if (!re || !im) return std::nullopt;
            return cplx(*re, *im);
        }
        auto v = number(n, field);
        if (!v) return std::nullopt;
        return cplx(*v, 0.0);
    }

    // scalar (times I), 3-vector (diagonal) or 3×3 nested list
    std::optional<Tensor3> tensor(const YAML::Node& n, const std::string& field) {
        if (!n) return Tensor3::Zero().eval();
        if (n.IsSequence() && n.size() == 3) {
            Tensor3 t = Tensor3::Zero();
            if (n[0].IsSequence() && n[0].size() == 3) {
                for (int i = 0; i < 3; ++i) {
                    if (!n[i].IsSequence() || n[i].size() != 3) {
                        error(n[i], field, "tensor rows need three entries");
                        return std::nullopt;
                    }
                    for (int j = 0; j < 3; ++j) {
                        auto v = complex(n[i][j], field + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
                        if (!v) return std::nullopt;
                        t(i, j) = *v;
                    }
                }
                return t;
            }
            for (int i = 0; i < 3; ++i) {
                auto v = complex(n[i], field + "[" + std::to_string(i) + "]");
                if (!v) return std::nullopt;
                t(i, i) = *v;
            }
            return t;
        }
        auto v = complex(n, field);
        if (!v) return std::nullopt;
        return (*v * Tensor3::Identity()).eval();
    }

    std::optional<RealTensor3> real_tensor(const YAML::Node& n, const std::string& field) {
        auto t = tensor(n, field);
        if (!t) return std::nullopt;
        if (t->imag().norm() != 0.0) {
            error(n, field, "coupling tensors must be real");
            return std::nullopt;
        }
        return t->real().eval();
    }

    std::optional<Vec3> vector3(const YAML::Node& n, const std::string& field) {
        if (!n) return Vec3::Zero().eval();
        if (!n.IsSequence() || n.size() != 3) {
            error(n, field, "expected a list of three components");
            return std::nullopt;
        }
        Vec3 v;
        for (int i = 0; i < 3; ++i) {
            auto c = complex(n[i], field + "[" + std::to_string(i) + "]");
            if (!c) return std::nullopt;
            v(i) = *c;
        }
        return v;
    }

    void unknown_keys(const YAML::Node& map, const std::set<std::string>& known, const std::string& prefix) {
        if (!map || !map.IsMap()) return;
        for (const auto& kv : map) {
            const std::string key = kv.first.Scalar();
            if (!known.count(key)) warning(kv.first, prefix + key, "unknown key ignored");
        }
    }

private:
    void add(Diagnostic::Severity sev, const YAML::Node& at, const std::string& field, const std::string& msg) {
        Diagnostic d;
        d.severity = sev;
        d.field = field;
        d.message = msg;
        if (at.IsDefined()) d.line = at.Mark().line + 1;
        out_.push_back(d);
    }

    std::vector<Diagnostic>& out_;
};

bool is_vacuum(const medium::SusceptibilitySet& s) {
    const auto* c = std::get_if<medium::ConstantModel>(&s.model);
    return c && c->chi1.norm() == 0.0 && c->chi3.norm() == 0.0 && c->chi4.norm() == 0.0;
}

std::optional<std::vector<medium::LorentzPole>> read_poles(Reader& rd, const YAML::Node& n, const std::string& field) {
    std::vector<medium::LorentzPole> out;
    if (!n) return out;
    if (!n.IsSequence()) {
        rd.error(n, field, "expected a list of poles");
        return std::nullopt;
    }
    for (std::size_t i = 0; i < n.size(); ++i) {
        const std::string f = field + "[" + std::to_string(i) + "]";
        const YAML::Node p = n[i];
        if (!p.IsMap()) {
            rd.error(p, f, "pole must be a mapping with amplitude, omega0, gamma");
            return std::nullopt;
        }
        rd.unknown_keys(p, {"amplitude", "omega0", "gamma"}, f + ".");
        auto amp = rd.tensor(p["amplitude"], f + ".amplitude");
        auto w0 = rd.number(p["omega0"] ? p["omega0"] : p, f + ".omega0");
        auto g = p["gamma"] ? rd.number(p["gamma"], f + ".gamma") : std::optional<double>(0.0);
        if (!amp || !w0 || !g) return std::nullopt;
        if (*w0 < 0.0) rd.error(p["omega0"], f + ".omega0", "resonance frequency must be >= 0");
        if (*g < 0.0) rd.warning(p["gamma"], f + ".gamma", "negative damping describes an active (gain) medium");
        out.push_back({*amp, *w0, *g});
    }
    return out;
}

std::optional<medium::Reservoir> read_reservoir(Reader& rd, const YAML::Node& n, const std::string& field) {
    if (!n.IsMap()) {
        rd.error(n, field, "reservoir must be a mapping");
        return std::nullopt;
    }
    auto type = n["type"] ? rd.text(n["type"], field + ".type") : std::optional<std::string>("envelope");
    if (!type) return std::nullopt;
    if (*type == "envelope") {
        rd.unknown_keys(n, {"type", "width", "f", "g"}, field + ".");
        auto a = rd.number(n["width"] ? n["width"] : n, field + ".width");
        auto f = rd.real_tensor(n["f"], field + ".f");
        auto g = rd.real_tensor(n["g"], field + ".g");
        if (!a || !f || !g) return std::nullopt;
        if (!(*a > 0.0)) {
            rd.error(n["width"], field + ".width", "envelope width must be > 0");
            return std::nullopt;
        }
        return medium::EnvelopeReservoir{*a, *f, *g};
    }
    if (*type == "tabulated") {
        rd.unknown_keys(n, {"type", "omega", "f", "g"}, field + ".");
        const YAML::Node w = n["omega"];
        if (!w || !w.IsSequence() || w.size() < 2) {
            rd.error(w ? w : n, field + ".omega", "tabulated reservoir needs at least two frequencies");
            return std::nullopt;
        }
        medium::TabulatedReservoir t;
        for (std::size_t i = 0; i < w.size(); ++i) {
            auto v = rd.number(w[i], field + ".omega[" + std::to_string(i) + "]");
            if (!v) return std::nullopt;
            if (!t.omega.empty() && !(*v > t.omega.back())) {
                rd.error(w[i], field + ".omega", "frequencies must increase strictly");
                return std::nullopt;
            }
            if (*v < 0.0) {
                rd.error(w[i], field + ".omega", "frequencies must be >= 0");
                return std::nullopt;
            }
            t.omega.push_back(*v);
        }
        for (const char* key : {"f", "g"}) {
            const YAML::Node list = n[key];
            auto& dst = key[0] == 'f' ? t.f : t.g;
            if (!list) {
                dst.assign(t.omega.size(), RealTensor3::Zero());
                continue;
            }
            if (!list.IsSequence() || list.size() != t.omega.size()) {
                rd.error(list, field + "." + key, "one coupling tensor per frequency is required");
                return std::nullopt;
            }
            for (std::size_t i = 0; i < list.size(); ++i) {
                auto m = rd.real_tensor(list[i], field + "." + key + "[" + std::to_string(i) + "]");
                if (!m) return std::nullopt;
                dst.push_back(*m);
            }
        }
        return t;
    }
    rd.error(n["type"], field + ".type", "unknown reservoir type '" + *type + "' (envelope | tabulated)");
    return std::nullopt;
}

medium::ConstantModel random_medium(std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RealTensor3 a, b, c;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            a(i, j) = u(rng);
            b(i, j) = scale * u(rng);
            c(i, j) = scale * u(rng);
        }
    }
    medium::ConstantModel m;
    m.chi1 = (0.5 * a * a.transpose() + 0.2 * RealTensor3::Identity()).cast<cplx>();
    m.chi4 = (0.5 * (b + b.transpose())).cast<cplx>();
    m.chi3 = c.cast<cplx>();
    return m;
}

std::optional<medium::SusceptibilitySet> read_material(Reader& rd, const std::string& name, const YAML::Node& n,
                                                       std::uint64_t base_seed, double eps0,
                                                       const std::string& used_by) {
    const std::string field = "materials." + name;
    if (!n.IsMap()) {
        rd.error(n, field, "material must be a mapping with a 'model' key");
        return std::nullopt;
    }
    auto model = rd.text(n["model"] ? n["model"] : n, field + ".model");
    if (!model) return std::nullopt;
    medium::SusceptibilitySet set;
    set.layer_id = name;
    try {
        if (*model == "vacuum") {
            rd.unknown_keys(n, {"model"}, field + ".");
            set.model = medium::ConstantModel{};
        } else if (*model == "index") {
            rd.unknown_keys(n, {"model", "n"}, field + ".");
            auto idx = rd.complex(n["n"] ? n["n"] : n, field + ".n");
            if (!idx) return std::nullopt;
            if (idx->imag() < 0.0) rd.warning(n["n"], field + ".n", "negative extinction describes a gain medium");
            set.model = medium::ConstantModel::isotropic_index(*idx, eps0);
        } else if (*model == "constant") {
            rd.unknown_keys(n, {"model", "chi1", "chi3", "chi4"}, field + ".");
            auto c1 = rd.tensor(n["chi1"], field + ".chi1");
            auto c3 = rd.tensor(n["chi3"], field + ".chi3");
            auto c4 = rd.tensor(n["chi4"], field + ".chi4");
            if (!c1 || !c3 || !c4) return std::nullopt;
            set.model = medium::ConstantModel{*c1, *c3, *c4};
        } else if (*model == "poles") {
            rd.unknown_keys(n, {"model", "chi1", "chi3", "chi4"}, field + ".");
            auto p1 = read_poles(rd, n["chi1"], field + ".chi1");
            auto p3 = read_poles(rd, n["chi3"], field + ".chi3");
            auto p4 = read_poles(rd, n["chi4"], field + ".chi4");
            if (!p1 || !p3 || !p4) return std::nullopt;
            set.model = medium::PoleModel{*p1, *p3, *p4};
        } else if (*model == "coupling") {
            rd.unknown_keys(n, {"model", "reservoirs"}, field + ".");
            const YAML::Node list = n["reservoirs"];
            if (!list || !list.IsSequence() || list.size() == 0) {
                rd.error(list ? list : n, field + ".reservoirs", "coupling model needs a non-empty reservoir list");
                return std::nullopt;
            }
            std::vector<medium::Reservoir> res;
            for (std::size_t i = 0; i < list.size(); ++i) {
                auto r = read_reservoir(rd, list[i], field + ".reservoirs[" + std::to_string(i) + "]");
                if (!r) return std::nullopt;
                res.push_back(*r);
            }
            set.model = medium::CouplingModel(std::move(res));
        } else if (*model == "random") {
            rd.unknown_keys(n, {"model", "seed", "scale"}, field + ".");
            std::uint64_t offset = 0;
            if (n["seed"]) {
                auto s = rd.integer(n["seed"], field + ".seed");
                if (!s) return std::nullopt;
                offset = std::uint64_t(*s);
            }
            double scale = 0.15;
            if (n["scale"]) {
                auto s = rd.number(n["scale"], field + ".scale");
                if (!s) return std::nullopt;
                if (!(*s >= 0.0 && *s < 0.5)) {
                    rd.error(n["scale"], field + ".scale", "scale must lie in [0, 0.5)");
                    return std::nullopt;
                }
                scale = *s;
            }
            set.model = random_medium(base_seed * 0x9E3779B97F4A7C15ull + offset, scale);
        } else {
            rd.error(n["model"], field + ".model",
                     "unknown susceptibility model '" + *model + "'" + (used_by.empty() ? "" : " in " + used_by) +
                         " (vacuum | index | constant | poles | coupling | random)");
            return std::nullopt;
        }
    } catch (const std::exception& e) {
        rd.error(n, field, e.what());
        return std::nullopt;
    }
    return set;
}

void read_sweep(Reader& rd, const YAML::Node& n, RunConfig& cfg, bool need_omega) {
    if (!n || !n.IsMap()) {
        rd.error(n, "sweep", "missing 'sweep' section");
        return;
    }
    rd.unknown_keys(n, {"omega", "angles_deg", "azimuth_deg", "kpar"}, "sweep.");
    Sweep& s = cfg.sweep;
    if (need_omega) {
        const YAML::Node w = n["omega"];
        if (!w || !w.IsMap()) {
            rd.error(w ? w : n, "sweep.omega", "expected {min, max, count}");
        } else {
            auto lo = rd.number(w["min"] ? w["min"] : w, "sweep.omega.min");
            auto hi = rd.number(w["max"] ? w["max"] : w, "sweep.omega.max");
            auto c = rd.integer(w["count"] ? w["count"] : w, "sweep.omega.count");
            if (lo && hi && c) {
                s.omega_min = *lo;
                s.omega_max = *hi;
                s.omega_count = *c;
                if (*c < 1) rd.error(w["count"], "sweep.omega.count", "sweep count must be >= 1");
                if (!(*lo > 0.0)) rd.error(w["min"], "sweep.omega.min", "frequencies must be > 0");
                if (*hi < *lo) rd.error(w["max"], "sweep.omega.max", "max must be >= min");
                if (*c == 1 && *hi != *lo) rd.error(w["count"], "sweep.omega.count", "count 1 needs min == max");
            }
        }
    }
    const bool has_angles = bool(n["angles_deg"]), has_k = bool(n["kpar"]);
    if (has_angles == has_k) {
        rd.error(n, "sweep", "give exactly one of 'angles_deg' or 'kpar'");
        return;
    }
    if (has_angles) {
        const YAML::Node a = n["angles_deg"];
        if (!a.IsSequence() || a.size() == 0) {
            rd.error(a, "sweep.angles_deg", "expected a non-empty list");
            return;
        }
        for (std::size_t i = 0; i < a.size(); ++i) {
            auto v = rd.number(a[i], "sweep.angles_deg[" + std::to_string(i) + "]");
            if (!v) continue;
            if (!(*v >= 0.0 && *v < 90.0)) rd.error(a[i], "sweep.angles_deg", "angles must lie in [0, 90)");
            s.angles_deg.push_back(*v);
        }
        if (n["azimuth_deg"]) {
            auto v = rd.number(n["azimuth_deg"], "sweep.azimuth_deg");
            if (v) s.azimuth_deg = *v;
        }
        if (cfg.mode == RunMode::time_reconstruction)
            rd.error(a, "sweep.angles_deg", "time reconstruction needs explicit 'kpar' values");
    } else {
        const YAML::Node k = n["kpar"];
        if (!k.IsSequence() || k.size() == 0) {
            rd.error(k, "sweep.kpar", "expected a non-empty list of [kx, ky]");
            return;
        }
        for (std::size_t i = 0; i < k.size(); ++i) {
            const std::string f = "sweep.kpar[" + std::to_string(i) + "]";
            if (!k[i].IsSequence() || k[i].size() != 2) {
                rd.error(k[i], f, "expected [kx, ky]");
                continue;
            }
            auto kx = rd.number(k[i][0], f + "[0]");
            auto ky = rd.number(k[i][1], f + "[1]");
            if (kx && ky) s.kpar.push_back({*kx, *ky});
        }
    }
}

void read_pulse(Reader& rd, const YAML::Node& n, RunConfig& cfg) {
    if (!n || !n.IsMap()) {
        rd.error(n, "initial", "missing 'initial' section (center, width, d, b)");
        return;
    }
    rd.unknown_keys(n, {"center", "width", "d", "b"}, "initial.");
    auto c = rd.number(n["center"] ? n["center"] : n, "initial.center");
    auto w = rd.number(n["width"] ? n["width"] : n, "initial.width");
    auto d = rd.vector3(n["d"], "initial.d");
    auto b = rd.vector3(n["b"], "initial.b");
    if (c) cfg.pulse.center = *c;
    if (w) {
        cfg.pulse.width = *w;
        if (!(*w > 0.0)) rd.error(n["width"], "initial.width", "width must be > 0");
    }
    if (d) cfg.pulse.d = *d;
    if (b) cfg.pulse.b = *b;
    if (d && b && d->norm() == 0.0 && b->norm() == 0.0) rd.warning(n, "initial", "initial fields are zero");
}

void read_zgrid(Reader& rd, const YAML::Node& n, RunConfig& cfg) {
    if (!n || !n.IsMap()) {
        rd.error(n, "profile", "missing 'profile' section (z_min, z_max, count)");
        return;
    }
    rd.unknown_keys(n, {"z_min", "z_max", "count"}, "profile.");
    auto lo = rd.number(n["z_min"] ? n["z_min"] : n, "profile.z_min");
    auto hi = rd.number(n["z_max"] ? n["z_max"] : n, "profile.z_max");
    auto c = rd.integer(n["count"] ? n["count"] : n, "profile.count");
    if (!lo || !hi || !c) return;
    cfg.zgrid = {*lo, *hi, *c};
    if (*c < 1) rd.error(n["count"], "profile.count", "sweep count must be >= 1");
    if (*hi < *lo) rd.error(n["z_max"], "profile.z_max", "z_max must be >= z_min");
}

void read_time(Reader& rd, const YAML::Node& n, RunConfig& cfg) {
    if (!n || !n.IsMap()) {
        rd.error(n, "time", "missing 'time' section");
        return;
    }
    rd.unknown_keys(n, {"d_omega", "count", "probes", "t_min", "t_max", "t_count", "window"}, "time.");
    TimeSettings& t = cfg.time;
    auto dw = rd.number(n["d_omega"] ? n["d_omega"] : n, "time.d_omega");
    auto c = rd.integer(n["count"] ? n["count"] : n, "time.count");
    auto t0 = rd.number(n["t_min"] ? n["t_min"] : n, "time.t_min");
    auto t1 = rd.number(n["t_max"] ? n["t_max"] : n, "time.t_max");
    auto tc = rd.integer(n["t_count"] ? n["t_count"] : n, "time.t_count");
    if (dw) {
        t.d_omega = *dw;
        if (!(*dw > 0.0)) rd.error(n["d_omega"], "time.d_omega", "frequency step must be > 0");
    }
    if (c) {
        t.count = *c;
        if (*c < 2 || *c % 2 != 0)
            rd.error(n["count"], "time.count", "frequency count must be even and >= 2 (keeps ω = 0 off the grid)");
    }
    if (t0 && t1 && tc) {
        t.t_min = *t0;
        t.t_max = *t1;
        t.t_count = *tc;
        if (*tc < 1) rd.error(n["t_count"], "time.t_count", "sweep count must be >= 1");
        if (*t1 < *t0) rd.error(n["t_max"], "time.t_max", "t_max must be >= t_min");
        if (dw && *dw > 0.0) {
            const double window = std::acos(-1.0) / *dw;
            if (std::abs(*t0) > window || std::abs(*t1) > window)
                rd.error(n["t_max"], "time", "times must lie inside ±π/d_omega = ±" + std::to_string(window));
        }
    }
    const YAML::Node p = n["probes"];
    if (!p || !p.IsSequence() || p.size() == 0) {
        rd.error(p ? p : n, "time.probes", "expected a non-empty list of z positions");
    } else {
        for (std::size_t i = 0; i < p.size(); ++i) {
            auto z = rd.number(p[i], "time.probes[" + std::to_string(i) + "]");
            if (z) t.probes.push_back(*z);
        }
    }
    if (n["window"]) {
        auto w = rd.text(n["window"], "time.window");
        if (w) {
            if (*w == "raised_cosine") {
                t.raised_cosine = true;
            } else if (*w != "none") {
                rd.error(n["window"], "time.window", "window must be 'none' or 'raised_cosine'");
            }
        }
    }
}

}  // namespace

const char* to_string(RunMode m) {
    switch (m) {
        case RunMode::scattering:
            return "scattering";
        case RunMode::initial_value:
            return "initial-value";
        case RunMode::time_reconstruction:
            return "time-reconstruction";
    }
    return "?";
}

std::optional<RunMode> parse_mode(const std::string& name) {
    if (name == "scattering") return RunMode::scattering;
    if (name == "initial-value") return RunMode::initial_value;
    if (name == "time-reconstruction") return RunMode::time_reconstruction;
    return std::nullopt;
}

std::string Diagnostic::str(const std::string& path) const {
    std::ostringstream os;
    os << path;
    if (line > 0) os << ':' << line;
    os << ": " << (severity == Severity::error ? "error" : "warning") << ": ";
    if (!field.empty()) os << field << ": ";
    os << message;
    return os.str();
}

bool has_errors(const std::vector<Diagnostic>& d) {
    for (const auto& x : d)
        if (x.severity == Diagnostic::Severity::error) return true;
    return false;
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

LoadResult load_config(const std::string& path, const Overrides& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();

    LoadResult out;
    RunConfig cfg;
    cfg.path = path;
    cfg.text = buf.str();
    Reader rd(out.diagnostics);

    YAML::Node root;
    try {
        root = YAML::Load(cfg.text);
    } catch (const YAML::ParserException& e) {
        Diagnostic d;
        d.line = e.mark.line + 1;
        d.field = "syntax";
        d.message = e.msg;
        out.diagnostics.push_back(d);
        return out;
    }
    if (!root.IsMap()) {
        rd.error(root, "", "top level must be a mapping");
        return out;
    }
    rd.unknown_keys(root, {"units", "mode", "seed", "materials", "stack", "sweep", "initial", "profile", "time",
                           "output", "tolerances"},
                    "");

    // units
    if (root["units"]) {
        auto u = rd.text(root["units"], "units");
        if (u) {
            if (*u == "normalized") {
                cfg.units = UnitSystem::normalized();
            } else if (*u == "SI" || *u == "si") {
                cfg.units = UnitSystem::si();
            } else {
                rd.error(root["units"], "units", "unit system must be 'normalized' or 'SI'");
            }
            cfg.unit_name = *u == "si" ? "SI" : *u;
        }
    }

    // mode: exactly one
    if (overrides.mode) {
        cfg.mode = *overrides.mode;
    } else {
        const YAML::Node m = root["mode"];
        if (!m) {
            rd.error(root, "mode", "exactly one mode must be selected (scattering | initial-value | time-reconstruction)");
        } else if (!m.IsScalar()) {
            rd.error(m, "mode", "exactly one mode must be selected");
        } else if (auto pm = parse_mode(m.Scalar())) {
            cfg.mode = *pm;
        } else {
            rd.error(m, "mode", "unknown mode '" + m.Scalar() + "'");
        }
    }

    if (root["seed"]) {
        auto s = rd.integer(root["seed"], "seed");
        if (s) cfg.seed = std::uint64_t(*s);
    }
    if (overrides.seed) cfg.seed = *overrides.seed;

    // stack first, so material diagnostics can name the region that uses them
    const YAML::Node st = root["stack"];
    std::map<std::string, std::string> used_by;
    std::vector<std::pair<std::string, YAML::Node>> regions;
    if (!st || !st.IsMap()) {
        rd.error(st ? st : root, "stack", "missing 'stack' section (left, layers, right)");
    } else {
        rd.unknown_keys(st, {"left", "layers", "right"}, "stack.");
        auto left = rd.text(st["left"] ? st["left"] : st, "stack.left");
        if (left) regions.push_back({*left, st["left"]});
        const YAML::Node layers = st["layers"];
        if (layers) {
            if (!layers.IsSequence()) {
                rd.error(layers, "stack.layers", "expected a list of {material, thickness}");
            } else {
                for (std::size_t i = 0; i < layers.size(); ++i) {
                    const std::string f = "stack.layers[" + std::to_string(i) + "]";
                    const YAML::Node l = layers[i];
                    if (!l.IsMap()) {
                        rd.error(l, f, "expected {material, thickness}");
                        continue;
                    }
                    rd.unknown_keys(l, {"material", "thickness"}, f + ".");
                    auto mat = rd.text(l["material"] ? l["material"] : l, f + ".material");
                    auto d = rd.number(l["thickness"] ? l["thickness"] : l, f + ".thickness");
                    if (d && !(*d > 0.0)) rd.error(l["thickness"], f + ".thickness", "thickness must be > 0");
                    if (mat && d) {
                        regions.push_back({*mat, l["material"]});
                        cfg.stack.layers.push_back({*d, {}});
                    }
                }
            }
        }
        auto right = rd.text(st["right"] ? st["right"] : st, "stack.right");
        if (right) regions.push_back({*right, st["right"]});
        for (std::size_t r = 0; r < regions.size(); ++r) {
            const std::string where = r == 0 ? "stack.left"
                                      : r + 1 == regions.size() ? "stack.right"
                                                                : "stack.layers[" + std::to_string(r - 1) + "]";
            used_by.emplace(regions[r].first, where);
        }
    }

    // materials
    cfg.materials["vacuum"] = {"vacuum", medium::ConstantModel{}};
    const YAML::Node mats = root["materials"];
    if (mats) {
        if (!mats.IsMap()) {
            rd.error(mats, "materials", "expected a mapping of named materials");
        } else {
            for (const auto& kv : mats) {
                const std::string name = kv.first.Scalar();
                if (name == "vacuum") {
                    rd.error(kv.first, "materials.vacuum", "'vacuum' is built in and cannot be redefined");
                    continue;
                }
                const auto it = used_by.find(name);
                auto m = read_material(rd, name, kv.second, cfg.seed, cfg.units.eps0,
                                       it == used_by.end() ? "" : it->second);
                if (m) cfg.materials[name] = *m;
            }
        }
    }

    // resolve regions
    if (regions.size() >= 2 && regions.size() == cfg.stack.layers.size() + 2) {
        for (std::size_t r = 0; r < regions.size(); ++r) {
            const auto it = cfg.materials.find(regions[r].first);
            if (it == cfg.materials.end()) {
                const bool defined = mats && mats.IsMap() && mats[regions[r].first];
                if (!defined)
                    rd.error(regions[r].second, used_by[regions[r].first],
                             "unknown material '" + regions[r].first + "'");
                continue;
            }
            cfg.layer_names.push_back(regions[r].first);
            if (r == 0) {
                cfg.stack.left = it->second;
            } else if (r + 1 == regions.size()) {
                cfg.stack.right = it->second;
            } else {
                cfg.stack.layers[r - 1].medium = it->second;
            }
        }
        if (cfg.mode == RunMode::scattering && cfg.layer_names.size() == regions.size()) {
            if (!is_vacuum(cfg.stack.left))
                rd.error(st["left"], "stack.left", "scattering mode needs vacuum half-spaces");
            if (!is_vacuum(cfg.stack.right))
                rd.error(st["right"], "stack.right", "scattering mode needs vacuum half-spaces");
        }
    }

    read_sweep(rd, root["sweep"], cfg, cfg.mode != RunMode::time_reconstruction);
    if (cfg.mode != RunMode::scattering) read_pulse(rd, root["initial"], cfg);
    if (cfg.mode == RunMode::initial_value) read_zgrid(rd, root["profile"], cfg);
    if (cfg.mode == RunMode::time_reconstruction) read_time(rd, root["time"], cfg);

    // output
    const YAML::Node o = root["output"];
    if (o) {
        if (!o.IsMap()) {
            rd.error(o, "output", "expected {directory, stem, json}");
        } else {
            rd.unknown_keys(o, {"directory", "stem", "json"}, "output.");
            if (o["directory"]) {
                auto d = rd.text(o["directory"], "output.directory");
                if (d) cfg.output.directory = *d;
            }
            if (o["stem"]) {
                auto s = rd.text(o["stem"], "output.stem");
                if (s) {
                    if (s->empty() || s->find('/') != std::string::npos)
                        rd.error(o["stem"], "output.stem", "stem must be a plain file name");
                    cfg.output.stem = *s;
                }
            }
            if (o["json"]) {
                try {
                    cfg.output.json = o["json"].as<bool>();
                } catch (const YAML::Exception&) {
                    rd.error(o["json"], "output.json", "expected true or false");
                }
            }
        }
    }
    if (overrides.output_dir) cfg.output.directory = *overrides.output_dir;

    const YAML::Node tol = root["tolerances"];
    if (tol) {
        rd.unknown_keys(tol, {"spectrum_edge"}, "tolerances.");
        if (tol["spectrum_edge"]) {
            auto v = rd.number(tol["spectrum_edge"], "tolerances.spectrum_edge");
            if (v) {
                if (!(*v > 0.0)) rd.error(tol["spectrum_edge"], "tolerances.spectrum_edge", "must be > 0");
                cfg.tolerances.spectrum_edge = *v;
            }
        }
    }

    if (!has_errors(out.diagnostics)) out.config = std::move(cfg);
    return out;
}

std::vector<Diagnostic> validate(const std::string& path) { return load_config(path).diagnostics; }

}  // namespace bianiso::cli
